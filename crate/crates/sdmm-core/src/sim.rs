//! Seeded straggler simulator.
//!
//! Task times are shifted-exponential: a fixed setup time nu plus an
//! exponential tail with per-worker rate lambda. Every (trial, worker) pair
//! gets its own counter-derived ChaCha8 stream, so results are reproducible
//! bit-for-bit for a fixed seed no matter how trials are scheduled across
//! threads.
//!
//! Two execution models are covered. Static schemes upload all m sub-tasks
//! per worker up front and finish when the recovery-threshold-th sub-task
//! result arrives anywhere in the system. The rateless scheme assigns coded
//! sub-tasks round by round to speed clusters and finishes when enough
//! useful coefficients have been banked; its upload consumption is counted
//! per delivered round and checked against the budget after the fact.

use crate::rateless::{cluster_assign, decode_target, useful_per_round};
use crate::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// One worker's speed model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorkerProfile {
    /// Exponential rate of the task-time tail. Larger is faster.
    pub lambda: f64,
    /// Deterministic setup floor added to every task.
    pub nu: f64,
}

/// Where a deviating worker's temporary rate comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum RedrawLaw {
    /// Uniform over a fixed set of rates (typically the class rates).
    Choices(Vec<f64>),
    /// Uniform over a continuous interval of rates.
    Interval(f64, f64),
    /// Uniform over the exponent: 10^U(log10 lo, log10 hi). Matches rate
    /// sets that are themselves exponent-spaced.
    LogInterval(f64, f64),
    /// Uniform over exactly two rates.
    Pair(f64, f64),
}

impl RedrawLaw {
    fn draw<R: Rng>(&self, rng: &mut R) -> f64 {
        match self {
            RedrawLaw::Choices(set) => set[rng.gen_range(0..set.len())],
            RedrawLaw::Interval(lo, hi) => rng.gen_range(*lo..=*hi),
            RedrawLaw::LogInterval(lo, hi) => 10f64.powf(rng.gen_range(lo.log10()..=hi.log10())),
            RedrawLaw::Pair(a, b) => {
                if rng.gen::<bool>() {
                    *a
                } else {
                    *b
                }
            }
        }
    }
}

/// Whether worker speeds hold across the run or wobble per unit of work.
#[derive(Debug, Clone, PartialEq)]
pub enum Stability {
    Stable,
    /// Before each task (static schemes) or round (rateless), the worker
    /// keeps its base rate with probability 1-rho and otherwise works that
    /// unit at a rate drawn from the law. Deviations do not persist.
    MostlyStable { rho: f64, law: RedrawLaw },
}

fn redraw_event<R: Rng>(
    profile: &WorkerProfile,
    rho: f64,
    law: &RedrawLaw,
    rng: &mut R,
) -> (WorkerProfile, bool) {
    let u: f64 = rng.gen();
    if u < rho {
        let p = WorkerProfile {
            lambda: law.draw(rng),
            nu: profile.nu,
        };
        (p, true)
    } else {
        (*profile, false)
    }
}

/// One unit-of-work rate: the base profile, possibly redrawn for this unit.
pub fn mostly_stable_redraw<R: Rng>(
    profile: &WorkerProfile,
    rho: f64,
    law: &RedrawLaw,
    rng: &mut R,
) -> WorkerProfile {
    redraw_event(profile, rho, law, rng).0
}

/// Draws this unit's profile and reports whether the redraw event fired.
fn unit_profile<R: Rng>(
    profile: &WorkerProfile,
    stability: &Stability,
    rng: &mut R,
) -> (WorkerProfile, bool) {
    match stability {
        Stability::Stable => (*profile, false),
        Stability::MostlyStable { rho, law } => redraw_event(profile, *rho, law, rng),
    }
}

/// Inverse-CDF sample of nu + Exp(lambda). The uniform draw lies in [0, 1),
/// so u = 0 maps to exactly nu and the tail stays finite.
pub fn sample_task_time<R: Rng>(profile: &WorkerProfile, rng: &mut R) -> f64 {
    let u: f64 = rng.gen();
    profile.nu - (1.0 - u).ln() / profile.lambda
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent stream for one (trial, worker) cell of the experiment.
pub fn trial_worker_rng(master_seed: u64, trial: u64, worker: u64) -> ChaCha8Rng {
    let s = splitmix64(splitmix64(splitmix64(master_seed).wrapping_add(trial)).wrapping_add(worker));
    ChaCha8Rng::seed_from_u64(s)
}

/// Expands (lambda, count) classes into per-worker profiles, class order
/// preserved.
pub fn expand_classes(classes: &[(f64, usize)], nu: f64) -> Vec<WorkerProfile> {
    classes
        .iter()
        .flat_map(|&(lambda, count)| std::iter::repeat_n(WorkerProfile { lambda, nu }, count))
        .collect()
}

/// Completion time of the r_th-th sub-task result across all workers, each
/// worker grinding through its m sub-tasks back to back from time zero.
/// None when n·m cannot reach the threshold.
pub fn act_static(
    profiles: &[WorkerProfile],
    m: usize,
    r_th: usize,
    stability: &Stability,
    master_seed: u64,
    trial: u64,
) -> Option<f64> {
    let n = profiles.len();
    if n * m < r_th || r_th == 0 {
        return None;
    }
    let mut completions = Vec::with_capacity(n * m);
    for (w, profile) in profiles.iter().enumerate() {
        let mut rng = trial_worker_rng(master_seed, trial, w as u64);
        let mut cum = 0.0;
        for _ in 0..m {
            let (p, _) = unit_profile(profile, stability, &mut rng);
            cum += sample_task_time(&p, &mut rng);
            completions.push(cum);
        }
    }
    let (_, kth, _) = completions.select_nth_unstable_by(r_th - 1, f64::total_cmp);
    Some(*kth)
}

/// Rateless execution knobs. Defaults match the reference experiments.
#[derive(Debug, Clone, PartialEq)]
pub struct RatelessSpec {
    pub clusters: usize,
    /// Fountain decoding overshoot fraction.
    pub eps: f64,
    /// Bank a cluster's round only once the fastest cluster has finished the
    /// same round (it carries shared randomness).
    pub gate_on_fastest: bool,
    /// Whether the speed-estimation round's uploads count against the budget.
    pub estimation_counts_budget: bool,
    /// Cluster on true rates rather than the noisy single-task estimates.
    pub cluster_by_true_speed: bool,
    /// When a worker's rate deviates mid-round, the master notices the
    /// straggling round and re-forms the cluster's pipeline behind it: every
    /// member restarts from the round's completion instead of keeping its
    /// head start. Irrelevant for stable workers.
    pub resync_on_deviation: bool,
}

impl Default for RatelessSpec {
    fn default() -> Self {
        RatelessSpec {
            clusters: 3,
            eps: 0.05,
            gate_on_fastest: true,
            estimation_counts_budget: true,
            cluster_by_true_speed: true,
            resync_on_deviation: true,
        }
    }
}

/// Outcome of one rateless trial. The run itself is budget-free; the caller
/// compares `used_partitions` against the budget to classify the trial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatelessTrial {
    /// Time when the decode target was met.
    pub decode_time: f64,
    /// 2 partitions per sub-task in every banked round, plus the estimation
    /// round when configured to count.
    pub used_partitions: u64,
    /// Sub-tasks the master actually consumed: estimation plus banked rounds.
    pub total_subtasks: u64,
    /// Whether the decode target was reachable at all (some cluster yields).
    pub decodable: bool,
}

/// Simulates one rateless trial.
///
/// Round 0 is speed estimation: one task per worker, no yield. Afterwards
/// every worker chains sub-tasks without waiting for anyone; a cluster's
/// round r is done when all its members have finished r post-estimation
/// tasks, which banks its per-round yield (gated on the fastest cluster's
/// round r when enabled). Decoding fires when banked yields reach the
/// target.
// The argument list mirrors the experiment grid axes; bundling them into a
// struct would just move the same names one level down.
#[allow(clippy::too_many_arguments)]
pub fn act_rateless(
    profiles: &[WorkerProfile],
    spec: &RatelessSpec,
    t_colluding: usize,
    k: usize,
    l: usize,
    stability: &Stability,
    master_seed: u64,
    trial: u64,
) -> Result<RatelessTrial> {
    let n = profiles.len();
    if spec.clusters == 0 || spec.clusters > n {
        return Err(Error::InvalidParams(format!(
            "cannot split {n} workers into {} clusters",
            spec.clusters
        )));
    }
    let target = decode_target(k, l, spec.eps)?;
    let mut rngs: Vec<ChaCha8Rng> = (0..n)
        .map(|w| trial_worker_rng(master_seed, trial, w as u64))
        .collect();

    // estimation round
    let mut est = Vec::with_capacity(n);
    for (w, profile) in profiles.iter().enumerate() {
        let (p, _) = unit_profile(profile, stability, &mut rngs[w]);
        est.push(sample_task_time(&p, &mut rngs[w]));
    }
    let speeds: Vec<f64> = if spec.cluster_by_true_speed {
        profiles.iter().map(|p| p.lambda).collect()
    } else {
        est.iter().map(|&t| 1.0 / t).collect()
    };
    let plan = cluster_assign(&speeds, spec.clusters)?;
    let yields: Vec<usize> = plan
        .members
        .iter()
        .enumerate()
        .map(|(u, members)| useful_per_round(members.len(), u, t_colluding))
        .collect();

    let est_tasks = n as u64;
    let est_budget = if spec.estimation_counts_budget { est_tasks } else { 0 };
    if yields.iter().all(|&d| d == 0) {
        return Ok(RatelessTrial {
            decode_time: f64::INFINITY,
            used_partitions: 2 * est_budget,
            total_subtasks: est_tasks,
            decodable: false,
        });
    }

    struct Cluster {
        members: Vec<usize>,
        cum: Vec<f64>,
        finish: Vec<f64>, // finish[r-1] = completion time of round r
        delivered: usize,
    }
    let mut clusters: Vec<Cluster> = plan
        .members
        .iter()
        .map(|members| Cluster {
            cum: members.iter().map(|&w| est[w]).collect(),
            members: members.clone(),
            finish: Vec::new(),
            delivered: 0,
        })
        .collect();

    // advance cluster u so that finish times exist through round r
    fn extend_to(
        cl: &mut Cluster,
        r: usize,
        profiles: &[WorkerProfile],
        stability: &Stability,
        resync: bool,
        rngs: &mut [ChaCha8Rng],
    ) {
        while cl.finish.len() < r {
            let mut round_max = f64::NEG_INFINITY;
            let mut deviated = false;
            for (slot, &w) in cl.members.iter().enumerate() {
                let (p, dev) = unit_profile(&profiles[w], stability, &mut rngs[w]);
                deviated |= dev;
                cl.cum[slot] += sample_task_time(&p, &mut rngs[w]);
                round_max = round_max.max(cl.cum[slot]);
            }
            if resync && deviated {
                cl.cum.fill(round_max);
            }
            cl.finish.push(round_max);
        }
    }

    let mut banked = 0usize;
    let decode_time;
    loop {
        // candidate next yield per cluster that still yields
        let mut best: Option<(f64, usize)> = None;
        for u in 0..clusters.len() {
            if yields[u] == 0 {
                continue;
            }
            let r = clusters[u].delivered + 1;
            let resync = spec.resync_on_deviation;
            extend_to(&mut clusters[u], r, profiles, stability, resync, &mut rngs);
            let mut when = clusters[u].finish[r - 1];
            if spec.gate_on_fastest && u != 0 {
                extend_to(&mut clusters[0], r, profiles, stability, resync, &mut rngs);
                when = when.max(clusters[0].finish[r - 1]);
            }
            if best.is_none_or(|(bt, _)| when < bt) {
                best = Some((when, u));
            }
        }
        let (when, u) = best.expect("at least one cluster yields");
        clusters[u].delivered += 1;
        banked += yields[u];
        if banked >= target {
            decode_time = when;
            break;
        }
    }

    let delivered_tasks: u64 = clusters
        .iter()
        .map(|cl| (cl.members.len() * cl.delivered) as u64)
        .sum();
    Ok(RatelessTrial {
        decode_time,
        used_partitions: 2 * (est_budget + delivered_tasks),
        total_subtasks: est_tasks + delivered_tasks,
        decodable: true,
    })
}

/// Static schemes the sweep can price against an upload budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StaticScheme {
    Sbp,
    MmGasp,
}

/// Sub-tasks per worker affordable under a budget of `ucb` partition
/// uploads. The bivariate scheme ships one A partition plus m B partitions
/// per worker (m capped at L); the matched-partition scheme ships m of each.
/// None when even m = 1 does not fit.
pub fn m_from_ucb(scheme: StaticScheme, ucb: u64, n: usize, l: usize) -> Option<usize> {
    let m = match scheme {
        StaticScheme::Sbp => (ucb / n as u64).saturating_sub(1).min(l as u64),
        StaticScheme::MmGasp => ucb / (2 * n as u64),
    };
    if m == 0 {
        None
    } else {
        Some(m as usize)
    }
}

/// What to simulate at each budget point.
#[derive(Debug, Clone, PartialEq)]
pub enum SchemeKind {
    Sbp,
    MmGasp,
    Rateless(RatelessSpec),
    /// Fixed split (m_a, m_b); the budget column reports its actual cost.
    Naive { m_a: usize, m_b: usize },
}

impl SchemeKind {
    pub fn label(&self) -> &'static str {
        match self {
            SchemeKind::Sbp => "sbp",
            SchemeKind::MmGasp => "mm-gasp",
            SchemeKind::Rateless(_) => "rateless",
            SchemeKind::Naive { .. } => "naive",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub scheme: SchemeKind,
    pub k: usize,
    pub l: usize,
    pub t: usize,
    pub nu: f64,
    pub classes: Vec<(f64, usize)>,
    pub stability: Stability,
    pub ucbs: Vec<u64>,
    pub trials: usize,
    pub seed: u64,
}

impl SweepConfig {
    pub fn n(&self) -> usize {
        self.classes.iter().map(|&(_, c)| c).sum()
    }
}

/// One output row of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub ucb: u64,
    pub scheme: &'static str,
    pub clusters: Option<usize>,
    pub m: Option<usize>,
    /// Static schemes: the recovery threshold. Rateless: mean sub-tasks
    /// consumed at decode time over feasible trials.
    pub r_th: Option<f64>,
    pub act_mean: Option<f64>,
    pub act_std: Option<f64>,
    pub feasible_frac: f64,
    pub trials: usize,
    pub seed: u64,
}

fn mean_std(values: &[f64]) -> (Option<f64>, Option<f64>) {
    if values.is_empty() {
        return (None, None);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (Some(mean), Some(0.0));
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (Some(mean), Some(var.sqrt()))
}

/// Runs every budget point of the configured sweep. Trials parallelize
/// across threads; aggregation happens in trial order so the output is
/// independent of thread count.
pub fn run_sweep(config: &SweepConfig) -> Result<Vec<SweepRow>> {
    let profiles = expand_classes(&config.classes, config.nu);
    let n = profiles.len();
    if n == 0 {
        return Err(Error::InvalidParams("no workers configured".into()));
    }
    let mut rows = Vec::with_capacity(config.ucbs.len());
    for &ucb in &config.ucbs {
        let row = match &config.scheme {
            SchemeKind::Sbp | SchemeKind::MmGasp => {
                let (kind, label) = match config.scheme {
                    SchemeKind::Sbp => (StaticScheme::Sbp, "sbp"),
                    _ => (StaticScheme::MmGasp, "mm-gasp"),
                };
                let m = m_from_ucb(kind, ucb, n, config.l);
                let r_th = match (kind, m) {
                    (StaticScheme::Sbp, Some(m)) => {
                        Some(crate::sbp::recovery_threshold(config.k, config.l, config.t, m)?)
                    }
                    (StaticScheme::MmGasp, Some(m)) => {
                        Some(crate::gasp::mm_gasp_recovery_threshold(config.k, config.l, config.t, m)?)
                    }
                    _ => None,
                };
                static_row(config, &profiles, label, ucb, m, r_th)
            }
            SchemeKind::Naive { m_a, m_b } => {
                let r_th = crate::naive::recovery_threshold(config.k, config.l, config.t, *m_a, *m_b)?;
                let cost = crate::naive::upload_cost_partitions(n, *m_a, *m_b) as u64;
                // the split is fixed, so the budget column reports the actual
                // cost; a point is only feasible when that cost fits
                let m = (cost <= ucb).then_some(m_a * m_b);
                static_row(config, &profiles, "naive", cost, m, Some(r_th))
            }
            SchemeKind::Rateless(spec) => rateless_row(config, &profiles, spec, ucb)?,
        };
        rows.push(row);
    }
    Ok(rows)
}

fn static_row(
    config: &SweepConfig,
    profiles: &[WorkerProfile],
    label: &'static str,
    ucb: u64,
    m: Option<usize>,
    r_th: Option<usize>,
) -> SweepRow {
    let feasible = match (m, r_th) {
        (Some(m), Some(r_th)) => profiles.len() * m >= r_th,
        _ => false,
    };
    let (acts, frac) = if feasible {
        let m = m.unwrap();
        let r_th = r_th.unwrap();
        let acts: Vec<f64> = (0..config.trials)
            .into_par_iter()
            .map(|trial| {
                act_static(profiles, m, r_th, &config.stability, config.seed, trial as u64)
                    .expect("feasibility checked above")
            })
            .collect();
        (acts, 1.0)
    } else {
        (Vec::new(), 0.0)
    };
    let (act_mean, act_std) = mean_std(&acts);
    SweepRow {
        ucb,
        scheme: label,
        clusters: None,
        m,
        r_th: r_th.map(|v| v as f64),
        act_mean,
        act_std,
        feasible_frac: frac,
        trials: config.trials,
        seed: config.seed,
    }
}

fn rateless_row(
    config: &SweepConfig,
    profiles: &[WorkerProfile],
    spec: &RatelessSpec,
    ucb: u64,
) -> Result<SweepRow> {
    let trials: Vec<RatelessTrial> = (0..config.trials)
        .into_par_iter()
        .map(|trial| {
            act_rateless(
                profiles,
                spec,
                config.t,
                config.k,
                config.l,
                &config.stability,
                config.seed,
                trial as u64,
            )
        })
        .collect::<Result<_>>()?;
    let feasible: Vec<&RatelessTrial> = trials
        .iter()
        .filter(|t| t.decodable && t.used_partitions <= ucb)
        .collect();
    let acts: Vec<f64> = feasible.iter().map(|t| t.decode_time).collect();
    let subtasks: Vec<f64> = feasible.iter().map(|t| t.total_subtasks as f64).collect();
    let (act_mean, act_std) = mean_std(&acts);
    let (subtask_mean, _) = mean_std(&subtasks);
    Ok(SweepRow {
        ucb,
        scheme: "rateless",
        clusters: Some(spec.clusters),
        m: None,
        r_th: subtask_mean,
        act_mean,
        act_std,
        feasible_frac: feasible.len() as f64 / config.trials.max(1) as f64,
        trials: config.trials,
        seed: config.seed,
    })
}
