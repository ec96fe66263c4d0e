//! Command-line front end: threshold tables, seeded experiment sweeps,
//! encode/decode round-trips, and exhaustive share-privacy scans.
//!
//! Exit codes: 0 success, 1 failed check (decode mismatch, privacy leak),
//! 2 usage or configuration error.

mod config;
mod csv;

use clap::{Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sdmm_core::matrix::Matrix;
use sdmm_core::privacy::{probe_subset, subsets};
use sdmm_core::sbp::{self, SbpParams, SbpResult};
use sdmm_core::sim::run_sweep;
use sdmm_core::{field::PrimeField, gasp};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "sdmm", version, about = "Coded matrix multiplication: thresholds, privacy scans, straggler experiments")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Print recovery thresholds and per-worker upload cost per sub-task count
    Thresholds {
        k: usize,
        l: usize,
        t: usize,
        /// Sub-task counts: a single value `3` or an inclusive range `1..99`
        m_range: String,
    },
    /// Run the sweep described by a key = value config file and emit CSV
    Simulate {
        config: PathBuf,
    },
    /// Encode random matrices, decode from a random order-respecting subset,
    /// and compare against the directly computed product
    DecodeRoundtrip {
        k: usize,
        l: usize,
        t: usize,
        m: usize,
        q: u64,
        seed: u64,
        /// Rows of A (must be divisible by k)
        #[arg(long)]
        rows: Option<usize>,
        /// Shared inner dimension
        #[arg(long, default_value_t = 2)]
        inner: usize,
        /// Columns of B (must be divisible by l)
        #[arg(long)]
        cols: Option<usize>,
        /// Worker count (defaults to the fewest that can reach the threshold)
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Enumerate every mask assignment and test share distributions for
    /// uniformity and input independence, per worker subset
    PrivacyScan {
        k: usize,
        l: usize,
        t: usize,
        m: usize,
        q: u64,
        /// Worker count (defaults to t + 1)
        #[arg(long)]
        workers: Option<usize>,
        /// Colluding-set size (defaults to t; larger sizes are reported as
        /// out of model instead of failing)
        #[arg(long)]
        subset_size: Option<usize>,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Replace this worker's x coordinate with 0 (negative test)
        #[arg(long)]
        zero_x: Option<usize>,
    },
}

enum Failure {
    /// A correctness check failed; the run itself was valid.
    Check(String),
    /// Bad arguments or configuration.
    Usage(String),
}

impl From<sdmm_core::Error> for Failure {
    fn from(err: sdmm_core::Error) -> Failure {
        Failure::Usage(err.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.cmd {
        Cmd::Thresholds { k, l, t, m_range } => cmd_thresholds(k, l, t, &m_range),
        Cmd::Simulate { config } => cmd_simulate(&config),
        Cmd::DecodeRoundtrip { k, l, t, m, q, seed, rows, inner, cols, workers } => {
            cmd_decode_roundtrip(k, l, t, m, q, seed, rows, inner, cols, workers)
        }
        Cmd::PrivacyScan { k, l, t, m, q, workers, subset_size, seed, zero_x } => {
            cmd_privacy_scan(k, l, t, m, q, workers, subset_size, seed, zero_x)
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

/// `a..b` is inclusive on both ends; a bare number is a one-element range.
fn parse_m_range(text: &str) -> Result<(usize, usize), Failure> {
    let parse = |s: &str| {
        s.trim()
            .parse::<usize>()
            .map_err(|_| Failure::Usage(format!("cannot parse sub-task count {s:?}")))
    };
    match text.split_once("..") {
        Some((lo, hi)) => Ok((parse(lo)?, parse(hi)?)),
        None => {
            let v = parse(text)?;
            Ok((v, v))
        }
    }
}

fn cmd_thresholds(k: usize, l: usize, t: usize, m_range: &str) -> Result<(), Failure> {
    let (lo, hi) = parse_m_range(m_range)?;
    let mut out = String::from("m,sbp_r_th,sbp_upload,mm_gasp_r_th,mm_gasp_upload\n");
    for m in lo..=hi {
        let sbp_r = sbp::recovery_threshold(k, l, t, m)?;
        let mm_r = gasp::mm_gasp_recovery_threshold(k, l, t, m)?;
        // per-worker partition counts: one A share plus m B shares, or m
        // coded blocks of each input
        out.push_str(&format!("{m},{sbp_r},{},{mm_r},{}\n", m + 1, 2 * m));
    }
    print!("{out}");
    Ok(())
}

fn cmd_simulate(path: &PathBuf) -> Result<(), Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
    let spec = config::parse(&text).map_err(Failure::Usage)?;
    let rows = run_sweep(&spec.sweep)?;
    let rendered = csv::render(&rows);
    match spec.output {
        Some(out) => {
            // relative destinations land next to the config, not wherever
            // the process happens to run
            let out = match (out.is_relative(), path.parent()) {
                (true, Some(dir)) => dir.join(&out),
                _ => out,
            };
            std::fs::write(&out, rendered)
                .map_err(|e| Failure::Usage(format!("cannot write {}: {e}", out.display())))?;
        }
        None => print!("{rendered}"),
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_decode_roundtrip(
    k: usize,
    l: usize,
    t: usize,
    m: usize,
    q: u64,
    seed: u64,
    rows: Option<usize>,
    inner: usize,
    cols: Option<usize>,
    workers: Option<usize>,
) -> Result<(), Failure> {
    let rows = rows.unwrap_or(k);
    let cols = cols.unwrap_or(l);
    if k == 0 || l == 0 || !rows.is_multiple_of(k) || !cols.is_multiple_of(l) {
        return Err(Failure::Usage(format!(
            "matrix shape {rows}x{inner} x {inner}x{cols} is not divisible into {k} row and {l} column blocks"
        )));
    }
    let field = PrimeField::new(q)?;
    let r_th = sbp::recovery_threshold(k, l, t, m)?;
    let n = workers.unwrap_or(r_th.div_ceil(m));
    let params = SbpParams::new(k, l, t, m, n, field)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let key = sbp::keygen(&params, &mut rng)?;
    let a = Matrix::random(field, rows, inner, &mut rng);
    let b = Matrix::random(field, inner, cols, &mut rng);
    let masks = sbp::gen_masks(&params, (rows / k, inner), (inner, cols / l), &mut rng);
    let shares = sbp::encode(&params, &key, &masks, &a, &b)?;

    // random arrival order; each worker still reports its sub-tasks in
    // sequence, so any prefix of the interleaving is decodable
    let mut done = vec![0usize; n];
    let mut results: Vec<SbpResult> = Vec::with_capacity(r_th);
    while results.len() < r_th {
        let live: Vec<usize> = (0..n).filter(|&w| done[w] < m).collect();
        let w = live[rng.gen_range(0..live.len())];
        results.push(SbpResult {
            worker: w,
            order: done[w],
            block: sbp::worker_compute(&shares[w], done[w])?,
        });
        done[w] += 1;
    }

    let expected = a.mul(&b)?;
    match sbp::decode(&params, &key, &results) {
        Ok(decoded) if decoded == expected => {
            let used = done.iter().filter(|&&c| c > 0).count();
            println!("pass: decoded product matches ({r_th} results from {used} of {n} workers)");
            Ok(())
        }
        Ok(_) => Err(Failure::Check(format!(
            "fail: decoded product differs from the direct computation\nkey points: {}",
            render_key(&key)
        ))),
        Err(err) => Err(Failure::Check(format!(
            "fail: decode error: {err}\nkey points: {}",
            render_key(&key)
        ))),
    }
}

fn render_key(key: &sbp::SbpKey) -> String {
    let pts: Vec<String> = key
        .points
        .iter()
        .map(|(x, y)| format!("({},{})", x.value(), y.value()))
        .collect();
    pts.join(" ")
}

#[allow(clippy::too_many_arguments)]
fn cmd_privacy_scan(
    k: usize,
    l: usize,
    t: usize,
    m: usize,
    q: u64,
    workers: Option<usize>,
    subset_size: Option<usize>,
    seed: u64,
    zero_x: Option<usize>,
) -> Result<(), Failure> {
    let field = PrimeField::new(q)?;
    let n = workers.unwrap_or(t + 1);
    let params = SbpParams::for_probe(k, l, t, m, n, field)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut key = sbp::keygen(&params, &mut rng)?;
    if let Some(w) = zero_x {
        if w >= n {
            return Err(Failure::Usage(format!("zero-x worker {w} out of range (n = {n})")));
        }
        key.points[w].0 = field.elem(0);
    }
    let size = subset_size.unwrap_or(t);
    if size > n {
        return Err(Failure::Usage(format!("subset size {size} exceeds worker count {n}")));
    }

    let mut leaks = Vec::new();
    for subset in subsets(n, size) {
        let report = probe_subset(&params, &key, &subset, (k, 1), (1, l))?;
        let verdict = if report.passes() { "private" } else { "LEAKS" };
        println!(
            "subset {subset:?}: uniform={} input_independent={} -> {verdict}",
            report.uniform, report.input_independent
        );
        if !report.passes() {
            leaks.push(subset);
        }
    }
    if size > t {
        println!("subset size {size} exceeds the collusion bound {t}: out of model, reported for information only");
        return Ok(());
    }
    if leaks.is_empty() {
        println!("all {}-subsets private", size);
        Ok(())
    } else {
        Err(Failure::Check(format!("leaking subsets: {leaks:?}")))
    }
}
