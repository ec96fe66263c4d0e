//! Counting model for a rateless (fountain-coded) private multiplication
//! scheme running on speed-clustered workers.
//!
//! Workers are grouped into c clusters by speed. Each round, every worker in
//! a cluster computes one coded product of a fresh (A, B) partition pair.
//! When a whole cluster finishes a round — and the fastest cluster has
//! finished the same round, which carries shared randomness — the master
//! banks a fixed number of useful coefficients from it: privacy padding
//! costs T tasks per round (2T in the fastest cluster) and the coded pairing
//! halves what remains. Decoding needs slightly more than K·L useful
//! coefficients because fountain decoding overshoots.

use crate::{Error, Result};

/// Cluster sizes and membership, fastest first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterPlan {
    /// members[u] lists worker indices of cluster u in descending speed.
    pub members: Vec<Vec<usize>>,
}

impl ClusterPlan {
    pub fn sizes(&self) -> Vec<usize> {
        self.members.iter().map(|m| m.len()).collect()
    }
}

/// Groups workers into c clusters by speed, descending: cluster 0 is the
/// fastest. Sizes differ by at most one with the larger groups first. Ties
/// in speed break by worker index, so the plan is deterministic.
pub fn cluster_assign(speeds: &[f64], c: usize) -> Result<ClusterPlan> {
    let n = speeds.len();
    if c == 0 || c > n {
        return Err(Error::InvalidParams(format!(
            "cannot split {n} workers into {c} clusters"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        speeds[b]
            .partial_cmp(&speeds[a])
            .expect("worker speeds must not be NaN")
            .then(a.cmp(&b))
    });
    let base = n / c;
    let extra = n % c;
    let mut members = Vec::with_capacity(c);
    let mut cursor = 0;
    for u in 0..c {
        let size = base + usize::from(u < extra);
        members.push(order[cursor..cursor + size].to_vec());
        cursor += size;
    }
    Ok(ClusterPlan { members })
}

/// Useful coefficients banked when cluster u (0-based) completes a round of
/// n_u tasks under privacy parameter t. The fastest cluster pays double
/// padding. Clamped at zero when the cluster is too small to yield.
pub fn useful_per_round(n_u: usize, u: usize, t: usize) -> usize {
    let pad = if u == 0 { 2 * t } else { t };
    (n_u + 1).saturating_sub(pad) / 2
}

/// Useful coefficients needed to decode: K·L plus the fountain overshoot.
/// eps is taken as a decimal fraction and applied with exact integer
/// arithmetic where possible to keep K·L·(1+eps) boundary cases stable.
pub fn decode_target(k: usize, l: usize, eps: f64) -> Result<usize> {
    if !(0.0..1.0).contains(&eps) {
        return Err(Error::InvalidParams(format!("eps must be in [0, 1), got {eps}")));
    }
    let kl = (k * l) as f64;
    // nudge below: eps values come from short decimals, whose f64 error is
    // far smaller than 1e-9, so exact integer boundaries stay exact
    Ok((kl * (1.0 + eps) - 1e-9).ceil() as usize)
}
