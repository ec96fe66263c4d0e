//! Recovery-threshold and upload-cost model for the GASP family of secure
//! matrix multiplication codes, including the matched-partition variant that
//! splits each input into m coded pieces per worker.
//!
//! Only the threshold arithmetic lives here; the schemes are compared to the
//! bivariate code through these counts and through the straggler simulator.

use crate::{Error, Result};

/// Threshold of the degree-table construction with K and L outer partitions
/// and privacy T. Symmetric in K and L; the four regimes are keyed on where
/// T falls relative to the smaller and larger partition count.
pub fn gasp_recovery_threshold(k: usize, l: usize, t: usize) -> Result<usize> {
    if k == 0 || l == 0 || t == 0 {
        return Err(Error::InvalidParams(format!(
            "all of k,l,t must be >= 1, got k={k} l={l} t={t}"
        )));
    }
    // normalize so l <= k
    let (k, l) = if k >= l { (k, l) } else { (l, k) };
    Ok(if t < l {
        if t == 1 {
            k * l + k + l
        } else {
            k * l + k + l + t * t + t - 3
        }
    } else if t < k {
        (k + t) * (l + 1) - 1
    } else {
        2 * k * l + 2 * t - 1
    })
}

/// The matched-partition variant: each worker holds m coded pieces of each
/// input, which multiplies the effective privacy parameter by m.
pub fn mm_gasp_recovery_threshold(k: usize, l: usize, t: usize, m: usize) -> Result<usize> {
    if m == 0 {
        return Err(Error::InvalidParams("m must be >= 1".into()));
    }
    gasp_recovery_threshold(k, l, t * m)
}

/// Per-worker upload in partition units: m pieces of each input.
pub fn mm_gasp_upload_cost_partitions(n: usize, m: usize) -> usize {
    2 * n * m
}

/// True when the bivariate scheme needs strictly fewer results than the
/// matched-partition variant at the same sub-task count m.
pub fn crossover_predicate(k: usize, l: usize, t: usize, m: usize) -> Result<bool> {
    Ok(crate::sbp::recovery_threshold(k, l, t, m)? < mm_gasp_recovery_threshold(k, l, t, m)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn base_threshold_examples() {
        // t >= k = l = 2
        assert_eq!(gasp_recovery_threshold(2, 2, 5).unwrap(), 17);
        // 1 = t < l <= k
        assert_eq!(gasp_recovery_threshold(100, 100, 1).unwrap(), 10200);
        // 1 < t < l <= k
        assert_eq!(gasp_recovery_threshold(100, 100, 30).unwrap(), 11127);
        // l <= t < k
        assert_eq!(gasp_recovery_threshold(10, 2, 5).unwrap(), 15 * 3 - 1);
        assert!(gasp_recovery_threshold(0, 2, 1).is_err());
    }

    #[test]
    fn symmetry_in_k_and_l() {
        for t in 1..=8 {
            for k in 1..=8 {
                for l in 1..=8 {
                    assert_eq!(
                        gasp_recovery_threshold(k, l, t).unwrap(),
                        gasp_recovery_threshold(l, k, t).unwrap()
                    );
                }
            }
        }
    }

    #[test]
    fn matched_partition_series_for_the_reference_geometry() {
        // k = l = 100, t = 30: thresholds as m grows
        let th = |m| mm_gasp_recovery_threshold(100, 100, 30, m).unwrap();
        assert_eq!(th(1), 11127);
        assert_eq!(th(2), 13857);
        assert_eq!(th(3), 18387);
        assert_eq!(th(4), 20239);
        assert_eq!(th(5), 20299);
        assert_eq!(th(60), 23599);
        assert_eq!(th(99), 25939);
        assert_eq!(th(500), 49999);
    }

    #[test]
    fn threshold_nondecreasing_in_m() {
        for k in [1usize, 2, 5, 100] {
            for l in [1usize, 3, 100] {
                for t in [1usize, 2, 30] {
                    let mut prev = 0;
                    for m in 1..=120 {
                        let cur = mm_gasp_recovery_threshold(k, l, t, m).unwrap();
                        assert!(cur >= prev, "k={k} l={l} t={t} m={m}: {cur} < {prev}");
                        prev = cur;
                    }
                }
            }
        }
    }

    #[test]
    fn crossover_flips_between_m_1_and_m_5() {
        assert!(!crossover_predicate(100, 100, 30, 1).unwrap());
        assert!(crossover_predicate(100, 100, 30, 5).unwrap());
    }
}
