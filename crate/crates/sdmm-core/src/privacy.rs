//! Exhaustive leakage probe for masked shares.
//!
//! Over a small field, every mask assignment can be enumerated, so the
//! distribution of the shares any worker subset observes is computable
//! exactly rather than sampled. Privacy holds for a subset when that
//! distribution is uniform over all share tuples and identical for every
//! input pair — then the shares carry zero information about the inputs.

use crate::matrix::Matrix;
use crate::sbp::{encode, SbpKey, SbpMasks, SbpParams};
use crate::{Error, Result};
use std::collections::BTreeMap;

/// Hard cap on enumerated encodings so a careless call cannot spin forever.
const ENUMERATION_CAP: u128 = 200_000_000;

fn checked_pow(q: u64, e: u32) -> Result<u128> {
    let mut acc: u128 = 1;
    for _ in 0..e {
        acc = acc
            .checked_mul(q as u128)
            .ok_or_else(|| Error::InvalidParams("enumeration space overflows".into()))?;
        if acc > ENUMERATION_CAP {
            return Err(Error::InvalidParams(format!(
                "enumeration space {q}^{e} exceeds the probe cap"
            )));
        }
    }
    Ok(acc)
}

/// Counts the scalar degrees of freedom in the masks for given block shapes.
pub fn mask_scalar_count(params: &SbpParams, a_block: (usize, usize), b_block: (usize, usize)) -> u32 {
    (params.t * a_block.0 * a_block.1 + params.t * params.m * b_block.0 * b_block.1) as u32
}

/// Base-q odometer over all assignments of `digits` scalars.
struct Odometer {
    digits: Vec<u64>,
    q: u64,
    fresh: bool,
}

impl Odometer {
    fn new(len: usize, q: u64) -> Odometer {
        Odometer { digits: vec![0; len], q, fresh: true }
    }

    fn next(&mut self) -> Option<&[u64]> {
        if self.fresh {
            self.fresh = false;
            return Some(&self.digits);
        }
        for d in self.digits.iter_mut() {
            *d += 1;
            if *d < self.q {
                return Some(&self.digits);
            }
            *d = 0;
        }
        None
    }
}

fn masks_from_digits(
    params: &SbpParams,
    a_block: (usize, usize),
    b_block: (usize, usize),
    digits: &[u64],
) -> Result<SbpMasks> {
    let mut it = digits.iter().copied();
    let mut take = |rows: usize, cols: usize| -> Result<Matrix> {
        let rows_vec: Vec<Vec<u64>> = (0..rows)
            .map(|_| (0..cols).map(|_| it.next().expect("digit count precomputed")).collect())
            .collect();
        Matrix::from_rows(params.field, &rows_vec)
    };
    let r_masks = (0..params.t)
        .map(|_| take(a_block.0, a_block.1))
        .collect::<Result<Vec<_>>>()?;
    let s_masks = (0..params.t)
        .map(|_| (0..params.m).map(|_| take(b_block.0, b_block.1)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    Ok(SbpMasks { r_masks, s_masks })
}

fn subset_tuple(shares: &[crate::sbp::SbpShare], subset: &[usize]) -> Vec<u64> {
    let mut tuple = Vec::new();
    for &w in subset {
        tuple.extend_from_slice(shares[w].a_share.entries());
        for b in &shares[w].b_shares {
            tuple.extend_from_slice(b.entries());
        }
    }
    tuple
}

/// Exact distribution of the share tuple `subset` observes for fixed inputs:
/// every mask assignment is enumerated once, so counts sum to q^(mask scalars).
pub fn share_histogram(
    params: &SbpParams,
    key: &SbpKey,
    subset: &[usize],
    a: &Matrix,
    b: &Matrix,
) -> Result<BTreeMap<Vec<u64>, u64>> {
    for &w in subset {
        if w >= params.n {
            return Err(Error::InvalidParams(format!("worker {w} out of range")));
        }
    }
    let mut sorted = subset.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != subset.len() {
        return Err(Error::InvalidParams("subset repeats a worker".into()));
    }
    if !a.rows().is_multiple_of(params.k) || !b.cols().is_multiple_of(params.l) {
        return Err(Error::NonDivisible {
            what: "input dimensions vs partition counts".into(),
        });
    }
    let a_block = (a.rows() / params.k, a.cols());
    let b_block = (b.rows(), b.cols() / params.l);
    let d = mask_scalar_count(params, a_block, b_block);
    checked_pow(params.field.modulus(), d)?;
    let mut hist = BTreeMap::new();
    let mut odo = Odometer::new(d as usize, params.field.modulus());
    while let Some(digits) = odo.next() {
        let masks = masks_from_digits(params, a_block, b_block, digits)?;
        let shares = encode(params, key, &masks, a, b)?;
        *hist.entry(subset_tuple(&shares, subset)).or_insert(0u64) += 1;
    }
    Ok(hist)
}

/// Verdict of an exhaustive probe of one worker subset over all inputs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrivacyReport {
    pub subset: Vec<usize>,
    /// Scalars the subset sees per encoding.
    pub observed_scalars: u32,
    /// Total mask assignments enumerated per input pair.
    pub mask_assignments: u64,
    pub distinct_tuples: usize,
    /// Every possible tuple appears, all with the same count.
    pub uniform: bool,
    /// The histogram is the same map for every input pair.
    pub input_independent: bool,
}

impl PrivacyReport {
    pub fn passes(&self) -> bool {
        self.uniform && self.input_independent
    }
}

/// Probes one subset against every input pair of the given shapes.
///
/// `a_dims` and `b_dims` are the full input shapes; all q^(|A| entries) by
/// q^(|B| entries) pairs are enumerated, so keep them tiny. The subset is
/// in-model when it has at most t workers; larger subsets are expected to
/// fail, which quantifies how far past the collusion bound the masking
/// survives (it should not survive at all).
pub fn probe_subset(
    params: &SbpParams,
    key: &SbpKey,
    subset: &[usize],
    a_dims: (usize, usize),
    b_dims: (usize, usize),
) -> Result<PrivacyReport> {
    if a_dims.1 != b_dims.0 {
        return Err(Error::DimensionMismatch {
            what: format!("probe shapes {a_dims:?} x {b_dims:?}"),
        });
    }
    let q = params.field.modulus();
    let a_scalars = (a_dims.0 * a_dims.1) as u32;
    let b_scalars = (b_dims.0 * b_dims.1) as u32;
    let a_block = (a_dims.0 / params.k.max(1), a_dims.1);
    let b_block = (b_dims.0, b_dims.1 / params.l.max(1));
    let d = mask_scalar_count(params, a_block, b_block);
    // total work: inputs x masks
    checked_pow(q, a_scalars + b_scalars + d)?;

    let observed: u32 = subset
        .iter()
        .map(|_| (a_block.0 * a_block.1 + params.m * b_block.0 * b_block.1) as u32)
        .sum();
    let mask_assignments = checked_pow(q, d)? as u64;

    let mut reference: Option<BTreeMap<Vec<u64>, u64>> = None;
    let mut input_independent = true;
    let mut uniform = true;
    let mut distinct = 0usize;

    let mut a_odo = Odometer::new(a_scalars as usize, q);
    while let Some(a_digits) = a_odo.next() {
        let a_rows: Vec<Vec<u64>> = a_digits.chunks(a_dims.1).map(|c| c.to_vec()).collect();
        let a = Matrix::from_rows(params.field, &a_rows)?;
        let mut b_odo = Odometer::new(b_scalars as usize, q);
        while let Some(b_digits) = b_odo.next() {
            let b_rows: Vec<Vec<u64>> = b_digits.chunks(b_dims.1).map(|c| c.to_vec()).collect();
            let b = Matrix::from_rows(params.field, &b_rows)?;
            let hist = share_histogram(params, key, subset, &a, &b)?;
            match &reference {
                None => {
                    distinct = hist.len();
                    let expected_tuples = checked_pow(q, observed)?;
                    let even_count = mask_assignments as u128 / expected_tuples.max(1);
                    uniform = (hist.len() as u128 == expected_tuples)
                        && expected_tuples <= mask_assignments as u128
                        && hist.values().all(|&c| c as u128 == even_count);
                    reference = Some(hist);
                }
                Some(r) => {
                    if *r != hist {
                        input_independent = false;
                    }
                }
            }
        }
    }
    Ok(PrivacyReport {
        subset: subset.to_vec(),
        observed_scalars: observed,
        mask_assignments,
        distinct_tuples: distinct,
        uniform,
        input_independent,
    })
}

/// All subsets of {0..n-1} with exactly `size` members, lexicographic.
pub fn subsets(n: usize, size: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(size);
    fn rec(start: usize, n: usize, size: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == size {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, size, cur, out);
            cur.pop();
        }
    }
    rec(0, n, size, &mut cur, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::PrimeField;
    use crate::sbp::keygen;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn scalar_setup(k: usize, l: usize, t: usize, m: usize, n: usize, q: u64) -> (SbpParams, SbpKey) {
        let field = PrimeField::new(q).unwrap();
        let params = SbpParams::new(k, l, t, m, n, field).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let key = keygen(&params, &mut rng).unwrap();
        (params, key)
    }

    #[test]
    fn single_worker_sees_uniform_input_independent_shares() {
        let (params, key) = scalar_setup(1, 1, 1, 1, 3, 5);
        for subset in subsets(3, 1) {
            let report = probe_subset(&params, &key, &subset, (1, 1), (1, 1)).unwrap();
            assert!(report.passes(), "subset {subset:?}: {report:?}");
            assert_eq!(report.distinct_tuples, 25); // q^(1+m) = 5^2
            assert_eq!(report.mask_assignments, 25); // q^(t(1+m)) = 5^2
        }
    }

    #[test]
    fn derivative_shares_stay_uniform() {
        // m = 2 needs l >= 2; B gets two column blocks of one scalar each
        let (params, key) = scalar_setup(1, 2, 1, 2, 3, 5);
        for subset in subsets(3, 1) {
            let report = probe_subset(&params, &key, &subset, (1, 1), (1, 2)).unwrap();
            assert!(report.passes(), "subset {subset:?}: {report:?}");
            assert_eq!(report.distinct_tuples, 125); // q^(1+m) = 5^3
        }
    }

    fn probe_setup(k: usize, l: usize, t: usize, m: usize, n: usize, q: u64) -> (SbpParams, SbpKey) {
        let field = PrimeField::new(q).unwrap();
        let params = SbpParams::for_probe(k, l, t, m, n, field).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let key = keygen(&params, &mut rng).unwrap();
        (params, key)
    }

    #[test]
    fn probe_works_below_decode_threshold_and_past_m_cap() {
        // too few workers to ever decode, and more derivative shares than
        // column blocks: the encoding map still exists and stays private
        for q in [3, 5] {
            let (params, key) = probe_setup(1, 1, 1, 2, 2, q);
            for subset in subsets(2, 1) {
                let report = probe_subset(&params, &key, &subset, (1, 1), (1, 1)).unwrap();
                assert!(report.passes(), "q {q} subset {subset:?}: {report:?}");
                assert_eq!(report.distinct_tuples, (q * q * q) as usize); // q^(1+m)
            }
        }
    }

    #[test]
    fn probe_on_two_point_field_matches_full_params() {
        let (params, key) = probe_setup(1, 1, 1, 1, 2, 3);
        for subset in subsets(2, 1) {
            let report = probe_subset(&params, &key, &subset, (1, 1), (1, 1)).unwrap();
            assert!(report.passes(), "subset {subset:?}: {report:?}");
            assert_eq!(report.distinct_tuples, 9);
        }
        let both = probe_subset(&params, &key, &[0, 1], (1, 1), (1, 1)).unwrap();
        assert!(!both.passes());
    }

    #[test]
    fn two_colluders_with_two_masks_stay_private() {
        let (params, key) = scalar_setup(1, 1, 2, 1, 5, 7);
        for subset in subsets(5, 2) {
            let report = probe_subset(&params, &key, &subset, (1, 1), (1, 1)).unwrap();
            assert!(report.passes(), "subset {subset:?}: {report:?}");
        }
    }

    #[test]
    fn subset_beyond_collusion_bound_leaks() {
        let (params, key) = scalar_setup(1, 1, 1, 1, 3, 5);
        // 2 workers observe 4 scalars but only q^2 mask assignments exist:
        // the tuple distribution cannot be uniform, and the support shifts
        // with the inputs
        let report = probe_subset(&params, &key, &[0, 1], (1, 1), (1, 1)).unwrap();
        assert!(!report.uniform);
        assert!(!report.input_independent);
    }

    #[test]
    fn zero_evaluation_point_leaks_first_block() {
        let (params, mut key) = scalar_setup(1, 1, 1, 1, 3, 5);
        // x = 0 kills every mask term in A's share: the worker reads A_1
        key.points[0].0 = params.field.elem(0);
        let report = probe_subset(&params, &key, &[0], (1, 1), (1, 1)).unwrap();
        assert!(!report.passes());
        // other workers keep honest points and stay private
        let ok = probe_subset(&params, &key, &[1], (1, 1), (1, 1)).unwrap();
        assert!(ok.passes());
    }

    #[test]
    fn histogram_counts_sum_to_mask_space() {
        let (params, key) = scalar_setup(1, 1, 1, 1, 3, 5);
        let a = Matrix::from_rows(params.field, &[vec![2]]).unwrap();
        let b = Matrix::from_rows(params.field, &[vec![1]]).unwrap();
        let hist = share_histogram(&params, &key, &[0, 1], &a, &b).unwrap();
        let total: u64 = hist.values().sum();
        assert_eq!(total, 25); // q^(t(1+m)) assignments enumerated
    }

    #[test]
    fn duplicate_subset_rejected() {
        let (params, key) = scalar_setup(1, 1, 1, 1, 3, 5);
        let a = Matrix::from_rows(params.field, &[vec![0]]).unwrap();
        let b = Matrix::from_rows(params.field, &[vec![0]]).unwrap();
        assert!(share_histogram(&params, &key, &[1, 1], &a, &b).is_err());
    }

    #[test]
    fn oversized_enumeration_rejected() {
        let field = PrimeField::new((1 << 31) - 1).unwrap();
        let params = SbpParams::new(1, 1, 1, 1, 3, field).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let key = keygen(&params, &mut rng).unwrap();
        let a = Matrix::from_rows(field, &[vec![1]]).unwrap();
        let b = Matrix::from_rows(field, &[vec![1]]).unwrap();
        assert!(share_histogram(&params, &key, &[0], &a, &b).is_err());
    }

    #[test]
    fn subsets_enumerator_counts() {
        assert_eq!(subsets(5, 2).len(), 10);
        assert_eq!(subsets(4, 0), vec![Vec::<usize>::new()]);
        assert_eq!(subsets(3, 3), vec![vec![0, 1, 2]]);
    }
}
