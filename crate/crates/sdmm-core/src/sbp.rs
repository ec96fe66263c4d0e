//! Secure bivariate-polynomial coded matrix multiplication.
//!
//! A is cut into K row blocks and hidden behind T random blocks inside a
//! univariate polynomial A(x). B is cut into L column blocks and hidden
//! inside a bivariate polynomial B(x,y) whose mask terms are supported on
//! x-degrees K+T-1 and above. Worker i evaluates A at x_i and the first m
//! formal y-derivatives of B at (x_i, y_i), returning the products
//! A(x_i)·(d^j/dy^j B)(x_i, y_i) for j = 0, 1, ... in order. Any
//! (K+T)L + m(K+T-1) results whose per-worker derivative orders form
//! prefixes reconstruct A·B, while any T workers together see nothing.

use crate::field::{falling_factorial, FieldElement, PrimeField};
use crate::interp::{interpolate, DerivRequest, MonomialSupport};
use crate::matrix::Matrix;
use crate::{Error, Result};
use rand::Rng;
use std::collections::{BTreeMap, HashSet};

/// Count of worker results that always suffices to decode.
pub fn recovery_threshold(k: usize, l: usize, t: usize, m: usize) -> Result<usize> {
    if k == 0 || l == 0 || t == 0 || m == 0 || m > l {
        return Err(Error::InvalidParams(format!(
            "recovery threshold needs k,l,t >= 1 and 1 <= m <= l, got k={k} l={l} t={t} m={m}"
        )));
    }
    Ok((k + t) * l + m * (k + t - 1))
}

/// Numerator and denominator of the decodability failure bound: a uniformly
/// random key yields a singular system with probability at most d/q, where d
/// is the degree mass of the product support.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FailureBound {
    pub d: u64,
    pub q: u64,
}

impl FailureBound {
    pub fn as_f64(&self) -> f64 {
        self.d as f64 / self.q as f64
    }
}

pub fn failure_bound(k: usize, l: usize, t: usize, m: usize, field: PrimeField) -> Result<FailureBound> {
    let support = MonomialSupport::product_support(k, l, t, m)?;
    Ok(FailureBound {
        d: support.degree_sum(),
        q: field.modulus(),
    })
}

/// Per-worker upload in partition units: one coded A block plus m coded B
/// blocks. Multiply by N for the system total.
pub fn upload_cost_partitions(n: usize, m: usize) -> usize {
    n * (m + 1)
}

/// Total upload in bits for concrete matrix shapes: N workers each receive
/// an (r/K)×s block of A and m s×(t/L) blocks of B, every element taking
/// ceil(log2 q) bits.
pub fn upload_cost_bits(
    params: &SbpParams,
    r: usize,
    s: usize,
    t_cols: usize,
) -> Result<u64> {
    if !r.is_multiple_of(params.k) || !t_cols.is_multiple_of(params.l) {
        return Err(Error::NonDivisible {
            what: format!(
                "matrix shapes {r}x{s} and {s}x{t_cols} by k={} and l={}",
                params.k, params.l
            ),
        });
    }
    let per_worker =
        (r / params.k) as u64 * s as u64 + params.m as u64 * s as u64 * (t_cols / params.l) as u64;
    Ok(params.n as u64 * per_worker * params.field.bits_per_element())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SbpParams {
    pub k: usize,
    pub l: usize,
    pub t: usize,
    pub m: usize,
    pub n: usize,
    pub field: PrimeField,
}

impl SbpParams {
    /// Validates the parameter set: m in 1..=l, enough workers to ever reach
    /// the threshold, and a field large enough that every monomial degree
    /// and derivative coefficient stays below q.
    pub fn new(k: usize, l: usize, t: usize, m: usize, n: usize, field: PrimeField) -> Result<SbpParams> {
        let r_th = recovery_threshold(k, l, t, m)?;
        if n * m < r_th {
            return Err(Error::InvalidParams(format!(
                "n*m = {} cannot reach the recovery threshold {r_th}",
                n * m
            )));
        }
        let min_q = 2 * (k + t - 1) as u64 + (l - 1).max(m - 1) as u64;
        if field.modulus() <= min_q {
            return Err(Error::FieldTooSmall(format!(
                "q = {} but the product polynomial needs q > {min_q}",
                field.modulus()
            )));
        }
        Ok(SbpParams { k, l, t, m, n, field })
    }

    /// Parameters for share-level analysis only. Privacy of a worker subset
    /// does not depend on there being enough workers to decode, on the field
    /// being big enough for the product polynomial, or on m <= l — the
    /// encoding map is well defined without them — so those guards are
    /// skipped here. Anything built this way must never reach decode.
    pub fn for_probe(k: usize, l: usize, t: usize, m: usize, n: usize, field: PrimeField) -> Result<SbpParams> {
        if k == 0 || l == 0 || t == 0 || m == 0 || n == 0 {
            return Err(Error::InvalidParams(format!(
                "probe parameters need k,l,t,m,n >= 1, got k={k} l={l} t={t} m={m} n={n}"
            )));
        }
        if (n as u64) > field.modulus() - 1 {
            return Err(Error::FieldTooSmall(format!(
                "cannot pick {n} distinct nonzero points in GF({})",
                field.modulus()
            )));
        }
        Ok(SbpParams { k, l, t, m, n, field })
    }

    /// Panics on probe-only parameter sets (m > l has no threshold).
    pub fn recovery_threshold(&self) -> usize {
        recovery_threshold(self.k, self.l, self.t, self.m).expect("threshold undefined for this parameter set")
    }
}

/// Evaluation points: distinct nonzero x_i (x = 0 would expose the first
/// data block of A), y_i unrestricted. Distinct x makes all pairs distinct.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SbpKey {
    pub points: Vec<(FieldElement, FieldElement)>,
}

pub fn keygen<R: Rng>(params: &SbpParams, rng: &mut R) -> Result<SbpKey> {
    let q = params.field.modulus();
    if (params.n as u64) > q - 1 {
        return Err(Error::FieldTooSmall(format!(
            "cannot pick {} distinct nonzero points in GF({q})",
            params.n
        )));
    }
    let mut seen = HashSet::with_capacity(params.n);
    let mut points = Vec::with_capacity(params.n);
    while points.len() < params.n {
        let x = rng.gen_range(1..q);
        if !seen.insert(x) {
            continue;
        }
        let y = rng.gen_range(0..q);
        points.push((params.field.elem(x), params.field.elem(y)));
    }
    Ok(SbpKey { points })
}

/// The random blocks. `r_masks` has T entries shaped like A's row blocks;
/// `s_masks` is T×m shaped like B's column blocks.
#[derive(Debug, Clone)]
pub struct SbpMasks {
    pub r_masks: Vec<Matrix>,
    pub s_masks: Vec<Vec<Matrix>>,
}

pub fn gen_masks<R: Rng>(
    params: &SbpParams,
    a_block: (usize, usize),
    b_block: (usize, usize),
    rng: &mut R,
) -> SbpMasks {
    let r_masks = (0..params.t)
        .map(|_| Matrix::random(params.field, a_block.0, a_block.1, rng))
        .collect();
    let s_masks = (0..params.t)
        .map(|_| {
            (0..params.m)
                .map(|_| Matrix::random(params.field, b_block.0, b_block.1, rng))
                .collect()
        })
        .collect();
    SbpMasks { r_masks, s_masks }
}

/// What one worker receives: its evaluation of A and the m derivative
/// evaluations of B, in derivative order.
#[derive(Debug, Clone)]
pub struct SbpShare {
    pub a_share: Matrix,
    pub b_shares: Vec<Matrix>,
}

/// Encodes both inputs for every worker.
///
/// A(x) = sum_k A_k x^(k-1) + sum_t R_t x^(K+t-1);
/// B(x,y) = sum_l B_l y^(l-1) + sum_{t,j} S_{t,j} x^(K+t-1) y^(j-1).
/// Worker i gets A(x_i) and (d^j/dy^j B)(x_i, y_i) for j = 0..m-1.
pub fn encode(
    params: &SbpParams,
    key: &SbpKey,
    masks: &SbpMasks,
    a: &Matrix,
    b: &Matrix,
) -> Result<Vec<SbpShare>> {
    if a.field() != params.field || b.field() != params.field {
        return Err(Error::FieldMismatch);
    }
    if a.cols() != b.rows() {
        return Err(Error::DimensionMismatch {
            what: format!("product of {}x{} and {}x{}", a.rows(), a.cols(), b.rows(), b.cols()),
        });
    }
    if key.points.len() != params.n {
        return Err(Error::SizeMismatch {
            expected: params.n,
            got: key.points.len(),
        });
    }
    let a_parts = a.partition_rows(params.k)?;
    let b_parts = b.partition_cols(params.l)?;
    let (ah, aw) = (a_parts[0].rows(), a_parts[0].cols());
    let (bh, bw) = (b_parts[0].rows(), b_parts[0].cols());
    if masks.r_masks.len() != params.t
        || masks.r_masks.iter().any(|m| m.rows() != ah || m.cols() != aw)
        || masks.s_masks.len() != params.t
        || masks
            .s_masks
            .iter()
            .any(|row| row.len() != params.m || row.iter().any(|m| m.rows() != bh || m.cols() != bw))
    {
        return Err(Error::DimensionMismatch {
            what: "mask blocks do not match partition shapes".into(),
        });
    }
    let f = params.field;
    let mut shares = Vec::with_capacity(params.n);
    for &(x, y) in &key.points {
        let mut a_share = Matrix::zero(f, ah, aw);
        for (k, part) in a_parts.iter().enumerate() {
            a_share = a_share.add(&part.scalar_mul(x.pow(k as u64)))?;
        }
        for (t, mask) in masks.r_masks.iter().enumerate() {
            a_share = a_share.add(&mask.scalar_mul(x.pow((params.k + t) as u64)))?;
        }
        let mut b_shares = Vec::with_capacity(params.m);
        for j in 0..params.m as u64 {
            let mut share = Matrix::zero(f, bh, bw);
            for (l, part) in b_parts.iter().enumerate() {
                let deg = l as u64; // y-degree of this block
                if deg < j {
                    continue;
                }
                let c = falling_factorial(f, deg, j)?.mul(y.pow(deg - j));
                share = share.add(&part.scalar_mul(c))?;
            }
            for (t, row) in masks.s_masks.iter().enumerate() {
                let xpow = x.pow((params.k + t) as u64);
                for (jj, mask) in row.iter().enumerate() {
                    let deg = jj as u64;
                    if deg < j {
                        continue;
                    }
                    let c = falling_factorial(f, deg, j)?.mul(y.pow(deg - j)).mul(xpow);
                    share = share.add(&mask.scalar_mul(c))?;
                }
            }
            b_shares.push(share);
        }
        shares.push(SbpShare { a_share, b_shares });
    }
    Ok(shares)
}

/// The j-th sub-task of a worker: its A share times its j-th B share.
/// Workers run these in increasing j, so a straggler that produced i results
/// has exactly the derivative orders 0..i.
pub fn worker_compute(share: &SbpShare, j: usize) -> Result<Matrix> {
    let b = share.b_shares.get(j).ok_or_else(|| {
        Error::InvalidParams(format!("derivative order {j} beyond the {} shares held", share.b_shares.len()))
    })?;
    share.a_share.mul(b)
}

/// One returned sub-task result.
#[derive(Debug, Clone)]
pub struct SbpResult {
    pub worker: usize,
    pub order: usize,
    pub block: Matrix,
}

/// Decodes A·B from exactly the threshold count of results. Per worker the
/// returned orders must form a prefix 0..c of the derivative sequence.
pub fn decode(params: &SbpParams, key: &SbpKey, results: &[SbpResult]) -> Result<Matrix> {
    let r_th = params.recovery_threshold();
    if results.len() < r_th {
        return Err(Error::NotEnoughResults {
            needed: r_th,
            got: results.len(),
        });
    }
    if results.len() > r_th {
        return Err(Error::TooManyResults {
            needed: r_th,
            got: results.len(),
        });
    }
    let mut by_worker: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for r in results {
        if r.worker >= params.n {
            return Err(Error::InvalidParams(format!("unknown worker {}", r.worker)));
        }
        by_worker.entry(r.worker).or_default().push(r.order);
    }
    for (w, orders) in &mut by_worker {
        orders.sort_unstable();
        for (want, &got) in orders.iter().enumerate() {
            if got != want {
                return Err(Error::NonPrefixOrders(format!(
                    "worker {w} returned order {got} where {want} was expected"
                )));
            }
        }
        if orders.len() > params.m {
            return Err(Error::InvalidParams(format!(
                "worker {w} returned {} results but holds only {} sub-tasks",
                orders.len(),
                params.m
            )));
        }
    }
    let support = MonomialSupport::product_support(params.k, params.l, params.t, params.m)?;
    let mut sorted: Vec<&SbpResult> = results.iter().collect();
    sorted.sort_by_key(|r| (r.worker, r.order));
    let requests: Vec<DerivRequest> = sorted
        .iter()
        .map(|r| DerivRequest {
            point: key.points[r.worker],
            order: (0, r.order as u32),
        })
        .collect();
    let values: Vec<Matrix> = sorted.iter().map(|r| r.block.clone()).collect();
    let coeffs = interpolate(params.field, &support, &requests, &values)
        .map_err(|e| match e {
            Error::SingularMatrix => Error::DecodingFailure(
                "interpolation system is singular for this key and result set".into(),
            ),
            other => other,
        })?;
    let mut grid: Vec<Vec<Matrix>> = Vec::with_capacity(params.k);
    for k in 0..params.k {
        let mut row = Vec::with_capacity(params.l);
        for l in 0..params.l {
            let block = coeffs.get(&(k as u32, l as u32)).ok_or_else(|| {
                Error::DecodingFailure(format!("coefficient ({k}, {l}) missing from support"))
            })?;
            row.push(block.clone());
        }
        grid.push(row);
    }
    Matrix::assemble_product(&grid)
}
