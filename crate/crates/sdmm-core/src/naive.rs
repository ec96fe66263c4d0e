//! Baseline scheme: two independently masked univariate polynomials.
//!
//! A(x) carries K data blocks plus m_A·T masks, B(y) carries L data blocks
//! plus m_B·T masks. Worker i evaluates the first m_A x-derivatives of A at
//! x_i and the first m_B y-derivatives of B at y_i and returns all m_A·m_B
//! pairwise products in row-major (a, b) order. Because the product support
//! is the full (K+m_A·T)×(L+m_B·T) degree rectangle, that whole rectangle
//! must be interpolated: the recovery threshold multiplies where the
//! bivariate scheme's only adds.
//!
//! The threshold counts monomials; it does not promise that every
//! order-respecting set of that many results decodes. Some per-worker
//! completion patterns make the system singular for every key (see the
//! `completion_patterns_are_not_interchangeable` test), so sub-tasks here
//! are not one-to-any replaceable. `decode` reports such sets as
//! [`Error::DecodingFailure`] rather than guaranteeing them away.

use crate::field::{falling_factorial, FieldElement, PrimeField};
use crate::interp::{interpolate, DerivRequest, MonomialSupport};
use crate::matrix::Matrix;
use crate::{Error, Result};
use rand::Rng;
use std::collections::{BTreeMap, HashSet};

pub fn recovery_threshold(k: usize, l: usize, t: usize, m_a: usize, m_b: usize) -> Result<usize> {
    if k == 0 || l == 0 || t == 0 || m_a == 0 || m_b == 0 {
        return Err(Error::InvalidParams(format!(
            "all of k,l,t,m_a,m_b must be >= 1, got k={k} l={l} t={t} m_a={m_a} m_b={m_b}"
        )));
    }
    Ok((k + m_a * t) * (l + m_b * t))
}

/// Per-worker upload in partition units: m_A coded A blocks + m_B coded B
/// blocks. Multiply by N for the system total.
pub fn upload_cost_partitions(n: usize, m_a: usize, m_b: usize) -> usize {
    n * (m_a + m_b)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NaiveParams {
    pub k: usize,
    pub l: usize,
    pub t: usize,
    pub m_a: usize,
    pub m_b: usize,
    pub n: usize,
    pub field: PrimeField,
}

impl NaiveParams {
    pub fn new(
        k: usize,
        l: usize,
        t: usize,
        m_a: usize,
        m_b: usize,
        n: usize,
        field: PrimeField,
    ) -> Result<NaiveParams> {
        let r_th = recovery_threshold(k, l, t, m_a, m_b)?;
        if n * m_a * m_b < r_th {
            return Err(Error::InvalidParams(format!(
                "n*m_a*m_b = {} cannot reach the recovery threshold {r_th}",
                n * m_a * m_b
            )));
        }
        let min_q = (k + m_a * t - 1) as u64 + (l + m_b * t - 1) as u64;
        if field.modulus() <= min_q {
            return Err(Error::FieldTooSmall(format!(
                "q = {} but the product polynomial needs q > {min_q}",
                field.modulus()
            )));
        }
        Ok(NaiveParams { k, l, t, m_a, m_b, n, field })
    }

    pub fn recovery_threshold(&self) -> usize {
        recovery_threshold(self.k, self.l, self.t, self.m_a, self.m_b)
            .expect("validated at construction")
    }
}

/// Evaluation points. Both coordinates must be distinct and nonzero: x = 0
/// exposes A's first block, y = 0 exposes B's.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NaiveKey {
    pub points: Vec<(FieldElement, FieldElement)>,
}

pub fn keygen<R: Rng>(params: &NaiveParams, rng: &mut R) -> Result<NaiveKey> {
    let q = params.field.modulus();
    if (params.n as u64) > q - 1 {
        return Err(Error::FieldTooSmall(format!(
            "cannot pick {} distinct nonzero points in GF({q})",
            params.n
        )));
    }
    let mut xs = HashSet::with_capacity(params.n);
    let mut ys = HashSet::with_capacity(params.n);
    let mut points = Vec::with_capacity(params.n);
    while points.len() < params.n {
        let x = rng.gen_range(1..q);
        if !xs.insert(x) {
            continue;
        }
        let y = loop {
            let y = rng.gen_range(1..q);
            if ys.insert(y) {
                break y;
            }
        };
        points.push((params.field.elem(x), params.field.elem(y)));
    }
    Ok(NaiveKey { points })
}

#[derive(Debug, Clone)]
pub struct NaiveMasks {
    pub r_masks: Vec<Matrix>,
    pub s_masks: Vec<Matrix>,
}

pub fn gen_masks<R: Rng>(
    params: &NaiveParams,
    a_block: (usize, usize),
    b_block: (usize, usize),
    rng: &mut R,
) -> NaiveMasks {
    NaiveMasks {
        r_masks: (0..params.m_a * params.t)
            .map(|_| Matrix::random(params.field, a_block.0, a_block.1, rng))
            .collect(),
        s_masks: (0..params.m_b * params.t)
            .map(|_| Matrix::random(params.field, b_block.0, b_block.1, rng))
            .collect(),
    }
}

/// What one worker receives: m_A derivative evaluations of A and m_B of B.
#[derive(Debug, Clone)]
pub struct NaiveShare {
    pub a_shares: Vec<Matrix>,
    pub b_shares: Vec<Matrix>,
}

pub fn encode(
    params: &NaiveParams,
    key: &NaiveKey,
    masks: &NaiveMasks,
    a: &Matrix,
    b: &Matrix,
) -> Result<Vec<NaiveShare>> {
    if a.field() != params.field || b.field() != params.field {
        return Err(Error::FieldMismatch);
    }
    if a.cols() != b.rows() {
        return Err(Error::DimensionMismatch {
            what: format!("product of {}x{} and {}x{}", a.rows(), a.cols(), b.rows(), b.cols()),
        });
    }
    if key.points.len() != params.n {
        return Err(Error::SizeMismatch { expected: params.n, got: key.points.len() });
    }
    let a_parts = a.partition_rows(params.k)?;
    let b_parts = b.partition_cols(params.l)?;
    if masks.r_masks.len() != params.m_a * params.t || masks.s_masks.len() != params.m_b * params.t {
        return Err(Error::SizeMismatch {
            expected: params.m_a * params.t + params.m_b * params.t,
            got: masks.r_masks.len() + masks.s_masks.len(),
        });
    }
    let f = params.field;
    // A's term list: (x-degree, block); B's likewise in y
    let a_terms: Vec<(u64, &Matrix)> = a_parts
        .iter()
        .enumerate()
        .map(|(k, p)| (k as u64, p))
        .chain(
            masks
                .r_masks
                .iter()
                .enumerate()
                .map(|(i, p)| ((params.k + i) as u64, p)),
        )
        .collect();
    let b_terms: Vec<(u64, &Matrix)> = b_parts
        .iter()
        .enumerate()
        .map(|(l, p)| (l as u64, p))
        .chain(
            masks
                .s_masks
                .iter()
                .enumerate()
                .map(|(i, p)| ((params.l + i) as u64, p)),
        )
        .collect();
    let eval_derivs = |terms: &[(u64, &Matrix)], at: FieldElement, count: usize| -> Result<Vec<Matrix>> {
        let (h, w) = (terms[0].1.rows(), terms[0].1.cols());
        let mut out = Vec::with_capacity(count);
        for j in 0..count as u64 {
            let mut share = Matrix::zero(f, h, w);
            for &(deg, block) in terms {
                if deg < j {
                    continue;
                }
                let c = falling_factorial(f, deg, j)?.mul(at.pow(deg - j));
                share = share.add(&block.scalar_mul(c))?;
            }
            out.push(share);
        }
        Ok(out)
    };
    let mut shares = Vec::with_capacity(params.n);
    for &(x, y) in &key.points {
        shares.push(NaiveShare {
            a_shares: eval_derivs(&a_terms, x, params.m_a)?,
            b_shares: eval_derivs(&b_terms, y, params.m_b)?,
        });
    }
    Ok(shares)
}

/// Sub-task (a, b) of a worker. Workers run these in row-major order over
/// (a, b), so a straggler's finished set is a prefix of that sequence.
pub fn worker_compute(share: &NaiveShare, a: usize, b: usize) -> Result<Matrix> {
    let ax = share.a_shares.get(a).ok_or_else(|| {
        Error::InvalidParams(format!("a-derivative {a} beyond the {} held", share.a_shares.len()))
    })?;
    let by = share.b_shares.get(b).ok_or_else(|| {
        Error::InvalidParams(format!("b-derivative {b} beyond the {} held", share.b_shares.len()))
    })?;
    ax.mul(by)
}

#[derive(Debug, Clone)]
pub struct NaiveResult {
    pub worker: usize,
    pub order: (usize, usize),
    pub block: Matrix,
}

pub fn decode(params: &NaiveParams, key: &NaiveKey, results: &[NaiveResult]) -> Result<Matrix> {
    let r_th = params.recovery_threshold();
    if results.len() < r_th {
        return Err(Error::NotEnoughResults { needed: r_th, got: results.len() });
    }
    if results.len() > r_th {
        return Err(Error::TooManyResults { needed: r_th, got: results.len() });
    }
    let mut by_worker: BTreeMap<usize, Vec<(usize, usize)>> = BTreeMap::new();
    for r in results {
        if r.worker >= params.n {
            return Err(Error::InvalidParams(format!("unknown worker {}", r.worker)));
        }
        by_worker.entry(r.worker).or_default().push(r.order);
    }
    for (w, orders) in &mut by_worker {
        orders.sort_unstable();
        for (idx, &(a, b)) in orders.iter().enumerate() {
            let (want_a, want_b) = (idx / params.m_b, idx % params.m_b);
            if (a, b) != (want_a, want_b) {
                return Err(Error::NonPrefixOrders(format!(
                    "worker {w} returned order ({a},{b}) where ({want_a},{want_b}) was expected"
                )));
            }
        }
    }
    let support = MonomialSupport::rectangle(
        (params.k + params.m_a * params.t - 1) as u32,
        (params.l + params.m_b * params.t - 1) as u32,
    );
    let mut sorted: Vec<&NaiveResult> = results.iter().collect();
    sorted.sort_by_key(|r| (r.worker, r.order));
    let requests: Vec<DerivRequest> = sorted
        .iter()
        .map(|r| DerivRequest {
            point: key.points[r.worker],
            order: (r.order.0 as u32, r.order.1 as u32),
        })
        .collect();
    let values: Vec<Matrix> = sorted.iter().map(|r| r.block.clone()).collect();
    let coeffs = interpolate(params.field, &support, &requests, &values).map_err(|e| match e {
        Error::SingularMatrix => {
            Error::DecodingFailure("interpolation system is singular for this key and result set".into())
        }
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
