//! Bivariate interpolation from point evaluations and formal derivatives.
//!
//! A scheme fixes a monomial support (the set of (x-degree, y-degree) pairs
//! that can appear in the polynomial it decodes) and hands workers'
//! evaluation points plus derivative orders to `build_matrix`. Solving the
//! resulting square system against the observed values recovers every
//! coefficient on the support.

use crate::field::{falling_factorial, FieldElement, PrimeField};
use crate::matrix::{solve_linear, Matrix};
use crate::{Error, Result};
use std::collections::BTreeMap;

/// An ordered set of (dx, dy) monomial degrees. Column order is dy-major:
/// sorted by (dy, dx). The order is part of the decode contract, so it is
/// fixed here and nowhere else.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonomialSupport {
    degrees: Vec<(u32, u32)>,
}

impl MonomialSupport {
    fn from_set(mut degrees: Vec<(u32, u32)>) -> MonomialSupport {
        degrees.sort_by_key(|&(dx, dy)| (dy, dx));
        degrees.dedup();
        MonomialSupport { degrees }
    }

    /// Support of A(x)·B(x,y) for the secure bivariate scheme: a K+T wide,
    /// L tall rectangle of data-and-mask columns, plus an m-tall strip of
    /// pure mask columns at x-degrees K+T .. 2K+2T-2.
    pub fn product_support(k: usize, l: usize, t: usize, m: usize) -> Result<MonomialSupport> {
        if k == 0 || l == 0 || t == 0 || m == 0 || m > l {
            return Err(Error::InvalidParams(format!(
                "product support needs k,l,t >= 1 and 1 <= m <= l, got k={k} l={l} t={t} m={m}"
            )));
        }
        let (k, l, t, m) = (k as u32, l as u32, t as u32, m as u32);
        let mut degrees = Vec::new();
        for dy in 0..l {
            for dx in 0..k + t {
                degrees.push((dx, dy));
            }
        }
        for dy in 0..m {
            for dx in k + t..2 * k + 2 * t - 1 {
                degrees.push((dx, dy));
            }
        }
        Ok(MonomialSupport::from_set(degrees))
    }

    /// Full degree rectangle 0..=max_dx by 0..=max_dy.
    pub fn rectangle(max_dx: u32, max_dy: u32) -> MonomialSupport {
        let mut degrees = Vec::new();
        for dy in 0..=max_dy {
            for dx in 0..=max_dx {
                degrees.push((dx, dy));
            }
        }
        MonomialSupport { degrees }
    }

    pub fn len(&self) -> usize {
        self.degrees.len()
    }

    pub fn is_empty(&self) -> bool {
        self.degrees.is_empty()
    }

    pub fn degrees(&self) -> &[(u32, u32)] {
        &self.degrees
    }

    pub fn contains(&self, dx: u32, dy: u32) -> bool {
        self.degrees.contains(&(dx, dy))
    }

    /// Sum of dx+dy over the support: the total degree mass that drives the
    /// decodability failure bound d/q.
    pub fn degree_sum(&self) -> u64 {
        self.degrees.iter().map(|&(dx, dy)| dx as u64 + dy as u64).sum()
    }
}

/// One requested observation: evaluate the polynomial's formal derivative
/// of order (jx, jy) at `point`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DerivRequest {
    pub point: (FieldElement, FieldElement),
    pub order: (u32, u32),
}

/// Row of the interpolation matrix for one request. Differentiating the
/// monomial x^dx y^dy by (jx, jy) leaves ff(dx,jx)·ff(dy,jy)·x^(dx-jx)·y^(dy-jy),
/// and zero when either order exceeds the degree.
pub fn derivative_row(
    field: PrimeField,
    support: &MonomialSupport,
    point: (FieldElement, FieldElement),
    order: (u32, u32),
) -> Result<Vec<u64>> {
    let (x, y) = point;
    let (jx, jy) = order;
    let mut row = Vec::with_capacity(support.len());
    for &(dx, dy) in support.degrees() {
        if dx < jx || dy < jy {
            row.push(0);
            continue;
        }
        let cx = falling_factorial(field, dx as u64, jx as u64)?;
        let cy = falling_factorial(field, dy as u64, jy as u64)?;
        let v = cx
            .mul(cy)
            .mul(x.pow((dx - jx) as u64))
            .mul(y.pow((dy - jy) as u64));
        row.push(v.value());
    }
    Ok(row)
}

/// Validates the request list and builds the square interpolation matrix,
/// one row per request, columns in support order.
///
/// Per evaluation point the derivative orders must arrive in ascending
/// (jx, jy) order and be downward closed: an order (a, b) is only usable if
/// every componentwise-smaller order was also requested. Duplicate requests
/// pass validation and surface later as a singular system.
pub fn build_matrix(
    field: PrimeField,
    support: &MonomialSupport,
    requests: &[DerivRequest],
) -> Result<Matrix> {
    if requests.len() != support.len() {
        return Err(Error::SizeMismatch {
            expected: support.len(),
            got: requests.len(),
        });
    }
    let mut orders_by_point: BTreeMap<(u64, u64), Vec<(u32, u32)>> = BTreeMap::new();
    for req in requests {
        let key = (req.point.0.value(), req.point.1.value());
        let seen = orders_by_point.entry(key).or_default();
        if let Some(&last) = seen.last() {
            if req.order < last {
                return Err(Error::NonPrefixOrders(format!(
                    "order {:?} after {:?} at point ({}, {})",
                    req.order, last, key.0, key.1
                )));
            }
        }
        seen.push(req.order);
    }
    for (point, orders) in &orders_by_point {
        for &(a, b) in orders {
            for (pa, pb) in [(a.wrapping_sub(1), b), (a, b.wrapping_sub(1))] {
                if pa == u32::MAX || pb == u32::MAX {
                    continue;
                }
                if !orders.contains(&(pa, pb)) {
                    return Err(Error::NonPrefixOrders(format!(
                        "order ({a}, {b}) at point ({}, {}) without ({pa}, {pb})",
                        point.0, point.1
                    )));
                }
            }
        }
    }
    let mut rows = Vec::with_capacity(requests.len());
    for req in requests {
        rows.push(derivative_row(field, support, req.point, req.order)?);
    }
    Matrix::from_rows(field, &rows)
}

/// Recovers every block coefficient on the support from observed values.
/// `values[i]` is the block observed for `requests[i]`; all blocks must
/// share one shape. Returns coefficients keyed by (dx, dy).
pub fn interpolate(
    field: PrimeField,
    support: &MonomialSupport,
    requests: &[DerivRequest],
    values: &[Matrix],
) -> Result<BTreeMap<(u32, u32), Matrix>> {
    if values.len() != requests.len() {
        return Err(Error::SizeMismatch {
            expected: requests.len(),
            got: values.len(),
        });
    }
    let m = build_matrix(field, support, requests)?;
    let (bh, bw) = match values.first() {
        Some(v) => (v.rows(), v.cols()),
        None => return Err(Error::SizeMismatch { expected: 1, got: 0 }),
    };
    let mut rhs_rows = Vec::with_capacity(values.len());
    for v in values {
        if v.field() != field {
            return Err(Error::FieldMismatch);
        }
        if v.rows() != bh || v.cols() != bw {
            return Err(Error::DimensionMismatch {
                what: "observed blocks with unequal shapes".into(),
            });
        }
        rhs_rows.push(v.entries().to_vec());
    }
    let rhs = Matrix::from_rows(field, &rhs_rows)?;
    let solved = solve_linear(&m, &rhs)?;
    let mut out = BTreeMap::new();
    for (idx, &(dx, dy)) in support.degrees().iter().enumerate() {
        let mut block = Matrix::zero(field, bh, bw);
        for r in 0..bh {
            for c in 0..bw {
                block.set(r, c, solved.get(idx, r * bw + c));
            }
        }
        out.insert((dx, dy), block);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn gf(q: u64) -> PrimeField {
        PrimeField::new(q).unwrap()
    }

    #[test]
    fn product_support_size_matches_closed_form() {
        for (k, l, t, m) in [
            (1usize, 1usize, 1usize, 1usize),
            (2, 2, 1, 2),
            (3, 2, 2, 1),
            (100, 100, 30, 99),
            (100, 100, 30, 1),
        ] {
            let s = MonomialSupport::product_support(k, l, t, m).unwrap();
            assert_eq!(s.len(), (k + t) * l + m * (k + t - 1), "({k},{l},{t},{m})");
        }
    }

    #[test]
    fn product_support_2212_is_the_full_five_by_two_grid() {
        // with l = m both strips cover dy 0..2, so the union is a rectangle
        let s = MonomialSupport::product_support(2, 2, 1, 2).unwrap();
        let expected: Vec<(u32, u32)> = vec![
            (0, 0), (1, 0), (2, 0), (3, 0), (4, 0),
            (0, 1), (1, 1), (2, 1), (3, 1), (4, 1),
        ];
        assert_eq!(s.degrees(), &expected[..]);
    }

    #[test]
    fn product_support_strips_differ_when_m_less_than_l() {
        let s = MonomialSupport::product_support(2, 3, 1, 1).unwrap();
        // data strip: dx 0..3 for dy 0..3; mask strip: dx 3..5 only at dy 0
        assert!(s.contains(3, 0) && s.contains(4, 0));
        assert!(!s.contains(3, 1) && !s.contains(4, 2));
        // 3x3 main rectangle plus the 1x2 high-degree strip
        assert_eq!(s.len(), 11);
    }

    #[test]
    fn degree_sum_brute_force_values() {
        // oracle: direct summation over the support degrees
        let s = MonomialSupport::product_support(2, 2, 1, 2).unwrap();
        assert_eq!(s.degree_sum(), 25);
        let s = MonomialSupport::product_support(1, 1, 1, 1).unwrap();
        // support is {(0,0), (1,0), (2,0)}: B carries no y term when l = m = 1
        assert_eq!(s.degrees(), &[(0, 0), (1, 0), (2, 0)]);
        assert_eq!(s.degree_sum(), 3);
    }

    #[test]
    fn degree_sum_matches_rectangle_closed_form() {
        // closed form for a full rectangle: sum over 0..=a x 0..=b of dx+dy
        fn xi(a: u64, b: u64) -> u64 {
            a * (a + 1) / 2 * (b + 1) + b * (b + 1) / 2 * (a + 1)
        }
        for (a, b) in [(0u32, 0u32), (1, 0), (4, 1), (3, 3), (129, 99)] {
            let s = MonomialSupport::rectangle(a, b);
            assert_eq!(s.degree_sum(), xi(a as u64, b as u64));
        }
        // the product support is rect1 plus (rect2-extension minus overlap)
        for (k, l, t, m) in [(2u64, 2u64, 1u64, 2u64), (3, 4, 2, 2), (5, 3, 1, 3)] {
            let s = MonomialSupport::product_support(k as usize, l as usize, t as usize, m as usize)
                .unwrap();
            let expect = xi(k + t - 1, l - 1) + xi(2 * k + 2 * t - 2, m - 1) - xi(k + t - 1, m - 1);
            assert_eq!(s.degree_sum(), expect, "({k},{l},{t},{m})");
        }
    }

    #[test]
    fn rejects_m_zero_and_m_above_l() {
        assert!(MonomialSupport::product_support(2, 2, 1, 0).is_err());
        assert!(MonomialSupport::product_support(2, 2, 1, 3).is_err());
    }

    #[test]
    fn derivative_row_matches_reference_pattern() {
        // 10-column support for (k,l,t,m) = (2,2,1,2); the y-derivative row at
        // (x, y) must be [0,0,0,0,0, 1, x, x^2, x^3, x^4]
        let f = gf(101);
        let s = MonomialSupport::product_support(2, 2, 1, 2).unwrap();
        let x = f.elem(7);
        let y = f.elem(9);
        let row = derivative_row(f, &s, (x, y), (0, 1)).unwrap();
        let xv = |e: u64| x.pow(e).value();
        assert_eq!(
            row,
            vec![0, 0, 0, 0, 0, 1, xv(1), xv(2), xv(3), xv(4)]
        );
        // plain evaluation row: x^dx y^dy in column order
        let row0 = derivative_row(f, &s, (x, y), (0, 0)).unwrap();
        let ev = |dx: u64, dy: u64| (x.pow(dx).mul(y.pow(dy))).value();
        assert_eq!(
            row0,
            vec![
                ev(0, 0), ev(1, 0), ev(2, 0), ev(3, 0), ev(4, 0),
                ev(0, 1), ev(1, 1), ev(2, 1), ev(3, 1), ev(4, 1),
            ]
        );
    }

    #[test]
    fn build_rejects_wrong_request_count() {
        let f = gf(101);
        let s = MonomialSupport::product_support(2, 2, 1, 2).unwrap();
        let p = (f.elem(1), f.elem(1));
        let reqs = vec![DerivRequest { point: p, order: (0, 0) }];
        assert!(matches!(
            build_matrix(f, &s, &reqs),
            Err(Error::SizeMismatch { expected: 10, got: 1 })
        ));
    }

    #[test]
    fn build_rejects_descending_orders_at_a_point() {
        let f = gf(101);
        let s = MonomialSupport::rectangle(1, 0); // 2 columns
        let p = (f.elem(3), f.elem(1));
        let reqs = vec![
            DerivRequest { point: p, order: (0, 1) },
            DerivRequest { point: p, order: (0, 0) },
        ];
        assert!(matches!(build_matrix(f, &s, &reqs), Err(Error::NonPrefixOrders(_))));
    }

    #[test]
    fn build_rejects_gapped_orders() {
        let f = gf(101);
        let s = MonomialSupport::rectangle(1, 0);
        let p = (f.elem(3), f.elem(1));
        let reqs = vec![
            DerivRequest { point: p, order: (0, 0) },
            DerivRequest { point: p, order: (0, 2) },
        ];
        assert!(matches!(build_matrix(f, &s, &reqs), Err(Error::NonPrefixOrders(_))));
    }

    #[test]
    fn duplicate_requests_build_but_solve_singular() {
        let f = gf(101);
        let s = MonomialSupport::rectangle(1, 0);
        let p = (f.elem(3), f.elem(1));
        let reqs = vec![
            DerivRequest { point: p, order: (0, 0) },
            DerivRequest { point: p, order: (0, 0) },
        ];
        let m = build_matrix(f, &s, &reqs).unwrap();
        let rhs = Matrix::zero(f, 2, 1);
        assert!(matches!(solve_linear(&m, &rhs), Err(Error::SingularMatrix)));
    }

    #[test]
    fn shared_evaluation_point_across_workers_is_singular() {
        let f = gf(101);
        let s = MonomialSupport::rectangle(2, 0);
        let p = (f.elem(5), f.elem(2));
        let other = (f.elem(9), f.elem(2));
        let reqs = vec![
            DerivRequest { point: p, order: (0, 0) },
            DerivRequest { point: p, order: (0, 0) },
            DerivRequest { point: other, order: (0, 0) },
        ];
        let m = build_matrix(f, &s, &reqs).unwrap();
        assert!(matches!(
            solve_linear(&m, &Matrix::zero(f, 3, 1)),
            Err(Error::SingularMatrix)
        ));
    }

    /// Forward evaluation oracle: build a random coefficient assignment on
    /// the support, evaluate its derivatives directly, interpolate back.
    #[test]
    fn interpolation_roundtrips_against_forward_evaluation() {
        let f = gf((1 << 31) - 1);
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for (k, l, t, m) in [(1usize, 1usize, 1usize, 1usize), (2, 2, 1, 2), (3, 2, 2, 2)] {
            let s = MonomialSupport::product_support(k, l, t, m).unwrap();
            let coeffs: BTreeMap<(u32, u32), u64> = s
                .degrees()
                .iter()
                .map(|&d| (d, rng.gen_range(0..f.modulus())))
                .collect();
            // one worker per ceil(len/m) with derivative orders (0, 0..m-1)
            let mut reqs = Vec::new();
            let mut points_used = 0u64;
            while reqs.len() < s.len() {
                points_used += 1;
                let p = (f.elem(points_used), f.elem(rng.gen_range(0..f.modulus())));
                for j in 0..m as u32 {
                    if reqs.len() == s.len() {
                        break;
                    }
                    reqs.push(DerivRequest { point: p, order: (0, j) });
                }
            }
            let values: Vec<Matrix> = reqs
                .iter()
                .map(|req| {
                    let mut acc = f.zero();
                    for (&(dx, dy), &c) in &coeffs {
                        let row = derivative_row(
                            f,
                            &MonomialSupport { degrees: vec![(dx, dy)] },
                            req.point,
                            req.order,
                        )
                        .unwrap();
                        acc = acc.add(f.elem(row[0]).mul(f.elem(c)));
                    }
                    Matrix::from_rows(f, &[vec![acc.value()]]).unwrap()
                })
                .collect();
            let got = interpolate(f, &s, &reqs, &values).unwrap();
            for (&d, &c) in &coeffs {
                assert_eq!(got[&d].get(0, 0).value(), c, "coefficient {d:?}");
            }
        }
    }

    #[test]
    fn random_keys_are_almost_always_invertible() {
        // Monte Carlo sanity on the failure probability: far below d/q
        let f = gf((1 << 31) - 1);
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let s = MonomialSupport::product_support(2, 2, 1, 2).unwrap();
        let mut failures = 0;
        for _ in 0..1000 {
            let mut reqs = Vec::new();
            for _ in 0..5 {
                let p = (
                    f.elem(rng.gen_range(1..f.modulus())),
                    f.elem(rng.gen_range(0..f.modulus())),
                );
                reqs.push(DerivRequest { point: p, order: (0, 0) });
                reqs.push(DerivRequest { point: p, order: (0, 1) });
            }
            let m = build_matrix(f, &s, &reqs).unwrap();
            if solve_linear(&m, &Matrix::zero(f, 10, 1)).is_err() {
                failures += 1;
            }
        }
        assert_eq!(failures, 0, "singular rate should be ~d/q ~ 1e-8 here");
    }
}
