//! Dense matrices over a prime field, block partitioning, and a Gaussian
//! elimination solver.

use crate::field::{FieldElement, PrimeField};
use crate::{Error, Result};
use rand::Rng;

/// Row-major dense matrix. All entries live in one field; cross-field
/// operations are rejected at this boundary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matrix {
    field: PrimeField,
    rows: usize,
    cols: usize,
    data: Vec<u64>,
}

impl Matrix {
    pub fn zero(field: PrimeField, rows: usize, cols: usize) -> Matrix {
        Matrix {
            field,
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn from_rows(field: PrimeField, rows: &[Vec<u64>]) -> Result<Matrix> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::DimensionMismatch {
                what: "ragged row lengths".into(),
            });
        }
        let q = field.modulus();
        let data = rows.iter().flatten().map(|&v| v % q).collect();
        Ok(Matrix {
            field,
            rows: r,
            cols: c,
            data,
        })
    }

    pub fn random<R: Rng>(field: PrimeField, rows: usize, cols: usize, rng: &mut R) -> Matrix {
        let q = field.modulus();
        let data = (0..rows * cols).map(|_| rng.gen_range(0..q)).collect();
        Matrix {
            field,
            rows,
            cols,
            data,
        }
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> FieldElement {
        self.field.elem(self.data[r * self.cols + c])
    }

    pub fn set(&mut self, r: usize, c: usize, v: FieldElement) {
        assert_eq!(v.field(), self.field, "field mismatch");
        self.data[r * self.cols + c] = v.value();
    }

    fn at(&self, r: usize, c: usize) -> u64 {
        self.data[r * self.cols + c]
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    fn check_same_field(&self, other: &Matrix) -> Result<()> {
        if self.field != other.field {
            return Err(Error::FieldMismatch);
        }
        Ok(())
    }

    pub fn add(&self, other: &Matrix) -> Result<Matrix> {
        self.check_same_field(other)?;
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch {
                what: format!(
                    "add {}x{} with {}x{}",
                    self.rows, self.cols, other.rows, other.cols
                ),
            });
        }
        let q = self.field.modulus() as u128;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| ((a as u128 + b as u128) % q) as u64)
            .collect();
        Ok(Matrix {
            field: self.field,
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn scalar_mul(&self, s: FieldElement) -> Matrix {
        assert_eq!(s.field(), self.field, "field mismatch");
        let q = self.field.modulus() as u128;
        let sv = s.value() as u128;
        let data = self.data.iter().map(|&a| (a as u128 * sv % q) as u64).collect();
        Matrix {
            field: self.field,
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn mul(&self, other: &Matrix) -> Result<Matrix> {
        self.check_same_field(other)?;
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                what: format!(
                    "multiply {}x{} by {}x{}",
                    self.rows, self.cols, other.rows, other.cols
                ),
            });
        }
        let q = self.field.modulus() as u128;
        let mut out = Matrix::zero(self.field, self.rows, other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc: u128 = 0;
                for k in 0..self.cols {
                    acc += self.at(i, k) as u128 * other.at(k, j) as u128 % q;
                }
                out.data[i * other.cols + j] = (acc % q) as u64;
            }
        }
        Ok(out)
    }

    /// Splits into `parts` stacked row blocks of equal height.
    pub fn partition_rows(&self, parts: usize) -> Result<Vec<Matrix>> {
        if parts == 0 || !self.rows.is_multiple_of(parts) {
            return Err(Error::NonDivisible {
                what: format!("{} rows into {} parts", self.rows, parts),
            });
        }
        let h = self.rows / parts;
        Ok((0..parts)
            .map(|p| Matrix {
                field: self.field,
                rows: h,
                cols: self.cols,
                data: self.data[p * h * self.cols..(p + 1) * h * self.cols].to_vec(),
            })
            .collect())
    }

    /// Splits into `parts` side-by-side column blocks of equal width.
    pub fn partition_cols(&self, parts: usize) -> Result<Vec<Matrix>> {
        if parts == 0 || !self.cols.is_multiple_of(parts) {
            return Err(Error::NonDivisible {
                what: format!("{} cols into {} parts", self.cols, parts),
            });
        }
        let w = self.cols / parts;
        Ok((0..parts)
            .map(|p| {
                let mut data = Vec::with_capacity(self.rows * w);
                for r in 0..self.rows {
                    let start = r * self.cols + p * w;
                    data.extend_from_slice(&self.data[start..start + w]);
                }
                Matrix {
                    field: self.field,
                    rows: self.rows,
                    cols: w,
                    data,
                }
            })
            .collect())
    }

    /// Reassembles the product grid: blocks[k][l] is the (k,l) block of the
    /// full product, laid out K block rows by L block columns.
    pub fn assemble_product(blocks: &[Vec<Matrix>]) -> Result<Matrix> {
        let kk = blocks.len();
        if kk == 0 || blocks[0].is_empty() {
            return Err(Error::DimensionMismatch {
                what: "empty block grid".into(),
            });
        }
        let ll = blocks[0].len();
        let field = blocks[0][0].field;
        let bh = blocks[0][0].rows;
        let bw = blocks[0][0].cols;
        for row in blocks {
            if row.len() != ll {
                return Err(Error::DimensionMismatch {
                    what: "ragged block grid".into(),
                });
            }
            for b in row {
                if b.field != field {
                    return Err(Error::FieldMismatch);
                }
                if b.rows != bh || b.cols != bw {
                    return Err(Error::DimensionMismatch {
                        what: "unequal block shapes".into(),
                    });
                }
            }
        }
        let mut out = Matrix::zero(field, kk * bh, ll * bw);
        for (k, row) in blocks.iter().enumerate() {
            for (l, b) in row.iter().enumerate() {
                for r in 0..bh {
                    for c in 0..bw {
                        out.data[(k * bh + r) * out.cols + l * bw + c] = b.at(r, c);
                    }
                }
            }
        }
        Ok(out)
    }

    /// Flattens the entries row-major; used to carry block right-hand sides
    /// through the scalar solver.
    pub fn entries(&self) -> &[u64] {
        &self.data
    }
}

/// Solves M X = B for X with M square, by Gaussian elimination with the
/// deterministic "first nonzero below the diagonal" pivot scan. B may have
/// any number of columns; they are eliminated together.
pub fn solve_linear(m: &Matrix, rhs: &Matrix) -> Result<Matrix> {
    if m.field != rhs.field {
        return Err(Error::FieldMismatch);
    }
    if !m.is_square() || m.rows != rhs.rows {
        return Err(Error::DimensionMismatch {
            what: format!(
                "solve with {}x{} system and {}x{} right-hand side",
                m.rows, m.cols, rhs.rows, rhs.cols
            ),
        });
    }
    let n = m.rows;
    let w = rhs.cols;
    let q = m.field.modulus() as u128;
    let mut a: Vec<u64> = m.data.clone();
    let mut b: Vec<u64> = rhs.data.clone();

    for col in 0..n {
        // first row at or below the diagonal with a nonzero pivot
        let pivot = (col..n).find(|&r| a[r * n + col] != 0).ok_or(Error::SingularMatrix)?;
        if pivot != col {
            for j in 0..n {
                a.swap(pivot * n + j, col * n + j);
            }
            for j in 0..w {
                b.swap(pivot * w + j, col * w + j);
            }
        }
        let inv = m.field.elem(a[col * n + col]).inv()?.value() as u128;
        for j in col..n {
            a[col * n + j] = (a[col * n + j] as u128 * inv % q) as u64;
        }
        for j in 0..w {
            b[col * w + j] = (b[col * w + j] as u128 * inv % q) as u64;
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let factor = a[r * n + col] as u128;
            if factor == 0 {
                continue;
            }
            for j in col..n {
                let sub = factor * a[col * n + j] as u128 % q;
                let cur = a[r * n + j] as u128;
                a[r * n + j] = ((cur + q - sub) % q) as u64;
            }
            for j in 0..w {
                let sub = factor * b[col * w + j] as u128 % q;
                let cur = b[r * w + j] as u128;
                b[r * w + j] = ((cur + q - sub) % q) as u64;
            }
        }
    }
    Ok(Matrix {
        field: m.field,
        rows: n,
        cols: w,
        data: b,
    })
}
