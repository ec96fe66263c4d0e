//! Prime-field arithmetic on `u64` values with `u128` intermediates.

use crate::{Error, Result};

/// A prime field GF(q). Cheap to copy; equality means same modulus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PrimeField {
    q: u64,
}

impl PrimeField {
    /// Constructs the field, rejecting composite or trivial moduli.
    pub fn new(q: u64) -> Result<Self> {
        if !is_prime_u64(q) {
            return Err(Error::NotPrime(q));
        }
        Ok(PrimeField { q })
    }

    pub fn modulus(&self) -> u64 {
        self.q
    }

    /// Element from any integer residue.
    pub fn elem(&self, value: u64) -> FieldElement {
        FieldElement {
            value: value % self.q,
            field: *self,
        }
    }

    pub fn zero(&self) -> FieldElement {
        self.elem(0)
    }

    pub fn one(&self) -> FieldElement {
        self.elem(1)
    }

    /// Bits needed to store one element, log2(q) rounded up to a whole bit.
    pub fn bits_per_element(&self) -> u64 {
        // q elements live in residues 0..q-1; ceil(log2(q)) bits index them.
        64 - (self.q - 1).leading_zeros() as u64
    }

    /// All field elements in value order. Only sensible for tiny fields.
    pub fn iter_elements(&self) -> impl Iterator<Item = FieldElement> + '_ {
        (0..self.q).map(move |v| self.elem(v))
    }
}

/// An element of a specific prime field. Arithmetic between elements of
/// different fields is a programming error and panics; fallible checks
/// happen at the matrix and scheme boundaries instead.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldElement {
    value: u64,
    field: PrimeField,
}

// add/sub/mul/neg stay inherent methods rather than trait impls: the std
// operator traits cannot carry the runtime same-field check these enforce,
// and explicit calls keep that check visible at every use site.
#[allow(clippy::should_implement_trait)]
impl FieldElement {
    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn is_zero(&self) -> bool {
        self.value == 0
    }

    pub fn add(self, rhs: FieldElement) -> FieldElement {
        assert_eq!(self.field, rhs.field, "field mismatch");
        let q = self.field.q as u128;
        let v = ((self.value as u128 + rhs.value as u128) % q) as u64;
        FieldElement { value: v, field: self.field }
    }

    pub fn sub(self, rhs: FieldElement) -> FieldElement {
        assert_eq!(self.field, rhs.field, "field mismatch");
        let q = self.field.q;
        let v = if self.value >= rhs.value {
            self.value - rhs.value
        } else {
            self.value + (q - rhs.value)
        };
        FieldElement { value: v, field: self.field }
    }

    pub fn mul(self, rhs: FieldElement) -> FieldElement {
        assert_eq!(self.field, rhs.field, "field mismatch");
        let v = (self.value as u128 * rhs.value as u128 % self.field.q as u128) as u64;
        FieldElement { value: v, field: self.field }
    }

    pub fn neg(self) -> FieldElement {
        let q = self.field.q;
        let v = if self.value == 0 { 0 } else { q - self.value };
        FieldElement { value: v, field: self.field }
    }

    /// Modular exponentiation by squaring; exp is a plain integer.
    pub fn pow(self, mut exp: u64) -> FieldElement {
        let q = self.field.q as u128;
        let mut base = self.value as u128;
        let mut acc: u128 = 1;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc * base % q;
            }
            base = base * base % q;
            exp >>= 1;
        }
        FieldElement { value: acc as u64, field: self.field }
    }

    /// Multiplicative inverse via Fermat: a^(q-2). Zero has none.
    pub fn inv(self) -> Result<FieldElement> {
        if self.value == 0 {
            return Err(Error::InversionOfZero);
        }
        Ok(self.pow(self.field.q - 2))
    }
}

impl std::ops::Add for FieldElement {
    type Output = FieldElement;
    fn add(self, rhs: FieldElement) -> FieldElement {
        FieldElement::add(self, rhs)
    }
}

impl std::ops::Sub for FieldElement {
    type Output = FieldElement;
    fn sub(self, rhs: FieldElement) -> FieldElement {
        FieldElement::sub(self, rhs)
    }
}

impl std::ops::Mul for FieldElement {
    type Output = FieldElement;
    fn mul(self, rhs: FieldElement) -> FieldElement {
        FieldElement::mul(self, rhs)
    }
}

impl std::ops::Neg for FieldElement {
    type Output = FieldElement;
    fn neg(self) -> FieldElement {
        FieldElement::neg(self)
    }
}

/// Falling factorial b·(b-1)···(b-k+1) reduced into the field; the k = 0
/// empty product is 1. These are the coefficients produced by k-fold formal
/// differentiation of x^b, so they are computed over the naturals first and
/// must not wrap: b >= q is rejected rather than silently reduced.
pub fn falling_factorial(field: PrimeField, b: u64, k: u64) -> Result<FieldElement> {
    if b >= field.modulus() {
        return Err(Error::CoefficientOverflow { b, q: field.modulus() });
    }
    if k > b {
        // one factor is exactly zero over the naturals
        return Ok(field.zero());
    }
    let mut acc = field.one();
    for i in 0..k {
        acc = acc.mul(field.elem(b - i));
    }
    Ok(acc)
}

/// Deterministic Miller-Rabin, exact for all u64 with this witness set.
fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n.is_multiple_of(p) {
            return false;
        }
    }
    let mut d = n - 1;
    let mut r = 0u32;
    while d.is_multiple_of(2) {
        d /= 2;
        r += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = mod_pow_u64(a % n, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 0..r - 1 {
            x = (x as u128 * x as u128 % n as u128) as u64;
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn mod_pow_u64(base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc: u128 = 1;
    let mut b = base as u128 % m as u128;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * b % m as u128;
        }
        b = b * b % m as u128;
        exp >>= 1;
    }
    acc as u64
}
