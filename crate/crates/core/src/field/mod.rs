//! Exact arithmetic over a prime field `F_q`.
//!
//! Elements are stored as canonical representatives in `[0, q)`. The modulus is
//! capped below `2^31`, so every product of two reduced values fits in a `u64`.
//!
//! Bulk routines (matrix elimination, packet encoding) work on raw `u32`
//! values through the [`PrimeField`] methods; [`FieldElement`] is the checked
//! form that carries its field and rejects mixed-field operations.

mod matrix;

pub use matrix::{matrix_rank, solve_linear_system, FieldMatrix};

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest admissible modulus (exclusive).
pub const MAX_MODULUS: u64 = 1 << 31;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("modulus {0} is not prime")]
    NotPrime(u64),
    #[error("modulus {0} is outside the supported range [2, 2^31)")]
    ModulusOutOfRange(u64),
    #[error("division by zero")]
    DivisionByZero,
    #[error("operands belong to different fields (F_{left} vs F_{right})")]
    FieldMismatch { left: u32, right: u32 },
    #[error("matrix is singular")]
    SingularMatrix,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("value {value} is not a canonical element of F_{q}")]
    NonCanonical { value: u64, q: u32 },
}

/// The prime field `F_q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PrimeField {
    q: u32,
}

impl PrimeField {
    pub fn new(q: u64) -> Result<Self, FieldError> {
        if !(2..MAX_MODULUS).contains(&q) {
            return Err(FieldError::ModulusOutOfRange(q));
        }
        if !is_prime(q) {
            return Err(FieldError::NotPrime(q));
        }
        Ok(Self { q: q as u32 })
    }

    #[inline]
    pub fn modulus(self) -> u32 {
        self.q
    }

    /// Bits of entropy carried by one symbol, `log2 q`.
    pub fn symbol_bits(self) -> f64 {
        f64::from(self.q).log2()
    }

    pub fn element(self, value: u64) -> FieldElement {
        FieldElement {
            value: (value % u64::from(self.q)) as u32,
            field: self,
        }
    }

    /// Builds an element from a value that must already be canonical.
    pub fn canonical(self, value: u64) -> Result<FieldElement, FieldError> {
        if value >= u64::from(self.q) {
            return Err(FieldError::NonCanonical { value, q: self.q });
        }
        Ok(FieldElement {
            value: value as u32,
            field: self,
        })
    }

    /// Reduces a signed integer into `[0, q)`.
    pub fn reduce_i64(self, value: i64) -> u32 {
        value.rem_euclid(i64::from(self.q)) as u32
    }

    pub fn zero(self) -> FieldElement {
        self.element(0)
    }

    pub fn one(self) -> FieldElement {
        self.element(1)
    }

    #[inline]
    pub fn add(self, a: u32, b: u32) -> u32 {
        let s = u64::from(a) + u64::from(b);
        let q = u64::from(self.q);
        (if s >= q { s - q } else { s }) as u32
    }

    #[inline]
    pub fn sub(self, a: u32, b: u32) -> u32 {
        if a >= b {
            a - b
        } else {
            self.q - (b - a)
        }
    }

    #[inline]
    pub fn neg(self, a: u32) -> u32 {
        if a == 0 {
            0
        } else {
            self.q - a
        }
    }

    #[inline]
    pub fn mul(self, a: u32, b: u32) -> u32 {
        ((u64::from(a) * u64::from(b)) % u64::from(self.q)) as u32
    }

    pub fn pow(self, base: u32, mut exp: u64) -> u32 {
        let mut acc = 1 % self.q;
        let mut b = base % self.q;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, b);
            }
            b = self.mul(b, b);
            exp >>= 1;
        }
        acc
    }

    /// Multiplicative inverse via the extended Euclidean algorithm.
    pub fn inv(self, a: u32) -> Result<u32, FieldError> {
        if a.is_multiple_of(self.q) {
            return Err(FieldError::DivisionByZero);
        }
        let (mut r0, mut r1) = (i64::from(self.q), i64::from(a % self.q));
        let (mut t0, mut t1) = (0i64, 1i64);
        while r1 != 0 {
            let quot = r0 / r1;
            (r0, r1) = (r1, r0 - quot * r1);
            (t0, t1) = (t1, t0 - quot * t1);
        }
        debug_assert_eq!(r0, 1);
        Ok(self.reduce_i64(t0))
    }

    pub fn div(self, a: u32, b: u32) -> Result<u32, FieldError> {
        Ok(self.mul(a, self.inv(b)?))
    }

    /// `acc + coeff * x`, componentwise over a symbol vector.
    pub fn axpy(self, acc: &mut [u32], coeff: u32, x: &[u32]) {
        debug_assert_eq!(acc.len(), x.len());
        if coeff == 0 {
            return;
        }
        for (a, &v) in acc.iter_mut().zip(x) {
            *a = self.add(*a, self.mul(coeff, v));
        }
    }
}

impl fmt::Display for PrimeField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_{}", self.q)
    }
}

/// Primality by trial division; sufficient for moduli below `2^31`.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n < 4 {
        return true;
    }
    if n.is_multiple_of(2) || n.is_multiple_of(3) {
        return false;
    }
    let mut d = 5u64;
    while d * d <= n {
        if n.is_multiple_of(d) || n.is_multiple_of(d + 2) {
            return false;
        }
        d += 6;
    }
    true
}

/// Smallest prime `p >= n`.
pub fn next_prime(n: u64) -> u64 {
    let mut p = n.max(2);
    while !is_prime(p) {
        p += 1;
    }
    p
}

/// Arithmetic operation selector for [`field_arith`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldOp {
    Add,
    Sub,
    Mul,
    Div,
    /// Unary; the second operand is ignored.
    Inv,
    /// Unary; the second operand is ignored.
    Neg,
}

/// An element of a [`PrimeField`], always in canonical form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldElement {
    value: u32,
    field: PrimeField,
}

// Checked counterparts of the operator traits: mixing fields is an error.
#[allow(clippy::should_implement_trait)]
impl FieldElement {
    #[inline]
    pub fn value(self) -> u32 {
        self.value
    }

    #[inline]
    pub fn field(self) -> PrimeField {
        self.field
    }

    pub fn is_zero(self) -> bool {
        self.value == 0
    }

    fn check(self, other: FieldElement) -> Result<PrimeField, FieldError> {
        if self.field != other.field {
            return Err(FieldError::FieldMismatch {
                left: self.field.q,
                right: other.field.q,
            });
        }
        Ok(self.field)
    }

    fn with(self, value: u32) -> FieldElement {
        FieldElement {
            value,
            field: self.field,
        }
    }

    pub fn add(self, other: FieldElement) -> Result<FieldElement, FieldError> {
        let f = self.check(other)?;
        Ok(self.with(f.add(self.value, other.value)))
    }

    pub fn sub(self, other: FieldElement) -> Result<FieldElement, FieldError> {
        let f = self.check(other)?;
        Ok(self.with(f.sub(self.value, other.value)))
    }

    pub fn mul(self, other: FieldElement) -> Result<FieldElement, FieldError> {
        let f = self.check(other)?;
        Ok(self.with(f.mul(self.value, other.value)))
    }

    pub fn div(self, other: FieldElement) -> Result<FieldElement, FieldError> {
        let f = self.check(other)?;
        Ok(self.with(f.div(self.value, other.value)?))
    }

    pub fn inv(self) -> Result<FieldElement, FieldError> {
        Ok(self.with(self.field.inv(self.value)?))
    }

    pub fn neg(self) -> FieldElement {
        self.with(self.field.neg(self.value))
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

/// Applies `op` to `a` (and `b` for binary operations).
pub fn field_arith(
    a: FieldElement,
    b: FieldElement,
    op: FieldOp,
) -> Result<FieldElement, FieldError> {
    match op {
        FieldOp::Add => a.add(b),
        FieldOp::Sub => a.sub(b),
        FieldOp::Mul => a.mul(b),
        FieldOp::Div => a.div(b),
        FieldOp::Inv => a.inv(),
        FieldOp::Neg => Ok(a.neg()),
    }
}
