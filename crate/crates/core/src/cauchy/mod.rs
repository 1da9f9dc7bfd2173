//! Cauchy coding matrices.
//!
//! The server codes every packet with coefficients taken from one
//! `K x (M*l + 1)` Cauchy matrix `c[i][j] = 1 / (x_i - y_j)`. Round 1 uses
//! column 1; round `i >= 2` uses the `M` columns `(i-2)M+2 ..= (i-1)M+1`.

mod decodable;

pub use decodable::{
    decode_structure_count, default_matrix, find_decodable, verify_decodable, Coverage,
    DecodabilityReport, EXHAUSTIVE_LIMIT,
};

use std::collections::HashSet;
use std::ops::Range;

use thiserror::Error;

use crate::field::{FieldError, FieldMatrix, PrimeField};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CauchyError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("field F_{q} is too small: need q >= {required}")]
    FieldTooSmall { q: u64, required: u64 },
    #[error("round {round} is out of range (1..={max})")]
    RoundOutOfRange { round: usize, max: usize },
    #[error("evaluation point {0} is repeated")]
    DuplicatePoint(u32),
    #[error("expected {expected} {which} points, got {actual}")]
    PointCount {
        which: &'static str,
        expected: usize,
        actual: usize,
    },
    #[error("round-{round} decode system over blocks {leaves:?} is singular")]
    Undecodable {
        round: usize,
        leaves: Vec<Vec<usize>>,
    },
    #[error("no decodable Cauchy matrix found below q = 2^31")]
    NoDecodableMatrix,
}

/// A Cauchy matrix together with the points that generate it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CauchyMatrix {
    entries: FieldMatrix,
    x_points: Vec<u32>,
    y_points: Vec<u32>,
}

/// Number of columns needed for `K = (M+1) 2^l` messages: `M*l + 1`.
pub fn column_count(side_len: usize, l: usize) -> usize {
    side_len * l + 1
}

/// Zero-based column range used at `round` (1-based).
pub fn round_column_range(round: usize, side_len: usize) -> Range<usize> {
    match round {
        0 => 0..0,
        1 => 0..1,
        i => (i - 2) * side_len + 1..(i - 1) * side_len + 1,
    }
}

/// Canonical matrix with `x_i = i + M*l` and `y_j = j - 1`.
pub fn build_cauchy(
    q: u64,
    k: usize,
    side_len: usize,
    l: usize,
) -> Result<CauchyMatrix, CauchyError> {
    let field = PrimeField::new(q)?;
    let required = (k + side_len * l + 1) as u64;
    if q < required {
        return Err(CauchyError::FieldTooSmall { q, required });
    }
    let shift = (side_len * l) as u64;
    let xs = (1..=k as u64).map(|i| ((i + shift) % q) as u32).collect();
    let ys = (0..column_count(side_len, l) as u64)
        .map(|j| (j % q) as u32)
        .collect();
    CauchyMatrix::from_points(field, xs, ys)
}

impl CauchyMatrix {
    /// Builds `1 / (x_i - y_j)` from caller-supplied points, which must be
    /// pairwise distinct across both sets.
    pub fn from_points(
        field: PrimeField,
        x_points: Vec<u32>,
        y_points: Vec<u32>,
    ) -> Result<Self, CauchyError> {
        let mut seen = HashSet::with_capacity(x_points.len() + y_points.len());
        for &p in x_points.iter().chain(&y_points) {
            if p >= field.modulus() {
                return Err(FieldError::NonCanonical {
                    value: p.into(),
                    q: field.modulus(),
                }
                .into());
            }
            if !seen.insert(p) {
                return Err(CauchyError::DuplicatePoint(p));
            }
        }
        let mut entries = FieldMatrix::zeros(field, x_points.len(), y_points.len());
        for (i, &x) in x_points.iter().enumerate() {
            for (j, &y) in y_points.iter().enumerate() {
                entries.set(i, j, field.inv(field.sub(x, y))?);
            }
        }
        Ok(Self {
            entries,
            x_points,
            y_points,
        })
    }

    /// Points for `K` messages and `M*l + 1` columns, checked for shape.
    pub fn from_points_for(
        field: PrimeField,
        k: usize,
        side_len: usize,
        l: usize,
        x_points: Vec<u32>,
        y_points: Vec<u32>,
    ) -> Result<Self, CauchyError> {
        if x_points.len() != k {
            return Err(CauchyError::PointCount {
                which: "x",
                expected: k,
                actual: x_points.len(),
            });
        }
        let cols = column_count(side_len, l);
        if y_points.len() != cols {
            return Err(CauchyError::PointCount {
                which: "y",
                expected: cols,
                actual: y_points.len(),
            });
        }
        Self::from_points(field, x_points, y_points)
    }

    pub fn field(&self) -> PrimeField {
        self.entries.field()
    }

    pub fn entries(&self) -> &FieldMatrix {
        &self.entries
    }

    pub fn x_points(&self) -> &[u32] {
        &self.x_points
    }

    pub fn y_points(&self) -> &[u32] {
        &self.y_points
    }

    pub fn rows(&self) -> usize {
        self.entries.rows()
    }

    pub fn cols(&self) -> usize {
        self.entries.cols()
    }

    /// Entry for message `message` (1-based) and zero-based column `col`.
    #[inline]
    pub fn coefficient(&self, message: usize, col: usize) -> u32 {
        self.entries.raw(message - 1, col)
    }

    /// The `K x 1` block for round 1 or the `K x M` block for round `i >= 2`.
    pub fn round_columns(&self, round: usize, side_len: usize) -> Result<FieldMatrix, CauchyError> {
        let range = round_column_range(round, side_len);
        if round == 0 || range.end > self.cols() {
            let max = (self.cols() - 1).checked_div(side_len).map_or(1, |r| r + 1);
            return Err(CauchyError::RoundOutOfRange { round, max });
        }
        let rows: Vec<usize> = (0..self.rows()).collect();
        let cols: Vec<usize> = range.collect();
        Ok(self.entries.select(&rows, &cols))
    }
}
