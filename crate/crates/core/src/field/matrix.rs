use std::fmt;

use super::{FieldElement, FieldError, PrimeField};

/// Dense row-major matrix over a single prime field.
#[derive(Clone, PartialEq, Eq)]
pub struct FieldMatrix {
    field: PrimeField,
    rows: usize,
    cols: usize,
    data: Vec<u32>,
}

impl FieldMatrix {
    pub fn zeros(field: PrimeField, rows: usize, cols: usize) -> Self {
        Self {
            field,
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(field: PrimeField, n: usize) -> Self {
        let mut m = Self::zeros(field, n, n);
        for i in 0..n {
            m.data[i * n + i] = 1 % field.modulus();
        }
        m
    }

    /// Builds a matrix from rows of integers, reducing each entry mod `q`.
    pub fn from_rows<R: AsRef<[i64]>>(field: PrimeField, rows: &[R]) -> Result<Self, FieldError> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(FieldError::DimensionMismatch(format!(
                    "ragged rows: expected {cols} columns, found {}",
                    r.len()
                )));
            }
            data.extend(r.iter().map(|&v| field.reduce_i64(v)));
        }
        Ok(Self {
            field,
            rows: rows.len(),
            cols,
            data,
        })
    }

    /// Builds a matrix from raw canonical values.
    pub fn from_raw(
        field: PrimeField,
        rows: usize,
        cols: usize,
        data: Vec<u32>,
    ) -> Result<Self, FieldError> {
        if data.len() != rows * cols {
            return Err(FieldError::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if let Some(&v) = data.iter().find(|&&v| v >= field.modulus()) {
            return Err(FieldError::NonCanonical {
                value: v.into(),
                q: field.modulus(),
            });
        }
        Ok(Self {
            field,
            rows,
            cols,
            data,
        })
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

    #[inline]
    pub fn raw(&self, r: usize, c: usize) -> u32 {
        self.data[r * self.cols + c]
    }

    pub fn get(&self, r: usize, c: usize) -> FieldElement {
        FieldElement {
            value: self.raw(r, c),
            field: self.field,
        }
    }

    pub fn set(&mut self, r: usize, c: usize, value: u32) {
        assert!(value < self.field.modulus(), "non-canonical entry");
        self.data[r * self.cols + c] = value;
    }

    pub fn row(&self, r: usize) -> &[u32] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [u32] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<u32>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn push_row(&mut self, row: &[u32]) {
        assert_eq!(row.len(), self.cols, "row length mismatch");
        self.data.extend_from_slice(row);
        self.rows += 1;
    }

    /// Extracts the submatrix at the given row and column positions.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> FieldMatrix {
        let mut data = Vec::with_capacity(rows.len() * cols.len());
        for &r in rows {
            data.extend(cols.iter().map(|&c| self.raw(r, c)));
        }
        FieldMatrix {
            field: self.field,
            rows: rows.len(),
            cols: cols.len(),
            data,
        }
    }

    pub fn mul_vec(&self, x: &[u32]) -> Result<Vec<u32>, FieldError> {
        if x.len() != self.cols {
            return Err(FieldError::DimensionMismatch(format!(
                "vector of length {} against {} columns",
                x.len(),
                self.cols
            )));
        }
        let f = self.field;
        Ok((0..self.rows)
            .map(|r| {
                self.row(r)
                    .iter()
                    .zip(x)
                    .fold(0, |acc, (&a, &b)| f.add(acc, f.mul(a, b)))
            })
            .collect())
    }

    pub fn mul(&self, other: &FieldMatrix) -> Result<FieldMatrix, FieldError> {
        if self.field != other.field {
            return Err(FieldError::FieldMismatch {
                left: self.field.modulus(),
                right: other.field.modulus(),
            });
        }
        if self.cols != other.rows {
            return Err(FieldError::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let f = self.field;
        let mut out = FieldMatrix::zeros(f, self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.raw(r, k);
                if a == 0 {
                    continue;
                }
                let (src, dst) = (
                    other.row(k),
                    &mut out.data[r * other.cols..(r + 1) * other.cols],
                );
                f.axpy(dst, a, src);
            }
        }
        Ok(out)
    }

    /// Row rank by Gaussian elimination.
    pub fn rank(&self) -> usize {
        let mut work = self.clone();
        work.row_echelon(self.cols)
    }

    /// Reduces `self` in place to reduced row-echelon form over the first
    /// `pivot_cols` columns, pivoting on the first nonzero entry in each
    /// column. Returns the number of pivots.
    fn row_echelon(&mut self, pivot_cols: usize) -> usize {
        let f = self.field;
        let mut rank = 0;
        for c in 0..pivot_cols {
            if rank == self.rows {
                break;
            }
            let Some(p) = (rank..self.rows).find(|&r| self.raw(r, c) != 0) else {
                continue;
            };
            if p != rank {
                for k in 0..self.cols {
                    self.data.swap(p * self.cols + k, rank * self.cols + k);
                }
            }
            let inv = f.inv(self.raw(rank, c)).expect("pivot is nonzero");
            for v in self.row_mut(rank) {
                *v = f.mul(*v, inv);
            }
            let pivot_row = self.row(rank).to_vec();
            for r in 0..self.rows {
                if r == rank {
                    continue;
                }
                let factor = self.raw(r, c);
                if factor != 0 {
                    let neg = f.neg(factor);
                    f.axpy(self.row_mut(r), neg, &pivot_row);
                }
            }
            rank += 1;
        }
        rank
    }

    /// Solves `self * X = rhs` for a square `self` and any number of
    /// right-hand-side columns.
    pub fn solve_columns(&self, rhs: &FieldMatrix) -> Result<FieldMatrix, FieldError> {
        let n = self.rows;
        if self.cols != n {
            return Err(FieldError::DimensionMismatch(format!(
                "coefficient matrix is {}x{}, not square",
                self.rows, self.cols
            )));
        }
        if rhs.rows != n {
            return Err(FieldError::DimensionMismatch(format!(
                "right-hand side has {} rows, expected {n}",
                rhs.rows
            )));
        }
        if self.field != rhs.field {
            return Err(FieldError::FieldMismatch {
                left: self.field.modulus(),
                right: rhs.field.modulus(),
            });
        }
        let width = n + rhs.cols;
        let mut aug = FieldMatrix::zeros(self.field, n, width);
        for r in 0..n {
            aug.row_mut(r)[..n].copy_from_slice(self.row(r));
            aug.row_mut(r)[n..].copy_from_slice(rhs.row(r));
        }
        if aug.row_echelon(n) < n {
            return Err(FieldError::SingularMatrix);
        }
        let mut out = FieldMatrix::zeros(self.field, n, rhs.cols);
        for r in 0..n {
            out.row_mut(r).copy_from_slice(&aug.row(r)[n..]);
        }
        Ok(out)
    }
}

impl fmt::Debug for FieldMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "FieldMatrix {}x{} over {}",
            self.rows, self.cols, self.field
        )?;
        for r in 0..self.rows {
            writeln!(f, "  {:?}", self.row(r))?;
        }
        Ok(())
    }
}

/// Solves the square system `a * x = b`.
pub fn solve_linear_system(
    a: &FieldMatrix,
    b: &[FieldElement],
) -> Result<Vec<FieldElement>, FieldError> {
    let field = a.field();
    if let Some(e) = b.iter().find(|e| e.field() != field) {
        return Err(FieldError::FieldMismatch {
            left: field.modulus(),
            right: e.field().modulus(),
        });
    }
    let rhs = FieldMatrix::from_raw(field, b.len(), 1, b.iter().map(|e| e.value()).collect())?;
    let x = a.solve_columns(&rhs)?;
    Ok((0..x.rows()).map(|r| x.get(r, 0)).collect())
}

pub fn matrix_rank(a: &FieldMatrix) -> usize {
    a.rank()
}
