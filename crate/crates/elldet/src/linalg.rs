//! Small dense complex matrices and determinants.
//!
//! Orders stay tiny (n <= 10), but determinant ratios can span many orders
//! of magnitude, so elimination pivots by magnitude. A Laplace-expansion
//! determinant serves as the independent cross-check route.

use crate::error::{Error, Result};
use crate::numeric::{CScalar, PrecisionContext};

/// Row-major square matrix of high-precision complex scalars.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    n: usize,
    entries: Vec<CScalar>,
}

impl ComplexMatrix {
    /// Build an n x n matrix from an entry generator (row, col), 0-based.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> CScalar) -> Self {
        let mut entries = Vec::with_capacity(n * n);
        for j in 0..n {
            for k in 0..n {
                entries.push(f(j, k));
            }
        }
        Self { n, entries }
    }

    /// Fallible variant of [`ComplexMatrix::from_fn`].
    pub fn try_from_fn(
        n: usize,
        mut f: impl FnMut(usize, usize) -> Result<CScalar>,
    ) -> Result<Self> {
        let mut entries = Vec::with_capacity(n * n);
        for j in 0..n {
            for k in 0..n {
                entries.push(f(j, k)?);
            }
        }
        Ok(Self { n, entries })
    }

    pub fn identity(n: usize, ctx: &PrecisionContext) -> Self {
        Self::from_fn(n, |j, k| if j == k { ctx.one() } else { ctx.zero() })
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn get(&self, row: usize, col: usize) -> &CScalar {
        &self.entries[row * self.n + col]
    }

    /// New matrix with columns in reverse order.
    pub fn reverse_columns(&self) -> Self {
        Self::from_fn(self.n, |j, k| self.get(j, self.n - 1 - k).clone())
    }

    /// Determinant by Gaussian elimination with partial pivoting by
    /// magnitude. A singular matrix yields a value of magnitude ~ 0 rather
    /// than an error: identities legitimately produce zero determinants.
    pub fn det_lu(&self, ctx: &PrecisionContext) -> CScalar {
        let n = self.n;
        if n == 0 {
            return ctx.one();
        }
        let mut m = self.entries.clone();
        let mut det = ctx.one();
        for col in 0..n {
            let mut pivot = col;
            let mut best = m[col * n + col].abs();
            for row in col + 1..n {
                let mag = m[row * n + col].abs();
                if mag > best {
                    best = mag;
                    pivot = row;
                }
            }
            if best.is_zero() {
                return ctx.zero();
            }
            if pivot != col {
                for k in 0..n {
                    m.swap(col * n + k, pivot * n + k);
                }
                det = -det;
            }
            let diag = m[col * n + col].clone();
            det = &det * &diag;
            for row in col + 1..n {
                if m[row * n + col].is_zero() {
                    continue;
                }
                let factor = &m[row * n + col] / &diag;
                for k in col..n {
                    let delta = &factor * &m[col * n + k];
                    m[row * n + k] = &m[row * n + k] - &delta;
                }
            }
        }
        det
    }

    /// Determinant by first-row cofactor expansion; O(n!), the independent
    /// oracle for [`ComplexMatrix::det_lu`]. Guarded to n <= 7.
    pub fn det_cofactor(&self, ctx: &PrecisionContext) -> Result<CScalar> {
        if self.n > 7 {
            return Err(Error::CofactorOrderTooLarge(self.n));
        }
        Ok(self.det_cofactor_inner(ctx))
    }

    fn det_cofactor_inner(&self, ctx: &PrecisionContext) -> CScalar {
        let n = self.n;
        if n == 0 {
            return ctx.one();
        }
        if n == 1 {
            return self.get(0, 0).clone();
        }
        let mut acc = ctx.zero();
        for col in 0..n {
            let minor = ComplexMatrix::from_fn(n - 1, |j, k| {
                let kk = if k < col { k } else { k + 1 };
                self.get(j + 1, kk).clone()
            });
            let term = self.get(0, col) * minor.det_cofactor_inner(ctx);
            acc = if col % 2 == 0 { &acc + &term } else { &acc - &term };
        }
        acc
    }

    /// Standard matrix product; orders must match.
    pub fn matmul(&self, other: &ComplexMatrix, ctx: &PrecisionContext) -> Result<ComplexMatrix> {
        if self.n != other.n {
            return Err(Error::OrderMismatch(self.n, other.n));
        }
        let n = self.n;
        Ok(ComplexMatrix::from_fn(n, |j, k| {
            let mut acc = ctx.zero();
            for l in 0..n {
                acc = &acc + &(self.get(j, l) * other.get(l, k));
            }
            acc
        }))
    }
}
