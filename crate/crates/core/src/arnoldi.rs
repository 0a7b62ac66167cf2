//! Arnoldi factorization `A V_m = V_{m+1} H~_m`, built one column at a time
//! with modified Gram-Schmidt and one full reorthogonalization pass.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::numeric::{axpy, c64, dot, norm, Complex64, ComplexMatrix, ZERO};
use crate::operator::LinearOperator;

/// Relative threshold on `h_{m+1,m} / ||A v_m||` below which the step is a
/// (lucky) breakdown.
pub const BREAKDOWN_TOL: f64 = 1e-12;

#[derive(Clone)]
pub struct ArnoldiDecomposition {
    op: Arc<dyn LinearOperator>,
    rhs: Vec<Complex64>,
    beta: f64,
    /// v_1 .. v_{m+1}; only v_1 .. v_m after a breakdown.
    basis: Vec<Vec<Complex64>>,
    /// Column j of H~ holds rows 0..=j+1.
    hcols: Vec<Vec<Complex64>>,
    breakdown: bool,
}

impl fmt::Debug for ArnoldiDecomposition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ArnoldiDecomposition")
            .field("dim", &self.dim())
            .field("steps", &self.steps())
            .field("beta", &self.beta)
            .field("breakdown", &self.breakdown)
            .finish()
    }
}

impl ArnoldiDecomposition {
    /// Starts the factorization with `v_1 = b / ||b||`.
    pub fn new(op: Arc<dyn LinearOperator>, b: &[Complex64]) -> Result<Self> {
        let n = op.dim();
        if b.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "rhs has length {}, operator has dimension {n}",
                b.len()
            )));
        }
        if let Some(i) = b.iter().position(|z| !z.is_finite()) {
            return Err(Error::NonFinite { row: i, col: 0 });
        }
        let beta = norm(b);
        if beta == 0.0 {
            return Err(Error::ZeroRhs);
        }
        let v1 = b.iter().map(|z| z / beta).collect();
        Ok(Self {
            op,
            rhs: b.to_vec(),
            beta,
            basis: vec![v1],
            hcols: Vec::new(),
            breakdown: false,
        })
    }

    /// Extends the factorization by one column.
    ///
    /// On breakdown `h_{m+1,m}` is stored as an exact zero and no `v_{m+1}`
    /// is appended.
    pub fn step(&mut self) -> Result<()> {
        let n = self.dim();
        let m = self.steps();
        if m >= n {
            return Err(Error::ExhaustedSpace(n));
        }
        if self.breakdown {
            return Err(Error::AfterBreakdown(m));
        }
        let mut w = self.op.apply(&self.basis[m]);
        if w.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "operator returned length {}, expected {n}",
                w.len()
            )));
        }
        let aw = norm(&w);
        let mut h = vec![ZERO; m + 2];
        for _pass in 0..2 {
            for (j, v) in self.basis.iter().enumerate() {
                let c = dot(v, &w);
                axpy(-c, v, &mut w);
                h[j] += c;
            }
        }
        let hnext = norm(&w);
        if hnext <= BREAKDOWN_TOL * aw || m + 1 == n {
            self.breakdown = true;
            h[m + 1] = ZERO;
        } else {
            h[m + 1] = c64(hnext, 0.0);
            let inv = 1.0 / hnext;
            self.basis.push(w.into_iter().map(|z| z * inv).collect());
        }
        self.hcols.push(h);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    /// Number of completed steps `m`.
    pub fn steps(&self) -> usize {
        self.hcols.len()
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn breakdown(&self) -> bool {
        self.breakdown
    }

    pub fn rhs(&self) -> &[Complex64] {
        &self.rhs
    }

    pub fn operator(&self) -> &Arc<dyn LinearOperator> {
        &self.op
    }

    /// `v_{j+1}` (zero-based `j`), if stored.
    pub fn basis_vector(&self, j: usize) -> Option<&[Complex64]> {
        self.basis.get(j).map(Vec::as_slice)
    }

    /// `n x k` matrix of the first `k` basis vectors; missing trailing
    /// vectors (after breakdown) are zero columns.
    pub fn basis_matrix(&self, k: usize) -> ComplexMatrix {
        let n = self.dim();
        let mut v = ComplexMatrix::zeros(n, k);
        for (j, col) in self.basis.iter().take(k).enumerate() {
            v.col_mut(j).copy_from_slice(col);
        }
        v
    }

    /// `H~_m`, the `(m+1) x m` extended Hessenberg matrix.
    pub fn hessenberg_ext(&self, m: usize) -> Result<ComplexMatrix> {
        self.check_m(m)?;
        let mut h = ComplexMatrix::zeros(m + 1, m);
        for j in 0..m {
            for (i, &x) in self.hcols[j].iter().enumerate().take(m + 1) {
                h[(i, j)] = x;
            }
        }
        Ok(h)
    }

    /// Square `H_m`.
    pub fn hessenberg(&self, m: usize) -> Result<ComplexMatrix> {
        Ok(self.hessenberg_ext(m)?.leading(m, m))
    }

    /// `h_{m+1,m}` for one-based `m`.
    pub fn subdiagonal(&self, m: usize) -> Result<Complex64> {
        self.check_m(m)?;
        if m == 0 {
            return Err(Error::IndexOutOfRange {
                index: 0,
                valid: format!("1..={}", self.steps()),
            });
        }
        Ok(self.hcols[m - 1][m])
    }

    /// Column `j` (zero-based) of `H~`, rows `0..=j+1`.
    pub fn hessenberg_column(&self, j: usize) -> &[Complex64] {
        &self.hcols[j]
    }

    /// `V_{m+1} x` for `x` of length up to `m+1`.
    pub fn combine(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![ZERO; self.dim()];
        for (xi, v) in x.iter().zip(&self.basis) {
            axpy(*xi, v, &mut out);
        }
        out
    }

    fn check_m(&self, m: usize) -> Result<()> {
        if m > self.steps() {
            return Err(Error::IndexOutOfRange {
                index: m,
                valid: format!("0..={}", self.steps()),
            });
        }
        Ok(())
    }
}
