//! GMRES with `x_0 = 0`, keeping an incremental Givens QR of `H~_m` and the
//! least-squares solution `y_m` of every step.

use std::sync::Arc;

use crate::arnoldi::{ArnoldiDecomposition, BREAKDOWN_TOL};
use crate::error::{Error, Result};
use crate::numeric::{
    back_substitute, householder_lstsq, norm, sub, Complex64, ComplexMatrix, Givens, ONE, ZERO,
};
use crate::operator::LinearOperator;

/// Snapshot of one GMRES step.
#[derive(Clone, Debug, PartialEq)]
pub struct IterationRecord {
    pub m: usize,
    pub y: Vec<Complex64>,
    pub resnorm: f64,
    /// Last entry of `y`.
    pub em_y: Complex64,
    pub residual_vector: Option<Vec<Complex64>>,
    /// Set when the Arnoldi process broke down or exhausted the space.
    pub terminal: bool,
}

#[derive(Clone, Debug)]
pub struct GmresState {
    arnoldi: ArnoldiDecomposition,
    rotations: Vec<Givens>,
    /// Columns of the triangular factor; column j holds rows 0..=j.
    r_cols: Vec<Vec<Complex64>>,
    /// `beta e_1` after all rotations, length m+1.
    transformed_rhs: Vec<Complex64>,
    /// y_0 (empty) .. y_m.
    y_history: Vec<Vec<Complex64>>,
    resnorms: Vec<f64>,
}

impl GmresState {
    pub fn new(op: Arc<dyn LinearOperator>, b: &[Complex64]) -> Result<Self> {
        let arnoldi = ArnoldiDecomposition::new(op, b)?;
        let beta = arnoldi.beta();
        Ok(Self {
            arnoldi,
            rotations: Vec::new(),
            r_cols: Vec::new(),
            transformed_rhs: vec![Complex64::new(beta, 0.0)],
            y_history: vec![Vec::new()],
            resnorms: vec![beta],
        })
    }

    /// One Arnoldi step followed by the QR update and a fresh solve for `y`.
    pub fn advance(&mut self) -> Result<IterationRecord> {
        self.arnoldi.step()?;
        let m = self.arnoldi.steps();
        let mut col = self.arnoldi.hessenberg_column(m - 1).to_vec();
        for (k, rot) in self.rotations.iter().enumerate() {
            let (a, b) = rot.apply(col[k], col[k + 1]);
            col[k] = a;
            col[k + 1] = b;
        }
        let (mut rot, mut rho) = Givens::new(col[m - 1], col[m]);
        let col_norm = norm(self.arnoldi.hessenberg_column(m - 1));
        // Breakdown on a singular restriction of A: H_m is singular and the
        // step stagnates. Swap rows so the unattainable component of the
        // rhs stays in the residual slot, and keep y_m = (y_{m-1}, 0).
        let singular = self.arnoldi.breakdown() && rho.norm() <= BREAKDOWN_TOL * col_norm;
        if singular {
            rot = Givens { c: 0.0, s: ONE };
            rho = ZERO;
        }
        col[m - 1] = rho;
        col.truncate(m);
        self.rotations.push(rot);
        self.r_cols.push(col);

        self.transformed_rhs.push(ZERO);
        let (a, b) = rot.apply(self.transformed_rhs[m - 1], self.transformed_rhs[m]);
        self.transformed_rhs[m - 1] = a;
        self.transformed_rhs[m] = b;

        let y = if singular {
            let mut y = self.y_current().to_vec();
            y.push(ZERO);
            y
        } else {
            back_substitute(&self.triangular_factor(), &self.transformed_rhs[..m])?
        };
        let resnorm = b.norm();
        self.resnorms.push(resnorm);
        self.y_history.push(y.clone());

        Ok(IterationRecord {
            m,
            em_y: y[m - 1],
            y,
            resnorm,
            residual_vector: None,
            terminal: self.is_terminal(),
        })
    }

    /// Advances until `resnorm <= tol * beta`, `max_iter` steps, or termination.
    pub fn run(&mut self, max_iter: usize, tol: f64) -> Result<Vec<IterationRecord>> {
        let mut out = Vec::new();
        let beta = self.beta();
        while out.len() < max_iter && !self.is_terminal() {
            let rec = self.advance()?;
            let done = rec.resnorm <= tol * beta;
            out.push(rec);
            if done {
                break;
            }
        }
        Ok(out)
    }

    pub fn arnoldi(&self) -> &ArnoldiDecomposition {
        &self.arnoldi
    }

    pub fn steps(&self) -> usize {
        self.arnoldi.steps()
    }

    pub fn beta(&self) -> f64 {
        self.arnoldi.beta()
    }

    pub fn is_terminal(&self) -> bool {
        self.arnoldi.breakdown() || self.steps() >= self.arnoldi.dim()
    }

    /// `||r_0||, ||r_1||, ..., ||r_m||`.
    pub fn resnorm_history(&self) -> &[f64] {
        &self.resnorms
    }

    pub fn transformed_rhs(&self) -> &[Complex64] {
        &self.transformed_rhs
    }

    pub fn rotations(&self) -> &[Givens] {
        &self.rotations
    }

    pub fn y_current(&self) -> &[Complex64] {
        self.y_history.last().expect("y_0 recorded")
    }

    /// Least-squares solution recorded at step `m` (empty for `m = 0`).
    pub fn y(&self, m: usize) -> Result<&[Complex64]> {
        self.y_history
            .get(m)
            .map(Vec::as_slice)
            .ok_or_else(|| self.range_error(m, 0))
    }

    /// Upper triangular factor of the current `H~_m`.
    pub fn triangular_factor(&self) -> ComplexMatrix {
        let m = self.r_cols.len();
        let mut r = ComplexMatrix::zeros(m, m);
        for (j, col) in self.r_cols.iter().enumerate() {
            for (i, &x) in col.iter().enumerate() {
                r[(i, j)] = x;
            }
        }
        r
    }

    /// `x_m = V_m y_m`.
    pub fn solution(&self, m: usize) -> Result<Vec<Complex64>> {
        Ok(self.arnoldi.combine(self.y(m)?))
    }

    /// `r_m = b - A V_m y_m`, recomputed with an explicit operator application.
    pub fn materialize_residual(&self, m: usize) -> Result<Vec<Complex64>> {
        let b = self.arnoldi.rhs();
        if m == 0 {
            return Ok(b.to_vec());
        }
        let x = self.solution(m)?;
        let ax = self.arnoldi.operator().apply(&x);
        Ok(sub(b, &ax))
    }

    /// `[A v_1, ..., A v_m]` by explicit operator application.
    pub fn explicit_av(&self, m: usize) -> Result<ComplexMatrix> {
        if m > self.steps() {
            return Err(self.range_error(m, 0));
        }
        let n = self.arnoldi.dim();
        let op = self.arnoldi.operator();
        let cols: Vec<Vec<Complex64>> = (0..m)
            .map(|j| op.apply(self.arnoldi.basis_vector(j).expect("basis vector stored")))
            .collect();
        Ok(ComplexMatrix::from_columns(n, &cols))
    }

    /// Solves `min ||b - A V_m (I - e_m e_m^*) x||` densely and returns
    /// `||z_{m-1} - y_{m-1}||`, where `z_{m-1}` is the leading part of the
    /// minimum-norm solution.
    pub fn nested_ls_consistency(&self, m: usize) -> Result<f64> {
        if m < 2 || m > self.steps() {
            return Err(self.range_error(m, 2));
        }
        let av = self.explicit_av(m)?;
        // last column of A V_m (I - e_m e_m^*) is zero; the min-norm
        // solution has x_m = 0 and solves the leading block
        let projected = av.leading(av.rows(), m - 1);
        let z = householder_lstsq(&projected, self.arnoldi.rhs())?;
        Ok(norm(&sub(&z, self.y(m - 1)?)))
    }

    fn range_error(&self, m: usize, lo: usize) -> Error {
        Error::IndexOutOfRange {
            index: m,
            valid: format!("{lo}..={}", self.steps()),
        }
    }
}
