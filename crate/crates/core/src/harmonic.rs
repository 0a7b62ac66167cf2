//! Harmonic Ritz pairs from Hessenberg data, and the residual-polynomial
//! roots used as an independent cross-check.
//!
//! At step `m` the pairs solve
//! `(H_m^* H_m + |h_{m+1,m}|^2 e_m e_m^*) u = sigma H_m^* u`,
//! i.e. the pencil `(H~_m^* H~_m, H_m^*)`.

use crate::arnoldi::ArnoldiDecomposition;
use crate::error::{Error, Result};
use crate::gmres::GmresState;
use crate::numeric::{
    c64, householder_lstsq, norm, scale, singular_values, solve_pencil_with, Complex64,
    ComplexMatrix, PencilEigenPair, INFINITY_TOL, ONE, ZERO,
};

/// Condition number above which the Krylov-basis coefficient recovery is
/// refused.
pub const KRYLOV_COND_LIMIT: f64 = 1e8;

#[derive(Clone, Debug, PartialEq)]
pub struct HarmonicPair {
    pub pair: PencilEigenPair,
    /// `e_m^* u` of the stored unit vector.
    pub u_last: Complex64,
    /// `A V_m u - sigma V_m u`; present only for finite pairs.
    pub harmonic_residual: Option<Vec<Complex64>>,
}

impl HarmonicPair {
    pub fn sigma(&self) -> Option<Complex64> {
        self.pair.eigenvalue()
    }

    pub fn is_infinite(&self) -> bool {
        self.pair.infinite
    }

    pub fn u(&self) -> &[Complex64] {
        &self.pair.vector
    }
}

/// `(H~_m^* H~_m, H_m^*)`.
pub fn harmonic_pencil(decomp: &ArnoldiDecomposition, m: usize) -> Result<(ComplexMatrix, ComplexMatrix)> {
    let ht = decomp.hessenberg_ext(m)?;
    let lhs = ht.adjoint().matmul(&ht);
    let rhs = ht.leading(m, m).adjoint();
    Ok((lhs, rhs))
}

pub fn harmonic_pairs(decomp: &ArnoldiDecomposition, m: usize) -> Result<Vec<HarmonicPair>> {
    harmonic_pairs_with(decomp, m, INFINITY_TOL)
}

/// All `m` harmonic pairs at step `m`, ordered as the pencil solver orders
/// them (finite first, descending modulus).
pub fn harmonic_pairs_with(
    decomp: &ArnoldiDecomposition,
    m: usize,
    infinity_tol: f64,
) -> Result<Vec<HarmonicPair>> {
    if m == 0 || m > decomp.steps() {
        return Err(Error::IndexOutOfRange {
            index: m,
            valid: format!("1..={}", decomp.steps()),
        });
    }
    let (lhs, rhs) = harmonic_pencil(decomp, m)?;
    solve_pencil_with(&lhs, &rhs, infinity_tol)?
        .into_iter()
        .map(|pair| {
            let u_last = pair.vector[m - 1];
            let harmonic_residual = match pair.eigenvalue() {
                Some(sigma) => Some(residual_for(decomp, m, sigma, &pair.vector)?),
                None => None,
            };
            Ok(HarmonicPair {
                pair,
                u_last,
                harmonic_residual,
            })
        })
        .collect()
}

/// `A V_m u - sigma V_m u`, evaluated as `V_{m+1}(H~_m u) - sigma V_m u`.
pub fn harmonic_residual_vector(
    decomp: &ArnoldiDecomposition,
    pair: &PencilEigenPair,
    m: usize,
) -> Result<Vec<Complex64>> {
    let sigma = pair.eigenvalue().ok_or(Error::InfinitePair)?;
    residual_for(decomp, m, sigma, &pair.vector)
}

/// Same as [`harmonic_residual_vector`] for an arbitrary coefficient vector.
pub fn residual_for(
    decomp: &ArnoldiDecomposition,
    m: usize,
    sigma: Complex64,
    u: &[Complex64],
) -> Result<Vec<Complex64>> {
    if u.len() != m {
        return Err(Error::DimensionMismatch(format!(
            "vector has length {}, expected {m}",
            u.len()
        )));
    }
    let ht = decomp.hessenberg_ext(m)?;
    let mut coeffs = ht.matvec(u);
    for (c, &ui) in coeffs.iter_mut().zip(u) {
        *c -= sigma * ui;
    }
    Ok(decomp.combine(&coeffs))
}

/// Coefficients `p_0 = 1, p_1, ..., p_m` of the GMRES residual polynomial
/// `r_m = p(A) b`, recovered from `x_m = c_0 b + ... + c_{m-1} A^{m-1} b`.
#[derive(Clone, Debug, PartialEq)]
pub struct ResidualPolynomial {
    pub coefficients: Vec<Complex64>,
    /// Condition number of the column-scaled Krylov matrix.
    pub krylov_condition: f64,
}

impl ResidualPolynomial {
    pub fn degree_bound(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coefficients.iter().rev().fold(ZERO, |acc, &p| acc * z + p)
    }

    /// The `m` roots as eigenvalues of a companion pencil; `None` marks a
    /// root at infinity (degree drop).
    pub fn roots(&self) -> Result<Vec<Option<Complex64>>> {
        let m = self.degree_bound();
        let p = &self.coefficients;
        // p(z) = det(z B - A) / p_m with A the companion of p and
        // B = diag(p_m, 1, ..., 1); p_m = 0 leaves an infinite eigenvalue
        let a = ComplexMatrix::from_fn(m, m, |i, j| {
            if i == 0 {
                -p[m - 1 - j]
            } else if i == j + 1 {
                ONE
            } else {
                ZERO
            }
        });
        let b = ComplexMatrix::from_fn(m, m, |i, j| match (i, j) {
            (0, 0) => p[m],
            _ if i == j => ONE,
            _ => ZERO,
        });
        Ok(solve_pencil_with(&a, &b, INFINITY_TOL)?
            .iter()
            .map(PencilEigenPair::eigenvalue)
            .collect())
    }
}

pub fn residual_polynomial(state: &GmresState, m: usize) -> Result<ResidualPolynomial> {
    if m == 0 || m > state.steps() {
        return Err(Error::IndexOutOfRange {
            index: m,
            valid: format!("1..={}", state.steps()),
        });
    }
    let op = state.arnoldi().operator();
    let n = state.arnoldi().dim();
    let mut cols = Vec::with_capacity(m);
    let mut scales = Vec::with_capacity(m);
    let mut w = state.arnoldi().rhs().to_vec();
    for k in 0..m {
        if k > 0 {
            w = op.apply(&w);
        }
        let s = norm(&w);
        if s == 0.0 {
            return Err(Error::IllConditionedKrylov(f64::INFINITY));
        }
        cols.push(scale(&w, c64(1.0 / s, 0.0)));
        scales.push(s);
    }
    let krylov = ComplexMatrix::from_columns(n, &cols);
    let sv = singular_values(&krylov);
    let cond = sv[0] / sv[m - 1];
    if cond.is_nan() || cond > KRYLOV_COND_LIMIT {
        return Err(Error::IllConditionedKrylov(cond));
    }
    let x = state.solution(m)?;
    let d = householder_lstsq(&krylov, &x)?;
    let mut coefficients = Vec::with_capacity(m + 1);
    coefficients.push(ONE);
    coefficients.extend(d.iter().zip(&scales).map(|(&dk, &s)| -dk / s));
    Ok(ResidualPolynomial {
        coefficients,
        krylov_condition: cond,
    })
}

/// Roots of the step-`m` residual polynomial; `None` marks an infinite root.
pub fn residual_polynomial_roots(state: &GmresState, m: usize) -> Result<Vec<Option<Complex64>>> {
    residual_polynomial(state, m)?.roots()
}
