use serde::{Deserialize, Serialize};

use super::{operator_norm_estimate, StagnationReport, Thresholds};
use crate::error::{Error, Result};
use crate::gmres::GmresState;
use crate::harmonic::{residual_for, HarmonicPair};
use crate::numeric::{householder_lstsq, jacobi_svd, norm, sub, Complex64, ComplexMatrix, ONE};

/// Threshold for both sides of the non-stagnated biconditional.
pub const COINCIDENCE_TOL: f64 = 1e-8;
/// Contract for the stagnated identity with the `xi V_m s_2` correction.
pub const STAGNATION_COINCIDENCE_TOL: f64 = 1e-7;

/// Comparison of a harmonic residual `A V_m u - sigma V_m u` with the GMRES
/// residual `r_m`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoincidenceResult {
    pub pair_index: usize,
    pub sigma: Complex64,
    pub k_scale: Complex64,
    /// `|e_m^* u + K_scale e_m^* y|`.
    pub condition_error: f64,
    /// Norm of the identity's defect.
    pub vector_error: f64,
    /// What `vector_error` is measured against.
    pub vector_scale: f64,
    /// Unit vector with `H_m^* s_2 ~ 0` (stagnated form only).
    pub s2_component: Option<Vec<Complex64>>,
    pub xi: Option<Complex64>,
    /// `xi s_2` is the best fit from a null space of dimension > 1.
    pub extended_null_space: bool,
}

impl CoincidenceResult {
    pub fn condition_holds(&self) -> bool {
        self.condition_error <= COINCIDENCE_TOL
    }

    pub fn vector_holds(&self) -> bool {
        self.vector_error <= COINCIDENCE_TOL * self.vector_scale
    }

    pub fn biconditional_holds(&self) -> bool {
        self.condition_holds() == self.vector_holds()
    }
}

/// Evaluates `A V_m u - sigma V_m u = K_scale r_m` against
/// `e_m^* u = -K_scale e_m^* y` for an arbitrary `(sigma, u)`.
///
/// With `k_scale = None` the scale is taken as `-(e_m^* u)/(e_m^* y)`.
pub fn coincidence_for_vector(
    state: &GmresState,
    m: usize,
    sigma: Complex64,
    u: &[Complex64],
    k_scale: Option<Complex64>,
    thresholds: &Thresholds,
) -> Result<CoincidenceResult> {
    let y = state.y(m)?;
    if m == 0 || u.len() != m {
        return Err(Error::DimensionMismatch(format!(
            "vector of length {} at step {m}",
            u.len()
        )));
    }
    let em_y = y[m - 1];
    let em_u = u[m - 1];
    let k_scale = match k_scale {
        Some(k) => k,
        None => {
            if em_y.norm() <= thresholds.eps_z * norm(y) {
                return Err(Error::InconsistentState(format!(
                    "e_m^* y vanishes at step {m} without a stagnation verdict"
                )));
            }
            -em_u / em_y
        }
    };
    let harmonic = residual_for(state.arnoldi(), m, sigma, u)?;
    let r = state.materialize_residual(m)?;
    let defect: Vec<Complex64> = harmonic.iter().zip(&r).map(|(h, ri)| h - k_scale * ri).collect();
    Ok(CoincidenceResult {
        pair_index: 0,
        sigma,
        k_scale,
        condition_error: (em_u + k_scale * em_y).norm(),
        vector_error: norm(&defect),
        vector_scale: operator_norm_estimate(state, m)? + sigma.norm(),
        s2_component: None,
        xi: None,
        extended_null_space: false,
    })
}

/// Coincidence test for pair `index` at a non-stagnated step.
pub fn coincidence_check(
    state: &GmresState,
    pairs: &[HarmonicPair],
    index: usize,
    report: &StagnationReport,
    thresholds: &Thresholds,
) -> Result<CoincidenceResult> {
    let m = report.m;
    if report.stagnated {
        return Err(Error::StagnatedStep(m));
    }
    let pair = pick(pairs, index)?;
    let sigma = pair.sigma().ok_or(Error::InfinitePair)?;
    let mut res = coincidence_for_vector(state, m, sigma, pair.u(), None, thresholds)?;
    res.pair_index = index;
    Ok(res)
}

/// At a stagnated step: `A V_m u - sigma V_m u = r_m + xi V_m s_2` with
/// `H_m^* s_2 = 0`, `xi` fitted by least squares.
pub fn stagnation_coincidence_check(
    state: &GmresState,
    pairs: &[HarmonicPair],
    index: usize,
    report: &StagnationReport,
    thresholds: &Thresholds,
) -> Result<CoincidenceResult> {
    let m = report.m;
    if !report.stagnated {
        return Err(Error::NotStagnated(m));
    }
    let pair = pick(pairs, index)?;
    let sigma = pair.sigma().ok_or(Error::InfinitePair)?;
    let u = pair.u();

    let h = state.arnoldi().hessenberg(m)?;
    // right singular vectors of H^* are the left ones of H
    let svd = jacobi_svd(&h.adjoint());
    let cut = thresholds.eps_z * h.frobenius_norm();
    let null_dim = svd.singular_values.iter().filter(|&&s| s <= cut).count().max(1);
    let null_basis: Vec<Vec<Complex64>> = (m - null_dim..m).map(|j| svd.v.col(j).to_vec()).collect();
    let lifted: Vec<Vec<Complex64>> = null_basis.iter().map(|s| state.arnoldi().combine(s)).collect();
    let w = ComplexMatrix::from_columns(state.arnoldi().dim(), &lifted);

    let harmonic = residual_for(state.arnoldi(), m, sigma, u)?;
    let r = state.materialize_residual(m)?;
    let d = sub(&harmonic, &r);
    let coeffs = householder_lstsq(&w, &d)?;
    let fit = w.matvec(&coeffs);
    let vector_error = norm(&sub(&d, &fit));

    let (s2, xi) = if null_dim == 1 {
        (null_basis[0].clone(), coeffs[0])
    } else {
        let s = ComplexMatrix::from_columns(m, &null_basis).matvec(&coeffs);
        let sn = norm(&s);
        if sn == 0.0 {
            (null_basis[0].clone(), Complex64::new(0.0, 0.0))
        } else {
            (s.iter().map(|z| z / sn).collect(), Complex64::new(sn, 0.0))
        }
    };
    let y = state.y(m)?;
    Ok(CoincidenceResult {
        pair_index: index,
        sigma,
        k_scale: ONE,
        condition_error: (u[m - 1] + y[m - 1]).norm(),
        vector_error,
        vector_scale: operator_norm_estimate(state, m)? + sigma.norm() + state.beta(),
        s2_component: Some(s2),
        xi: Some(xi),
        extended_null_space: null_dim > 1,
    })
}

fn pick(pairs: &[HarmonicPair], index: usize) -> Result<&HarmonicPair> {
    pairs.get(index).ok_or_else(|| Error::IndexOutOfRange {
        index,
        valid: format!("0..{}", pairs.len()),
    })
}
