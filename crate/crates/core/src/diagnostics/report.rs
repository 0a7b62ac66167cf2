use serde::{Deserialize, Serialize};

use super::identities::{gap_identity, gap_identity_unchecked};
use super::{operator_norm_estimate, Thresholds};
use crate::error::{Error, Result};
use crate::gmres::GmresState;
use crate::harmonic::HarmonicPair;
use crate::numeric::{norm, smallest_singular_triplet, Complex64};

/// `||r_{m-1}||` below this multiple of `beta` makes the step inapplicable.
pub const CONVERGED_TOL: f64 = 1e-12;

/// The stagnation indicators of one step, with the scales they are
/// compared against, so every boolean can be recomputed from the fields.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StagnationReport {
    pub m: usize,
    pub beta: f64,
    pub k: Complex64,
    /// `||A||_F estimate * ||r_{m-1}||`.
    pub scale_k: f64,
    pub em_y: Complex64,
    /// `max(||y||, beta / ||H~_m||_F)`; the floor keeps the test meaningful
    /// when `y` itself vanishes (stagnation from the first step).
    pub y_scale: f64,
    pub sigma_min_h: f64,
    /// `||H~_m||_F`, which stays away from zero when `H_m` vanishes.
    pub h_scale: f64,
    /// `||r_{m-1}||^2 - ||r_m||^2`.
    pub gap: f64,
    /// `None` when `A V_m` has dependent columns.
    pub gap_identity_error: Option<f64>,
    /// `Im(K e_m^* y)`.
    pub k_em_y_imag: f64,
    pub finite_pairs_em_u: Vec<Complex64>,
    pub infinite_pairs: usize,
    pub stagnated: bool,
    pub predicates_consistent: bool,
    /// False when `r_{m-1}` is already (numerically) zero.
    pub applicable: bool,
    pub thresholds: Thresholds,
}

impl StagnationReport {
    /// `[|K| small, |e_m^* y| small, H_m singular, max |e_m^* u| small]`.
    pub fn indicators(&self) -> [bool; 4] {
        let eps = self.thresholds.eps_z;
        let max_u = self.finite_pairs_em_u.iter().map(|z| z.norm()).fold(0.0, f64::max);
        [
            self.k.norm() <= eps * self.scale_k,
            self.em_y.norm() <= eps * self.y_scale,
            self.sigma_min_h <= eps * self.h_scale,
            max_u <= eps,
        ]
    }
}

/// Evaluates all stagnation predicates at step `m`. `pairs` must be the
/// harmonic pairs of the same step.
pub fn stagnation_report(
    state: &GmresState,
    pairs: &[HarmonicPair],
    m: usize,
    thresholds: &Thresholds,
) -> Result<StagnationReport> {
    if m == 0 || m > state.steps() {
        return Err(Error::IndexOutOfRange {
            index: m,
            valid: format!("1..={}", state.steps()),
        });
    }
    if pairs.len() != m {
        return Err(Error::DimensionMismatch(format!(
            "{} harmonic pairs supplied for step {m}",
            pairs.len()
        )));
    }
    let beta = state.beta();
    let gi = gap_identity_unchecked(state, m)?;
    let gap_identity_error = match gap_identity(state, m, thresholds) {
        Ok(g) => Some(g.error),
        Err(Error::PreconditionViolated(_)) => None,
        Err(e) => return Err(e),
    };
    let r_prev = norm(&state.materialize_residual(m - 1)?);
    let h = state.arnoldi().hessenberg(m)?;
    let triplet = smallest_singular_triplet(&h)?;
    let y = state.y(m)?;
    let h_scale = state.arnoldi().hessenberg_ext(m)?.frobenius_norm();

    let mut report = StagnationReport {
        m,
        beta,
        k: gi.k,
        scale_k: operator_norm_estimate(state, m)? * r_prev,
        em_y: gi.em_y,
        y_scale: norm(y).max(beta / h_scale),
        sigma_min_h: triplet.sigma_min,
        h_scale,
        gap: gi.gap,
        gap_identity_error,
        k_em_y_imag: gi.imag_part,
        finite_pairs_em_u: pairs.iter().filter(|p| !p.is_infinite()).map(|p| p.u_last).collect(),
        infinite_pairs: pairs.iter().filter(|p| p.is_infinite()).count(),
        stagnated: gi.gap.abs() <= thresholds.eps_s * beta * beta,
        predicates_consistent: true,
        applicable: r_prev >= CONVERGED_TOL * beta,
        thresholds: *thresholds,
    };
    let ind = report.indicators();
    report.predicates_consistent = ind.iter().all(|&b| b) || ind.iter().all(|&b| !b);
    Ok(report)
}
