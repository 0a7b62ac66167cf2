//! Per-iteration numerical predicates for the stagnation theory: the
//! residual-gap identity, the four-way stagnation equivalence, the
//! coincidence conditions between harmonic and GMRES residuals, and the
//! persistence of harmonic pairs across stagnated steps.
//!
//! Two different scalars are involved. `K = <A v_m, r_{m-1}>` drives the
//! residual gap; `K_scale` relates a harmonic residual to `r_m`. They are
//! kept apart throughout.

mod assignment;
mod coincidence;
mod identities;
mod persistence;
mod report;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::gmres::GmresState;

pub use assignment::min_cost_assignment;
pub use coincidence::{
    coincidence_check, coincidence_for_vector, stagnation_coincidence_check, CoincidenceResult,
    COINCIDENCE_TOL, STAGNATION_COINCIDENCE_TOL,
};
pub use identities::{
    compute_k, gap_identity, gap_identity_check, residual_difference_identity, GapIdentity,
    GAP_IDENTITY_TOL, RESIDUAL_DIFFERENCE_TOL,
};
pub use persistence::{persistence_check, PairMatch, PersistenceVerdict, ANGLE_TOL, SIGMA_TOL};
pub use report::{stagnation_report, StagnationReport, CONVERGED_TOL};

/// Declared surrogates for exact zeros.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    /// Relative zero for `K`, `e_m^* y`, `sigma_min(H_m)`, `e_m^* u` and the
    /// pencil infinity test.
    pub eps_z: f64,
    /// Stagnation: `|gap| <= eps_s * beta^2`.
    pub eps_s: f64,
    /// Pencil residual bound relative to `||A||_F + ||B||_F`.
    pub eps_eig: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            eps_z: 1e-10,
            eps_s: 1e-10,
            eps_eig: 1e-9,
        }
    }
}

/// `||A||_F` when the operator knows it, otherwise `||H~_m||_F` (equal to
/// `||A V_m||_F`, a lower bound).
pub fn operator_norm_estimate(state: &GmresState, m: usize) -> Result<f64> {
    match state.arnoldi().operator().frobenius_norm() {
        Some(f) => Ok(f),
        None => Ok(state.arnoldi().hessenberg_ext(m)?.frobenius_norm()),
    }
}
