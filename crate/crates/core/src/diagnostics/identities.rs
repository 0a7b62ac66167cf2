use super::{operator_norm_estimate, Thresholds};
use crate::error::{Error, Result};
use crate::gmres::GmresState;
use crate::numeric::{
    back_substitute, dot, forward_substitute_adjoint, norm, singular_values, sub, unit, Complex64,
    ComplexMatrix, HouseholderQr,
};

/// Contract for `|gap - K conj(e_m^* y)|`, relative to `beta^2`.
pub const GAP_IDENTITY_TOL: f64 = 1e-8;
/// Contract for the residual-difference identity, relative to `beta`.
pub const RESIDUAL_DIFFERENCE_TOL: f64 = 1e-8;

/// `K = <A v_m, r_{m-1}> = v_m^* A^* r_{m-1}`.
pub fn compute_k(state: &GmresState, m: usize) -> Result<Complex64> {
    check_step(state, m)?;
    let v = state.arnoldi().basis_vector(m - 1).expect("basis vector stored");
    let av = state.arnoldi().operator().apply(v);
    let r_prev = state.materialize_residual(m - 1)?;
    Ok(dot(&av, &r_prev))
}

/// Both sides of the residual-gap identity.
///
/// Over complex scalars the identity reads
/// `||r_{m-1}||^2 - ||r_m||^2 = K conj(e_m^* y)`, which is real; the
/// unconjugated product `K e_m^* y` agrees only for real data, so its
/// defect is kept alongside.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GapIdentity {
    pub k: Complex64,
    pub em_y: Complex64,
    pub gap: f64,
    /// `|gap - K conj(e_m^* y)|`.
    pub error: f64,
    /// `|gap - K e_m^* y|`.
    pub unconjugated_error: f64,
    /// `Im(K e_m^* y)`.
    pub imag_part: f64,
}

pub fn gap_identity(state: &GmresState, m: usize, thresholds: &Thresholds) -> Result<GapIdentity> {
    independent_image(state, m, thresholds)?;
    gap_identity_unchecked(state, m)
}

pub(crate) fn gap_identity_unchecked(state: &GmresState, m: usize) -> Result<GapIdentity> {
    let k = compute_k(state, m)?;
    let em_y = state.y(m)?[m - 1];
    let r_prev = norm(&state.materialize_residual(m - 1)?);
    let r_cur = norm(&state.materialize_residual(m)?);
    let gap = r_prev * r_prev - r_cur * r_cur;
    let literal = k * em_y;
    Ok(GapIdentity {
        k,
        em_y,
        gap,
        error: (k * em_y.conj() - gap).norm(),
        unconjugated_error: (literal - gap).norm(),
        imag_part: literal.im,
    })
}

/// `|(||r_{m-1}||^2 - ||r_m||^2) - K conj(e_m^* y)|`.
///
/// Fails with `PreconditionViolated` when the columns of `A V_m` are
/// numerically dependent.
pub fn gap_identity_check(state: &GmresState, m: usize, thresholds: &Thresholds) -> Result<f64> {
    Ok(gap_identity(state, m, thresholds)?.error)
}

/// `||(r_{m-1} - r_m) - K A V_m (V_m^* A^* A V_m)^{-1} e_m||`, with the
/// inverse applied through the QR factor of `A V_m`.
pub fn residual_difference_identity(
    state: &GmresState,
    m: usize,
    thresholds: &Thresholds,
) -> Result<f64> {
    let av = independent_image(state, m, thresholds)?;
    let k = compute_k(state, m)?;
    let r = HouseholderQr::new(&av)?.r();
    let z = forward_substitute_adjoint(&r, &unit(m, m - 1))?;
    let x = back_substitute(&r, &z)?;
    let predicted = av.matvec(&x);
    let lhs = sub(&state.materialize_residual(m - 1)?, &state.materialize_residual(m)?);
    let diff: Vec<Complex64> = lhs.iter().zip(&predicted).map(|(l, p)| l - k * p).collect();
    Ok(norm(&diff))
}

// A V_m, after checking sigma_min(A V_m) > eps_z ||A||_F.
fn independent_image(state: &GmresState, m: usize, thresholds: &Thresholds) -> Result<ComplexMatrix> {
    check_step(state, m)?;
    let av = state.explicit_av(m)?;
    let smin = *singular_values(&av).last().expect("m >= 1");
    let anorm = operator_norm_estimate(state, m)?;
    if smin <= thresholds.eps_z * anorm {
        return Err(Error::PreconditionViolated(format!(
            "columns of A V_{m} are dependent (sigma_min = {smin:e})"
        )));
    }
    Ok(av)
}

fn check_step(state: &GmresState, m: usize) -> Result<()> {
    if m == 0 || m > state.steps() {
        return Err(Error::IndexOutOfRange {
            index: m,
            valid: format!("1..={}", state.steps()),
        });
    }
    Ok(())
}
