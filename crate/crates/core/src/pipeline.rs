//! Instrumented GMRES: every step is followed by the harmonic pairs and the
//! full set of diagnostics.

use std::collections::BTreeSet;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::diagnostics::{
    coincidence_check, persistence_check, residual_difference_identity,
    stagnation_coincidence_check, stagnation_report, CoincidenceResult, PersistenceVerdict,
    StagnationReport, Thresholds,
};
use crate::error::{Error, Result};
use crate::gmres::{GmresState, IterationRecord};
use crate::harmonic::{harmonic_pairs_with, harmonic_pencil, HarmonicPair};
use crate::numeric::{norm, Complex64};
use crate::operator::LinearOperator;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    /// `||r_m|| <= conv_tol * beta`.
    Converged,
    /// `max_iter` reached first.
    Exhausted,
    /// Invariant Krylov space reached without convergence (singular
    /// restriction of `A`).
    Breakdown,
}

/// A coincidence test that could not be evaluated.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoincidenceFailure {
    pub pair_index: usize,
    pub reason: String,
}

#[derive(Clone, Debug)]
pub struct StepAnalysis {
    pub record: IterationRecord,
    pub pairs: Vec<HarmonicPair>,
    pub report: StagnationReport,
    /// `None` when `A V_m` has dependent columns.
    pub residual_difference_error: Option<f64>,
    /// `None` for `m = 1`.
    pub nested_ls_error: Option<f64>,
    /// Max over pairs of `||beta L u - alpha R u|| / (||L||_F + ||R||_F)`.
    pub pencil_residual: f64,
    pub coincidence: Vec<CoincidenceResult>,
    pub coincidence_failures: Vec<CoincidenceFailure>,
    /// `None` for `m = 1`.
    pub persistence: Option<PersistenceVerdict>,
}

#[derive(Clone, Debug)]
pub struct Analysis {
    pub state: GmresState,
    pub steps: Vec<StepAnalysis>,
    pub status: RunStatus,
    pub thresholds: Thresholds,
}

impl Analysis {
    pub fn stagnated_steps(&self) -> BTreeSet<usize> {
        self.steps
            .iter()
            .filter(|s| s.report.stagnated)
            .map(|s| s.record.m)
            .collect()
    }

    pub fn step(&self, m: usize) -> Option<&StepAnalysis> {
        m.checked_sub(1).and_then(|i| self.steps.get(i))
    }
}

/// Runs up to `max_iter` GMRES steps and evaluates every diagnostic.
pub fn analyze(
    op: Arc<dyn LinearOperator>,
    rhs: &[Complex64],
    max_iter: usize,
    conv_tol: f64,
    thresholds: &Thresholds,
) -> Result<Analysis> {
    if max_iter == 0 {
        return Err(Error::InvalidSize("max_iter must be at least 1".into()));
    }
    let mut state = GmresState::new(op, rhs)?;
    let beta = state.beta();
    let mut steps: Vec<StepAnalysis> = Vec::new();
    let mut status = RunStatus::Exhausted;
    while steps.len() < max_iter && !state.is_terminal() {
        let mut record = state.advance()?;
        let m = record.m;
        record.residual_vector = Some(state.materialize_residual(m)?);
        let pairs = harmonic_pairs_with(state.arnoldi(), m, thresholds.eps_z)?;
        let report = stagnation_report(&state, &pairs, m, thresholds)?;
        let residual_difference_error = match residual_difference_identity(&state, m, thresholds) {
            Ok(e) => Some(e),
            Err(Error::PreconditionViolated(_)) => None,
            Err(e) => return Err(e),
        };
        let nested_ls_error = if m >= 2 {
            Some(state.nested_ls_consistency(m)?)
        } else {
            None
        };
        let pencil_residual = pencil_residual(&state, m, &pairs)?;
        let (coincidence, coincidence_failures) = coincidences(&state, &pairs, &report, thresholds);
        let persistence = match steps.last() {
            Some(prev) => Some(persistence_check(&pairs, &prev.pairs, report.stagnated, thresholds)?),
            None => None,
        };
        let done = record.resnorm <= conv_tol * beta;
        steps.push(StepAnalysis {
            record,
            pairs,
            report,
            residual_difference_error,
            nested_ls_error,
            pencil_residual,
            coincidence,
            coincidence_failures,
            persistence,
        });
        if done {
            status = RunStatus::Converged;
            break;
        }
    }
    if status != RunStatus::Converged && state.is_terminal() {
        status = RunStatus::Breakdown;
    }
    Ok(Analysis {
        state,
        steps,
        status,
        thresholds: *thresholds,
    })
}

fn pencil_residual(state: &GmresState, m: usize, pairs: &[HarmonicPair]) -> Result<f64> {
    let (l, r) = harmonic_pencil(state.arnoldi(), m)?;
    let scale = l.frobenius_norm() + r.frobenius_norm();
    let mut worst = 0.0_f64;
    for p in pairs {
        let lu = l.matvec(p.u());
        let ru = r.matvec(p.u());
        let d: Vec<Complex64> = lu
            .iter()
            .zip(&ru)
            .map(|(a, b)| p.pair.beta * a - p.pair.alpha * b)
            .collect();
        // homogeneous pair normalized so that |alpha| + |beta| measures 1
        let w = p.pair.alpha.norm() + p.pair.beta.norm();
        worst = worst.max(norm(&d) / (w * scale));
    }
    Ok(worst)
}

// Stagnated steps use the xi-corrected identity; others the scaled one.
fn coincidences(
    state: &GmresState,
    pairs: &[HarmonicPair],
    report: &StagnationReport,
    thresholds: &Thresholds,
) -> (Vec<CoincidenceResult>, Vec<CoincidenceFailure>) {
    let mut ok = Vec::new();
    let mut failed = Vec::new();
    for (i, p) in pairs.iter().enumerate() {
        if p.is_infinite() {
            continue;
        }
        let res = if report.stagnated {
            stagnation_coincidence_check(state, pairs, i, report, thresholds)
        } else {
            coincidence_check(state, pairs, i, report, thresholds)
        };
        match res {
            Ok(c) => ok.push(c),
            Err(e) => failed.push(CoincidenceFailure {
                pair_index: i,
                reason: e.to_string(),
            }),
        }
    }
    (ok, failed)
}
