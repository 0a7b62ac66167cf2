//! Invariant checks over an [`Analysis`]; the engine behind `verify`.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diagnostics::{
    Thresholds, GAP_IDENTITY_TOL, RESIDUAL_DIFFERENCE_TOL, STAGNATION_COINCIDENCE_TOL,
};
use crate::error::Result;
use crate::instances::{random_instance, ExpectedStagnation, ProblemInstance};
use crate::numeric::{dot, norm, unit, Complex64, ComplexMatrix};
use crate::pipeline::{analyze, Analysis};

/// Slack for the monotonicity of the recorded residual norms, relative to
/// `beta`.
const MONOTONE_SLACK: f64 = 1e-14;
const RESNORM_AGREEMENT_TOL: f64 = 1e-9;
const NORMAL_EQUATION_TOL: f64 = 1e-9;
const ORTHOGONALITY_TOL: f64 = 1e-10;
const HARMONIC_ORTHOGONALITY_TOL: f64 = 1e-8;
const NESTED_LS_REL_TOL: f64 = 1e-8;
const NESTED_LS_ABS_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub m: Option<usize>,
    pub check: String,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.m {
            Some(m) => write!(f, "step {m}: {}: {}", self.check, self.detail),
            None => write!(f, "{}: {}", self.check, self.detail),
        }
    }
}

struct Collector(Vec<Violation>);

impl Collector {
    fn check(&mut self, ok: bool, m: Option<usize>, check: &str, detail: impl FnOnce() -> String) {
        if !ok {
            self.0.push(Violation {
                m,
                check: check.to_string(),
                detail: detail(),
            });
        }
    }
}

/// Every invariant of the run, plus agreement with the expected stagnation
/// steps.
pub fn check_analysis(analysis: &Analysis, expected: &ExpectedStagnation) -> Result<Vec<Violation>> {
    let t = &analysis.thresholds;
    let state = &analysis.state;
    let decomp = state.arnoldi();
    let beta = state.beta();
    let mut c = Collector(Vec::new());

    let hist = state.resnorm_history();
    for w in hist.windows(2).enumerate() {
        let (i, w) = w;
        c.check(w[1] <= w[0] + MONOTONE_SLACK * beta, Some(i + 1), "monotone residuals", || {
            format!("{:e} > {:e}", w[1], w[0])
        });
    }

    let r0 = decomp.rhs().to_vec();
    for s in &analysis.steps {
        let m = s.record.m;
        let at = Some(m);
        let r = s.record.residual_vector.as_ref().expect("materialized by the pipeline");
        let rn = norm(r);
        c.check(
            (rn - s.record.resnorm).abs() <= RESNORM_AGREEMENT_TOL * beta,
            at,
            "resnorm agreement",
            || format!("explicit {rn:e}, recurrence {:e}", s.record.resnorm),
        );
        let rr0 = dot(r, &r0);
        c.check(
            (rr0 - Complex64::new(rn * rn, 0.0)).norm() <= RESNORM_AGREEMENT_TOL * beta * beta,
            at,
            "r_m^* r_0 = ||r_m||^2",
            || format!("{rr0} vs {:e}", rn * rn),
        );

        let ht = decomp.hessenberg_ext(m)?;
        let lhs = ht.adjoint().matvec(&ht.matvec(&s.record.y));
        let rhs = ht.leading(m, m).adjoint().matvec(&unit(m, 0));
        let ne: Vec<Complex64> = lhs.iter().zip(&rhs).map(|(l, h)| l - beta * h).collect();
        c.check(
            norm(&ne) <= NORMAL_EQUATION_TOL * beta * ht.frobenius_norm(),
            at,
            "normal equations",
            || format!("{:e}", norm(&ne)),
        );

        if let Some(e) = s.report.gap_identity_error {
            c.check(e <= GAP_IDENTITY_TOL * beta * beta, at, "gap identity", || format!("{e:e}"));
        }
        if let Some(e) = s.residual_difference_error {
            c.check(e <= RESIDUAL_DIFFERENCE_TOL * beta, at, "residual difference identity", || {
                format!("{e:e}")
            });
        }
        if let Some(e) = s.nested_ls_error {
            let ny = norm(state.y(m - 1)?);
            c.check(
                e <= NESTED_LS_REL_TOL * ny + NESTED_LS_ABS_TOL,
                at,
                "nested least squares",
                || format!("{e:e} with ||y_(m-1)|| = {ny:e}"),
            );
        }
        c.check(s.pencil_residual <= t.eps_eig, at, "pencil residual", || {
            format!("{:e}", s.pencil_residual)
        });
        c.check(
            s.pairs.len() == s.pairs.iter().filter(|p| p.is_infinite()).count() + s.report.finite_pairs_em_u.len(),
            at,
            "pair count",
            || "finite + infinite != m".into(),
        );
        if s.report.applicable {
            c.check(s.report.predicates_consistent, at, "four-way equivalence", || {
                format!("indicators {:?}", s.report.indicators())
            });
        }

        let av = state.explicit_av(m)?;
        let anorm = decomp.operator().frobenius_norm().unwrap_or_else(|| ht.frobenius_norm());
        for p in &s.pairs {
            if let Some(h) = &p.harmonic_residual {
                let worst = (0..m).map(|j| dot(av.col(j), h).norm()).fold(0.0, f64::max);
                c.check(
                    worst <= HARMONIC_ORTHOGONALITY_TOL * anorm,
                    at,
                    "harmonic residual orthogonality",
                    || format!("{worst:e}"),
                );
            }
        }

        for co in &s.coincidence {
            if s.report.stagnated {
                c.check(
                    co.vector_error <= STAGNATION_COINCIDENCE_TOL * co.vector_scale,
                    at,
                    "stagnation coincidence",
                    || format!("pair {}: {:e}", co.pair_index, co.vector_error),
                );
            } else {
                c.check(co.biconditional_holds(), at, "coincidence biconditional", || {
                    format!(
                        "pair {}: condition {:e}, vector {:e}",
                        co.pair_index, co.condition_error, co.vector_error
                    )
                });
            }
        }
        for f in &s.coincidence_failures {
            c.check(false, at, "coincidence", || format!("pair {}: {}", f.pair_index, f.reason));
        }
        if let Some(p) = &s.persistence {
            c.check(p.holds(), at, "persistence", || {
                format!("max sigma error {:e}, max angle {:e}", p.max_sigma_error, p.max_angle)
            });
            c.check(p.consistent(), at, "persistence converse", || {
                format!("predicts {} but stagnated = {}", p.converse_predicts_stagnation, p.stagnated)
            });
        }
    }

    let k = state.steps();
    let v = decomp.basis_matrix(decomp.steps() + usize::from(!decomp.breakdown()));
    let vv = v.adjoint().matmul(&v);
    let orth = vv.sub(&ComplexMatrix::identity(vv.rows())).frobenius_norm();
    c.check(orth <= ORTHOGONALITY_TOL, None, "basis orthonormality", || format!("{orth:e}"));
    if k > 0 {
        let av = state.explicit_av(k)?;
        let vk1 = decomp.basis_matrix(k + 1);
        let fact = av.sub(&vk1.matmul(&decomp.hessenberg_ext(k)?)).frobenius_norm();
        let anorm = decomp.operator().frobenius_norm().unwrap_or(1.0);
        c.check(fact <= ORTHOGONALITY_TOL * anorm, None, "Arnoldi relation", || format!("{fact:e}"));
    }

    let observed = analysis.stagnated_steps();
    c.check(expected.admits(&observed), None, "expected stagnation steps", || {
        format!("expected {expected:?}, observed {observed:?}")
    });
    Ok(c.0)
}

/// Runs the pipeline to termination on one instance and checks it.
pub fn verify_instance(instance: &ProblemInstance, thresholds: &Thresholds) -> Result<Vec<Violation>> {
    let analysis = analyze(instance.operator(), &instance.rhs, instance.dim(), 0.0, thresholds)?;
    check_analysis(&analysis, &instance.expected)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepOutcome {
    pub seed: u64,
    pub violations: Vec<Violation>,
}

/// Random instances of order `n` for seeds `0..count`, checked in parallel.
pub fn seed_sweep(n: usize, count: u64, thresholds: &Thresholds) -> Result<Vec<SweepOutcome>> {
    (0..count)
        .into_par_iter()
        .map(|seed| {
            let inst = random_instance(n, seed)?;
            Ok(SweepOutcome {
                seed,
                violations: verify_instance(&inst, thresholds)?,
            })
        })
        .collect()
}
