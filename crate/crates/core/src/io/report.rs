//! Run configuration and the per-iteration report written by `solve`.
//!
//! Every floating-point field is rounded to 15 significant digits when the
//! report is built, so the JSON and CSV encodings print the same digits and
//! parsing a written report gives back an equal value.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::diagnostics::{CoincidenceResult, PersistenceVerdict, Thresholds, STAGNATION_COINCIDENCE_TOL};
use crate::error::{Error, Result};
use crate::numeric::Complex64;
use crate::pipeline::{Analysis, RunStatus, StepAnalysis};

pub const SCHEMA: &str = "staglab-report/1";

/// Default relative convergence tolerance.
pub const DEFAULT_CONV_TOL: f64 = 1e-10;

/// Rounds to 15 significant digits.
pub fn quantize(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.14e}").parse().unwrap_or(x)
}

fn qopt(x: Option<f64>) -> Option<f64> {
    x.filter(|v| v.is_finite()).map(quantize)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cplx {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for Cplx {
    fn from(z: Complex64) -> Self {
        Self {
            re: quantize(z.re),
            im: quantize(z.im),
        }
    }
}

fn cvec(v: &[Complex64]) -> Vec<Cplx> {
    v.iter().map(|&z| z.into()).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    /// Generator spec, instance directory or `.mtx` path.
    pub matrix_source: String,
    /// `e1`, `random:<seed>` or a path. `None` uses the instance's own.
    pub rhs_source: Option<String>,
    pub max_iter: usize,
    /// Relative to `beta`.
    pub conv_tol: f64,
    pub report_path: Option<PathBuf>,
    pub emit_harmonic: bool,
    pub emit_vectors: bool,
    pub thresholds: Thresholds,
}

impl RunConfig {
    pub fn new(matrix_source: impl Into<String>, max_iter: usize) -> Self {
        Self {
            matrix_source: matrix_source.into(),
            rhs_source: None,
            max_iter,
            conv_tol: DEFAULT_CONV_TOL,
            report_path: None,
            emit_harmonic: true,
            emit_vectors: false,
            thresholds: Thresholds::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_iter == 0 {
            return Err(Error::InvalidConfig("max_iter must be at least 1".into()));
        }
        if !(self.conv_tol > 0.0 && self.conv_tol.is_finite()) {
            return Err(Error::InvalidConfig(format!("conv_tol must be positive, got {}", self.conv_tol)));
        }
        let t = &self.thresholds;
        for (name, v) in [("eps_z", t.eps_z), ("eps_s", t.eps_s), ("eps_eig", t.eps_eig)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidConfig(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HarmonicSummary {
    /// `None` for an infinite pair.
    pub sigma_re: Option<f64>,
    pub sigma_im: Option<f64>,
    pub is_infinite: bool,
    pub abs_u_last: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u: Option<Vec<Cplx>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoincidenceSummary {
    pub pair_index: usize,
    pub k_scale: Cplx,
    pub condition_error: f64,
    pub vector_error: f64,
    pub vector_scale: f64,
    /// Present on stagnated steps.
    pub xi: Option<Cplx>,
    /// Stagnated steps: `vector_error <= 1e-7 * vector_scale`. Otherwise
    /// both sides of the biconditional agree at `1e-8`.
    pub holds: bool,
}

impl CoincidenceSummary {
    fn new(c: &CoincidenceResult, stagnated: bool) -> Self {
        let holds = if stagnated {
            c.vector_error <= STAGNATION_COINCIDENCE_TOL * c.vector_scale
        } else {
            c.biconditional_holds()
        };
        Self {
            pair_index: c.pair_index,
            k_scale: c.k_scale.into(),
            condition_error: quantize(c.condition_error),
            vector_error: quantize(c.vector_error),
            vector_scale: quantize(c.vector_scale),
            xi: c.xi.map(Cplx::from),
            holds,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PersistenceSummary {
    pub vacuous: bool,
    pub all_matched: bool,
    /// `None` when some pair has no partner.
    pub max_sigma_error: Option<f64>,
    pub max_angle: f64,
    pub converse_predicts_stagnation: bool,
}

impl From<&PersistenceVerdict> for PersistenceSummary {
    fn from(p: &PersistenceVerdict) -> Self {
        Self {
            vacuous: p.vacuous,
            all_matched: p.all_matched,
            max_sigma_error: qopt(Some(p.max_sigma_error)),
            max_angle: quantize(p.max_angle),
            converse_predicts_stagnation: p.converse_predicts_stagnation,
        }
    }
}

/// One GMRES step. The indicator booleans follow from the scalar fields:
/// `|k| <= eps_z scale_k`, `|em_y| <= eps_z y_scale`,
/// `sigma_min_h <= eps_z h_scale`, `max_abs_em_u <= eps_z`, and
/// `stagnated` is `|gap| <= eps_s beta^2`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationSummary {
    pub m: usize,
    pub resnorm: f64,
    pub gap: f64,
    pub k: Cplx,
    pub em_y: Cplx,
    pub sigma_min_h: f64,
    pub scale_k: f64,
    pub y_scale: f64,
    pub h_scale: f64,
    /// Largest `|e_m^* u|` over finite pairs (0 when there are none).
    pub max_abs_em_u: f64,
    pub finite_pairs: usize,
    pub infinite_pairs: usize,
    pub gap_identity_error: Option<f64>,
    pub k_em_y_imag: f64,
    pub stagnated: bool,
    pub predicates_consistent: bool,
    pub applicable: bool,
    #[serde(default)]
    pub harmonic: Vec<HarmonicSummary>,
    pub coincidence: Vec<CoincidenceSummary>,
    pub persistence: Option<PersistenceSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residual: Option<Vec<Cplx>>,
}

impl IterationSummary {
    fn new(s: &StepAnalysis, emit_harmonic: bool, emit_vectors: bool) -> Self {
        let r = &s.report;
        let harmonic = if emit_harmonic {
            s.pairs
                .iter()
                .map(|p| HarmonicSummary {
                    sigma_re: p.sigma().map(|z| quantize(z.re)),
                    sigma_im: p.sigma().map(|z| quantize(z.im)),
                    is_infinite: p.is_infinite(),
                    abs_u_last: quantize(p.u_last.norm()),
                    u: emit_vectors.then(|| cvec(p.u())),
                })
                .collect()
        } else {
            Vec::new()
        };
        Self {
            m: s.record.m,
            resnorm: quantize(s.record.resnorm),
            gap: quantize(r.gap),
            k: r.k.into(),
            em_y: r.em_y.into(),
            sigma_min_h: quantize(r.sigma_min_h),
            scale_k: quantize(r.scale_k),
            y_scale: quantize(r.y_scale),
            h_scale: quantize(r.h_scale),
            max_abs_em_u: quantize(r.finite_pairs_em_u.iter().map(|z| z.norm()).fold(0.0, f64::max)),
            finite_pairs: r.finite_pairs_em_u.len(),
            infinite_pairs: r.infinite_pairs,
            gap_identity_error: qopt(r.gap_identity_error),
            k_em_y_imag: quantize(r.k_em_y_imag),
            stagnated: r.stagnated,
            predicates_consistent: r.predicates_consistent,
            applicable: r.applicable,
            harmonic,
            coincidence: s.coincidence.iter().map(|c| CoincidenceSummary::new(c, r.stagnated)).collect(),
            persistence: s.persistence.as_ref().map(PersistenceSummary::from),
            residual: if emit_vectors {
                s.record.residual_vector.as_deref().map(cvec)
            } else {
                None
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema: String,
    pub config: RunConfig,
    pub n: usize,
    pub beta: f64,
    pub status: RunStatus,
    pub iterations: Vec<IterationSummary>,
}

impl RunReport {
    pub fn new(config: &RunConfig, analysis: &Analysis) -> Self {
        Self {
            schema: SCHEMA.to_string(),
            config: config.clone(),
            n: analysis.state.arnoldi().dim(),
            beta: quantize(analysis.state.beta()),
            status: analysis.status,
            iterations: analysis
                .steps
                .iter()
                .map(|s| IterationSummary::new(s, config.emit_harmonic, config.emit_vectors))
                .collect(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Io(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let r: Self = serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            msg: e.to_string(),
        })?;
        if r.schema != SCHEMA {
            return Err(Error::Parse {
                line: 0,
                msg: format!("unsupported schema '{}', expected '{SCHEMA}'", r.schema),
            });
        }
        Ok(r)
    }

    /// One row per iteration under [`CSV_HEADER`].
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::Io(e.to_string());
        w.write_record(CSV_HEADER).map_err(io)?;
        for it in &self.iterations {
            let row = [
                it.m.to_string(),
                num(it.resnorm),
                num(it.gap),
                num(it.k.re),
                num(it.k.im),
                num(it.em_y.re),
                num(it.em_y.im),
                num(it.sigma_min_h),
                num(it.scale_k),
                num(it.y_scale),
                num(it.h_scale),
                num(it.max_abs_em_u),
                it.finite_pairs.to_string(),
                it.infinite_pairs.to_string(),
                it.stagnated.to_string(),
                it.predicates_consistent.to_string(),
                sigma_list(&it.harmonic),
            ];
            w.write_record(&row).map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
    }
}

/// Column order of the CSV report. `sigmas` lists the harmonic Ritz values
/// as `re im` separated by `;`, with `inf` for an infinite pair.
pub const CSV_HEADER: [&str; 17] = [
    "m",
    "resnorm",
    "gap",
    "k_re",
    "k_im",
    "em_y_re",
    "em_y_im",
    "sigma_min_h",
    "scale_k",
    "y_scale",
    "h_scale",
    "max_abs_em_u",
    "finite_pairs",
    "infinite_pairs",
    "stagnated",
    "predicates_consistent",
    "sigmas",
];

// Same digits as the JSON encoding.
fn num(x: f64) -> String {
    serde_json::to_string(&x).unwrap_or_else(|_| x.to_string())
}

fn sigma_list(h: &[HarmonicSummary]) -> String {
    h.iter()
        .map(|p| match (p.sigma_re, p.sigma_im) {
            (Some(re), Some(im)) => format!("{} {}", num(re), num(im)),
            _ => "inf".to_string(),
        })
        .collect::<Vec<_>>()
        .join(";")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Json,
    Csv,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(Self::Json),
            "csv" => Ok(Self::Csv),
            other => Err(Error::InvalidConfig(format!("unknown report format '{other}'"))),
        }
    }
}

impl fmt::Display for ReportFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Json => "json",
            Self::Csv => "csv",
        })
    }
}

pub fn write_report(report: &RunReport, path: impl AsRef<Path>, format: ReportFormat) -> Result<()> {
    let path = path.as_ref();
    let text = match format {
        ReportFormat::Json => report.to_json()?,
        ReportFormat::Csv => report.to_csv()?,
    };
    fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

pub fn read_report(path: impl AsRef<Path>) -> Result<RunReport> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    RunReport::from_json(&text)
}
