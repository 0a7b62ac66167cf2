use serde::{Deserialize, Serialize};

use super::{min_cost_assignment, Thresholds};
use crate::error::{Error, Result};
use crate::harmonic::HarmonicPair;
use crate::numeric::sin_angle;

/// `|sigma - sigma'| <= SIGMA_TOL * (1 + |sigma|)`.
pub const SIGMA_TOL: f64 = 1e-7;
/// Sine of the angle between `u_{1:m-1}` and `u'`.
pub const ANGLE_TOL: f64 = 1e-6;

// cost of leaving a step-m pair without a partner
const UNMATCHED_COST: f64 = 10.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairMatch {
    /// Index into the step-`m` pairs.
    pub index: usize,
    /// Index into the step-`(m-1)` pairs, if any partner was available.
    pub partner: Option<usize>,
    /// `|sigma - sigma'| / (1 + |sigma|)`.
    pub sigma_error: f64,
    pub angle: f64,
    pub within_tolerance: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PersistenceVerdict {
    pub stagnated: bool,
    /// No finite nonzero pair at step `m`.
    pub vacuous: bool,
    pub matches: Vec<PairMatch>,
    pub max_sigma_error: f64,
    pub max_angle: f64,
    pub all_matched: bool,
    /// Every candidate has `|e_m^* u| <= eps_z` and a partner within tolerance.
    pub converse_predicts_stagnation: bool,
}

impl PersistenceVerdict {
    /// Forward direction: a stagnated step keeps every pair.
    pub fn holds(&self) -> bool {
        !self.stagnated || self.all_matched
    }

    /// The converse prediction agrees with the stagnation verdict.
    pub fn consistent(&self) -> bool {
        self.converse_predicts_stagnation == self.stagnated
    }
}

/// Matches every finite nonzero pair `(sigma, u)` at step `m` to a pair
/// `(sigma', u')` at step `m-1`, comparing `u'` with the prefix `u_{1:m-1}`.
pub fn persistence_check(
    pairs_m: &[HarmonicPair],
    pairs_prev: &[HarmonicPair],
    stagnated: bool,
    thresholds: &Thresholds,
) -> Result<PersistenceVerdict> {
    let m = pairs_m.len();
    if m == 0 || pairs_prev.len() + 1 != m {
        return Err(Error::DimensionMismatch(format!(
            "pairs at consecutive steps expected, got {} and {}",
            m,
            pairs_prev.len()
        )));
    }
    let candidates: Vec<usize> = (0..m)
        .filter(|&i| pairs_m[i].sigma().is_some_and(|s| s.norm() > 0.0))
        .collect();
    let targets: Vec<usize> = (0..m - 1).filter(|&j| !pairs_prev[j].is_infinite()).collect();

    let cols = targets.len().max(candidates.len());
    let mut parts = Vec::with_capacity(candidates.len());
    let cost: Vec<Vec<f64>> = candidates
        .iter()
        .map(|&i| {
            let p = &pairs_m[i];
            let sigma = p.sigma().expect("finite candidate");
            let prefix = &p.u()[..m - 1];
            let row: Vec<(f64, f64)> = targets
                .iter()
                .map(|&j| {
                    let q = &pairs_prev[j];
                    let se = (sigma - q.sigma().expect("finite target")).norm() / (1.0 + sigma.norm());
                    (se, sin_angle(prefix, q.u()))
                })
                .collect();
            let c = (0..cols)
                .map(|k| row.get(k).map_or(UNMATCHED_COST, |(s, a)| s + a))
                .collect();
            parts.push(row);
            c
        })
        .collect();
    let assign = min_cost_assignment(&cost);

    let matches: Vec<PairMatch> = candidates
        .iter()
        .zip(&assign)
        .zip(&parts)
        .map(|((&i, &k), row)| match row.get(k) {
            Some(&(sigma_error, angle)) => PairMatch {
                index: i,
                partner: Some(targets[k]),
                sigma_error,
                angle,
                within_tolerance: sigma_error <= SIGMA_TOL && angle <= ANGLE_TOL,
            },
            None => PairMatch {
                index: i,
                partner: None,
                sigma_error: f64::INFINITY,
                angle: 1.0,
                within_tolerance: false,
            },
        })
        .collect();

    let all_matched = matches.iter().all(|x| x.within_tolerance);
    let em_u_small = candidates.iter().all(|&i| pairs_m[i].u_last.norm() <= thresholds.eps_z);
    Ok(PersistenceVerdict {
        stagnated,
        vacuous: candidates.is_empty(),
        max_sigma_error: matches.iter().map(|x| x.sigma_error).fold(0.0, f64::max),
        max_angle: matches.iter().map(|x| x.angle).fold(0.0, f64::max),
        all_matched,
        converse_predicts_stagnation: all_matched && em_u_small,
        matches,
    })
}
