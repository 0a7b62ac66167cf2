//! Test problems with known stagnation behaviour.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{
    axpy, c64, dot, norm, scale, singular_values, unit, Complex64, ComplexMatrix, ONE,
};
use crate::operator::LinearOperator;

const MAX_RESEEDS: usize = 100;
/// Non-planted leading blocks must have `sigma_min > SCREEN_TOL * ||H||_F`.
pub const SCREEN_TOL: f64 = 1e-6;

/// What is known about the stagnated steps of an instance.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "steps", rename_all = "snake_case")]
pub enum ExpectedStagnation {
    /// Exactly these steps stagnate.
    Exact(BTreeSet<usize>),
    /// At least these steps stagnate.
    AtLeast(BTreeSet<usize>),
    Unknown,
}

impl ExpectedStagnation {
    pub fn steps(&self) -> Option<&BTreeSet<usize>> {
        match self {
            Self::Exact(s) | Self::AtLeast(s) => Some(s),
            Self::Unknown => None,
        }
    }

    /// Whether an observed set of stagnated steps is compatible.
    pub fn admits(&self, observed: &BTreeSet<usize>) -> bool {
        match self {
            Self::Exact(s) => s == observed,
            Self::AtLeast(s) => s.is_subset(observed),
            Self::Unknown => true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub generator: String,
    pub params: BTreeMap<String, String>,
    pub seed: Option<u64>,
}

impl Provenance {
    pub fn new(generator: &str, params: &[(&str, String)], seed: Option<u64>) -> Self {
        Self {
            generator: generator.to_string(),
            params: params.iter().map(|(k, v)| (k.to_string(), v.clone())).collect(),
            seed,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProblemInstance {
    pub matrix: ComplexMatrix,
    pub rhs: Vec<Complex64>,
    pub provenance: Provenance,
    pub expected: ExpectedStagnation,
}

impl ProblemInstance {
    pub fn new(
        matrix: ComplexMatrix,
        rhs: Vec<Complex64>,
        provenance: Provenance,
        expected: ExpectedStagnation,
    ) -> Result<Self> {
        if !matrix.is_square() || matrix.rows() == 0 {
            return Err(Error::InvalidSize(format!(
                "instance matrix must be square and nonempty, got {}x{}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        if rhs.len() != matrix.rows() {
            return Err(Error::DimensionMismatch(format!(
                "rhs has length {}, matrix has order {}",
                rhs.len(),
                matrix.rows()
            )));
        }
        if norm(&rhs) == 0.0 {
            return Err(Error::ZeroRhs);
        }
        let n = matrix.rows();
        if let Some(&bad) = expected.steps().and_then(|s| s.iter().find(|&&k| k == 0 || k >= n)) {
            return Err(Error::InvalidSize(format!(
                "expected stagnation step {bad} outside 1..{n}"
            )));
        }
        Ok(Self {
            matrix,
            rhs,
            provenance,
            expected,
        })
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn operator(&self) -> Arc<dyn LinearOperator> {
        Arc::new(self.matrix.clone())
    }
}

/// `A = [[1,1,1],[1,0,1],[0,1,1]]`, `b = e_1`.
pub fn paper_example() -> ProblemInstance {
    let a = ComplexMatrix::from_real_rows(&[&[1.0, 1.0, 1.0], &[1.0, 0.0, 1.0], &[0.0, 1.0, 1.0]])
        .expect("literal matrix");
    ProblemInstance::new(
        a,
        unit(3, 0),
        Provenance::new("paper-example", &[], None),
        ExpectedStagnation::Exact(BTreeSet::new()),
    )
    .expect("valid instance")
}

/// `A e_i = e_{i+1 mod n}`, `b = e_1`: stagnates at every step below `n`.
pub fn cyclic_shift_instance(n: usize) -> Result<ProblemInstance> {
    if n < 2 {
        return Err(Error::InvalidSize(format!("cyclic shift needs n >= 2, got {n}")));
    }
    let mut a = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        a[((i + 1) % n, i)] = ONE;
    }
    ProblemInstance::new(
        a,
        unit(n, 0),
        Provenance::new("cyclic-shift", &[("n", n.to_string())], None),
        ExpectedStagnation::Exact((1..n).collect()),
    )
}

fn uniform_complex(rng: &mut ChaCha8Rng) -> Complex64 {
    c64(rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0))
}

/// Entries with independent real and imaginary parts uniform on `[-1, 1]`.
pub fn random_vector(n: usize, seed: u64) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| uniform_complex(&mut rng)).collect()
}

/// Random unreduced Hessenberg `H` whose leading `m x m` block is exactly
/// singular (up to rounding) for each `m` in `steps`, used as `A = H` with
/// `b = e_1`.
///
/// For a planted `m`, column `m` of the leading block is rewritten as
/// `[H_{m-1} s; gamma * s_last]` with `gamma = h_{m,m-1}`, so
/// `H_m [s; -1] = 0`.
pub fn planted_singular_hessenberg(
    n: usize,
    steps: &BTreeSet<usize>,
    seed: u64,
) -> Result<ProblemInstance> {
    if n < 3 {
        return Err(Error::InvalidSize(format!("planted instances need n >= 3, got {n}")));
    }
    if let Some(&bad) = steps.iter().find(|&&m| m < 2 || m >= n) {
        return Err(Error::InvalidSize(format!(
            "planted step {bad} outside 2..{}",
            n - 1
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..MAX_RESEEDS {
        let mut h = ComplexMatrix::zeros(n, n);
        for j in 0..n {
            for i in 0..=j {
                h[(i, j)] = uniform_complex(&mut rng);
            }
            if j + 1 < n {
                h[(j + 1, j)] = c64(rng.gen_range(0.5..=1.5), 0.0);
            }
        }
        for &m in steps {
            let s: Vec<Complex64> = (0..m - 1).map(|_| uniform_complex(&mut rng)).collect();
            let head = h.leading(m - 1, m - 1).matvec(&s);
            for (i, v) in head.into_iter().enumerate() {
                h[(i, m - 1)] = v;
            }
            h[(m - 1, m - 1)] = h[(m - 1, m - 2)] * s[m - 2];
        }
        let hn = h.frobenius_norm();
        let screened = (1..=n).filter(|k| !steps.contains(k)).all(|k| {
            let sv = singular_values(&h.leading(k, k));
            sv[k - 1] > SCREEN_TOL * hn
        });
        if screened {
            let list = steps.iter().map(usize::to_string).collect::<Vec<_>>().join("+");
            return ProblemInstance::new(
                h,
                unit(n, 0),
                Provenance::new(
                    "planted",
                    &[("n", n.to_string()), ("steps", list)],
                    Some(seed),
                ),
                ExpectedStagnation::Exact(steps.clone()),
            );
        }
    }
    Err(Error::GeneratorFailure(format!(
        "no planted instance with well-separated blocks after {MAX_RESEEDS} draws"
    )))
}

/// Random nonsingular `A` with a unit `b` satisfying `<A b, b> = 0`, so the
/// first GMRES step stagnates.
///
/// `b` is sought in a random two-dimensional subspace `span(Q)`. Writing
/// `b = Q w` with unit `w` and `w w^* = (I + X sx + Y sy + Z sz) / 2`, the
/// condition `w^* C w = 0` for `C = Q^* A Q` is affine in the real unit
/// vector `(X, Y, Z)`: two real equations in three unknowns, intersected
/// with the unit sphere.
pub fn step_one_stagnation(n: usize, seed: u64) -> Result<ProblemInstance> {
    if n < 2 {
        return Err(Error::InvalidSize(format!("step-one instances need n >= 2, got {n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..MAX_RESEEDS {
        let a = ComplexMatrix::from_fn(n, n, |_, _| uniform_complex(&mut rng));
        let sv = singular_values(&a);
        if sv[n - 1] <= SCREEN_TOL * a.frobenius_norm() {
            continue;
        }
        let raw = ComplexMatrix::from_fn(n, 2, |_, _| uniform_complex(&mut rng));
        let Ok(q) = orthonormal_columns(&raw) else {
            continue;
        };
        let c = q.adjoint().matmul(&a).matmul(&q);
        let Some(w) = null_direction(&c, rng.gen_bool(0.5)) else {
            continue;
        };
        let b = q.matvec(&w);
        return ProblemInstance::new(
            a,
            b,
            Provenance::new("step-one", &[("n", n.to_string())], Some(seed)),
            ExpectedStagnation::AtLeast(BTreeSet::from([1])),
        );
    }
    Err(Error::GeneratorFailure(format!(
        "no step-one instance after {MAX_RESEEDS} draws"
    )))
}

// Gram-Schmidt with one reorthogonalization pass.
fn orthonormal_columns(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    let mut out: Vec<Vec<Complex64>> = Vec::with_capacity(a.cols());
    for j in 0..a.cols() {
        let mut v = a.col(j).to_vec();
        for _ in 0..2 {
            for u in &out {
                let p = dot(u, &v);
                axpy(-p, u, &mut v);
            }
        }
        let nv = norm(&v);
        if nv <= 1e-8 * norm(a.col(j)) {
            return Err(Error::GeneratorFailure("rank-deficient sample".into()));
        }
        out.push(scale(&v, c64(1.0 / nv, 0.0)));
    }
    Ok(ComplexMatrix::from_columns(a.rows(), &out))
}

// Unit w in C^2 with w^* C w = 0, or None when the affine system has no
// point on the unit sphere.
fn null_direction(c: &ComplexMatrix, flip: bool) -> Option<Vec<Complex64>> {
    let i = c64(0.0, 1.0);
    let a0 = (c[(0, 0)] + c[(1, 1)]) / 2.0;
    let ax = (c[(0, 1)] + c[(1, 0)]) / 2.0;
    let ay = i * (c[(0, 1)] - c[(1, 0)]) / 2.0;
    let az = (c[(0, 0)] - c[(1, 1)]) / 2.0;
    let l1 = [ax.re, ay.re, az.re];
    let l2 = [ax.im, ay.im, az.im];
    let rhs = [-a0.re, -a0.im];
    // minimum-norm solution L^T (L L^T)^{-1} rhs
    let d = |p: &[f64; 3], q: &[f64; 3]| p[0] * q[0] + p[1] * q[1] + p[2] * q[2];
    let (g11, g12, g22) = (d(&l1, &l1), d(&l1, &l2), d(&l2, &l2));
    let det = g11 * g22 - g12 * g12;
    if det <= 1e-12 * (g11 * g22).max(f64::MIN_POSITIVE) {
        return None;
    }
    let t1 = (g22 * rhs[0] - g12 * rhs[1]) / det;
    let t2 = (g11 * rhs[1] - g12 * rhs[0]) / det;
    let vp: Vec<f64> = (0..3).map(|k| t1 * l1[k] + t2 * l2[k]).collect();
    let vp2: f64 = vp.iter().map(|x| x * x).sum();
    if vp2 > 1.0 - 1e-6 {
        return None;
    }
    let mut k = [
        l1[1] * l2[2] - l1[2] * l2[1],
        l1[2] * l2[0] - l1[0] * l2[2],
        l1[0] * l2[1] - l1[1] * l2[0],
    ];
    let kn = d(&k, &k).sqrt();
    let t = (1.0 - vp2).sqrt() / kn * if flip { -1.0 } else { 1.0 };
    for (kk, p) in k.iter_mut().zip(&vp) {
        *kk = p + t * *kk;
    }
    let [x, y, z] = k;
    let theta = z.clamp(-1.0, 1.0).acos();
    let phi = y.atan2(x);
    Some(vec![
        c64((theta / 2.0).cos(), 0.0),
        Complex64::from_polar((theta / 2.0).sin(), phi),
    ])
}

/// Random complex `A` and `b`, entries with real and imaginary parts uniform
/// in `[-1, 1]`.
pub fn random_instance(n: usize, seed: u64) -> Result<ProblemInstance> {
    if n < 1 {
        return Err(Error::InvalidSize("random instances need n >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = ComplexMatrix::from_fn(n, n, |_, _| uniform_complex(&mut rng));
    let mut b: Vec<Complex64> = (0..n).map(|_| uniform_complex(&mut rng)).collect();
    while norm(&b) == 0.0 {
        b = (0..n).map(|_| uniform_complex(&mut rng)).collect();
    }
    ProblemInstance::new(
        a,
        b,
        Provenance::new("random", &[("n", n.to_string())], Some(seed)),
        ExpectedStagnation::Unknown,
    )
}

/// A generator invocation, parsed from `name[:key=value,...]`.
///
/// Names: `paper-example`, `cyclic-shift`, `planted`, `step-one`, `random`.
/// Keys: `n`, `seed`, `steps` (planted steps joined by `+`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GeneratorSpec {
    PaperExample,
    CyclicShift { n: usize },
    Planted { n: usize, steps: BTreeSet<usize>, seed: u64 },
    StepOne { n: usize, seed: u64 },
    Random { n: usize, seed: u64 },
}

impl GeneratorSpec {
    pub fn build(&self) -> Result<ProblemInstance> {
        match self {
            Self::PaperExample => Ok(paper_example()),
            Self::CyclicShift { n } => cyclic_shift_instance(*n),
            Self::Planted { n, steps, seed } => planted_singular_hessenberg(*n, steps, *seed),
            Self::StepOne { n, seed } => step_one_stagnation(*n, *seed),
            Self::Random { n, seed } => random_instance(*n, *seed),
        }
    }

    /// Builds a spec from a generator name plus optional overrides.
    pub fn from_parts(
        name: &str,
        n: Option<usize>,
        seed: Option<u64>,
        steps: Option<BTreeSet<usize>>,
    ) -> Result<Self> {
        let n_or = |d| n.unwrap_or(d);
        let seed = seed.unwrap_or(0);
        match normalize_name(name).as_str() {
            "paper-example" => Ok(Self::PaperExample),
            "cyclic-shift" => Ok(Self::CyclicShift { n: n_or(5) }),
            "planted" => Ok(Self::Planted {
                n: n_or(8),
                steps: steps.unwrap_or_else(|| BTreeSet::from([3])),
                seed,
            }),
            "step-one" => Ok(Self::StepOne { n: n_or(6), seed }),
            "random" => Ok(Self::Random { n: n_or(10), seed }),
            other => Err(Error::Parse {
                line: 0,
                msg: format!("unknown generator '{other}'"),
            }),
        }
    }

    pub fn is_known_name(name: &str) -> bool {
        let base = name.split(':').next().unwrap_or("");
        matches!(
            normalize_name(base).as_str(),
            "paper-example" | "cyclic-shift" | "planted" | "step-one" | "random"
        )
    }
}

fn normalize_name(name: &str) -> String {
    name.trim().to_ascii_lowercase().replace('_', "-")
}

/// Parses `1+3+4` (also `,`-separated) into a step set.
pub fn parse_steps(s: &str) -> Result<BTreeSet<usize>> {
    s.split(['+', ','])
        .filter(|t| !t.trim().is_empty())
        .map(|t| {
            t.trim().parse::<usize>().map_err(|e| Error::Parse {
                line: 0,
                msg: format!("bad step '{t}': {e}"),
            })
        })
        .collect()
}

impl FromStr for GeneratorSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, rest) = s.split_once(':').unwrap_or((s, ""));
        let (mut n, mut seed, mut steps) = (None, None, None);
        for kv in rest.split(',').filter(|t| !t.is_empty()) {
            let (k, v) = kv.split_once('=').ok_or_else(|| Error::Parse {
                line: 0,
                msg: format!("expected key=value, got '{kv}'"),
            })?;
            let bad = |e: &dyn fmt::Display| Error::Parse {
                line: 0,
                msg: format!("bad value for '{k}': {e}"),
            };
            match k.trim() {
                "n" => n = Some(v.trim().parse().map_err(|e| bad(&e))?),
                "seed" => seed = Some(v.trim().parse().map_err(|e| bad(&e))?),
                "steps" => steps = Some(parse_steps(v)?),
                other => {
                    return Err(Error::Parse {
                        line: 0,
                        msg: format!("unknown generator parameter '{other}'"),
                    })
                }
            }
        }
        Self::from_parts(name, n, seed, steps)
    }
}
