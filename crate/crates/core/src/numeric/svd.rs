use super::{dot, norm, Complex64, ComplexMatrix, ZERO};
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 80;

/// Singular values (descending) with the matching right singular vectors.
#[derive(Clone, Debug)]
pub struct Svd {
    pub singular_values: Vec<f64>,
    /// Columns are right singular vectors, ordered like `singular_values`.
    pub v: ComplexMatrix,
}

/// One-sided (Hestenes) Jacobi SVD.
///
/// Orthogonalizes the columns of `a` by plane rotations accumulated into a
/// unitary `V`; the singular values are the final column norms. Right
/// vectors come out exactly unitary even for zero singular values, which is
/// what the null-vector consumers need. Left vectors are obtained by running
/// the same routine on `a^*`.
pub fn jacobi_svd(a: &ComplexMatrix) -> Svd {
    let (rows, n) = (a.rows(), a.cols());
    let mut u = a.clone();
    let mut v = ComplexMatrix::identity(n);
    let tol = f64::EPSILON * (rows.max(1) as f64).sqrt();

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let alpha = u.col(p).iter().map(|z| z.norm_sqr()).sum::<f64>();
                let beta = u.col(q).iter().map(|z| z.norm_sqr()).sum::<f64>();
                let gamma = dot(u.col(p), u.col(q));
                let g = gamma.norm();
                if g == 0.0 || g <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let phase = gamma / g;
                let zeta = (beta - alpha) / (2.0 * g);
                // smaller root of t^2 + 2 zeta t - 1 = 0; signum(+0.0) = 1
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate_pair(&mut u, p, q, c, s, phase);
                rotate_pair(&mut v, p, q, c, s, phase);
            }
        }
        if !rotated {
            break;
        }
    }

    let mut order: Vec<(usize, f64)> = (0..n).map(|j| (j, norm(u.col(j)))).collect();
    // stable sort: equal values keep column order
    order.sort_by(|a, b| b.1.total_cmp(&a.1));
    let singular_values = order.iter().map(|&(_, s)| s).collect();
    let mut vs = ComplexMatrix::zeros(n, n);
    for (k, &(j, _)) in order.iter().enumerate() {
        vs.col_mut(k).copy_from_slice(v.col(j));
    }
    Svd {
        singular_values,
        v: vs,
    }
}

// real Jacobi rotation on (col_p, w) with w = conj(phase) * col_q
fn rotate_pair(m: &mut ComplexMatrix, p: usize, q: usize, c: f64, s: f64, phase: Complex64) {
    let ph = phase.conj();
    for k in 0..m.rows() {
        let x = m[(k, p)];
        let w = ph * m[(k, q)];
        m[(k, p)] = c * x - s * w;
        m[(k, q)] = s * x + c * w;
    }
}

pub fn singular_values(a: &ComplexMatrix) -> Vec<f64> {
    if a.rows() < a.cols() {
        jacobi_svd(&a.adjoint()).singular_values
    } else {
        jacobi_svd(a).singular_values
    }
}

/// Smallest singular value of a square matrix with unit right and left
/// singular vectors.
#[derive(Clone, Debug)]
pub struct SingularTriplet {
    pub sigma_min: f64,
    pub right: Vec<Complex64>,
    pub left: Vec<Complex64>,
}

pub fn smallest_singular_triplet(m: &ComplexMatrix) -> Result<SingularTriplet> {
    if !m.is_square() || m.rows() == 0 {
        return Err(Error::DimensionMismatch(format!(
            "expected a nonempty square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let n = m.cols();
    let right = jacobi_svd(m);
    let left = jacobi_svd(&m.adjoint());
    let mut r = right.v.col(n - 1).to_vec();
    let mut l = left.v.col(n - 1).to_vec();
    // align phases so the left vector matches M r / sigma when sigma > 0
    let sigma = right.singular_values[n - 1];
    if sigma > 0.0 {
        let mr = m.matvec(&r);
        let p = dot(&l, &mr);
        if p.norm() > 0.0 {
            let f = p / p.norm();
            for z in l.iter_mut() {
                *z *= f;
            }
        }
    }
    tidy(&mut r);
    tidy(&mut l);
    Ok(SingularTriplet {
        sigma_min: sigma,
        right: r,
        left: l,
    })
}

// Unit vectors from Jacobi are unitary to working precision; renormalize to
// absorb the last few ulps.
fn tidy(x: &mut [Complex64]) {
    let n = norm(x);
    if n > 0.0 {
        for z in x.iter_mut() {
            *z /= n;
        }
    }
    for z in x.iter_mut() {
        if z.re == 0.0 && z.im == 0.0 {
            *z = ZERO;
        }
    }
}
