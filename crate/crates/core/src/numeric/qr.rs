use super::{c64, dot, norm, Complex64, ComplexMatrix, Givens, ZERO};
use crate::error::{Error, Result};

/// Solves `min ||rhs - H x||` for an `(m+1) x m` upper Hessenberg `H` by
/// Givens rotations on the subdiagonal. Returns the minimizer and the
/// attained residual norm.
pub fn qr_hessenberg_ls(h: &ComplexMatrix, rhs: &[Complex64]) -> Result<(Vec<Complex64>, f64)> {
    let m = h.cols();
    if m == 0 || h.rows() != m + 1 {
        return Err(Error::DimensionMismatch(format!(
            "expected (m+1) x m with m >= 1, got {} x {}",
            h.rows(),
            h.cols()
        )));
    }
    if rhs.len() != m + 1 {
        return Err(Error::DimensionMismatch(format!(
            "rhs has length {}, expected {}",
            rhs.len(),
            m + 1
        )));
    }
    if let Some((row, col)) = h.is_upper_hessenberg() {
        return Err(Error::NotHessenberg { row, col });
    }
    h.check_finite()?;

    let mut r = h.clone();
    let mut g = rhs.to_vec();
    for k in 0..m {
        let (rot, rho) = Givens::new(r[(k, k)], r[(k + 1, k)]);
        r[(k, k)] = rho;
        r[(k + 1, k)] = ZERO;
        rot.rotate_rows(&mut r, k, k + 1, (k + 1)..m);
        let (a, b) = rot.apply(g[k], g[k + 1]);
        g[k] = a;
        g[k + 1] = b;
    }
    let x = back_substitute(&r.leading(m, m), &g[..m])?;
    Ok((x, g[m].norm()))
}

/// Solves `R x = rhs` for upper triangular `R`.
///
/// A diagonal entry at or below `eps * max|R_ij|` is treated as singular.
pub fn back_substitute(r: &ComplexMatrix, rhs: &[Complex64]) -> Result<Vec<Complex64>> {
    let n = r.rows();
    if !r.is_square() || rhs.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "R is {}x{}, rhs has length {}",
            r.rows(),
            r.cols(),
            rhs.len()
        )));
    }
    let mut rmax = 0.0_f64;
    for j in 0..n {
        for i in 0..=j {
            rmax = rmax.max(r[(i, j)].norm());
        }
    }
    let tol = f64::EPSILON * rmax;
    let mut x = rhs.to_vec();
    for i in (0..n).rev() {
        let d = r[(i, i)];
        if d.norm() <= tol || d == ZERO {
            return Err(Error::SingularTriangular { index: i });
        }
        let mut s = x[i];
        for j in (i + 1)..n {
            s -= r[(i, j)] * x[j];
        }
        x[i] = s / d;
    }
    Ok(x)
}

/// Solves `R^* x = rhs` for upper triangular `R` (forward substitution on
/// the lower triangular adjoint), with the same singularity rule as
/// [`back_substitute`].
pub fn forward_substitute_adjoint(r: &ComplexMatrix, rhs: &[Complex64]) -> Result<Vec<Complex64>> {
    let n = r.rows();
    if !r.is_square() || rhs.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "R is {}x{}, rhs has length {}",
            r.rows(),
            r.cols(),
            rhs.len()
        )));
    }
    let mut rmax = 0.0_f64;
    for j in 0..n {
        for i in 0..=j {
            rmax = rmax.max(r[(i, j)].norm());
        }
    }
    let tol = f64::EPSILON * rmax;
    let mut x = rhs.to_vec();
    for i in 0..n {
        let d = r[(i, i)];
        if d.norm() <= tol || d == ZERO {
            return Err(Error::SingularTriangular { index: i });
        }
        let mut s = x[i];
        for j in 0..i {
            s -= r[(j, i)].conj() * x[j];
        }
        x[i] = s / d.conj();
    }
    Ok(x)
}

/// Compact Householder QR of a tall matrix (`rows >= cols`).
#[derive(Clone, Debug)]
pub struct HouseholderQr {
    /// Upper triangle holds R; reflectors are kept separately.
    r: ComplexMatrix,
    reflectors: Vec<Vec<Complex64>>,
}

impl HouseholderQr {
    pub fn new(a: &ComplexMatrix) -> Result<Self> {
        let (n, k) = (a.rows(), a.cols());
        if n < k {
            return Err(Error::DimensionMismatch(format!(
                "Householder QR needs rows >= cols, got {n}x{k}"
            )));
        }
        let mut r = a.clone();
        let mut reflectors = Vec::with_capacity(k);
        for j in 0..k {
            let x: Vec<Complex64> = (j..n).map(|i| r[(i, j)]).collect();
            let nx = norm(&x);
            let mut v = x.clone();
            if nx == 0.0 {
                reflectors.push(vec![ZERO; n - j]);
                continue;
            }
            let phase = if x[0] == ZERO { c64(1.0, 0.0) } else { x[0] / x[0].norm() };
            let alpha = -phase * nx;
            v[0] -= alpha;
            let nv = norm(&v);
            for z in v.iter_mut() {
                *z /= nv;
            }
            // apply I - 2 v v^* to the trailing columns
            for c in j..k {
                let col: Vec<Complex64> = (j..n).map(|i| r[(i, c)]).collect();
                let p = dot(&v, &col) * 2.0;
                for (t, i) in (j..n).enumerate() {
                    r[(i, c)] -= p * v[t];
                }
            }
            r[(j, j)] = alpha;
            for i in (j + 1)..n {
                r[(i, j)] = ZERO;
            }
            reflectors.push(v);
        }
        Ok(Self { r, reflectors })
    }

    /// The `cols x cols` triangular factor.
    pub fn r(&self) -> ComplexMatrix {
        let k = self.r.cols();
        self.r.leading(k, k)
    }

    /// Applies `Q^*` to a vector of length `rows`.
    pub fn apply_qh(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.r.rows();
        assert_eq!(b.len(), n);
        let mut y = b.to_vec();
        for (j, v) in self.reflectors.iter().enumerate() {
            let p = dot(v, &y[j..]) * 2.0;
            for (t, yi) in y[j..].iter_mut().enumerate() {
                *yi -= p * v[t];
            }
        }
        y
    }

    /// Least-squares solution of `A x ~ b`; fails when `R` is singular.
    pub fn solve(&self, b: &[Complex64]) -> Result<Vec<Complex64>> {
        let k = self.r.cols();
        let y = self.apply_qh(b);
        back_substitute(&self.r(), &y[..k])
    }
}

/// Dense least squares `min ||b - A x||` for full column rank `A`.
pub fn householder_lstsq(a: &ComplexMatrix, b: &[Complex64]) -> Result<Vec<Complex64>> {
    if b.len() != a.rows() {
        return Err(Error::DimensionMismatch(format!(
            "rhs has length {}, matrix has {} rows",
            b.len(),
            a.rows()
        )));
    }
    HouseholderQr::new(a)?.solve(b)
}
