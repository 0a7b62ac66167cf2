//! Complex QZ for small dense pencils `(A, B)`.
//!
//! The pencil is reduced to Hessenberg-triangular form with Givens
//! rotations and then to generalized Schur form `(S, T)` by single-shift QZ
//! sweeps. Before that, null vectors of `B` are split off one at a time by
//! an SVD rank decision: a Jordan chain at infinity (which stagnation in
//! consecutive steps produces) would otherwise be smeared by QZ into
//! spurious finite eigenvalues of size `1/sqrt(ulp)`. Zeros that still turn
//! up on the diagonal of `T` are chased to the bottom of the active block.
//! `B` is never inverted.

use super::{c64, norm, normalize_phase, smallest_singular_triplet, Complex64, ComplexMatrix, Givens, ONE, ZERO};
use crate::error::{Error, Result};

/// Default threshold for flagging `|beta| <= tol * (|alpha| + |beta|)` as infinite.
pub const INFINITY_TOL: f64 = 1e-10;

const MAX_ITER_PER_EIGENVALUE: usize = 60;
const EXCEPTIONAL_SHIFT_EVERY: usize = 10;

/// Homogeneous eigenpair of a pencil: `beta * A u = alpha * B u`.
#[derive(Clone, Debug, PartialEq)]
pub struct PencilEigenPair {
    pub alpha: Complex64,
    /// Real and nonnegative after normalization.
    pub beta: Complex64,
    /// Unit 2-norm, largest-modulus entry real positive.
    pub vector: Vec<Complex64>,
    pub infinite: bool,
}

impl PencilEigenPair {
    /// `alpha / beta`, or `None` for a flagged-infinite pair.
    pub fn eigenvalue(&self) -> Option<Complex64> {
        if self.infinite {
            None
        } else {
            Some(self.alpha / self.beta)
        }
    }
}

/// Solves the pencil with the default infinity threshold.
pub fn solve_pencil(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<Vec<PencilEigenPair>> {
    solve_pencil_with(a, b, INFINITY_TOL)
}

/// Returns all `m` eigenpairs sorted finite-first by descending modulus,
/// ties broken by descending real then imaginary part.
pub fn solve_pencil_with(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    infinity_tol: f64,
) -> Result<Vec<PencilEigenPair>> {
    let n = a.rows();
    if !a.is_square() || !b.is_square() || b.rows() != n {
        return Err(Error::DimensionMismatch(format!(
            "pencil needs two square matrices of equal order, got {}x{} and {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    a.check_finite()?;
    b.check_finite()?;
    if n == 0 {
        return Ok(Vec::new());
    }

    let schur = GeneralizedSchur::compute(a, b, infinity_tol)?;
    let anorm = a.frobenius_norm();
    let bnorm = b.frobenius_norm();
    let singular_tol = 100.0 * n as f64 * f64::EPSILON;
    let mut pairs = Vec::with_capacity(n);
    for k in 0..n {
        let mut alpha = schur.s[(k, k)];
        let mut beta = schur.t[(k, k)];
        if alpha.norm() <= singular_tol * anorm.max(f64::MIN_POSITIVE)
            && beta.norm() <= singular_tol * bnorm.max(f64::MIN_POSITIVE)
        {
            return Err(Error::DegeneratePencil);
        }
        if beta != ZERO {
            let ph = beta.conj() / beta.norm();
            alpha *= ph;
            beta = c64(beta.norm(), 0.0);
        }
        let x = schur.triangular_eigenvector(k, alpha, beta);
        let mut u = schur.z.matvec(&x);
        normalize_phase(&mut u);
        let infinite = beta.norm() <= infinity_tol * (alpha.norm() + beta.norm());
        pairs.push(PencilEigenPair {
            alpha,
            beta,
            vector: u,
            infinite,
        });
    }
    pairs.sort_by(|p, q| sort_key(p).partial_cmp(&sort_key(q)).expect("finite keys"));
    Ok(pairs)
}

// (infinite, -|lambda|, -re, -im) with modulus and parts rounded to 11
// significant digits so that rounding noise does not reorder ties.
fn sort_key(p: &PencilEigenPair) -> (u8, f64, f64, f64) {
    match p.eigenvalue() {
        None => (1, 0.0, 0.0, 0.0),
        Some(l) => (0, -round_sig(l.norm()), -round_sig(l.re), -round_sig(l.im)),
    }
}

fn round_sig(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.10e}").parse().unwrap_or(x)
}

/// `Q^* A Z = S`, `Q^* B Z = T`, both upper triangular. Only `Z` is kept.
struct GeneralizedSchur {
    s: ComplexMatrix,
    t: ComplexMatrix,
    z: ComplexMatrix,
}

impl GeneralizedSchur {
    fn compute(a: &ComplexMatrix, b: &ComplexMatrix, rank_tol: f64) -> Result<Self> {
        let n = a.rows();
        let mut h = a.clone();
        let mut t = b.clone();
        let mut z = ComplexMatrix::identity(n);

        let start = deflate_null_space(&mut h, &mut t, &mut z, rank_tol * b.frobenius_norm())?;
        triangularize_b(&mut h, &mut t, start);
        hessenberg_triangular(&mut h, &mut t, &mut z, start);
        qz_iterate(&mut h, &mut t, &mut z, start)?;

        Ok(Self { s: h, t, z })
    }

    /// Solves `(beta S - alpha T) x = 0` with `x_k = 1`, `x_j = 0` for `j > k`.
    fn triangular_eigenvector(&self, k: usize, alpha: Complex64, beta: Complex64) -> Vec<Complex64> {
        let n = self.s.rows();
        let m = |i: usize, j: usize| beta * self.s[(i, j)] - alpha * self.t[(i, j)];
        let scale = (beta.norm() * self.s.frobenius_norm() + alpha.norm() * self.t.frobenius_norm())
            .max(f64::MIN_POSITIVE);
        let small = f64::EPSILON * scale;
        let mut x = vec![ZERO; n];
        x[k] = ONE;
        for j in (0..k).rev() {
            let mut acc = ZERO;
            for l in (j + 1)..=k {
                acc += m(j, l) * x[l];
            }
            let d = m(j, j);
            x[j] = if d.norm() < small {
                // repeated eigenvalue: perturb the pivot (a real divisor, since
                // complex division would square a possibly subnormal `small`)
                -acc / small.max(f64::MIN_POSITIVE)
            } else {
                -acc / d
            };
            let nx = norm(&x[j..=k]);
            if nx > 1e100 {
                for v in x[j..=k].iter_mut() {
                    *v /= nx;
                }
            }
        }
        x
    }
}

// Repeatedly takes the smallest right singular vector `s` of the trailing
// block of T; while its singular value is at most `tol`, rotates `s` into
// the leading column of the block, reduces that column of H to a multiple
// of e_1 and zeroes the column of T. Returns the number of deflated columns.
fn deflate_null_space(
    h: &mut ComplexMatrix,
    t: &mut ComplexMatrix,
    z: &mut ComplexMatrix,
    tol: f64,
) -> Result<usize> {
    let n = h.rows();
    let mut d = 0;
    while d < n {
        let k = n - d;
        let block = ComplexMatrix::from_fn(k, k, |i, j| t[(i + d, j + d)]);
        let triplet = smallest_singular_triplet(&block)?;
        if triplet.sigma_min > tol {
            break;
        }
        // unitary W with W e_1 parallel to s, as a product of rotations
        let mut w = triplet.right;
        for i in (1..k).rev() {
            let (g, r) = Givens::new(w[i - 1], w[i]);
            w[i - 1] = r;
            w[i] = ZERO;
            let gh = Givens { c: g.c, s: -g.s };
            for m in [&mut *h, &mut *t, &mut *z] {
                gh.rotate_cols(m, d + i - 1, d + i);
            }
        }
        for i in ((d + 1)..n).rev() {
            let (g, r) = Givens::new(h[(i - 1, d)], h[(i, d)]);
            g.rotate_rows(h, i - 1, i, 0..n);
            h[(i - 1, d)] = r;
            h[(i, d)] = ZERO;
            g.rotate_rows(t, i - 1, i, 0..n);
        }
        for i in d..n {
            t[(i, d)] = ZERO;
        }
        d += 1;
    }
    Ok(d)
}

// QR of B by Givens rotations; exact zeros stay exact.
fn triangularize_b(h: &mut ComplexMatrix, t: &mut ComplexMatrix, start: usize) {
    let n = t.rows();
    for j in start..n {
        for i in ((j + 1)..n).rev() {
            if t[(i, j)] == ZERO {
                continue;
            }
            let (g, r) = Givens::new(t[(i - 1, j)], t[(i, j)]);
            g.rotate_rows(t, i - 1, i, j..n);
            t[(i - 1, j)] = r;
            t[(i, j)] = ZERO;
            g.rotate_rows(h, i - 1, i, 0..n);
        }
    }
}

fn hessenberg_triangular(h: &mut ComplexMatrix, t: &mut ComplexMatrix, z: &mut ComplexMatrix, start: usize) {
    let n = h.rows();
    if n < start + 3 {
        return;
    }
    for j in start..(n - 2) {
        for i in ((j + 2)..n).rev() {
            if h[(i, j)] == ZERO {
                continue;
            }
            let (g, r) = Givens::new(h[(i - 1, j)], h[(i, j)]);
            g.rotate_rows(h, i - 1, i, 0..n);
            h[(i - 1, j)] = r;
            h[(i, j)] = ZERO;
            g.rotate_rows(t, i - 1, i, 0..n);
            // fill at t[(i, i-1)]
            if t[(i, i - 1)] != ZERO {
                let gc = Givens::zeroing_col(t, i, i - 1, i);
                gc.rotate_cols(t, i - 1, i);
                t[(i, i - 1)] = ZERO;
                gc.rotate_cols(h, i - 1, i);
                gc.rotate_cols(z, i - 1, i);
            }
        }
    }
}

fn qz_iterate(h: &mut ComplexMatrix, t: &mut ComplexMatrix, z: &mut ComplexMatrix, start: usize) -> Result<()> {
    let n = h.rows();
    let ulp = f64::EPSILON;
    let hnorm = h.frobenius_norm();
    let tnorm = t.frobenius_norm();
    let h_abs_tol = ulp * hnorm;
    let t_tol = n as f64 * ulp * tnorm;

    let negligible_sub = |h: &ComplexMatrix, k: usize| {
        let x = h[(k, k - 1)].norm();
        x <= h_abs_tol || x <= ulp * (h[(k - 1, k - 1)].norm() + h[(k, k)].norm())
    };

    let mut ihi = n; // active block is [lo, ihi)
    let mut since_deflation = 0usize;
    let mut total = 0usize;
    let max_total = MAX_ITER_PER_EIGENVALUE * n.max(1);

    while ihi > start + 1 {
        let hi = ihi - 1;
        if negligible_sub(h, hi) {
            h[(hi, hi - 1)] = ZERO;
            ihi -= 1;
            since_deflation = 0;
            continue;
        }
        let mut lo = hi - 1;
        while lo > start && !negligible_sub(h, lo) {
            lo -= 1;
        }
        if lo > start {
            h[(lo, lo - 1)] = ZERO;
        }

        if let Some(j) = (lo..=hi).find(|&j| t[(j, j)].norm() <= t_tol) {
            t[(j, j)] = ZERO;
            if j == lo {
                // split a 1x1 infinite block off the top
                let (g, r) = Givens::new(h[(lo, lo)], h[(lo + 1, lo)]);
                g.rotate_rows(h, lo, lo + 1, 0..n);
                h[(lo, lo)] = r;
                h[(lo + 1, lo)] = ZERO;
                g.rotate_rows(t, lo, lo + 1, 0..n);
                t[(lo + 1, lo)] = ZERO;
                t[(lo, lo)] = ZERO;
            } else {
                chase_zero_down(h, t, z, j, hi);
                ihi -= 1;
            }
            since_deflation = 0;
            continue;
        }

        total += 1;
        since_deflation += 1;
        if total > max_total {
            return Err(Error::NoConvergence(total));
        }
        let shift = if since_deflation.is_multiple_of(EXCEPTIONAL_SHIFT_EVERY) {
            let sub = h[(hi, hi - 1)].norm() / t[(hi - 1, hi - 1)].norm();
            h[(hi, hi)] / t[(hi, hi)] + c64(0.75 * sub, 0.43 * sub)
        } else {
            wilkinson_shift(h, t, hi)
        };
        qz_sweep(h, t, z, lo, hi, shift);
    }
    Ok(())
}

// t[(j,j)] == 0 with lo < j <= hi: move the zero to t[(hi,hi)] and split it off.
fn chase_zero_down(h: &mut ComplexMatrix, t: &mut ComplexMatrix, z: &mut ComplexMatrix, j: usize, hi: usize) {
    let n = h.rows();
    for jc in j..hi {
        let (g, r) = Givens::new(t[(jc, jc + 1)], t[(jc + 1, jc + 1)]);
        g.rotate_rows(t, jc, jc + 1, 0..n);
        t[(jc, jc + 1)] = r;
        t[(jc + 1, jc + 1)] = ZERO;
        g.rotate_rows(h, jc, jc + 1, 0..n);
        // fill at h[(jc+1, jc-1)]
        let gc = Givens::zeroing_col(h, jc + 1, jc - 1, jc);
        gc.rotate_cols(h, jc - 1, jc);
        h[(jc + 1, jc - 1)] = ZERO;
        gc.rotate_cols(t, jc - 1, jc);
        gc.rotate_cols(z, jc - 1, jc);
    }
    let gc = Givens::zeroing_col(h, hi, hi - 1, hi);
    gc.rotate_cols(h, hi - 1, hi);
    h[(hi, hi - 1)] = ZERO;
    gc.rotate_cols(t, hi - 1, hi);
    gc.rotate_cols(z, hi - 1, hi);
    t[(hi, hi)] = ZERO;
}

// Eigenvalue of the trailing 2x2 pencil closer to h[hi,hi]/t[hi,hi].
fn wilkinson_shift(h: &ComplexMatrix, t: &ComplexMatrix, hi: usize) -> Complex64 {
    let k = hi - 1;
    let (h11, h12, h21, h22) = (h[(k, k)], h[(k, hi)], h[(hi, k)], h[(hi, hi)]);
    let (t11, t12, t22) = (t[(k, k)], t[(k, hi)], t[(hi, hi)]);
    // det(H - l T) = qa l^2 + qb l + qc
    let qa = t11 * t22;
    let qb = -(h11 * t22 + h22 * t11 - h21 * t12);
    let qc = h11 * h22 - h12 * h21;
    let target = h22 / t22;
    let disc = (qb * qb - 4.0 * qa * qc).sqrt();
    // stable quadratic roots
    let q = if (qb.conj() * disc).re >= 0.0 {
        -0.5 * (qb + disc)
    } else {
        -0.5 * (qb - disc)
    };
    let r1 = q / qa;
    let r2 = if q != ZERO { qc / q } else { r1 };
    let candidates = [r1, r2];
    candidates
        .into_iter()
        .filter(|r| r.is_finite())
        .min_by(|a, b| (a - target).norm().total_cmp(&(b - target).norm()))
        .unwrap_or(target)
}

fn qz_sweep(
    h: &mut ComplexMatrix,
    t: &mut ComplexMatrix,
    z: &mut ComplexMatrix,
    lo: usize,
    hi: usize,
    shift: Complex64,
) {
    let n = h.rows();
    let x = h[(lo, lo)] - shift * t[(lo, lo)];
    let y = h[(lo + 1, lo)];
    let (g, _) = Givens::new(x, y);
    g.rotate_rows(h, lo, lo + 1, 0..n);
    g.rotate_rows(t, lo, lo + 1, 0..n);
    for k in lo..hi {
        // t fill at (k+1, k)
        let gc = Givens::zeroing_col(t, k + 1, k, k + 1);
        gc.rotate_cols(t, k, k + 1);
        t[(k + 1, k)] = ZERO;
        gc.rotate_cols(h, k, k + 1);
        gc.rotate_cols(z, k, k + 1);
        if k + 1 < hi {
            // h fill at (k+2, k)
            let (g, r) = Givens::new(h[(k + 1, k)], h[(k + 2, k)]);
            g.rotate_rows(h, k + 1, k + 2, 0..n);
            h[(k + 1, k)] = r;
            h[(k + 2, k)] = ZERO;
            g.rotate_rows(t, k + 1, k + 2, 0..n);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{scale, sub, unit};

    fn residual(a: &ComplexMatrix, b: &ComplexMatrix, p: &PencilEigenPair) -> f64 {
        let au = scale(&a.matvec(&p.vector), p.beta);
        let bu = scale(&b.matvec(&p.vector), p.alpha);
        norm(&sub(&au, &bu))
    }

    #[test]
    fn worked_example_pencil() {
        let a = ComplexMatrix::from_real_rows(&[&[2.0, 1.0], &[1.0, 2.0]]).unwrap();
        let b = ComplexMatrix::from_real_rows(&[&[1.0, 1.0], &[1.0, 0.0]]).unwrap();
        let pairs = solve_pencil(&a, &b).unwrap();
        let s3 = 3f64.sqrt();
        let l0 = pairs[0].eigenvalue().unwrap();
        let l1 = pairs[1].eigenvalue().unwrap();
        assert!((l0 - c64(s3, 0.0)).norm() < 1e-14, "{l0}");
        assert!((l1 - c64(-s3, 0.0)).norm() < 1e-14, "{l1}");
        for p in &pairs {
            assert!(residual(&a, &b, p) < 1e-14);
        }
    }

    #[test]
    fn identity_pencil() {
        let i = ComplexMatrix::identity(3);
        let pairs = solve_pencil(&i, &i).unwrap();
        assert_eq!(pairs.len(), 3);
        for p in &pairs {
            assert!((p.eigenvalue().unwrap() - ONE).norm() < 1e-15);
        }
    }

    #[test]
    fn nilpotent_b_gives_infinite_pairs() {
        let a = ComplexMatrix::identity(3);
        let mut b = ComplexMatrix::zeros(3, 3);
        b[(0, 1)] = ONE;
        b[(1, 2)] = ONE;
        let pairs = solve_pencil(&a, &b).unwrap();
        assert!(pairs.iter().all(|p| p.infinite));
        for p in &pairs {
            assert!(residual(&a, &b, p) < 1e-12);
        }
    }

    #[test]
    fn zero_b_gives_unit_infinite_vectors() {
        let a = ComplexMatrix::from_rows(&[
            vec![c64(-0.674, -0.9907), c64(-0.5618, 0.5932)],
            vec![c64(0.5502, -0.4987), c64(-0.3666, 0.2084)],
        ])
        .unwrap();
        let pairs = solve_pencil(&a, &ComplexMatrix::zeros(2, 2)).unwrap();
        for p in pairs {
            assert!(p.infinite);
            assert!((norm(&p.vector) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn singular_pencil_is_reported() {
        let z = ComplexMatrix::zeros(2, 2);
        let mut a = ComplexMatrix::zeros(2, 2);
        a[(0, 0)] = ONE;
        assert_eq!(solve_pencil(&a, &z).unwrap_err(), Error::DegeneratePencil);
    }

    #[test]
    fn infinite_eigenvalue_in_the_middle() {
        // B singular with a zero pivot not at the top: forces the zero chase
        let a = ComplexMatrix::from_rows(&[
            vec![c64(1.0, 0.5), c64(2.0, 0.0), c64(0.3, 0.0), c64(1.0, -1.0)],
            vec![c64(0.5, 0.0), c64(-1.0, 0.2), c64(1.0, 0.0), c64(0.0, 1.0)],
            vec![c64(0.0, 0.0), c64(0.7, 0.0), c64(2.0, 0.0), c64(0.4, 0.0)],
            vec![c64(0.0, 0.0), c64(0.0, 0.0), c64(0.9, 0.1), c64(-0.6, 0.0)],
        ])
        .unwrap();
        let b = ComplexMatrix::from_rows(&[
            vec![c64(1.0, 0.0), c64(0.5, 0.0), c64(0.2, 0.1), c64(0.0, 1.0)],
            vec![ZERO, ZERO, c64(1.0, 0.0), c64(0.3, 0.0)],
            vec![ZERO, ZERO, c64(2.0, 0.0), c64(-1.0, 0.0)],
            vec![ZERO, ZERO, ZERO, c64(1.5, 0.5)],
        ])
        .unwrap();
        let pairs = solve_pencil(&a, &b).unwrap();
        assert_eq!(pairs.iter().filter(|p| p.infinite).count(), 1);
        assert!(pairs.last().unwrap().infinite);
        let scale = a.frobenius_norm() + b.frobenius_norm();
        for p in &pairs {
            assert!(residual(&a, &b, p) <= 1e-12 * scale);
        }
    }

    #[test]
    fn rejects_mismatched_orders() {
        let a = ComplexMatrix::identity(2);
        let b = ComplexMatrix::identity(3);
        assert!(matches!(solve_pencil(&a, &b), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn jordan_chain_at_infinity_stays_infinite() {
        // (S, T) with a 2x2 Jordan block at infinity and eigenvalue 2 - i,
        // hidden behind unitary transforms on both sides
        let s = ComplexMatrix::from_rows(&[
            vec![c64(1.0, 0.0), c64(0.5, 0.5), c64(0.3, -0.2)],
            vec![ZERO, c64(0.8, 0.3), c64(-0.4, 0.1)],
            vec![ZERO, ZERO, c64(2.0, -1.0)],
        ])
        .unwrap();
        let t = ComplexMatrix::from_rows(&[
            vec![ZERO, c64(1.0, 0.0), c64(0.2, 0.7)],
            vec![ZERO, ZERO, c64(0.9, 0.0)],
            vec![ZERO, ZERO, ONE],
        ])
        .unwrap();
        let mixer = |seed: f64| {
            let m = ComplexMatrix::from_fn(3, 3, |i, j| {
                c64((seed * (i * 3 + j + 1) as f64).sin(), (seed * (i + 2 * j + 1) as f64).cos())
            });
            let qr = crate::numeric::HouseholderQr::new(&m).unwrap();
            let cols: Vec<Vec<Complex64>> = (0..3).map(|j| qr.apply_qh(&unit(3, j))).collect();
            ComplexMatrix::from_columns(3, &cols)
        };
        let (q, zz) = (mixer(0.7), mixer(1.3));
        let a = q.matmul(&s).matmul(&zz.adjoint());
        let b = q.matmul(&t).matmul(&zz.adjoint());
        let pairs = solve_pencil(&a, &b).unwrap();
        assert_eq!(pairs.iter().filter(|p| p.infinite).count(), 2);
        let l = pairs[0].eigenvalue().unwrap();
        assert!((l - c64(2.0, -1.0)).norm() < 1e-12, "{l}");
        let scale = a.frobenius_norm() + b.frobenius_norm();
        for p in &pairs {
            assert!(residual(&a, &b, p) <= 1e-12 * scale);
        }
    }
}
