// Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use nalgebra::DMatrix;
use staglab::numeric::{c64, Complex64, ComplexMatrix};

pub fn to_na(a: &ComplexMatrix) -> DMatrix<Complex64> {
    DMatrix::from_fn(a.rows(), a.cols(), |i, j| a[(i, j)])
}

pub fn vnorm(x: &[Complex64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Sine of the angle between two nonzero vectors.
pub fn sine(x: &[Complex64], y: &[Complex64]) -> f64 {
    let ip: Complex64 = x.iter().zip(y).map(|(a, b)| a.conj() * b).sum();
    let c = ip.norm() / (vnorm(x) * vnorm(y));
    (1.0 - (c * c).min(1.0)).max(0.0).sqrt()
}

/// Minimizer of `||H x - b||` through the normal equations, solved by LU.
pub fn normal_equations_ls(h: &ComplexMatrix, b: &[Complex64]) -> Vec<Complex64> {
    let hn = to_na(h);
    let bn = nalgebra::DVector::from_column_slice(b);
    let g = hn.adjoint() * &hn;
    let rhs = hn.adjoint() * bn;
    g.lu().solve(&rhs).expect("full column rank").iter().copied().collect()
}

/// Singular values, descending.
pub fn reference_singular_values(a: &ComplexMatrix) -> Vec<f64> {
    let mut s: Vec<f64> = to_na(a).singular_values().iter().copied().collect();
    s.sort_by(|x, y| y.partial_cmp(x).unwrap());
    s
}

/// Roots of `sum_k p[k] z^k` by Weierstrass iteration, after trimming
/// negligible leading coefficients.
pub fn polynomial_roots(p: &[Complex64]) -> Vec<Complex64> {
    let scale = p.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let mut deg = p.len() - 1;
    while deg > 0 && p[deg].norm() <= 1e-12 * scale {
        deg -= 1;
    }
    if deg == 0 {
        return Vec::new();
    }
    let monic: Vec<Complex64> = p[..=deg].iter().map(|c| c / p[deg]).collect();
    let eval = |z: Complex64| monic.iter().rev().fold(c64(0.0, 0.0), |acc, &c| acc * z + c);
    let radius = 1.0 + monic[..deg].iter().map(|c| c.norm()).fold(0.0, f64::max);
    let seed = c64(0.4, 0.9);
    let mut z: Vec<Complex64> = (0..deg).map(|k| seed.powu(k as u32) * radius * 0.5).collect();
    for _ in 0..2000 {
        let mut delta: f64 = 0.0;
        for i in 0..deg {
            let mut den = c64(1.0, 0.0);
            for j in 0..deg {
                if j != i {
                    den *= z[i] - z[j];
                }
            }
            let step = eval(z[i]) / den;
            z[i] -= step;
            delta = delta.max(step.norm());
        }
        if delta <= 1e-15 * radius {
            break;
        }
    }
    z
}

/// Largest relative distance under the best pairing of two equal-size
/// multisets (exhaustive; sizes here are small).
pub fn multiset_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    fn go(a: &[Complex64], b: &mut Vec<Complex64>, worst: f64, best: &mut f64) {
        if worst >= *best {
            return;
        }
        let Some((&x, rest)) = a.split_first() else {
            *best = worst;
            return;
        };
        for j in 0..b.len() {
            let y = b.swap_remove(j);
            let d = (x - y).norm() / (1.0 + x.norm());
            go(rest, b, worst.max(d), best);
            b.push(y);
            let last = b.len() - 1;
            b.swap(j, last);
        }
    }
    let mut best = f64::INFINITY;
    go(a, &mut b.to_vec(), 0.0, &mut best);
    best
}
