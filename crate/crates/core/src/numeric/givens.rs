use super::{c64, Complex64, ComplexMatrix, ZERO};

/// Complex plane rotation `G = [[c, s], [-conj(s), c]]` with real `c`.
///
/// Constructed so that `G * (a, b)^T = (r, 0)^T`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Givens {
    pub c: f64,
    pub s: Complex64,
}

impl Givens {
    pub const IDENTITY: Givens = Givens { c: 1.0, s: ZERO };

    /// Returns the rotation and the resulting leading entry `r`.
    pub fn new(a: Complex64, b: Complex64) -> (Self, Complex64) {
        if b == ZERO {
            return (Self::IDENTITY, a);
        }
        if a == ZERO {
            // (0, b) -> (|b|, 0): s = conj(b)/|b|
            let nb = b.norm();
            return (
                Givens {
                    c: 0.0,
                    s: b.conj() / nb,
                },
                c64(nb, 0.0),
            );
        }
        let na = a.norm();
        let nb = b.norm();
        let r = na.hypot(nb);
        let phase = a / na;
        let g = Givens {
            c: na / r,
            s: phase * b.conj() / r,
        };
        (g, phase * r)
    }

    #[inline]
    pub fn apply(&self, x: Complex64, y: Complex64) -> (Complex64, Complex64) {
        (self.c * x + self.s * y, -self.s.conj() * x + self.c * y)
    }

    /// Row rotation acting on rows `p` and `q`, columns `cols`.
    pub fn rotate_rows(&self, m: &mut ComplexMatrix, p: usize, q: usize, cols: std::ops::Range<usize>) {
        for k in cols {
            let (x, y) = self.apply(m[(p, k)], m[(q, k)]);
            m[(p, k)] = x;
            m[(q, k)] = y;
        }
    }

    /// Right-multiplies columns `(p, q)` by `W = [[c, s], [-conj(s), c]]`:
    /// `col_p <- c col_p - conj(s) col_q`, `col_q <- s col_p + c col_q`.
    pub fn rotate_cols(&self, m: &mut ComplexMatrix, p: usize, q: usize) {
        for k in 0..m.rows() {
            let x = m[(k, p)];
            let y = m[(k, q)];
            m[(k, p)] = self.c * x - self.s.conj() * y;
            m[(k, q)] = self.s * x + self.c * y;
        }
    }

    /// Column rotation on `(p, q)` that zeroes `m[(row, p)]` using `m[(row, q)]`.
    pub fn zeroing_col(m: &ComplexMatrix, row: usize, p: usize, q: usize) -> Self {
        Self::new(m[(row, q)], m[(row, p)]).0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn annihilates_second_component() {
        let cases = [
            (c64(1.0, 2.0), c64(-0.5, 0.3)),
            (ZERO, c64(0.0, 2.0)),
            (c64(3.0, 0.0), ZERO),
            (c64(1e-200, 0.0), c64(1e-200, 1e-200)),
        ];
        for (a, b) in cases {
            let (g, r) = Givens::new(a, b);
            let (x, y) = g.apply(a, b);
            assert!((x - r).norm() <= 1e-15 * r.norm().max(1e-300));
            assert!(y.norm() <= 1e-15 * r.norm().max(1e-300));
            assert!((g.c * g.c + g.s.norm_sqr() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_target_gives_exact_identity() {
        let (g, r) = Givens::new(c64(2.0, -1.0), ZERO);
        assert_eq!(g, Givens::IDENTITY);
        assert_eq!(r, c64(2.0, -1.0));
    }

    #[test]
    fn column_rotation_zeroes_target() {
        let mut m = ComplexMatrix::from_real_rows(&[&[1.0, 2.0], &[3.0, 4.0]]).unwrap();
        let g = Givens::zeroing_col(&m, 1, 0, 1);
        g.rotate_cols(&mut m, 0, 1);
        assert!(m[(1, 0)].norm() < 1e-15);
        assert!((m[(1, 1)].norm() - 5.0).abs() < 1e-14);
    }
}
