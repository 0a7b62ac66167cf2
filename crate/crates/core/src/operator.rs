use crate::numeric::{Complex64, ComplexMatrix};

/// Matrix-vector action `x -> A x` on `C^n`.
pub trait LinearOperator: Send + Sync {
    fn dim(&self) -> usize;

    fn apply(&self, x: &[Complex64]) -> Vec<Complex64>;

    /// `||A||_F` when it is cheap to know. Diagnostics fall back to the
    /// Frobenius norm of the projected Hessenberg matrix otherwise.
    fn frobenius_norm(&self) -> Option<f64> {
        None
    }
}

impl LinearOperator for ComplexMatrix {
    fn dim(&self) -> usize {
        assert!(self.is_square(), "operator matrix must be square");
        self.rows()
    }

    fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        self.matvec(x)
    }

    fn frobenius_norm(&self) -> Option<f64> {
        Some(ComplexMatrix::frobenius_norm(self))
    }
}

/// Wraps a closure as an operator of the given dimension.
pub struct FnOperator<F> {
    dim: usize,
    f: F,
}

impl<F> FnOperator<F>
where
    F: Fn(&[Complex64]) -> Vec<Complex64> + Send + Sync,
{
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F> LinearOperator for FnOperator<F>
where
    F: Fn(&[Complex64]) -> Vec<Complex64> + Send + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        (self.f)(x)
    }
}
