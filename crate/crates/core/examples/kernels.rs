//! The dense kernels on their own: Hessenberg least squares, the smallest
//! singular triplet, and a pencil whose `B` is nilpotent.
//!
//! cargo run --example kernels

use staglab::numeric::{c64, qr_hessenberg_ls, smallest_singular_triplet, solve_pencil, ComplexMatrix, ONE};

fn main() -> staglab::Result<()> {
    let h = ComplexMatrix::from_real_rows(&[&[1.0, 1.0], &[1.0, 0.0], &[0.0, 1.0]])?;
    let (x, res) = qr_hessenberg_ls(&h, &[ONE, c64(0.0, 0.0), c64(0.0, 0.0)])?;
    println!("least squares: x = ({:.6}, {:.6}), residual {res:.15}", x[0].re, x[1].re);

    let m = ComplexMatrix::from_real_rows(&[&[1.0, 1.0], &[1.0, 0.0]])?;
    let t = smallest_singular_triplet(&m)?;
    println!("sigma_min = {:.15} (golden ratio - 1)", t.sigma_min);

    let a = ComplexMatrix::identity(3);
    let mut b = ComplexMatrix::zeros(3, 3);
    b[(0, 1)] = ONE;
    b[(1, 2)] = ONE;
    for p in solve_pencil(&a, &b)? {
        println!("alpha = {:.3}, beta = {:.1e}, infinite = {}", p.alpha, p.beta.norm(), p.infinite);
    }
    Ok(())
}
