//! The GMRES residual polynomial `p` with `r_m = p(A) r_0`: its roots are
//! the finite harmonic Ritz values.
//!
//! cargo run --example residual_polynomial

use staglab::gmres::GmresState;
use staglab::harmonic::{harmonic_pairs, residual_polynomial};
use staglab::instances::{paper_example, random_instance};

fn show(name: &str, inst: staglab::instances::ProblemInstance, m: usize) -> staglab::Result<()> {
    let mut state = GmresState::new(inst.operator(), &inst.rhs)?;
    state.run(m, 0.0)?;
    let p = residual_polynomial(&state, m)?;
    println!("{name}, m = {m} (Krylov condition {:.1e})", p.krylov_condition);
    let coeffs: Vec<String> = p.coefficients.iter().map(|c| format!("({:.6}, {:.6})", c.re, c.im)).collect();
    println!("  coefficients: {}", coeffs.join(", "));
    let mut roots: Vec<_> = p.roots()?.into_iter().flatten().collect();
    let mut ritz: Vec<_> = harmonic_pairs(state.arnoldi(), m)?.iter().filter_map(|q| q.sigma()).collect();
    let key = |z: &num_complex::Complex64| (z.re, z.im);
    roots.sort_by(|a, b| key(a).partial_cmp(&key(b)).unwrap());
    ritz.sort_by(|a, b| key(a).partial_cmp(&key(b)).unwrap());
    for (r, s) in roots.iter().zip(&ritz) {
        println!("  root {r:>26.10}   harmonic {s:>26.10}");
    }
    Ok(())
}

fn main() -> staglab::Result<()> {
    show("worked example", paper_example(), 2)?;
    show("random n = 8", random_instance(8, 5)?, 4)
}
