//! The 3x3 worked example: two GMRES steps, the harmonic Ritz pairs at
//! step 2 and the scale linking the harmonic residual to `r_2`.
//!
//! cargo run --example paper_example

use staglab::diagnostics::{coincidence_check, stagnation_report, Thresholds};
use staglab::gmres::GmresState;
use staglab::harmonic::harmonic_pairs;
use staglab::instances::paper_example;

fn main() -> staglab::Result<()> {
    let inst = paper_example();
    let mut state = GmresState::new(inst.operator(), &inst.rhs)?;
    state.run(2, 0.0)?;

    let y = state.y(2)?;
    let r2 = state.materialize_residual(2)?;
    println!("y   = ({:.6}, {:.6})", y[0].re, y[1].re);
    println!("r_2 = ({:.6}, {:.6}, {:.6})", r2[0].re, r2[1].re, r2[2].re);
    println!("||r_2|| = {:.15}", state.resnorm_history()[2]);

    let t = Thresholds::default();
    let pairs = harmonic_pairs(state.arnoldi(), 2)?;
    let report = stagnation_report(&state, &pairs, 2, &t)?;
    println!("K = {:.6}, gap = {:.6}, stagnated = {}", report.k.re, report.gap, report.stagnated);
    for (i, p) in pairs.iter().enumerate() {
        let sigma = p.sigma().expect("finite at step 2");
        let h = p.harmonic_residual.as_ref().expect("finite pair");
        let c = coincidence_check(&state, &pairs, i, &report, &t)?;
        println!(
            "sigma = {:+.10}  harmonic residual = ({:+.4}, {:+.4}, {:+.4})  K_scale = {:+.6}  defect = {:.1e}",
            sigma.re, h[0].re, h[1].re, h[2].re, c.k_scale.re, c.vector_error
        );
    }
    Ok(())
}
