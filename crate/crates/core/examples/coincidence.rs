//! Harmonic residual versus GMRES residual: `A V_m u - sigma V_m u` is a
//! multiple of `r_m` exactly when `e_m^* u = -K_scale e_m^* y`. A perturbed
//! vector breaks both sides together.
//!
//! cargo run --example coincidence

use staglab::diagnostics::{coincidence_check, coincidence_for_vector, stagnation_report, Thresholds};
use staglab::gmres::GmresState;
use staglab::harmonic::harmonic_pairs;
use staglab::instances::random_instance;
use staglab::numeric::c64;

fn main() -> staglab::Result<()> {
    let inst = random_instance(8, 2)?;
    let t = Thresholds::default();
    let mut state = GmresState::new(inst.operator(), &inst.rhs)?;
    state.run(4, 0.0)?;
    let m = 4;
    let pairs = harmonic_pairs(state.arnoldi(), m)?;
    let report = stagnation_report(&state, &pairs, m, &t)?;
    for i in 0..pairs.len() {
        let c = coincidence_check(&state, &pairs, i, &report, &t)?;
        println!(
            "pair {i}: K_scale = {:.6}  condition {:.1e}  vector {:.1e}",
            c.k_scale, c.condition_error, c.vector_error
        );
    }

    let p = &pairs[0];
    let sigma = p.sigma().expect("finite");
    let c = coincidence_check(&state, &pairs, 0, &report, &t)?;
    let mut u = p.u().to_vec();
    u[m - 1] += c64(0.1, 0.0);
    let bad = coincidence_for_vector(&state, m, sigma, &u, Some(c.k_scale), &t)?;
    println!(
        "perturbed: condition {:.1e}  vector {:.1e}  biconditional holds: {}",
        bad.condition_error,
        bad.vector_error,
        bad.biconditional_holds()
    );
    Ok(())
}
