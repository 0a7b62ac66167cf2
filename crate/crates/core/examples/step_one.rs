//! Stagnation at the very first step: `b` is chosen with `b^* A b = 0`, so
//! `H_1 = 0` and the first GMRES iterate is zero.
//!
//! cargo run --example step_one -- 6 0

use staglab::diagnostics::Thresholds;
use staglab::instances::step_one_stagnation;
use staglab::numeric::dot;
use staglab::pipeline::analyze;

fn main() -> staglab::Result<()> {
    let mut args = std::env::args().skip(1);
    let n = args.next().and_then(|s| s.parse().ok()).unwrap_or(6);
    let seed = args.next().and_then(|s| s.parse().ok()).unwrap_or(0);

    let inst = step_one_stagnation(n, seed)?;
    let ab = inst.matrix.matvec(&inst.rhs);
    println!("|b^* A b| = {:.2e}", dot(&inst.rhs, &ab).norm());
    let a = analyze(inst.operator(), &inst.rhs, n, 0.0, &Thresholds::default())?;
    let hist = a.state.resnorm_history();
    println!("||r_0|| = {:.6}, ||r_1|| = {:.6}, ||r_2|| = {:.6}", hist[0], hist[1], hist[2]);
    println!("stagnated steps: {:?}", a.stagnated_steps());
    Ok(())
}
