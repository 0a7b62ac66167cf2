//! Complete stagnation: the cyclic shift with `b = e_1` makes no progress
//! until step n, and every harmonic Ritz value before that is infinite.
//!
//! cargo run --example cyclic_shift -- 6

use staglab::diagnostics::Thresholds;
use staglab::instances::cyclic_shift_instance;
use staglab::pipeline::analyze;

fn main() -> staglab::Result<()> {
    let n = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(5);
    let inst = cyclic_shift_instance(n)?;
    let a = analyze(inst.operator(), &inst.rhs, n, 1e-12, &Thresholds::default())?;
    for s in &a.steps {
        let inf = s.pairs.iter().filter(|p| p.is_infinite()).count();
        println!(
            "m = {}  ||r_m|| = {:.3}  stagnated = {:5}  infinite pairs = {inf}/{}",
            s.record.m,
            s.record.resnorm,
            s.report.stagnated,
            s.pairs.len()
        );
    }
    println!("status: {:?}", a.status);
    Ok(())
}
