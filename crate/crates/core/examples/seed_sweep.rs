//! Every invariant checked over a batch of seeded random instances, in
//! parallel.
//!
//! cargo run --release --example seed_sweep -- 10 100

use staglab::diagnostics::Thresholds;
use staglab::verify::seed_sweep;

fn main() -> staglab::Result<()> {
    let mut args = std::env::args().skip(1);
    let n = args.next().and_then(|s| s.parse().ok()).unwrap_or(10);
    let count = args.next().and_then(|s| s.parse().ok()).unwrap_or(100);
    let out = seed_sweep(n, count, &Thresholds::default())?;
    let mut clean = 0;
    for o in &out {
        if o.violations.is_empty() {
            clean += 1;
        }
        for v in &o.violations {
            println!("seed {}: {v}", o.seed);
        }
    }
    println!("{clean} of {} instances clean", out.len());
    Ok(())
}
