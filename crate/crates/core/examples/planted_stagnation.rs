//! Stagnation planted at chosen steps through singular leading Hessenberg
//! blocks, with the four indicators and pair persistence at each step.
//!
//! cargo run --example planted_stagnation -- 8 3+4 1

use staglab::diagnostics::Thresholds;
use staglab::instances::{parse_steps, planted_singular_hessenberg};
use staglab::pipeline::analyze;

fn main() -> staglab::Result<()> {
    let mut args = std::env::args().skip(1);
    let n = args.next().and_then(|s| s.parse().ok()).unwrap_or(8);
    let steps = parse_steps(&args.next().unwrap_or_else(|| "3+4".into()))?;
    let seed = args.next().and_then(|s| s.parse().ok()).unwrap_or(1);

    let inst = planted_singular_hessenberg(n, &steps, seed)?;
    let a = analyze(inst.operator(), &inst.rhs, n, 0.0, &Thresholds::default())?;
    println!("planted {:?}, observed {:?}", steps, a.stagnated_steps());
    println!(" m  [K, e_m*y, sing H_m, e_m*u]  consistent  persistence");
    for s in &a.steps {
        let pers = match &s.persistence {
            Some(p) if p.vacuous => "vacuous".to_string(),
            Some(p) => format!("matched={} max angle {:.1e}", p.all_matched, p.max_angle),
            None => "-".into(),
        };
        println!(
            "{:2}  {:?}  {:10}  {pers}",
            s.record.m,
            s.report.indicators(),
            s.report.predicates_consistent
        );
    }
    Ok(())
}
