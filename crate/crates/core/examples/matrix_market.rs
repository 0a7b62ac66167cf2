//! File round trip: write a generated instance as Matrix Market plus rhs,
//! read it back, run it, and write the JSON and CSV reports.
//!
//! cargo run --example matrix_market -- /tmp/staglab-demo

use std::path::PathBuf;

use staglab::instances::planted_singular_hessenberg;
use staglab::io::{read_instance, write_instance, write_report, ReportFormat, RunConfig, RunReport};
use staglab::pipeline::analyze;

fn main() -> staglab::Result<()> {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("staglab-demo"));
    let inst = planted_singular_hessenberg(6, &[3].into(), 0)?;
    write_instance(&inst, &dir)?;
    let back = read_instance(&dir)?;
    println!("instance written to {} and read back equal: {}", dir.display(), back == inst);

    let mut cfg = RunConfig::new(dir.display().to_string(), back.dim());
    cfg.conv_tol = 1e-12;
    let a = analyze(back.operator(), &back.rhs, cfg.max_iter, cfg.conv_tol, &cfg.thresholds)?;
    let report = RunReport::new(&cfg, &a);
    write_report(&report, dir.join("report.json"), ReportFormat::Json)?;
    write_report(&report, dir.join("report.csv"), ReportFormat::Csv)?;
    print!("{}", report.to_csv()?);
    Ok(())
}
