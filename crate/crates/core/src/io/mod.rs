//! File formats: Matrix Market matrices, right-hand-side files, instance
//! directories and run reports.

mod instance_dir;
mod mtx;
mod report;
mod rhs;

pub use instance_dir::{read_instance, write_instance, MATRIX_FILE, META_FILE, RHS_FILE};
pub use mtx::{format_matrix_market, parse_matrix_market, read_matrix_market, write_matrix_market};
pub use report::{
    quantize, read_report, write_report, CoincidenceSummary, Cplx, HarmonicSummary, IterationSummary,
    PersistenceSummary, ReportFormat, RunConfig, RunReport, CSV_HEADER, DEFAULT_CONV_TOL, SCHEMA,
};
pub use rhs::{format_rhs, parse_rhs, read_rhs, write_rhs, RhsSource};
