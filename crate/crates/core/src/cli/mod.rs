//! Command-line front end: CSV ingestion, preprocessing, reports and the
//! `analyze`, `simulate`, `thresholds` and `diagnose` commands.

mod analyze;
mod app;
mod dataset;
mod diagnose;
mod preprocess;
mod report;

pub use analyze::{analyze, rerun, AnalyzeOptions, GroupReport, Provenance, ReportDocument, TauSummary};
pub use app::{run, EXIT_IO, EXIT_OK, EXIT_VALIDATION};
pub use dataset::{load_csv, ColumnMap, DataSource, Dataset, PhaseLabels};
pub use diagnose::{resampling_diagnostic, Diagnostic, MIN_REPLICATES};
pub use preprocess::{hampel_bounds, standardize_by_pre, winsorize_hampel, Preprocessing, Winsorized};
pub use report::{format_p, render_text, significance_code, P_FLOOR};
