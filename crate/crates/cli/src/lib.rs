//! Library side of the `nlsig` command: CSV ingestion, the fit pipeline and
//! report writing. The binary only parses arguments and maps errors to exit
//! codes.

pub mod error;
pub mod ingest;
pub mod report;
pub mod run;

pub use error::{CliError, Result};
pub use ingest::{ingest, write_generic_csv, Format, IngestConfig, Ingested, Selector, SeriesKind};
pub use report::{FitReport, PlotRow};
pub use run::{run_fit, run_to_dir, PhaseCount, RunOptions, RunOutput};
