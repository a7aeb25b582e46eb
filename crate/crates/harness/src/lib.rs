//! Replicate-study orchestration, data ingestion and output for the
//! `stable-abc` command-line tool.

pub mod config;
pub mod currency;
pub mod curve;
pub mod error;
pub mod io;
pub mod study;
pub mod summarize;

pub use config::{Mode, StudyConfig};
pub use curve::{spectral_mass_curve, MassCurve};
pub use error::{HarnessError, Result};
pub use io::{load_series_csv, log_returns, SeriesTable};
pub use study::{run_replicates, write_study, StudyResult};
