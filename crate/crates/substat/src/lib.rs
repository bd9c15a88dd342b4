//! File formats, configuration, parallel experiment running and the
//! `substat` command-line tool on top of `substat-core`.

pub mod cli;
pub mod config;
pub mod error;
pub mod grid;
pub mod pipeline;
pub mod points;
pub mod runner;

pub use error::{Error, Result};
pub use grid::{export_intensity_grid, GridExport};
pub use pipeline::{run_application_pipeline, ApplyOptions, ApplyReport};
pub use points::{ingest_csv, read_pattern, write_pattern, RegionSpec};
