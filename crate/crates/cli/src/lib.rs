//! Library backing the `mmcsp` command-line tool: dataset serialization
//! and the subcommand implementations, exposed as functions so experiment
//! suites can drive them in-process.

pub mod commands;
pub mod error;
pub mod manifest;
pub mod report;

pub use commands::{
    cmd_classify, cmd_fit, cmd_synth, cmd_trace, fit_filters, prepare_dataset, ClassifyOptions,
    FitOptions, Method, SynthOptions, TraceOptions,
};
pub use error::{CliError, Result};
pub use manifest::{load_dataset, save_dataset, DatasetManifest};
