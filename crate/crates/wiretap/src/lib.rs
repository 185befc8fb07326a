//! Experiment harness, result files and command-line front end for `wiretap-core`.
//!
//! ```no_run
//! use wiretap::harness::{run_sweep, Preset};
//! use wiretap::io::{emit_results, OutputFormat};
//!
//! let records = run_sweep(&Preset::Fig2.config(Some(5), 42)).unwrap();
//! emit_results(&records, OutputFormat::Csv, "fig2.csv".as_ref()).unwrap();
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod gsvd_check;
pub mod harness;
pub mod io;

pub use error::{HarnessError, Result};
pub use harness::{empirical_sdof_slope, run_sweep, ExperimentConfig, Preset, Scheme, TrialRecord};
pub use io::{emit_results, parse_results, OutputFormat};
pub use wiretap_core as core;
