//! Command-line surface: config files, output files, sweeps and plots.

pub mod cli;
pub mod config;
pub mod io;
pub mod plot;
pub mod sweep;

pub use config::{parse_config, render};
pub use io::write_outputs;
pub use sweep::{run_sweep, SweepParam, SweepSpec, SweepSummary};
