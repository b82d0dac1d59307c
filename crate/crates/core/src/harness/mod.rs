//! Experiment plumbing: configuration, the five commands and their
//! CSV/JSON reports.

mod config;
mod report;
mod run;

pub use config::{
    parse_d_list, parse_geometries, Command, ConfigOverrides, ExperimentConfig, OutputFormat,
    MAX_GRID_Q,
};
pub use report::{format_real, Cell, Report, ReportRow, SIGNIFICANT_DIGITS};
pub use run::{
    agreement, emit, metadata, render, run, run_analytic, run_asymptotic, run_compare,
    run_scalability, run_simulate, Agreement, RunOutput, TOOL_NAME, TOOL_VERSION,
};
