//! Experiment grid execution: config, runner, summaries and result files.

mod config;
mod report;
mod runner;

pub use config::{DatasetSource, ExperimentGrid, MethodConfig, Seeds, SyntheticSpec};
pub use report::{
    emit_plotdata, emit_results, errors_csv, plotdata_csv, results_csv, standard_summaries, summarize, summarize_by,
    summary_csv, GroupKey, Manifest, Summary, SummaryRow, RESULTS_HEADER,
};
pub use runner::{amputation_seed, fit_cell, method_seed, run_grid, run_grid_on, split_seed, ResultRow, RunOptions};
