//! Simulated experiments: trial orchestration, aggregation, CSV and trace files.

pub mod sampling;
mod experiment;
mod trace_io;

pub use experiment::{
    read_trial_rows, run_experiment, trial_seed, write_aggregate_csv, write_trial_csv, AggregateResult, AggregateStats,
    ExperimentSpec, TrialRow, CSV_HEADER,
};
pub use sampling::multinomial_sample;
pub use trace_io::{
    format_constraints, format_object, format_trace, parse_constraints, parse_object, parse_trace, read_trace,
    write_trace,
};
