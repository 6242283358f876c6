//! Configuration, experiment orchestration and result files.

mod config;
mod experiment;
mod io;

pub use config::{load_profile, BaselineMode, ExperimentConfig, Preset, ScheduleKind};
pub use experiment::{
    analyze, coefficient_of_variation, measure_baseline, noise_study, repeat, repeat_to_dir,
    run_experiment, run_on, run_to_dir, sweep, sweep_to_dir, timing_report, write_run,
    NoisePoint, RepeatOutcome, RepeatRecord, RunOutcome, RunSummary, Setup, SweepOutcome,
    SweepRun, TimingSummary,
};
pub use io::{
    read_text, svg_line_plot, trace_from_csv, trace_to_csv, write_atomic, Series, TRACE_HEADER,
};
