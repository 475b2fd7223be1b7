//! Seeded Monte Carlo driver reproducing the edge-change and node-change
//! comparisons, with aggregation and plot-ready per-node dumps.

mod aggregate;
mod config;
mod dump;
mod trial;

pub use aggregate::{
    format_table, read_results_csv, run_experiment, run_experiment_with_progress,
    write_results_csv, write_trials_csv, AggregateRow, ExperimentReport, MethodStats, TrialFailure,
};
pub use config::{Cell, ExperimentConfig, GraphKind, MseScope, PerturbationKind, PsdKind};
pub use dump::{dump_recovery, write_dump_csv, write_dump_edges_csv, DumpRow, RecoveryDump};
pub use trial::{run_trial, trial_seed, TrialDiagnostics, TrialResult};
