//! Benchmark harness behind the `ddid` command line: experiment
//! configuration, the sweep runner, gap computation and tabular reports.

pub mod config;
pub mod harness;

pub use config::{parse_config, resolve_engine, ConfigMap};
pub use harness::{
    compute_gap, run_experiment, ExperimentConfig, InstanceSpec, MethodSpec, Report, RunRecord,
};
