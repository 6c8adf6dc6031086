//! Seeded regret experiments: configuration, execution, aggregation and CSV output.

pub mod config;
pub mod csv;
pub mod run;

pub use config::{AgentSpec, AlgorithmSpec, ExperimentConfig, PacMode, PacTask};
pub use run::{
    aggregate, run_agent, run_experiment, run_pac_experiment, AggregateRow, Checkpoint, PacSummary,
    RunRecord,
};
