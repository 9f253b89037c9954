//! Experiment configuration, file formats, drivers and the command line.

pub mod cli;
pub mod config;
pub mod container;
pub mod experiments;
pub mod images;

pub use config::{logspace, ExperimentConfig, NoiseConfig, PhantomKind, SolverKind, SweepConfig};
pub use experiments::{
    evaluate, reconstruct, run_experiment, simulate, sweep, table, Problem, Reconstruction, SweepRow, TableRow,
};
