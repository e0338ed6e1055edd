//! Simulation laboratory for steady-state evolutionary algorithms with
//! restricted tournament selection on the bimodal TwoMax function.
//!
//! The crate has four layers:
//!
//! * [`genome`], [`fitness`], [`distance`], [`rng`] — bitstring genomes,
//!   the TwoMax family, the two tournament distance measures, and the
//!   seed-deterministic random source,
//! * [`engine`] — one-generation steps for the EA variants and the full run
//!   loop with stopping rules and branch instrumentation,
//! * [`oracle`] — exact Markov-chain ground truth for tiny instances, used
//!   to validate the stochastic engine,
//! * [`experiments`] — reproducible parameter-grid execution with derived
//!   per-run seeds, plus [`validate`] with the full check suite.

pub mod distance;
pub mod engine;
pub mod experiments;
pub mod fitness;
pub mod genome;
pub mod oracle;
pub mod rng;
pub mod stats;
pub mod validate;

pub use distance::{distance, DistanceKind};
pub use engine::{
    branch_stats, init_population, run, run_with_observer, AlgorithmConfig, AlgorithmKind,
    BranchStats, EngineError, Population, RunResult, RunStatus, SelectionPolicy, StopCriteria,
};
pub use fitness::{evaluate, twomax_minimum, FitnessKind};
pub use genome::{mutate, ones, random_genome, Genome};
pub use rng::RandomSource;
