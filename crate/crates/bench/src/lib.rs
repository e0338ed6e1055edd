//! Shared fixtures for the benchmarks.

use rtslab_core::engine::{AlgorithmConfig, AlgorithmKind, SelectionPolicy, StopCriteria};
use rtslab_core::{DistanceKind, FitnessKind};

/// Restricted-tournament configuration used by the hot-path benchmarks.
pub fn bench_config(n: usize, mu: usize, w: usize, distance: DistanceKind) -> AlgorithmConfig {
    AlgorithmConfig {
        n,
        mu,
        w,
        kind: AlgorithmKind::Rts,
        policy: SelectionPolicy::WithoutReplacement,
        distance,
        fitness: FitnessKind::TwoMax,
        stop: StopCriteria::both_optima_or_budget(1_000_000),
    }
}
