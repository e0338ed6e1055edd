//! Fitness functions over bitstrings: TwoMax and its two slopes.

use serde::{Deserialize, Serialize};

use crate::genome::Genome;

/// Which fitness function a run optimizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitnessKind {
    /// `max(n - ones, ones)`; bimodal with optima at the all-zeros and
    /// all-ones strings.
    TwoMax,
    /// Number of 1-bits.
    OneMax,
    /// Number of 0-bits.
    ZeroMax,
}

impl FitnessKind {
    /// Stable lowercase token used in CSV output and config files.
    pub fn token(self) -> &'static str {
        match self {
            FitnessKind::TwoMax => "two_max",
            FitnessKind::OneMax => "one_max",
            FitnessKind::ZeroMax => "zero_max",
        }
    }
}

/// Evaluate `kind` on a genome.
#[inline]
pub fn evaluate(kind: FitnessKind, g: &Genome) -> usize {
    evaluate_ones(kind, g.ones(), g.len())
}

/// Evaluate `kind` given a precomputed ones count.
#[inline]
pub fn evaluate_ones(kind: FitnessKind, ones: usize, n: usize) -> usize {
    debug_assert!(ones <= n);
    match kind {
        FitnessKind::TwoMax => (n - ones).max(ones),
        FitnessKind::OneMax => ones,
        FitnessKind::ZeroMax => n - ones,
    }
}

/// Minimum attainable TwoMax value, `ceil(n/2)`; also the sentinel reported
/// for a branch that was never occupied.
#[inline]
pub fn twomax_minimum(n: usize) -> usize {
    n.div_ceil(2)
}
