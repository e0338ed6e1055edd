//! Distance measures between genomes used by the restricted tournament.

use serde::{Deserialize, Serialize};

use crate::genome::Genome;

/// Distance measure for tournament competitor selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistanceKind {
    /// Hamming distance: number of positions with differing bits.
    Genotypic,
    /// Absolute difference of ones counts.
    Phenotypic,
}

impl DistanceKind {
    /// Stable lowercase token used in CSV output and config files.
    pub fn token(self) -> &'static str {
        match self {
            DistanceKind::Genotypic => "genotypic",
            DistanceKind::Phenotypic => "phenotypic",
        }
    }
}

/// Distance between two genomes of equal length.
///
/// Unequal lengths are a usage error and panic.
#[inline]
pub fn distance(kind: DistanceKind, x: &Genome, y: &Genome) -> usize {
    assert_eq!(x.len(), y.len(), "genomes must have equal length");
    match kind {
        DistanceKind::Genotypic => x.hamming(y),
        DistanceKind::Phenotypic => x.ones().abs_diff(y.ones()),
    }
}
