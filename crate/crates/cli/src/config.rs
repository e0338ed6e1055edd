//! Config-file parsing. Documents are TOML with a fail-closed schema:
//! unknown keys are rejected and parse errors cite line and key. The only
//! implicit defaults are fitness (two_max), distance (genotypic), policy
//! (with_replacement) and, for grids, runs (100).

use serde::Deserialize;

use rtslab_core::engine::{AlgorithmConfig, AlgorithmKind, SelectionPolicy, StopCriteria};
use rtslab_core::experiments::{BudgetFormula, ExperimentSpec, Protocol, WindowEntry};
use rtslab_core::{DistanceKind, FitnessKind};

fn default_policy() -> SelectionPolicy {
    SelectionPolicy::WithReplacement
}

fn default_distance() -> DistanceKind {
    DistanceKind::Genotypic
}

fn default_fitness() -> FitnessKind {
    FitnessKind::TwoMax
}

fn default_runs() -> usize {
    100
}

/// Config document for `rtslab run`.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunDocument {
    pub algorithm: AlgorithmSection,
    pub stop: StopSection,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgorithmSection {
    pub n: usize,
    pub mu: usize,
    pub w: usize,
    pub kind: AlgorithmKind,
    #[serde(default = "default_policy")]
    pub policy: SelectionPolicy,
    #[serde(default = "default_distance")]
    pub distance: DistanceKind,
    #[serde(default = "default_fitness")]
    pub fitness: FitnessKind,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StopSection {
    pub require_both_optima: bool,
    #[serde(default)]
    pub budget: Option<u64>,
    pub stagnation_collapse: bool,
    pub stagnation_w_minus_one: bool,
}

impl RunDocument {
    pub fn into_config(self) -> AlgorithmConfig {
        AlgorithmConfig {
            n: self.algorithm.n,
            mu: self.algorithm.mu,
            w: self.algorithm.w,
            kind: self.algorithm.kind,
            policy: self.algorithm.policy,
            distance: self.algorithm.distance,
            fitness: self.algorithm.fitness,
            stop: StopCriteria {
                require_both_optima: self.stop.require_both_optima,
                budget: self.stop.budget,
                stagnation_collapse: self.stop.stagnation_collapse,
                stagnation_w_minus_one: self.stop.stagnation_w_minus_one,
            },
        }
    }
}

/// Config document for `rtslab grid`.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridDocument {
    pub experiment: ExperimentSection,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    pub protocol: Protocol,
    pub n: usize,
    pub mu: Vec<usize>,
    /// Window sizes: integers, or the string "mu" for w = mu per cell.
    pub w: Vec<WindowEntry>,
    #[serde(default = "default_policy")]
    pub policy: SelectionPolicy,
    #[serde(default = "default_distance")]
    pub distance: DistanceKind,
    #[serde(default = "default_fitness")]
    pub fitness: FitnessKind,
    #[serde(default = "default_runs")]
    pub runs: usize,
    pub budget: BudgetFormula,
}

impl GridDocument {
    pub fn into_spec(self, master_seed: u64) -> ExperimentSpec {
        ExperimentSpec {
            protocol: self.experiment.protocol,
            n: self.experiment.n,
            mu_list: self.experiment.mu,
            w_list: self.experiment.w,
            policy: self.experiment.policy,
            distance: self.experiment.distance,
            fitness: self.experiment.fitness,
            runs: self.experiment.runs,
            budget: self.experiment.budget,
            master_seed,
        }
    }
}

pub fn parse_run_document(text: &str) -> Result<AlgorithmConfig, String> {
    toml::from_str::<RunDocument>(text)
        .map(RunDocument::into_config)
        .map_err(|e| e.to_string())
}

pub fn parse_grid_document(text: &str, master_seed: u64) -> Result<ExperimentSpec, String> {
    toml::from_str::<GridDocument>(text)
        .map(|doc| doc.into_spec(master_seed))
        .map_err(|e| e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_run_document_uses_defaults() {
        let cfg = parse_run_document(
            "[algorithm]\nn = 100\nmu = 32\nw = 8\nkind = \"rts\"\n\
             [stop]\nrequire_both_optima = true\nstagnation_collapse = false\n\
             stagnation_w_minus_one = false\nbudget = 147366\n",
        )
        .unwrap();
        assert_eq!(cfg.policy, SelectionPolicy::WithReplacement);
        assert_eq!(cfg.distance, DistanceKind::Genotypic);
        assert_eq!(cfg.fitness, FitnessKind::TwoMax);
        assert_eq!(cfg.stop.budget, Some(147_366));
    }

    #[test]
    fn unknown_keys_are_rejected_with_name_and_line() {
        let err = parse_run_document(
            "[algorithm]\nn = 4\nmu = 2\nw = 1\nkind = \"rts\"\nwindowsize = 9\n\
             [stop]\nrequire_both_optima = true\nstagnation_collapse = false\n\
             stagnation_w_minus_one = false\n",
        )
        .unwrap_err();
        assert!(err.contains("windowsize"), "{err}");
        assert!(err.contains("line 6"), "{err}");
    }

    #[test]
    fn symbolic_window_entries_parse() {
        let spec = parse_grid_document(
            "[experiment]\nprotocol = \"runtime_growth\"\nn = 100\nmu = [2, 4]\n\
             w = [2, \"mu\"]\nbudget = \"unbounded\"\npolicy = \"without_replacement\"\n",
            9,
        )
        .unwrap();
        assert_eq!(spec.runs, 100);
        assert_eq!(spec.w_list.len(), 2);
        assert_eq!(spec.w_list[1].resolve(4), 4);
        assert_eq!(spec.master_seed, 9);
    }
}
