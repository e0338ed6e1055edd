//! Parameter-grid orchestration for the three experimental protocols:
//! success-rate grids under a generation budget, unbounded runtime-growth
//! runs with the near-optimal stagnation stop, and takeover measurement.
//!
//! Grids are reproducible by construction: every run's seed is derived from
//! the master seed and the (cell, run) position, so reports are byte-stable
//! under any degree of parallelism.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::{
    self, AlgorithmConfig, AlgorithmKind, EngineError, RunResult, SelectionPolicy, StopCriteria,
};
use crate::distance::DistanceKind;
use crate::fitness::FitnessKind;
use crate::rng::splitmix64_finalize;

/// Generation-budget formula for a grid cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BudgetFormula {
    /// `ceil(10 mu n ln n)`.
    Standard,
    /// `ceil(100 max(1, mu/w) mu n ln n)`.
    Enhanced,
    Unbounded,
}

impl BudgetFormula {
    pub fn token(self) -> &'static str {
        match self {
            BudgetFormula::Standard => "standard",
            BudgetFormula::Enhanced => "enhanced",
            BudgetFormula::Unbounded => "unbounded",
        }
    }
}

/// Generation limit for a cell, `None` when unbounded.
pub fn budget(formula: BudgetFormula, mu: usize, w: usize, n: usize) -> Option<u64> {
    let base = 10.0 * mu as f64 * n as f64 * (n as f64).ln();
    match formula {
        BudgetFormula::Standard => Some(base.ceil() as u64),
        BudgetFormula::Enhanced => {
            let factor = (mu as f64 / w as f64).max(1.0);
            Some((10.0 * factor * base).ceil() as u64)
        }
        BudgetFormula::Unbounded => None,
    }
}

/// Deterministic 64-bit seed for run `run_index` of cell `cell_index`.
///
/// Both indices are avalanched independently and folded into the master seed
/// through a splitmix64-style finalizer; distinct (cell, run) pairs collide
/// with probability about 2^-64.
pub fn derive_seed(master: u64, cell_index: u64, run_index: u64) -> u64 {
    let a = splitmix64_finalize(cell_index ^ 0x243f_6a88_85a3_08d3);
    let b = splitmix64_finalize(run_index ^ 0x1319_8a2e_0370_7344);
    splitmix64_finalize(master ^ a ^ b.rotate_left(32))
}

/// Experimental protocol; decides the stopping rules of every run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Protocol {
    /// Success or budget exhaustion.
    SuccessRate,
    /// Success or the near-optimal stagnation pattern; no budget.
    RuntimeGrowth,
    /// Success or loss of the second niche; no budget.
    Takeover,
}

impl Protocol {
    pub fn token(self) -> &'static str {
        match self {
            Protocol::SuccessRate => "success_rate",
            Protocol::RuntimeGrowth => "runtime_growth",
            Protocol::Takeover => "takeover",
        }
    }
}

/// One window-size grid entry: a fixed value or "w = mu per cell".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum WindowEntry {
    Fixed(usize),
    Symbolic(SymbolicWindow),
}

/// The only symbolic window form, rendered as the string `"mu"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SymbolicWindow {
    Mu,
}

impl WindowEntry {
    pub fn resolve(self, mu: usize) -> usize {
        match self {
            WindowEntry::Fixed(w) => w,
            WindowEntry::Symbolic(SymbolicWindow::Mu) => mu,
        }
    }
}

/// Full description of one grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub protocol: Protocol,
    pub n: usize,
    pub mu_list: Vec<usize>,
    pub w_list: Vec<WindowEntry>,
    pub policy: SelectionPolicy,
    pub distance: DistanceKind,
    pub fitness: FitnessKind,
    pub runs: usize,
    pub budget: BudgetFormula,
    pub master_seed: u64,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<(), EngineError> {
        if self.runs < 1 {
            return Err(EngineError::InvalidConfig("runs must be at least 1".into()));
        }
        if self.mu_list.is_empty() || self.w_list.is_empty() {
            return Err(EngineError::InvalidConfig(
                "mu and w lists must be nonempty".into(),
            ));
        }
        if self.mu_list.iter().any(|&m| m < 1) || self.n < 1 {
            return Err(EngineError::InvalidConfig("n and mu must be at least 1".into()));
        }
        if self
            .w_list
            .iter()
            .any(|w| matches!(w, WindowEntry::Fixed(0)))
        {
            return Err(EngineError::InvalidConfig("w must be at least 1".into()));
        }
        match self.protocol {
            Protocol::SuccessRate => {
                if self.budget == BudgetFormula::Unbounded {
                    return Err(EngineError::InvalidConfig(
                        "the success-rate protocol requires a standard or enhanced budget".into(),
                    ));
                }
            }
            Protocol::RuntimeGrowth | Protocol::Takeover => {
                if self.budget != BudgetFormula::Unbounded {
                    return Err(EngineError::InvalidConfig(
                        "runtime-growth and takeover protocols run unbounded".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Cells in report order: mu-major over the given lists.
    pub fn cells(&self) -> Vec<CellKey> {
        let mut cells = Vec::with_capacity(self.mu_list.len() * self.w_list.len());
        let mut index = 0;
        for &mu in &self.mu_list {
            for &entry in &self.w_list {
                cells.push(CellKey {
                    cell_index: index,
                    mu,
                    w: entry.resolve(mu),
                });
                index += 1;
            }
        }
        cells
    }

    /// Engine configuration for one cell.
    pub fn config_for(&self, key: &CellKey) -> AlgorithmConfig {
        let stop = match self.protocol {
            Protocol::SuccessRate => StopCriteria {
                require_both_optima: true,
                budget: budget(self.budget, key.mu, key.w, self.n),
                stagnation_collapse: false,
                stagnation_w_minus_one: false,
            },
            Protocol::RuntimeGrowth => StopCriteria {
                require_both_optima: true,
                budget: None,
                stagnation_collapse: true,
                stagnation_w_minus_one: true,
            },
            Protocol::Takeover => StopCriteria {
                require_both_optima: true,
                budget: None,
                stagnation_collapse: true,
                // A tournament drawn without replacement can never empty the
                // population of near-optimal members, so full collapse is
                // unreachable; the near-optimal pattern is the terminal state.
                stagnation_w_minus_one: self.policy == SelectionPolicy::WithoutReplacement,
            },
        };
        AlgorithmConfig {
            n: self.n,
            mu: key.mu,
            w: key.w,
            kind: AlgorithmKind::Rts,
            policy: self.policy,
            distance: self.distance,
            fitness: self.fitness,
            stop,
        }
    }

    /// Total offspring generations the grid may cost in the worst case,
    /// when a budget formula applies.
    pub fn worst_case_generations(&self) -> Option<u64> {
        if self.budget == BudgetFormula::Unbounded {
            return None;
        }
        let mut total: u64 = 0;
        for key in self.cells() {
            let cell = budget(self.budget, key.mu, key.w, self.n)?;
            total = total.saturating_add(cell.saturating_mul(self.runs as u64));
        }
        Some(total)
    }
}

/// Grid cell position and resolved parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellKey {
    pub cell_index: usize,
    pub mu: usize,
    pub w: usize,
}

/// Outcome of one run inside a cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunRecord {
    pub run_index: usize,
    pub seed: u64,
    pub result: RunResult,
}

/// Aggregates over one cell's runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub key: CellKey,
    pub runs: usize,
    pub success_count: usize,
    pub lone_count: usize,
    pub mean_generations: f64,
    pub std_generations: f64,
    pub mean_min_branch_best: f64,
    pub std_min_branch_best: f64,
    /// Per-run records back the runs.csv output; the JSON report mirrors
    /// cells.csv and omits them.
    #[serde(skip_serializing, default)]
    pub records: Vec<RunRecord>,
}

/// Aggregate run records into a cell result (sample standard deviation).
pub fn aggregate_cell(key: CellKey, records: Vec<RunRecord>) -> CellResult {
    let runs = records.len();
    let success_count = records
        .iter()
        .filter(|r| r.result.status == engine::RunStatus::Success)
        .count();
    let lone_count = records.iter().filter(|r| r.result.lone_occurred).count();
    let generations: Vec<f64> = records.iter().map(|r| r.result.generations as f64).collect();
    let min_best: Vec<f64> = records
        .iter()
        .map(|r| r.result.min_branch_best() as f64)
        .collect();
    let (mean_generations, std_generations) = crate::stats::mean_and_sample_std(&generations);
    let (mean_min_branch_best, std_min_branch_best) = crate::stats::mean_and_sample_std(&min_best);
    CellResult {
        key,
        runs,
        success_count,
        lone_count,
        mean_generations,
        std_generations,
        mean_min_branch_best,
        std_min_branch_best,
        records,
    }
}

/// A cell either aggregated or failed with a diagnostic.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum CellOutcome {
    Completed(CellResult),
    Failed {
        key: CellKey,
        run_index: usize,
        seed: u64,
        error: String,
    },
}

impl CellOutcome {
    pub fn key(&self) -> &CellKey {
        match self {
            CellOutcome::Completed(cell) => &cell.key,
            CellOutcome::Failed { key, .. } => key,
        }
    }

    pub fn as_completed(&self) -> Option<&CellResult> {
        match self {
            CellOutcome::Completed(cell) => Some(cell),
            CellOutcome::Failed { .. } => None,
        }
    }
}

/// Finished grid: one outcome per cell, in cell order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub spec: ExperimentSpec,
    pub cells: Vec<CellOutcome>,
}

impl Report {
    /// Completed cell for `(mu, w)`, when unique and successful.
    pub fn cell(&self, mu: usize, w: usize) -> Option<&CellResult> {
        self.cells
            .iter()
            .filter_map(|c| c.as_completed())
            .find(|c| c.key.mu == mu && c.key.w == w)
    }

    pub fn any_failed(&self) -> bool {
        self.cells.iter().any(|c| c.as_completed().is_none())
    }
}

/// Execute one cell: `runs` independent engine runs with derived seeds.
pub fn run_cell(spec: &ExperimentSpec, key: &CellKey) -> CellOutcome {
    let cfg = spec.config_for(key);
    let mut records = Vec::with_capacity(spec.runs);
    for run_index in 0..spec.runs {
        let seed = derive_seed(spec.master_seed, key.cell_index as u64, run_index as u64);
        match engine::run(&cfg, seed) {
            Ok(result) => records.push(RunRecord {
                run_index,
                seed,
                result,
            }),
            Err(error) => {
                return CellOutcome::Failed {
                    key: *key,
                    run_index,
                    seed,
                    error: error.to_string(),
                }
            }
        }
    }
    CellOutcome::Completed(aggregate_cell(*key, records))
}

/// Execute the whole grid. Runs are independent and executed in parallel;
/// the report is assembled in cell order regardless of scheduling. A cell
/// whose run violates a runtime invariant is marked failed and the remaining
/// cells still complete.
pub fn run_grid(spec: &ExperimentSpec) -> Result<Report, EngineError> {
    spec.validate()?;
    for key in spec.cells() {
        spec.config_for(&key).validate()?;
    }
    if spec.budget != BudgetFormula::Unbounded {
        for key in spec.cells() {
            let worst = budget(spec.budget, key.mu, key.w, spec.n)
                .unwrap_or(0)
                .saturating_mul(spec.runs as u64);
            if worst > 100_000_000 {
                eprintln!(
                    "warning: cell mu={} w={} may cost up to {worst} offspring generations",
                    key.mu, key.w
                );
            }
        }
    }
    let cells = spec.cells();
    let tasks: Vec<(usize, usize)> = cells
        .iter()
        .flat_map(|key| (0..spec.runs).map(move |r| (key.cell_index, r)))
        .collect();
    let results: Vec<Result<RunRecord, (usize, u64, String)>> = tasks
        .par_iter()
        .map(|&(cell_index, run_index)| {
            let key = &cells[cell_index];
            let cfg = spec.config_for(key);
            let seed = derive_seed(spec.master_seed, cell_index as u64, run_index as u64);
            match engine::run(&cfg, seed) {
                Ok(result) => Ok(RunRecord {
                    run_index,
                    seed,
                    result,
                }),
                Err(error) => Err((run_index, seed, error.to_string())),
            }
        })
        .collect();

    let mut outcomes = Vec::with_capacity(cells.len());
    for key in &cells {
        let start = key.cell_index * spec.runs;
        let slice = &results[start..start + spec.runs];
        let failure = slice.iter().find_map(|r| r.as_ref().err());
        match failure {
            Some(&(run_index, seed, ref error)) => outcomes.push(CellOutcome::Failed {
                key: *key,
                run_index,
                seed,
                error: error.clone(),
            }),
            None => {
                let records: Vec<RunRecord> =
                    slice.iter().map(|r| *r.as_ref().unwrap()).collect();
                outcomes.push(CellOutcome::Completed(aggregate_cell(*key, records)));
            }
        }
    }
    Ok(Report {
        spec: spec.clone(),
        cells: outcomes,
    })
}
