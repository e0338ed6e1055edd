//! One-generation steps for the steady-state EA variants, the run loop with
//! its stopping predicates, and per-run instrumentation.
//!
//! Every variant keeps `mu` members and creates one mutant offspring per
//! generation. They differ only in how the offspring's competitor is chosen:
//!
//! * plain: a uniform member of the current worst-fitness set,
//! * restricted tournament: the closest of `w` sampled members,
//! * deterministic crowding: the offspring's own parent.
//!
//! In all three the offspring replaces the competitor when its fitness is at
//! least as good (ties prefer the offspring).

mod state;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::distance::DistanceKind;
use crate::fitness::{evaluate_ones, twomax_minimum, FitnessKind};
use crate::genome::Genome;
use crate::rng::RandomSource;

use state::Instrumentation;

/// How tournament entrants are sampled from the population.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionPolicy {
    /// `w` independent uniform draws; entrants may repeat.
    WithReplacement,
    /// `min(w, mu)` distinct members, uniform over subsets. For `w >= mu`
    /// the tournament is the whole population.
    WithoutReplacement,
}

impl SelectionPolicy {
    pub fn token(self) -> &'static str {
        match self {
            SelectionPolicy::WithReplacement => "with_replacement",
            SelectionPolicy::WithoutReplacement => "without_replacement",
        }
    }
}

/// Which replacement rule the run uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlgorithmKind {
    /// Offspring competes against a uniform member of the worst-fitness set.
    PlainMuPlusOne,
    /// Offspring competes against the closest of `w` sampled members.
    Rts,
    /// Offspring competes against its own parent.
    DeterministicCrowding,
}

impl AlgorithmKind {
    pub fn token(self) -> &'static str {
        match self {
            AlgorithmKind::PlainMuPlusOne => "plain_mu_plus_one",
            AlgorithmKind::Rts => "rts",
            AlgorithmKind::DeterministicCrowding => "deterministic_crowding",
        }
    }
}

/// When a run stops. At least one criterion must be enabled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StopCriteria {
    /// Stop once the population contains both optima.
    pub require_both_optima: bool,
    /// Stop once this many offspring generations have been produced.
    pub budget: Option<u64>,
    /// Stop once every member is a copy of the same optimum.
    pub stagnation_collapse: bool,
    /// Stop once the population is copies of one optimum plus exactly
    /// `min(w, mu) - 1` members of fitness `n - 1` on that optimum's branch.
    pub stagnation_w_minus_one: bool,
}

impl StopCriteria {
    pub fn any_enabled(&self) -> bool {
        self.require_both_optima
            || self.budget.is_some()
            || self.stagnation_collapse
            || self.stagnation_w_minus_one
    }

    /// Success-only stopping.
    pub fn both_optima() -> Self {
        Self {
            require_both_optima: true,
            budget: None,
            stagnation_collapse: false,
            stagnation_w_minus_one: false,
        }
    }

    /// Success or a generation budget.
    pub fn both_optima_or_budget(budget: u64) -> Self {
        Self {
            budget: Some(budget),
            ..Self::both_optima()
        }
    }
}

/// Full parameterization of one run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlgorithmConfig {
    pub n: usize,
    pub mu: usize,
    pub w: usize,
    pub kind: AlgorithmKind,
    pub policy: SelectionPolicy,
    pub distance: DistanceKind,
    pub fitness: FitnessKind,
    pub stop: StopCriteria,
}

impl AlgorithmConfig {
    /// Tournament size actually drawn without replacement.
    pub fn effective_window(&self) -> usize {
        self.w.min(self.mu)
    }

    pub fn validate(&self) -> Result<(), EngineError> {
        if self.n < 1 {
            return Err(EngineError::InvalidConfig("n must be at least 1".into()));
        }
        if self.mu < 1 {
            return Err(EngineError::InvalidConfig("mu must be at least 1".into()));
        }
        if self.w < 1 {
            return Err(EngineError::InvalidConfig("w must be at least 1".into()));
        }
        if !self.stop.any_enabled() {
            return Err(EngineError::InvalidConfig(
                "at least one stopping criterion must be enabled".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum EngineError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    /// The no-extinction guard fired: a strict branch went from one member to
    /// none after the guard had armed, which the selection rule should make
    /// impossible.
    #[error(
        "no-extinction guard violated: branch {branch} died at generation {generation} \
         (guard armed at generation {armed_at}, {} distance)",
        .distance.token()
    )]
    ExtinctionGuard {
        generation: u64,
        armed_at: u64,
        branch: u8,
        distance: DistanceKind,
    },
}

/// Why a run stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Success,
    BudgetExhausted,
    Stagnation,
}

impl RunStatus {
    pub fn token(self) -> &'static str {
        match self {
            RunStatus::Success => "success",
            RunStatus::BudgetExhausted => "budget_exhausted",
            RunStatus::Stagnation => "stagnation",
        }
    }
}

/// Outcome of one run.
///
/// `generations` counts offspring creations; function evaluations equal
/// `mu + generations`. Branch bests are best-ever TwoMax values attained by
/// any member strictly on that branch, with `ceil(n/2)` standing in for a
/// branch that was never occupied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunResult {
    pub status: RunStatus,
    pub generations: u64,
    pub lone_occurred: bool,
    pub best_branch0: usize,
    pub best_branch1: usize,
}

impl RunResult {
    pub fn min_branch_best(&self) -> usize {
        self.best_branch0.min(self.best_branch1)
    }
}

/// Population member with cached ones count and fitness.
#[derive(Debug, Clone)]
pub struct Member {
    pub genome: Genome,
    pub ones: usize,
    pub fitness: usize,
}

/// Ordered list of exactly `mu` members with cached fitness.
#[derive(Debug, Clone)]
pub struct Population {
    n: usize,
    fitness: FitnessKind,
    members: Vec<Member>,
}

impl Population {
    pub fn from_genomes(fitness: FitnessKind, genomes: Vec<Genome>) -> Self {
        assert!(!genomes.is_empty(), "population must be nonempty");
        let n = genomes[0].len();
        let members = genomes
            .into_iter()
            .map(|genome| {
                assert_eq!(genome.len(), n, "all genomes must share one length");
                let ones = genome.ones();
                Member {
                    ones,
                    fitness: evaluate_ones(fitness, ones, n),
                    genome,
                }
            })
            .collect();
        Self { n, fitness, members }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn members(&self) -> &[Member] {
        &self.members
    }

    pub fn fitness_kind(&self) -> FitnessKind {
        self.fitness
    }

    fn replace(&mut self, slot: usize, genome: Genome, ones: usize) {
        let fitness = evaluate_ones(self.fitness, ones, self.n);
        self.members[slot] = Member { genome, ones, fitness };
    }
}

/// Which side of the fitness valley a ones count falls on. Members with
/// exactly `n/2` ones sit on neither strict branch.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BranchSide {
    Zero,
    Mid,
    One,
}

#[inline]
pub fn branch_side(ones: usize, n: usize) -> BranchSide {
    match (2 * ones).cmp(&n) {
        std::cmp::Ordering::Less => BranchSide::Zero,
        std::cmp::Ordering::Equal => BranchSide::Mid,
        std::cmp::Ordering::Greater => BranchSide::One,
    }
}

/// Strict-branch counts and per-branch best TwoMax fitness of the current
/// population. Midpoint members count toward neither branch and both bests.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BranchStats {
    pub count0: usize,
    pub count1: usize,
    pub best0: usize,
    pub best1: usize,
}

/// Compute branch statistics by scanning the population.
pub fn branch_stats(pop: &Population) -> BranchStats {
    let n = pop.n();
    let sentinel = twomax_minimum(n);
    let mut stats = BranchStats {
        count0: 0,
        count1: 0,
        best0: sentinel,
        best1: sentinel,
    };
    for m in pop.members() {
        let twomax = (n - m.ones).max(m.ones);
        match branch_side(m.ones, n) {
            BranchSide::Zero => {
                stats.count0 += 1;
                stats.best0 = stats.best0.max(twomax);
            }
            BranchSide::One => {
                stats.count1 += 1;
                stats.best1 = stats.best1.max(twomax);
            }
            BranchSide::Mid => {
                stats.best0 = stats.best0.max(twomax);
                stats.best1 = stats.best1.max(twomax);
            }
        }
    }
    stats
}

/// Initialize a population of `mu` independent uniform genomes.
pub fn init_population(cfg: &AlgorithmConfig, rng: &mut RandomSource) -> Population {
    let genomes = (0..cfg.mu).map(|_| Genome::random(cfg.n, rng)).collect();
    Population::from_genomes(cfg.fitness, genomes)
}

/// Reusable buffers for tournament sampling.
#[derive(Debug)]
pub struct StepScratch {
    perm: Vec<u32>,
    tournament: Vec<u32>,
}

impl StepScratch {
    pub fn new(mu: usize) -> Self {
        Self {
            perm: (0..mu as u32).collect(),
            tournament: Vec::with_capacity(mu),
        }
    }
}

fn select_tournament_into(
    mu: usize,
    w: usize,
    policy: SelectionPolicy,
    rng: &mut RandomSource,
    scratch: &mut StepScratch,
) {
    scratch.tournament.clear();
    match policy {
        SelectionPolicy::WithReplacement => {
            for _ in 0..w {
                scratch.tournament.push(rng.uniform(mu as u64) as u32);
            }
        }
        SelectionPolicy::WithoutReplacement => {
            let w_eff = w.min(mu);
            if w_eff == mu {
                // Whole population; no draws, so trajectories for w >= mu
                // coincide with w == mu under the same seed.
                scratch.tournament.extend(0..mu as u32);
            } else {
                for i in 0..w_eff {
                    let j = i + rng.uniform((mu - i) as u64) as usize;
                    scratch.perm.swap(i, j);
                }
                scratch.tournament.extend_from_slice(&scratch.perm[..w_eff]);
            }
        }
    }
}

/// Sample tournament member indices.
///
/// With replacement: exactly `w` indices, possibly repeated. Without
/// replacement: `min(w, mu)` distinct indices, uniform over subsets.
pub fn select_tournament(
    mu: usize,
    w: usize,
    policy: SelectionPolicy,
    rng: &mut RandomSource,
) -> Vec<usize> {
    let mut scratch = StepScratch::new(mu);
    select_tournament_into(mu, w, policy, rng, &mut scratch);
    scratch.tournament.iter().map(|&i| i as usize).collect()
}

fn closest_with_ones(
    y: &Genome,
    y_ones: usize,
    tournament: &[u32],
    pop: &Population,
    kind: DistanceKind,
    rng: &mut RandomSource,
) -> usize {
    debug_assert!(!tournament.is_empty());
    let members = pop.members();
    let mut best_idx = tournament[0];
    let mut best_d = member_distance(y, y_ones, &members[best_idx as usize], kind);
    let mut ties: u64 = 1;
    for &idx in &tournament[1..] {
        let d = member_distance(y, y_ones, &members[idx as usize], kind);
        if d < best_d {
            best_idx = idx;
            best_d = d;
            ties = 1;
        } else if d == best_d {
            // Uniform choice over tied tournament entries (repeats included).
            // A tie against another entry of the current winner needs no draw:
            // replacing the winner with itself is the identity.
            ties += 1;
            if idx != best_idx && rng.uniform(ties) == 0 {
                best_idx = idx;
            }
        }
    }
    best_idx as usize
}

#[inline]
fn member_distance(y: &Genome, y_ones: usize, m: &Member, kind: DistanceKind) -> usize {
    match kind {
        DistanceKind::Genotypic => y.hamming(&m.genome),
        DistanceKind::Phenotypic => y_ones.abs_diff(m.ones),
    }
}

/// Index of a tournament member with minimum distance to `y`; ties are broken
/// uniformly at random over tournament entries.
pub fn closest_in_tournament(
    y: &Genome,
    tournament: &[usize],
    pop: &Population,
    kind: DistanceKind,
    rng: &mut RandomSource,
) -> usize {
    let idx: Vec<u32> = tournament.iter().map(|&i| i as u32).collect();
    closest_with_ones(y, y.ones(), &idx, pop, kind, rng)
}

/// A member replacement performed by a step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Replacement {
    pub slot: usize,
    pub removed_ones: usize,
    pub removed_fitness: usize,
    /// Removed and inserted members sat strictly on opposite branches.
    pub cross_branch: bool,
}

/// What one generation did.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StepEvent {
    pub parent: usize,
    pub offspring_ones: usize,
    pub offspring_fitness: usize,
    pub replacement: Option<Replacement>,
}

fn accept_against(
    pop: &mut Population,
    cfg: &AlgorithmConfig,
    parent: usize,
    offspring: Genome,
    slot: usize,
) -> StepEvent {
    let offspring_ones = offspring.ones();
    let offspring_fitness = evaluate_ones(cfg.fitness, offspring_ones, cfg.n);
    let competitor = &pop.members()[slot];
    let replacement = if offspring_fitness >= competitor.fitness {
        let removed_ones = competitor.ones;
        let removed_fitness = competitor.fitness;
        let removed_side = branch_side(removed_ones, cfg.n);
        let added_side = branch_side(offspring_ones, cfg.n);
        let cross_branch = removed_side != added_side
            && removed_side != BranchSide::Mid
            && added_side != BranchSide::Mid;
        pop.replace(slot, offspring, offspring_ones);
        Some(Replacement {
            slot,
            removed_ones,
            removed_fitness,
            cross_branch,
        })
    } else {
        None
    };
    StepEvent {
        parent,
        offspring_ones,
        offspring_fitness,
        replacement,
    }
}

/// One restricted-tournament generation: uniform parent, standard bit
/// mutation, then the offspring competes against the closest of `w` sampled
/// members and replaces it when at least as fit.
pub fn step_rts(
    pop: &mut Population,
    cfg: &AlgorithmConfig,
    rng: &mut RandomSource,
    scratch: &mut StepScratch,
) -> StepEvent {
    let mu = pop.len();
    let parent = rng.uniform(mu as u64) as usize;
    let offspring = pop.members()[parent].genome.mutate(rng);
    select_tournament_into(mu, cfg.w, cfg.policy, rng, scratch);
    let y_ones = offspring.ones();
    let slot = closest_with_ones(&offspring, y_ones, &scratch.tournament, pop, cfg.distance, rng);
    accept_against(pop, cfg, parent, offspring, slot)
}

/// One plain steady-state generation: the competitor is a uniform member of
/// the current worst-fitness set.
pub fn step_plain(
    pop: &mut Population,
    cfg: &AlgorithmConfig,
    rng: &mut RandomSource,
) -> StepEvent {
    let mu = pop.len();
    let parent = rng.uniform(mu as u64) as usize;
    let offspring = pop.members()[parent].genome.mutate(rng);
    let members = pop.members();
    let mut slot = 0usize;
    let mut worst = members[0].fitness;
    let mut ties: u64 = 1;
    for (i, m) in members.iter().enumerate().skip(1) {
        if m.fitness < worst {
            slot = i;
            worst = m.fitness;
            ties = 1;
        } else if m.fitness == worst {
            ties += 1;
            if rng.uniform(ties) == 0 {
                slot = i;
            }
        }
    }
    accept_against(pop, cfg, parent, offspring, slot)
}

/// One deterministic-crowding generation: the offspring competes against its
/// own parent.
pub fn step_det_crowding(
    pop: &mut Population,
    cfg: &AlgorithmConfig,
    rng: &mut RandomSource,
) -> StepEvent {
    let mu = pop.len();
    let parent = rng.uniform(mu as u64) as usize;
    let offspring = pop.members()[parent].genome.mutate(rng);
    accept_against(pop, cfg, parent, offspring, parent)
}

/// Execute one full run.
pub fn run(cfg: &AlgorithmConfig, seed: u64) -> Result<RunResult, EngineError> {
    run_with_observer(cfg, seed, |_, _| {})
}

/// Execute one full run, reporting branch statistics for every inspected
/// generation (including generation 0, the initial population).
pub fn run_with_observer(
    cfg: &AlgorithmConfig,
    seed: u64,
    mut observe: impl FnMut(u64, &BranchStats),
) -> Result<RunResult, EngineError> {
    cfg.validate()?;
    let mut rng = RandomSource::new(seed);
    let mut pop = init_population(cfg, &mut rng);
    let mut inst = Instrumentation::new(cfg, &pop);
    let mut scratch = StepScratch::new(cfg.mu);
    let w_eff = cfg.effective_window();
    let mut generations: u64 = 0;
    inst.note_boundary(0);
    let status = loop {
        observe(generations, &inst.current_stats());
        if cfg.stop.require_both_optima && inst.contains_both_optima() {
            break RunStatus::Success;
        }
        if (cfg.stop.stagnation_collapse && inst.collapsed())
            || (cfg.stop.stagnation_w_minus_one && inst.w_minus_one_stagnation(w_eff))
        {
            break RunStatus::Stagnation;
        }
        if let Some(limit) = cfg.stop.budget {
            if generations >= limit {
                break RunStatus::BudgetExhausted;
            }
        }
        let event = match cfg.kind {
            AlgorithmKind::Rts => step_rts(&mut pop, cfg, &mut rng, &mut scratch),
            AlgorithmKind::PlainMuPlusOne => step_plain(&mut pop, cfg, &mut rng),
            AlgorithmKind::DeterministicCrowding => step_det_crowding(&mut pop, cfg, &mut rng),
        };
        generations += 1;
        if let Some(rep) = &event.replacement {
            inst.apply_replacement(rep, event.offspring_ones, event.offspring_fitness, generations)?;
        }
        inst.note_boundary(generations);
        debug_assert_eq!(pop.len(), cfg.mu);
    };
    let (best_branch0, best_branch1) = inst.best_ever();
    Ok(RunResult {
        status,
        generations,
        lone_occurred: inst.lone_occurred(),
        best_branch0,
        best_branch1,
    })
}
