//! Validation suites.
//!
//! The fast suite cross-checks the exact oracle against an independent
//! brute-force enumeration and verifies the engine's statistical contracts
//! in a few seconds. The full suite additionally executes every acceptance
//! criterion — desk-scale success-rate, runtime-growth and takeover
//! measurements with pinned expected ranges — and prints measured versus
//! expected values per check.

use std::sync::OnceLock;

use crate::distance::DistanceKind;
use crate::engine::{
    self, select_tournament, AlgorithmConfig, AlgorithmKind, RunStatus, SelectionPolicy,
    StopCriteria,
};
use crate::experiments::{
    run_grid, BudgetFormula, ExperimentSpec, Protocol, Report, SymbolicWindow, WindowEntry,
};
use crate::fitness::{evaluate, FitnessKind};
use crate::genome::Genome;
use crate::oracle::{
    init_split_lower_bound, init_split_probability_exact, init_split_probability_frac,
    MarkovModel, OracleLimits,
};
use crate::rng::RandomSource;
use crate::stats;

/// Reference implementations used only to cross-check the fast paths.
pub mod reference {
    use crate::engine::{AlgorithmConfig, AlgorithmKind, SelectionPolicy};
    use crate::distance::DistanceKind;
    use crate::fitness::evaluate_ones;
    use crate::oracle::{Frac, StateKey};
    use std::collections::BTreeMap;

    fn pow(base: u128, exp: usize) -> u128 {
        (0..exp).fold(1u128, |acc, _| acc * base)
    }

    /// One-step distribution by direct enumeration of parents, mutation
    /// masks, ordered tournaments over population slots and tie-break
    /// choices. Deliberately shares no code with the oracle's closed forms.
    pub fn transition_by_enumeration(
        state: &[u32],
        cfg: &AlgorithmConfig,
    ) -> Vec<(StateKey, Frac)> {
        assert_eq!(cfg.kind, AlgorithmKind::Rts);
        let n = cfg.n;
        let mu = state.len();
        let all_ones = (1u32 << n) - 1;
        if state.contains(&0) && state.contains(&all_ones) {
            return vec![(state.to_vec(), Frac::ONE)];
        }
        let tournaments: Vec<Vec<usize>> = match cfg.policy {
            SelectionPolicy::WithReplacement => {
                let mut all = Vec::new();
                let count = pow(mu as u128, cfg.w) as usize;
                for mut code in 0..count {
                    let mut t = Vec::with_capacity(cfg.w);
                    for _ in 0..cfg.w {
                        t.push(code % mu);
                        code /= mu;
                    }
                    all.push(t);
                }
                all
            }
            SelectionPolicy::WithoutReplacement => {
                let w_eff = cfg.w.min(mu);
                (0u32..1 << mu)
                    .filter(|m| m.count_ones() as usize == w_eff)
                    .map(|m| (0..mu).filter(|&i| m >> i & 1 == 1).collect())
                    .collect()
            }
        };
        let p_tournament = Frac::new(1, tournaments.len() as u128);
        let n_pow = pow(n as u128, n);
        let mut acc: BTreeMap<StateKey, Frac> = BTreeMap::new();
        for parent in 0..mu {
            let p_parent = Frac::new(1, mu as u128);
            for mask in 0..(1u32 << n) {
                let y = state[parent] ^ mask;
                let p_mut = Frac::new(
                    pow(n as u128 - 1, n - mask.count_ones() as usize),
                    n_pow,
                );
                let fy = evaluate_ones(cfg.fitness, y.count_ones() as usize, n);
                for tournament in &tournaments {
                    let distances: Vec<usize> = tournament
                        .iter()
                        .map(|&i| match cfg.distance {
                            DistanceKind::Genotypic => (state[i] ^ y).count_ones() as usize,
                            DistanceKind::Phenotypic => (state[i].count_ones() as usize)
                                .abs_diff(y.count_ones() as usize),
                        })
                        .collect();
                    let min_d = *distances.iter().min().unwrap();
                    let tied: Vec<usize> = tournament
                        .iter()
                        .zip(&distances)
                        .filter_map(|(&i, &d)| (d == min_d).then_some(i))
                        .collect();
                    let p_tie = Frac::new(1, tied.len() as u128);
                    for &z in &tied {
                        let fz = evaluate_ones(cfg.fitness, state[z].count_ones() as usize, n);
                        let succ = if fy >= fz {
                            let mut next = state.to_vec();
                            next[z] = y;
                            next.sort_unstable();
                            next
                        } else {
                            state.to_vec()
                        };
                        let mass = p_parent * p_mut * p_tournament * p_tie;
                        acc.entry(succ).and_modify(|p| *p = *p + mass).or_insert(mass);
                    }
                }
            }
        }
        acc.into_iter().collect()
    }

    /// Probability that two uniform genomes of length 4 split with one at
    /// most one 1-bit and the other at least three, by counting ordered
    /// pairs.
    pub fn split_probability_n4_mu2_by_counting() -> (u128, u128) {
        let mut hits: u128 = 0;
        for a in 0u32..16 {
            for b in 0u32..16 {
                let low = a.count_ones() <= 1 || b.count_ones() <= 1;
                let high = a.count_ones() >= 3 || b.count_ones() >= 3;
                if low && high {
                    hits += 1;
                }
            }
        }
        (hits, 256)
    }
}

/// Outcome of one named check.
#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub id: &'static str,
    pub passed: bool,
    /// Measured versus expected, human readable.
    pub summary: String,
}

impl CheckOutcome {
    fn new(id: &'static str, passed: bool, summary: String) -> Self {
        Self { id, passed, summary }
    }
}

/// Which checks to execute.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SuiteLevel {
    Fast,
    Full,
}

type Check = (&'static str, fn(f64) -> CheckOutcome);

fn registry(level: SuiteLevel) -> Vec<Check> {
    let fast: &[Check] = &[
        ("transition-cross-check", check_transition_cross),
        ("policy-coincidence", check_policy_coincidence),
        ("row-stochastic", check_row_stochastic),
        ("split-probability-brute-force", check_split_brute_force),
        ("tie-break-uniform", check_tie_break_uniform),
        ("tournament-inclusion", check_tournament_inclusion),
        ("distance-properties", check_distance_properties),
        ("mutation-chi-square", check_mutation_chi_square),
        ("seed-determinism", check_seed_determinism),
        ("absorption-monotone", check_absorption_monotone),
    ];
    let full: &[Check] = &[
        ("success-region", check_success_region),
        ("success-rate-dip", check_success_rate_dip),
        ("enhanced-budget-recovery", check_enhanced_budget_recovery),
        ("runtime-growth-table", check_runtime_growth_table),
        ("oracle-engine-agreement", check_oracle_engine_agreement),
        ("split-probability-exactness", check_split_exactness),
        ("single-lineage-tail-bound", check_single_lineage_tail),
        ("inclusion-probability-scaling", check_inclusion_scaling),
        ("extinction-guard-silent", check_extinction_guard_silent),
        ("takeover-metric", check_takeover_metric),
    ];
    let mut checks: Vec<Check> = fast.to_vec();
    if level == SuiteLevel::Full {
        checks.extend_from_slice(full);
    }
    checks
}

/// Run a suite. `break_check` tightens the named check's tolerance to an
/// impossible value, for exercising the failure path end to end.
pub fn run_suite(level: SuiteLevel, break_check: Option<&str>) -> Vec<CheckOutcome> {
    registry(level)
        .into_iter()
        .map(|(id, f)| {
            let scale = if break_check == Some(id) { 0.0 } else { 1.0 };
            f(scale)
        })
        .collect()
}

/// Run one named check from the full registry.
pub fn run_check(id: &str) -> Option<CheckOutcome> {
    registry(SuiteLevel::Full)
        .into_iter()
        .find(|&(cid, _)| cid == id)
        .map(|(_, f)| f(1.0))
}

/// Check identifiers of a suite, in execution order.
pub fn check_ids(level: SuiteLevel) -> Vec<&'static str> {
    registry(level).into_iter().map(|(id, _)| id).collect()
}

fn rts_two_max(n: usize, mu: usize, w: usize, policy: SelectionPolicy, distance: DistanceKind) -> AlgorithmConfig {
    AlgorithmConfig {
        n,
        mu,
        w,
        kind: AlgorithmKind::Rts,
        policy,
        distance,
        fitness: FitnessKind::TwoMax,
        stop: StopCriteria::both_optima(),
    }
}

// ---------------------------------------------------------------------------
// fast suite
// ---------------------------------------------------------------------------

fn check_transition_cross(_scale: f64) -> CheckOutcome {
    let limits = OracleLimits::default();
    let mut compared = 0usize;
    for policy in [SelectionPolicy::WithReplacement, SelectionPolicy::WithoutReplacement] {
        for distance in [DistanceKind::Genotypic, DistanceKind::Phenotypic] {
            for w in [1usize, 2, 3] {
                let cfg = rts_two_max(2, 2, w, policy, distance);
                let states = crate::oracle::enumerate_states(2, 2, &limits).unwrap();
                for state in &states {
                    let fast =
                        crate::oracle::transition_distribution_exact(state, &cfg, &limits)
                            .unwrap();
                    let brute = reference::transition_by_enumeration(state, &cfg);
                    if fast != brute {
                        return CheckOutcome::new(
                            "transition-cross-check",
                            false,
                            format!(
                                "state {state:?} ({} {} w={w}): closed-form and enumeration differ",
                                policy.token(),
                                distance.token()
                            ),
                        );
                    }
                    compared += 1;
                }
            }
        }
    }
    CheckOutcome::new(
        "transition-cross-check",
        true,
        format!("{compared} transition rows equal under both derivations"),
    )
}

fn check_policy_coincidence(_scale: f64) -> CheckOutcome {
    let limits = OracleLimits::default();
    for (n, mu) in [(2usize, 2usize), (3, 2)] {
        let with = MarkovModel::build(
            &rts_two_max(n, mu, 1, SelectionPolicy::WithReplacement, DistanceKind::Genotypic),
            &limits,
        )
        .unwrap();
        let without = MarkovModel::build(
            &rts_two_max(n, mu, 1, SelectionPolicy::WithoutReplacement, DistanceKind::Genotypic),
            &limits,
        )
        .unwrap();
        for i in 0..with.states().len() {
            if with.row(i) != without.row(i) {
                return CheckOutcome::new(
                    "policy-coincidence",
                    false,
                    format!("w=1 policies disagree at n={n} mu={mu} state {i}"),
                );
            }
        }
    }
    CheckOutcome::new(
        "policy-coincidence",
        true,
        "w=1 transition structures identical for both policies".into(),
    )
}

fn check_row_stochastic(scale: f64) -> CheckOutcome {
    let limits = OracleLimits::default();
    let tolerance = 1e-12 * scale;
    let mut worst: f64 = 0.0;
    for (n, mu, w, policy) in [
        (2usize, 2usize, 2usize, SelectionPolicy::WithReplacement),
        (3, 2, 2, SelectionPolicy::WithoutReplacement),
        (3, 3, 3, SelectionPolicy::WithoutReplacement),
    ] {
        let model = MarkovModel::build(
            &rts_two_max(n, mu, w, policy, DistanceKind::Genotypic),
            &limits,
        )
        .unwrap();
        for i in 0..model.states().len() {
            let sum: f64 = model.row(i).iter().map(|&(_, p)| p).sum();
            worst = worst.max((sum - 1.0).abs());
        }
    }
    CheckOutcome::new(
        "row-stochastic",
        worst <= tolerance,
        format!("max |row sum - 1| = {worst:.3e}, tolerance {tolerance:.1e}"),
    )
}

fn check_split_brute_force(_scale: f64) -> CheckOutcome {
    let exact = init_split_probability_frac(4, 2, 1).unwrap();
    let brute = reference::split_probability_n4_mu2_by_counting();
    let equal = exact.0 * brute.1 == exact.1 * brute.0 && brute == (50, 256);
    CheckOutcome::new(
        "split-probability-brute-force",
        equal,
        format!(
            "exact {}/{} vs counted {}/{}",
            exact.0, exact.1, brute.0, brute.1
        ),
    )
}

fn check_tie_break_uniform(scale: f64) -> CheckOutcome {
    let pop = engine::Population::from_genomes(
        FitnessKind::TwoMax,
        vec!["1100".parse().unwrap(), "0011".parse().unwrap()],
    );
    let y: Genome = "1001".parse().unwrap();
    let mut rng = RandomSource::new(0x7e57);
    let trials = 100_000u32;
    let mut first = 0u32;
    for _ in 0..trials {
        if engine::closest_in_tournament(&y, &[0, 1], &pop, DistanceKind::Genotypic, &mut rng) == 0
        {
            first += 1;
        }
    }
    let freq = f64::from(first) / f64::from(trials);
    let tolerance = 3.0 * (0.25 / f64::from(trials)).sqrt() * scale;
    CheckOutcome::new(
        "tie-break-uniform",
        (freq - 0.5).abs() <= tolerance,
        format!("tied competitor frequency {freq:.4} vs 0.5 (tolerance {tolerance:.4})"),
    )
}

fn check_tournament_inclusion(scale: f64) -> CheckOutcome {
    let (mu, w) = (8usize, 2usize);
    let mut rng = RandomSource::new(0x1c17);
    let trials = 100_000u32;
    let mut hits = 0u32;
    for _ in 0..trials {
        if select_tournament(mu, w, SelectionPolicy::WithoutReplacement, &mut rng).contains(&5) {
            hits += 1;
        }
    }
    let p = w as f64 / mu as f64;
    let freq = f64::from(hits) / f64::from(trials);
    let tolerance = 3.0 * (p * (1.0 - p) / f64::from(trials)).sqrt() * scale;
    CheckOutcome::new(
        "tournament-inclusion",
        (freq - p).abs() <= tolerance,
        format!("inclusion frequency {freq:.4} vs w/mu = {p} (tolerance {tolerance:.4})"),
    )
}

fn check_distance_properties(_scale: f64) -> CheckOutcome {
    let mut rng = RandomSource::new(0xd157);
    for _ in 0..20_000 {
        let n = 1 + rng.uniform(120) as usize;
        let x = Genome::random(n, &mut rng);
        let y = Genome::random(n, &mut rng);
        let geno = crate::distance::distance(DistanceKind::Genotypic, &x, &y);
        let pheno = crate::distance::distance(DistanceKind::Phenotypic, &x, &y);
        let ok = pheno <= geno
            && geno <= n
            && geno == crate::distance::distance(DistanceKind::Genotypic, &y, &x)
            && pheno == crate::distance::distance(DistanceKind::Phenotypic, &y, &x)
            && crate::distance::distance(DistanceKind::Genotypic, &x, &x) == 0
            && crate::distance::distance(DistanceKind::Phenotypic, &x, &x) == 0
            && evaluate(FitnessKind::TwoMax, &x)
                == evaluate(FitnessKind::OneMax, &x).max(evaluate(FitnessKind::ZeroMax, &x));
        if !ok {
            return CheckOutcome::new(
                "distance-properties",
                false,
                format!("violated for x={x} y={y}"),
            );
        }
    }
    CheckOutcome::new(
        "distance-properties",
        true,
        "ordering, symmetry, identity and slope identities hold on 20000 random pairs".into(),
    )
}

fn check_mutation_chi_square(scale: f64) -> CheckOutcome {
    let n = 100usize;
    let samples = 100_000u64;
    let g = Genome::all_zeros(n);
    let mut rng = RandomSource::new(0xc4153);
    let mut counts = vec![0u64; n + 1];
    for _ in 0..samples {
        counts[g.mutate(&mut rng).ones()] += 1;
    }
    let (observed, expected) = stats::binomial_buckets(&counts, n, 1.0 / n as f64, samples, 5.0);
    let chi2 = stats::chi_square_statistic(&observed, &expected);
    let critical = stats::chi_square_critical_p001((observed.len() - 1) as f64) * scale;
    CheckOutcome::new(
        "mutation-chi-square",
        chi2 <= critical,
        format!(
            "chi2 {chi2:.2} vs critical {critical:.2} ({} buckets, significance 0.001)",
            observed.len()
        ),
    )
}

fn check_seed_determinism(_scale: f64) -> CheckOutcome {
    let cfg = AlgorithmConfig {
        stop: StopCriteria::both_optima_or_budget(50_000),
        ..rts_two_max(40, 8, 2, SelectionPolicy::WithoutReplacement, DistanceKind::Genotypic)
    };
    for seed in [1u64, 99, 0xdead] {
        let a = engine::run(&cfg, seed).unwrap();
        let b = engine::run(&cfg, seed).unwrap();
        if a != b {
            return CheckOutcome::new(
                "seed-determinism",
                false,
                format!("seed {seed} produced differing results"),
            );
        }
    }
    CheckOutcome::new(
        "seed-determinism",
        true,
        "identical (config, seed) pairs reproduce identical results".into(),
    )
}

fn check_absorption_monotone(_scale: f64) -> CheckOutcome {
    let limits = OracleLimits::default();
    let model = MarkovModel::build(
        &rts_two_max(2, 2, 2, SelectionPolicy::WithoutReplacement, DistanceKind::Genotypic),
        &limits,
    )
    .unwrap();
    let init = model.uniform_init();
    let p0 = model.success_probability_within(&init, 0);
    let mut last = -1.0;
    for t in 0..100 {
        let p = model.success_probability_within(&init, t);
        if p + 1e-12 < last {
            return CheckOutcome::new(
                "absorption-monotone",
                false,
                format!("probability decreased at horizon {t}"),
            );
        }
        last = p;
    }
    CheckOutcome::new(
        "absorption-monotone",
        (p0 - 0.125).abs() < 1e-15 && last > 0.999,
        format!("p(0) = {p0} (expected 0.125), p(99) = {last:.6} climbing toward 1"),
    )
}

// ---------------------------------------------------------------------------
// full suite: acceptance criteria
// ---------------------------------------------------------------------------

const SEED_SUCCESS_REGION: u64 = 1101;
const SEED_DIP: u64 = 1102;
const SEED_ENHANCED: u64 = 1103;
const SEED_RUNTIME_SMALL: u64 = 1104;
const SEED_RUNTIME_LARGE: u64 = 1105;
const SEED_TAKEOVER_WITH: u64 = 1106;
const SEED_TAKEOVER_WITHOUT: u64 = 1107;
const SEED_ORACLE_AGREEMENT: u64 = 1108;
const SEED_SPLIT_MC: u64 = 1109;
const SEED_TAIL: u64 = 1110;
const SEED_INCLUSION: u64 = 1111;

fn grid_success_region() -> &'static Report {
    static GRID: OnceLock<Report> = OnceLock::new();
    GRID.get_or_init(|| {
        run_grid(&ExperimentSpec {
            protocol: Protocol::SuccessRate,
            n: 100,
            mu_list: vec![2, 32],
            w_list: vec![WindowEntry::Fixed(1), WindowEntry::Fixed(8)],
            policy: SelectionPolicy::WithReplacement,
            distance: DistanceKind::Genotypic,
            fitness: FitnessKind::TwoMax,
            runs: 100,
            budget: BudgetFormula::Standard,
            master_seed: SEED_SUCCESS_REGION,
        })
        .expect("success-region grid")
    })
}

fn grid_dip() -> &'static Report {
    static GRID: OnceLock<Report> = OnceLock::new();
    GRID.get_or_init(|| {
        run_grid(&ExperimentSpec {
            protocol: Protocol::SuccessRate,
            n: 100,
            mu_list: vec![8, 32],
            w_list: vec![WindowEntry::Fixed(2)],
            policy: SelectionPolicy::WithoutReplacement,
            distance: DistanceKind::Phenotypic,
            fitness: FitnessKind::TwoMax,
            runs: 100,
            budget: BudgetFormula::Standard,
            master_seed: SEED_DIP,
        })
        .expect("success-rate dip grid")
    })
}

fn grid_enhanced() -> &'static Report {
    static GRID: OnceLock<Report> = OnceLock::new();
    GRID.get_or_init(|| {
        run_grid(&ExperimentSpec {
            protocol: Protocol::SuccessRate,
            n: 100,
            mu_list: vec![32],
            w_list: vec![WindowEntry::Fixed(2)],
            policy: SelectionPolicy::WithoutReplacement,
            distance: DistanceKind::Phenotypic,
            fitness: FitnessKind::TwoMax,
            runs: 100,
            budget: BudgetFormula::Enhanced,
            master_seed: SEED_ENHANCED,
        })
        .expect("enhanced-budget grid")
    })
}

fn grid_runtime_small() -> &'static Report {
    static GRID: OnceLock<Report> = OnceLock::new();
    GRID.get_or_init(|| {
        run_grid(&ExperimentSpec {
            protocol: Protocol::RuntimeGrowth,
            n: 100,
            mu_list: vec![2, 32],
            w_list: vec![WindowEntry::Fixed(2)],
            policy: SelectionPolicy::WithoutReplacement,
            distance: DistanceKind::Genotypic,
            fitness: FitnessKind::TwoMax,
            runs: 100,
            budget: BudgetFormula::Unbounded,
            master_seed: SEED_RUNTIME_SMALL,
        })
        .expect("runtime-growth grid")
    })
}

fn grid_runtime_large() -> &'static Report {
    static GRID: OnceLock<Report> = OnceLock::new();
    GRID.get_or_init(|| {
        run_grid(&ExperimentSpec {
            protocol: Protocol::RuntimeGrowth,
            n: 100,
            mu_list: vec![128],
            w_list: vec![WindowEntry::Symbolic(SymbolicWindow::Mu)],
            policy: SelectionPolicy::WithoutReplacement,
            distance: DistanceKind::Genotypic,
            fitness: FitnessKind::TwoMax,
            runs: 100,
            budget: BudgetFormula::Unbounded,
            master_seed: SEED_RUNTIME_LARGE,
        })
        .expect("runtime-growth full-window grid")
    })
}

fn grid_takeover_with() -> &'static Report {
    static GRID: OnceLock<Report> = OnceLock::new();
    GRID.get_or_init(|| {
        run_grid(&ExperimentSpec {
            protocol: Protocol::Takeover,
            n: 100,
            mu_list: vec![8],
            w_list: vec![WindowEntry::Fixed(1)],
            policy: SelectionPolicy::WithReplacement,
            distance: DistanceKind::Genotypic,
            fitness: FitnessKind::TwoMax,
            runs: 100,
            budget: BudgetFormula::Unbounded,
            master_seed: SEED_TAKEOVER_WITH,
        })
        .expect("takeover grid (with replacement)")
    })
}

fn grid_takeover_without() -> &'static Report {
    static GRID: OnceLock<Report> = OnceLock::new();
    GRID.get_or_init(|| {
        run_grid(&ExperimentSpec {
            protocol: Protocol::Takeover,
            n: 100,
            mu_list: vec![2],
            w_list: vec![WindowEntry::Fixed(2)],
            policy: SelectionPolicy::WithoutReplacement,
            distance: DistanceKind::Genotypic,
            fitness: FitnessKind::TwoMax,
            runs: 100,
            budget: BudgetFormula::Unbounded,
            master_seed: SEED_TAKEOVER_WITHOUT,
        })
        .expect("takeover grid (without replacement)")
    })
}

/// Both optima are found reliably in the large-window, large-population
/// corner and rarely in the tiny corner.
fn check_success_region(scale: f64) -> CheckOutcome {
    let report = grid_success_region();
    let (Some(strong), Some(weak)) = (report.cell(32, 8), report.cell(2, 1)) else {
        return CheckOutcome::new("success-region", false, "grid cell failed".into());
    };
    let min_strong = if scale == 0.0 { 101 } else { 95 };
    let passed = strong.success_count >= min_strong && weak.success_count <= 10;
    CheckOutcome::new(
        "success-region",
        passed,
        format!(
            "successes/100: mu=32,w=8 -> {} (expected >= {min_strong}); mu=2,w=1 -> {} (expected <= 10)",
            strong.success_count, weak.success_count
        ),
    )
}

/// Without replacement at w = 2 the success rate drops when the population
/// grows from 8 to 32 under the standard budget.
fn check_success_rate_dip(scale: f64) -> CheckOutcome {
    let report = grid_dip();
    let (Some(small), Some(large)) = (report.cell(8, 2), report.cell(32, 2)) else {
        return CheckOutcome::new("success-rate-dip", false, "grid cell failed".into());
    };
    let gap = small.success_count as i64 - large.success_count as i64;
    let need = if scale == 0.0 { 101 } else { 20 };
    CheckOutcome::new(
        "success-rate-dip",
        gap >= need,
        format!(
            "successes/100: mu=8 -> {}, mu=32 -> {}, gap {gap} (expected >= {need})",
            small.success_count, large.success_count
        ),
    )
}

/// The same mu = 32, w = 2 cell recovers under the enhanced budget.
fn check_enhanced_budget_recovery(scale: f64) -> CheckOutcome {
    let report = grid_enhanced();
    let Some(cell) = report.cell(32, 2) else {
        return CheckOutcome::new("enhanced-budget-recovery", false, "grid cell failed".into());
    };
    let need = if scale == 0.0 { 101 } else { 90 };
    CheckOutcome::new(
        "enhanced-budget-recovery",
        cell.success_count >= need,
        format!(
            "successes/100: {} (expected >= {need})",
            cell.success_count
        ),
    )
}

/// Unbounded runtime-growth means, stds and lone-individual counts land in
/// the pinned reference ranges for three spot cells.
fn check_runtime_growth_table(scale: f64) -> CheckOutcome {
    let small = grid_runtime_small();
    let large = grid_runtime_large();
    let (Some(tiny), Some(mid)) = (small.cell(2, 2), small.cell(32, 2)) else {
        return CheckOutcome::new("runtime-growth-table", false, "grid cell failed".into());
    };
    let Some(full) = large.cell(128, 128) else {
        return CheckOutcome::new("runtime-growth-table", false, "grid cell failed".into());
    };
    let widen = if scale == 0.0 { 0.0 } else { 1.0 };
    let tiny_ok = (1.9e3 * (2.0 - widen)..=2.6e3 * widen).contains(&tiny.mean_generations)
        && (40..=70).contains(&tiny.lone_count);
    let mid_ok = (2.7e5 * (2.0 - widen)..=4.7e5 * widen).contains(&mid.mean_generations)
        && mid.lone_count >= 95;
    let full_ok = (6.0e4 * (2.0 - widen)..=8.3e4 * widen).contains(&full.mean_generations);
    CheckOutcome::new(
        "runtime-growth-table",
        tiny_ok && mid_ok && full_ok,
        format!(
            "mu=2,w=2: mean {:.3e} in [1.9e3, 2.6e3], lone {} in [40, 70]; \
             mu=32,w=2: mean {:.3e} in [2.7e5, 4.7e5], lone {} >= 95; \
             mu=128,w=mu: mean {:.3e} in [6.0e4, 8.3e4]",
            tiny.mean_generations,
            tiny.lone_count,
            mid.mean_generations,
            mid.lone_count,
            full.mean_generations
        ),
    )
}

/// Engine success frequencies at n = 2 match the exact chain within three
/// binomial standard deviations for every window/policy combination.
fn check_oracle_engine_agreement(scale: f64) -> CheckOutcome {
    let limits = OracleLimits::default();
    let trials = 100_000u32;
    let horizon = 50u64;
    let mut lines = Vec::new();
    let mut passed = true;
    for policy in [SelectionPolicy::WithReplacement, SelectionPolicy::WithoutReplacement] {
        for w in [1usize, 2] {
            let cfg = AlgorithmConfig {
                stop: StopCriteria::both_optima_or_budget(horizon),
                ..rts_two_max(2, 2, w, policy, DistanceKind::Genotypic)
            };
            let model = MarkovModel::build(&cfg, &limits).unwrap();
            let expected = model.success_probability_within(&model.uniform_init(), horizon);
            let mut successes = 0u32;
            for run_index in 0..trials {
                let seed = crate::experiments::derive_seed(
                    SEED_ORACLE_AGREEMENT,
                    (w * 10) as u64 + policy as u64,
                    u64::from(run_index),
                );
                if engine::run(&cfg, seed).unwrap().status == RunStatus::Success {
                    successes += 1;
                }
            }
            let freq = f64::from(successes) / f64::from(trials);
            let sigma = (expected * (1.0 - expected) / f64::from(trials)).sqrt();
            let ok = (freq - expected).abs() <= 3.0 * sigma * scale;
            passed &= ok;
            lines.push(format!(
                "{} w={w}: {freq:.6} vs exact {expected:.6} (3 sigma = {:.2e})",
                policy.token(),
                3.0 * sigma
            ));
        }
    }
    CheckOutcome::new("oracle-engine-agreement", passed, lines.join("; "))
}

/// The initialization split probability is exact, matches brute-force
/// counting and Monte Carlo, and dominates the closed-form bound.
fn check_split_exactness(scale: f64) -> CheckOutcome {
    let exact = init_split_probability_exact(4, 2, 1);
    if exact != 50.0 / 256.0 {
        return CheckOutcome::new(
            "split-probability-exactness",
            false,
            format!("exact value {exact} differs from 50/256"),
        );
    }
    let brute = reference::split_probability_n4_mu2_by_counting();
    if brute != (50, 256) {
        return CheckOutcome::new(
            "split-probability-exactness",
            false,
            format!("brute-force counted {}/{}", brute.0, brute.1),
        );
    }
    // Monte Carlo over engine initializations
    let cfg = AlgorithmConfig {
        stop: StopCriteria::both_optima_or_budget(0),
        ..rts_two_max(4, 2, 1, SelectionPolicy::WithReplacement, DistanceKind::Genotypic)
    };
    let trials = 100_000u32;
    let mut hits = 0u32;
    for i in 0..trials {
        let mut rng = RandomSource::new(crate::experiments::derive_seed(
            SEED_SPLIT_MC,
            0,
            u64::from(i),
        ));
        let pop = engine::init_population(&cfg, &mut rng);
        let low = pop.members().iter().any(|m| m.ones <= 1);
        let high = pop.members().iter().any(|m| m.ones >= 3);
        if low && high {
            hits += 1;
        }
    }
    let freq = f64::from(hits) / f64::from(trials);
    let sigma = (exact * (1.0 - exact) / f64::from(trials)).sqrt();
    let mc_ok = (freq - exact).abs() <= 3.0 * sigma * scale;
    // dominance over the closed-form bound
    let mut dominated = true;
    for n in 1..=12 {
        for mu in 1..=8 {
            for sigma_gap in 0..=n / 2 {
                let e = init_split_probability_exact(n, mu, sigma_gap);
                let b = init_split_lower_bound(n, mu, sigma_gap);
                dominated &= e >= b - 1e-12;
            }
        }
    }
    CheckOutcome::new(
        "split-probability-exactness",
        mc_ok && dominated,
        format!(
            "exact 50/256 = {exact:.6}; Monte Carlo {freq:.4} (3 sigma {:.4}); bound dominated on n <= 12 grid: {dominated}",
            3.0 * sigma
        ),
    )
}

/// A single lineage reaches an optimum within the drift-derived deadline in
/// all but about one run in a hundred.
fn check_single_lineage_tail(scale: f64) -> CheckOutcome {
    let n = 100usize;
    // ceil(mu + 2 e mu n ln n) evaluations with mu = 1, as a generation count
    let deadline = (1.0 + 2.0 * std::f64::consts::E * n as f64 * (n as f64).ln()).ceil() as u64;
    let cfg = AlgorithmConfig {
        stop: StopCriteria {
            require_both_optima: false,
            budget: None,
            stagnation_collapse: true,
            stagnation_w_minus_one: false,
        },
        ..rts_two_max(n, 1, 1, SelectionPolicy::WithReplacement, DistanceKind::Genotypic)
    };
    let runs = 1_000u32;
    let mut late = 0u32;
    for i in 0..runs {
        let seed = crate::experiments::derive_seed(SEED_TAIL, 0, u64::from(i));
        let result = engine::run(&cfg, seed).unwrap();
        if result.generations > deadline {
            late += 1;
        }
    }
    let fraction = f64::from(late) / f64::from(runs);
    let p = 0.01f64;
    let bound = (p + 3.0 * (p * (1.0 - p) / f64::from(runs)).sqrt()) * scale;
    CheckOutcome::new(
        "single-lineage-tail-bound",
        fraction <= bound,
        format!(
            "{late}/{runs} runs exceeded {deadline} generations; fraction {fraction:.4} vs bound {bound:.4}"
        ),
    )
}

/// Tournament inclusion frequency matches w/mu across scales.
fn check_inclusion_scaling(scale: f64) -> CheckOutcome {
    let trials = 100_000u32;
    let mut lines = Vec::new();
    let mut passed = true;
    for (mu, w) in [(8usize, 2usize), (32, 8), (1024, 128)] {
        let mut rng = RandomSource::new(SEED_INCLUSION ^ ((mu * 131 + w) as u64));
        let mut hits = 0u32;
        for _ in 0..trials {
            if select_tournament(mu, w, SelectionPolicy::WithoutReplacement, &mut rng)
                .contains(&0)
            {
                hits += 1;
            }
        }
        let p = w as f64 / mu as f64;
        let freq = f64::from(hits) / f64::from(trials);
        let tolerance = 3.0 * (p * (1.0 - p) / f64::from(trials)).sqrt() * scale;
        let ok = (freq - p).abs() <= tolerance;
        passed &= ok;
        lines.push(format!("mu={mu},w={w}: {freq:.4} vs {p:.4}"));
    }
    CheckOutcome::new("inclusion-probability-scaling", passed, lines.join("; "))
}

/// The no-extinction guard stayed silent across every acceptance grid.
fn check_extinction_guard_silent(_scale: f64) -> CheckOutcome {
    let reports = [
        ("success-region", grid_success_region()),
        ("success-rate-dip", grid_dip()),
        ("enhanced-budget-recovery", grid_enhanced()),
        ("runtime-growth-small", grid_runtime_small()),
        ("runtime-growth-large", grid_runtime_large()),
    ];
    for (name, report) in reports {
        if report.any_failed() {
            let detail = report
                .cells
                .iter()
                .filter_map(|c| match c {
                    crate::experiments::CellOutcome::Failed { key, error, .. } => {
                        Some(format!("mu={} w={}: {error}", key.mu, key.w))
                    }
                    _ => None,
                })
                .collect::<Vec<_>>()
                .join("; ");
            return CheckOutcome::new(
                "extinction-guard-silent",
                false,
                format!("grid {name} had failing cells: {detail}"),
            );
        }
    }
    CheckOutcome::new(
        "extinction-guard-silent",
        true,
        "zero guard violations across all acceptance grids".into(),
    )
}

/// Takeover depth: with replacement at w = 1 the losing branch dies near
/// initialization; without replacement at w = 2 it climbs far before losing.
fn check_takeover_metric(scale: f64) -> CheckOutcome {
    let with = grid_takeover_with();
    let without = grid_takeover_without();
    let (Some(a), Some(b)) = (with.cell(8, 1), without.cell(2, 2)) else {
        return CheckOutcome::new("takeover-metric", false, "grid cell failed".into());
    };
    let low_ok = a.mean_min_branch_best <= 60.0 * if scale == 0.0 { 0.0 } else { 1.0 };
    let high_ok = b.mean_min_branch_best >= 60.0;
    CheckOutcome::new(
        "takeover-metric",
        low_ok && high_ok,
        format!(
            "mean min-branch best: with replacement w=1,mu=8 -> {:.2} (expected <= 60); \
             without replacement w=2,mu=2 -> {:.2} (expected >= 60)",
            a.mean_min_branch_best, b.mean_min_branch_best
        ),
    )
}
