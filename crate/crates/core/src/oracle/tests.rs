use super::*;
use crate::engine::StopCriteria;
use crate::fitness::FitnessKind;

fn oracle_config(
    n: usize,
    mu: usize,
    w: usize,
    kind: AlgorithmKind,
    policy: SelectionPolicy,
    distance: DistanceKind,
) -> AlgorithmConfig {
    AlgorithmConfig {
        n,
        mu,
        w,
        kind,
        policy,
        distance,
        fitness: FitnessKind::TwoMax,
        stop: StopCriteria::both_optima(),
    }
}

fn rts(n: usize, mu: usize, w: usize, policy: SelectionPolicy) -> AlgorithmConfig {
    oracle_config(n, mu, w, AlgorithmKind::Rts, policy, DistanceKind::Genotypic)
}

#[test]
fn state_counts_match_stars_and_bars() {
    let limits = OracleLimits::default();
    assert_eq!(enumerate_states(2, 2, &limits).unwrap().len(), 10);
    assert_eq!(enumerate_states(3, 2, &limits).unwrap().len(), 36);
    assert_eq!(enumerate_states(3, 3, &limits).unwrap().len(), 120);
    assert_eq!(state_count(2, 2), 10);
    assert_eq!(state_count(3, 3), 120);
}

#[test]
fn tightened_limits_refuse_enumeration() {
    let limits = OracleLimits {
        max_states: 20,
        ..OracleLimits::default()
    };
    assert!(matches!(
        enumerate_states(3, 2, &limits),
        Err(OracleError::LimitExceeded(_))
    ));
    assert!(matches!(
        MarkovModel::build(&rts(3, 2, 1, SelectionPolicy::WithReplacement), &limits),
        Err(OracleError::LimitExceeded(_))
    ));
}

#[test]
fn absorbing_states_self_loop() {
    let cfg = rts(2, 2, 1, SelectionPolicy::WithReplacement);
    let limits = OracleLimits::default();
    let absorbed = vec![0b00u32, 0b11];
    let row = transition_distribution_exact(&absorbed, &cfg, &limits).unwrap();
    assert_eq!(row, vec![(absorbed.clone(), Frac::ONE)]);
}

#[test]
fn rows_are_stochastic_within_tolerance() {
    let limits = OracleLimits::default();
    for policy in [SelectionPolicy::WithReplacement, SelectionPolicy::WithoutReplacement] {
        for (n, mu, w) in [(2, 2, 1), (2, 2, 2), (3, 2, 2), (3, 3, 2)] {
            let model = MarkovModel::build(&rts(n, mu, w, policy), &limits).unwrap();
            for i in 0..model.states().len() {
                let sum: f64 = model.row(i).iter().map(|&(_, p)| p).sum();
                assert!((sum - 1.0).abs() < 1e-12, "row {i} sums to {sum}");
            }
        }
    }
}

#[test]
fn window_one_policies_coincide() {
    let limits = OracleLimits::default();
    let with = MarkovModel::build(&rts(2, 2, 1, SelectionPolicy::WithReplacement), &limits).unwrap();
    let without =
        MarkovModel::build(&rts(2, 2, 1, SelectionPolicy::WithoutReplacement), &limits).unwrap();
    for i in 0..with.states().len() {
        assert_eq!(with.row(i), without.row(i), "state {i}");
    }
}

#[test]
fn full_window_matches_globally_closest_rule() {
    // w = mu without replacement: the competitor is a globally closest
    // member, ties weighted by multiplicity.
    let limits = OracleLimits::default();
    let cfg = rts(2, 3, 3, SelectionPolicy::WithoutReplacement);
    let states = enumerate_states(2, 3, &limits).unwrap();
    let n_pow = pow_u128(cfg.n as u128, cfg.n);
    for state in &states {
        if contains_both_optima(state, cfg.n) {
            continue;
        }
        let fast = transition_distribution_exact(state, &cfg, &limits).unwrap();
        // direct rule: minimum distance over the whole population
        let mut distinct: Vec<(u32, u32)> = Vec::new();
        for &g in state {
            match distinct.iter_mut().find(|(h, _)| *h == g) {
                Some((_, m)) => *m += 1,
                None => distinct.push((g, 1)),
            }
        }
        let mut acc: BTreeMap<StateKey, Frac> = BTreeMap::new();
        for &(parent, pm) in &distinct {
            let p_parent = Frac::new(pm as u128, cfg.mu as u128);
            for mask in 0..(1u32 << cfg.n) {
                let y = parent ^ mask;
                let p_mut = Frac::new(
                    pow_u128(cfg.n as u128 - 1, cfg.n - mask.count_ones() as usize),
                    n_pow,
                );
                let min_d = distinct
                    .iter()
                    .map(|&(g, _)| genome_distance(cfg.distance, y, g, cfg.n))
                    .min()
                    .unwrap();
                let tied: Vec<(u32, u32)> = distinct
                    .iter()
                    .copied()
                    .filter(|&(g, _)| genome_distance(cfg.distance, y, g, cfg.n) == min_d)
                    .collect();
                let tied_total: u128 = tied.iter().map(|&(_, m)| m as u128).sum();
                for (z, zm) in tied {
                    let p_z = Frac::new(zm as u128, tied_total);
                    let fy = evaluate_ones(cfg.fitness, y.count_ones() as usize, cfg.n);
                    let fz = evaluate_ones(cfg.fitness, z.count_ones() as usize, cfg.n);
                    let succ = if fy >= fz {
                        let mut next = state.clone();
                        let slot = next.iter().position(|&g| g == z).unwrap();
                        next[slot] = y;
                        next.sort_unstable();
                        next
                    } else {
                        state.clone()
                    };
                    let mass = p_parent * p_mut * p_z;
                    acc.entry(succ).and_modify(|p| *p = *p + mass).or_insert(mass);
                }
            }
        }
        let direct: Vec<(StateKey, Frac)> = acc.into_iter().collect();
        assert_eq!(fast, direct, "state {state:?}");
    }
}

#[test]
fn initialization_only_success_probability() {
    // T = 0: both optima drawn immediately, 2 * (1/4) * (1/4) = 1/8.
    let limits = OracleLimits::default();
    let model = MarkovModel::build(&rts(2, 2, 1, SelectionPolicy::WithReplacement), &limits).unwrap();
    let init = model.uniform_init();
    assert!((init.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    assert!((model.success_probability_within(&init, 0) - 0.125).abs() < 1e-15);
}

#[test]
fn success_probability_is_monotone_and_converges() {
    let limits = OracleLimits::default();
    for policy in [SelectionPolicy::WithReplacement, SelectionPolicy::WithoutReplacement] {
        let model = MarkovModel::build(&rts(2, 2, 2, policy), &limits).unwrap();
        let init = model.uniform_init();
        let mut last = 0.0;
        for t in 0..200 {
            let p = model.success_probability_within(&init, t);
            assert!(p + 1e-12 >= last, "not monotone at t = {t}");
            last = p;
        }
        assert!(last > 0.999, "absorption should be near certain, got {last}");
    }
}

#[test]
fn expected_time_zero_on_absorbing_start() {
    let limits = OracleLimits::default();
    let model = MarkovModel::build(&rts(2, 2, 1, SelectionPolicy::WithReplacement), &limits).unwrap();
    let absorbed = model.state_index(&[0b00, 0b11]).unwrap();
    let mut init = vec![0.0; model.states().len()];
    init[absorbed] = 1.0;
    assert_eq!(model.expected_absorption_time(&init), Absorption::Finite(0.0));
}

#[test]
fn single_bit_single_member_chain_never_absorbs() {
    // mu = 1 populations can never contain both optima; the chain alternates
    // between the two genomes forever.
    let limits = OracleLimits::default();
    let model = MarkovModel::build(&rts(1, 1, 1, SelectionPolicy::WithReplacement), &limits).unwrap();
    let init = model.uniform_init();
    assert_eq!(model.success_probability_within(&init, 100), 0.0);
    match model.expected_absorption_time(&init) {
        Absorption::Infinite { closed_class } => {
            assert_eq!(closed_class.len(), 2);
        }
        other => panic!("expected infinite absorption time, got {other:?}"),
    }
}

#[test]
fn plain_rule_expected_time_is_finite_and_positive() {
    let cfg = oracle_config(
        2,
        2,
        1,
        AlgorithmKind::PlainMuPlusOne,
        SelectionPolicy::WithReplacement,
        DistanceKind::Genotypic,
    );
    let limits = OracleLimits::default();
    let model = MarkovModel::build(&cfg, &limits).unwrap();
    let init = model.uniform_init();
    match model.expected_absorption_time(&init) {
        Absorption::Finite(t) => assert!(t > 0.0 && t.is_finite(), "time {t}"),
        other => panic!("expected finite time, got {other:?}"),
    }
}

#[test]
fn init_split_exact_values() {
    // n = 4, mu = 2, sigma = 1 is 50/256.
    assert_eq!(init_split_probability_frac(4, 2, 1), Some((25, 128)));
    assert_eq!(init_split_probability_exact(4, 2, 1), 50.0 / 256.0);
    // sigma = 0 with odd n: both tails cover everything, 1 - 2 (1/2)^mu.
    for mu in 1..=6 {
        let p = init_split_probability_exact(5, mu, 0);
        let expect = 1.0 - 2.0 * 0.5f64.powi(mu as i32);
        assert!((p - expect).abs() < 1e-14, "mu {mu}: {p} vs {expect}");
    }
}

#[test]
fn init_split_dominates_closed_form_bound() {
    for n in 1..=12 {
        for mu in 1..=8 {
            for sigma in 0..=n / 2 {
                let exact = init_split_probability_exact(n, mu, sigma);
                let bound = init_split_lower_bound(n, mu, sigma);
                assert!(
                    exact >= bound - 1e-12,
                    "n={n} mu={mu} sigma={sigma}: exact {exact} < bound {bound}"
                );
            }
        }
    }
}

#[test]
fn init_split_fallback_matches_exact_on_boundary() {
    // n * mu = 120 is the largest exact instance; the log-space fallback
    // should agree with it closely.
    let exact = init_split_probability_exact(30, 4, 3);
    let (p_low, p_mid) = binomial_tail_and_middle(30, 3);
    let fallback = 1.0 - 2.0 * (1.0 - p_low).powi(4) + p_mid.powi(4);
    assert!((exact - fallback).abs() < 1e-12, "{exact} vs {fallback}");
}

#[test]
fn oversized_window_with_replacement_is_refused() {
    let limits = OracleLimits::default();
    let cfg = rts(2, 2, 64, SelectionPolicy::WithReplacement);
    assert!(matches!(
        MarkovModel::build(&cfg, &limits),
        Err(OracleError::LimitExceeded(_))
    ));
    // without replacement an oversized window folds to the whole population
    let cfg = rts(2, 2, 64, SelectionPolicy::WithoutReplacement);
    assert!(MarkovModel::build(&cfg, &limits).is_ok());
}
