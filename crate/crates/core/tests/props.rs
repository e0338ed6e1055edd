//! Property tests for the structural invariants: distance ordering, fitness
//! identities, mutation shape, step bookkeeping and seed determinism.

use proptest::prelude::*;

use rtslab_core::engine::{
    self, branch_stats, AlgorithmConfig, AlgorithmKind, Population, SelectionPolicy, StepScratch,
    StopCriteria,
};
use rtslab_core::{distance, DistanceKind, FitnessKind, Genome, RandomSource};

fn arb_genome_pair() -> impl Strategy<Value = (Genome, Genome)> {
    (1usize..200).prop_flat_map(|n| {
        (
            proptest::collection::vec(any::<bool>(), n),
            proptest::collection::vec(any::<bool>(), n),
        )
            .prop_map(move |(a, b)| {
                (Genome::from_fn(n, |i| a[i]), Genome::from_fn(n, |i| b[i]))
            })
    })
}

fn arb_config() -> impl Strategy<Value = AlgorithmConfig> {
    (
        2usize..24,
        1usize..6,
        1usize..8,
        prop_oneof![
            Just(AlgorithmKind::Rts),
            Just(AlgorithmKind::PlainMuPlusOne),
            Just(AlgorithmKind::DeterministicCrowding),
        ],
        prop_oneof![
            Just(SelectionPolicy::WithReplacement),
            Just(SelectionPolicy::WithoutReplacement),
        ],
        prop_oneof![Just(DistanceKind::Genotypic), Just(DistanceKind::Phenotypic)],
        prop_oneof![
            Just(FitnessKind::TwoMax),
            Just(FitnessKind::OneMax),
            Just(FitnessKind::ZeroMax),
        ],
    )
        .prop_map(|(n, mu, w, kind, policy, distance, fitness)| AlgorithmConfig {
            n,
            mu,
            w,
            kind,
            policy,
            distance,
            fitness,
            stop: StopCriteria::both_optima_or_budget(300),
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn distance_ordering_symmetry_identity((x, y) in arb_genome_pair()) {
        let geno = distance(DistanceKind::Genotypic, &x, &y);
        let pheno = distance(DistanceKind::Phenotypic, &x, &y);
        prop_assert!(pheno <= geno);
        prop_assert!(geno <= x.len());
        prop_assert_eq!(geno, distance(DistanceKind::Genotypic, &y, &x));
        prop_assert_eq!(pheno, distance(DistanceKind::Phenotypic, &y, &x));
        prop_assert_eq!(distance(DistanceKind::Genotypic, &x, &x), 0);
        prop_assert_eq!(distance(DistanceKind::Phenotypic, &x, &x), 0);
    }

    #[test]
    fn twomax_is_max_of_slopes((x, _) in arb_genome_pair()) {
        let two = rtslab_core::evaluate(FitnessKind::TwoMax, &x);
        let one = rtslab_core::evaluate(FitnessKind::OneMax, &x);
        let zero = rtslab_core::evaluate(FitnessKind::ZeroMax, &x);
        prop_assert_eq!(two, one.max(zero));
        prop_assert!(two >= x.len().div_ceil(2));
        prop_assert!(two <= x.len());
    }

    #[test]
    fn mutation_preserves_length(seed in any::<u64>(), n in 1usize..300) {
        let mut rng = RandomSource::new(seed);
        let g = Genome::random(n, &mut rng);
        let m = g.mutate(&mut rng);
        prop_assert_eq!(m.len(), n);
    }

    #[test]
    fn steps_preserve_size_and_acceptance_monotonicity(cfg in arb_config(), seed in any::<u64>()) {
        let mut rng = RandomSource::new(seed);
        let mut pop = engine::init_population(&cfg, &mut rng);
        let mut scratch = StepScratch::new(cfg.mu);
        for _ in 0..150 {
            let fitness_before: Vec<usize> = pop.members().iter().map(|m| m.fitness).collect();
            let event = match cfg.kind {
                AlgorithmKind::Rts => engine::step_rts(&mut pop, &cfg, &mut rng, &mut scratch),
                AlgorithmKind::PlainMuPlusOne => engine::step_plain(&mut pop, &cfg, &mut rng),
                AlgorithmKind::DeterministicCrowding => {
                    engine::step_det_crowding(&mut pop, &cfg, &mut rng)
                }
            };
            prop_assert_eq!(pop.len(), cfg.mu);
            if let Some(rep) = event.replacement {
                prop_assert!(event.offspring_fitness >= rep.removed_fitness);
                prop_assert_eq!(rep.removed_fitness, fitness_before[rep.slot]);
                prop_assert_eq!(pop.members()[rep.slot].fitness, event.offspring_fitness);
            }
        }
    }

    #[test]
    fn run_results_are_reproducible(cfg in arb_config(), seed in any::<u64>()) {
        prop_assert_eq!(engine::run(&cfg, seed).unwrap(), engine::run(&cfg, seed).unwrap());
    }

    #[test]
    fn branch_stats_counts_partition_population(cfg in arb_config(), seed in any::<u64>()) {
        let mut rng = RandomSource::new(seed);
        let pop = engine::init_population(&cfg, &mut rng);
        let stats = branch_stats(&pop);
        let mid = pop
            .members()
            .iter()
            .filter(|m| 2 * m.ones == cfg.n)
            .count();
        prop_assert_eq!(stats.count0 + stats.count1 + mid, cfg.mu);
        let sentinel = cfg.n.div_ceil(2);
        prop_assert!(stats.best0 >= sentinel && stats.best0 <= cfg.n);
        prop_assert!(stats.best1 >= sentinel && stats.best1 <= cfg.n);
    }

    #[test]
    fn mutation_flip_positions_follow_bit_rate(seed in any::<u64>()) {
        // aggregate flips over a batch should stay loosely around the mean;
        // this is a sanity band, not the chi-square (which is seeded once in
        // the validation suite)
        let n = 64usize;
        let mut rng = RandomSource::new(seed);
        let g = Genome::all_zeros(n);
        let batch = 2_000usize;
        let mut total = 0usize;
        for _ in 0..batch {
            total += g.mutate(&mut rng).ones();
        }
        // mean 1 per mutation, sd ~ sqrt(batch); allow 6 sigma for a property test
        let deviation = (total as f64 - batch as f64).abs();
        prop_assert!(deviation < 6.0 * (batch as f64).sqrt());
    }
}

#[test]
fn population_from_genomes_caches_fitness() {
    let genomes: Vec<Genome> = vec!["0011".parse().unwrap(), "1111".parse().unwrap()];
    let pop = Population::from_genomes(FitnessKind::TwoMax, genomes);
    assert_eq!(pop.members()[0].fitness, 2);
    assert_eq!(pop.members()[1].fitness, 4);
    assert_eq!(pop.members()[0].ones, 2);
}
