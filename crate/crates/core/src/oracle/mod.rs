//! Exact ground truth for tiny instances.
//!
//! Populations over length-`n` genomes form a finite Markov chain whose
//! states are size-`mu` multisets of the `2^n` genomes. For tiny `n` and
//! `mu` the full transition structure is computed exactly — summing over
//! parent choices, all `2^n` mutation masks, all tournaments and all
//! tie-breaks — and queried for absorption probabilities and expected
//! hitting times. Everything is evaluated in exact rational arithmetic and
//! converted to `f64` only in the final distribution.

mod frac;

use std::collections::{BTreeMap, HashMap};

use thiserror::Error;

use crate::engine::{AlgorithmConfig, AlgorithmKind, SelectionPolicy};
use crate::distance::DistanceKind;
use crate::fitness::evaluate_ones;

pub use frac::Frac;

/// Guardrails for exact enumeration.
#[derive(Debug, Clone, Copy)]
pub struct OracleLimits {
    pub max_n: usize,
    pub max_mu: usize,
    /// Cap on the window size for tournaments with replacement, where class
    /// probabilities take `w`-th powers.
    pub max_w: usize,
    pub max_states: u128,
}

impl Default for OracleLimits {
    fn default() -> Self {
        Self {
            max_n: 3,
            max_mu: 3,
            max_w: 16,
            max_states: 512,
        }
    }
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("oracle limit exceeded: {0}")]
    LimitExceeded(String),
    #[error("oracle does not model this replacement rule: {0}")]
    UnsupportedKind(String),
}

/// Canonical state: genome codes (bit `i` of the code is position `i`),
/// sorted ascending, one entry per population slot.
pub type StateKey = Vec<u32>;

/// Number of population multisets: `C(2^n + mu - 1, mu)`.
pub fn state_count(n: usize, mu: usize) -> u128 {
    let genomes = 1u128 << n;
    binomial(genomes + mu as u128 - 1, mu as u128)
}

fn binomial(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc
            .checked_mul(n - i)
            .expect("binomial overflow")
            / (i + 1);
    }
    acc
}

fn pow_u128(base: u128, exp: usize) -> u128 {
    let mut acc: u128 = 1;
    for _ in 0..exp {
        acc = acc.checked_mul(base).expect("power overflow");
    }
    acc
}

fn check_limits(cfg: &AlgorithmConfig, limits: &OracleLimits) -> Result<(), OracleError> {
    if cfg.n > limits.max_n {
        return Err(OracleError::LimitExceeded(format!(
            "n = {} exceeds max_n = {}",
            cfg.n, limits.max_n
        )));
    }
    if cfg.mu > limits.max_mu {
        return Err(OracleError::LimitExceeded(format!(
            "mu = {} exceeds max_mu = {}",
            cfg.mu, limits.max_mu
        )));
    }
    if cfg.policy == SelectionPolicy::WithReplacement && cfg.w > limits.max_w {
        return Err(OracleError::LimitExceeded(format!(
            "w = {} exceeds max_w = {} for tournaments with replacement",
            cfg.w, limits.max_w
        )));
    }
    let count = state_count(cfg.n, cfg.mu);
    if count > limits.max_states {
        return Err(OracleError::LimitExceeded(format!(
            "state count {} exceeds max_states = {}",
            count, limits.max_states
        )));
    }
    if cfg.kind == AlgorithmKind::DeterministicCrowding {
        return Err(OracleError::UnsupportedKind(
            "deterministic crowding".into(),
        ));
    }
    Ok(())
}

/// All population multisets in deterministic (lexicographic) order.
pub fn enumerate_states(n: usize, mu: usize, limits: &OracleLimits) -> Result<Vec<StateKey>, OracleError> {
    if n > limits.max_n || mu > limits.max_mu {
        return Err(OracleError::LimitExceeded(format!(
            "n = {n}, mu = {mu} beyond enumeration limits"
        )));
    }
    let count = state_count(n, mu);
    if count > limits.max_states {
        return Err(OracleError::LimitExceeded(format!(
            "state count {count} exceeds max_states = {}",
            limits.max_states
        )));
    }
    let genomes = 1u32 << n;
    let mut states = Vec::with_capacity(count as usize);
    let mut current = vec![0u32; mu];
    loop {
        states.push(current.clone());
        // next nondecreasing tuple
        let mut i = mu;
        loop {
            if i == 0 {
                return Ok(states);
            }
            i -= 1;
            if current[i] + 1 < genomes {
                let v = current[i] + 1;
                for slot in current.iter_mut().skip(i) {
                    *slot = v;
                }
                break;
            }
        }
    }
}

fn render_state(state: &[u32], n: usize) -> String {
    let bits: Vec<String> = state
        .iter()
        .map(|&g| (0..n).map(|i| if g >> i & 1 == 1 { '1' } else { '0' }).collect())
        .collect();
    format!("{{{}}}", bits.join(", "))
}

fn contains_both_optima(state: &[u32], n: usize) -> bool {
    let all_ones = (1u32 << n) - 1;
    state.contains(&0) && state.contains(&all_ones)
}

/// Exact one-step distribution out of `state`, merged over identical
/// successor states. Absorbing states (containing both optima) self-loop.
pub fn transition_distribution_exact(
    state: &[u32],
    cfg: &AlgorithmConfig,
    limits: &OracleLimits,
) -> Result<Vec<(StateKey, Frac)>, OracleError> {
    check_limits(cfg, limits)?;
    assert_eq!(state.len(), cfg.mu, "state size must equal mu");
    let n = cfg.n;
    if contains_both_optima(state, n) {
        return Ok(vec![(state.to_vec(), Frac::ONE)]);
    }

    // distinct genomes with multiplicities
    let mut distinct: Vec<(u32, u32)> = Vec::new();
    for &g in state {
        match distinct.iter_mut().find(|(h, _)| *h == g) {
            Some((_, m)) => *m += 1,
            None => distinct.push((g, 1)),
        }
    }

    // mutation mask probability by flip count: (1/n)^k ((n-1)/n)^(n-k)
    let n_pow = pow_u128(n as u128, n);
    let mask_prob: Vec<Frac> = (0..=n)
        .map(|k| Frac::new(pow_u128(n as u128 - 1, n - k), n_pow))
        .collect();

    let mu = cfg.mu as u128;
    let mut acc: BTreeMap<StateKey, Frac> = BTreeMap::new();
    for &(parent, parent_mult) in &distinct {
        let p_parent = Frac::new(parent_mult as u128, mu);
        for mask in 0..(1u32 << n) {
            let offspring = parent ^ mask;
            let p_mut = mask_prob[mask.count_ones() as usize];
            let p_created = p_parent * p_mut;
            let offspring_fit = evaluate_ones(cfg.fitness, offspring.count_ones() as usize, n);
            for (competitor, p_z) in competitor_distribution(&distinct, offspring, cfg) {
                if p_z.is_zero() {
                    continue;
                }
                let competitor_fit =
                    evaluate_ones(cfg.fitness, competitor.count_ones() as usize, n);
                let successor = if offspring_fit >= competitor_fit {
                    let mut next = state.to_vec();
                    let slot = next.iter().position(|&g| g == competitor).unwrap();
                    next[slot] = offspring;
                    next.sort_unstable();
                    next
                } else {
                    state.to_vec()
                };
                let mass = p_created * p_z;
                acc.entry(successor)
                    .and_modify(|p| *p = *p + mass)
                    .or_insert(mass);
            }
        }
    }
    let total = acc.values().fold(Frac::ZERO, |a, &b| a + b);
    assert_eq!(total, Frac::ONE, "transition row must sum to one");
    Ok(acc.into_iter().collect())
}

/// Exact distribution of which distinct genome the offspring competes with.
///
/// Competitor choice factorizes over genome distance classes: the tournament
/// competes within the closest class it intersects, and inside that class the
/// tie-break over entries lands on a genome proportionally to its population
/// multiplicity, for both sampling policies.
fn competitor_distribution(
    distinct: &[(u32, u32)],
    offspring: u32,
    cfg: &AlgorithmConfig,
) -> Vec<(u32, Frac)> {
    let mu: u128 = distinct.iter().map(|&(_, m)| m as u128).sum();
    match cfg.kind {
        AlgorithmKind::Rts => {
            let mut by_distance: Vec<(usize, u32, u32)> = distinct
                .iter()
                .map(|&(g, m)| (genome_distance(cfg.distance, offspring, g, cfg.n), g, m))
                .collect();
            by_distance.sort_unstable();
            let mut out = Vec::with_capacity(by_distance.len());
            let mut closer: u128 = 0;
            let mut i = 0;
            while i < by_distance.len() {
                let d = by_distance[i].0;
                let mut j = i;
                let mut class_size: u128 = 0;
                while j < by_distance.len() && by_distance[j].0 == d {
                    class_size += by_distance[j].2 as u128;
                    j += 1;
                }
                let p_class = match cfg.policy {
                    SelectionPolicy::WithReplacement => {
                        let w = cfg.w;
                        Frac::new(
                            pow_u128(mu - closer, w) - pow_u128(mu - closer - class_size, w),
                            pow_u128(mu, w),
                        )
                    }
                    SelectionPolicy::WithoutReplacement => {
                        let w_eff = cfg.w.min(mu as usize) as u128;
                        Frac::new(
                            binomial(mu - closer, w_eff)
                                - binomial(mu - closer - class_size, w_eff),
                            binomial(mu, w_eff),
                        )
                    }
                };
                for &(_, g, m) in &by_distance[i..j] {
                    out.push((g, p_class * Frac::new(m as u128, class_size)));
                }
                closer += class_size;
                i = j;
            }
            out
        }
        AlgorithmKind::PlainMuPlusOne => {
            let worst = distinct
                .iter()
                .map(|&(g, _)| evaluate_ones(cfg.fitness, g.count_ones() as usize, cfg.n))
                .min()
                .unwrap();
            let total: u128 = distinct
                .iter()
                .filter(|&&(g, _)| {
                    evaluate_ones(cfg.fitness, g.count_ones() as usize, cfg.n) == worst
                })
                .map(|&(_, m)| m as u128)
                .sum();
            distinct
                .iter()
                .filter(|&&(g, _)| {
                    evaluate_ones(cfg.fitness, g.count_ones() as usize, cfg.n) == worst
                })
                .map(|&(g, m)| (g, Frac::new(m as u128, total)))
                .collect()
        }
        AlgorithmKind::DeterministicCrowding => unreachable!("rejected by limit checks"),
    }
}

fn genome_distance(kind: DistanceKind, a: u32, b: u32, _n: usize) -> usize {
    match kind {
        DistanceKind::Genotypic => (a ^ b).count_ones() as usize,
        DistanceKind::Phenotypic => (a.count_ones() as usize).abs_diff(b.count_ones() as usize),
    }
}

/// One-step distribution in double precision.
pub fn transition_distribution(
    state: &[u32],
    cfg: &AlgorithmConfig,
    limits: &OracleLimits,
) -> Result<Vec<(StateKey, f64)>, OracleError> {
    Ok(transition_distribution_exact(state, cfg, limits)?
        .into_iter()
        .map(|(s, p)| (s, p.to_f64()))
        .collect())
}

/// Result of an expected-hitting-time query.
#[derive(Debug, Clone, PartialEq)]
pub enum Absorption {
    Finite(f64),
    /// The absorbing set is unreachable from part of the initial support;
    /// the listed states form a closed class that never absorbs.
    Infinite { closed_class: Vec<String> },
}

/// Full exact transition system over all population multisets.
#[derive(Debug, Clone)]
pub struct MarkovModel {
    n: usize,
    mu: usize,
    states: Vec<StateKey>,
    index: HashMap<StateKey, usize>,
    rows: Vec<Vec<(u32, f64)>>,
    absorbing: Vec<bool>,
}

impl MarkovModel {
    /// Build the exact chain for one configuration (stopping criteria in the
    /// config are ignored; absorption is defined by population contents).
    pub fn build(cfg: &AlgorithmConfig, limits: &OracleLimits) -> Result<Self, OracleError> {
        check_limits(cfg, limits)?;
        let states = enumerate_states(cfg.n, cfg.mu, limits)?;
        let index: HashMap<StateKey, usize> = states
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), i))
            .collect();
        let mut rows = Vec::with_capacity(states.len());
        let mut absorbing = Vec::with_capacity(states.len());
        for state in &states {
            absorbing.push(contains_both_optima(state, cfg.n));
            let exact = transition_distribution_exact(state, cfg, limits)?;
            let row: Vec<(u32, f64)> = exact
                .into_iter()
                .map(|(s, p)| (index[&s] as u32, p.to_f64()))
                .collect();
            rows.push(row);
        }
        Ok(Self {
            n: cfg.n,
            mu: cfg.mu,
            states,
            index,
            rows,
            absorbing,
        })
    }

    pub fn states(&self) -> &[StateKey] {
        &self.states
    }

    pub fn state_index(&self, state: &[u32]) -> Option<usize> {
        self.index.get(state).copied()
    }

    pub fn is_absorbing(&self, state: usize) -> bool {
        self.absorbing[state]
    }

    pub fn row(&self, state: usize) -> &[(u32, f64)] {
        &self.rows[state]
    }

    pub fn render_state(&self, state: usize) -> String {
        render_state(&self.states[state], self.n)
    }

    /// Exact distribution of the uniform initialization over states.
    pub fn uniform_init(&self) -> Vec<f64> {
        let genomes = 1u128 << self.n;
        let total = pow_u128(genomes, self.mu);
        self.states
            .iter()
            .map(|state| {
                // number of ordered draws mapping to this multiset
                let mut perms = Frac::new(factorial(self.mu as u128), total);
                let mut i = 0;
                while i < state.len() {
                    let mut j = i;
                    while j < state.len() && state[j] == state[i] {
                        j += 1;
                    }
                    perms = perms * Frac::new(1, factorial((j - i) as u128));
                    i = j;
                }
                perms.to_f64()
            })
            .collect()
    }

    /// Probability of containing both optima within `t` generations, starting
    /// from `init` (absorption is cumulative because absorbing states
    /// self-loop).
    pub fn success_probability_within(&self, init: &[f64], t: u64) -> f64 {
        assert_eq!(init.len(), self.states.len());
        let mut v = init.to_vec();
        let mut next = vec![0.0; v.len()];
        for _ in 0..t {
            next.iter_mut().for_each(|x| *x = 0.0);
            for (i, row) in self.rows.iter().enumerate() {
                let mass = v[i];
                if mass == 0.0 {
                    continue;
                }
                for &(j, p) in row {
                    next[j as usize] += mass * p;
                }
            }
            std::mem::swap(&mut v, &mut next);
        }
        self.absorbing
            .iter()
            .zip(&v)
            .filter_map(|(&a, &p)| a.then_some(p))
            .sum()
    }

    /// Expected number of generations until the population contains both
    /// optima, or the closed class that prevents absorption.
    pub fn expected_absorption_time(&self, init: &[f64]) -> Absorption {
        assert_eq!(init.len(), self.states.len());
        let m = self.states.len();
        // forward reachability from the initial support
        let mut reachable = vec![false; m];
        let mut stack: Vec<usize> = (0..m).filter(|&i| init[i] > 0.0).collect();
        for &s in &stack {
            reachable[s] = true;
        }
        while let Some(s) = stack.pop() {
            for &(j, p) in &self.rows[s] {
                if p > 0.0 && !reachable[j as usize] {
                    reachable[j as usize] = true;
                    stack.push(j as usize);
                }
            }
        }
        // backward reachability from the absorbing set
        let mut reverse: Vec<Vec<usize>> = vec![Vec::new(); m];
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, p) in row {
                if p > 0.0 {
                    reverse[j as usize].push(i);
                }
            }
        }
        let mut reaches_absorbing = self.absorbing.clone();
        let mut stack: Vec<usize> = (0..m).filter(|&i| self.absorbing[i]).collect();
        while let Some(s) = stack.pop() {
            for &p in &reverse[s] {
                if !reaches_absorbing[p] {
                    reaches_absorbing[p] = true;
                    stack.push(p);
                }
            }
        }
        let stuck: Vec<usize> = (0..m)
            .filter(|&i| reachable[i] && !reaches_absorbing[i])
            .collect();
        if !stuck.is_empty() {
            return Absorption::Infinite {
                closed_class: stuck.iter().map(|&i| self.render_state(i)).collect(),
            };
        }
        // solve (I - Q) t = 1 over reachable transient states
        let transient: Vec<usize> = (0..m).filter(|&i| reachable[i] && !self.absorbing[i]).collect();
        let pos: HashMap<usize, usize> = transient.iter().enumerate().map(|(k, &i)| (i, k)).collect();
        let dim = transient.len();
        let mut a = vec![vec![0.0f64; dim + 1]; dim];
        for (k, &i) in transient.iter().enumerate() {
            a[k][k] = 1.0;
            a[k][dim] = 1.0;
            for &(j, p) in &self.rows[i] {
                if let Some(&kj) = pos.get(&(j as usize)) {
                    a[k][kj] -= p;
                }
            }
        }
        gaussian_solve(&mut a, dim);
        let mut expectation = 0.0;
        for (i, &mass) in init.iter().enumerate() {
            if mass > 0.0 && !self.absorbing[i] {
                expectation += mass * a[pos[&i]][dim];
            }
        }
        Absorption::Finite(expectation)
    }
}

fn factorial(k: u128) -> u128 {
    (1..=k).product::<u128>().max(1)
}

/// In-place Gaussian elimination with partial pivoting on an augmented
/// `dim x (dim+1)` system; the solution lands in the last column.
fn gaussian_solve(a: &mut [Vec<f64>], dim: usize) {
    for col in 0..dim {
        let pivot = (col..dim)
            .max_by(|&x, &y| a[x][col].abs().partial_cmp(&a[y][col].abs()).unwrap())
            .unwrap();
        a.swap(col, pivot);
        let p = a[col][col];
        assert!(p.abs() > 1e-12, "singular hitting-time system");
        for entry in &mut a[col][col..=dim] {
            *entry /= p;
        }
        for row in 0..dim {
            if row != col && a[row][col] != 0.0 {
                let f = a[row][col];
                let (pivot_row, target_row) = if row < col {
                    let (head, tail) = a.split_at_mut(col);
                    (&tail[0], &mut head[row])
                } else {
                    let (head, tail) = a.split_at_mut(row);
                    (&head[col], &mut tail[0])
                };
                for (t, &s) in target_row[col..=dim].iter_mut().zip(&pivot_row[col..=dim]) {
                    *t -= f * s;
                }
            }
        }
    }
}

/// Exact probability that a uniform initialization of `mu` genomes contains
/// at least one member with at most `n/2 - sigma` ones and one with at least
/// `n/2 + sigma` ones, as a reduced fraction. `None` when the exact integers
/// would overflow (`n * mu > 120`).
pub fn init_split_probability_frac(n: usize, mu: usize, sigma: usize) -> Option<(u128, u128)> {
    assert!(2 * sigma <= n, "sigma must be at most n/2");
    assert!(n >= 1 && mu >= 1);
    if n * mu > 120 {
        return None;
    }
    let t_low = (n - 2 * sigma) / 2;
    let t_high = n - t_low;
    let base = 1i128 << n;
    let low_tail: i128 = (0..=t_low).map(|k| binomial(n as u128, k as u128) as i128).sum();
    let middle: i128 = (t_low + 1..t_high)
        .map(|k| binomial(n as u128, k as u128) as i128)
        .sum();
    let num = pow_i128(base, mu) - 2 * pow_i128(base - low_tail, mu) + pow_i128(middle, mu);
    let den = pow_i128(base, mu);
    debug_assert!(num >= 0, "split probability cannot be negative");
    let g = {
        let mut a = num as u128;
        let mut b = den as u128;
        while b != 0 {
            let t = a % b;
            a = b;
            b = t;
        }
        a.max(1)
    };
    Some(((num as u128) / g, (den as u128) / g))
}

fn pow_i128(base: i128, exp: usize) -> i128 {
    let mut acc: i128 = 1;
    for _ in 0..exp {
        acc = acc.checked_mul(base).expect("power overflow");
    }
    acc
}

/// Exact initialization-split probability in double precision, with a
/// log-space fallback for instances beyond exact integer range.
pub fn init_split_probability_exact(n: usize, mu: usize, sigma: usize) -> f64 {
    if let Some((num, den)) = init_split_probability_frac(n, mu, sigma) {
        return num as f64 / den as f64;
    }
    let (p_low, p_mid) = binomial_tail_and_middle(n, sigma);
    let survive_one_side = 1.0 - p_low;
    1.0 - 2.0 * survive_one_side.powi(mu as i32) + p_mid.powi(mu as i32)
}

/// Closed-form lower bound on the split probability,
/// `1 - 2 ((1 + p_mid) / 2)^mu` with the exact middle mass `p_mid`.
pub fn init_split_lower_bound(n: usize, mu: usize, sigma: usize) -> f64 {
    let (_, p_mid) = binomial_tail_and_middle(n, sigma);
    1.0 - 2.0 * ((1.0 + p_mid) / 2.0).powi(mu as i32)
}

/// `(P(X <= n/2 - sigma), P(n/2 - sigma < X < n/2 + sigma))` for
/// `X ~ Bin(n, 1/2)`, in log-space for numerical range.
fn binomial_tail_and_middle(n: usize, sigma: usize) -> (f64, f64) {
    assert!(2 * sigma <= n);
    let t_low = (n - 2 * sigma) / 2;
    let t_high = n - t_low;
    let ln2 = std::f64::consts::LN_2;
    let mut ln_pmf = -(n as f64) * ln2; // ln P(X = 0)
    let mut low = 0.0f64;
    let mut mid = 0.0f64;
    for k in 0..=n {
        if k > 0 {
            ln_pmf += ((n - k + 1) as f64 / k as f64).ln();
        }
        let p = ln_pmf.exp();
        if k <= t_low {
            low += p;
        } else if k < t_high {
            mid += p;
        }
    }
    (low, mid)
}

#[cfg(test)]
mod tests;
