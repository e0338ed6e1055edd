//! Fixed-length bitstring genomes and standard bit mutation.
//!
//! Bits are packed into 64-bit words with a popcount-based ones count, since
//! the inner loops dominate runtime for large populations and generation
//! budgets. Genomes are immutable after creation; mutation returns a new
//! genome.

use std::fmt;
use std::str::FromStr;

use crate::rng::RandomSource;

/// Immutable fixed-length bitstring. Unused high bits of the last word are
/// always zero.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Genome {
    n: usize,
    words: Box<[u64]>,
}

impl Genome {
    /// All-zeros genome of length `n`.
    pub fn all_zeros(n: usize) -> Self {
        assert!(n >= 1, "genome length must be at least 1");
        let words = vec![0u64; n.div_ceil(64)].into_boxed_slice();
        Self { n, words }
    }

    /// All-ones genome of length `n`.
    pub fn all_ones(n: usize) -> Self {
        let mut g = Self::all_zeros(n);
        for w in g.words.iter_mut() {
            *w = !0;
        }
        g.mask_tail();
        g
    }

    /// Build a genome from a per-position predicate.
    pub fn from_fn(n: usize, mut bit: impl FnMut(usize) -> bool) -> Self {
        let mut g = Self::all_zeros(n);
        for i in 0..n {
            if bit(i) {
                g.words[i / 64] |= 1u64 << (i % 64);
            }
        }
        g
    }

    /// Uniform random genome: every bit is an independent fair coin.
    pub fn random(n: usize, rng: &mut RandomSource) -> Self {
        let mut g = Self::all_zeros(n);
        for w in g.words.iter_mut() {
            *w = rng.next_u64();
        }
        g.mask_tail();
        g
    }

    #[inline]
    fn mask_tail(&mut self) {
        let rem = self.n % 64;
        if rem != 0 {
            let last = self.words.len() - 1;
            self.words[last] &= (1u64 << rem) - 1;
        }
    }

    /// Number of positions.
    #[inline]
    pub fn len(&self) -> usize {
        self.n
    }

    /// True when the genome has length zero (never constructed here).
    #[inline]
    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Bit at position `i`.
    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.n);
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    /// Number of 1-bits.
    #[inline]
    pub fn ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Hamming distance to another genome of the same length.
    #[inline]
    pub fn hamming(&self, other: &Genome) -> usize {
        assert_eq!(self.n, other.n, "genomes must have equal length");
        self.words
            .iter()
            .zip(other.words.iter())
            .map(|(a, b)| (a ^ b).count_ones() as usize)
            .sum()
    }

    /// Standard bit mutation: each bit flips independently with probability
    /// `1/n`. Flip positions are sampled through geometric gaps, which costs
    /// one draw per flipped bit instead of one per bit.
    pub fn mutate(&self, rng: &mut RandomSource) -> Genome {
        let n = self.n;
        let mut out = self.clone();
        if n == 1 {
            // flip probability 1/n = 1
            out.words[0] ^= 1;
            return out;
        }
        let ln_q = (1.0 - 1.0 / n as f64).ln();
        let mut pos = 0usize;
        while pos < n {
            let gap = rng.unit_exclusive_zero().ln() / ln_q;
            let remaining = (n - pos) as f64;
            if gap >= remaining {
                break;
            }
            pos += gap as usize;
            out.words[pos / 64] ^= 1u64 << (pos % 64);
            pos += 1;
        }
        out
    }
}

impl fmt::Display for Genome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.n {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for Genome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Genome({self})")
    }
}

/// Parse from a string of `0`/`1` characters; handy in tests and configs.
impl FromStr for Genome {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.is_empty() {
            return Err("genome string must be nonempty".into());
        }
        let mut bits = Vec::with_capacity(s.len());
        for (i, c) in s.chars().enumerate() {
            match c {
                '0' => bits.push(false),
                '1' => bits.push(true),
                other => return Err(format!("invalid bit {other:?} at position {i}")),
            }
        }
        Ok(Genome::from_fn(bits.len(), |i| bits[i]))
    }
}

/// Number of 1-bits in a genome.
#[inline]
pub fn ones(g: &Genome) -> usize {
    g.ones()
}

/// Uniform random genome of length `n`.
pub fn random_genome(n: usize, rng: &mut RandomSource) -> Genome {
    Genome::random(n, rng)
}

/// Mutate `g` by flipping each bit independently with probability `1/n`.
pub fn mutate(g: &Genome, rng: &mut RandomSource) -> Genome {
    g.mutate(rng)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ones_zero_case() {
        assert_eq!(Genome::all_zeros(100).ones(), 0);
    }

    #[test]
    fn ones_identity_case() {
        assert_eq!(Genome::all_ones(100).ones(), 100);
    }

    #[test]
    fn ones_direct_count() {
        let g: Genome = "0110".parse().unwrap();
        assert_eq!(g.ones(), 2);
        assert_eq!(g.len(), 4);
    }

    #[test]
    fn display_round_trips() {
        let g: Genome = "10110010".parse().unwrap();
        assert_eq!(g.to_string(), "10110010");
    }

    #[test]
    fn mutate_length_one_always_flips() {
        let mut rng = RandomSource::new(5);
        let g = Genome::all_zeros(1);
        for _ in 0..100 {
            assert_eq!(g.mutate(&mut rng).ones(), 1);
        }
    }

    #[test]
    fn mutate_preserves_length_and_input() {
        let mut rng = RandomSource::new(11);
        let g = Genome::random(130, &mut rng);
        let before = g.to_string();
        let m = g.mutate(&mut rng);
        assert_eq!(m.len(), 130);
        assert_eq!(g.to_string(), before);
    }

    #[test]
    fn mutate_flip_count_mean_matches_binomial() {
        // n=100: flips ~ Binomial(100, 1/100), mean 1, variance 0.99.
        let mut rng = RandomSource::new(2024);
        let g = Genome::all_zeros(100);
        let trials = 100_000usize;
        let mut total = 0usize;
        for _ in 0..trials {
            total += g.mutate(&mut rng).ones();
        }
        let mean = total as f64 / trials as f64;
        let sigma_mean = (0.99f64 / trials as f64).sqrt();
        assert!(
            (mean - 1.0).abs() < 3.0 * sigma_mean,
            "mean {mean} not within 3 sigma of 1.0"
        );
    }

    #[test]
    fn mutate_no_flip_probability_matches_formula() {
        // P(no flip) = (1 - 1/100)^100.
        let mut rng = RandomSource::new(77);
        let g = Genome::all_zeros(100);
        let trials = 100_000usize;
        let none = (0..trials)
            .filter(|_| g.mutate(&mut rng).ones() == 0)
            .count();
        let p = (1.0f64 - 0.01).powi(100);
        let sigma = (p * (1.0 - p) / trials as f64).sqrt();
        let freq = none as f64 / trials as f64;
        assert!(
            (freq - p).abs() < 3.0 * sigma,
            "freq {freq} vs expected {p}"
        );
    }

    #[test]
    fn random_genome_single_bit_is_fair() {
        let mut rng = RandomSource::new(123);
        let trials = 100_000usize;
        let ones = (0..trials)
            .filter(|_| Genome::random(1, &mut rng).ones() == 1)
            .count();
        let sigma = (trials as f64 * 0.25).sqrt();
        assert!((ones as f64 - trials as f64 / 2.0).abs() < 3.0 * sigma);
    }

    #[test]
    fn random_genome_uniform_over_four_bit_space() {
        // chi-square against the uniform distribution on all 16 genomes
        let mut rng = RandomSource::new(314);
        let trials = 100_000usize;
        let mut counts = [0f64; 16];
        for _ in 0..trials {
            let g = Genome::random(4, &mut rng);
            let code: usize = (0..4).map(|i| usize::from(g.get(i)) << i).sum();
            counts[code] += 1.0;
        }
        let expected = [trials as f64 / 16.0; 16];
        let chi2 = crate::stats::chi_square_statistic(&counts, &expected);
        let critical = crate::stats::chi_square_critical_p001(15.0);
        assert!(chi2 < critical, "chi2 {chi2} over critical {critical}");
    }

    #[test]
    fn random_genome_ones_count_moments_match_binomial() {
        // ones ~ Binomial(100, 1/2): mean 50, variance 25
        let mut rng = RandomSource::new(2718);
        let trials = 100_000usize;
        let ones: Vec<f64> = (0..trials)
            .map(|_| Genome::random(100, &mut rng).ones() as f64)
            .collect();
        let (mean, std) = crate::stats::mean_and_sample_std(&ones);
        let sigma_mean = (25.0f64 / trials as f64).sqrt();
        assert!((mean - 50.0).abs() < 3.0 * sigma_mean, "mean {mean}");
        // var(s^2) ~ (mu4 - sigma^4) / N for large N, mu4 = npq(1 + 3pq(n-2))
        let mu4 = 25.0 * (1.0 + 3.0 * 0.25 * 98.0);
        let sigma_var = ((mu4 - 625.0) / trials as f64).sqrt();
        let var = std * std;
        assert!((var - 25.0).abs() < 3.0 * sigma_var, "variance {var}");
    }

    #[test]
    fn random_genome_seed_reproducibility() {
        let mut a = RandomSource::new(1001);
        let mut b = RandomSource::new(1001);
        for _ in 0..50 {
            assert_eq!(Genome::random(97, &mut a), Genome::random(97, &mut b));
        }
    }
}
