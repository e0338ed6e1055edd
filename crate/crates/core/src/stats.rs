//! Small statistical helpers used by the validation suite and tests.

/// Mean and sample standard deviation (n-1 denominator; 0 for n < 2).
pub fn mean_and_sample_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    (mean, (ss / (n - 1.0)).sqrt())
}

/// Binomial probability mass `P(Bin(n, p) = k)` computed in log space.
pub fn binomial_pmf(n: usize, p: f64, k: usize) -> f64 {
    if p <= 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    if p >= 1.0 {
        return if k == n { 1.0 } else { 0.0 };
    }
    let mut ln = k as f64 * p.ln() + (n - k) as f64 * (1.0 - p).ln();
    for i in 0..k.min(n - k) {
        ln += ((n - i) as f64).ln() - ((i + 1) as f64).ln();
    }
    ln.exp()
}

/// Chi-square critical value at significance 0.001: tabulated for small
/// degrees of freedom, Wilson-Hilferty beyond (where the transform error is
/// negligible).
pub fn chi_square_critical_p001(dof: f64) -> f64 {
    const TABLE: [f64; 20] = [
        10.828, 13.816, 16.266, 18.467, 20.515, 22.458, 24.322, 26.125, 27.877, 29.588, 31.264,
        32.909, 34.528, 36.123, 37.697, 39.252, 40.790, 42.312, 43.820, 45.315,
    ];
    if dof.fract() == 0.0 && (1.0..=20.0).contains(&dof) {
        return TABLE[dof as usize - 1];
    }
    // 0.999 standard normal quantile
    let z = 3.090_232_306_167_813;
    let a = 2.0 / (9.0 * dof);
    dof * (1.0 - a + z * a.sqrt()).powi(3)
}

/// Pearson chi-square statistic for observed counts against expected counts.
pub fn chi_square_statistic(observed: &[f64], expected: &[f64]) -> f64 {
    assert_eq!(observed.len(), expected.len());
    observed
        .iter()
        .zip(expected)
        .map(|(&o, &e)| {
            debug_assert!(e > 0.0);
            let d = o - e;
            d * d / e
        })
        .sum()
}

/// Bucket a flip-count histogram against binomial expectations, merging the
/// upper tail so every expected count stays above `min_expected`. Returns
/// (observed, expected) bucket vectors.
pub fn binomial_buckets(
    counts: &[u64],
    n: usize,
    p: f64,
    samples: u64,
    min_expected: f64,
) -> (Vec<f64>, Vec<f64>) {
    let mut observed = Vec::new();
    let mut expected = Vec::new();
    let mut tail_obs = 0.0;
    let mut tail_exp = 0.0;
    for k in 0..=n {
        let e = binomial_pmf(n, p, k) * samples as f64;
        let o = counts.get(k).copied().unwrap_or(0) as f64;
        if e >= min_expected && tail_exp == 0.0 {
            observed.push(o);
            expected.push(e);
        } else {
            tail_obs += o;
            tail_exp += e;
        }
    }
    if tail_exp > 0.0 {
        observed.push(tail_obs);
        expected.push(tail_exp);
    }
    (observed, expected)
}
