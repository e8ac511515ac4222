//! Small statistics helpers shared by the Monte Carlo checks.

/// Standard error of an empirical frequency with true probability `p`
/// over `n` trials.
pub fn binomial_stderr(p: f64, n: u64) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

/// Pearson chi-square statistic for observed counts against expected
/// probabilities (which must sum to 1) over `n = sum(observed)` trials.
pub fn chi_square_statistic(observed: &[u64], expected_probs: &[f64]) -> f64 {
    assert_eq!(observed.len(), expected_probs.len());
    let n: u64 = observed.iter().sum();
    observed
        .iter()
        .zip(expected_probs)
        .map(|(&o, &pe)| {
            let e = pe * n as f64;
            if e == 0.0 {
                if o == 0 { 0.0 } else { f64::INFINITY }
            } else {
                let d = o as f64 - e;
                d * d / e
            }
        })
        .sum()
}

/// 0.999 quantile of the chi-square distribution with 2 degrees of
/// freedom: -2 ln(0.001).
pub const CHI2_DF2_Q999: f64 = 13.815510557964274;

/// 0.999 quantile with 4 degrees of freedom (for depth-2 pattern tables
/// with 5 cells).
pub const CHI2_DF4_Q999: f64 = 18.466826952903224;
