//! Goodness-of-fit helpers for the Monte Carlo checks.

use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Result of a chi-square goodness-of-fit test.
#[derive(Clone, Debug, Serialize)]
pub struct ChiSquare {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    /// Bins actually used after merging the rare ones.
    pub bins: usize,
}

impl ChiSquare {
    pub fn passes(&self, level: f64) -> bool {
        self.p_value >= level
    }
}

/// Chi-square statistic of observed counts against expected
/// probabilities. Bins whose expected count falls below `min_expected`
/// are merged into one remainder bin; `extra_mass` is unassigned
/// probability that joins the remainder.
pub fn chi_square_gof(
    observed: &[u64],
    probabilities: &[f64],
    extra_mass: f64,
    n: u64,
    min_expected: f64,
) -> ChiSquare {
    assert_eq!(observed.len(), probabilities.len());
    let nf = n as f64;
    let mut kept: Vec<(f64, f64)> = Vec::new();
    let mut rest_obs = nf - observed.iter().sum::<u64>() as f64;
    let mut rest_mass = extra_mass;
    for (&obs, &p) in observed.iter().zip(probabilities) {
        if p * nf >= min_expected {
            kept.push((obs as f64, p));
        } else {
            rest_obs += obs as f64;
            rest_mass += p;
        }
    }
    if rest_mass * nf >= 1e-9 || rest_obs > 0.0 {
        kept.push((rest_obs, rest_mass));
    }
    let statistic: f64 = kept
        .iter()
        .filter(|(_, p)| *p > 0.0)
        .map(|(obs, p)| {
            let expected = p * nf;
            (obs - expected).powi(2) / expected
        })
        .sum();
    let bins = kept.len();
    let dof = bins.saturating_sub(1).max(1);
    let chi = ChiSquared::new(dof as f64).expect("positive dof");
    ChiSquare {
        statistic,
        dof,
        p_value: 1.0 - chi.cdf(statistic),
        bins,
    }
}

/// Two-sample Kolmogorov-Smirnov statistic with the asymptotic critical
/// value at the 1% level.
pub fn ks_two_sample(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    assert!(!xs.is_empty() && !ys.is_empty());
    let mut xs = xs.to_vec();
    let mut ys = ys.to_vec();
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ys.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let (n, m) = (xs.len(), ys.len());
    let mut i = 0;
    let mut j = 0;
    let mut stat = 0.0f64;
    while i < n && j < m {
        let x = xs[i];
        let y = ys[j];
        let v = x.min(y);
        while i < n && xs[i] <= v {
            i += 1;
        }
        while j < m && ys[j] <= v {
            j += 1;
        }
        stat = stat.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    // c(alpha) = sqrt(-ln(alpha/2)/2); 1.6276 at the 1% level.
    let c01 = (-(0.005f64).ln() / 2.0).sqrt();
    let threshold = c01 * ((n + m) as f64 / (n * m) as f64).sqrt();
    (stat, threshold)
}
