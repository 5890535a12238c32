//! Offspring distributions and their generating-function analytics.
//!
//! An [`OffspringDistribution`] is a law on the nonnegative integers
//! with mean at most one and some mass at or above two. Iterating its
//! generating function at zero gives the height distribution of the
//! associated branching tree: `P(height < n) = g_n(0)`.
//!
//! The backend is chosen through the scalar parameter: `BigRational`
//! for exact arithmetic (finite laws and the critical geometric law),
//! `f64` otherwise.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use rand::Rng;
use serde::Serialize;

/// Analytic family of the law.
#[derive(Clone, Debug, PartialEq)]
pub enum OffspringKind {
    /// Arbitrary masses on `0..masses.len()`.
    Finite,
    /// `mu(k) = 2^-(k+1)`; critical, variance 2.
    Geometric,
    /// Poisson with mean 1; critical, variance 1. Float backend only.
    Poisson,
    /// `mu(k) = c k^-(1+alpha)` for `k >= 2`, `alpha` in (1,2), with
    /// `mu(0)`, `mu(1)` fixed by criticality. Float backend only.
    PowerTail { alpha: f64, c: f64 },
}

#[derive(Clone, Debug)]
pub struct OffspringDistribution<S: Scalar> {
    kind: OffspringKind,
    /// Finite kind: the full mass list. Other kinds: empty.
    masses: Vec<S>,
}

/// Outcome of the standing-assumption checks.
#[derive(Clone, Debug, Serialize)]
pub struct Diagnostics {
    pub mean: f64,
    /// `None` encodes an infinite second moment.
    pub variance: Option<f64>,
    pub critical: bool,
}

/// Iterates `g_0(0) = 0, g_1(0), ..., g_n(0)` of the generating function.
#[derive(Clone, Debug)]
pub struct GfIterates<S: Scalar> {
    values: Vec<S>,
}

impl<S: Scalar> GfIterates<S> {
    /// `g_n(0)`, i.e. the probability that the tree height is `< n`.
    pub fn at(&self, n: usize) -> &S {
        &self.values[n]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    /// `P(height = n) = g_{n+1}(0) - g_n(0)`; requires `n + 1 < len`.
    pub fn height_pmf(&self, n: usize) -> S {
        self.values[n + 1].clone() - self.values[n].clone()
    }
}

/// Exact ν-tail value together with its analytic upper bound.
#[derive(Clone, Debug)]
pub struct NuTail<S: Scalar> {
    /// `P(nu >= 2 | height = n)`.
    pub value: S,
    /// Bound from the convexity of the generating function; `None`
    /// when the derivative in the denominator vanishes.
    pub bound: Option<S>,
}

impl<S: Scalar> OffspringDistribution<S> {
    /// Law with the given masses on `0..masses.len()`.
    pub fn finite(masses: Vec<S>) -> Result<Self> {
        let dist = OffspringDistribution {
            kind: OffspringKind::Finite,
            masses,
        };
        dist.validate()?;
        Ok(dist)
    }

    /// Critical geometric law `mu(k) = 2^-(k+1)`.
    pub fn geometric_half() -> Self {
        OffspringDistribution {
            kind: OffspringKind::Geometric,
            masses: Vec::new(),
        }
    }

    /// Poisson with mean one. Rejected on the exact backend.
    pub fn poisson_one() -> Result<Self> {
        if S::EXACT {
            return Err(Error::ExactBackendUnsupported("the Poisson law"));
        }
        Ok(OffspringDistribution {
            kind: OffspringKind::Poisson,
            masses: Vec::new(),
        })
    }

    /// Critical power-tail law with exponent `alpha` in (1,2).
    ///
    /// The tail constant is the largest one keeping `mu(1) = 0`, so
    /// `c = 1/sum_{k>=2} k^-alpha` and `mu(0) = 1 - c*sum_{k>=2} k^-(1+alpha)`
    /// make the mean exactly one. Rejected on the exact backend.
    pub fn power_tail(alpha: f64) -> Result<Self> {
        if S::EXACT {
            return Err(Error::ExactBackendUnsupported("the power-tail law"));
        }
        if !(1.0 < alpha && alpha < 2.0) {
            return Err(Error::InvalidDistribution(format!(
                "power-tail exponent {alpha} outside (1, 2)"
            )));
        }
        let s1 = zeta_tail(alpha); // sum_{k>=2} k^-alpha
        let c = 1.0 / s1;
        Ok(OffspringDistribution {
            kind: OffspringKind::PowerTail { alpha, c },
            masses: Vec::new(),
        })
    }

    pub fn kind(&self) -> &OffspringKind {
        &self.kind
    }

    pub fn is_finite_support(&self) -> bool {
        matches!(self.kind, OffspringKind::Finite)
    }

    /// Largest childcount with positive mass, when the support is finite.
    pub fn max_support(&self) -> Option<usize> {
        match self.kind {
            OffspringKind::Finite => self
                .masses
                .iter()
                .rposition(|m| m.clone() > S::zero()),
            _ => None,
        }
    }

    /// `mu(k)`.
    pub fn pmf(&self, k: usize) -> S {
        match &self.kind {
            OffspringKind::Finite => self.masses.get(k).cloned().unwrap_or_else(S::zero),
            OffspringKind::Geometric => S::from_ratio(1, 2).powu(k as u64 + 1),
            OffspringKind::Poisson => {
                // e^-1 / k!
                let mut log_p = -1.0f64;
                for j in 1..=k {
                    log_p -= (j as f64).ln();
                }
                S::from_f64(log_p.exp())
            }
            OffspringKind::PowerTail { alpha, c } => match k {
                0 => S::from_f64(1.0 - c * zeta_tail(*alpha + 1.0)),
                1 => S::zero(),
                _ => S::from_f64(c * (k as f64).powf(-1.0 - alpha)),
            },
        }
    }

    /// Standing-assumption checks: masses sum to one, mean at most one,
    /// some mass at `k >= 2`.
    pub fn validate(&self) -> Result<Diagnostics> {
        match &self.kind {
            OffspringKind::Finite => {
                if self.masses.iter().any(|m| m.clone() < S::zero()) {
                    return Err(Error::InvalidDistribution("negative mass".into()));
                }
                let total: S = self
                    .masses
                    .iter()
                    .fold(S::zero(), |acc, m| acc + m.clone());
                let total_err = (total.to_f64() - 1.0).abs();
                if S::EXACT {
                    if total != S::one() {
                        return Err(Error::InvalidDistribution(format!(
                            "masses sum to {total}, not 1"
                        )));
                    }
                } else if total_err > 1e-12 {
                    return Err(Error::InvalidDistribution(format!(
                        "masses sum to {total}, off by {total_err:e}"
                    )));
                }
                let mean = self.mean_scalar();
                if mean.clone() > S::one() && (S::EXACT || mean.to_f64() > 1.0 + 1e-12) {
                    return Err(Error::InvalidDistribution(format!(
                        "mean {} exceeds 1",
                        mean.to_f64()
                    )));
                }
                if self
                    .masses
                    .iter()
                    .skip(2)
                    .all(|m| m.clone() <= S::zero())
                {
                    return Err(Error::InvalidDistribution(
                        "support contained in {0, 1}".into(),
                    ));
                }
                let mean = mean.to_f64();
                let second: f64 = self
                    .masses
                    .iter()
                    .enumerate()
                    .map(|(k, m)| (k * k) as f64 * m.to_f64())
                    .sum();
                Ok(Diagnostics {
                    mean,
                    variance: Some(second - mean * mean),
                    critical: (mean - 1.0).abs() < 1e-12,
                })
            }
            OffspringKind::Geometric => Ok(Diagnostics {
                mean: 1.0,
                variance: Some(2.0),
                critical: true,
            }),
            OffspringKind::Poisson => Ok(Diagnostics {
                mean: 1.0,
                variance: Some(1.0),
                critical: true,
            }),
            OffspringKind::PowerTail { .. } => Ok(Diagnostics {
                mean: 1.0,
                variance: None,
                critical: true,
            }),
        }
    }

    fn mean_scalar(&self) -> S {
        match &self.kind {
            OffspringKind::Finite => self
                .masses
                .iter()
                .enumerate()
                .fold(S::zero(), |acc, (k, m)| {
                    acc + S::from_usize(k) * m.clone()
                }),
            _ => S::one(),
        }
    }

    /// Generating function `g(s) = sum_k mu(k) s^k`.
    pub fn gf(&self, s: &S) -> S {
        match &self.kind {
            OffspringKind::Finite => {
                // Horner evaluation.
                self.masses
                    .iter()
                    .rev()
                    .fold(S::zero(), |acc, m| acc * s.clone() + m.clone())
            }
            OffspringKind::Geometric => {
                // sum 2^-(k+1) s^k = 1 / (2 - s)
                S::one() / (S::from_usize(2) - s.clone())
            }
            OffspringKind::Poisson => S::from_f64((s.to_f64() - 1.0).exp()),
            OffspringKind::PowerTail { .. } => S::from_f64(self.series_f64(s.to_f64(), 0)),
        }
    }

    /// Derivative `g'(s) = sum_k k mu(k) s^(k-1)`.
    pub fn gf_derivative(&self, s: &S) -> S {
        match &self.kind {
            OffspringKind::Finite => {
                let mut acc = S::zero();
                for (k, m) in self.masses.iter().enumerate().skip(1).rev() {
                    acc = acc * s.clone() + S::from_usize(k) * m.clone();
                }
                acc
            }
            OffspringKind::Geometric => {
                let d = S::from_usize(2) - s.clone();
                S::one() / (d.clone() * d)
            }
            OffspringKind::Poisson => S::from_f64((s.to_f64() - 1.0).exp()),
            OffspringKind::PowerTail { .. } => S::from_f64(self.series_f64(s.to_f64(), 1)),
        }
    }

    /// Truncated series for the infinite-support float kinds; `moment`
    /// 0 gives g(s), 1 gives g'(s). Stops once the remaining mass is
    /// below 1e-12.
    fn series_f64(&self, s: f64, moment: u32) -> f64 {
        let mut acc = 0.0;
        let mut cumulative = 0.0;
        let mut k = 0usize;
        while cumulative < 1.0 - 1e-12 && k < 4_000_000 {
            let p = self.pmf(k).to_f64();
            cumulative += p;
            let term = match moment {
                0 => p * s.powi(k as i32),
                _ => {
                    if k >= 1 {
                        k as f64 * p * s.powi(k as i32 - 1)
                    } else {
                        0.0
                    }
                }
            };
            acc += term;
            k += 1;
        }
        acc
    }

    /// Iterates of the generating function at zero, `g_0(0) .. g_n(0)`.
    pub fn g_iter(&self, n: usize) -> GfIterates<S> {
        let mut values = Vec::with_capacity(n + 1);
        values.push(S::zero());
        let mut current = S::zero();
        for _ in 0..n {
            current = self.gf(&current);
            values.push(current.clone());
        }
        GfIterates { values }
    }

    /// Exact conditional probability `P(nu >= 2 | height = n)` with its
    /// convexity bound.
    ///
    /// The value is
    /// `1 - (g_n(0) - g_{n-1}(0)) / (g_{n+1}(0) - g_n(0)) * g'(g_{n-1}(0))`
    /// and is checked against the returned bound.
    pub fn nu_ge2_prob(&self, n: usize) -> Result<NuTail<S>> {
        if n == 0 {
            return Err(Error::DegenerateHeight { n });
        }
        let g = self.g_iter(n + 1);
        let g_nm1 = g.at(n - 1).clone();
        let g_n = g.at(n).clone();
        let g_np1 = g.at(n + 1).clone();
        let a = g_n.clone() - g_nm1.clone();
        let denom = g_np1.clone() - g_n.clone();
        if denom <= S::zero() || a <= S::zero() {
            return Err(Error::DegenerateHeight { n });
        }
        let deriv = self.gf_derivative(&g_nm1);
        let value = S::one() - a / denom.clone() * deriv.clone();

        let one = S::one();
        let bound = if deriv > S::zero() {
            Some(
                (one.clone() / deriv)
                    * ((one.clone() - g_nm1) / (one.clone() - g_n.clone())
                        + (one.clone() - g_np1) / (one.clone() - g_n)
                        - S::from_usize(2)),
            )
        } else {
            None
        };
        debug_assert!(
            !S::EXACT
                || (value >= S::zero()
                    && bound.clone().map_or(true, |b| value <= b)),
            "nu tail outside its bound"
        );
        Ok(NuTail { value, bound })
    }

    /// Probe of the finite-size positivity behind the height-profile
    /// normalization: the sequence `g_{floor(p r)}(0) ^ (b_p / p)`.
    ///
    /// The values should stay bounded away from zero as `p` grows for
    /// any admissible scaling sequence `b_p`.
    pub fn asszeta_probe(&self, r: f64, pairs: &[(u32, u64)]) -> Vec<f64> {
        pairs
            .iter()
            .map(|&(p, b_p)| {
                let n = (p as f64 * r).floor() as usize;
                let g = self.g_iter(n);
                let base = g.at(n).to_f64();
                base.powf(b_p as f64 / p as f64)
            })
            .collect()
    }

    /// Inversion sampler; built once per distribution and reused.
    pub fn sampler(&self) -> OffspringSampler {
        match &self.kind {
            OffspringKind::Geometric => OffspringSampler::Geometric,
            OffspringKind::Finite => {
                let mut thresholds = Vec::with_capacity(self.masses.len());
                let mut acc = S::zero();
                for m in &self.masses {
                    acc = acc + m.clone();
                    thresholds.push(cdf_to_u64(&acc));
                }
                if let Some(last) = thresholds.last_mut() {
                    *last = u64::MAX;
                }
                OffspringSampler::Table { thresholds }
            }
            // Sequential inversion; the expected scan length is the
            // mean plus one, and heavy tails keep it finite.
            OffspringKind::Poisson => OffspringSampler::Scan {
                kind: OffspringKind::Poisson,
            },
            OffspringKind::PowerTail { alpha, c } => OffspringSampler::Scan {
                kind: OffspringKind::PowerTail {
                    alpha: *alpha,
                    c: *c,
                },
            },
        }
    }
}

impl OffspringDistribution<f64> {
    /// Numeric second moment diagnostics used by the scaling module.
    pub fn variance_f64(&self) -> Option<f64> {
        self.validate().ok().and_then(|d| d.variance)
    }

    /// Tail exponent and constant when the law is of power-tail kind.
    pub fn stable_tail(&self) -> Option<(f64, f64)> {
        match self.kind {
            OffspringKind::PowerTail { alpha, c } => Some((alpha, c)),
            _ => None,
        }
    }
}

/// `sum_{k>=2} k^-s` for `s > 1`, by direct summation plus an
/// Euler-Maclaurin tail.
fn zeta_tail(s: f64) -> f64 {
    let n = 100_000u64;
    let mut acc = 0.0;
    for k in 2..n {
        acc += (k as f64).powf(-s);
    }
    let nf = n as f64;
    acc + nf.powf(1.0 - s) / (s - 1.0) + 0.5 * nf.powf(-s) + s / 12.0 * nf.powf(-s - 1.0)
}

fn cdf_to_u64<S: Scalar>(cdf: &S) -> u64 {
    f64_to_u64_fixed(cdf.to_f64())
}

fn f64_to_u64_fixed(x: f64) -> u64 {
    if x >= 1.0 {
        u64::MAX
    } else {
        (x * (u64::MAX as f64)) as u64
    }
}

/// Draws childcounts; built once per distribution and reused.
#[derive(Clone, Debug)]
pub enum OffspringSampler {
    /// `mu(k) = 2^-(k+1)` via the trailing-zero count of a uniform word.
    Geometric,
    /// Fixed-point inversion table.
    Table { thresholds: Vec<u64> },
    /// Sequential inversion against the analytic pmf.
    Scan { kind: OffspringKind },
}

impl OffspringSampler {
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        match self {
            OffspringSampler::Geometric => {
                // Trailing zeros of a uniform u64 are geometric(1/2);
                // the all-zero word (probability 2^-64) is redrawn.
                loop {
                    let u: u64 = rng.gen();
                    if u != 0 {
                        return u.trailing_zeros() as usize;
                    }
                }
            }
            OffspringSampler::Table { thresholds } => {
                let u: u64 = rng.gen();
                match thresholds.binary_search_by(|t| t.cmp(&u)) {
                    Ok(i) => i + 1,
                    Err(i) => i,
                }
            }
            OffspringSampler::Scan { kind } => {
                let mut u: f64 = rng.gen();
                let mut k = 0usize;
                loop {
                    let p = scan_pmf(kind, k);
                    if u < p || k > 100_000_000 {
                        return k;
                    }
                    u -= p;
                    k += 1;
                }
            }
        }
    }
}

fn scan_pmf(kind: &OffspringKind, k: usize) -> f64 {
    match kind {
        OffspringKind::Poisson => {
            let mut log_p = -1.0f64;
            for j in 1..=k {
                log_p -= (j as f64).ln();
            }
            log_p.exp()
        }
        OffspringKind::PowerTail { alpha, c } => match k {
            0 => 1.0 - c * zeta_tail(*alpha + 1.0),
            1 => 0.0,
            _ => c * (k as f64).powf(-1.0 - alpha),
        },
        _ => unreachable!("scan sampler is only built for analytic kinds"),
    }
}
