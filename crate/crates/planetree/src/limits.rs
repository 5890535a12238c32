//! Continuum reference laws and desk-scale convergence diagnostics.
//!
//! The scaling limits of the diameter-conditioned trees are governed by
//! a branching mechanism `Psi`. Two closed-form families are built in
//! (`Psi(x) = x^2` and `Psi(x) = x^alpha`), and a custom mechanism can
//! be assembled from a drift, a quadratic coefficient and a discretized
//! jump measure. The height tail solves
//! `integral_v(r)^inf dx/Psi(x) = r`, and the diameter tail follows
//! from it; both closed forms are cross-checked against adaptive
//! quadrature.
//!
//! No continuum process is simulated. Convergence is checked through
//! deterministic height identities, exact finite-size formulas, and
//! cross-size self-consistency of rescaled functionals.

use crate::error::{Error, Result};
use crate::gw_sampler::{RngStream, SampleBudget};
use crate::offspring::OffspringDistribution;
use crate::ordered_tree::ContourPath;
use crate::plane_tree::compose;
use crate::diameter_sampler::sample_pair;
use crate::stats;
use rayon::prelude::*;
use serde::Serialize;

/// Laplace exponent of the limiting branching mechanism.
#[derive(Clone, Debug)]
pub enum BranchingMechanism {
    /// `Psi(x) = x^2`; the finite-variance limit.
    Brownian,
    /// `Psi(x) = x^alpha`, `alpha` in (1, 2).
    Stable { alpha: f64 },
    /// `Psi(x) = a x + b x^2 + sum_i m_i (exp(-x j_i) - 1 + x j_i)`.
    ///
    /// The tail integrability requires `b > 0`: a finite jump list only
    /// contributes linear growth.
    Custom {
        a: f64,
        b: f64,
        jumps: Vec<(f64, f64)>,
    },
}

impl BranchingMechanism {
    pub fn stable(alpha: f64) -> Result<Self> {
        if !(1.0 < alpha && alpha < 2.0) {
            return Err(Error::NonIntegrable);
        }
        Ok(BranchingMechanism::Stable { alpha })
    }

    pub fn custom(a: f64, b: f64, jumps: Vec<(f64, f64)>) -> Result<Self> {
        if b <= 0.0 || a < 0.0 || jumps.iter().any(|&(x, m)| x <= 0.0 || m < 0.0) {
            return Err(Error::NonIntegrable);
        }
        Ok(BranchingMechanism::Custom { a, b, jumps })
    }

    pub fn psi(&self, x: f64) -> f64 {
        match self {
            BranchingMechanism::Brownian => x * x,
            BranchingMechanism::Stable { alpha } => x.powf(*alpha),
            BranchingMechanism::Custom { a, b, jumps } => {
                let jump_part: f64 = jumps
                    .iter()
                    .map(|&(j, m)| m * ((-x * j).exp() - 1.0 + x * j))
                    .sum();
                a * x + b * x * x + jump_part
            }
        }
    }

    /// Solves `integral_v^inf dx/psi(x) = r`; closed forms where they
    /// exist, bracketing root-find otherwise.
    pub fn v_of_r(&self, r: f64) -> Result<f64> {
        if r <= 0.0 {
            return Err(Error::NonIntegrable);
        }
        match self {
            BranchingMechanism::Brownian => Ok(1.0 / r),
            BranchingMechanism::Stable { alpha } => {
                Ok(((alpha - 1.0) * r).powf(-1.0 / (alpha - 1.0)))
            }
            BranchingMechanism::Custom { .. } => self.v_of_r_numeric(r),
        }
    }

    /// Root-find on the numerically integrated tail, relative tolerance
    /// 1e-10.
    pub fn v_of_r_numeric(&self, r: f64) -> Result<f64> {
        if r <= 0.0 {
            return Err(Error::NonIntegrable);
        }
        // Bracket in log-space: the tail integral decreases from
        // +inf to 0 as v grows.
        let mut lo = 1.0f64;
        while self.tail_integral(lo, 1)? < r {
            lo /= 2.0;
            if lo < 1e-300 {
                return Err(Error::NonIntegrable);
            }
        }
        let mut hi = lo;
        while self.tail_integral(hi, 1)? >= r {
            hi *= 2.0;
            if hi > 1e300 {
                return Err(Error::NonIntegrable);
            }
        }
        for _ in 0..200 {
            let mid = (lo.ln() + hi.ln()).mul_add(0.5, 0.0).exp();
            if self.tail_integral(mid, 1)? >= r {
                lo = mid;
            } else {
                hi = mid;
            }
            if (hi - lo) / lo < 1e-12 {
                break;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// Height-tail mass above `r`: `v(r)` itself.
    pub fn height_tail(&self, r: f64) -> Result<f64> {
        self.v_of_r(r)
    }

    /// Mass of diameters exceeding `2r`:
    /// `v(r) - psi(v(r))^2 * integral_{v(r)}^inf dx/psi(x)^2`.
    pub fn diameter_tail(&self, r: f64) -> Result<f64> {
        match self {
            BranchingMechanism::Brownian => Ok(2.0 / (3.0 * r)),
            BranchingMechanism::Stable { alpha } => {
                let v = self.v_of_r(r)?;
                Ok(v * (2.0 * alpha - 2.0) / (2.0 * alpha - 1.0))
            }
            BranchingMechanism::Custom { .. } => self.diameter_tail_numeric(r),
        }
    }

    pub fn diameter_tail_numeric(&self, r: f64) -> Result<f64> {
        let v = self.v_of_r_numeric(r)?;
        let psi_v = self.psi(v);
        Ok(v - psi_v * psi_v * self.tail_integral(v, 2)?)
    }

    /// `integral_v^inf dx / psi(x)^power` by adaptive quadrature on the
    /// substitution `x = v e^u`, with an analytic remainder bound.
    pub fn tail_integral(&self, v: f64, power: i32) -> Result<f64> {
        let integrand = |u: f64| {
            let x = v * u.exp();
            x / self.psi(x).powi(power)
        };
        // Coarse pass to put the tolerance on a relative scale; the
        // integrand decays, so the first window dominates.
        let coarse = (integrand(0.0) + 4.0 * integrand(1.0) + integrand(2.0)) / 3.0
            + self.tail_remainder_bound(v * 2.0f64.exp(), power);
        let tol = coarse.max(1e-300) * 1e-12;
        let mut upper = 2.0f64;
        let mut total = adaptive_simpson(&integrand, 0.0, upper, tol);
        loop {
            let remainder = self.tail_remainder_bound(v * upper.exp(), power);
            if remainder < 1e-13 * total.max(1e-300) || upper > 900.0 {
                break;
            }
            let next = upper * 1.5;
            total += adaptive_simpson(&integrand, upper, next, tol);
            upper = next;
        }
        Ok(total)
    }

    /// Upper bound on `integral_L^inf dx/psi(x)^power`.
    fn tail_remainder_bound(&self, l: f64, power: i32) -> f64 {
        match self {
            BranchingMechanism::Brownian => {
                // psi = x^2: integral = L^(1-2 power)/(2 power - 1).
                l.powi(1 - 2 * power) / (2.0 * power as f64 - 1.0)
            }
            BranchingMechanism::Stable { alpha } => {
                let e = alpha * power as f64;
                l.powf(1.0 - e) / (e - 1.0)
            }
            BranchingMechanism::Custom { b, .. } => {
                // psi(x) >= b x^2.
                let e = 2 * power;
                l.powi(1 - e) / (b.powi(power) * (e as f64 - 1.0))
            }
        }
    }
}

fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(f: &impl Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        ((b - a) / 6.0 * (fa + 4.0 * fm + fb), m, fm)
    }
    fn recurse(
        f: &impl Fn(f64) -> f64,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        whole: f64,
        m: f64,
        fm: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let (left, lm, flm) = simpson(f, a, fa, m, fm);
        let (right, rm, frm) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            recurse(f, a, fa, m, fm, left, lm, flm, tol / 2.0, depth - 1)
                + recurse(f, m, fm, b, fb, right, rm, frm, tol / 2.0, depth - 1)
        }
    }
    let fa = f(a);
    let fb = f(b);
    let (whole, m, fm) = simpson(f, a, fa, b, fb);
    recurse(f, a, fa, b, fb, whole, m, fm, tol, 40)
}

/// Space-time scaling sequence for the height profile.
///
/// Finite variance `s2`: `b_p = ceil(s2 p^2 / 2)`, which normalizes the
/// centered childcount sums to the quadratic mechanism. Power-tail laws
/// with exponent `alpha`: `b_p = ceil(c p^(alpha/(alpha-1)))` where `c`
/// matches the one-jump tail, via the Laplace expansion
/// `E exp(-u J) = 1 - u + A Gamma(2-alpha)/(alpha-1) u^alpha + o(u^alpha)`
/// with `A = lim x^alpha P(J > x)`: summing `b_p` terms scaled by
/// `p/b_p` converges to the stable exponent exactly when
/// `(b_p/p)^alpha = K b_p` with `K = A Gamma(2-alpha)/(alpha-1)`, so
/// `c = K^(1/(alpha-1))`.
pub fn b_p_for(mu: &OffspringDistribution<f64>, p: u32) -> Result<u64> {
    if let Some((alpha, tail_c)) = mu.stable_tail() {
        let a_const = tail_c / alpha;
        let k_const = a_const * statrs::function::gamma::gamma(2.0 - alpha) / (alpha - 1.0);
        let c = k_const.powf(1.0 / (alpha - 1.0));
        return Ok((c * (p as f64).powf(alpha / (alpha - 1.0))).ceil() as u64);
    }
    match mu.variance_f64() {
        Some(s2) if s2 > 0.0 => Ok((s2 * (p as f64) * (p as f64) / 2.0).ceil() as u64),
        _ => Err(Error::NoScalingSequence),
    }
}

/// Contour rescaled to the continuum normalization: value `C_j / p` at
/// time `j / (2 b_p)`.
#[derive(Clone, Debug)]
pub struct RescaledPath {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl RescaledPath {
    pub fn lifetime(&self) -> f64 {
        *self.times.last().unwrap_or(&0.0)
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// Linear interpolation; zero beyond the lifetime.
    pub fn value_at(&self, s: f64) -> f64 {
        if s <= 0.0 || self.times.len() < 2 {
            return if self.times.is_empty() { 0.0 } else { self.values[0] };
        }
        let step = self.times[1] - self.times[0];
        let idx = s / step;
        let i = idx.floor() as usize;
        if i + 1 >= self.times.len() {
            return 0.0;
        }
        let frac = idx - i as f64;
        self.values[i] * (1.0 - frac) + self.values[i + 1] * frac
    }
}

pub fn rescale(c: &ContourPath, p: u32, b_p: u64) -> RescaledPath {
    let denom = 2.0 * b_p as f64;
    let scale = 1.0 / p as f64;
    let times = (0..c.values().len()).map(|j| j as f64 / denom).collect();
    let values = c.values().iter().map(|&v| v as f64 * scale).collect();
    RescaledPath { times, values }
}

/// Two-sample Kolmogorov-Smirnov statistic and its 1% critical value.
pub fn ks_two_sample(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    stats::ks_two_sample(xs, ys)
}

/// Per-size row of the self-consistency report.
#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceRow {
    pub p: u32,
    pub k: usize,
    pub n: u64,
    pub b_p: u64,
    pub mean_lifetime: f64,
    /// Kolmogorov-Smirnov distance of the rescaled lifetimes against
    /// the previous row, with its 1% critical value.
    pub ks_vs_prev: Option<f64>,
    pub ks_threshold: Option<f64>,
    /// Same comparison for the rescaled contour value at a fixed time.
    pub ks_value_at_s: Option<f64>,
    /// Deterministic half-height identity held for every sample.
    pub half_height_ok: bool,
    /// Largest deviation of the rescaled contour maximum from r/2.
    pub max_height_gap: f64,
    /// Fraction of accepted samples with a nontrivial symmetry.
    pub frac_symmetric: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceReport {
    pub r: f64,
    pub probe_time: f64,
    pub rows: Vec<ConvergenceRow>,
}

/// Samples diameter-`floor(r p)` trees for each `p` and reports
/// rescaled functionals plus cross-`p` consistency statistics.
///
/// Work fans out over `streams` independent random streams and merges
/// deterministically by stream id.
pub fn convergence_report(
    mu: &OffspringDistribution<f64>,
    r: f64,
    p_list: &[u32],
    n_samples: u64,
    seed: u64,
    streams: u64,
    budget: &SampleBudget,
) -> Result<ConvergenceReport> {
    let sampler = mu.sampler();
    let probe_time = r / 4.0;
    let mut rows: Vec<ConvergenceRow> = Vec::new();
    let mut prev: Option<(Vec<f64>, Vec<f64>)> = None;
    for (row_idx, &p) in p_list.iter().enumerate() {
        let k = (r * p as f64).floor() as usize;
        if k == 0 {
            return Err(Error::DegenerateHeight { n: 0 });
        }
        let b_p = b_p_for(mu, p)?;
        let streams = streams.max(1);
        let per_stream = n_samples / streams + u64::from(n_samples % streams > 0);
        let batches: Vec<Result<Batch>> = (0..streams)
            .into_par_iter()
            .map(|sid| {
                let mut rng = RngStream::new(seed, (row_idx as u64) << 32 | sid);
                let mut batch = Batch::new();
                let quota = per_stream.min(n_samples.saturating_sub(sid * per_stream));
                for _ in 0..quota {
                    let pair = sample_pair(&sampler, k, &mut rng, budget)?;
                    let code = compose(&pair.t_minus, &pair.t_plus)?;
                    let contour = code.code().contour();
                    let rescaled = rescale(&contour, p, b_p);
                    batch.lifetimes.push(rescaled.lifetime());
                    batch.values_at_probe.push(rescaled.value_at(probe_time));
                    batch.max_gap = batch
                        .max_gap
                        .max((rescaled.max_value() - r / 2.0).abs());
                    batch.half_height_ok &= pair.t_plus.height() == k / 2
                        && pair.t_minus.height() == (k - 1) / 2;
                    batch.symmetric += u64::from(pair.sym >= 2);
                }
                Ok(batch)
            })
            .collect();
        let mut lifetimes = Vec::with_capacity(n_samples as usize);
        let mut values_at_probe = Vec::with_capacity(n_samples as usize);
        let mut half_height_ok = true;
        let mut max_gap = 0.0f64;
        let mut symmetric = 0u64;
        for b in batches {
            let b = b?;
            lifetimes.extend(b.lifetimes);
            values_at_probe.extend(b.values_at_probe);
            half_height_ok &= b.half_height_ok;
            max_gap = max_gap.max(b.max_gap);
            symmetric += b.symmetric;
        }
        let (ks_vs_prev, ks_threshold, ks_value_at_s) = match &prev {
            Some((prev_life, prev_vals)) => {
                let (d, thr) = stats::ks_two_sample(prev_life, &lifetimes);
                let (dv, _) = stats::ks_two_sample(prev_vals, &values_at_probe);
                (Some(d), Some(thr), Some(dv))
            }
            None => (None, None, None),
        };
        rows.push(ConvergenceRow {
            p,
            k,
            n: lifetimes.len() as u64,
            b_p,
            mean_lifetime: lifetimes.iter().sum::<f64>() / lifetimes.len() as f64,
            ks_vs_prev,
            ks_threshold,
            ks_value_at_s,
            half_height_ok,
            max_height_gap: max_gap,
            frac_symmetric: symmetric as f64 / lifetimes.len() as f64,
        });
        prev = Some((lifetimes, values_at_probe));
    }
    Ok(ConvergenceReport {
        r,
        probe_time,
        rows,
    })
}

#[derive(Clone)]
struct Batch {
    lifetimes: Vec<f64>,
    values_at_probe: Vec<f64>,
    max_gap: f64,
    half_height_ok: bool,
    symmetric: u64,
}

impl Batch {
    fn new() -> Self {
        Batch {
            lifetimes: Vec::new(),
            values_at_probe: Vec::new(),
            max_gap: 0.0,
            half_height_ok: true,
            symmetric: 0,
        }
    }
}

/// Empirical probability that two independent trees conditioned to the
/// same height coincide.
pub fn collision_probe(
    mu: &OffspringDistribution<f64>,
    height: usize,
    n_samples: u64,
    seed: u64,
    budget: &SampleBudget,
) -> Result<f64> {
    use crate::gw_sampler::sample_height_eq;
    let sampler = mu.sampler();
    let mut rng = RngStream::new(seed, 0);
    let mut hits = 0u64;
    for _ in 0..n_samples {
        let a = sample_height_eq(&sampler, height, &mut rng, budget)?;
        let b = sample_height_eq(&sampler, height, &mut rng, budget)?;
        hits += u64::from(a == b);
    }
    Ok(hits as f64 / n_samples as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ordered_tree::OrderedTree;

    #[test]
    fn v_of_r_closed_forms() {
        let brownian = BranchingMechanism::Brownian;
        assert!((brownian.v_of_r(2.0).unwrap() - 0.5).abs() < 1e-15);
        // alpha -> 2 recovers the quadratic answer.
        let nearly = BranchingMechanism::stable(1.999999).unwrap();
        assert!((nearly.v_of_r(1.0).unwrap() - 1.0).abs() < 1e-4);
        for alpha in [1.2, 1.5, 1.8] {
            let s = BranchingMechanism::stable(alpha).unwrap();
            let v = s.v_of_r(1.5).unwrap();
            let expected = ((alpha - 1.0) * 1.5).powf(-1.0 / (alpha - 1.0));
            assert!((v - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn custom_quadratic_matches_brownian() {
        let custom = BranchingMechanism::custom(0.0, 1.0, vec![]).unwrap();
        for r in [0.25, 1.0, 3.0] {
            let v = custom.v_of_r(r).unwrap();
            assert!(
                (v - 1.0 / r).abs() / (1.0 / r) < 1e-9,
                "r={r}: v={v} vs {}",
                1.0 / r
            );
            let d = custom.diameter_tail(r).unwrap();
            let expected = 2.0 / (3.0 * r);
            assert!((d - expected).abs() / expected < 1e-9, "r={r}: d={d}");
        }
    }

    #[test]
    fn numeric_route_matches_stable_closed_forms() {
        for alpha in [1.2f64, 1.5, 1.8] {
            let s = BranchingMechanism::stable(alpha).unwrap();
            for r in [0.5, 1.0, 2.0] {
                let closed = s.v_of_r(r).unwrap();
                let numeric = s.v_of_r_numeric(r).unwrap();
                assert!(
                    (closed - numeric).abs() / closed < 1e-9,
                    "alpha={alpha} r={r}: {closed} vs {numeric}"
                );
                let closed_d = s.diameter_tail(r).unwrap();
                let numeric_d = s.diameter_tail_numeric(r).unwrap();
                assert!(
                    (closed_d - numeric_d).abs() / closed_d < 1e-9,
                    "alpha={alpha} r={r}: {closed_d} vs {numeric_d}"
                );
            }
        }
    }

    #[test]
    fn diameter_tail_brownian_scale_identity() {
        let b = BranchingMechanism::Brownian;
        for r in [0.1, 0.7, 2.0, 10.0] {
            assert!((b.diameter_tail(r).unwrap() * r - 2.0 / 3.0).abs() < 1e-12);
        }
        // Decreasing and positive.
        assert!(b.diameter_tail(1.0).unwrap() > b.diameter_tail(2.0).unwrap());
        assert!(b.diameter_tail(100.0).unwrap() > 0.0);
    }

    #[test]
    fn custom_mechanism_validation() {
        assert!(BranchingMechanism::custom(1.0, 0.0, vec![]).is_err());
        assert!(BranchingMechanism::custom(0.0, 1.0, vec![(-1.0, 1.0)]).is_err());
        assert!(BranchingMechanism::custom(0.5, 0.25, vec![(1.0, 0.5)]).is_ok());
    }

    #[test]
    fn scaling_sequence_examples() {
        let geo = OffspringDistribution::<f64>::geometric_half();
        assert_eq!(b_p_for(&geo, 10).unwrap(), 100);
        assert_eq!(b_p_for(&geo, 50).unwrap(), 2500);

        let binary = OffspringDistribution::<f64>::finite(vec![0.5, 0.0, 0.5]).unwrap();
        assert_eq!(b_p_for(&binary, 10).unwrap(), 50);
        assert_eq!(b_p_for(&binary, 11).unwrap(), 61); // ceil(121/2)

        let heavy = OffspringDistribution::<f64>::power_tail(1.5).unwrap();
        let b10 = b_p_for(&heavy, 10).unwrap();
        let b20 = b_p_for(&heavy, 20).unwrap();
        assert!(b10 > 0 && b20 > b10);
        // Exponent alpha/(alpha-1) = 3.
        let ratio = b20 as f64 / b10 as f64;
        assert!((ratio / 8.0 - 1.0).abs() < 0.05, "ratio {ratio}");
    }

    #[test]
    fn rescale_identities() {
        let tree = OrderedTree::parse("((()))").unwrap();
        let c = tree.contour();
        let r = rescale(&c, 2, 4);
        assert!((r.max_value() - 1.0).abs() < 1e-15);
        assert!((r.lifetime() - (tree.size() as f64 - 1.0) / 4.0).abs() < 1e-15);
        assert!((r.value_at(0.25) - 1.0).abs() < 1e-15);
        assert!((r.value_at(0.1875) - 0.75).abs() < 1e-15);
        assert_eq!(r.value_at(10.0), 0.0);
    }

    #[test]
    fn convergence_report_deterministic_identities() {
        let mu = OffspringDistribution::<f64>::geometric_half();
        let report = convergence_report(
            &mu,
            1.0,
            &[8, 12],
            400,
            99,
            4,
            &SampleBudget::default(),
        )
        .unwrap();
        assert_eq!(report.rows.len(), 2);
        for row in &report.rows {
            assert!(row.half_height_ok);
            assert!(row.max_height_gap <= 1.0 / row.p as f64 + 1e-12);
            assert_eq!(row.n, 400);
        }
        assert!(report.rows[1].ks_vs_prev.is_some());

        // Determinism across runs, including the parallel fan-out.
        let again = convergence_report(
            &mu,
            1.0,
            &[8, 12],
            400,
            99,
            4,
            &SampleBudget::default(),
        )
        .unwrap();
        assert_eq!(
            report.rows[1].mean_lifetime.to_bits(),
            again.rows[1].mean_lifetime.to_bits()
        );
    }

    #[test]
    fn collision_probe_decays() {
        let mu = OffspringDistribution::<f64>::geometric_half();
        let budget = SampleBudget::default();
        let small = collision_probe(&mu, 1, 4000, 5, &budget).unwrap();
        let large = collision_probe(&mu, 6, 4000, 5, &budget).unwrap();
        assert!(small > large, "{small} vs {large}");
    }
}
