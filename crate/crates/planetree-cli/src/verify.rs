//! Invariant suites behind `planetree verify`.

use anyhow::Result;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use planetree::diameter_sampler::{
    edge_uniformity_check, marginal_plane_law_check, pair_symmetry, sample_diameter, sample_pair,
};
use planetree::gw_sampler::{
    exact_conditional_law, sample_gw, sample_height_eq, HeightCondition, RngStream, SampleBudget,
};
use planetree::limits::BranchingMechanism;
use planetree::plane_tree::{
    compose, decompose, enumerate_plane_trees, partition_function,
    partition_function_pairs, sym, sym_closed_form, EdgeRootedCode,
};
use planetree::stats::chi_square_gof;
use planetree::{ExactDistribution, FloatDistribution, OrderedTree, Scalar};
use serde::Serialize;
use std::collections::HashMap;

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub details: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub pass: bool,
    pub checks: Vec<Check>,
}

fn check(name: &str, pass: bool, details: String) -> Check {
    Check {
        name: name.to_string(),
        pass,
        details,
    }
}

fn exact_binary() -> ExactDistribution {
    ExactDistribution::finite(vec![
        BigRational::from_ratio(1, 2),
        BigRational::from_ratio(0, 1),
        BigRational::from_ratio(1, 2),
    ])
    .unwrap()
}

fn exact_ternary() -> ExactDistribution {
    ExactDistribution::finite(vec![
        BigRational::from_ratio(2, 3),
        BigRational::from_ratio(0, 1),
        BigRational::from_ratio(0, 1),
        BigRational::from_ratio(1, 3),
    ])
    .unwrap()
}

fn exact_mixed() -> ExactDistribution {
    ExactDistribution::finite(vec![
        BigRational::from_ratio(1, 2),
        BigRational::from_ratio(1, 4),
        BigRational::from_ratio(1, 4),
    ])
    .unwrap()
}

pub fn run_suite(suite: &str, n_samples: u64, seed: u64) -> Result<SuiteReport> {
    let checks = match suite {
        "core" => core_suite(seed)?,
        "lemmas" => lemmas_suite(n_samples, seed)?,
        "sampling" => sampling_suite(n_samples, seed)?,
        other => anyhow::bail!("unknown suite {other:?}; use core, lemmas or sampling"),
    };
    Ok(SuiteReport {
        suite: suite.to_string(),
        pass: checks.iter().all(|c| c.pass),
        checks,
    })
}

fn core_suite(seed: u64) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    let budget = SampleBudget::default();
    let geo = FloatDistribution::geometric_half();
    let sampler = geo.sampler();
    let mut rng = RngStream::new(seed, 0);

    // Serialization and contour round-trips on sampled trees.
    let mut ok = true;
    for _ in 0..500 {
        let t = sample_gw(&sampler, &mut rng, &budget)?;
        ok &= OrderedTree::parse(&t.to_code())? == t;
        ok &= t.contour().to_tree() == t;
    }
    checks.push(check("round_trips", ok, "parse/serialize and contour/tree".into()));

    // Contour-subtree extraction commutes with the tree-level one.
    let mut ok = true;
    for _ in 0..200 {
        let t = sample_gw(&sampler, &mut rng, &budget)?;
        for p in 1..=t.height() {
            let via_contour = t.contour().theta(p as u32)?;
            let via_tree = t.theta_extract(p)?.0.contour();
            ok &= via_contour == via_tree;
        }
    }
    checks.push(check("theta_commutation", ok, "contour vs subtree extraction".into()));

    // Re-rooted contours keep the distance multiset.
    let mut ok = true;
    for _ in 0..100 {
        let t = sample_gw(&sampler, &mut rng, &budget)?;
        if t.size() > 60 || t.size() < 2 {
            continue;
        }
        let c = t.contour();
        let multiset = |tree: &OrderedTree| {
            let c = tree.contour();
            let z = c.lifetime();
            let mut d: Vec<u32> = Vec::new();
            for a in 0..=z {
                for b in a..=z {
                    d.push(c.distance(a, b).unwrap());
                }
            }
            d.sort_unstable();
            d
        };
        let t0 = (seed as usize + t.size()) % (c.lifetime() + 1);
        ok &= multiset(&c.reroot(t0)?.to_tree()) == multiset(&t);
    }
    checks.push(check("reroot_metric", ok, "distance multiset preserved".into()));

    // Exhaustive central structure on all plane trees of size <= 8.
    let mut dichotomy = true;
    let mut edge_count = true;
    let mut round_trip = true;
    let mut symmetry = true;
    for n in 2..=8 {
        for pc in enumerate_plane_trees(n)? {
            let (d, centers) = pc.diameter_and_centers();
            dichotomy &= centers.len() == if d % 2 == 1 { 2 } else { 1 };
            let k = pc.central_edges();
            let adj = pc.adjacency();
            for (tail, head) in &k {
                let code = EdgeRootedCode::from_tree(adj.root_at(*tail, *head))?;
                let (tm, tp) = decompose(&code)?;
                round_trip &= compose(&tm, &tp)? == code;
                symmetry &= sym(&code)? == sym_closed_form(&code)?;
                symmetry &= pair_symmetry(&tm, &tp) == sym(&code)?;
                if d % 2 == 1 {
                    edge_count &= k.len() == 2;
                } else {
                    edge_count &= k.len() == 1 + tp.nu();
                }
            }
        }
    }
    checks.push(check("jordan_dichotomy", dichotomy, "centers match parity, sizes <= 8".into()));
    checks.push(check("central_edge_count", edge_count, "two or 1+nu, sizes <= 8".into()));
    checks.push(check("compose_decompose", round_trip, "mutually inverse, sizes <= 8".into()));
    checks.push(check("symmetry_formulas", symmetry, "definition vs closed forms".into()));
    Ok(checks)
}

fn lemmas_suite(n_samples: u64, seed: u64) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    let budget = SampleBudget::default();

    // Extraction sampler against the exact conditional law.
    let laws: Vec<(&str, FloatDistribution, usize)> = vec![
        ("geometric", FloatDistribution::geometric_half(), 14),
        ("binary", FloatDistribution::finite(vec![0.5, 0.0, 0.5])?, 21),
        (
            "ternary",
            FloatDistribution::finite(vec![2.0 / 3.0, 0.0, 0.0, 1.0 / 3.0])?,
            22,
        ),
    ];
    for (label, mu, cap) in &laws {
        let sampler = mu.sampler();
        for p in 1..=3usize {
            let law = exact_conditional_law(mu, p, HeightCondition::Eq, *cap)?;
            let mut rng = RngStream::new(seed, p as u64);
            let mut counts: HashMap<String, u64> = HashMap::new();
            for _ in 0..n_samples {
                let t = sample_height_eq(&sampler, p, &mut rng, &budget)?;
                *counts.entry(t.to_code()).or_insert(0) += 1;
            }
            let observed: Vec<u64> = law
                .entries
                .iter()
                .map(|(t, _)| counts.get(&t.to_code()).copied().unwrap_or(0))
                .collect();
            let probs: Vec<f64> = law.entries.iter().map(|(_, q)| *q).collect();
            let res = chi_square_gof(&observed, &probs, law.truncated_mass, n_samples, 5.0);
            checks.push(check(
                &format!("tip_extraction_law_{label}_p{p}"),
                res.passes(0.01),
                format!("chi2 = {:.3}, dof = {}, p = {:.4}", res.statistic, res.dof, res.p_value),
            ));
        }
    }

    // Exact nu-tail formula against exhaustive enumeration.
    let binary = exact_binary();
    let mut ok = true;
    for n in 1..=4usize {
        let formula = binary.nu_ge2_prob(n)?.value;
        let law = exact_conditional_law(&binary, n, HeightCondition::Eq, 31)?;
        anyhow::ensure!(law.truncated_mass == BigRational::from_ratio(0, 1));
        let brute = law
            .entries
            .iter()
            .filter(|(t, _)| t.nu() >= 2)
            .fold(BigRational::from_ratio(0, 1), |acc, (_, q)| acc + q.clone());
        ok &= formula == brute;
    }
    checks.push(check("nu_tail_exact", ok, "formula equals enumeration, n <= 4".into()));

    let geo = ExactDistribution::geometric_half();
    let mut ok = true;
    for n in 1..=200usize {
        let v = geo.nu_ge2_prob(n)?.value;
        ok &= v == BigRational::from_ratio(1, ((n + 1) * (n + 1)) as u64);
    }
    checks.push(check("nu_tail_geometric_closed_form", ok, "1/(n+1)^2 up to n = 200".into()));

    // Partition-function double count (route equality asserted inside).
    let mut ok = true;
    let mut detail = String::new();
    for (label, mu) in [
        ("binary", exact_binary()),
        ("ternary", exact_ternary()),
        ("mixed", exact_mixed()),
    ] {
        for k in 1..=4usize {
            match partition_function(k, &mu) {
                Ok(z) => {
                    detail.push_str(&format!("Z_{k}({label}) = {z}; "));
                }
                Err(e) => {
                    ok = false;
                    detail.push_str(&format!("Z_{k}({label}) failed: {e}; "));
                }
            }
        }
    }
    checks.push(check("partition_double_count", ok, detail));

    // Mass bound through the height classes.
    let mut ok = true;
    for mu in [exact_binary(), exact_ternary()] {
        for k in 1..=5usize {
            let z = partition_function_pairs(k, &mu)?;
            let g = mu.g_iter(k / 2 + 2);
            let bound = g.height_pmf((k - 1) / 2) * g.height_pmf(k / 2);
            ok &= z <= bound;
        }
    }
    checks.push(check("partition_mass_bound", ok, "Z_k within the class product".into()));

    // Joint-vs-product contiguity bound, exactly on small diameters.
    let mut ok = true;
    let mut detail = String::new();
    for k in [3usize, 4] {
        let mu = exact_binary();
        let (tv, bound) = joint_product_tv(&mu, k)?;
        ok &= tv <= bound;
        detail.push_str(&format!("k={k}: tv = {tv:.5} <= {bound:.5}; "));
    }
    checks.push(check("contiguity_bound", ok, detail));

    // Finite-size positivity probe of the height normalization.
    let geo_f = FloatDistribution::geometric_half();
    let pairs: Vec<(u32, u64)> = [10u32, 100, 1000]
        .iter()
        .map(|&p| (p, planetree::limits::b_p_for(&geo_f, p).unwrap()))
        .collect();
    let probe = geo_f.asszeta_probe(1.0, &pairs);
    checks.push(check(
        "height_profile_positivity",
        probe.iter().all(|&v| v > 0.3),
        format!("{probe:?}"),
    ));

    // Continuum constants: closed forms vs quadrature.
    let mut ok = true;
    for alpha in [1.2f64, 1.5, 1.8] {
        let s = BranchingMechanism::stable(alpha)?;
        for r in [0.5f64, 1.0, 2.0] {
            let closed = s.v_of_r(r)?;
            let numeric = s.v_of_r_numeric(r)?;
            ok &= ((closed - numeric) / closed).abs() < 1e-9;
            let dc = s.diameter_tail(r)?;
            let dn = s.diameter_tail_numeric(r)?;
            ok &= ((dc - dn) / dc).abs() < 1e-9;
        }
    }
    let b = BranchingMechanism::Brownian;
    for r in [0.5f64, 1.0, 2.0] {
        ok &= ((b.v_of_r(r)? - b.v_of_r_numeric(r)?) / b.v_of_r(r)?).abs() < 1e-9;
        ok &= ((b.diameter_tail(r)? - b.diameter_tail_numeric(r)?) / b.diameter_tail(r)?).abs()
            < 1e-9;
    }
    checks.push(check("continuum_constants", ok, "1e-9 relative agreement".into()));

    Ok(checks)
}

/// Exact total-variation distance between the decomposition pair law at
/// diameter `k` and the product of its conditional marginals, with the
/// bound `4 (a_k + b_k)`.
pub fn joint_product_tv(mu: &ExactDistribution, k: usize) -> Result<(f64, f64)> {
    let h_minus = (k - 1) / 2;
    let h_plus = k / 2;
    let cap = 1 << (h_plus + 2);
    let minus_law = exact_conditional_law(mu, h_minus, HeightCondition::Eq, cap)?;
    let plus_law = exact_conditional_law(mu, h_plus, HeightCondition::Eq, cap)?;
    anyhow::ensure!(minus_law.truncated_mass == BigRational::from_ratio(0, 1));
    anyhow::ensure!(plus_law.truncated_mass == BigRational::from_ratio(0, 1));

    // Joint law: S/(1+nu)- or S/2-weighted product, normalized.
    let mut weights: Vec<Vec<BigRational>> = Vec::new();
    let mut total = BigRational::from_ratio(0, 1);
    let mut a_k_num = BigRational::from_ratio(0, 1);
    for (tm, pm) in &minus_law.entries {
        let mut row = Vec::new();
        for (tp, pp) in &plus_law.entries {
            let s = pair_symmetry(tm, tp);
            if s >= 2 {
                a_k_num += pm.clone() * pp.clone();
            }
            let factor = if k % 2 == 1 {
                BigRational::from_ratio(s as u64, 2)
            } else {
                BigRational::from_ratio(s as u64, 1 + tp.nu() as u64)
            };
            let w = pm.clone() * pp.clone() * factor;
            total += w.clone();
            row.push(w);
        }
        weights.push(row);
    }
    let mut tv = BigRational::from_ratio(0, 1);
    for (i, (_, pm)) in minus_law.entries.iter().enumerate() {
        for (j, (_, pp)) in plus_law.entries.iter().enumerate() {
            let joint = weights[i][j].clone() / total.clone();
            let product = pm.clone() * pp.clone();
            let diff = joint - product;
            tv += if diff < BigRational::from_ratio(0, 1) {
                -diff
            } else {
                diff
            };
        }
    }
    let tv = ToPrimitive::to_f64(&(tv / BigRational::from_ratio(2, 1))).unwrap();
    let a_k = ToPrimitive::to_f64(&a_k_num).unwrap();
    let b_k = ToPrimitive::to_f64(&mu.nu_ge2_prob(h_plus.max(1))?.value).unwrap();
    Ok((tv, 4.0 * (a_k + b_k)))
}

fn sampling_suite(n_samples: u64, seed: u64) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    let budget = SampleBudget::default();
    let binary = FloatDistribution::finite(vec![0.5, 0.0, 0.5])?;
    let binary_sampler = binary.sampler();
    let geo = FloatDistribution::geometric_half();
    let geo_sampler = geo.sampler();

    // Joint decomposition law at diameter 4 under the binary law.
    let mut rng = RngStream::new(seed, 100);
    let mut counts: HashMap<String, u64> = HashMap::new();
    for _ in 0..n_samples {
        let p = sample_pair(&binary_sampler, 4, &mut rng, &budget)?;
        *counts.entry(p.t_plus.to_code()).or_insert(0) += 1;
    }
    let labels = ["((()())())", "(()(()()))", "((()())(()()))"];
    let probs = [0.4, 0.4, 0.2];
    let observed: Vec<u64> = labels
        .iter()
        .map(|l| counts.get(&l.to_string()).copied().unwrap_or(0))
        .collect();
    let res = chi_square_gof(&observed, &probs, 0.0, n_samples, 5.0);
    checks.push(check(
        "splitter_joint_law_k4",
        res.passes(0.01),
        format!("chi2 = {:.3}, p = {:.4}", res.statistic, res.p_value),
    ));

    // Odd diameter: joint law over pairs at k = 3 under the geometric law.
    let mut rng = RngStream::new(seed, 101);
    let mut pair_counts: HashMap<(String, String), u64> = HashMap::new();
    for _ in 0..n_samples {
        let p = sample_pair(&geo_sampler, 3, &mut rng, &budget)?;
        *pair_counts
            .entry((p.t_minus.to_code(), p.t_plus.to_code()))
            .or_insert(0) += 1;
    }
    // Exact law over height-1 pairs: proportional to P(a)P(b)(1+[a=b])/2,
    // normalized by (1 + sum_t P(t)^2)/2 over the conditional law.
    let law = exact_conditional_law(&geo, 1, HeightCondition::Eq, 12)?;
    let sum_q2: f64 = law.entries.iter().map(|(_, q)| q * q).sum();
    let z = (1.0 + sum_q2) / 2.0;
    let mut labels: Vec<(String, String)> = Vec::new();
    let mut probs: Vec<f64> = Vec::new();
    let mut total_w = 0.0;
    for (a, pa) in &law.entries {
        for (b, pb) in &law.entries {
            let w = pa * pb * (1.0 + f64::from(a == b)) / 2.0 / z;
            labels.push((a.to_code(), b.to_code()));
            probs.push(w);
            total_w += w;
        }
    }
    let observed: Vec<u64> = labels
        .iter()
        .map(|l| pair_counts.get(l).copied().unwrap_or(0))
        .collect();
    let res = chi_square_gof(&observed, &probs, (1.0 - total_w).max(0.0), n_samples, 5.0);
    checks.push(check(
        "splitter_joint_law_k3",
        res.passes(0.01),
        format!("chi2 = {:.3}, p = {:.4}", res.statistic, res.p_value),
    ));

    // Marginal plane-tree law forgets the marked edge.
    let exact = exact_binary();
    let mut rng = RngStream::new(seed, 102);
    let report = marginal_plane_law_check(&exact, &binary_sampler, 4, n_samples, 10, &mut rng, &budget)?;
    checks.push(check(
        "marginal_plane_law_k4",
        report.chi_square.passes(0.01),
        format!(
            "chi2 = {:.3}, p = {:.4}, trees = {}",
            report.chi_square.statistic,
            report.chi_square.p_value,
            report.rows.len()
        ),
    ));

    // Marked edge uniform over the central edges.
    let mut rng = RngStream::new(seed, 103);
    let report = edge_uniformity_check(&binary_sampler, 4, n_samples.min(20_000), 200, &mut rng, &budget)?;
    checks.push(check(
        "edge_uniformity_k4",
        report.pooled.passes(0.01),
        format!(
            "pooled chi2 = {:.3}, dof = {}, p = {:.4}",
            report.pooled.statistic, report.pooled.dof, report.pooled.p_value
        ),
    ));

    // Diameter postcondition and determinism.
    let mut ok = true;
    let mut rng = RngStream::new(seed, 104);
    for k in 1..=7usize {
        for _ in 0..25 {
            let s = sample_diameter(&geo_sampler, k, &mut rng, &budget)?;
            ok &= s.plane.diameter_and_centers().0 == k;
        }
    }
    checks.push(check("diameter_postcondition", ok, "recomputed diameters match".into()));

    let draw_codes = |seed: u64| -> anyhow::Result<Vec<String>> {
        let mut rng = RngStream::new(seed, 105);
        (0..50)
            .map(|_| {
                Ok(sample_diameter(&geo_sampler, 5, &mut rng, &budget)?
                    .plane
                    .code_string())
            })
            .collect()
    };
    checks.push(check(
        "determinism",
        draw_codes(seed)? == draw_codes(seed)?,
        "identical streams give identical samples".into(),
    ));

    // Empirical nu-tail against the formula, as a statistical oracle.
    let mut rng = RngStream::new(seed, 106);
    let n_height = 3usize;
    let mut hits = 0u64;
    let trials = n_samples.min(30_000);
    for _ in 0..trials {
        let t = sample_height_eq(&geo_sampler, n_height, &mut rng, &budget)?;
        hits += u64::from(t.nu() >= 2);
    }
    let expected = geo.nu_ge2_prob(n_height)?.value;
    let sd = (trials as f64 * expected * (1.0 - expected)).sqrt();
    let gap = (hits as f64 - trials as f64 * expected).abs();
    checks.push(check(
        "nu_tail_statistical",
        gap < 3.0 * sd,
        format!("hits = {hits}, expected = {:.1}", trials as f64 * expected),
    ));

    Ok(checks)
}

