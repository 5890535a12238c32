//! Acceptance suite: one test per criterion, each printing a pass/fail
//! line (run with `-- --nocapture` to see them all).
//!
//! Every tolerance is pinned here. Statistical checks run on fixed
//! seeds, so a pass is reproducible bit for bit.

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use planetree::diameter_sampler::{
    edge_uniformity_check, marginal_plane_law_check, pair_symmetry, sample_diameter, sample_pair,
};
use planetree::enumeration::for_each_bounded_height_tree;
use planetree::gw_sampler::{
    exact_conditional_law, sample_height_eq, HeightCondition, RngStream, SampleBudget,
};
use planetree::limits::{b_p_for, collision_probe, convergence_report, BranchingMechanism};
use planetree::offspring::OffspringDistribution;
use planetree::plane_tree::{
    compose, decompose, enumerate_plane_trees, gw_probability, partition_function_direct,
    partition_function_pairs, sym, sym_closed_form, walkup_count, EdgeRootedCode,
};
use planetree::stats::chi_square_gof;
use planetree::{ExactDistribution, FloatDistribution, Scalar};
use std::collections::HashMap;
use std::time::Instant;

fn r(num: u64, den: u64) -> BigRational {
    BigRational::from_ratio(num, den)
}

fn exact_binary() -> ExactDistribution {
    ExactDistribution::finite(vec![r(1, 2), r(0, 1), r(1, 2)]).unwrap()
}

fn exact_ternary() -> ExactDistribution {
    ExactDistribution::finite(vec![r(2, 3), r(0, 1), r(0, 1), r(1, 3)]).unwrap()
}

fn exact_mixed() -> ExactDistribution {
    ExactDistribution::finite(vec![r(1, 2), r(1, 4), r(1, 4)]).unwrap()
}

fn float_binary() -> FloatDistribution {
    FloatDistribution::finite(vec![0.5, 0.0, 0.5]).unwrap()
}

fn float_ternary() -> FloatDistribution {
    FloatDistribution::finite(vec![2.0 / 3.0, 0.0, 0.0, 1.0 / 3.0]).unwrap()
}

fn report(criterion: &str, pass: bool, details: &str) {
    println!(
        "criterion {criterion}: {} - {details}",
        if pass { "PASS" } else { "FAIL" }
    );
}

#[test]
fn criterion_01_walkup_enumeration() {
    let start = Instant::now();
    let mut all = true;
    let mut lines = Vec::new();
    for n in 2..=13usize {
        let enumerated = enumerate_plane_trees(n).unwrap().len();
        let closed = walkup_count(n - 1);
        all &= BigUint::from(enumerated) == closed;
        lines.push(format!("{n}:{enumerated}/{closed}"));
    }
    let elapsed = start.elapsed();
    let within_budget = elapsed.as_secs() < 120;
    report(
        "01 (walkup enumeration)",
        all && within_budget,
        &format!("counts {} in {elapsed:.2?}", lines.join(" ")),
    );
    assert!(all, "enumeration disagrees with the closed formula");
    assert!(within_budget, "enumeration exceeded 2 minutes: {elapsed:?}");
}

#[test]
fn criterion_02_central_structure_exhaustive() {
    let start = Instant::now();
    let mut failures = 0usize;
    let mut trees = 0usize;
    for n in 2..=8usize {
        for pc in enumerate_plane_trees(n).unwrap() {
            trees += 1;
            let (d, centers) = pc.diameter_and_centers();
            if centers.len() != if d % 2 == 1 { 2 } else { 1 } {
                failures += 1;
            }
            let k = pc.central_edges();
            let adj = pc.adjacency();
            for (tail, head) in &k {
                let code = EdgeRootedCode::from_tree(adj.root_at(*tail, *head)).unwrap();
                let (tm, tp) = decompose(&code).unwrap();
                if compose(&tm, &tp).unwrap() != code {
                    failures += 1;
                }
                let s_def = sym(&code).unwrap();
                if s_def != sym_closed_form(&code).unwrap() {
                    failures += 1;
                }
                if d % 2 == 1 {
                    if k.len() != 2 || s_def != 1 + usize::from(tm == tp) {
                        failures += 1;
                    }
                } else if k.len() != 1 + tp.nu() {
                    failures += 1;
                }
            }
        }
    }
    report(
        "02 (jordan structure, sizes <= 8)",
        failures == 0,
        &format!("{trees} plane trees, {failures} failures in {:.2?}", start.elapsed()),
    );
    assert_eq!(failures, 0);
}

#[test]
fn criterion_03_tip_extraction_law() {
    let start = Instant::now();
    let laws: Vec<(&str, FloatDistribution, usize)> = vec![
        ("geometric", FloatDistribution::geometric_half(), 15),
        ("binary", float_binary(), 21),
        ("ternary", float_ternary(), 22),
    ];
    let n: u64 = 100_000;
    let budget = SampleBudget::default();
    let mut all = true;
    let mut details = String::new();
    for (li, (label, mu, cap)) in laws.iter().enumerate() {
        let sampler = mu.sampler();
        for p in 1..=3usize {
            let law = exact_conditional_law(mu, p, HeightCondition::Eq, *cap).unwrap();
            let mut rng = RngStream::new(0xACC3, (li * 10 + p) as u64);
            let mut counts: HashMap<String, u64> = HashMap::new();
            for _ in 0..n {
                let t = sample_height_eq(&sampler, p, &mut rng, &budget).unwrap();
                assert_eq!(t.height(), p);
                *counts.entry(t.to_code()).or_insert(0) += 1;
            }
            let observed: Vec<u64> = law
                .entries
                .iter()
                .map(|(t, _)| counts.get(&t.to_code()).copied().unwrap_or(0))
                .collect();
            let probs: Vec<f64> = law.entries.iter().map(|(_, q)| *q).collect();
            let res = chi_square_gof(&observed, &probs, law.truncated_mass, n, 5.0);
            all &= res.passes(0.01);
            details.push_str(&format!("{label},p={p}: p-value {:.3}; ", res.p_value));
        }
    }
    report(
        "03 (tip-extraction law, chi-square at 1%, 1e5 draws)",
        all,
        &format!("{details}in {:.2?}", start.elapsed()),
    );
    assert!(all, "{details}");
}

/// Brute-force P(nu >= 2 | height = n) by streaming enumeration.
fn brute_nu_tail(mu: &ExactDistribution, n: usize) -> BigRational {
    let support: Vec<usize> = (0..=mu.max_support().unwrap())
        .filter(|&c| mu.pmf(c) > BigRational::from_ratio(0, 1))
        .collect();
    let mut class_mass = BigRational::from_ratio(0, 1);
    let mut nu2_mass = BigRational::from_ratio(0, 1);
    for_each_bounded_height_tree(&support, n, &mut |t| {
        if t.height() == n {
            let p = gw_probability(&t, mu);
            if t.nu() >= 2 {
                nu2_mass += p.clone();
            }
            class_mass += p;
        }
    });
    nu2_mass / class_mass
}

#[test]
fn criterion_04_nu_tail_formula() {
    let start = Instant::now();
    let mut all = true;
    let mut details = String::new();

    // Exact equality against exhaustive enumeration.
    for (label, mu, n_max) in [
        ("binary", exact_binary(), 5usize),
        ("mixed", exact_mixed(), 4),
        ("ternary", exact_ternary(), 3),
    ] {
        for n in 1..=n_max {
            let formula = mu.nu_ge2_prob(n).unwrap().value;
            let brute = brute_nu_tail(&mu, n);
            if formula != brute {
                all = false;
                details.push_str(&format!("{label} n={n}: {formula} != {brute}; "));
            }
        }
        details.push_str(&format!("{label} exact to n={n_max}; "));
    }

    // Geometric closed form 1/(n+1)^2, exact and float paths.
    let geo_exact = ExactDistribution::geometric_half();
    let geo_float = FloatDistribution::geometric_half();
    let mut geo_ok = true;
    for n in 1..=200usize {
        geo_ok &= geo_exact.nu_ge2_prob(n).unwrap().value
            == r(1, ((n + 1) * (n + 1)) as u64);
        let f = geo_float.nu_ge2_prob(n).unwrap().value;
        geo_ok &= (f - 1.0 / ((n + 1) * (n + 1)) as f64).abs() < 1e-12;
    }
    all &= geo_ok;
    details.push_str(&format!("geometric closed form to n=200: {geo_ok}"));

    report(
        "04 (nu-tail formula vs brute force)",
        all,
        &format!("{details} in {:.2?}", start.elapsed()),
    );
    assert!(all, "{details}");
}

#[test]
fn criterion_05_partition_function_double_count() {
    let start = Instant::now();
    let mut all = true;
    let mut details = String::new();
    for (label, mu) in [
        ("binary", exact_binary()),
        ("ternary", exact_ternary()),
        ("mixed", exact_mixed()),
    ] {
        for k in 1..=6usize {
            let direct = partition_function_direct(k, &mu).unwrap();
            let pairs = partition_function_pairs(k, &mu).unwrap();
            if direct != pairs {
                all = false;
                details.push_str(&format!("{label} k={k}: {direct} != {pairs}; "));
            }
        }
        details.push_str(&format!("{label} k<=6 equal; "));
    }
    let elapsed = start.elapsed();
    let within_budget = elapsed.as_secs() < 300;
    report(
        "05 (partition function, two routes, k <= 6)",
        all && within_budget,
        &format!("{details}in {elapsed:.2?}"),
    );
    assert!(all, "{details}");
    assert!(within_budget, "partition check exceeded 5 minutes: {elapsed:?}");
}

#[test]
fn criterion_06_splitter_law() {
    let start = Instant::now();
    let n: u64 = 100_000;
    let budget = SampleBudget::default();
    let mut all = true;
    let mut details = String::new();

    // Even diameter: joint (tail, head) law under the binary law at k=4.
    {
        let sampler = float_binary().sampler();
        let mut rng = RngStream::new(0x5EED6, 0);
        let mut counts: HashMap<String, u64> = HashMap::new();
        for _ in 0..n {
            let p = sample_pair(&sampler, 4, &mut rng, &budget).unwrap();
            assert_eq!(p.t_minus.to_code(), "(()())");
            *counts.entry(p.t_plus.to_code()).or_insert(0) += 1;
        }
        // Exact weighted pair law: the three head halves carry
        // S/(1+nu)-weighted masses 2/5, 2/5, 1/5.
        let labels = ["((()())())", "(()(()()))", "((()())(()()))"];
        let probs = [0.4, 0.4, 0.2];
        let observed: Vec<u64> = labels
            .iter()
            .map(|l| counts.get(&l.to_string()).copied().unwrap_or(0))
            .collect();
        let res = chi_square_gof(&observed, &probs, 0.0, n, 5.0);
        all &= res.passes(0.01);
        details.push_str(&format!("joint k=4 p-value {:.3}; ", res.p_value));
    }

    // Odd diameter: joint law over height-1 pairs at k=3, geometric.
    {
        let geo = FloatDistribution::geometric_half();
        let sampler = geo.sampler();
        let mut rng = RngStream::new(0x5EED6, 1);
        let mut counts: HashMap<(String, String), u64> = HashMap::new();
        for _ in 0..n {
            let p = sample_pair(&sampler, 3, &mut rng, &budget).unwrap();
            *counts
                .entry((p.t_minus.to_code(), p.t_plus.to_code()))
                .or_insert(0) += 1;
        }
        let law = exact_conditional_law(&geo, 1, HeightCondition::Eq, 12).unwrap();
        let sum_q2: f64 = law.entries.iter().map(|(_, q)| q * q).sum();
        let z = (1.0 + sum_q2) / 2.0;
        let mut labels = Vec::new();
        let mut probs = Vec::new();
        let mut covered = 0.0;
        for (a, pa) in &law.entries {
            for (b, pb) in &law.entries {
                let w = pa * pb * (1.0 + f64::from(a == b)) / 2.0 / z;
                labels.push((a.to_code(), b.to_code()));
                probs.push(w);
                covered += w;
            }
        }
        let observed: Vec<u64> = labels
            .iter()
            .map(|l| counts.get(l).copied().unwrap_or(0))
            .collect();
        let res = chi_square_gof(&observed, &probs, (1.0 - covered).max(0.0), n, 5.0);
        all &= res.passes(0.01);
        details.push_str(&format!("joint k=3 p-value {:.3}; ", res.p_value));
    }

    // Marginal plane-tree law, edge forgotten.
    {
        let mu = exact_binary();
        let sampler = float_binary().sampler();
        let mut rng = RngStream::new(0x5EED6, 2);
        let rep =
            marginal_plane_law_check(&mu, &sampler, 4, n, 10, &mut rng, &budget).unwrap();
        all &= rep.chi_square.passes(0.01);
        details.push_str(&format!("marginal k=4 p-value {:.3}; ", rep.chi_square.p_value));

        let geo = FloatDistribution::geometric_half();
        let sampler = geo.sampler();
        let mut rng = RngStream::new(0x5EED6, 3);
        let rep =
            marginal_plane_law_check(&geo, &sampler, 3, n, 12, &mut rng, &budget).unwrap();
        all &= rep.chi_square.passes(0.01);
        details.push_str(&format!("marginal k=3 p-value {:.3}; ", rep.chi_square.p_value));
    }

    // Marked edge uniform over the central edges.
    for k in [3usize, 4] {
        let sampler = float_binary().sampler();
        let mut rng = RngStream::new(0x5EED6, 10 + k as u64);
        let rep = edge_uniformity_check(&sampler, k, 40_000, 200, &mut rng, &budget).unwrap();
        all &= rep.pooled.passes(0.01);
        details.push_str(&format!(
            "edges k={k} pooled p-value {:.3} over {} trees; ",
            rep.pooled.p_value,
            rep.rows.len()
        ));
    }

    report(
        "06 (splitter joint, marginal and edge laws at 1%)",
        all,
        &format!("{details}in {:.2?}", start.elapsed()),
    );
    assert!(all, "{details}");
}

#[test]
fn criterion_07_deterministic_height_split() {
    let start = Instant::now();
    let budget = SampleBudget::default();
    let sampler = FloatDistribution::geometric_half().sampler();
    let mut total = 0u64;
    let mut all = true;
    for (r_ratio, p_list) in [(1.0f64, vec![10u32, 25, 40]), (0.6, vec![15, 35])] {
        for &p in &p_list {
            let k = (r_ratio * p as f64).floor() as usize;
            let mut rng = RngStream::new(0x7EED, p as u64);
            for _ in 0..300 {
                let pair = sample_pair(&sampler, k, &mut rng, &budget).unwrap();
                total += 1;
                all &= pair.t_plus.height() == k / 2;
                all &= pair.t_minus.height() == (k - 1) / 2;
            }
        }
    }
    report(
        "07 (height split identity, 100% of samples)",
        all,
        &format!("{total} samples in {:.2?}", start.elapsed()),
    );
    assert!(all);
}

#[test]
fn criterion_08_continuum_constants() {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let brownian = BranchingMechanism::Brownian;
    for r_val in [0.25f64, 0.5, 1.0, 2.0, 5.0] {
        let v = brownian.v_of_r(r_val).unwrap();
        worst = worst.max(((v - 1.0 / r_val) / v).abs());
        worst = worst.max(((brownian.v_of_r_numeric(r_val).unwrap() - v) / v).abs());
        let d = brownian.diameter_tail(r_val).unwrap();
        worst = worst.max(((d - 2.0 / (3.0 * r_val)) / d).abs());
        worst = worst.max(((brownian.diameter_tail_numeric(r_val).unwrap() - d) / d).abs());
    }
    for alpha in [1.2f64, 1.5, 1.8] {
        let s = BranchingMechanism::stable(alpha).unwrap();
        for r_val in [0.5f64, 1.0, 2.0] {
            let v = s.v_of_r(r_val).unwrap();
            worst = worst.max(((s.v_of_r_numeric(r_val).unwrap() - v) / v).abs());
            let d = s.diameter_tail(r_val).unwrap();
            worst = worst.max(((s.diameter_tail_numeric(r_val).unwrap() - d) / d).abs());
            // Closed form of the stable diameter tail.
            let expected = v * (2.0 * alpha - 2.0) / (2.0 * alpha - 1.0);
            worst = worst.max(((d - expected) / d).abs());
        }
    }
    let pass = worst < 1e-9;
    report(
        "08 (continuum constants, 1e-9 relative)",
        pass,
        &format!("worst relative gap {worst:.3e} in {:.2?}", start.elapsed()),
    );
    assert!(pass, "worst relative gap {worst:e}");
}

#[test]
fn criterion_09_asymptotic_decay() {
    let start = Instant::now();
    let mut all = true;
    let mut details = String::new();

    // Exact tail P(nu >= 2 | height = floor(p/2)) = 1/(floor(p/2)+1)^2.
    let geo_exact = ExactDistribution::geometric_half();
    let geo_float = FloatDistribution::geometric_half();
    let mut exact_ok = true;
    for p in 1..=200usize {
        let h = p / 2;
        if h == 0 {
            continue;
        }
        exact_ok &= geo_exact.nu_ge2_prob(h).unwrap().value
            == r(1, ((h + 1) * (h + 1)) as u64);
        let f = geo_float.nu_ge2_prob(h).unwrap().value;
        exact_ok &= (f - 1.0 / ((h + 1) * (h + 1)) as f64).abs() < 1e-12;
    }
    all &= exact_ok;
    details.push_str(&format!("exact tail to p=200: {exact_ok}; "));

    // Empirical collision probability and symmetry fraction trend down.
    let budget = SampleBudget::default();
    let n: u64 = 10_000;
    let p_grid = [10u32, 20, 40, 80];
    let collisions: Vec<f64> = p_grid
        .iter()
        .map(|&p| collision_probe(&geo_float, (p / 2) as usize, n, 0xC011, &budget).unwrap())
        .collect();
    let sampler = geo_float.sampler();
    let symmetric: Vec<f64> = p_grid
        .iter()
        .map(|&p| {
            // Fraction of proposal pairs with a nontrivial symmetry,
            // measured before the acceptance step.
            let k = p as usize;
            let mut rng = RngStream::new(0x5F11, p as u64);
            let mut hits = 0u64;
            for _ in 0..n {
                let a = sample_height_eq(&sampler, (k - 1) / 2, &mut rng, &budget).unwrap();
                let b = sample_height_eq(&sampler, k / 2, &mut rng, &budget).unwrap();
                hits += u64::from(pair_symmetry(&a, &b) >= 2);
            }
            hits as f64 / n as f64
        })
        .collect();
    let trend_down = |xs: &[f64]| -> bool {
        xs.windows(2).all(|w| {
            let slack = 2.0 * (w[0].max(1e-9) * (1.0 - w[0]) / n as f64).sqrt();
            w[1] <= w[0] + slack
        })
    };
    let col_ok = trend_down(&collisions);
    let sym_ok = trend_down(&symmetric);
    all &= col_ok && sym_ok;
    details.push_str(&format!(
        "collisions {collisions:?} trend {col_ok}; symmetry {symmetric:?} trend {sym_ok}"
    ));

    report(
        "09 (decay of collisions and symmetries)",
        all,
        &format!("{details} in {:.2?}", start.elapsed()),
    );
    assert!(all, "{details}");
}

#[test]
fn criterion_10_scaling_self_consistency() {
    let start = Instant::now();
    let mu = FloatDistribution::geometric_half();
    let budget = SampleBudget::default();
    let n: u64 = 10_000;
    let report_data = convergence_report(&mu, 1.0, &[50, 100], n, 0xD1A, 8, &budget).unwrap();
    let elapsed = start.elapsed();

    let row = &report_data.rows[1];
    let ks = row.ks_vs_prev.unwrap();
    let threshold = row.ks_threshold.unwrap();
    let ks_pass = ks < threshold;

    // Checked for every sample inside the report.
    let max_pass = report_data
        .rows
        .iter()
        .all(|row| row.max_height_gap <= 1.0 / row.p as f64 && row.half_height_ok);

    let within_budget = elapsed.as_secs() < 900;
    let pass = ks_pass && max_pass && within_budget;
    report(
        "10 (scaling self-consistency, p=50 vs p=100)",
        pass,
        &format!(
            "KS {ks:.4} vs threshold {threshold:.4} ({}), max rescaled-height gap within 1/p: {max_pass}, {elapsed:.2?}",
            if ks_pass { "ok" } else { "exceeded" },
        ),
    );
    assert!(max_pass, "rescaled contour maximum drifted beyond 1/p");
    assert!(within_budget, "run exceeded 15 minutes: {elapsed:?}");
    // The lifetime laws at p = 50 and p = 100 differ by about 3 percent
    // in location (exact conditional means 0.35373 and 0.34343 via the
    // generating-function recursion), which forces a KS distance near
    // 0.05 - no exact sampler can land under the pinned 0.023
    // threshold at these sizes. The assertion states the criterion as
    // written; the gap is a property of the laws, not of the sampler.
    assert!(
        ks_pass,
        "KS {ks:.4} exceeds the pinned 1% critical value {threshold:.4}; \
         the finite-size location drift between p=50 and p=100 is ~3x the threshold"
    );
}
