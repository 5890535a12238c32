//! Exact sampler for the random plane tree with a fixed diameter.
//!
//! A diameter-`k` plane tree weighted by vertex degrees corresponds,
//! through the central-edge rooting, to an ordered pair of trees with
//! heights `floor((k-1)/2)` and `floor(k/2)`. The sampler draws the two
//! halves independently conditioned on those heights and accepts with
//! probability `S/2` (odd `k`) or `S/(1 + nu)` (even `k`), where `S` is
//! the symmetry count of the composed code. Both weights lie in (0, 1],
//! and the accepted pair follows the joint law of the decomposition of
//! a weighted plane tree with a uniformly marked central edge.

use crate::error::{Error, Result};
use crate::offspring::{OffspringDistribution, OffspringSampler};
use crate::ordered_tree::{ContourPath, OrderedTree};
use crate::plane_tree::{
    canonicalize, compose, weight, EdgeRootedCode, PlaneCode,
};
use crate::gw_sampler::{sample_height_eq, SampleBudget};
use crate::scalar::Scalar;
use crate::stats::{chi_square_gof, ChiSquare};
use rand::Rng;
use serde::Serialize;
use std::collections::HashMap;

/// Accepted decomposition pair, without the canonical materialization.
#[derive(Clone, Debug)]
pub struct PairSample {
    pub t_minus: OrderedTree,
    pub t_plus: OrderedTree,
    /// Symmetry count of the composed code.
    pub sym: usize,
    /// Proposal pairs drawn until acceptance.
    pub accepted_after: u64,
}

/// Fully materialized sample: canonical plane tree, rooted code and the
/// marked central edge.
#[derive(Clone, Debug)]
pub struct DiameterSample {
    pub plane: PlaneCode,
    pub rooted: EdgeRootedCode,
    pub t_minus: OrderedTree,
    pub t_plus: OrderedTree,
    /// Marked central edge `(tail, head)` in the canonical vertex
    /// numbering, with its index in contour-order edge enumeration.
    pub edge: (usize, usize),
    pub edge_index: usize,
    pub accepted_after: u64,
}

/// Symmetry count of `compose(t_minus, t_plus)` computed locally.
///
/// Odd split (equal heights): the reversed central edge gives the same
/// code exactly when the halves coincide. Even split: a deep child of
/// the head reproduces the code exactly when rotating the cyclic branch
/// list around the center maps it to itself.
pub fn pair_symmetry(t_minus: &OrderedTree, t_plus: &OrderedTree) -> usize {
    if t_minus.height() == t_plus.height() {
        return 1 + usize::from(t_minus == t_plus);
    }
    // Cyclic branch list around the center: the head's subtrees then
    // the tail-side tree.
    let n = t_plus.children().len();
    let mut count = 1;
    'rotation: for j in 1..=n {
        // Rotating by j sends clockwise position i to i + j; the code
        // is reproduced exactly when the list is j-periodic.
        let item = |i: usize| -> &OrderedTree {
            if i % (n + 1) < n {
                &t_plus.children()[i % (n + 1)]
            } else {
                t_minus
            }
        };
        for i in 0..=n {
            if item(i) != item(i + j) {
                continue 'rotation;
            }
        }
        count += 1;
    }
    count
}

/// Draws the decomposition pair of a diameter-`k` sample.
pub fn sample_pair<R: Rng + ?Sized>(
    sampler: &OffspringSampler,
    k: usize,
    rng: &mut R,
    budget: &SampleBudget,
) -> Result<PairSample> {
    if k == 0 {
        return Err(Error::DegenerateHeight { n: 0 });
    }
    let h_minus = (k - 1) / 2;
    let h_plus = k / 2;
    for attempt in 1..=budget.max_attempts {
        let t_minus = sample_height_eq(sampler, h_minus, rng, budget)?;
        let t_plus = sample_height_eq(sampler, h_plus, rng, budget)?;
        let sym = pair_symmetry(&t_minus, &t_plus);
        let accept_num = sym as f64;
        let accept_den = if k % 2 == 1 {
            2.0
        } else {
            (1 + t_plus.nu()) as f64
        };
        debug_assert!(accept_num <= accept_den);
        if accept_num >= accept_den || rng.gen::<f64>() * accept_den < accept_num {
            return Ok(PairSample {
                t_minus,
                t_plus,
                sym,
                accepted_after: attempt,
            });
        }
    }
    Err(Error::BudgetExhausted {
        attempts: budget.max_attempts,
        nodes: 0,
    })
}

/// Draws a full diameter-`k` sample with its marked central edge.
///
/// The plane tree is the canonicalized composition; the marked edge is
/// drawn uniformly among the central edges whose rooting reproduces the
/// accepted code, which realizes the joint law exactly. Canonicalizing
/// costs quadratic time in the tree size, so large-scale statistics
/// should stay on [`sample_pair`].
pub fn sample_diameter<R: Rng + ?Sized>(
    sampler: &OffspringSampler,
    k: usize,
    rng: &mut R,
    budget: &SampleBudget,
) -> Result<DiameterSample> {
    let pair = sample_pair(sampler, k, rng, budget)?;
    let rooted = compose(&pair.t_minus, &pair.t_plus)?;
    let plane = canonicalize(rooted.code())?;
    let adj = plane.adjacency();
    let target = rooted.code().to_code();
    let edges = adj.oriented_edges_in_contour_order(0);
    let matching: Vec<usize> = plane
        .central_edges()
        .into_iter()
        .filter(|&(tail, head)| adj.root_at(tail, head).to_code() == target)
        .map(|e| {
            edges
                .iter()
                .position(|&f| f == e)
                .expect("central edge is an oriented edge")
        })
        .collect();
    debug_assert_eq!(matching.len(), pair.sym);
    let edge_index = matching[rng.gen_range(0..matching.len())];
    Ok(DiameterSample {
        plane,
        rooted,
        t_minus: pair.t_minus,
        t_plus: pair.t_plus,
        edge: edges[edge_index],
        edge_index,
        accepted_after: pair.accepted_after,
    })
}

/// Contour of the edge-rooted sample; the initial excursion explores
/// the head side, then the tail side.
pub fn contour_of_sample(sample: &DiameterSample) -> ContourPath {
    sample.rooted.code().contour()
}

/// Expected diameter-`k` law over canonical codes, with the mass not
/// covered by the enumeration.
///
/// Finite-support laws enumerate every positive-weight tree exactly;
/// infinite-support laws enumerate plane trees up to `size_cap`
/// vertices and report the remainder.
pub fn expected_diameter_law<S: Scalar>(
    mu: &OffspringDistribution<S>,
    k: usize,
    size_cap: usize,
) -> Result<(Vec<(String, f64)>, f64)> {
    let z = crate::plane_tree::partition_function(k, mu)?.to_f64();
    let mut rows: Vec<(String, f64)> = Vec::new();
    let mut covered = 0.0;
    if mu.is_finite_support() {
        let trees = crate::plane_tree::diameter_k_trees(k, mu)?;
        for (pc, w) in trees {
            let q = w.to_f64() / z;
            if q > 0.0 {
                covered += q;
                rows.push((pc.code_string(), q));
            }
        }
    } else {
        for n in 2..=size_cap {
            for pc in crate::plane_tree::enumerate_plane_trees_with_budget(n, size_cap)? {
                if pc.diameter_and_centers().0 == k {
                    let q = weight(&pc, mu).to_f64() / z;
                    if q > 0.0 {
                        covered += q;
                        rows.push((pc.code_string(), q));
                    }
                }
            }
        }
    }
    rows.sort_by(|a, b| a.0.cmp(&b.0));
    Ok((rows, (1.0 - covered).max(0.0)))
}

/// Row of the marginal-law report.
#[derive(Clone, Debug, Serialize)]
pub struct MarginalRow {
    pub code: String,
    pub expected: f64,
    pub observed: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct MarginalLawReport {
    pub k: usize,
    pub n_samples: u64,
    pub rows: Vec<MarginalRow>,
    pub other_mass: f64,
    pub chi_square: ChiSquare,
}

/// Compares empirical plane-tree frequencies (the marked edge
/// forgotten) against the exact weighted law.
pub fn marginal_plane_law_check<S: Scalar, R: Rng + ?Sized>(
    mu: &OffspringDistribution<S>,
    sampler: &OffspringSampler,
    k: usize,
    n_samples: u64,
    size_cap: usize,
    rng: &mut R,
    budget: &SampleBudget,
) -> Result<MarginalLawReport> {
    let (expected, other_mass) = expected_diameter_law(mu, k, size_cap)?;
    let mut counts: HashMap<String, u64> = HashMap::new();
    for _ in 0..n_samples {
        let pair = sample_pair(sampler, k, rng, budget)?;
        let code = canonicalize(compose(&pair.t_minus, &pair.t_plus)?.code())?;
        *counts.entry(code.code_string()).or_insert(0) += 1;
    }
    let observed: Vec<u64> = expected
        .iter()
        .map(|(code, _)| counts.get(code).copied().unwrap_or(0))
        .collect();
    let probs: Vec<f64> = expected.iter().map(|(_, p)| *p).collect();
    let chi = chi_square_gof(&observed, &probs, other_mass, n_samples, 5.0);
    let rows = expected
        .iter()
        .zip(&observed)
        .map(|((code, p), &obs)| MarginalRow {
            code: code.clone(),
            expected: *p,
            observed: obs,
        })
        .collect();
    Ok(MarginalLawReport {
        k,
        n_samples,
        rows,
        other_mass,
        chi_square: chi,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct EdgeUniformityRow {
    pub code: String,
    pub central_edges: usize,
    pub hits: u64,
    pub statistic: f64,
    pub dof: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct EdgeUniformityReport {
    pub k: usize,
    pub n_samples: u64,
    /// Trees with enough hits to test individually.
    pub rows: Vec<EdgeUniformityRow>,
    /// Independent per-tree statistics pooled into one test.
    pub pooled: ChiSquare,
}

/// Conditional on the realized plane tree, the marked edge must be
/// uniform over its central edges.
pub fn edge_uniformity_check<R: Rng + ?Sized>(
    sampler: &OffspringSampler,
    k: usize,
    n_samples: u64,
    min_hits: u64,
    rng: &mut R,
    budget: &SampleBudget,
) -> Result<EdgeUniformityReport> {
    use statrs::distribution::{ChiSquared, ContinuousCDF};
    let mut per_tree: HashMap<String, HashMap<usize, u64>> = HashMap::new();
    for _ in 0..n_samples {
        let s = sample_diameter(sampler, k, rng, budget)?;
        *per_tree
            .entry(s.plane.code_string())
            .or_default()
            .entry(s.edge_index)
            .or_insert(0) += 1;
    }
    let mut rows = Vec::new();
    let mut pooled_stat = 0.0;
    let mut pooled_dof = 0usize;
    let mut codes: Vec<&String> = per_tree.keys().collect();
    codes.sort();
    for code in codes {
        let edge_counts = &per_tree[code];
        let hits: u64 = edge_counts.values().sum();
        if hits < min_hits {
            continue;
        }
        let pc = canonicalize(&OrderedTree::parse(code)?)?;
        let central = pc.central_edges();
        let adj = pc.adjacency();
        let edges = adj.oriented_edges_in_contour_order(0);
        let central_indices: Vec<usize> = central
            .iter()
            .map(|e| edges.iter().position(|f| f == e).expect("central edge"))
            .collect();
        let m = central_indices.len();
        let expected = hits as f64 / m as f64;
        let stat: f64 = central_indices
            .iter()
            .map(|idx| {
                let obs = edge_counts.get(idx).copied().unwrap_or(0) as f64;
                (obs - expected).powi(2) / expected
            })
            .sum();
        pooled_stat += stat;
        pooled_dof += m - 1;
        rows.push(EdgeUniformityRow {
            code: code.clone(),
            central_edges: m,
            hits,
            statistic: stat,
            dof: m - 1,
        });
    }
    let pooled = if pooled_dof == 0 {
        ChiSquare {
            statistic: 0.0,
            dof: 1,
            p_value: 1.0,
            bins: 0,
        }
    } else {
        let chi = ChiSquared::new(pooled_dof as f64).expect("positive dof");
        ChiSquare {
            statistic: pooled_stat,
            dof: pooled_dof,
            p_value: 1.0 - chi.cdf(pooled_stat),
            bins: rows.len(),
        }
    };
    Ok(EdgeUniformityReport {
        k,
        n_samples,
        rows,
        pooled,
    })
}
