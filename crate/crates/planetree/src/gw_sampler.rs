//! Branching-tree samplers, unconditioned and conditioned by height.
//!
//! Conditioning on `height >= p` is plain rejection. Conditioning on
//! `height = p` never rejects on equality: a tree conditioned to reach
//! `p` is sampled and the height-`p` subtree along its first deepest
//! vertex is extracted, which has exactly the conditional law. Equality
//! rejection would cost another factor of order `p`, the extraction is
//! free.
//!
//! The extraction host is additionally restricted to the height window
//! `p <= height < 2p`. The extracted subtree is independent of the
//! host's height class (the height is a function of the complementary
//! component of the extraction bijection), so the window leaves the law
//! untouched while keeping the expected work finite: without it, a
//! critical tree conditioned to reach height `p` has infinite expected
//! size, and long runs inevitably exhaust any node budget. Attempts are
//! aborted at the first vertex of depth `2p`, which is an exact
//! rejection of the window's upper bound.

use crate::enumeration::TreeGenerator;
use crate::error::{Error, Result};
use crate::offspring::{OffspringDistribution, OffspringSampler};
use crate::ordered_tree::OrderedTree;
use crate::plane_tree::gw_probability;
use crate::scalar::Scalar;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;

/// Reproducible counter-based random stream.
///
/// Identical `(seed, stream_id)` pairs reproduce identical draws, and
/// distinct stream ids give streams that are independent for all
/// practical purposes, so Monte Carlo batches can fan out by id.
#[derive(Clone, Debug)]
pub struct RngStream {
    rng: ChaCha12Rng,
    seed: u64,
    stream_id: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&seed.to_le_bytes());
        key[8..16].copy_from_slice(&stream_id.to_le_bytes());
        key[16..24].copy_from_slice(b"planetre");
        RngStream {
            rng: ChaCha12Rng::from_seed(key),
            seed,
            stream_id,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.rng.fill_bytes(dest)
    }

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> std::result::Result<(), rand::Error> {
        self.rng.try_fill_bytes(dest)
    }
}

/// Limits on rejection attempts and generated nodes.
///
/// Exhaustion is an error, never a silent truncation: a partially
/// generated tree is discarded along with the whole call.
#[derive(Clone, Copy, Debug)]
pub struct SampleBudget {
    pub max_attempts: u64,
    /// Cap on the nodes of a single generated tree.
    pub max_nodes: u64,
}

impl Default for SampleBudget {
    fn default() -> Self {
        SampleBudget {
            max_attempts: 1_000_000,
            max_nodes: 100_000_000,
        }
    }
}

/// One unconditioned branching tree.
///
/// Breadth-first generation: each vertex draws its childcount from the
/// sampler, and the tree is rebuilt from the count sequence.
pub fn sample_gw<R: Rng + ?Sized>(
    sampler: &OffspringSampler,
    rng: &mut R,
    budget: &SampleBudget,
) -> Result<OrderedTree> {
    match sample_counts(sampler, rng, budget, None)? {
        Generated::Done { counts, height: _ } => Ok(tree_from_bfs_counts(&counts)),
        Generated::DepthCapHit => unreachable!("no depth cap supplied"),
    }
}

enum Generated {
    Done { counts: Vec<usize>, height: usize },
    /// A vertex reached the cap depth; the attempt is void.
    DepthCapHit,
}

/// Breadth-first childcount sequence plus the height of the tree.
fn sample_counts<R: Rng + ?Sized>(
    sampler: &OffspringSampler,
    rng: &mut R,
    budget: &SampleBudget,
    depth_cap: Option<usize>,
) -> Result<Generated> {
    let mut counts: Vec<usize> = Vec::new();
    let mut depths: Vec<usize> = vec![0];
    let mut next = 0usize;
    let mut height = 0usize;
    while next < depths.len() {
        let depth = depths[next];
        height = height.max(depth);
        let k = sampler.draw(rng);
        counts.push(k);
        if k > 0 {
            if let Some(cap) = depth_cap {
                if depth + 1 >= cap {
                    return Ok(Generated::DepthCapHit);
                }
            }
            for _ in 0..k {
                depths.push(depth + 1);
            }
        }
        if depths.len() as u64 > budget.max_nodes {
            return Err(Error::BudgetExhausted {
                attempts: 1,
                nodes: depths.len() as u64,
            });
        }
        next += 1;
    }
    Ok(Generated::Done { counts, height })
}

/// Rebuilds the tree from breadth-first childcounts.
fn tree_from_bfs_counts(counts: &[usize]) -> OrderedTree {
    let n = counts.len();
    // First-child index of every node.
    let mut first = Vec::with_capacity(n);
    let mut acc = 1usize;
    for &k in counts {
        first.push(acc);
        acc += k;
    }
    let mut built: Vec<Option<OrderedTree>> = vec![None; n];
    for i in (0..n).rev() {
        let children: Vec<OrderedTree> = (first[i]..first[i] + counts[i])
            .map(|j| built[j].take().expect("children are built first"))
            .collect();
        built[i] = Some(OrderedTree::from_children(children));
    }
    built[0].take().expect("root")
}

/// Tree conditioned on `height >= p`, by rejection.
pub fn sample_height_geq<R: Rng + ?Sized>(
    sampler: &OffspringSampler,
    p: usize,
    rng: &mut R,
    budget: &SampleBudget,
) -> Result<OrderedTree> {
    Ok(sample_height_geq_counted(sampler, p, rng, budget)?.0)
}

/// Same, also reporting the number of attempts used.
pub fn sample_height_geq_counted<R: Rng + ?Sized>(
    sampler: &OffspringSampler,
    p: usize,
    rng: &mut R,
    budget: &SampleBudget,
) -> Result<(OrderedTree, u64)> {
    for attempt in 1..=budget.max_attempts {
        let generated = sample_counts(sampler, rng, budget, None).map_err(|e| match e {
            Error::BudgetExhausted { nodes, .. } => Error::BudgetExhausted {
                attempts: attempt,
                nodes,
            },
            other => other,
        })?;
        match generated {
            Generated::Done { counts, height } if height >= p => {
                return Ok((tree_from_bfs_counts(&counts), attempt));
            }
            _ => {}
        }
    }
    Err(Error::BudgetExhausted {
        attempts: budget.max_attempts,
        nodes: 0,
    })
}

/// Tree with height exactly `p`: the deepest-line extraction applied to
/// a host tree conditioned into the height window `[p, 2p)`.
pub fn sample_height_eq<R: Rng + ?Sized>(
    sampler: &OffspringSampler,
    p: usize,
    rng: &mut R,
    budget: &SampleBudget,
) -> Result<OrderedTree> {
    if p == 0 {
        // The height-0 class is the single-vertex tree.
        return Ok(OrderedTree::leaf());
    }
    let cap = 2 * p;
    for attempt in 1..=budget.max_attempts {
        let generated =
            sample_counts(sampler, rng, budget, Some(cap)).map_err(|e| match e {
                Error::BudgetExhausted { nodes, .. } => Error::BudgetExhausted {
                    attempts: attempt,
                    nodes,
                },
                other => other,
            })?;
        if let Generated::Done { counts, height } = generated {
            if height >= p {
                let host = tree_from_bfs_counts(&counts);
                let stem = host.first_tip().prefix(height - p);
                let out = host.into_subtree(&stem)?;
                debug_assert_eq!(out.height(), p);
                return Ok(out);
            }
        }
    }
    Err(Error::BudgetExhausted {
        attempts: budget.max_attempts,
        nodes: 0,
    })
}

/// Which conditioning an exact law describes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HeightCondition {
    Eq,
    Geq,
}

/// Exact conditional law over trees of bounded size.
#[derive(Clone, Debug)]
pub struct ConditionalLaw<S: Scalar> {
    pub condition: HeightCondition,
    pub height: usize,
    pub size_cap: usize,
    /// Conditional probability per tree, deterministically ordered.
    pub entries: Vec<(OrderedTree, S)>,
    /// Conditional mass of trees beyond the size cap.
    pub truncated_mass: S,
}

/// Enumerates the conditional law of the tree given its height.
///
/// Exact on any backend whose pmf is exact; the truncated mass reports
/// how much of the class lies beyond `size_cap`.
pub fn exact_conditional_law<S: Scalar>(
    mu: &OffspringDistribution<S>,
    p: usize,
    condition: HeightCondition,
    size_cap: usize,
) -> Result<ConditionalLaw<S>> {
    let g = mu.g_iter(p + 1);
    let class_mass = match condition {
        HeightCondition::Eq => g.height_pmf(p),
        HeightCondition::Geq => S::one() - g.at(p).clone(),
    };
    if class_mass <= S::zero() {
        return Err(Error::DegenerateHeight { n: p });
    }
    let counts = mu.max_support().map(|m| {
        (0..=m)
            .filter(|&c| mu.pmf(c) > S::zero())
            .collect::<Vec<_>>()
    });
    let mut gen = TreeGenerator::new(counts, size_cap, usize::MAX);
    let mut entries: Vec<(OrderedTree, S)> = Vec::new();
    let mut covered = S::zero();
    for size in 1..=size_cap {
        for height in 0..size {
            let keep = match condition {
                HeightCondition::Eq => height == p,
                HeightCondition::Geq => height >= p,
            };
            if !keep {
                continue;
            }
            for m in gen.class(size, height).iter() {
                let prob = gw_probability(&m.tree, mu) / class_mass.clone();
                if prob > S::zero() {
                    covered = covered + prob.clone();
                    entries.push((m.tree.clone(), prob));
                }
            }
        }
    }
    entries.sort_by(|a, b| a.0.to_code().cmp(&b.0.to_code()));
    Ok(ConditionalLaw {
        condition,
        height: p,
        size_cap,
        entries,
        truncated_mass: S::one() - covered,
    })
}
