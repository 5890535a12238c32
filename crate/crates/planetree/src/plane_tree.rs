//! Unrooted unlabelled plane trees and their central structure.
//!
//! A plane tree is an embedding of a tree in the oriented plane up to
//! orientation-preserving homeomorphism. Rooting one at an oriented
//! edge yields an ordered rooted tree; conversely every ordered tree of
//! size at least two arises that way. Equality of plane trees is
//! decided through the canonical code: the lexicographically minimal
//! parenthesis string over all oriented-edge rootings.
//!
//! A tree has one center (even diameter) or two adjacent centers (odd
//! diameter). The oriented edges pointing into a center from a
//! diametral path are the central edges `K(t)`; rooting at one of them
//! splits the tree into an ordered pair of rooted trees whose heights
//! determine the diameter, and [`compose`]/[`decompose`] realize that
//! bijection.

use crate::enumeration::{for_each_diameter_bounded_code, for_each_tree_of_size, TreeGenerator};
use crate::error::{Error, Result};
use crate::offspring::OffspringDistribution;
use crate::ordered_tree::OrderedTree;
use crate::scalar::Scalar;
use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Zero};
use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

/// Default cap on exhaustive plane-tree enumeration by size.
pub const ENUMERATION_BUDGET: usize = 13;

/// Canonical representative of an unrooted unlabelled plane tree.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct PlaneCode {
    canonical: OrderedTree,
    n_vertices: usize,
}

/// Adjacency view of a plane tree: vertices in preorder of some
/// rooting, each with its neighbors in cyclic order.
#[derive(Clone, Debug)]
pub struct PlaneAdjacency {
    /// `neighbors[v]` in cyclic order; for the root of the generating
    /// rooting this is the child list, for other vertices the parent
    /// comes first.
    neighbors: Vec<Vec<usize>>,
}

impl PlaneAdjacency {
    /// Builds the adjacency of the plane tree underlying an ordered
    /// tree, vertices numbered in preorder.
    pub fn from_tree(t: &OrderedTree) -> Self {
        let mut neighbors: Vec<Vec<usize>> = Vec::with_capacity(t.size());
        fn walk(node: &OrderedTree, parent: Option<usize>, adj: &mut Vec<Vec<usize>>) -> usize {
            let id = adj.len();
            adj.push(match parent {
                Some(p) => vec![p],
                None => Vec::new(),
            });
            for child in node.children() {
                let child_id = walk(child, Some(id), adj);
                adj[id].push(child_id);
            }
            id
        }
        walk(t, None, &mut neighbors);
        PlaneAdjacency { neighbors }
    }

    pub fn len(&self) -> usize {
        self.neighbors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.neighbors.is_empty()
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.neighbors[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.neighbors[v].len()
    }

    /// Ordered tree obtained by rooting at the oriented edge
    /// `(tail, head)`.
    pub fn root_at(&self, tail: usize, head: usize) -> OrderedTree {
        self.subtree_from(tail, head, true)
    }

    /// Subtree at `v` entered from `parent`; `include_parent_side`
    /// makes `parent` the first child instead of excluding it.
    fn subtree_from(&self, v: usize, first: usize, include_all: bool) -> OrderedTree {
        let order = self.children_order(v, first, include_all);
        let children = order
            .into_iter()
            .map(|w| self.build_below(w, v))
            .collect();
        OrderedTree::from_children(children)
    }

    fn build_below(&self, v: usize, parent: usize) -> OrderedTree {
        let order = self.children_order(v, parent, false);
        let children = order
            .into_iter()
            .map(|w| self.build_below(w, v))
            .collect();
        OrderedTree::from_children(children)
    }

    /// Neighbors of `v` in cyclic order starting at (or just after)
    /// `anchor`.
    fn children_order(&self, v: usize, anchor: usize, include_anchor: bool) -> Vec<usize> {
        let cycle = &self.neighbors[v];
        let pos = cycle
            .iter()
            .position(|&w| w == anchor)
            .expect("anchor must be adjacent");
        let mut order = Vec::with_capacity(cycle.len());
        for i in 0..cycle.len() {
            let w = cycle[(pos + i) % cycle.len()];
            if i == 0 && !include_anchor {
                continue;
            }
            order.push(w);
        }
        order
    }

    /// Oriented edges in contour order of the generating rooting: the
    /// `j`-th entry is the edge crossed by the exploration at step `j`.
    pub fn oriented_edges_in_contour_order(&self, root: usize) -> Vec<(usize, usize)> {
        let mut edges = Vec::with_capacity(2 * (self.len() - 1));
        // Re-walk the exploration: descend into children in cyclic
        // order, recording each crossing.
        fn walk(
            adj: &PlaneAdjacency,
            v: usize,
            parent: Option<usize>,
            edges: &mut Vec<(usize, usize)>,
        ) {
            let order = match parent {
                Some(p) => adj.children_order(v, p, false),
                None => adj.neighbors[v].clone(),
            };
            for w in order {
                edges.push((v, w));
                walk(adj, w, Some(v), edges);
                edges.push((w, v));
            }
        }
        walk(self, root, None, &mut edges);
        edges
    }

    /// Breadth-first distances from `start`.
    pub fn bfs(&self, start: usize) -> Vec<u32> {
        let mut dist = vec![u32::MAX; self.len()];
        dist[start] = 0;
        let mut queue = std::collections::VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            for &w in &self.neighbors[v] {
                if dist[w] == u32::MAX {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
            }
        }
        dist
    }
}

/// Canonical code of the plane tree underlying `t`.
///
/// Enumerates all `2(n-1)` oriented-edge rootings and keeps the
/// lexicographically smallest parenthesis string; idempotent, and two
/// ordered trees canonicalize equal exactly when they are rootings of
/// the same plane tree.
pub fn canonicalize(t: &OrderedTree) -> Result<PlaneCode> {
    if t.size() < 2 {
        return Err(Error::NoEdgeRooting);
    }
    let adj = PlaneAdjacency::from_tree(t);
    let mut best: Option<(String, OrderedTree)> = None;
    for (tail, head) in adj.oriented_edges_in_contour_order(0) {
        let code = adj.root_at(tail, head);
        let s = code.to_code();
        if best.as_ref().map_or(true, |(b, _)| s < *b) {
            best = Some((s, code));
        }
    }
    let (_, canonical) = best.expect("size >= 2 has an edge");
    Ok(PlaneCode {
        n_vertices: canonical.size(),
        canonical,
    })
}

impl PlaneCode {
    pub fn canonical_tree(&self) -> &OrderedTree {
        &self.canonical
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn code_string(&self) -> String {
        self.canonical.to_code()
    }

    pub fn adjacency(&self) -> PlaneAdjacency {
        PlaneAdjacency::from_tree(&self.canonical)
    }

    /// Distinct ordered trees over all oriented-edge rootings.
    pub fn rootings(&self) -> BTreeSet<OrderedTree> {
        let adj = self.adjacency();
        adj.oriented_edges_in_contour_order(0)
            .into_iter()
            .map(|(tail, head)| adj.root_at(tail, head))
            .collect()
    }

    /// Rooting code of every oriented edge, indexed in contour order of
    /// the canonical tree.
    pub fn rootings_by_edge(&self) -> Vec<((usize, usize), OrderedTree)> {
        let adj = self.adjacency();
        adj.oriented_edges_in_contour_order(0)
            .into_iter()
            .map(|(tail, head)| ((tail, head), adj.root_at(tail, head)))
            .collect()
    }

    /// Diameter and the one or two central vertices (ids in the
    /// canonical preorder numbering).
    pub fn diameter_and_centers(&self) -> (usize, Vec<usize>) {
        let adj = self.adjacency();
        let n = adj.len();
        let mut diameter = 0u32;
        let mut ecc = vec![0u32; n];
        for v in 0..n {
            let dist = adj.bfs(v);
            ecc[v] = dist.into_iter().max().unwrap();
            diameter = diameter.max(ecc[v]);
        }
        let radius = *ecc.iter().min().unwrap();
        let centers: Vec<usize> = (0..n).filter(|&v| ecc[v] == radius).collect();
        (diameter as usize, centers)
    }

    /// Central edges `(tail, head)`: the two orientations between the
    /// centers when the diameter is odd, the edges entering the center
    /// from a diametral branch when it is even.
    pub fn central_edges(&self) -> Vec<(usize, usize)> {
        let adj = self.adjacency();
        let (diameter, centers) = self.diameter_and_centers();
        if diameter % 2 == 1 {
            debug_assert_eq!(centers.len(), 2);
            let (c, c2) = (centers[0], centers[1]);
            return vec![(c, c2), (c2, c)];
        }
        debug_assert_eq!(centers.len(), 1);
        let c = centers[0];
        let dist = adj.bfs(c);
        // Branch through each neighbor: deepest vertex entered that way.
        let mut branch_of = vec![usize::MAX; adj.len()];
        branch_of[c] = c;
        let mut order: Vec<usize> = (0..adj.len()).collect();
        order.sort_by_key(|&v| dist[v]);
        for v in order {
            if v == c {
                continue;
            }
            let parent = *adj
                .neighbors(v)
                .iter()
                .find(|&&w| dist[w] + 1 == dist[v])
                .expect("bfs parent");
            branch_of[v] = if parent == c { v } else { branch_of[parent] };
        }
        let mut deepest: HashMap<usize, u32> = HashMap::new();
        for v in 0..adj.len() {
            if v != c {
                let e = deepest.entry(branch_of[v]).or_insert(0);
                *e = (*e).max(dist[v]);
            }
        }
        adj.neighbors(c)
            .iter()
            .copied()
            .filter(|&v| deepest.get(&v).copied().unwrap_or(0) as usize == diameter / 2)
            .map(|v| (v, c))
            .collect()
    }
}

/// Ordered tree arising from rooting a plane tree at an oriented edge,
/// tagged with whether that edge is central.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct EdgeRootedCode {
    code: OrderedTree,
    is_central: bool,
}

impl EdgeRootedCode {
    pub fn from_tree(code: OrderedTree) -> Result<Self> {
        if code.size() < 2 {
            return Err(Error::NoEdgeRooting);
        }
        let is_central = {
            let (plus, minus) = split_heights(&code);
            plus == minus || plus == minus + 1
        };
        Ok(EdgeRootedCode { code, is_central })
    }

    pub fn code(&self) -> &OrderedTree {
        &self.code
    }

    pub fn is_central(&self) -> bool {
        self.is_central
    }

    pub fn into_tree(self) -> OrderedTree {
        self.code
    }
}

/// Heights of (head-side subtree, tail-side remainder) of a code.
fn split_heights(code: &OrderedTree) -> (usize, usize) {
    let plus = code.children()[0].height();
    let minus = code
        .children()
        .iter()
        .skip(1)
        .map(|c| c.height() + 1)
        .max()
        .unwrap_or(0);
    (plus, minus)
}

/// Splits a centrally rooted code into its tail-side and head-side
/// rooted trees `(t_minus, t_plus)`.
///
/// `t_plus` is the first root subtree; `t_minus` is the root with the
/// remaining children. Errors unless the root edge is central.
pub fn decompose(s: &EdgeRootedCode) -> Result<(OrderedTree, OrderedTree)> {
    if !s.is_central {
        return Err(Error::NotCentral);
    }
    let children = s.code.children();
    let t_plus = children[0].clone();
    let t_minus = OrderedTree::from_children(children[1..].to_vec());
    Ok((t_minus, t_plus))
}

/// Inverse of [`decompose`]: grafts `t_plus` as the first subtree of
/// `t_minus`'s root. Requires the heights to differ by 0 or 1, which
/// makes the new root edge central with diameter
/// `height(t_minus) + height(t_plus) + 1`.
pub fn compose(t_minus: &OrderedTree, t_plus: &OrderedTree) -> Result<EdgeRootedCode> {
    let (hm, hp) = (t_minus.height(), t_plus.height());
    if hp != hm && hp != hm + 1 {
        return Err(Error::HeightMismatch { left: hm, right: hp });
    }
    let mut children = Vec::with_capacity(1 + t_minus.children().len());
    children.push(t_plus.clone());
    children.extend(t_minus.children().iter().cloned());
    Ok(EdgeRootedCode {
        code: OrderedTree::from_children(children),
        is_central: true,
    })
}

/// Number of central edges whose rooting reproduces the same code.
///
/// Counted directly from the definition: enumerate the central edges of
/// the underlying plane tree and compare rooting codes.
pub fn sym(s: &EdgeRootedCode) -> Result<usize> {
    if !s.is_central {
        return Err(Error::NotCentral);
    }
    let plane = canonicalize(&s.code)?;
    let adj = plane.adjacency();
    let target = s.code.to_code();
    let count = plane
        .central_edges()
        .into_iter()
        .filter(|&(tail, head)| adj.root_at(tail, head).to_code() == target)
        .count();
    debug_assert!(count >= 1);
    Ok(count)
}

/// Symmetry count through closed forms: `1 + [t_minus == t_plus]` for
/// an odd diameter, and the rotation count `deg(center)/d` of the
/// cyclic branch list for an even one, `d` its minimal period.
pub fn sym_closed_form(s: &EdgeRootedCode) -> Result<usize> {
    let (t_minus, t_plus) = decompose(s)?;
    if t_plus.height() == t_minus.height() {
        return Ok(1 + usize::from(t_minus == t_plus));
    }
    // Cyclic list of the center's branches: the subtrees of t_plus's
    // root followed by the tail-side tree.
    let mut branches: Vec<&OrderedTree> = t_plus.children().iter().collect();
    branches.push(&t_minus);
    let n = branches.len();
    let divisors: Vec<usize> = (1..=n).filter(|d| n % d == 0).collect();
    for d in divisors {
        if (0..n).all(|i| branches[i] == branches[(i + d) % n]) {
            return Ok(n / d);
        }
    }
    unreachable!("period n always matches");
}

/// Product over vertices of `mu(degree - 1)`.
pub fn weight<S: Scalar>(pc: &PlaneCode, mu: &OffspringDistribution<S>) -> S {
    weight_of_code(pc.canonical_tree(), mu)
}

/// Same weight computed on any rooting of the plane tree: the root has
/// degree equal to its childcount, every other vertex one more.
pub fn weight_of_code<S: Scalar>(code: &OrderedTree, mu: &OffspringDistribution<S>) -> S {
    let mut histogram: BTreeMap<usize, u64> = BTreeMap::new();
    fn degrees(node: &OrderedTree, is_root: bool, hist: &mut BTreeMap<usize, u64>) {
        let deg = node.children().len() + usize::from(!is_root);
        *hist.entry(deg).or_insert(0) += 1;
        for child in node.children() {
            degrees(child, false, hist);
        }
    }
    degrees(code, true, &mut histogram);
    histogram
        .into_iter()
        .fold(S::one(), |acc, (deg, count)| {
            acc * mu.pmf(deg - 1).powu(count)
        })
}

/// Probability of an ordered tree under the branching law: product of
/// `mu(childcount)` over vertices.
pub fn gw_probability<S: Scalar>(t: &OrderedTree, mu: &OffspringDistribution<S>) -> S {
    let mut histogram: BTreeMap<usize, u64> = BTreeMap::new();
    fn counts(node: &OrderedTree, hist: &mut BTreeMap<usize, u64>) {
        *hist.entry(node.children().len()).or_insert(0) += 1;
        for child in node.children() {
            counts(child, hist);
        }
    }
    counts(t, &mut histogram);
    histogram
        .into_iter()
        .fold(S::one(), |acc, (k, count)| acc * mu.pmf(k).powu(count))
}

/// All plane trees with `n` vertices, by exhausting the Catalan family
/// and deduplicating through rooting orbits.
pub fn enumerate_plane_trees(n: usize) -> Result<Vec<PlaneCode>> {
    enumerate_plane_trees_with_budget(n, ENUMERATION_BUDGET)
}

pub fn enumerate_plane_trees_with_budget(n: usize, budget: usize) -> Result<Vec<PlaneCode>> {
    if n < 2 || n > budget {
        return Err(Error::EnumerationBudget { n, budget });
    }
    let mut seen: HashSet<String> = HashSet::new();
    let mut out: Vec<PlaneCode> = Vec::new();
    for_each_tree_of_size(n, &mut |t| {
        let code = t.to_code();
        if seen.contains(&code) {
            return;
        }
        let pc = canonicalize(t).expect("size >= 2");
        for rooting in pc.rootings() {
            seen.insert(rooting.to_code());
        }
        out.push(pc);
    });
    out.sort_by(|a, b| a.code_string().cmp(&b.code_string()));
    Ok(out)
}

/// Number of plane trees with `n` edges, via the closed four-term
/// enumeration formula (binomial mass, odd-size reflection term, and
/// totient-weighted rotation classes).
///
/// The formula is exact for `n >= 2`; the single-edge case is returned
/// directly since the rotation terms overcount it.
pub fn walkup_count(n: usize) -> BigUint {
    if n == 0 {
        return BigUint::zero();
    }
    if n == 1 {
        return BigUint::one();
    }
    let nb = |x: usize| BigRational::from_integer(x.into());
    let mut total = binomial(2 * n, n) / (nb(2) * nb(n) * nb(n + 1));
    if n % 2 == 1 {
        total += binomial(n + 1, (n + 1) / 2) / (nb(4) * nb(n));
    }
    total += nb(totient(n)) / nb(n);
    let mut divisor_sum = BigRational::zero();
    for d in 2..n {
        if n % d == 0 {
            divisor_sum += nb(totient(n / d)) * binomial(2 * d, d);
        }
    }
    total += divisor_sum / (nb(2) * nb(n));
    assert!(total.is_integer(), "enumeration formula must be integral");
    total.to_integer().to_biguint().expect("nonnegative count")
}

fn binomial(n: usize, k: usize) -> BigRational {
    let mut acc = BigUint::one();
    for i in 0..k.min(n - k) {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    BigRational::from_integer(acc.into())
}

fn totient(mut n: usize) -> usize {
    let mut result = n;
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            while n % p == 0 {
                n /= p;
            }
            result -= result / p;
        }
        p += 1;
    }
    if n > 1 {
        result -= result / n;
    }
    result
}

/// Summary row of an enumeration run.
#[derive(Clone, Debug, serde::Serialize)]
pub struct EnumerationRow {
    pub n_vertices: usize,
    pub walkup: String,
    pub enumerated: usize,
    /// Plane trees with a nontrivial rotation (fewer distinct rootings
    /// than oriented edges).
    pub symmetric: usize,
    pub max_central_edges: usize,
}

/// Enumerates sizes `2..=n_max` and compares against the closed formula.
pub fn enumeration_report(n_max: usize, budget: usize) -> Result<Vec<EnumerationRow>> {
    (2..=n_max)
        .map(|n| {
            let trees = enumerate_plane_trees_with_budget(n, budget)?;
            let symmetric = trees
                .iter()
                .filter(|pc| pc.rootings().len() < 2 * (n - 1))
                .count();
            let max_central_edges = trees
                .iter()
                .map(|pc| pc.central_edges().len())
                .max()
                .unwrap_or(0);
            Ok(EnumerationRow {
                n_vertices: n,
                walkup: walkup_count(n - 1).to_string(),
                enumerated: trees.len(),
                symmetric,
                max_central_edges,
            })
        })
        .collect()
}

/// Total weight of all plane trees with diameter `k`, two independent
/// routes.
///
/// Route A sums `weight` directly over an exhaustive, degree-pruned
/// enumeration of diameter-`k` plane trees (finite-support laws only).
/// Route B sums `S_k/(1+nu)`- or `S_k/2`-weighted products of branching
/// probabilities over ordered pairs with the central height profile.
/// On the exact backend both are computed and must agree; the float
/// path evaluates route B (with a truncation cap for infinite support).
pub fn partition_function<S: Scalar>(k: usize, mu: &OffspringDistribution<S>) -> Result<S> {
    if k == 0 {
        return Err(Error::DegenerateHeight { n: 0 });
    }
    let b = partition_function_pairs(k, mu)?;
    if S::EXACT {
        let a = partition_function_direct(k, mu)?;
        if a != b {
            return Err(Error::InvalidDistribution(format!(
                "partition function routes disagree at diameter {k}: direct {a}, pairs {b}"
            )));
        }
    }
    Ok(b)
}

/// Route A: direct sum of plane-tree weights at diameter exactly `k`.
pub fn partition_function_direct<S: Scalar>(
    k: usize,
    mu: &OffspringDistribution<S>,
) -> Result<S> {
    Ok(diameter_k_trees(k, mu)?
        .into_iter()
        .fold(S::zero(), |acc, (_, w)| acc + w))
}

/// Every positive-weight plane tree of diameter exactly `k`, with its
/// weight.
///
/// Generates every positive-weight rooted code of diameter at most `k`
/// under the degree constraints of `mu` and deduplicates rooting
/// orbits. Finite-support laws only.
pub fn diameter_k_trees<S: Scalar>(
    k: usize,
    mu: &OffspringDistribution<S>,
) -> Result<Vec<(PlaneCode, S)>> {
    let max_child = mu.max_support().ok_or(Error::ExactBackendUnsupported(
        "direct summation over an infinite support",
    ))?;
    let support: Vec<usize> = (0..=max_child)
        .filter(|&c| mu.pmf(c) > S::zero())
        .collect();
    let root_menu: Vec<usize> = support
        .iter()
        .map(|&c| c + 1)
        .filter(|&c| c >= 1)
        .collect();

    let mut seen: HashSet<String> = HashSet::new();
    let mut out: Vec<(PlaneCode, S)> = Vec::new();
    let mut err: Option<Error> = None;
    for_each_diameter_bounded_code(&support, &root_menu, k, &mut |tree, _height, diameter| {
        if diameter != k || err.is_some() {
            return;
        }
        let code = tree.to_code();
        if seen.contains(&code) {
            return;
        }
        match canonicalize(tree) {
            Ok(pc) => {
                for rooting in pc.rootings() {
                    seen.insert(rooting.to_code());
                }
                let w = weight(&pc, mu);
                out.push((pc, w));
            }
            Err(e) => err = Some(e),
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok(out),
    }
}

/// Route B: pair sum over the central height profile.
pub fn partition_function_pairs<S: Scalar>(
    k: usize,
    mu: &OffspringDistribution<S>,
) -> Result<S> {
    let h_minus = (k - 1) / 2;
    let h_plus = k / 2;
    let minus_trees = trees_of_exact_height(mu, h_minus)?;
    let plus_trees = if h_plus == h_minus {
        minus_trees.clone()
    } else {
        trees_of_exact_height(mu, h_plus)?
    };

    let mut total = S::zero();
    for (tm, pm) in &minus_trees {
        for (tp, pp) in &plus_trees {
            let s = compose(tm, tp).and_then(|code| sym(&code))?;
            let weight_factor = if k % 2 == 1 {
                S::from_ratio(s as u64, 2)
            } else {
                S::from_ratio(s as u64, 1 + tp.nu() as u64)
            };
            total = total + pm.clone() * pp.clone() * weight_factor;
        }
    }
    Ok(total)
}

/// Positive-probability ordered trees of exact height `h`, with their
/// branching probabilities.
///
/// Finite-support laws enumerate completely. Infinite-support laws are
/// truncated by size until the un-enumerated mass in the height class
/// is below 1e-12 of the class mass, which fails loudly if the cap
/// explodes first.
fn trees_of_exact_height<S: Scalar>(
    mu: &OffspringDistribution<S>,
    h: usize,
) -> Result<Vec<(OrderedTree, S)>> {
    if let Some(max_child) = mu.max_support() {
        let support: Vec<usize> = (0..=max_child)
            .filter(|&c| mu.pmf(c) > S::zero())
            .collect();
        // Height-h trees under a branching cap cannot exceed this size.
        let mut cap = 1usize;
        let mut level = 1usize;
        for _ in 0..h {
            level = level.saturating_mul(max_child.max(1));
            cap = cap.saturating_add(level);
        }
        if cap > 2048 {
            return Err(Error::EnumerationBudget { n: cap, budget: 2048 });
        }
        let mut gen = TreeGenerator::new(Some(support), cap, usize::MAX);
        return Ok(gen
            .with_exact_height(h, cap)
            .into_iter()
            .map(|m| {
                let p = gw_probability(&m.tree, mu);
                (m.tree, p)
            })
            .collect());
    }

    // Infinite support: grow the size cap until the missing mass in the
    // class is negligible.
    let g = mu.g_iter(h + 1);
    let class_mass = g.height_pmf(h);
    let mut cap = 8usize.max(h + 1);
    loop {
        let mut gen = TreeGenerator::new(None, cap, usize::MAX);
        let trees: Vec<(OrderedTree, S)> = gen
            .with_exact_height(h, cap)
            .into_iter()
            .map(|m| {
                let p = gw_probability(&m.tree, mu);
                (m.tree, p)
            })
            .collect();
        let covered = trees
            .iter()
            .fold(S::zero(), |acc, (_, p)| acc + p.clone());
        let missing = class_mass.to_f64() - covered.to_f64();
        if missing <= 1e-12 * class_mass.to_f64() {
            return Ok(trees);
        }
        cap *= 2;
        if cap > 64 {
            return Err(Error::EnumerationBudget { n: cap, budget: 64 });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    fn t(code: &str) -> OrderedTree {
        OrderedTree::parse(code).unwrap()
    }

    fn r(num: u64, den: u64) -> BigRational {
        BigRational::from_ratio(num, den)
    }

    type Exact = OffspringDistribution<BigRational>;

    fn binary_half() -> Exact {
        Exact::finite(vec![r(1, 2), r(0, 1), r(1, 2)]).unwrap()
    }

    #[test]
    fn canonicalize_two_vertex_tree() {
        let pc = canonicalize(&t("(())")).unwrap();
        assert_eq!(pc.code_string(), "(())");
        assert_eq!(pc.n_vertices(), 2);
        assert!(canonicalize(&t("()")).is_err());
    }

    #[test]
    fn canonicalize_identifies_three_path_rootings() {
        let a = canonicalize(&t("(()())")).unwrap();
        let b = canonicalize(&t("((()))")).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn canonicalize_is_idempotent() {
        for code in ["(()())", "((()))", "((()())())", "(((())))"] {
            let pc = canonicalize(&t(code)).unwrap();
            let again = canonicalize(pc.canonical_tree()).unwrap();
            assert_eq!(pc, again);
        }
    }

    #[test]
    fn four_vertex_trees_form_two_classes() {
        let mut classes = HashSet::new();
        for_each_tree_of_size(4, &mut |tree| {
            classes.insert(canonicalize(tree).unwrap());
        });
        assert_eq!(classes.len(), 2);
    }

    #[test]
    fn rooting_counts() {
        // Two rootings of the single edge coincide.
        assert_eq!(canonicalize(&t("(())")).unwrap().rootings().len(), 1);
        // The three-leaf star has 6 oriented edges and 2 distinct codes.
        let star = canonicalize(&t("(()()())")).unwrap();
        assert_eq!(star.rootings().len(), 2);
        // A generic tree has all rootings distinct.
        let generic = canonicalize(&t("((()())()((())))")).unwrap();
        assert_eq!(
            generic.rootings().len(),
            2 * (generic.n_vertices() - 1)
        );
    }

    #[test]
    fn diameter_and_centers_examples() {
        // Path on 4 vertices: odd diameter, two adjacent centers.
        let p4 = canonicalize(&t("(((())))")).unwrap();
        let (d, centers) = p4.diameter_and_centers();
        assert_eq!(d, 3);
        assert_eq!(centers.len(), 2);
        let adj = p4.adjacency();
        assert!(adj.neighbors(centers[0]).contains(&centers[1]));

        // Path on 5 vertices: even diameter, unique center.
        let p5 = canonicalize(&t("((((()))))")).unwrap();
        let (d, centers) = p5.diameter_and_centers();
        assert_eq!(d, 4);
        assert_eq!(centers.len(), 1);

        // Three-leaf star: unique center at the hub.
        let star = canonicalize(&t("(()()())")).unwrap();
        let (d, centers) = star.diameter_and_centers();
        assert_eq!(d, 2);
        assert_eq!(centers.len(), 1);
        assert_eq!(star.adjacency().degree(centers[0]), 3);
    }

    #[test]
    fn central_edges_examples() {
        let p4 = canonicalize(&t("(((())))")).unwrap();
        assert_eq!(p4.central_edges().len(), 2);

        let star = canonicalize(&t("(()()())")).unwrap();
        let k = star.central_edges();
        assert_eq!(k.len(), 3);
        let (_, centers) = star.diameter_and_centers();
        assert!(k.iter().all(|&(_, head)| head == centers[0]));
    }

    #[test]
    fn decompose_examples() {
        // Path on 4 vertices rooted at a central edge.
        let code = EdgeRootedCode::from_tree(t("((())())")).unwrap();
        assert!(code.is_central());
        let (tm, tp) = decompose(&code).unwrap();
        assert_eq!(tm, t("(())"));
        assert_eq!(tp, t("(())"));

        // Star rooted at a leaf-to-hub edge.
        let code = EdgeRootedCode::from_tree(t("((()()))")).unwrap();
        let (tm, tp) = decompose(&code).unwrap();
        assert_eq!(tm, t("()"));
        assert_eq!(tp, t("(()())"));

        // Non-central rooting is rejected.
        let skewed = EdgeRootedCode::from_tree(t("(((())))")).unwrap();
        assert!(!skewed.is_central());
        assert!(decompose(&skewed).is_err());
    }

    #[test]
    fn compose_examples() {
        let two = compose(&t("()"), &t("()")).unwrap();
        assert_eq!(two.code(), &t("(())"));

        let four_path = compose(&t("(())"), &t("(())")).unwrap();
        let pc = canonicalize(four_path.code()).unwrap();
        assert_eq!(pc.diameter_and_centers().0, 3);

        assert!(compose(&t("()"), &t("((()))")).is_err());
    }

    #[test]
    fn compose_decompose_round_trip_exhaustive() {
        // Over all plane trees of size <= 8 and all central edges.
        for n in 2..=8 {
            for pc in enumerate_plane_trees(n).unwrap() {
                let adj = pc.adjacency();
                for (tail, head) in pc.central_edges() {
                    let code = EdgeRootedCode::from_tree(adj.root_at(tail, head)).unwrap();
                    assert!(code.is_central(), "central edge must give central code");
                    let (tm, tp) = decompose(&code).unwrap();
                    let back = compose(&tm, &tp).unwrap();
                    assert_eq!(&back, &code);
                }
            }
        }
    }

    #[test]
    fn central_edge_counts_and_heights_exhaustive() {
        for n in 2..=8 {
            for pc in enumerate_plane_trees(n).unwrap() {
                let (d, centers) = pc.diameter_and_centers();
                assert_eq!(centers.len(), if d % 2 == 1 { 2 } else { 1 });
                let k = pc.central_edges();
                let adj = pc.adjacency();
                let first = k[0];
                let code = EdgeRootedCode::from_tree(adj.root_at(first.0, first.1)).unwrap();
                let (tm, tp) = decompose(&code).unwrap();
                if d % 2 == 1 {
                    assert_eq!(k.len(), 2);
                    assert_eq!(tm.height(), d / 2);
                    assert_eq!(tp.height(), d / 2);
                } else {
                    assert_eq!(k.len(), 1 + tp.nu(), "tree {}", pc.code_string());
                    assert_eq!(tm.height() + 1, d / 2);
                    assert_eq!(tp.height(), d / 2);
                }
            }
        }
    }

    #[test]
    fn sym_examples() {
        // Path on 4 vertices: the two central orientations agree.
        let code = EdgeRootedCode::from_tree(t("((())())")).unwrap();
        assert_eq!(sym(&code).unwrap(), 2);

        // Star from any central edge: all three rootings coincide.
        let star = EdgeRootedCode::from_tree(t("((()()))")).unwrap();
        assert_eq!(sym(&star).unwrap(), 3);

        // Asymmetric odd-diameter tree.
        let asym = compose(&t("(())"), &t("(()())")).unwrap();
        assert_eq!(sym(&asym).unwrap(), 1);
    }

    #[test]
    fn sym_matches_closed_form_exhaustive() {
        for n in 2..=8 {
            for pc in enumerate_plane_trees(n).unwrap() {
                let adj = pc.adjacency();
                let k = pc.central_edges();
                for (tail, head) in &k {
                    let code = EdgeRootedCode::from_tree(adj.root_at(*tail, *head)).unwrap();
                    let by_definition = sym(&code).unwrap();
                    let closed = sym_closed_form(&code).unwrap();
                    assert_eq!(by_definition, closed, "tree {}", pc.code_string());
                    assert!(by_definition >= 1 && by_definition <= k.len());
                }
            }
        }
    }

    #[test]
    fn weight_examples() {
        let geo = OffspringDistribution::<BigRational>::geometric_half();
        let two = canonicalize(&t("(())")).unwrap();
        assert_eq!(weight(&two, &geo), r(1, 4));

        let star = canonicalize(&t("(()()())")).unwrap();
        assert_eq!(weight(&star, &binary_half()), r(1, 16));

        // A degree present nowhere in the support kills the weight.
        let spider = canonicalize(&t("(()()()())")).unwrap();
        assert_eq!(weight(&spider, &binary_half()), BigRational::zero());
    }

    #[test]
    fn enumeration_matches_closed_formula_small() {
        for n in 2..=9 {
            let trees = enumerate_plane_trees(n).unwrap();
            assert_eq!(
                BigUint::from(trees.len()),
                walkup_count(n - 1),
                "size {n}"
            );
        }
        assert!(enumerate_plane_trees(14).is_err());
        assert!(enumerate_plane_trees(1).is_err());
    }

    #[test]
    fn walkup_values() {
        assert_eq!(walkup_count(1), BigUint::from(1u32));
        assert_eq!(walkup_count(2), BigUint::from(1u32));
        assert_eq!(walkup_count(3), BigUint::from(2u32));
        assert_eq!(walkup_count(4), BigUint::from(3u32));
        assert_eq!(walkup_count(5), BigUint::from(6u32));
        assert_eq!(walkup_count(6), BigUint::from(14u32));
    }

    #[test]
    fn partition_function_examples() {
        // Only the three-leaf star has diameter 2 and positive weight.
        let z2 = partition_function(2, &binary_half()).unwrap();
        assert_eq!(z2, r(1, 16));

        // The single edge: S = 2 and the odd factor S/2 gives mu(0)^2.
        let z1 = partition_function(1, &binary_half()).unwrap();
        assert_eq!(z1, r(1, 4));

        let ternary = Exact::finite(vec![r(2, 3), r(0, 1), r(0, 1), r(1, 3)]).unwrap();
        let z1 = partition_function(1, &ternary).unwrap();
        assert_eq!(z1, r(4, 9));
    }

    #[test]
    fn partition_routes_agree_small() {
        let laws = vec![
            binary_half(),
            Exact::finite(vec![r(2, 3), r(0, 1), r(0, 1), r(1, 3)]).unwrap(),
            Exact::finite(vec![r(1, 2), r(1, 4), r(1, 4)]).unwrap(),
        ];
        for mu in &laws {
            for k in 1..=4 {
                // partition_function itself asserts route equality on
                // the exact backend.
                let z = partition_function(k, mu).unwrap();
                assert!(z > BigRational::zero(), "Z_{k}");
            }
        }
    }

    #[test]
    fn partition_function_bound() {
        // Z_k is at most the product of the two height-class masses.
        let mu = binary_half();
        for k in 1..=5 {
            let z = partition_function(k, &mu).unwrap();
            let g = mu.g_iter(k / 2 + 2);
            let bound = g.height_pmf((k - 1) / 2) * g.height_pmf(k / 2);
            assert!(z <= bound, "Z_{k} = {z} > {bound}");
        }
    }

    #[test]
    fn float_partition_function_geometric() {
        // Diameter 3: both height classes are the height-1 trees.
        let mu = OffspringDistribution::<f64>::geometric_half();
        let z3 = partition_function(3, &mu).unwrap();
        // sum over pairs of height-1 trees of P(t1)P(t2)(1 + [t1=t2])/2
        // = (P(height=1)^2 + sum P(t)^2)/2 with P(height=1) = 1/6 and
        // sum over m-leaf roots of (2^-(2m+1))^2 = 1/60.
        let expected = (1.0 / 36.0 + 1.0 / 60.0) / 2.0;
        assert!((z3 - expected).abs() < 1e-9, "z3 = {z3}");
    }
}
