//! Exhaustive ordered-tree generators backing the small-scale oracles.

use crate::ordered_tree::OrderedTree;
use std::rc::Rc;

/// All ordered trees with exactly `n` vertices (Catalan family).
///
/// `trees_by_size(n)[k]` lists every tree of size `k` in a
/// deterministic order.
pub fn trees_by_size(n: usize) -> Vec<Vec<OrderedTree>> {
    let mut by_size: Vec<Vec<OrderedTree>> = vec![Vec::new(); n + 1];
    if n == 0 {
        return by_size;
    }
    by_size[1].push(OrderedTree::leaf());
    for size in 2..=n {
        let mut out = Vec::new();
        // First subtree of size i; the remaining children are those of
        // a smaller tree of size `size - i` sharing the same root.
        for i in 1..size {
            let rest = size - i;
            for fi in 0..by_size[i].len() {
                for ri in 0..by_size[rest].len() {
                    let mut children =
                        Vec::with_capacity(1 + by_size[rest][ri].children().len());
                    children.push(by_size[i][fi].clone());
                    children.extend(by_size[rest][ri].children().iter().cloned());
                    out.push(OrderedTree::from_children(children));
                }
            }
        }
        by_size[size] = out;
    }
    by_size
}

/// Visits every ordered tree with exactly `n` vertices, one at a time.
///
/// Streams the trees through their contour excursions, so memory stays
/// flat regardless of the Catalan count.
pub fn for_each_tree_of_size<F: FnMut(&OrderedTree)>(n: usize, f: &mut F) {
    if n == 0 {
        return;
    }
    let steps = 2 * (n - 1);
    let mut values = Vec::with_capacity(steps + 1);
    values.push(0u32);
    fn rec<F: FnMut(&OrderedTree)>(values: &mut Vec<u32>, steps: usize, f: &mut F) {
        let i = values.len() - 1;
        if i == steps {
            let path = crate::ordered_tree::ContourPath::from_values(values.clone())
                .expect("constructed excursion");
            f(&path.to_tree());
            return;
        }
        let h = values[i];
        let remaining = (steps - i) as u32;
        // Enough steps must remain to come back down to zero.
        if h + 1 <= remaining - 1 {
            values.push(h + 1);
            rec(values, steps, f);
            values.pop();
        }
        if h > 0 {
            values.push(h - 1);
            rec(values, steps, f);
            values.pop();
        }
    }
    rec(&mut values, steps, f);
}

/// Visits every tree with childcounts in `counts` and height at most
/// `max_height`, without materializing the family.
///
/// The callback receives each tree by value; total work is proportional
/// to the sum of the emitted sizes, which grows doubly exponentially in
/// the height bound - callers choose bounds accordingly.
pub fn for_each_bounded_height_tree<F: FnMut(OrderedTree)>(
    counts: &[usize],
    max_height: usize,
    f: &mut F,
) {
    fn each_tree(counts: &[usize], h: usize, f: &mut dyn FnMut(OrderedTree)) {
        if counts.contains(&0) {
            f(OrderedTree::leaf());
        }
        if h == 0 {
            return;
        }
        for &k in counts.iter().filter(|&&k| k >= 1) {
            let mut acc: Vec<OrderedTree> = Vec::with_capacity(k);
            each_tuple(counts, h - 1, k, &mut acc, f);
        }
    }
    fn each_tuple(
        counts: &[usize],
        h: usize,
        remaining: usize,
        acc: &mut Vec<OrderedTree>,
        f: &mut dyn FnMut(OrderedTree),
    ) {
        if remaining == 0 {
            f(OrderedTree::from_children(acc.clone()));
            return;
        }
        // Enumerate the next child, recursing over the rest for each.
        let mut acc_taken = std::mem::take(acc);
        each_tree(counts, h, &mut |child| {
            acc_taken.push(child);
            each_tuple(counts, h, remaining - 1, &mut acc_taken, f);
            acc_taken.pop();
        });
        *acc = acc_taken;
    }
    each_tree(counts, max_height, f)
}

/// Tree plus the measurements used for pruning.
#[derive(Clone, Debug)]
pub struct MeasuredTree {
    pub tree: OrderedTree,
    pub height: usize,
    pub diameter: usize,
}

/// Streams every ordered tree with bounded diameter under childcount
/// menus, with the height caps pushed into the child generation so
/// pruned shapes are never materialized.
///
/// `f` receives each tree with its height and diameter. Non-root
/// vertices draw childcounts from `child_counts`, the root from
/// `root_counts`. Memory stays flat; the work is proportional to the
/// number of admissible prefixes.
pub fn for_each_diameter_bounded_code<F: FnMut(&OrderedTree, usize, usize)>(
    child_counts: &[usize],
    root_counts: &[usize],
    max_diameter: usize,
    f: &mut F,
) {
    struct Slot {
        tree: OrderedTree,
        height: usize,
        diameter: usize,
    }

    /// Vertex-rooted subtrees with height at most `h_cap` and diameter
    /// at most `d_cap`.
    fn each_sub(
        counts: &[usize],
        h_cap: usize,
        d_cap: usize,
        f: &mut dyn FnMut(OrderedTree, usize, usize),
    ) {
        if counts.contains(&0) {
            f(OrderedTree::leaf(), 0, 0);
        }
        if h_cap == 0 {
            return;
        }
        for &k in counts.iter().filter(|&&k| k >= 1) {
            let mut acc: Vec<Slot> = Vec::with_capacity(k);
            tuple(counts, k, h_cap, d_cap, &mut acc, f);
        }
    }

    /// Appends `remaining` children, then emits the assembled node.
    fn tuple(
        counts: &[usize],
        remaining: usize,
        h_cap: usize,
        d_cap: usize,
        acc: &mut Vec<Slot>,
        f: &mut dyn FnMut(OrderedTree, usize, usize),
    ) {
        if remaining == 0 {
            let mut top = [0usize; 2];
            let mut inner = 0usize;
            for s in acc.iter() {
                inner = inner.max(s.diameter);
                if s.height + 1 > top[0] {
                    top[1] = top[0];
                    top[0] = s.height + 1;
                } else if s.height + 1 > top[1] {
                    top[1] = s.height + 1;
                }
            }
            let diameter = inner.max(if acc.len() >= 2 { top[0] + top[1] } else { top[0] });
            if diameter > d_cap {
                return;
            }
            let node =
                OrderedTree::from_children(acc.iter().map(|s| s.tree.clone()).collect());
            f(node, top[0], diameter);
            return;
        }
        // The next child may not create a path through this vertex
        // longer than the diameter cap: with the tallest branch at t
        // edges, a child of height h adds a t + h + 1 path.
        let tallest = acc.iter().map(|s| s.height + 1).max();
        let allowed = match tallest {
            Some(t) => {
                if t + 1 > d_cap {
                    return;
                }
                d_cap - t - 1
            }
            None => d_cap.saturating_sub(1),
        };
        let child_cap = (h_cap - 1).min(allowed);
        let mut acc_taken = std::mem::take(acc);
        each_sub(counts, child_cap, d_cap, &mut |tree, height, diameter| {
            acc_taken.push(Slot {
                tree,
                height,
                diameter,
            });
            tuple(counts, remaining - 1, h_cap, d_cap, &mut acc_taken, f);
            acc_taken.pop();
        });
        *acc = acc_taken;
    }

    // Root assembly: height bounded by the diameter itself.
    if root_counts.contains(&0) {
        f(&OrderedTree::leaf(), 0, 0);
    }
    for &k in root_counts.iter().filter(|&&k| k >= 1) {
        let mut acc: Vec<Slot> = Vec::with_capacity(k);
        tuple(
            child_counts,
            k,
            max_diameter.max(1),
            max_diameter,
            &mut acc,
            &mut |tree, height, diameter| f(&tree, height, diameter),
        );
    }
}

/// Memoized generator of ordered trees classified by exact size and
/// height, under optional childcount and diameter constraints.
pub struct TreeGenerator {
    /// Allowed childcounts at non-root vertices; `None` means any.
    counts: Option<Vec<usize>>,
    max_diameter: usize,
    /// `memo[size][height]` lists every admissible tree of that class.
    memo: Vec<Vec<Option<Rc<Vec<MeasuredTree>>>>>,
}

impl TreeGenerator {
    pub fn new(counts: Option<Vec<usize>>, max_size: usize, max_diameter: usize) -> Self {
        let counts = counts.map(|mut cs| {
            cs.sort_unstable();
            cs.dedup();
            cs
        });
        TreeGenerator {
            counts,
            max_diameter,
            memo: vec![vec![None; max_size + 1]; max_size + 1],
        }
    }

    fn allowed(&self, k: usize) -> bool {
        match &self.counts {
            Some(cs) => cs.binary_search(&k).is_ok(),
            None => true,
        }
    }

    /// Trees with exactly `size` vertices and height exactly `height`,
    /// childcount constraints applied at every vertex.
    pub fn class(&mut self, size: usize, height: usize) -> Rc<Vec<MeasuredTree>> {
        if size == 0 || size > self.memo.len() - 1 || height >= size {
            return Rc::new(Vec::new());
        }
        if let Some(cached) = &self.memo[size][height] {
            return cached.clone();
        }
        let mut out = Vec::new();
        if size == 1 {
            if height == 0 && self.allowed(0) {
                out.push(MeasuredTree {
                    tree: OrderedTree::leaf(),
                    height: 0,
                    diameter: 0,
                });
            }
        } else if height >= 1 {
            let mut prefix = ChildList::new();
            self.extend(size - 1, height - 1, false, &mut prefix, &mut out);
        }
        let rc = Rc::new(out);
        self.memo[size][height] = Some(rc.clone());
        rc
    }

    /// Appends children summing to `budget` vertices, all of height at
    /// most `cap`, at least one attaining it once `met` turns true.
    fn extend(
        &mut self,
        budget: usize,
        cap: usize,
        met: bool,
        prefix: &mut ChildList,
        out: &mut Vec<MeasuredTree>,
    ) {
        if budget == 0 {
            if met && self.allowed(prefix.trees.len()) {
                let d = prefix.diameter();
                if d <= self.max_diameter {
                    out.push(MeasuredTree {
                        tree: OrderedTree::from_children(prefix.trees.clone()),
                        height: cap + 1,
                        diameter: d,
                    });
                }
            }
            return;
        }
        if let Some(cs) = &self.counts {
            // No allowed childcount can absorb the remaining budget.
            if cs.iter().all(|&k| k < prefix.trees.len() + 1) {
                return;
            }
        }
        for child_size in 1..=budget {
            for child_height in 0..=cap.min(child_size - 1) {
                let candidates = self.class(child_size, child_height);
                for cand in candidates.iter() {
                    if !prefix.fits(cand, self.max_diameter) {
                        continue;
                    }
                    prefix.push(cand);
                    self.extend(
                        budget - child_size,
                        cap,
                        met || child_height == cap,
                        prefix,
                        out,
                    );
                    prefix.pop(cand);
                }
            }
        }
    }

    /// Trees with height exactly `height` and size at most `size_cap`.
    pub fn with_exact_height(&mut self, height: usize, size_cap: usize) -> Vec<MeasuredTree> {
        let mut out = Vec::new();
        for size in 1..=size_cap {
            out.extend(self.class(size, height).iter().cloned());
        }
        out
    }
}

/// Running child list with the measurements needed for pruning.
struct ChildList {
    trees: Vec<OrderedTree>,
    heights: Vec<usize>,
    diameters: Vec<usize>,
}

impl ChildList {
    fn new() -> Self {
        ChildList {
            trees: Vec::new(),
            heights: Vec::new(),
            diameters: Vec::new(),
        }
    }

    fn push(&mut self, t: &MeasuredTree) {
        self.trees.push(t.tree.clone());
        self.heights.push(t.height);
        self.diameters.push(t.diameter);
    }

    fn pop(&mut self, _t: &MeasuredTree) {
        self.trees.pop();
        self.heights.pop();
        self.diameters.pop();
    }

    /// Diameter of the assembled node: within a child, or through the
    /// root along the two tallest branches.
    fn diameter(&self) -> usize {
        let within = self.diameters.iter().copied().max().unwrap_or(0);
        let mut top = [None::<usize>; 2];
        for &h in &self.heights {
            if top[0].map_or(true, |t| h > t) {
                top[1] = top[0];
                top[0] = Some(h);
            } else if top[1].map_or(true, |t| h > t) {
                top[1] = Some(h);
            }
        }
        let through = match (top[0], top[1]) {
            (Some(a), Some(b)) => a + b + 2,
            (Some(a), None) => a + 1,
            _ => 0,
        };
        within.max(through)
    }

    fn fits(&self, cand: &MeasuredTree, max_diameter: usize) -> bool {
        if cand.diameter > max_diameter {
            return false;
        }
        let tallest = self.heights.iter().copied().max().unwrap_or(0);
        if !self.heights.is_empty() && tallest + cand.height + 2 > max_diameter {
            return false;
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalan_counts() {
        let by_size = trees_by_size(8);
        let expected = [0usize, 1, 1, 2, 5, 14, 42, 132, 429];
        for (n, &want) in expected.iter().enumerate() {
            assert_eq!(by_size[n].len(), want, "size {n}");
        }
    }

    #[test]
    fn catalan_trees_are_distinct() {
        let by_size = trees_by_size(6);
        for trees in &by_size {
            let mut codes: Vec<String> = trees.iter().map(|t| t.to_code()).collect();
            codes.sort();
            codes.dedup();
            assert_eq!(codes.len(), trees.len());
        }
    }

    #[test]
    fn bounded_height_streaming_counts() {
        // Childcounts in {0, 2}: the height <= h family has sizes
        // 1, 2, 5, 26, 677.
        let expected = [1usize, 2, 5, 26, 677];
        for (h, &want) in expected.iter().enumerate() {
            let mut seen = 0usize;
            let mut all_valid = true;
            for_each_bounded_height_tree(&[0, 2], h, &mut |t| {
                seen += 1;
                all_valid &= t.height() <= h;
                all_valid &= t
                    .addresses()
                    .iter()
                    .all(|a| matches!(t.node_at(a).unwrap().children().len(), 0 | 2));
            });
            assert_eq!(seen, want, "height {h}");
            assert!(all_valid);
        }
    }

    #[test]
    fn streaming_generator_matches_memoized_one() {
        for n in 1..=7 {
            let mut streamed = Vec::new();
            for_each_tree_of_size(n, &mut |t| streamed.push(t.to_code()));
            let mut memoized: Vec<String> = trees_by_size(n)[n]
                .iter()
                .map(|t| t.to_code())
                .collect();
            streamed.sort();
            memoized.sort();
            assert_eq!(streamed, memoized, "size {n}");
        }
    }

    #[test]
    fn class_matches_brute_force() {
        // Unconstrained classes must partition the Catalan family by height.
        let mut gen = TreeGenerator::new(None, 7, usize::MAX);
        let by_size = trees_by_size(7);
        for size in 1..=7 {
            let total: usize = (0..size).map(|h| gen.class(size, h).len()).sum();
            assert_eq!(total, by_size[size].len(), "size {size}");
            for h in 0..size {
                for m in gen.class(size, h).iter() {
                    assert_eq!(m.tree.size(), size);
                    assert_eq!(m.tree.height(), h);
                    assert_eq!(m.height, h);
                }
            }
        }
    }

    #[test]
    fn binary_count_classes() {
        // Childcounts in {0, 2}: trees of height <= h follow
        // T_0 = 1, T_{h+1} = 1 + T_h^2.
        let mut gen = TreeGenerator::new(Some(vec![0, 2]), 31, usize::MAX);
        let mut cumulative = 0usize;
        let expected_cumulative = [1usize, 2, 5, 26, 677];
        for h in 0..=4 {
            let exact: usize = (1..=31).map(|s| gen.class(s, h).len()).sum();
            cumulative += exact;
            assert_eq!(cumulative, expected_cumulative[h], "height {h}");
        }
    }

    #[test]
    fn streaming_diameter_codes_match_brute_force() {
        // Independent reference: the full Catalan family filtered by
        // childcount menu and graph diameter.
        let by_size = trees_by_size(9);
        let graph_diameter = |t: &OrderedTree| -> usize {
            let c = t.contour();
            let z = c.lifetime();
            let mut best = 0;
            for p in 0..=z {
                for q in p..=z {
                    best = best.max(c.distance(p, q).unwrap() as usize);
                }
            }
            best
        };
        let child_ok = |t: &OrderedTree| {
            t.addresses()
                .iter()
                .skip(1)
                .all(|a| matches!(t.node_at(a).unwrap().children().len(), 0 | 2))
        };
        for max_d in 2..=5usize {
            let mut streamed: Vec<String> = Vec::new();
            for_each_diameter_bounded_code(&[0, 2], &[1, 3], max_d, &mut |t, h, d| {
                assert_eq!(t.height(), h);
                assert_eq!(graph_diameter(t), d);
                if t.size() <= 9 {
                    streamed.push(t.to_code());
                }
            });
            let mut reference: Vec<String> = by_size
                .iter()
                .flatten()
                .filter(|t| matches!(t.root_child_count(), 1 | 3))
                .filter(|t| child_ok(t))
                .filter(|t| graph_diameter(t) <= max_d)
                .map(|t| t.to_code())
                .collect();
            streamed.sort();
            reference.sort();
            assert_eq!(streamed, reference, "max diameter {max_d}");
        }
    }

    #[test]
    fn measured_diameter_is_graph_diameter() {
        let menu: Vec<usize> = (0..6).collect();
        for_each_diameter_bounded_code(&menu, &menu, 4, &mut |t, _, d| {
            if t.size() > 7 {
                return;
            }
            let c = t.contour();
            let z = c.lifetime();
            let mut best = 0;
            for p in 0..=z {
                for q in p..=z {
                    best = best.max(c.distance(p, q).unwrap());
                }
            }
            assert_eq!(d, best as usize, "tree {}", t);
        });
    }
}
