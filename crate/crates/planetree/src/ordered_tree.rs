//! Ordered rooted trees, their addresses and contour paths.
//!
//! An [`OrderedTree`] is a finite rooted tree with an ordered child
//! sequence at every vertex. Vertices are addressed by 1-based child
//! indices ([`Address`]). The depth-first exploration of a tree yields
//! its [`ContourPath`], a nonnegative lattice excursion with unit steps
//! that characterizes the tree: `ContourPath::to_tree` inverts
//! [`OrderedTree::contour`].
//!
//! Serialization is the balanced-parenthesis code: a vertex is `(...)`
//! enclosing the codes of its children in order, so a leaf is `()` and
//! `(()())` is a root with two leaf children.

use crate::error::{Error, Result};
use std::fmt;
use std::str::FromStr;

/// Finite rooted tree with ordered children.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OrderedTree {
    children: Vec<OrderedTree>,
}

/// 1-based child-index path from the root.
///
/// The empty address is the root. An address is valid for a tree when
/// every prefix indexes an existing child.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Address(pub Vec<usize>);

impl Address {
    pub fn root() -> Self {
        Address(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Prefix of the first `n` steps.
    pub fn prefix(&self, n: usize) -> Address {
        Address(self.0[..n].to_vec())
    }
}

impl fmt::Display for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, ")")
    }
}

impl OrderedTree {
    pub fn leaf() -> Self {
        OrderedTree { children: Vec::new() }
    }

    pub fn from_children(children: Vec<OrderedTree>) -> Self {
        OrderedTree { children }
    }

    pub fn children(&self) -> &[OrderedTree] {
        &self.children
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    /// Number of children of the root.
    pub fn root_child_count(&self) -> usize {
        self.children.len()
    }

    /// Number of vertices.
    pub fn size(&self) -> usize {
        // Iterative to stay safe on very deep trees.
        let mut count = 0usize;
        let mut stack = vec![self];
        while let Some(node) = stack.pop() {
            count += 1;
            stack.extend(node.children.iter());
        }
        count
    }

    /// Maximal address length; 0 for a leaf.
    pub fn height(&self) -> usize {
        let mut best = 0usize;
        let mut stack = vec![(self, 0usize)];
        while let Some((node, depth)) = stack.pop() {
            best = best.max(depth);
            stack.extend(node.children.iter().map(|c| (c, depth + 1)));
        }
        best
    }

    /// Number of root children whose subtree reaches depth `height() - 1`.
    ///
    /// Zero exactly for the single-vertex tree; otherwise between 1 and
    /// the root child count.
    pub fn nu(&self) -> usize {
        if self.is_leaf() {
            return 0;
        }
        let target = self.height() - 1;
        self.children.iter().filter(|c| c.height() == target).count()
    }

    pub fn node_at(&self, address: &Address) -> Result<&OrderedTree> {
        let mut node = self;
        for &step in &address.0 {
            node = node
                .children
                .get(step.checked_sub(1).ok_or_else(|| Error::InvalidAddress {
                    address: address.to_string(),
                })?)
                .ok_or_else(|| Error::InvalidAddress {
                    address: address.to_string(),
                })?;
        }
        Ok(node)
    }

    /// Subtree stemming from `address`, as an owned tree.
    pub fn subtree(&self, address: &Address) -> Result<OrderedTree> {
        Ok(self.node_at(address)?.clone())
    }

    /// Consuming variant of [`subtree`](Self::subtree); avoids the clone.
    pub fn into_subtree(mut self, address: &Address) -> Result<OrderedTree> {
        for &step in &address.0 {
            let idx = step.checked_sub(1).filter(|&i| i < self.children.len());
            match idx {
                Some(i) => self = self.children.swap_remove(i),
                None => {
                    return Err(Error::InvalidAddress {
                        address: address.to_string(),
                    })
                }
            }
        }
        Ok(self)
    }

    /// Address of the lexicographically first deepest vertex.
    ///
    /// Depth-first order agrees with the lexicographic order on
    /// addresses, so the first vertex at maximal depth found by a
    /// left-to-right exploration is the answer.
    pub fn first_tip(&self) -> Address {
        let target = self.height();
        let mut path = Vec::new();
        let mut found = Vec::new();
        Self::first_at_depth(self, target, &mut path, &mut found);
        Address(found)
    }

    fn first_at_depth(
        node: &OrderedTree,
        target: usize,
        path: &mut Vec<usize>,
        found: &mut Vec<usize>,
    ) -> bool {
        if path.len() == target {
            *found = path.clone();
            return true;
        }
        for (i, child) in node.children.iter().enumerate() {
            // Skip children too shallow to reach the target depth.
            if path.len() + 1 + child.height() < target {
                continue;
            }
            path.push(i + 1);
            if Self::first_at_depth(child, target, path, found) {
                path.pop();
                return true;
            }
            path.pop();
        }
        false
    }

    /// Extraction of the height-`p` subtree along the first tip.
    ///
    /// Walks `height() - p` steps down the ancestral line of the first
    /// tip and returns the stemming subtree together with its address
    /// and the size of the complementary part (stem vertex included).
    /// The returned subtree has height exactly `p`.
    pub fn theta_extract(&self, p: usize) -> Result<(OrderedTree, Address, usize)> {
        let n = self.height();
        if p > n {
            return Err(Error::DepthOutOfRange { given: p, height: n });
        }
        let tip = self.first_tip();
        let stem = tip.prefix(n - p);
        let theta = self.subtree(&stem)?;
        debug_assert_eq!(theta.height(), p);
        let lambda_size = self.size() - theta.size() + 1;
        Ok((theta, stem, lambda_size))
    }

    /// Contour path of the depth-first left-to-right exploration.
    pub fn contour(&self) -> ContourPath {
        let mut values = Vec::with_capacity(2 * self.size() - 1);
        values.push(0u32);
        // Explicit stack of (node, next child index, depth).
        let mut stack: Vec<(&OrderedTree, usize, u32)> = vec![(self, 0, 0)];
        while let Some(top) = stack.last_mut() {
            let (node, next, depth) = (top.0, top.1, top.2);
            if next < node.children.len() {
                top.1 += 1;
                values.push(depth + 1);
                stack.push((&node.children[next], 0, depth + 1));
            } else {
                stack.pop();
                if let Some(&(_, _, d)) = stack.last() {
                    values.push(d);
                }
            }
        }
        ContourPath { values }
    }

    /// Parses a balanced-parenthesis code with a single outer pair.
    pub fn parse(code: &str) -> Result<OrderedTree> {
        let bytes = code.as_bytes();
        let err = |offset, message: &str| Error::Parse {
            offset,
            message: message.to_string(),
        };
        if bytes.is_empty() {
            return Err(err(0, "empty input"));
        }
        let mut stack: Vec<Vec<OrderedTree>> = Vec::new();
        let mut done: Option<OrderedTree> = None;
        for (i, &b) in bytes.iter().enumerate() {
            if done.is_some() {
                return Err(err(i, "trailing input after the outer pair"));
            }
            match b {
                b'(' => stack.push(Vec::new()),
                b')' => {
                    let children = stack.pop().ok_or_else(|| err(i, "unmatched ')'"))?;
                    let node = OrderedTree { children };
                    match stack.last_mut() {
                        Some(parent) => parent.push(node),
                        None => done = Some(node),
                    }
                }
                _ => return Err(err(i, "expected '(' or ')'")),
            }
        }
        done.ok_or_else(|| err(bytes.len(), "unclosed '('"))
    }

    /// Balanced-parenthesis code of the tree.
    pub fn to_code(&self) -> String {
        let mut out = String::with_capacity(2 * self.size());
        self.write_code(&mut out);
        out
    }

    fn write_code(&self, out: &mut String) {
        // Explicit stack: Open(node) / Close markers.
        enum Step<'a> {
            Open(&'a OrderedTree),
            Close,
        }
        let mut stack = vec![Step::Open(self)];
        while let Some(step) = stack.pop() {
            match step {
                Step::Open(node) => {
                    out.push('(');
                    stack.push(Step::Close);
                    for child in node.children.iter().rev() {
                        stack.push(Step::Open(child));
                    }
                }
                Step::Close => out.push(')'),
            }
        }
    }

    /// Addresses of all vertices in depth-first order.
    pub fn addresses(&self) -> Vec<Address> {
        let mut out = Vec::with_capacity(self.size());
        let mut path = Vec::new();
        self.collect_addresses(&mut path, &mut out);
        out
    }

    fn collect_addresses(&self, path: &mut Vec<usize>, out: &mut Vec<Address>) {
        out.push(Address(path.clone()));
        for (i, child) in self.children.iter().enumerate() {
            path.push(i + 1);
            child.collect_addresses(path, out);
            path.pop();
        }
    }
}

impl fmt::Display for OrderedTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_code())
    }
}

impl fmt::Debug for OrderedTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "OrderedTree({})", self.to_code())
    }
}

impl FromStr for OrderedTree {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        OrderedTree::parse(s)
    }
}

/// Integer-time contour excursion of an ordered tree.
///
/// Stores the values `C_0, ..., C_ζ` with `ζ = 2(size - 1)`; unit steps,
/// nonnegative, starting and ending at 0.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ContourPath {
    values: Vec<u32>,
}

impl ContourPath {
    pub fn from_values(values: Vec<u32>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidContour("empty path".into()));
        }
        if values.len() % 2 != 1 {
            return Err(Error::InvalidContour(format!(
                "length {} is even; a tree contour has 2*size - 1 entries",
                values.len()
            )));
        }
        if values[0] != 0 || *values.last().unwrap() != 0 {
            return Err(Error::InvalidContour("path must start and end at 0".into()));
        }
        for w in values.windows(2) {
            if w[0].abs_diff(w[1]) != 1 {
                return Err(Error::InvalidContour(format!(
                    "non-unit step {} -> {}",
                    w[0], w[1]
                )));
            }
        }
        Ok(ContourPath { values })
    }

    pub fn values(&self) -> &[u32] {
        &self.values
    }

    /// Exploration lifetime `ζ = 2(size - 1)`.
    pub fn lifetime(&self) -> usize {
        self.values.len() - 1
    }

    /// Maximum value, i.e. the height of the encoded tree.
    pub fn max_value(&self) -> u32 {
        *self.values.iter().max().unwrap()
    }

    /// First time the maximum is attained.
    pub fn first_argmax(&self) -> usize {
        let m = self.max_value();
        self.values.iter().position(|&v| v == m).unwrap()
    }

    /// Inverse of [`OrderedTree::contour`].
    pub fn to_tree(&self) -> OrderedTree {
        // Up-step opens a child, down-step closes the current one.
        let mut stack: Vec<Vec<OrderedTree>> = vec![Vec::new()];
        for w in self.values.windows(2) {
            if w[1] > w[0] {
                stack.push(Vec::new());
            } else {
                let children = stack.pop().expect("validated path");
                let node = OrderedTree { children };
                stack.last_mut().expect("validated path").push(node);
            }
        }
        let root_children = stack.pop().expect("validated path");
        debug_assert!(stack.is_empty());
        OrderedTree {
            children: root_children,
        }
    }

    /// Graph distance between the vertices visited at times `p` and `q`.
    pub fn distance(&self, p: usize, q: usize) -> Result<u32> {
        let (p, q) = (p.min(q), p.max(q));
        if q > self.lifetime() {
            return Err(Error::TimeOutOfRange {
                given: q,
                lifetime: self.lifetime(),
            });
        }
        let min = self.values[p..=q].iter().min().unwrap();
        Ok(self.values[p] + self.values[q] - 2 * min)
    }

    /// Contour of the height-`r` subtree extracted along the first maximum.
    ///
    /// `r = max_value()` returns the path unchanged. For smaller `r` the
    /// path is cut at the last upcrossing of level `max - r` before the
    /// first argmax and the first downcrossing after it, then shifted
    /// down by `max - r`. This commutes with
    /// [`OrderedTree::theta_extract`] through the contour coding.
    pub fn theta(&self, r: u32) -> Result<ContourPath> {
        let gamma = self.max_value();
        if r == 0 || r > gamma {
            return Err(Error::DepthOutOfRange {
                given: r as usize,
                height: gamma as usize,
            });
        }
        if r == gamma {
            return Ok(self.clone());
        }
        let s = self.first_argmax();
        let level = gamma - r;
        // Last upcrossing of the level before the first argmax, first
        // downcrossing after it. Both exist since the path starts and
        // ends at 0 < level.
        let lo = (0..=s).rev().find(|&i| self.values[i] < level).unwrap() + 1;
        let hi = (s..self.values.len())
            .find(|&i| self.values[i] < level)
            .unwrap()
            - 1;
        let values: Vec<u32> = self.values[lo..=hi].iter().map(|&v| v - level).collect();
        ContourPath::from_values(values)
    }

    /// Contour re-rooted at time `t0`.
    ///
    /// The value at time `s` is the graph distance between the vertices
    /// visited at times `t0 mod ζ` and `(t0 + s) mod ζ`. The result has
    /// the same lifetime and encodes the same unrooted tree metric.
    pub fn reroot(&self, t0: usize) -> Result<ContourPath> {
        let zeta = self.lifetime();
        if t0 > zeta {
            return Err(Error::TimeOutOfRange {
                given: t0,
                lifetime: zeta,
            });
        }
        if zeta == 0 {
            return Ok(self.clone());
        }
        let base = t0 % zeta;
        let rmq = RangeMin::new(&self.values);
        let mut values = Vec::with_capacity(zeta + 1);
        for s in 0..=zeta {
            let other = (base + s) % zeta;
            let (a, b) = (base.min(other), base.max(other));
            let min = rmq.min(a, b);
            values.push(self.values[a] + self.values[b] - 2 * min);
        }
        ContourPath::from_values(values)
    }
}

impl fmt::Display for ContourPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.values.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for ContourPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ContourPath[{self}]")
    }
}

impl FromStr for ContourPath {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let values = s
            .split(',')
            .map(|tok| {
                tok.trim()
                    .parse::<u32>()
                    .map_err(|e| Error::InvalidContour(format!("bad entry {tok:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        ContourPath::from_values(values)
    }
}

/// Sparse-table range minimum over a fixed slice.
struct RangeMin {
    table: Vec<Vec<u32>>,
}

impl RangeMin {
    fn new(values: &[u32]) -> Self {
        let n = values.len();
        let levels = (usize::BITS - n.leading_zeros()) as usize;
        let mut table = Vec::with_capacity(levels);
        table.push(values.to_vec());
        let mut len = 1;
        while 2 * len <= n {
            let prev = table.last().unwrap();
            let row: Vec<u32> = (0..=n - 2 * len)
                .map(|i| prev[i].min(prev[i + len]))
                .collect();
            table.push(row);
            len *= 2;
        }
        RangeMin { table }
    }

    /// Minimum over the inclusive range `[a, b]`.
    fn min(&self, a: usize, b: usize) -> u32 {
        if a == b {
            return self.table[0][a];
        }
        let k = (usize::BITS - 1 - (b - a + 1).leading_zeros()) as usize;
        self.table[k][a].min(self.table[k][b + 1 - (1 << k)])
    }
}
