//! Plane rooted trees with leaf delays and their plucking polynomial.
//!
//! A tree is stored as its preorder list of `(depth, delay)` pairs with the
//! root first. Children appear in plane left-to-right order, so the vertices
//! to the right of the path from the root to a leaf are exactly the vertices
//! that follow the leaf in preorder. Delay is kept only on non-root leaves;
//! every other vertex stores 0.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::laurent::Laurent;
use crate::states::{Connection, Side, StateError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TreeError {
    #[error("tree parse error: {0}")]
    Parse(String),
    #[error("vertex {0} is not a leaf")]
    NotALeaf(usize),
    #[error("leaf {0} has delay {1}, only delay-1 leaves can be plucked")]
    NotPluckable(usize, u32),
    #[error("delay must be positive")]
    ZeroDelay,
    #[error("invalid split")]
    InvalidSplit,
    #[error(transparent)]
    State(#[from] StateError),
}

/// Left-to-right order of sibling arcs in the tree of a state.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlaneOrder {
    /// Siblings follow a clockwise walk of the boundary starting at the
    /// bottom-left corner (up the left side, along the top, down the right).
    Clockwise,
    /// The mirror image.
    Counterclockwise,
}

/// Frozen by the oracle calibration test over all no-bottom-return states
/// with `m, n <= 3`; only this choice reproduces the bracket coefficients.
pub const PLANE_ORDER: PlaneOrder = PlaneOrder::Clockwise;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PlaneTree {
    nodes: Vec<(u32, u32)>,
}

/// Contiguous run `first..=last` of the children of `vertex`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Split {
    pub vertex: usize,
    pub first: usize,
    pub last: usize,
}

impl PlaneTree {
    /// The tree with no edges.
    pub fn empty() -> Self {
        Self { nodes: vec![(0, 0)] }
    }

    /// Builds from a preorder `(depth, delay)` list; the delay of internal
    /// vertices is ignored and leaf delays must be positive.
    pub fn from_preorder(nodes: &[(u32, u32)]) -> Result<Self, TreeError> {
        if nodes.first().map(|n| n.0) != Some(0) {
            return Err(TreeError::Parse("preorder must start with the root at depth 0".into()));
        }
        for w in nodes.windows(2) {
            if w[1].0 == 0 || w[1].0 > w[0].0 + 1 {
                return Err(TreeError::Parse("invalid depth sequence".into()));
            }
        }
        let mut t = Self { nodes: nodes.to_vec() };
        t.nodes[0].1 = 0;
        for i in 1..t.nodes.len() {
            if t.is_leaf(i) {
                if t.nodes[i].1 == 0 {
                    return Err(TreeError::ZeroDelay);
                }
            } else {
                t.nodes[i].1 = 0;
            }
        }
        Ok(t)
    }

    /// A star whose leaves carry the given delays, left to right.
    pub fn star(delays: &[u32]) -> Self {
        let mut nodes = vec![(0, 0)];
        nodes.extend(delays.iter().map(|&d| (1, d)));
        Self { nodes }
    }

    pub fn preorder(&self) -> &[(u32, u32)] {
        &self.nodes
    }

    pub fn num_vertices(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_edges(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.len() == 1
    }

    pub fn depth(&self, v: usize) -> u32 {
        self.nodes[v].0
    }

    pub fn is_leaf(&self, v: usize) -> bool {
        v > 0 && v < self.nodes.len() && self.subtree_end(v) == v + 1
    }

    /// Delay of a leaf.
    pub fn delay(&self, v: usize) -> Option<u32> {
        self.is_leaf(v).then(|| self.nodes[v].1)
    }

    /// One past the last preorder index of the subtree at `v`.
    pub fn subtree_end(&self, v: usize) -> usize {
        let d = self.nodes[v].0;
        let mut e = v + 1;
        while e < self.nodes.len() && self.nodes[e].0 > d {
            e += 1;
        }
        e
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        if v == 0 {
            return None;
        }
        let d = self.nodes[v].0;
        (0..v).rev().find(|&u| self.nodes[u].0 + 1 == d)
    }

    pub fn children(&self, v: usize) -> Vec<usize> {
        let end = self.subtree_end(v);
        let mut out = Vec::new();
        let mut c = v + 1;
        while c < end {
            out.push(c);
            c = self.subtree_end(c);
        }
        out
    }

    /// Non-root leaves in plane order.
    pub fn leaves(&self) -> Vec<usize> {
        (1..self.nodes.len()).filter(|&v| self.is_leaf(v)).collect()
    }

    /// Leaves of delay 1 in plane order.
    pub fn pluckable_leaves(&self) -> Vec<usize> {
        self.leaves().into_iter().filter(|&v| self.nodes[v].1 == 1).collect()
    }

    /// Number of vertices to the right of the path from the root to `v`.
    pub fn right_count(&self, v: usize) -> Result<usize, TreeError> {
        if !self.is_leaf(v) {
            return Err(TreeError::NotALeaf(v));
        }
        Ok(self.nodes.len() - 1 - v)
    }

    pub fn pluck(&self, v: usize) -> Result<Self, TreeError> {
        if !self.is_leaf(v) {
            return Err(TreeError::NotALeaf(v));
        }
        if self.nodes[v].1 != 1 {
            return Err(TreeError::NotPluckable(v, self.nodes[v].1));
        }
        Ok(self.pluck_unchecked(v))
    }

    fn pluck_unchecked(&self, v: usize) -> Self {
        let len = self.nodes.len();
        let mut nodes = Vec::with_capacity(len - 1);
        for u in 0..len {
            if u == v {
                continue;
            }
            let (d, a) = self.nodes[u];
            let leaf = u > 0 && (u + 1 == len || self.nodes[u + 1].0 <= d);
            let became_leaf =
                u > 0 && u + 1 == v && self.nodes[v].0 == d + 1 && (v + 1 == len || self.nodes[v + 1].0 <= d);
            let a = if became_leaf {
                1
            } else if leaf {
                a.saturating_sub(1).max(1)
            } else {
                0
            };
            nodes.push((d, a));
        }
        Self { nodes }
    }

    /// Left-right mirror image.
    pub fn mirror(&self) -> Self {
        fn build(t: &PlaneTree, v: usize, out: &mut Vec<(u32, u32)>) {
            out.push(t.nodes[v]);
            for c in t.children(v).into_iter().rev() {
                build(t, c, out);
            }
        }
        let mut nodes = Vec::with_capacity(self.nodes.len());
        build(self, 0, &mut nodes);
        Self { nodes }
    }

    /// Identifies the roots; the children of `self` come first.
    pub fn ordered_rooted_sum(&self, other: &Self) -> Self {
        let mut nodes = self.nodes.clone();
        nodes.extend_from_slice(&other.nodes[1..]);
        Self { nodes }
    }

    /// Path with `k` edges, delay 1 on its leaf.
    pub fn path(k: usize) -> Self {
        let nodes = (0..=k as u32).map(|d| (d, u32::from(d as usize == k && k > 0))).collect();
        Self { nodes }
    }

    /// Extracts the subtree made of `vertex` and the children `first..=last`
    /// with their descendants, re-rooted at `vertex`.
    pub fn split_subtree(&self, s: Split) -> Result<Self, TreeError> {
        let (lo, hi) = self.split_range(s)?;
        let base = self.nodes[s.vertex].0;
        let mut nodes = vec![(0, 0)];
        nodes.extend(self.nodes[lo..hi].iter().map(|&(d, a)| (d - base, a)));
        Ok(Self { nodes })
    }

    /// Replaces the split part by a path with as many edges.
    pub fn complementary_tree(&self, s: Split) -> Result<Self, TreeError> {
        let (lo, hi) = self.split_range(s)?;
        let k = hi - lo;
        let base = self.nodes[s.vertex].0;
        let mut nodes = self.nodes[..lo].to_vec();
        nodes.extend((1..=k as u32).map(|d| (base + d, u32::from(d as usize == k))));
        nodes.extend_from_slice(&self.nodes[hi..]);
        Ok(Self { nodes })
    }

    fn split_range(&self, s: Split) -> Result<(usize, usize), TreeError> {
        if s.vertex >= self.nodes.len() {
            return Err(TreeError::InvalidSplit);
        }
        let ch = self.children(s.vertex);
        if s.first > s.last || s.last >= ch.len() {
            return Err(TreeError::InvalidSplit);
        }
        Ok((ch[s.first], self.subtree_end(ch[s.last])))
    }

    /// Checks both conditions of a splitting subtree and nontriviality: the
    /// part has at least two leaves and is not the whole tree.
    pub fn is_splitting(&self, s: Split) -> bool {
        let Ok((lo, hi)) = self.split_range(s) else { return false };
        if s.vertex == 0 && lo == 1 && hi == self.nodes.len() {
            return false;
        }
        let mut inside = 0;
        let mut max_in = 0;
        let mut min_out = u32::MAX;
        for v in self.leaves() {
            let a = self.nodes[v].1;
            if (lo..hi).contains(&v) {
                inside += 1;
                max_in = max_in.max(a);
            } else {
                min_out = min_out.min(a);
            }
        }
        inside >= 2 && max_in <= min_out
    }

    /// First nontrivial splitting subtree, searching vertices by depth then
    /// plane order, and child runs widest first then leftmost.
    pub fn find_splitting_subtree(&self) -> Option<Split> {
        let mut order: Vec<usize> = (0..self.nodes.len()).filter(|&v| !self.is_leaf(v)).collect();
        order.sort_by_key(|&v| (self.nodes[v].0, v));
        for v in order {
            let d = self.children(v).len();
            for width in (1..=d).rev() {
                for first in 0..=d - width {
                    let s = Split { vertex: v, first, last: first + width - 1 };
                    if self.is_splitting(s) {
                        return Some(s);
                    }
                }
            }
        }
        None
    }

    /// The plucking polynomial in `q`.
    pub fn plucking(&self) -> Laurent {
        let mut memo = HashMap::new();
        plucking_memo(self, &mut memo)
    }

    /// The plucking polynomial computed through repeated splitting.
    pub fn plucking_factored(&self) -> Laurent {
        self.plucking_factored_steps().0
    }

    /// The factored value and the factor contributed at each split, the last
    /// entry being the direct value of the final unsplittable tree.
    pub fn plucking_factored_steps(&self) -> (Laurent, Vec<Laurent>) {
        let mut memo = HashMap::new();
        let mut factors = Vec::new();
        let mut t = self.clone();
        while let Some(s) = t.find_splitting_subtree() {
            let part = t.split_subtree(s).expect("found split is valid");
            factors.push(plucking_memo(&part, &mut memo));
            t = t.complementary_tree(s).expect("found split is valid");
        }
        factors.push(plucking_memo(&t, &mut memo));
        (factors.iter().product(), factors)
    }
}

fn plucking_memo(t: &PlaneTree, memo: &mut HashMap<Vec<(u32, u32)>, Laurent>) -> Laurent {
    if t.is_empty() {
        return Laurent::one();
    }
    if let Some(q) = memo.get(&t.nodes) {
        return q.clone();
    }
    let mut total = Laurent::zero();
    for v in t.pluckable_leaves() {
        let rest = plucking_memo(&t.pluck_unchecked(v), memo);
        if !rest.is_zero() {
            total += &rest.monomial_shift((t.nodes.len() - 1 - v) as i64);
        }
    }
    memo.insert(t.nodes.clone(), total.clone());
    total
}

impl fmt::Display for PlaneTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        let mut open: Vec<u32> = Vec::new();
        for (i, &(d, a)) in self.nodes.iter().enumerate() {
            while open.last().is_some_and(|&top| top >= d) {
                open.pop();
                out.push(')');
            }
            out.push('(');
            if self.is_leaf(i) {
                out.push(')');
                if a != 1 {
                    out.push_str(&format!(":{a}"));
                }
            } else {
                open.push(d);
            }
        }
        for _ in open {
            out.push(')');
        }
        f.write_str(&out)
    }
}

impl FromStr for PlaneTree {
    type Err = TreeError;

    /// Grammar `tree = '(' tree* ')' (':' delay)?`, delays only on leaves.
    fn from_str(s: &str) -> Result<Self, TreeError> {
        let bytes: Vec<char> = s.chars().filter(|c| !c.is_whitespace()).collect();
        let mut nodes: Vec<(u32, u32)> = Vec::new();
        let mut stack: Vec<usize> = Vec::new();
        let mut i = 0;
        let err = |msg: &str| TreeError::Parse(msg.to_string());
        while i < bytes.len() {
            match bytes[i] {
                '(' => {
                    if stack.is_empty() && !nodes.is_empty() {
                        return Err(err("trailing input after the root"));
                    }
                    stack.push(nodes.len());
                    nodes.push((stack.len() as u32 - 1, 0));
                    i += 1;
                }
                ')' => {
                    let v = stack.pop().ok_or_else(|| err("unbalanced ')'"))?;
                    i += 1;
                    let leaf = v > 0 && v + 1 == nodes.len();
                    if i < bytes.len() && bytes[i] == ':' {
                        if !leaf {
                            return Err(err("delay is allowed only on leaves"));
                        }
                        let start = i + 1;
                        let mut j = start;
                        while j < bytes.len() && bytes[j].is_ascii_digit() {
                            j += 1;
                        }
                        let digits: String = bytes[start..j].iter().collect();
                        let a: u32 = digits.parse().map_err(|_| err("bad delay"))?;
                        if a == 0 {
                            return Err(TreeError::ZeroDelay);
                        }
                        nodes[v].1 = a;
                        i = j;
                    } else if leaf {
                        nodes[v].1 = 1;
                    }
                }
                c => return Err(err(&format!("unexpected character '{c}'"))),
            }
        }
        if !stack.is_empty() || nodes.is_empty() {
            return Err(err("unbalanced '('"));
        }
        Ok(Self { nodes })
    }
}

/// Plane rooted sum `P_n ∨ P_m`.
pub fn two_paths(n: usize, m: usize) -> PlaneTree {
    PlaneTree::path(n).ordered_rooted_sum(&PlaneTree::path(m))
}

/// Star with leaf delays `2k, ..., 4, 2, 1, 1, 2, 4, ..., 2k`.
pub fn doubling_star(k: usize) -> PlaneTree {
    let side: Vec<u32> = (1..=k as u32).map(|i| 2 * i).collect();
    let mut delays: Vec<u32> = side.iter().rev().copied().collect();
    delays.extend([1, 1]);
    delays.extend(side);
    PlaneTree::star(&delays)
}

/// Linear boundary position obtained by walking clockwise from the
/// bottom-left corner; bottom points come last.
fn linear_position(c: &Connection, pos: usize) -> usize {
    let len = c.len();
    let start = c.n_top() + c.m() + c.n_bottom();
    (pos + len - start) % len
}

/// Dual tree of the arcs with no bottom end, nested by the boundary walk.
pub fn tree_from_state(c: &Connection) -> Result<PlaneTree, TreeError> {
    tree_from_state_with(c, PLANE_ORDER)
}

pub fn tree_from_state_with(c: &Connection, order: PlaneOrder) -> Result<PlaneTree, TreeError> {
    if !c.is_catalan() {
        return Err(StateError::NotCatalan(c.n_top(), c.n_bottom()).into());
    }
    if c.has_bottom_returns() {
        return Err(StateError::HasBottomReturns.into());
    }
    let upper = c.len() - c.n_bottom();
    // intervals [a, b] of the upper arcs in linear positions
    let mut arcs: Vec<(usize, usize, u32)> = Vec::new();
    for (p, q) in c.arc_positions() {
        let (a, b) = (linear_position(c, p), linear_position(c, q));
        let (a, b) = (a.min(b), a.max(b));
        if b < upper {
            arcs.push((a, b, leaf_delay(c, p, q)));
        }
    }
    if order == PlaneOrder::Counterclockwise {
        for arc in arcs.iter_mut() {
            *arc = (upper - 1 - arc.1, upper - 1 - arc.0, arc.2);
        }
    }
    arcs.sort();
    let mut nodes = vec![(0u32, 0u32)];
    let mut open: Vec<usize> = Vec::new();
    for (a, b, delay) in &arcs {
        while open.last().is_some_and(|&top| arcs[top].1 < *a) {
            open.pop();
        }
        nodes.push((open.len() as u32 + 1, *delay));
        open.push(nodes.len() - 2);
        let _ = b;
    }
    Ok(PlaneTree::from_preorder(&nodes).expect("nesting yields a valid preorder"))
}

/// A left or right return gets the index of its lower end, other arcs 1.
fn leaf_delay(c: &Connection, p: usize, q: usize) -> u32 {
    let (pp, qp) = (c.point(p), c.point(q));
    if pp.side == qp.side && matches!(pp.side, Side::Left | Side::Right) {
        pp.index.max(qp.index) as u32
    } else {
        1
    }
}
