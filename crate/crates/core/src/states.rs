//! Crossingless connections in a rectangle with `n_t` top points, `n_b`
//! bottom points and `m` points on each side.
//!
//! Points are stored by their position in the clockwise cyclic order
//! `x_1..x_{n_t}, y'_1..y'_m, x'_{n_b}..x'_1, y_m..y_1`, and a connection is
//! the involution `partner` on those positions.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StateError {
    #[error("crossing pair: {0} and {1}")]
    CrossingPair(String, String),
    #[error("unmatched point: {0}")]
    UnmatchedPoint(String),
    #[error("duplicate point: {0}")]
    DuplicatePoint(String),
    #[error("point out of range: {0}")]
    PointOutOfRange(String),
    #[error("not a Catalan state (n_t = {0}, n_b = {1})")]
    NotCatalan(usize, usize),
    #[error("line index {0} out of range")]
    LineOutOfRange(usize),
    #[error("shift {0} out of range")]
    ShiftOutOfRange(i64),
    #[error("arc {0} is not proper")]
    NotProper(String),
    #[error("arc {0} is not an arc of the state")]
    NotAnArc(String),
    #[error("bottom point {0} has no coordinate")]
    BottomPoint(String),
    #[error("line {0} is not saturated")]
    NotSaturating(usize),
    #[error("state has bottom returns")]
    HasBottomReturns,
    #[error("state is not realizable")]
    NotRealizable,
    #[error("state has no rows")]
    NoRows,
    #[error("parse error: {0}")]
    Parse(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    Top,
    Right,
    Bottom,
    Left,
}

/// A labeled boundary point; `index` is 1-based, left to right on the top
/// and bottom, top to bottom on the sides.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BoundaryPoint {
    pub side: Side,
    pub index: usize,
}

impl BoundaryPoint {
    pub fn top(i: usize) -> Self {
        Self { side: Side::Top, index: i }
    }
    pub fn bottom(i: usize) -> Self {
        Self { side: Side::Bottom, index: i }
    }
    pub fn left(j: usize) -> Self {
        Self { side: Side::Left, index: j }
    }
    pub fn right(j: usize) -> Self {
        Self { side: Side::Right, index: j }
    }
}

impl fmt::Display for BoundaryPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = match self.side {
            Side::Top => 'T',
            Side::Bottom => 'B',
            Side::Left => 'L',
            Side::Right => 'R',
        };
        write!(f, "{c}{}", self.index)
    }
}

impl FromStr for BoundaryPoint {
    type Err = StateError;
    fn from_str(s: &str) -> Result<Self, StateError> {
        let s = s.trim();
        let mut chars = s.chars();
        let side = match chars.next() {
            Some('T') => Side::Top,
            Some('B') => Side::Bottom,
            Some('L') => Side::Left,
            Some('R') => Side::Right,
            _ => return Err(StateError::Parse(format!("bad point {s:?}"))),
        };
        let index: usize = chars.as_str().parse().map_err(|_| StateError::Parse(format!("bad point index {s:?}")))?;
        if index == 0 {
            return Err(StateError::PointOutOfRange(s.to_string()));
        }
        Ok(Self { side, index })
    }
}

/// An arc given by its two end points.
pub type Arc = (BoundaryPoint, BoundaryPoint);

pub fn arc_to_string(c: &Arc) -> String {
    format!("{}-{}", c.0, c.1)
}

/// `ι_{m,n}` on top, left and right points.
pub fn coordinate(p: BoundaryPoint, m: usize, n: usize) -> Result<i64, StateError> {
    let (i, n) = (p.index as i64, n as i64);
    match p.side {
        Side::Right if p.index <= m => Ok(i),
        Side::Left if p.index <= m => Ok(-n + 1 - i),
        Side::Top if i <= n => Ok(i - n),
        Side::Bottom => Err(StateError::BottomPoint(p.to_string())),
        _ => Err(StateError::PointOutOfRange(p.to_string())),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StateClass {
    pub has_top_returns: bool,
    pub has_bottom_returns: bool,
    pub has_left_returns: bool,
    pub has_right_returns: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Orientation {
    Horizontal,
    Vertical,
}

/// Result of stacking two connections.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Stacked {
    State(Connection),
    K0,
}

impl Stacked {
    pub fn state(&self) -> Option<&Connection> {
        match self {
            Stacked::State(c) => Some(c),
            Stacked::K0 => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Connection {
    m: usize,
    nt: usize,
    nb: usize,
    partner: Vec<u32>,
}

impl Connection {
    pub fn new(m: usize, nt: usize, nb: usize, pairs: &[Arc]) -> Result<Self, StateError> {
        let len = 2 * m + nt + nb;
        let mut partner = vec![u32::MAX; len];
        let shape = Shape { m, nt, nb };
        for &(p, q) in pairs {
            let a = shape.position(p)?;
            let b = shape.position(q)?;
            if a == b {
                return Err(StateError::DuplicatePoint(p.to_string()));
            }
            for (x, pt) in [(a, p), (b, q)] {
                if partner[x] != u32::MAX {
                    return Err(StateError::DuplicatePoint(pt.to_string()));
                }
            }
            partner[a] = b as u32;
            partner[b] = a as u32;
        }
        if let Some(x) = partner.iter().position(|&v| v == u32::MAX) {
            return Err(StateError::UnmatchedPoint(shape.point(x).to_string()));
        }
        let c = Self { m, nt, nb, partner };
        c.check_noncrossing()?;
        Ok(c)
    }

    /// Catalan state of `Cat(m,n)`.
    pub fn catalan(m: usize, n: usize, pairs: &[Arc]) -> Result<Self, StateError> {
        Self::new(m, n, n, pairs)
    }

    /// Builds from a partner array in cyclic positions, validating it.
    pub fn from_partner(m: usize, nt: usize, nb: usize, partner: Vec<u32>) -> Result<Self, StateError> {
        let shape = Shape { m, nt, nb };
        if partner.len() != shape.len() {
            return Err(StateError::Parse(format!("expected {} positions, got {}", shape.len(), partner.len())));
        }
        for (i, &p) in partner.iter().enumerate() {
            let p = p as usize;
            if p >= partner.len() || p == i || partner[p] as usize != i {
                return Err(StateError::UnmatchedPoint(shape.point(i).to_string()));
            }
        }
        let c = Self { m, nt, nb, partner };
        c.check_noncrossing()?;
        Ok(c)
    }

    pub(crate) fn from_partner_unchecked(m: usize, nt: usize, nb: usize, partner: Vec<u32>) -> Self {
        let c = Self { m, nt, nb, partner };
        debug_assert!(c.check_noncrossing().is_ok());
        c
    }

    /// The state of `Cat(0,n)` made of vertical strands.
    pub fn identity(n: usize) -> Self {
        let pairs: Vec<Arc> = (1..=n).map(|i| (BoundaryPoint::top(i), BoundaryPoint::bottom(i))).collect();
        Self::catalan(0, n, &pairs).expect("identity is noncrossing")
    }

    fn check_noncrossing(&self) -> Result<(), StateError> {
        let mut stack: Vec<usize> = Vec::new();
        for i in 0..self.len() {
            let p = self.partner[i] as usize;
            if p > i {
                stack.push(i);
            } else {
                let top = stack.pop().expect("partner below was pushed");
                if top != p {
                    return Err(StateError::CrossingPair(self.arc_label(top), self.arc_label(p)));
                }
            }
        }
        Ok(())
    }

    fn arc_label(&self, pos: usize) -> String {
        format!("{}-{}", self.point(pos), self.point(self.partner[pos] as usize))
    }

    fn shape(&self) -> Shape {
        Shape { m: self.m, nt: self.nt, nb: self.nb }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n_top(&self) -> usize {
        self.nt
    }

    pub fn n_bottom(&self) -> usize {
        self.nb
    }

    /// `n` of a Catalan state.
    pub fn n(&self) -> usize {
        debug_assert!(self.is_catalan());
        self.nt
    }

    pub fn is_catalan(&self) -> bool {
        self.nt == self.nb
    }

    fn require_catalan(&self) -> Result<(), StateError> {
        if self.is_catalan() {
            Ok(())
        } else {
            Err(StateError::NotCatalan(self.nt, self.nb))
        }
    }

    /// Number of boundary points.
    pub fn len(&self) -> usize {
        self.partner.len()
    }

    pub fn is_empty(&self) -> bool {
        self.partner.is_empty()
    }

    pub fn num_arcs(&self) -> usize {
        self.len() / 2
    }

    pub fn partner_positions(&self) -> &[u32] {
        &self.partner
    }

    pub fn partner_pos(&self, pos: usize) -> usize {
        self.partner[pos] as usize
    }

    pub fn position(&self, p: BoundaryPoint) -> Result<usize, StateError> {
        self.shape().position(p)
    }

    pub fn point(&self, pos: usize) -> BoundaryPoint {
        self.shape().point(pos)
    }

    pub fn partner_of(&self, p: BoundaryPoint) -> Result<BoundaryPoint, StateError> {
        Ok(self.point(self.partner[self.position(p)?] as usize))
    }

    /// Arcs as position pairs `(a, b)` with `a < b`, ordered by `a`.
    pub fn arc_positions(&self) -> Vec<(usize, usize)> {
        (0..self.len())
            .filter_map(|i| {
                let p = self.partner[i] as usize;
                (i < p).then_some((i, p))
            })
            .collect()
    }

    pub fn arcs(&self) -> Vec<Arc> {
        self.arc_positions().into_iter().map(|(a, b)| (self.point(a), self.point(b))).collect()
    }

    fn arc_pos(&self, c: &Arc) -> Result<(usize, usize), StateError> {
        let a = self.position(c.0)?;
        let b = self.position(c.1)?;
        if self.partner[a] as usize != b {
            return Err(StateError::NotAnArc(arc_to_string(c)));
        }
        Ok((a.min(b), a.max(b)))
    }

    pub fn classify(&self) -> StateClass {
        let mut class = StateClass {
            has_top_returns: false,
            has_bottom_returns: false,
            has_left_returns: false,
            has_right_returns: false,
        };
        for (a, b) in self.arcs() {
            if a.side == b.side {
                match a.side {
                    Side::Top => class.has_top_returns = true,
                    Side::Bottom => class.has_bottom_returns = true,
                    Side::Left => class.has_left_returns = true,
                    Side::Right => class.has_right_returns = true,
                }
            }
        }
        class
    }

    pub fn has_bottom_returns(&self) -> bool {
        self.classify().has_bottom_returns
    }

    pub fn has_top_returns(&self) -> bool {
        self.classify().has_top_returns
    }

    /// Arcs with exactly one end on each side of the line.
    pub fn line_intersections(&self, orientation: Orientation, i: usize) -> Result<usize, StateError> {
        let inside: Box<dyn Fn(BoundaryPoint) -> bool> = match orientation {
            Orientation::Horizontal => {
                if i > self.m {
                    return Err(StateError::LineOutOfRange(i));
                }
                Box::new(move |p: BoundaryPoint| match p.side {
                    Side::Top => true,
                    Side::Left | Side::Right => p.index <= i,
                    Side::Bottom => false,
                })
            }
            Orientation::Vertical => {
                self.require_catalan()?;
                if i > self.nt {
                    return Err(StateError::LineOutOfRange(i));
                }
                Box::new(move |p: BoundaryPoint| match p.side {
                    Side::Left => true,
                    Side::Top | Side::Bottom => p.index <= i,
                    Side::Right => false,
                })
            }
        };
        Ok(self.arcs().iter().filter(|(p, q)| inside(*p) != inside(*q)).count())
    }

    pub fn is_realizable(&self) -> Result<bool, StateError> {
        self.require_catalan()?;
        let (m, n) = (self.m, self.nt);
        for i in 1..m {
            if self.line_intersections(Orientation::Horizontal, i)? > n {
                return Ok(false);
            }
        }
        for j in 1..n {
            if self.line_intersections(Orientation::Vertical, j)? > m {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Moves the two top corners `t` units down (up when `t < 0`).
    pub fn tau_shift(&self, t: i64) -> Result<Self, StateError> {
        if t > self.m as i64 || t < -((self.nt / 2) as i64) {
            return Err(StateError::ShiftOutOfRange(t));
        }
        let len = self.len() as i64;
        let start = (len - t).rem_euclid(len.max(1)) as usize;
        let m = (self.m as i64 - t) as usize;
        let nt = (self.nt as i64 + 2 * t) as usize;
        Ok(self.rotated(start, m, nt, self.nb))
    }

    /// Relabels so that old position `start` becomes position 0.
    fn rotated(&self, start: usize, m: usize, nt: usize, nb: usize) -> Self {
        let len = self.len();
        if len == 0 {
            return Self { m, nt, nb, partner: Vec::new() };
        }
        let mut partner = vec![0u32; len];
        for (old, &p) in self.partner.iter().enumerate() {
            let new = (old + len - start) % len;
            partner[new] = ((p as usize + len - start) % len) as u32;
        }
        Self { m, nt, nb, partner }
    }

    pub fn rotate_pi(&self) -> Self {
        self.rotated(self.nt + self.m, self.m, self.nb, self.nt)
    }

    /// Clockwise quarter turn; `Cat(m,n)` goes to `Cat(n,m)`.
    pub fn rotate_quarter(&self) -> Result<Self, StateError> {
        self.require_catalan()?;
        Ok(self.rotated(self.nt + self.m + self.nb, self.nt, self.m, self.m))
    }

    /// Mirror image in a vertical line.
    pub fn reflect(&self) -> Self {
        let len = self.len();
        if len == 0 {
            return self.clone();
        }
        let map = |old: usize| (self.nt + 2 * len - 1 - old) % len;
        let mut partner = vec![0u32; len];
        for (old, &p) in self.partner.iter().enumerate() {
            partner[map(old)] = map(p as usize) as u32;
        }
        Self { m: self.m, nt: self.nt, nb: self.nb, partner }
    }

    /// Deletes an arc whose ends are both top points.
    fn delete_top_arc(&self, a: usize, b: usize) -> Self {
        debug_assert!(a < self.nt && b < self.nt);
        let keep: Vec<usize> = (0..self.len()).filter(|&i| i != a && i != b).collect();
        let mut index = vec![usize::MAX; self.len()];
        for (new, &old) in keep.iter().enumerate() {
            index[old] = new;
        }
        let partner = keep.iter().map(|&old| index[self.partner[old] as usize] as u32).collect();
        Self { m: self.m, nt: self.nt - 2, nb: self.nb, partner }
    }

    pub fn is_proper(&self, c: &Arc) -> Result<bool, StateError> {
        self.arc_pos(c)?;
        Ok(is_proper_arc(c))
    }

    /// `C \ c`: removes a proper arc and one row.
    pub fn remove_arc(&self, c: &Arc) -> Result<Self, StateError> {
        self.arc_pos(c)?;
        if self.m == 0 {
            return Err(StateError::NoRows);
        }
        if !is_proper_arc(c) {
            return Err(StateError::NotProper(arc_to_string(c)));
        }
        if c.0.side == Side::Bottom || c.1.side == Side::Bottom {
            let rot = self.rotate_pi();
            let rc = (rotate_pi_point(c.0, self), rotate_pi_point(c.1, self));
            return Ok(rot.remove_arc(&rc)?.rotate_pi());
        }
        let m = self.m as i64;
        let unfolded = self.tau_shift(m)?;
        // τ_m only moves the cut, so cyclic positions shift uniformly
        let len = self.len();
        let start = (len as i64 - m).rem_euclid(len as i64) as usize;
        let (a, b) = self.arc_pos(c)?;
        let (a, b) = ((a + len - start) % len, (b + len - start) % len);
        unfolded.delete_top_arc(a.min(b), a.max(b)).tau_shift(1 - m)
    }

    /// `(a, b)` with the left end written `y_a` and the right end `y'_b`.
    pub fn extended_labels(&self, c: &Arc) -> Result<(i64, i64), StateError> {
        self.arc_pos(c)?;
        if !is_proper_arc(c) {
            return Err(StateError::NotProper(arc_to_string(c)));
        }
        let (y_end, y_prime_end) = orient_ends(c);
        let (m, n) = (self.m as i64, self.nt as i64);
        let a = match y_end.side {
            Side::Left => y_end.index as i64,
            Side::Top => 1 - y_end.index as i64,
            Side::Bottom => m + y_end.index as i64,
            Side::Right => unreachable!("right points carry primed labels"),
        };
        let b = match y_prime_end.side {
            Side::Right => y_prime_end.index as i64,
            Side::Top => y_prime_end.index as i64 - n,
            Side::Bottom => m + (n - y_prime_end.index as i64) + 1,
            Side::Left => unreachable!("left points carry unprimed labels"),
        };
        Ok((a, b))
    }

    /// Label `j` of an arc joining cyclically adjacent points, read as
    /// `(y_j, y_{j+1})` or `(y'_j, y'_{j+1})`. Top pairs report `j <= 0`,
    /// bottom pairs `j >= m`. `None` when the ends are not adjacent.
    pub fn adjacent_label(&self, a: usize, b: usize) -> Option<i64> {
        let len = self.len();
        let (a, b) = (a.min(b), a.max(b));
        let adjacent = b == a + 1 || (a == 0 && b == len - 1);
        if !adjacent {
            return None;
        }
        let (p, q) = (self.point(a), self.point(b));
        let m = self.m as i64;
        use Side::*;
        match (p.side, q.side) {
            (Top, Top) => Some(-(p.index.min(q.index) as i64)),
            (Top, Left) | (Left, Top) | (Top, Right) | (Right, Top) => Some(0),
            (Left, Left) | (Right, Right) => Some(p.index.min(q.index) as i64),
            (Bottom, Bottom) => Some(m + p.index.min(q.index) as i64),
            (Right, Bottom) | (Bottom, Right) | (Left, Bottom) | (Bottom, Left) => Some(m),
            // sides meeting across an empty top or bottom edge
            _ => None,
        }
    }

    /// Whether the gap between positions `g-1` and `g` lies strictly inside
    /// the chord `(a, b)`, `a < b`.
    fn gap_inside(a: usize, b: usize, g: usize) -> bool {
        a < g && g <= b
    }

    pub fn is_removable(&self, c: &Arc) -> Result<bool, StateError> {
        let (a, b) = self.arc_pos(c)?;
        if self.m == 0 || !is_proper_arc(c) {
            return Ok(false);
        }
        let touches_bottom = c.0.side == Side::Bottom || c.1.side == Side::Bottom;
        // whether the inner interval (a, b) is the A_2 side
        let inner_is_a2 = if !touches_bottom {
            Self::gap_inside(a, b, self.nt + self.m)
        } else {
            // the top-left corner gap 0 is never inside a chord
            true
        };
        let m = self.m as i64;
        let mut max_a1 = i64::MIN;
        let mut min_a2 = i64::MAX;
        for (p, q) in self.arc_positions() {
            if (p, q) == (a, b) {
                continue;
            }
            let Some(j) = self.adjacent_label(p, q) else { continue };
            let inner = a < p && q < b;
            let in_a2 = inner == inner_is_a2;
            if in_a2 {
                if j <= 0 {
                    return Ok(false);
                }
                min_a2 = min_a2.min(j);
            } else {
                if j >= m {
                    return Ok(false);
                }
                max_a1 = max_a1.max(j);
            }
        }
        Ok(max_a1 < min_a2)
    }

    /// Removable arcs ordered by the cyclic position of their `y`-labeled end.
    pub fn find_removable_arcs(&self) -> Vec<Arc> {
        let mut found: Vec<(usize, Arc)> = self
            .arcs()
            .into_iter()
            .filter(|c| self.is_removable(c).unwrap_or(false))
            .map(|c| (self.position(orient_ends(&c).0).expect("own point"), c))
            .collect();
        found.sort_by_key(|(p, _)| *p);
        found.into_iter().map(|(_, c)| c).collect()
    }

    /// Horizontal lines `l^h_i`, `0 <= i <= m`, crossed by `n` arcs.
    pub fn saturating_lines(&self) -> Vec<usize> {
        (0..=self.m).filter(|&i| self.line_intersections(Orientation::Horizontal, i).ok() == Some(self.nt)).collect()
    }

    pub fn is_vertically_decomposable(&self) -> Option<usize> {
        self.saturating_lines().first().copied()
    }

    /// Cuts along a saturated line `l^h_i` into `C_1 ∈ Cat(i,n)` over
    /// `C_2 ∈ Cat(m-i,n)`.
    pub fn split_at(&self, i: usize) -> Result<(Self, Self), StateError> {
        self.require_catalan()?;
        let n = self.nt;
        if self.line_intersections(Orientation::Horizontal, i)? != n {
            return Err(StateError::NotSaturating(i));
        }
        let upper = |p: BoundaryPoint| match p.side {
            Side::Top => true,
            Side::Left | Side::Right => p.index <= i,
            Side::Bottom => false,
        };
        // order of the upper region clockwise from y_i: y_i..y_1, x_1..x_n, y'_1..y'_i
        let upper_rank = |p: BoundaryPoint| -> usize {
            match p.side {
                Side::Left => i - p.index,
                Side::Top => i + p.index - 1,
                Side::Right => i + n + p.index - 1,
                Side::Bottom => unreachable!(),
            }
        };
        let mut crossing: Vec<(usize, BoundaryPoint, BoundaryPoint)> = Vec::new();
        let mut top_pairs: Vec<Arc> = Vec::new();
        let mut bottom_pairs: Vec<Arc> = Vec::new();
        let lower = |p: BoundaryPoint| -> BoundaryPoint {
            match p.side {
                Side::Left | Side::Right => BoundaryPoint { side: p.side, index: p.index - i },
                _ => p,
            }
        };
        for (p, q) in self.arcs() {
            match (upper(p), upper(q)) {
                (true, true) => top_pairs.push((p, q)),
                (false, false) => bottom_pairs.push((lower(p), lower(q))),
                (true, false) => crossing.push((upper_rank(p), p, q)),
                (false, true) => crossing.push((upper_rank(q), q, p)),
            }
        }
        crossing.sort_by_key(|t| t.0);
        for (k, (_, up, down)) in crossing.into_iter().enumerate() {
            top_pairs.push((up, BoundaryPoint::bottom(k + 1)));
            bottom_pairs.push((BoundaryPoint::top(k + 1), lower(down)));
        }
        let c1 = Self::catalan(i, n, &top_pairs)?;
        let c2 = Self::catalan(self.m - i, n, &bottom_pairs)?;
        Ok((c1, c2))
    }

    pub fn to_text(&self) -> String {
        let head = if self.is_catalan() {
            format!("cat({},{}):", self.m, self.nt)
        } else {
            format!("conn({},{},{}):", self.m, self.nt, self.nb)
        };
        let body: Vec<String> =
            self.arc_positions().into_iter().map(|(a, b)| format!("{}-{}", self.point(a), self.point(b))).collect();
        if body.is_empty() {
            head
        } else {
            format!("{head} {}", body.join(", "))
        }
    }
}

fn is_proper_arc(c: &Arc) -> bool {
    let (s, t) = (c.0.side, c.1.side);
    let top_bottom = (s == Side::Top && t == Side::Bottom) || (s == Side::Bottom && t == Side::Top);
    let side_return = s == t && (s == Side::Left || s == Side::Right);
    !top_bottom && !side_return
}

/// Splits a proper arc into its `y`-labeled (left) end and its
/// `y'`-labeled (right) end.
fn orient_ends(c: &Arc) -> (BoundaryPoint, BoundaryPoint) {
    let (p, q) = *c;
    if p.side == Side::Left || q.side == Side::Right {
        (p, q)
    } else if q.side == Side::Left || p.side == Side::Right {
        (q, p)
    } else if p.index < q.index {
        (p, q)
    } else {
        (q, p)
    }
}

fn rotate_pi_point(p: BoundaryPoint, c: &Connection) -> BoundaryPoint {
    let (m, nt, nb) = (c.m, c.nt, c.nb);
    match p.side {
        Side::Top => BoundaryPoint::bottom(nt + 1 - p.index),
        Side::Bottom => BoundaryPoint::top(nb + 1 - p.index),
        Side::Left => BoundaryPoint::right(m + 1 - p.index),
        Side::Right => BoundaryPoint::left(m + 1 - p.index),
    }
}

#[derive(Clone, Copy)]
struct Shape {
    m: usize,
    nt: usize,
    nb: usize,
}

impl Shape {
    fn len(&self) -> usize {
        2 * self.m + self.nt + self.nb
    }

    fn position(&self, p: BoundaryPoint) -> Result<usize, StateError> {
        let Shape { m, nt, nb } = *self;
        let i = p.index;
        let ok = |limit: usize| i >= 1 && i <= limit;
        match p.side {
            Side::Top if ok(nt) => Ok(i - 1),
            Side::Right if ok(m) => Ok(nt + i - 1),
            Side::Bottom if ok(nb) => Ok(nt + m + (nb - i)),
            Side::Left if ok(m) => Ok(nt + m + nb + (m - i)),
            _ => Err(StateError::PointOutOfRange(p.to_string())),
        }
    }

    fn point(&self, pos: usize) -> BoundaryPoint {
        let Shape { m, nt, nb } = *self;
        if pos < nt {
            BoundaryPoint::top(pos + 1)
        } else if pos < nt + m {
            BoundaryPoint::right(pos - nt + 1)
        } else if pos < nt + m + nb {
            BoundaryPoint::bottom(nb - (pos - nt - m))
        } else {
            BoundaryPoint::left(m - (pos - nt - m - nb))
        }
    }
}

impl fmt::Display for Connection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl FromStr for Connection {
    type Err = StateError;

    /// `cat(m,n): P-Q, ...` or `conn(m,nt,nb): P-Q, ...`.
    fn from_str(s: &str) -> Result<Self, StateError> {
        let src: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let perr = |m: &str| StateError::Parse(format!("{m} in {s:?}"));
        let (head, body) = src.split_once(':').ok_or_else(|| perr("missing ':'"))?;
        let (kind, dims) = head.split_once('(').ok_or_else(|| perr("missing '('"))?;
        let dims = dims.strip_suffix(')').ok_or_else(|| perr("missing ')'"))?;
        let nums: Vec<usize> =
            dims.split(',').map(|d| d.parse::<usize>().map_err(|_| perr("bad dimension"))).collect::<Result<_, _>>()?;
        let (m, nt, nb) = match (kind, nums.as_slice()) {
            ("cat", [m, n]) => (*m, *n, *n),
            ("conn", [m, nt, nb]) => (*m, *nt, *nb),
            _ => return Err(perr("expected cat(m,n) or conn(m,nt,nb)")),
        };
        let mut pairs = Vec::new();
        if !body.is_empty() {
            for item in body.split(',') {
                let (p, q) = item.split_once('-').ok_or_else(|| perr("pair needs '-'"))?;
                pairs.push((p.parse()?, q.parse()?));
            }
        }
        Connection::new(m, nt, nb, &pairs)
    }
}

/// Stacks `c1` on top of `c2`, gluing the bottom of `c1` to the top of `c2`.
pub fn vertical_product(c1: &Stacked, c2: &Stacked) -> Stacked {
    match (c1, c2) {
        (Stacked::State(a), Stacked::State(b)) => stack(a, b),
        _ => Stacked::K0,
    }
}

pub fn stack(c1: &Connection, c2: &Connection) -> Stacked {
    if c1.nb != c2.nt {
        return Stacked::K0;
    }
    let (m1, m2) = (c1.m, c2.m);
    let out = Shape { m: m1 + m2, nt: c1.nt, nb: c2.nb };
    // outer position in the result, or None for a glued middle point
    let outer1 = |p: BoundaryPoint| -> Option<usize> {
        match p.side {
            Side::Bottom => None,
            _ => Some(out.position(p).expect("in range")),
        }
    };
    let outer2 = |p: BoundaryPoint| -> Option<usize> {
        match p.side {
            Side::Top => None,
            Side::Left | Side::Right => {
                Some(out.position(BoundaryPoint { side: p.side, index: p.index + m1 }).expect("in range"))
            }
            Side::Bottom => Some(out.position(p).expect("in range")),
        }
    };
    let mut partner = vec![u32::MAX; out.len()];
    let mut middle_used = vec![false; c1.nb];
    let start_points: Vec<(bool, BoundaryPoint)> = c1
        .arcs()
        .iter()
        .flat_map(|&(p, q)| [p, q])
        .filter(|p| p.side != Side::Bottom)
        .map(|p| (true, p))
        .chain(c2.arcs().iter().flat_map(|&(p, q)| [p, q]).filter(|p| p.side != Side::Top).map(|p| (false, p)))
        .collect();
    for (in_first, p) in start_points {
        let from = if in_first { outer1(p) } else { outer2(p) }.expect("outer point");
        if partner[from] != u32::MAX {
            continue;
        }
        let (mut first, mut cur) = (in_first, p);
        let to = loop {
            let conn = if first { c1 } else { c2 };
            let q = conn.partner_of(cur).expect("valid point");
            let outer = if first { outer1(q) } else { outer2(q) };
            if let Some(pos) = outer {
                break pos;
            }
            middle_used[q.index - 1] = true;
            first = !first;
            cur = if first { BoundaryPoint::bottom(q.index) } else { BoundaryPoint::top(q.index) };
        };
        partner[from] = to as u32;
        partner[to] = from as u32;
    }
    if middle_used.iter().any(|u| !u) {
        return Stacked::K0;
    }
    Stacked::State(Connection::from_partner_unchecked(out.m, out.nt, out.nb, partner))
}

/// All noncrossing perfect matchings of the `2(m+n)` points, in
/// lexicographic order of the partner array.
pub fn enumerate_catalan(m: usize, n: usize) -> Vec<Connection> {
    let len = 2 * (m + n);
    let mut out = Vec::new();
    for partner in matchings(0, len) {
        let mut full = vec![0u32; len];
        for (i, p) in partner.iter().enumerate() {
            full[i] = *p as u32;
        }
        out.push(Connection::from_partner_unchecked(m, n, n, full));
    }
    out
}

/// Noncrossing matchings of positions `lo..hi`, each as a dense partner
/// slice indexed from `lo`.
fn matchings(lo: usize, hi: usize) -> Vec<Vec<usize>> {
    if lo >= hi {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    let mut j = lo + 1;
    while j < hi {
        let inner = matchings(lo + 1, j);
        let outer = matchings(j + 1, hi);
        for a in &inner {
            for b in &outer {
                let mut v = Vec::with_capacity(hi - lo);
                v.push(j);
                v.extend_from_slice(a);
                v.push(lo);
                v.extend_from_slice(b);
                out.push(v);
            }
        }
        j += 2;
    }
    out
}

pub fn catalan_number(k: usize) -> u64 {
    // binom(2k, k) / (k + 1)
    let mut c: u64 = 1;
    for i in 0..k as u64 {
        c = c * 2 * (2 * i + 1) / (i + 2);
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;

    fn st(s: &str) -> Connection {
        s.parse().unwrap()
    }

    #[test]
    fn parse_and_canonical_output() {
        let c = st("cat(1,2): T1-T2, L1-B1, R1-B2");
        assert_eq!(c.to_string(), "cat(1,2): T1-T2, R1-B2, B1-L1");
        assert_eq!(st(&c.to_string()), c);
        assert_eq!(st(" cat( 0 , 0 ) : ").num_arcs(), 0);
    }

    #[test]
    fn validation_errors() {
        let e = "cat(0,2): T1-B2, T2-B1".parse::<Connection>().unwrap_err();
        assert!(e.to_string().contains("crossing pair"), "{e}");
        let e = "cat(0,2): T1-B1".parse::<Connection>().unwrap_err();
        assert!(e.to_string().contains("unmatched point"), "{e}");
        let e = "cat(0,2): T1-B1, T1-B2, T2-B2".parse::<Connection>().unwrap_err();
        assert!(e.to_string().contains("duplicate point"), "{e}");
        assert!("cat(1,1): T1-T2, L1-R1".parse::<Connection>().is_err());
        assert!("cat(1,1) T1-B1".parse::<Connection>().is_err());
    }

    #[test]
    fn valid_examples() {
        st("cat(1,1): T1-R1, L1-B1");
        st("cat(0,2): T1-B1, T2-B2");
    }

    #[test]
    fn catalan_counts() {
        assert_eq!(enumerate_catalan(0, 1).len(), 1);
        assert_eq!(enumerate_catalan(1, 1).len(), 2);
        assert_eq!(enumerate_catalan(2, 2).len(), 14);
        for m in 0..=4 {
            for n in 0..=(7 - m) {
                assert_eq!(enumerate_catalan(m, n).len() as u64, catalan_number(m + n));
            }
        }
    }

    #[test]
    fn enumeration_is_sorted_and_distinct() {
        let all = enumerate_catalan(2, 3);
        for w in all.windows(2) {
            assert!(w[0].partner_positions() < w[1].partner_positions());
        }
    }

    #[test]
    fn coordinates() {
        assert_eq!(coordinate(BoundaryPoint::right(2), 3, 4).unwrap(), 2);
        assert_eq!(coordinate(BoundaryPoint::left(2), 3, 4).unwrap(), -4 + 1 - 2);
        assert_eq!(coordinate(BoundaryPoint::top(3), 3, 4).unwrap(), -1);
        assert!(coordinate(BoundaryPoint::bottom(1), 3, 4).is_err());
    }

    #[test]
    fn line_counts() {
        let id = Connection::identity(3);
        for j in 0..=3 {
            assert_eq!(id.line_intersections(Orientation::Vertical, j).unwrap(), 0);
        }
        assert_eq!(id.line_intersections(Orientation::Horizontal, 0).unwrap(), 3);
        let c = st("cat(2,2): T1-T2, L1-R1, L2-R2, B1-B2");
        assert_eq!(c.line_intersections(Orientation::Horizontal, 1).unwrap(), 0);
        assert_eq!(c.line_intersections(Orientation::Vertical, 1).unwrap(), 4);
        assert!(c.line_intersections(Orientation::Horizontal, 3).is_err());
    }

    #[test]
    fn realizability_examples() {
        for c in enumerate_catalan(1, 1) {
            assert!(c.is_realizable().unwrap());
        }
        // every strand through l^h_1 in addition to the through-strand
        assert!(!st("cat(2,1): L1-L2, R1-R2, T1-B1").is_realizable().unwrap());
        assert!(!st("cat(3,1): T1-R3, L1-L2, L3-B1, R1-R2").is_realizable().unwrap());
        assert!(st("cat(2,1): T1-R1, L1-L2, R2-B1").is_realizable().unwrap());
    }

    #[test]
    fn stacking() {
        let c = st("cat(1,2): T1-T2, L1-B1, R1-B2");
        assert_eq!(stack(&c, &Connection::identity(2)), Stacked::State(c.clone()));
        assert_eq!(stack(&Connection::identity(2), &c), Stacked::State(c.clone()));
        let ret_bottom = st("cat(0,2): T1-T2, B1-B2");
        assert_eq!(stack(&ret_bottom, &ret_bottom), Stacked::K0);
        let c1 = st("cat(1,2): T1-T2, L1-B1, R1-B2");
        let c2 = st("cat(1,2): T1-L1, T2-R1, B1-B2");
        let prod = stack(&c1, &c2);
        assert_eq!(prod, Stacked::State(st("cat(2,2): T1-T2, L1-L2, R1-R2, B1-B2")));
        assert_eq!(vertical_product(&Stacked::K0, &Stacked::State(c1)), Stacked::K0);
        assert_eq!(stack(&Connection::identity(1), &Connection::identity(2)), Stacked::K0);
    }

    #[test]
    fn symmetries_are_involutions() {
        for c in enumerate_catalan(2, 2).into_iter().chain(enumerate_catalan(1, 3)) {
            assert_eq!(c.rotate_pi().rotate_pi(), c);
            assert_eq!(c.reflect().reflect(), c);
            let q = c.rotate_quarter().unwrap();
            assert_eq!((q.m(), q.n()), (c.n(), c.m()));
            let back = q.rotate_quarter().unwrap().rotate_quarter().unwrap().rotate_quarter().unwrap();
            assert_eq!(back, c);
            assert_eq!(c.rotate_pi().is_realizable(), c.is_realizable());
            assert_eq!(c.reflect().is_realizable(), c.is_realizable());
        }
        assert_eq!(Connection::identity(3).reflect(), Connection::identity(3));
    }

    #[test]
    fn rotations_move_labels() {
        let c = st("cat(1,2): T1-T2, L1-B1, R1-B2");
        assert_eq!(c.rotate_pi(), st("cat(1,2): B1-B2, R1-T2, L1-T1"));
        assert_eq!(c.reflect(), st("cat(1,2): T1-T2, R1-B2, L1-B1"));
        assert_eq!(c.rotate_quarter().unwrap(), st("cat(2,1): R1-R2, T1-L1, B1-L2"));
    }

    #[test]
    fn tau_round_trip() {
        for c in enumerate_catalan(2, 2) {
            assert_eq!(c.tau_shift(0).unwrap(), c);
            let t = c.tau_shift(2).unwrap();
            assert_eq!((t.m(), t.n_top()), (0, 6));
            for t in -1..=2i64 {
                assert_eq!(c.tau_shift(t).unwrap().tau_shift(-t).unwrap(), c);
            }
            assert!(c.tau_shift(3).is_err());
            assert!(c.tau_shift(-2).is_err());
        }
        let c = st("cat(1,1): T1-R1, L1-B1");
        assert_eq!(c.tau_shift(1).unwrap().to_string(), "conn(0,3,1): T1-B1, T2-T3");
    }

    #[test]
    fn removing_arcs() {
        let c = st("cat(1,1): T1-L1, R1-B1");
        assert_eq!(c.remove_arc(&(BoundaryPoint::top(1), BoundaryPoint::left(1))).unwrap(), Connection::identity(1));
        let c = st("cat(2,2): T1-T2, L1-R1, L2-B1, R2-B2");
        let r = c.remove_arc(&(BoundaryPoint::left(1), BoundaryPoint::right(1))).unwrap();
        assert_eq!(r, st("cat(1,2): T1-T2, L1-B1, R1-B2"));
        let r = c.remove_arc(&(BoundaryPoint::top(1), BoundaryPoint::top(2))).unwrap();
        assert_eq!((r.m(), r.n()), (1, 2));
        assert!(c.remove_arc(&(BoundaryPoint::left(2), BoundaryPoint::right(2))).is_err());
        let ret = st("cat(2,1): L1-L2, T1-R1, R2-B1");
        assert!(ret.remove_arc(&(BoundaryPoint::left(1), BoundaryPoint::left(2))).is_err());
    }

    #[test]
    fn extended_label_examples() {
        let c = st("cat(2,4): T1-T2, T3-T4, L1-R1, L2-B1, R2-B4, B2-B3");
        let (a, b) = c.extended_labels(&(BoundaryPoint::top(3), BoundaryPoint::top(4))).unwrap();
        // top return (x_{i-1}, x_i) with i = 4
        assert_eq!((a, b), (2 - 4, 4 - 4));
        assert_eq!(b - a, 2 * 4 - 4 - 2);
        assert_eq!(c.extended_labels(&(BoundaryPoint::left(1), BoundaryPoint::right(1))).unwrap(), (1, 1));
        let (a, b) = c.extended_labels(&(BoundaryPoint::bottom(2), BoundaryPoint::bottom(3))).unwrap();
        assert_eq!((a, b), (2 + 2, 2 + (4 - 3) + 1));
        let d = st("cat(2,3): T1-L1, T2-T3, L2-R1, R2-B3, B1-B2");
        assert_eq!(d.extended_labels(&(BoundaryPoint::left(2), BoundaryPoint::right(1))).unwrap(), (2, 1));
        assert!(c.extended_labels(&(BoundaryPoint::left(2), BoundaryPoint::bottom(1))).is_ok());
        let e = st("cat(2,1): L1-L2, T1-R1, R2-B1");
        assert!(e.extended_labels(&(BoundaryPoint::left(1), BoundaryPoint::left(2))).is_err());
    }

    #[test]
    fn removable_examples() {
        // no left returns: left-right arcs are removable
        let c = st("cat(2,2): T1-T2, L1-R1, L2-B1, R2-B2");
        assert!(c.is_removable(&(BoundaryPoint::left(1), BoundaryPoint::right(1))).unwrap());
        let e = st("cat(2,1): L1-L2, T1-R1, R2-B1");
        assert!(!e.is_removable(&(BoundaryPoint::left(1), BoundaryPoint::left(2))).unwrap());
    }

    #[test]
    fn split_round_trip() {
        for c in enumerate_catalan(2, 2).into_iter().chain(enumerate_catalan(3, 2)) {
            for i in c.saturating_lines() {
                let (c1, c2) = c.split_at(i).unwrap();
                assert_eq!((c1.m(), c2.m()), (i, c.m() - i));
                assert_eq!(stack(&c1, &c2), Stacked::State(c.clone()));
            }
        }
        let id = Connection::identity(2);
        assert_eq!(id.saturating_lines(), vec![0]);
        let c = st("cat(2,2): T1-T2, L1-R1, L2-R2, B1-B2");
        assert!(c.split_at(1).is_err());
    }

    #[test]
    fn classification() {
        let c = st("cat(2,2): T1-T2, L1-R1, L2-R2, B1-B2");
        let k = c.classify();
        assert!(k.has_top_returns && k.has_bottom_returns);
        assert!(!k.has_left_returns && !k.has_right_returns);
        assert_eq!(c.is_vertically_decomposable(), None);
    }
}
