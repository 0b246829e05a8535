//! Brute-force Kauffman state sum for `L(m,n)`.
//!
//! Every marker grid is smoothed tile by tile, strands are traced to get the
//! boundary matching, and closed loops are counted. Each grid contributes
//! `A^{#pos - #neg} (-A^2 - A^{-2})^{loops}` to the coefficient of its state.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex};

use rayon::prelude::*;
use thiserror::Error;

use crate::laurent::{loop_value, Laurent};
use crate::states::{Connection, StateError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("budget exceeded: m*n = {mn} is above the oracle budget of {budget} bits")]
    BudgetExceeded { mn: usize, budget: u32 },
    #[error(transparent)]
    State(#[from] StateError),
    #[error("marker grid needs {expected} markers, got {got}")]
    GridShape { expected: usize, got: usize },
}

/// Which pair of tile ports a positive marker joins to the north port.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Smoothing {
    /// `+1` joins N with E and S with W.
    PositiveJoinsNorthEast,
    /// `+1` joins N with W and S with E.
    PositiveJoinsNorthWest,
}

/// Frozen by the calibration tests: with this choice the all-positive row
/// sends `x_n` to `y'_1`, as the `β` formula requires, and the all-negative
/// square grid yields the state of coefficient `A^{-n^2}`.
pub const SMOOTHING: Smoothing = Smoothing::PositiveJoinsNorthEast;

pub const DEFAULT_BUDGET_BITS: u32 = 20;

/// Budget from `ORACLE_BUDGET_BITS`, falling back to the default.
pub fn budget_from_env() -> u32 {
    std::env::var("ORACLE_BUDGET_BITS").ok().and_then(|v| v.trim().parse().ok()).unwrap_or(DEFAULT_BUDGET_BITS)
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MarkerGrid {
    m: usize,
    n: usize,
    positive: Vec<bool>,
}

impl MarkerGrid {
    /// Markers in row-major order, `+1` or `-1`.
    pub fn new(m: usize, n: usize, markers: &[i8]) -> Result<Self, OracleError> {
        if markers.len() != m * n {
            return Err(OracleError::GridShape { expected: m * n, got: markers.len() });
        }
        Ok(Self { m, n, positive: markers.iter().map(|&s| s > 0).collect() })
    }

    /// Bit `j*n + i` set means a positive marker at row `j`, column `i`.
    pub fn from_bits(m: usize, n: usize, bits: u64) -> Self {
        Self { m, n, positive: (0..m * n).map(|k| bits >> k & 1 == 1).collect() }
    }

    pub fn uniform(m: usize, n: usize, positive: bool) -> Self {
        Self { m, n, positive: vec![positive; m * n] }
    }

    /// Row `j` carries `b[j]` positive markers followed by negative ones.
    pub fn row_sorted(b: &[usize], n: usize) -> Self {
        let positive = b.iter().flat_map(|&bj| (0..n).map(move |i| i < bj)).collect();
        Self { m: b.len(), n, positive }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_positive(&self, row: usize, col: usize) -> bool {
        self.positive[row * self.n + col]
    }

    pub fn positives(&self) -> usize {
        self.positive.iter().filter(|&&p| p).count()
    }

    /// `#pos - #neg`.
    pub fn weight(&self) -> i64 {
        2 * self.positives() as i64 - (self.m * self.n) as i64
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Resolution {
    pub state: Connection,
    pub loops: usize,
}

/// Segment graph of the grid: vertical segments `v(r,i)` for
/// `0 <= r <= m` and horizontal segments `h(j,c)` for `0 <= c <= n`; each
/// tile joins two pairs of its four segments.
struct Smoother {
    m: usize,
    n: usize,
    convention: Smoothing,
    links: Vec<[u32; 2]>,
    visited: Vec<bool>,
}

const NONE: u32 = u32::MAX;

impl Smoother {
    fn new(m: usize, n: usize, convention: Smoothing) -> Self {
        let nodes = (m + 1) * n + m * (n + 1);
        Self { m, n, convention, links: vec![[NONE; 2]; nodes], visited: vec![false; nodes] }
    }

    fn v(&self, r: usize, i: usize) -> usize {
        r * self.n + i
    }

    fn h(&self, j: usize, c: usize) -> usize {
        (self.m + 1) * self.n + j * (self.n + 1) + c
    }

    fn link(&mut self, a: usize, b: usize) {
        for (x, y) in [(a, b), (b, a)] {
            let slot = &mut self.links[x];
            if slot[0] == NONE {
                slot[0] = y as u32;
            } else {
                slot[1] = y as u32;
            }
        }
    }

    /// Cyclic boundary position of a boundary segment.
    fn boundary_position(&self, node: usize) -> Option<usize> {
        let (m, n) = (self.m, self.n);
        let vcount = (m + 1) * n;
        if node < vcount {
            let (r, i) = (node / n, node % n);
            if r == 0 {
                Some(i)
            } else if r == m {
                Some(n + m + (n - 1 - i))
            } else {
                None
            }
        } else {
            let k = node - vcount;
            let (j, c) = (k / (n + 1), k % (n + 1));
            if c == 0 {
                Some(2 * n + m + (m - 1 - j))
            } else if c == n {
                Some(n + j)
            } else {
                None
            }
        }
    }

    /// Returns the boundary matching in cyclic positions and the loop count.
    fn run(&mut self, positive: impl Fn(usize, usize) -> bool) -> (Vec<u32>, usize) {
        let (m, n) = (self.m, self.n);
        if m == 0 || n == 0 {
            // no tiles: every strand is a single straight segment
            let len = 2 * (m + n);
            let mut partner = vec![NONE; len];
            for i in 0..n {
                partner[i] = (2 * n - 1 - i) as u32;
                partner[2 * n - 1 - i] = i as u32;
            }
            for j in 0..m {
                partner[j] = (2 * m - 1 - j) as u32;
                partner[2 * m - 1 - j] = j as u32;
            }
            return (partner, 0);
        }
        for l in self.links.iter_mut() {
            *l = [NONE; 2];
        }
        for v in self.visited.iter_mut() {
            *v = false;
        }
        for j in 0..m {
            for i in 0..n {
                let (north, south) = (self.v(j, i), self.v(j + 1, i));
                let (west, east) = (self.h(j, i), self.h(j, i + 1));
                let ne = positive(j, i) == (self.convention == Smoothing::PositiveJoinsNorthEast);
                if ne {
                    self.link(north, east);
                    self.link(south, west);
                } else {
                    self.link(north, west);
                    self.link(south, east);
                }
            }
        }
        let len = 2 * (m + n);
        let mut partner = vec![NONE; len];
        for start in 0..self.links.len() {
            let Some(p0) = self.boundary_position(start) else { continue };
            if partner[p0] != NONE {
                continue;
            }
            self.visited[start] = true;
            let (mut prev, mut cur) = (start, self.links[start][0] as usize);
            loop {
                if self.boundary_position(cur).is_some() {
                    break;
                }
                self.visited[cur] = true;
                let [a, b] = self.links[cur];
                let next = if a as usize == prev { b } else { a } as usize;
                prev = cur;
                cur = next;
            }
            self.visited[cur] = true;
            let p1 = self.boundary_position(cur).expect("boundary");
            partner[p0] = p1 as u32;
            partner[p1] = p0 as u32;
        }
        let mut loops = 0;
        for start in 0..self.links.len() {
            if self.visited[start] {
                continue;
            }
            loops += 1;
            let (mut prev, mut cur) = (start, self.links[start][0] as usize);
            self.visited[start] = true;
            while cur != start {
                self.visited[cur] = true;
                let [a, b] = self.links[cur];
                let next = if a as usize == prev { b } else { a } as usize;
                prev = cur;
                cur = next;
            }
        }
        (partner, loops)
    }
}

pub fn smooth(g: &MarkerGrid) -> Resolution {
    smooth_with(g, SMOOTHING)
}

pub fn smooth_with(g: &MarkerGrid, convention: Smoothing) -> Resolution {
    let mut s = Smoother::new(g.m, g.n, convention);
    let (partner, loops) = s.run(|j, i| g.is_positive(j, i));
    Resolution { state: Connection::from_partner_unchecked(g.m, g.n, g.n, partner), loops }
}

/// Closed loop count via union-find over segments, independent of the
/// strand tracing in [`smooth`].
pub fn loop_count_union_find(g: &MarkerGrid, convention: Smoothing) -> usize {
    let (m, n) = (g.m, g.n);
    let nodes = (m + 1) * n + m * (n + 1);
    let mut parent: Vec<usize> = (0..nodes).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let v = |r: usize, i: usize| r * n + i;
    let h = |j: usize, c: usize| (m + 1) * n + j * (n + 1) + c;
    let mut merged = 0;
    for j in 0..m {
        for i in 0..n {
            let ne = g.is_positive(j, i) == (convention == Smoothing::PositiveJoinsNorthEast);
            let pairs = if ne {
                [(v(j, i), h(j, i + 1)), (v(j + 1, i), h(j, i))]
            } else {
                [(v(j, i), h(j, i)), (v(j + 1, i), h(j, i + 1))]
            };
            for (a, b) in pairs {
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                if ra != rb {
                    parent[ra] = rb;
                    merged += 1;
                }
            }
        }
    }
    let components = nodes - merged;
    // every arc is one component
    components - (m + n)
}

/// Exact coefficients of every Catalan state of `L(m,n)`.
#[derive(Clone, Debug)]
pub struct BracketTable {
    pub m: usize,
    pub n: usize,
    coeffs: BTreeMap<Connection, Laurent>,
    preimages: BTreeMap<Connection, u64>,
}

impl BracketTable {
    pub fn coefficient(&self, c: &Connection) -> Laurent {
        self.coeffs.get(c).cloned().unwrap_or_else(Laurent::zero)
    }

    /// Number of marker grids resolving to `c`.
    pub fn preimages(&self, c: &Connection) -> u64 {
        self.preimages.get(c).copied().unwrap_or(0)
    }

    /// States with a nonzero coefficient, in canonical order.
    pub fn iter(&self) -> impl Iterator<Item = (&Connection, &Laurent)> {
        self.coeffs.iter()
    }

    pub fn total_grids(&self) -> u64 {
        self.preimages.values().sum()
    }
}

type Tally = HashMap<Vec<u32>, HashMap<(i64, usize), u64>>;

pub fn bracket_table(m: usize, n: usize, budget_bits: u32) -> Result<BracketTable, OracleError> {
    bracket_table_with(m, n, budget_bits, SMOOTHING)
}

pub fn bracket_table_with(
    m: usize,
    n: usize,
    budget_bits: u32,
    convention: Smoothing,
) -> Result<BracketTable, OracleError> {
    let mn = m * n;
    if mn > budget_bits as usize || mn >= 63 {
        return Err(OracleError::BudgetExceeded { mn, budget: budget_bits });
    }
    let total: u64 = 1 << mn;
    let chunk: u64 = 1 << 12;
    let chunks = total.div_ceil(chunk);
    let partials: Vec<Tally> = (0..chunks)
        .into_par_iter()
        .map(|k| {
            let mut smoother = Smoother::new(m, n, convention);
            let mut tally: Tally = HashMap::new();
            for bits in k * chunk..((k + 1) * chunk).min(total) {
                let (partner, loops) = smoother.run(|j, i| bits >> (j * n + i) & 1 == 1);
                let weight = 2 * bits.count_ones() as i64 - mn as i64;
                *tally.entry(partner).or_default().entry((weight, loops)).or_default() += 1;
            }
            tally
        })
        .collect();
    // merge in chunk order; the sums are exact so the result is order free
    let mut merged: BTreeMap<Vec<u32>, BTreeMap<(i64, usize), u64>> = BTreeMap::new();
    for part in partials {
        for (partner, counts) in part {
            let slot = merged.entry(partner).or_default();
            for (key, c) in counts {
                *slot.entry(key).or_default() += c;
            }
        }
    }
    let delta = loop_value();
    let mut delta_pows: Vec<Laurent> = vec![Laurent::one()];
    let mut coeffs = BTreeMap::new();
    let mut preimages = BTreeMap::new();
    for (partner, counts) in merged {
        let state = Connection::from_partner_unchecked(m, n, n, partner);
        let mut value = Laurent::zero();
        let mut grids = 0;
        for ((weight, loops), c) in counts {
            while delta_pows.len() <= loops {
                let next = delta_pows.last().expect("nonempty") * &delta;
                delta_pows.push(next);
            }
            value += &delta_pows[loops].monomial_shift(weight).mul_scalar(c);
            grids += c;
        }
        preimages.insert(state.clone(), grids);
        if !value.is_zero() {
            coeffs.insert(state, value);
        }
    }
    Ok(BracketTable { m, n, coeffs, preimages })
}

/// Caches one bracket table per `(m, n)`.
pub struct Oracle {
    budget_bits: u32,
    cache: Mutex<HashMap<(usize, usize), Arc<BracketTable>>>,
}

impl Oracle {
    pub fn new(budget_bits: u32) -> Self {
        Self { budget_bits, cache: Mutex::new(HashMap::new()) }
    }

    pub fn from_env() -> Self {
        Self::new(budget_from_env())
    }

    pub fn budget_bits(&self) -> u32 {
        self.budget_bits
    }

    pub fn within_budget(&self, m: usize, n: usize) -> bool {
        m * n <= self.budget_bits as usize
    }

    pub fn table(&self, m: usize, n: usize) -> Result<Arc<BracketTable>, OracleError> {
        if let Some(t) = self.cache.lock().expect("oracle cache").get(&(m, n)) {
            return Ok(t.clone());
        }
        let table = Arc::new(bracket_table(m, n, self.budget_bits)?);
        let mut cache = self.cache.lock().expect("oracle cache");
        Ok(cache.entry((m, n)).or_insert(table).clone())
    }

    pub fn coefficient(&self, c: &Connection) -> Result<Laurent, OracleError> {
        if !c.is_catalan() {
            return Err(StateError::NotCatalan(c.n_top(), c.n_bottom()).into());
        }
        Ok(self.table(c.m(), c.n())?.coefficient(c))
    }
}

impl Default for Oracle {
    fn default() -> Self {
        Self::from_env()
    }
}

/// One-shot lookup with the environment budget.
pub fn oracle_coefficient(c: &Connection) -> Result<Laurent, OracleError> {
    Oracle::from_env().coefficient(c)
}
