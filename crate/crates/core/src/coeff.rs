//! The coefficient engine: the closed formula for states without bottom
//! returns, the reductions that shrink or simplify a state, and a traced
//! pipeline that falls back to the brute-force oracle.

use std::collections::HashSet;
use std::fmt;

use thiserror::Error;

use crate::kauffman::{Oracle, OracleError};
use crate::laurent::Laurent;
use crate::maxseq::beta;
use crate::states::{arc_to_string, Arc, BoundaryPoint, Connection, Side, StateError};
use crate::trees::{tree_from_state_with, PlaneOrder, TreeError, PLANE_ORDER};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CoeffError {
    #[error(transparent)]
    State(#[from] StateError),
    #[error("unreachable within budget: no reduction applies to a {m}x{n} state and m*n exceeds the oracle budget of {budget} bits")]
    Unreachable { m: usize, n: usize, budget: u32 },
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("method 'tree' needs a state without top or without bottom returns")]
    TreeNotApplicable,
    #[error("invariant violation: {0}")]
    Invariant(String),
}

impl From<TreeError> for CoeffError {
    fn from(e: TreeError) -> Self {
        match e {
            TreeError::State(s) => CoeffError::State(s),
            other => CoeffError::Invariant(other.to_string()),
        }
    }
}

/// `A^{2β - mn} Q*(T(C))` at `q = A^{-4}`, and 0 for non-realizable states.
pub fn coeff_no_bottom_returns(c: &Connection) -> Result<Laurent, CoeffError> {
    coeff_no_bottom_returns_with(c, PLANE_ORDER)
}

pub fn coeff_no_bottom_returns_with(c: &Connection, order: PlaneOrder) -> Result<Laurent, CoeffError> {
    if !c.is_catalan() {
        return Err(StateError::NotCatalan(c.n_top(), c.n_bottom()).into());
    }
    if c.has_bottom_returns() {
        return Err(StateError::HasBottomReturns.into());
    }
    if !c.is_realizable()? {
        return Ok(Laurent::zero());
    }
    let q = tree_from_state_with(c, order)?.plucking().star_normalize();
    let shift = 2 * beta(c)? as i64 - (c.m() * c.n()) as i64;
    Ok(q.substitute_power(-4).expect("nonzero exponent").monomial_shift(shift))
}

/// First removable arc with its factor `A^{b-a}` and `C \ c`.
pub fn reduce_removable(c: &Connection) -> Result<Option<(Laurent, Arc, Connection)>, StateError> {
    if c.m() == 0 {
        return Ok(None);
    }
    let Some(arc) = c.find_removable_arcs().into_iter().next() else { return Ok(None) };
    let (a, b) = c.extended_labels(&arc)?;
    Ok(Some((Laurent::monomial(1, b - a), arc, c.remove_arc(&arc)?)))
}

/// Factors of `C` cut along every interior saturated horizontal line, top to
/// bottom. Their vertical product is `C`.
pub fn vertical_decompose(c: &Connection) -> Result<Vec<Connection>, StateError> {
    let interior = c.saturating_lines().into_iter().find(|&i| 0 < i && i < c.m());
    match interior {
        None => Ok(vec![c.clone()]),
        Some(i) => {
            let (top, bottom) = c.split_at(i)?;
            let mut out = vertical_decompose(&top)?;
            out.extend(vertical_decompose(&bottom)?);
            Ok(out)
        }
    }
}

/// Arcs whose ends fill the cyclic run of `len` positions from `start`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalFamily {
    pub start: usize,
    pub len: usize,
    pub arcs: Vec<Arc>,
}

impl LocalFamily {
    pub fn size(&self) -> usize {
        self.len / 2
    }

    fn positions(&self, total: usize) -> Vec<usize> {
        (0..self.len).map(|k| (self.start + k) % total).collect()
    }
}

impl fmt::Display for LocalFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let arcs: Vec<String> = self.arcs.iter().map(arc_to_string).collect();
        write!(f, "{{{}}}", arcs.join(", "))
    }
}

/// Cyclic runs closed under the matching with `1 < |Λ| < #arcs`, smallest
/// first, then by starting position.
pub fn local_families(c: &Connection) -> Vec<LocalFamily> {
    let total = c.len();
    let partner = c.partner_positions();
    let mut out = Vec::new();
    for len in (4..total).step_by(2) {
        for start in 0..total {
            let inside = |p: usize| (p + total - start) % total < len;
            let closed = (0..len).all(|k| inside(partner[(start + k) % total] as usize));
            if !closed {
                continue;
            }
            let mut arcs = Vec::new();
            for k in 0..len {
                let p = (start + k) % total;
                let q = partner[p] as usize;
                if (p + total - start) % total < (q + total - start) % total {
                    arcs.push((c.point(p), c.point(q)));
                }
            }
            out.push(LocalFamily { start, len, arcs });
        }
    }
    out
}

/// How condition ii) of a vertically factorizing family reads its labels.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReturnLabels {
    /// Only left and right returns carry a label `j` in `1..m`.
    SideOnly,
    /// Every arc joining neighbouring boundary points carries its extended
    /// label, so top returns read `j <= 0` and bottom returns `j >= m`.
    Extended,
}

/// Frozen by the exhaustive oracle check: the side-only reading admits
/// families with top or bottom returns for which the product rule fails.
pub const RETURN_LABELS: ReturnLabels = ReturnLabels::Extended;

/// Both conditions of a vertically factorizing family.
pub fn vertically_factorizes(c: &Connection, family: &LocalFamily) -> bool {
    vertically_factorizes_with(c, family, RETURN_LABELS)
}

pub fn vertically_factorizes_with(c: &Connection, family: &LocalFamily, labels: ReturnLabels) -> bool {
    let total = c.len();
    let positions: HashSet<usize> = family.positions(total).into_iter().collect();
    let touches = |s: Side| positions.iter().any(|&p| c.point(p).side == s);
    if touches(Side::Left) && touches(Side::Right) {
        return false;
    }
    let m = c.m() as i64;
    let mut inside = Vec::new();
    let mut outside = Vec::new();
    for (p, q) in c.arc_positions() {
        let Some(j) = c.adjacent_label(p, q) else { continue };
        let side_return = {
            let (a, b) = (c.point(p), c.point(q));
            a.side == b.side && matches!(a.side, Side::Left | Side::Right)
        };
        if labels == ReturnLabels::SideOnly && !side_return {
            continue;
        }
        if positions.contains(&p) {
            inside.push(j);
        } else {
            outside.push(j);
        }
    }
    let (Some(&lo), Some(&hi)) = (inside.iter().min(), inside.iter().max()) else { return true };
    if lo < 0 || hi > m {
        return false;
    }
    outside.iter().all(|&j| j <= lo || j >= hi)
}

/// `(C_{T(Λ)}, C_Λ)`.
pub fn vertical_factor_parts(c: &Connection, family: &LocalFamily) -> Result<(Connection, Connection), StateError> {
    let total = c.len();
    let pos = family.positions(total);
    let lambda = family.size();
    let mut rainbow = c.partner_positions().to_vec();
    for k in 0..family.len {
        rainbow[pos[k]] = pos[family.len - 1 - k] as u32;
    }
    let c_lambda = Connection::from_partner(c.m(), c.n_top(), c.n_bottom(), rainbow)?;
    let index_in = |p: usize| (p + total - family.start) % total;
    let mut arcs = Vec::new();
    for (k, &p) in pos.iter().enumerate() {
        let q = c.partner_pos(p);
        let kq = index_in(q);
        if k < kq {
            arcs.push((BoundaryPoint::top(k + 1), BoundaryPoint::top(kq + 1)));
        }
    }
    for i in 1..=lambda {
        arcs.push((BoundaryPoint::bottom(i), BoundaryPoint::left(lambda + 1 - i)));
        arcs.push((BoundaryPoint::bottom(lambda + i), BoundaryPoint::right(i)));
    }
    let c_tree = Connection::catalan(lambda, 2 * lambda, &arcs)?;
    Ok((c_tree, c_lambda))
}

/// First family that vertically factorizes `C` and is not already a rainbow.
pub fn find_vertical_factorization(c: &Connection) -> Option<LocalFamily> {
    vertical_factorizations(c).into_iter().next()
}

pub fn vertical_factorizations(c: &Connection) -> Vec<LocalFamily> {
    if !c.is_catalan() {
        return Vec::new();
    }
    local_families(c)
        .into_iter()
        .filter(|f| vertically_factorizes(c, f))
        .filter(|f| vertical_factor_parts(c, f).map(|(_, cl)| &cl != c).unwrap_or(false))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepKind {
    Realizability,
    TreeFormula,
    RotatePi,
    VerticalDecompose,
    RemovableArc,
    VerticalFactor,
    Oracle,
}

impl fmt::Display for StepKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StepKind::Realizability => "realizability",
            StepKind::TreeFormula => "tree-formula",
            StepKind::RotatePi => "rotate-pi",
            StepKind::VerticalDecompose => "vertical-decompose",
            StepKind::RemovableArc => "removable-arc",
            StepKind::VerticalFactor => "vertical-factor",
            StepKind::Oracle => "oracle",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Step {
    pub kind: StepKind,
    pub detail: String,
    pub factor: Laurent,
    /// How `factor` itself was obtained, for side branches.
    pub sub: Option<ReductionTrace>,
}

/// The product of the step factors is the coefficient; the last step holds
/// the terminal value.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ReductionTrace {
    pub steps: Vec<Step>,
}

impl ReductionTrace {
    pub fn product(&self) -> Laurent {
        self.steps.iter().map(|s| &s.factor).product()
    }

    pub fn kinds(&self) -> Vec<StepKind> {
        self.steps.iter().map(|s| s.kind).collect()
    }

    /// Whether a step of this kind occurs anywhere, side branches included.
    pub fn contains(&self, kind: StepKind) -> bool {
        self.steps.iter().any(|s| s.kind == kind || s.sub.as_ref().is_some_and(|t| t.contains(kind)))
    }

    fn render_into(&self, prefix: &str, indent: usize, out: &mut Vec<String>) {
        for (k, s) in self.steps.iter().enumerate() {
            let label = format!("{prefix}{}", k + 1);
            out.push(format!("{}step {label}: {} {} factor={}", "  ".repeat(indent), s.kind, s.detail, s.factor));
            if let Some(sub) = &s.sub {
                sub.render_into(&format!("{label}."), indent + 1, out);
            }
        }
    }

    pub fn lines(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.render_into("", 0, &mut out);
        out
    }
}

impl fmt::Display for ReductionTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for line in self.lines() {
            writeln!(f, "{line}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Auto,
    Tree,
    Oracle,
}

pub struct Engine {
    oracle: Oracle,
}

impl Default for Engine {
    fn default() -> Self {
        Self::new(Oracle::from_env())
    }
}

impl Engine {
    pub fn new(oracle: Oracle) -> Self {
        Self { oracle }
    }

    pub fn oracle(&self) -> &Oracle {
        &self.oracle
    }

    pub fn coefficient(&self, c: &Connection) -> Result<(Laurent, ReductionTrace), CoeffError> {
        self.coefficient_with(c, Method::Auto)
    }

    pub fn coefficient_with(&self, c: &Connection, method: Method) -> Result<(Laurent, ReductionTrace), CoeffError> {
        if !c.is_catalan() {
            return Err(StateError::NotCatalan(c.n_top(), c.n_bottom()).into());
        }
        let mut trace = ReductionTrace::default();
        match method {
            Method::Auto => self.run(c, &mut trace, &mut Vec::new())?,
            Method::Oracle => {
                let v = self.oracle.coefficient(c)?;
                trace.steps.push(Step { kind: StepKind::Oracle, detail: c.to_string(), factor: v, sub: None });
            }
            Method::Tree => {
                let target = if !c.has_bottom_returns() {
                    c.clone()
                } else if !c.has_top_returns() {
                    trace.steps.push(step(StepKind::RotatePi, c.to_string(), Laurent::one()));
                    c.rotate_pi()
                } else {
                    return Err(CoeffError::TreeNotApplicable);
                };
                let v = coeff_no_bottom_returns(&target)?;
                trace.steps.push(step(StepKind::TreeFormula, target.to_string(), v));
            }
        }
        Ok((trace.product(), trace))
    }

    /// Value only.
    pub fn value(&self, c: &Connection) -> Result<Laurent, CoeffError> {
        Ok(self.coefficient(c)?.0)
    }

    fn run(&self, c: &Connection, trace: &mut ReductionTrace, chain: &mut Vec<Connection>) -> Result<(), CoeffError> {
        if !c.is_realizable()? {
            trace.steps.push(step(StepKind::Realizability, format!("{c} is not realizable"), Laurent::zero()));
            return Ok(());
        }
        if !c.has_bottom_returns() {
            let v = coeff_no_bottom_returns(c)?;
            trace.steps.push(step(StepKind::TreeFormula, c.to_string(), v));
            return Ok(());
        }
        if !c.has_top_returns() {
            trace.steps.push(step(StepKind::RotatePi, c.to_string(), Laurent::one()));
            return self.run(&c.rotate_pi(), trace, chain);
        }
        if let Some(i) = c.saturating_lines().into_iter().find(|&i| 0 < i && i < c.m()) {
            let (top, bottom) = c.split_at(i)?;
            let mut sub = ReductionTrace::default();
            self.run(&top, &mut sub, chain)?;
            trace.steps.push(Step {
                kind: StepKind::VerticalDecompose,
                detail: format!("line {i}: top {top}, bottom {bottom}"),
                factor: sub.product(),
                sub: Some(sub),
            });
            return self.run(&bottom, trace, chain);
        }
        if let Some((factor, arc, rest)) = reduce_removable(c)? {
            let (a, b) = c.extended_labels(&arc)?;
            trace.steps.push(step(
                StepKind::RemovableArc,
                format!("{} (a={a}, b={b}) -> {rest}", arc_to_string(&arc)),
                factor,
            ));
            return self.run(&rest, trace, chain);
        }
        chain.push(c.clone());
        for family in vertical_factorizations(c) {
            let (c_tree, c_lambda) = vertical_factor_parts(c, &family)?;
            if chain.contains(&c_lambda) {
                continue;
            }
            let mut sub = ReductionTrace::default();
            self.run(&c_tree, &mut sub, chain)?;
            trace.steps.push(Step {
                kind: StepKind::VerticalFactor,
                detail: format!("family {family}: C_T {c_tree}, C_Lambda {c_lambda}"),
                factor: sub.product(),
                sub: Some(sub),
            });
            let result = self.run(&c_lambda, trace, chain);
            chain.pop();
            return result;
        }
        chain.pop();
        if !self.oracle.within_budget(c.m(), c.n()) {
            return Err(CoeffError::Unreachable { m: c.m(), n: c.n(), budget: self.oracle.budget_bits() });
        }
        let v = self.oracle.coefficient(c)?;
        trace.steps.push(step(StepKind::Oracle, c.to_string(), v));
        Ok(())
    }
}

fn step(kind: StepKind, detail: String, factor: Laurent) -> Step {
    Step { kind, detail, factor, sub: None }
}

/// Coefficient with the default engine.
pub fn coefficient(c: &Connection) -> Result<(Laurent, ReductionTrace), CoeffError> {
    Engine::default().coefficient(c)
}

/// Parameters of the two closed forms for `n = 3`, with `x = A^{-2} + A^2`
/// and `y = A^{-4} + 1 + A^4 = x^2 - 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Lm3Shape {
    /// `A^a x^b y^c`.
    Decomposable { a: i64, b: u32, c: u32 },
    /// `A^a x^b (x^{2c} - 1) / y` with `b <= 1`, `c >= 1`.
    Indecomposable { a: i64, b: u32, c: u32 },
}

fn x_poly() -> Laurent {
    Laurent::from_coeffs(-2, &[1, 0, 0, 0, 1])
}

fn y_poly() -> Laurent {
    Laurent::from_coeffs(-4, &[1, 0, 0, 0, 1, 0, 0, 0, 1])
}

impl Lm3Shape {
    pub fn evaluate(&self) -> Laurent {
        let x = x_poly();
        match *self {
            Lm3Shape::Decomposable { a, b, c } => (&x.pow(b) * &y_poly().pow(c)).monomial_shift(a),
            Lm3Shape::Indecomposable { a, b, c } => {
                let num = &x.pow(2 * c) - &Laurent::one();
                let g = num.div_exact(&y_poly()).expect("x^2 - 1 divides x^{2c} - 1");
                (&x.pow(b) * &g).monomial_shift(a)
            }
        }
    }
}

impl fmt::Display for Lm3Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Lm3Shape::Decomposable { a, b, c } => write!(f, "decomposable a={a} b={b} c={c}"),
            Lm3Shape::Indecomposable { a, b, c } => write!(f, "indecomposable a={a} b={b} c={c}"),
        }
    }
}

/// `(a, b, c)` with `p = A^a x^b y^c`, if any.
pub fn fit_decomposable(p: &Laurent) -> Option<(i64, u32, u32)> {
    if p.is_zero() {
        return None;
    }
    let (x, y) = (x_poly(), y_poly());
    let mut rest = p.clone();
    let mut c = 0;
    while let Ok(r) = rest.div_exact(&y) {
        rest = r;
        c += 1;
    }
    let mut b = 0;
    while let Ok(r) = rest.div_exact(&x) {
        rest = r;
        b += 1;
    }
    let (coef, a) = rest.as_monomial()?;
    (coef == &1.into()).then_some((a, b, c))
}

/// `(a, b, c)` with `p = A^a x^b (x^{2c} - 1)/y`, `b <= 1`, `c >= 1`, if any.
pub fn fit_indecomposable(p: &Laurent) -> Option<(i64, u32, u32)> {
    let (lo, hi) = (p.min_degree()?, p.max_degree()?);
    let span = hi - lo;
    if span % 4 != 0 {
        return None;
    }
    let b = ((span / 4) % 2) as u32;
    let c = ((span - 4 * b as i64) / 8 + 1) as u32;
    let a = lo + 2 * b as i64 + 4 * (c as i64 - 1);
    let shape = Lm3Shape::Indecomposable { a, b, c };
    (shape.evaluate() == *p).then_some((a, b, c))
}

/// Closed-form parameters for a realizable state of `Cat(m,3)`.
pub fn lm3_closed_form(engine: &Engine, c: &Connection) -> Result<Lm3Shape, CoeffError> {
    if !c.is_catalan() || c.n() != 3 {
        return Err(CoeffError::Invariant(format!("{c} is not a state of Cat(m,3)")));
    }
    if !c.is_realizable()? {
        return Err(StateError::NotRealizable.into());
    }
    let value = engine.value(c)?;
    let shape = if c.is_vertically_decomposable().is_some() {
        fit_decomposable(&value).map(|(a, b, c)| Lm3Shape::Decomposable { a, b, c })
    } else {
        fit_indecomposable(&value).map(|(a, b, c)| Lm3Shape::Indecomposable { a, b, c })
    };
    shape.ok_or_else(|| CoeffError::Invariant(format!("{c} has coefficient {value} outside its closed form")))
}
