//! Atomic graphs: normality, scaling order, molecules, the doubly connected
//! property, graph size and brute-force evaluation against a resolvent.
//!
//! Atoms are numbered with internal atoms first (`0..n_internal`) followed by
//! external atoms. External atom `i` is bound to `bindings[i]` at evaluation.

mod format;
mod lemma;
mod normalize;
mod structure;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::propagators::PropagatorSet;
use crate::spectral::ResolventContext;

pub use lemma::{lemma21_graphs, ExpansionTerm};
pub use normalize::normalize;
pub use structure::{is_doubly_connected, molecular_graph, molecules, DoublyConnected, MolEdge, MolecularGraph, MoleculeDecomposition, DOUBLY_CONNECTED_CAP};

pub const DEFAULT_NORMAL_CAP: usize = 64;
pub const EVALUATION_CAP: u128 = 100_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EdgeKind {
    GBlue,
    GRed,
    Waved,
    WavedPlus,
    WavedMinus,
    Diffusive,
    /// Renormalized diffusive edge of the given order. Has no evaluator.
    LabeledDiffusive(u32),
    Free,
    Ghost,
    Dotted,
    CrossDotted,
}

impl EdgeKind {
    pub fn is_solid(self) -> bool {
        matches!(self, EdgeKind::GBlue | EdgeKind::GRed)
    }

    pub fn is_waved(self) -> bool {
        matches!(self, EdgeKind::Waved | EdgeKind::WavedPlus | EdgeKind::WavedMinus)
    }

    pub fn is_diffusive(self) -> bool {
        matches!(self, EdgeKind::Diffusive | EdgeKind::LabeledDiffusive(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WeightKind {
    RegularBlue,
    RegularRed,
    LightBlue,
    LightRed,
}

impl WeightKind {
    pub fn is_light(self) -> bool {
        matches!(self, WeightKind::LightBlue | WeightKind::LightRed)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LabelKind {
    P,
    Q,
}

/// A `P_x` or `Q_x` tag on a solid edge or weight.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Label {
    pub kind: LabelKind,
    pub atom: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Edge {
    pub kind: EdgeKind,
    pub from: usize,
    pub to: usize,
    pub label: Option<Label>,
}

impl Edge {
    fn joins(&self, a: usize, b: usize) -> bool {
        (self.from == a && self.to == b) || (self.from == b && self.to == a)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Weight {
    pub kind: WeightKind,
    pub atom: usize,
    pub label: Option<Label>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AtomicGraph {
    n_internal: usize,
    n_external: usize,
    edges: Vec<Edge>,
    weights: Vec<Weight>,
    coefficient: Complex64,
}

impl AtomicGraph {
    pub fn new(n_internal: usize, n_external: usize) -> Self {
        AtomicGraph {
            n_internal,
            n_external,
            edges: Vec::new(),
            weights: Vec::new(),
            coefficient: Complex64::new(1.0, 0.0),
        }
    }

    pub fn internal(&self, i: usize) -> usize {
        debug_assert!(i < self.n_internal);
        i
    }

    pub fn external(&self, i: usize) -> usize {
        debug_assert!(i < self.n_external);
        self.n_internal + i
    }

    pub fn edge(mut self, kind: EdgeKind, from: usize, to: usize) -> Self {
        self.edges.push(Edge { kind, from, to, label: None });
        self
    }

    pub fn labeled_edge(mut self, kind: EdgeKind, from: usize, to: usize, label: Label) -> Self {
        self.edges.push(Edge { kind, from, to, label: Some(label) });
        self
    }

    pub fn weight(mut self, kind: WeightKind, atom: usize) -> Self {
        self.weights.push(Weight { kind, atom, label: None });
        self
    }

    pub fn labeled_weight(mut self, kind: WeightKind, atom: usize, label: Label) -> Self {
        self.weights.push(Weight { kind, atom, label: Some(label) });
        self
    }

    pub fn with_coefficient(mut self, c: Complex64) -> Self {
        self.coefficient = c;
        self
    }

    pub fn n_internal(&self) -> usize {
        self.n_internal
    }

    pub fn n_external(&self) -> usize {
        self.n_external
    }

    pub fn n_atoms(&self) -> usize {
        self.n_internal + self.n_external
    }

    pub fn is_internal(&self, atom: usize) -> bool {
        atom < self.n_internal
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn weights(&self) -> &[Weight] {
        &self.weights
    }

    pub fn coefficient(&self) -> Complex64 {
        self.coefficient
    }

    pub fn has_labels(&self) -> bool {
        self.edges.iter().any(|e| e.label.is_some()) || self.weights.iter().any(|w| w.label.is_some())
    }

    /// Endpoint and label ids reference existing atoms; dotted edges are unique per pair.
    pub fn validate(&self) -> Result<()> {
        let n = self.n_atoms();
        let bad = |a: usize| a >= n;
        for e in &self.edges {
            if bad(e.from) || bad(e.to) || e.label.is_some_and(|l| bad(l.atom)) {
                return Err(Error::Contract(format!("edge {e:?} references a missing atom ({n} atoms)")));
            }
            if e.label.is_some() && !e.kind.is_solid() {
                return Err(Error::Contract(format!("only solid edges carry labels, got {e:?}")));
            }
        }
        for w in &self.weights {
            if bad(w.atom) || w.label.is_some_and(|l| bad(l.atom)) {
                return Err(Error::Contract(format!("weight {w:?} references a missing atom ({n} atoms)")));
            }
        }
        let dots: Vec<&Edge> = self
            .edges
            .iter()
            .filter(|e| matches!(e.kind, EdgeKind::Dotted | EdgeKind::CrossDotted))
            .collect();
        for (i, e) in dots.iter().enumerate() {
            if dots[i + 1..].iter().any(|f| f.joins(e.from, e.to)) {
                return Err(Error::Contract(format!(
                    "more than one dotted edge between atoms {} and {}",
                    e.from, e.to
                )));
            }
        }
        Ok(())
    }

    fn count(&self, pred: impl Fn(EdgeKind) -> bool) -> usize {
        self.edges.iter().filter(|e| pred(e.kind)).count()
    }
}

/// A failed normality condition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    TooLarge { atoms: usize, edges: usize, cap: usize },
    Disconnected { atom: usize },
    InternalDotted { from: usize, to: usize },
    UnpairedSolid { from: usize, to: usize },
    UnpairedCrossDotted { from: usize, to: usize },
    DiagonalSolid { atom: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Normality {
    pub violations: Vec<Violation>,
}

impl Normality {
    pub fn is_normal(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn is_normal(g: &AtomicGraph) -> Normality {
    is_normal_with_cap(g, DEFAULT_NORMAL_CAP)
}

pub fn is_normal_with_cap(g: &AtomicGraph, cap: usize) -> Normality {
    let mut violations = Vec::new();
    if g.n_atoms() > cap || g.edges.len() > cap {
        violations.push(Violation::TooLarge { atoms: g.n_atoms(), edges: g.edges.len(), cap });
    }

    let mut uf = structure::UnionFind::new(g.n_atoms());
    for e in &g.edges {
        if e.kind.is_waved() || e.kind.is_diffusive() || e.kind == EdgeKind::Dotted {
            uf.union(e.from, e.to);
        }
    }
    if g.n_external > 0 {
        for x in 0..g.n_internal {
            if !(g.n_internal..g.n_atoms()).any(|b| uf.find(b) == uf.find(x)) {
                violations.push(Violation::Disconnected { atom: x });
            }
        }
    } else if g.n_internal > 0 {
        let root = uf.find(0);
        for x in 1..g.n_internal {
            if uf.find(x) != root {
                violations.push(Violation::Disconnected { atom: x });
            }
        }
    }

    for e in &g.edges {
        if e.kind == EdgeKind::Dotted && g.is_internal(e.from) && g.is_internal(e.to) {
            violations.push(Violation::InternalDotted { from: e.from, to: e.to });
        }
    }

    let pairs = |pred: &dyn Fn(EdgeKind) -> bool| -> Vec<(usize, usize)> {
        let mut v: Vec<(usize, usize)> = g
            .edges
            .iter()
            .filter(|e| pred(e.kind) && e.from != e.to)
            .map(|e| (e.from.min(e.to), e.from.max(e.to)))
            .collect();
        v.sort_unstable();
        v.dedup();
        v
    };
    let solid = pairs(&|k| k.is_solid());
    let crossed = pairs(&|k| k == EdgeKind::CrossDotted);
    for e in &g.edges {
        if e.kind.is_solid() && e.from == e.to {
            violations.push(Violation::DiagonalSolid { atom: e.from });
        }
    }
    for &(a, b) in &solid {
        if crossed.binary_search(&(a, b)).is_err() {
            violations.push(Violation::UnpairedSolid { from: a, to: b });
        }
    }
    for &(a, b) in &crossed {
        if solid.binary_search(&(a, b)).is_err() {
            violations.push(Violation::UnpairedCrossDotted { from: a, to: b });
        }
    }
    Normality { violations }
}

fn require_normal(g: &AtomicGraph) -> Result<()> {
    g.validate()?;
    let n = is_normal(g);
    if n.is_normal() {
        Ok(())
    } else {
        Err(Error::Contract(format!("graph is not normal: {:?}", n.violations)))
    }
}

/// Scaling order of a normal graph. Ghost and cross-dotted edges count zero;
/// dotted edges count only when they pin an internal atom.
pub fn scaling_order(g: &AtomicGraph) -> Result<i64> {
    require_normal(g)?;
    let solid = g.count(EdgeKind::is_solid) as i64;
    let light = g.weights.iter().filter(|w| w.kind.is_light()).count() as i64;
    let waved = g.count(EdgeKind::is_waved) as i64;
    let free = g.count(|k| k == EdgeKind::Free) as i64;
    let diffusive = g.count(|k| k == EdgeKind::Diffusive) as i64;
    let labeled: i64 = g
        .edges
        .iter()
        .filter_map(|e| match e.kind {
            EdgeKind::LabeledDiffusive(k) => Some(k as i64),
            _ => None,
        })
        .sum();
    let dotted = g
        .edges
        .iter()
        .filter(|e| e.kind == EdgeKind::Dotted && (g.is_internal(e.from) || g.is_internal(e.to)))
        .count() as i64;
    Ok(solid + light + 2 * waved + 2 * free + 2 * diffusive + labeled - 2 * (g.n_internal as i64 - dotted))
}

/// The exponent `d_eta` governing `W^{-ord d_eta}`.
pub fn d_eta(width: f64, side: f64, eta: f64, dim: usize, delta0: f64) -> Result<f64> {
    let d = dim as f64;
    let upper = (width / side).powi(2);
    let lower = width.powf(-5.0 + delta0) * side.powf(5.0 - d);
    if eta >= upper {
        Ok(d / 2.0)
    } else if eta >= lower {
        Ok(delta0 / 2.0)
    } else {
        Err(Error::Range(format!("eta = {eta:e} is below W^(-5+delta0) L^(5-d) = {lower:e}")))
    }
}

/// `size = (L^2/W^2)^{#ghost} W^{-ord d_eta}`.
pub fn graph_size(g: &AtomicGraph, width: f64, side: f64, eta: f64, dim: usize, delta0: f64) -> Result<f64> {
    let ord = scaling_order(g)?;
    let de = d_eta(width, side, eta, dim, delta0)?;
    let ghosts = g.count(|k| k == EdgeKind::Ghost) as i32;
    Ok((side * side / (width * width)).powi(ghosts) * width.powf(-(ord as f64) * de))
}

/// Brute-force value of a label-free graph with external atoms bound to sites.
pub fn evaluate(g: &AtomicGraph, ctx: &ResolventContext, props: &PropagatorSet, bindings: &[usize]) -> Result<Complex64> {
    g.validate()?;
    if g.has_labels() {
        return Err(Error::Unsupported(
            "P/Q labelled factors are partial expectations with no closed numerical form".into(),
        ));
    }
    if let Some(e) = g.edges.iter().find(|e| matches!(e.kind, EdgeKind::LabeledDiffusive(_))) {
        return Err(Error::Unsupported(format!("no evaluator for edge {:?}", e.kind)));
    }
    if bindings.len() != g.n_external {
        return Err(Error::Parameter(format!(
            "{} bindings for {} external atoms",
            bindings.len(),
            g.n_external
        )));
    }
    let n = ctx.dim();
    if let Some(b) = bindings.iter().find(|&&b| b >= n) {
        return Err(Error::Parameter(format!("binding {b} outside {n} sites")));
    }
    if props.z() != ctx.z() || props.profile().lattice() != ctx.profile().lattice() {
        return Err(Error::Contract("propagators and resolvent disagree on z or lattice".into()));
    }
    let terms = (n as u128).checked_pow(g.n_internal as u32).unwrap_or(u128::MAX);
    if terms > EVALUATION_CAP {
        return Err(Error::capacity("graph evaluation terms", terms, EVALUATION_CAP));
    }

    let free = Complex64::new(1.0 / (n as f64 * ctx.eta()), 0.0);
    let side = ctx.profile().lattice().side() as f64;
    let ghost = Complex64::new((props.profile().width() / side).powi(2), 0.0);
    let m = ctx.m();
    let gm = ctx.g();

    let value_at = |sites: &[usize]| -> Complex64 {
        let mut acc = Complex64::new(1.0, 0.0);
        for e in &g.edges {
            let (x, y) = (sites[e.from], sites[e.to]);
            let f = match e.kind {
                EdgeKind::GBlue => gm[(x, y)],
                EdgeKind::GRed => gm[(x, y)].conj(),
                EdgeKind::Waved => Complex64::new(props.profile().s(x, y), 0.0),
                EdgeKind::WavedPlus => props.s_plus(x, y),
                EdgeKind::WavedMinus => props.s_minus(x, y),
                EdgeKind::Diffusive => Complex64::new(props.theta_circ(x, y), 0.0),
                EdgeKind::Free => free,
                EdgeKind::Ghost => ghost,
                EdgeKind::Dotted => Complex64::new((x == y) as u8 as f64, 0.0),
                EdgeKind::CrossDotted => Complex64::new((x != y) as u8 as f64, 0.0),
                EdgeKind::LabeledDiffusive(_) => unreachable!(),
            };
            acc *= f;
        }
        for w in &g.weights {
            let x = sites[w.atom];
            acc *= match w.kind {
                WeightKind::RegularBlue => gm[(x, x)],
                WeightKind::RegularRed => gm[(x, x)].conj(),
                WeightKind::LightBlue => gm[(x, x)] - m,
                WeightKind::LightRed => (gm[(x, x)] - m).conj(),
            };
        }
        acc
    };

    let k = g.n_internal;
    let sum_over_rest = |first: Option<usize>| -> Complex64 {
        let mut sites = vec![0usize; g.n_atoms()];
        sites[k..].copy_from_slice(bindings);
        let start = if first.is_some() { 1 } else { 0 };
        if let Some(f) = first {
            sites[0] = f;
        }
        let mut total = Complex64::default();
        loop {
            total += value_at(&sites);
            let mut i = start;
            loop {
                if i >= k {
                    return total;
                }
                sites[i] += 1;
                if sites[i] < n {
                    break;
                }
                sites[i] = 0;
                i += 1;
            }
        }
    };

    let sum = if k == 0 {
        sum_over_rest(None)
    } else {
        let partial: Vec<Complex64> = (0..n).into_par_iter().map(|x| sum_over_rest(Some(x))).collect();
        partial.iter().sum()
    };
    Ok(g.coefficient * sum)
}
