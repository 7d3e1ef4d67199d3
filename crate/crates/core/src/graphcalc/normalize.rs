use super::{AtomicGraph, Edge, EdgeKind, Weight, WeightKind};

fn has_pair(g: &AtomicGraph, kind: EdgeKind, a: usize, b: usize) -> bool {
    g.edges.iter().any(|e| e.kind == kind && e.joins(a, b))
}

/// Identifies internal atom `gone` with atom `keep` and drops `gone`.
fn merge(g: &AtomicGraph, keep: usize, gone: usize) -> AtomicGraph {
    let remap = |a: usize| {
        let a = if a == gone { keep } else { a };
        if a > gone {
            a - 1
        } else {
            a
        }
    };
    let mut out = AtomicGraph::new(g.n_internal - 1, g.n_external).with_coefficient(g.coefficient);
    out.edges = g
        .edges
        .iter()
        .map(|e| Edge {
            kind: e.kind,
            from: remap(e.from),
            to: remap(e.to),
            label: e.label.map(|mut l| {
                l.atom = remap(l.atom);
                l
            }),
        })
        .collect();
    out.weights = g
        .weights
        .iter()
        .map(|w| Weight {
            kind: w.kind,
            atom: remap(w.atom),
            label: w.label.map(|mut l| {
                l.atom = remap(l.atom);
                l
            }),
        })
        .collect();
    out
}

fn diagonal_weight(kind: EdgeKind) -> WeightKind {
    match kind {
        EdgeKind::GBlue => WeightKind::RegularBlue,
        _ => WeightKind::RegularRed,
    }
}

enum Step {
    Done(AtomicGraph),
    Zero,
    Replace(AtomicGraph),
    Split(AtomicGraph, AtomicGraph),
}

fn step(mut g: AtomicGraph) -> Step {
    // duplicate dotted or cross-dotted edges on one pair
    for i in 0..g.edges.len() {
        let e = g.edges[i];
        if !matches!(e.kind, EdgeKind::Dotted | EdgeKind::CrossDotted) {
            continue;
        }
        if e.from == e.to {
            if e.kind == EdgeKind::CrossDotted {
                return Step::Zero;
            }
            g.edges.remove(i);
            return Step::Replace(g);
        }
        for j in i + 1..g.edges.len() {
            let f = g.edges[j];
            if matches!(f.kind, EdgeKind::Dotted | EdgeKind::CrossDotted) && f.joins(e.from, e.to) {
                if f.kind != e.kind {
                    return Step::Zero;
                }
                g.edges.remove(j);
                return Step::Replace(g);
            }
        }
    }

    if let Some(e) = g
        .edges
        .iter()
        .find(|e| e.kind == EdgeKind::Dotted && g.is_internal(e.from) && g.is_internal(e.to))
        .copied()
    {
        let pos = g.edges.iter().position(|f| *f == e).unwrap();
        g.edges.remove(pos);
        return Step::Replace(merge(&g, e.from.min(e.to), e.from.max(e.to)));
    }

    for i in 0..g.edges.len() {
        let e = g.edges[i];
        if !e.kind.is_solid() {
            continue;
        }
        if e.from == e.to || has_pair(&g, EdgeKind::Dotted, e.from, e.to) {
            g.edges.remove(i);
            g.weights.push(Weight { kind: diagonal_weight(e.kind), atom: e.from, label: e.label });
            return Step::Replace(g);
        }
        if !has_pair(&g, EdgeKind::CrossDotted, e.from, e.to) {
            let mut off = g.clone();
            off.edges.push(Edge { kind: EdgeKind::CrossDotted, from: e.from, to: e.to, label: None });
            let mut on = g;
            on.edges.push(Edge { kind: EdgeKind::Dotted, from: e.from, to: e.to, label: None });
            return Step::Split(off, on);
        }
    }

    for i in 0..g.edges.len() {
        let e = g.edges[i];
        if e.kind == EdgeKind::CrossDotted && !g.edges.iter().any(|f| f.kind.is_solid() && f.joins(e.from, e.to)) {
            let mut without = g.clone();
            without.edges.remove(i);
            let mut on = g;
            on.edges[i].kind = EdgeKind::Dotted;
            on.coefficient = -on.coefficient;
            return Step::Split(without, on);
        }
    }
    Step::Done(g)
}

/// Rewrites a graph as a sum of graphs in which every solid edge is
/// off-diagonal and paired with a cross-dotted edge, diagonal resolvent
/// factors are weights, and no dotted edge joins two internal atoms.
pub fn normalize(g: &AtomicGraph) -> Vec<AtomicGraph> {
    let mut out = Vec::new();
    let mut stack = vec![g.clone()];
    while let Some(g) = stack.pop() {
        match step(g) {
            Step::Done(g) => out.push(g),
            Step::Zero => {}
            Step::Replace(g) => stack.push(g),
            Step::Split(a, b) => {
                stack.push(b);
                stack.push(a);
            }
        }
    }
    out
}
