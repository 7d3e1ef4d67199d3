use num_complex::Complex64;

use super::{AtomicGraph, EdgeKind, WeightKind};

/// A named sum of graphs sharing the external atoms `[a, b1, b2]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpansionTerm {
    pub name: &'static str,
    pub graphs: Vec<AtomicGraph>,
}

/// The explicit (non-Q) terms of the second order T-expansion at the
/// semicircle value `m`, in the order: leading diffusive term, zero mode,
/// and the two higher order graphs.
pub fn lemma21_graphs(m: Complex64) -> Vec<ExpansionTerm> {
    let zero_coeff = m.norm_sqr() / Complex64::new(0.0, 2.0);

    let leading = AtomicGraph::new(0, 3);
    let (a, b1, b2) = (leading.external(0), leading.external(1), leading.external(2));
    let leading = leading
        .edge(EdgeKind::Diffusive, a, b1)
        .edge(EdgeKind::GRed, b1, b2)
        .with_coefficient(m);

    let zero_plus = AtomicGraph::new(0, 3)
        .edge(EdgeKind::Free, b1, b2)
        .edge(EdgeKind::GBlue, b2, b1)
        .with_coefficient(zero_coeff);
    let zero_minus = AtomicGraph::new(0, 3)
        .edge(EdgeKind::Free, b1, b2)
        .edge(EdgeKind::GRed, b1, b2)
        .with_coefficient(-zero_coeff);

    let skeleton = AtomicGraph::new(2, 3);
    let (x, y) = (skeleton.internal(0), skeleton.internal(1));
    let (a, b1, b2) = (skeleton.external(0), skeleton.external(1), skeleton.external(2));
    let skeleton = skeleton
        .edge(EdgeKind::Diffusive, a, x)
        .edge(EdgeKind::Waved, x, y)
        .with_coefficient(m);
    let light_y = skeleton
        .clone()
        .weight(WeightKind::LightBlue, y)
        .edge(EdgeKind::GBlue, x, b1)
        .edge(EdgeKind::GRed, x, b2);
    let light_x = skeleton
        .weight(WeightKind::LightRed, x)
        .edge(EdgeKind::GBlue, y, b1)
        .edge(EdgeKind::GRed, y, b2);

    vec![
        ExpansionTerm { name: "leading", graphs: vec![leading] },
        ExpansionTerm { name: "zero_mode", graphs: vec![zero_plus, zero_minus] },
        ExpansionTerm { name: "higher_light_y", graphs: vec![light_y] },
        ExpansionTerm { name: "higher_light_x", graphs: vec![light_x] },
    ]
}
