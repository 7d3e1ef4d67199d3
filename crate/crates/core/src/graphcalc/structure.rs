use crate::error::{Error, Result};

use super::{AtomicGraph, EdgeKind};

pub const DOUBLY_CONNECTED_CAP: usize = 12;

#[derive(Debug, Clone)]
pub(crate) struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns false when already joined.
    pub(crate) fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra.max(rb)] = ra.min(rb);
        true
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MoleculeDecomposition {
    /// Molecule id of each atom, numbered by first appearance.
    pub partition: Vec<usize>,
    /// Whether each molecule contains an external atom.
    pub external: Vec<bool>,
}

impl MoleculeDecomposition {
    pub fn count(&self) -> usize {
        self.external.len()
    }

    pub fn members(&self, molecule: usize) -> Vec<usize> {
        (0..self.partition.len()).filter(|&a| self.partition[a] == molecule).collect()
    }
}

/// Atoms joined by waved or dotted paths share a molecule.
pub fn molecules(g: &AtomicGraph) -> MoleculeDecomposition {
    let mut uf = UnionFind::new(g.n_atoms());
    for e in g.edges() {
        if e.kind.is_waved() || e.kind == EdgeKind::Dotted {
            uf.union(e.from, e.to);
        }
    }
    let mut ids = vec![usize::MAX; g.n_atoms()];
    let mut partition = Vec::with_capacity(g.n_atoms());
    let mut external = Vec::new();
    for a in 0..g.n_atoms() {
        let r = uf.find(a);
        if ids[r] == usize::MAX {
            ids[r] = external.len();
            external.push(false);
        }
        partition.push(ids[r]);
        if !g.is_internal(a) {
            external[ids[r]] = true;
        }
    }
    MoleculeDecomposition { partition, external }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MolEdge {
    pub kind: EdgeKind,
    pub from: usize,
    pub to: usize,
    /// Index of the originating edge in the atomic graph.
    pub source: usize,
}

/// Quotient multigraph over molecules.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MolecularGraph {
    pub molecules: MoleculeDecomposition,
    pub edges: Vec<MolEdge>,
}

impl MolecularGraph {
    pub fn ghost_edges(&self) -> impl Iterator<Item = &MolEdge> {
        self.edges.iter().filter(|e| e.kind == EdgeKind::Ghost)
    }
}

pub fn molecular_graph(g: &AtomicGraph) -> MolecularGraph {
    let mols = molecules(g);
    let edges = g
        .edges()
        .iter()
        .enumerate()
        .filter(|(_, e)| {
            e.kind.is_solid() || e.kind.is_diffusive() || matches!(e.kind, EdgeKind::Free | EdgeKind::Ghost)
        })
        .map(|(i, e)| MolEdge {
            kind: e.kind,
            from: mols.partition[e.from],
            to: mols.partition[e.to],
            source: i,
        })
        .filter(|e| e.from != e.to)
        .collect();
    MolecularGraph { molecules: mols, edges }
}

/// Outcome of the doubly connected search; nets list atomic-graph edge indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DoublyConnected {
    pub holds: bool,
    pub black: Vec<usize>,
    pub blue: Vec<usize>,
}

fn spans(nodes: &[usize], edges: &[&MolEdge], chosen: impl Iterator<Item = usize>, index: &[usize]) -> bool {
    if nodes.len() <= 1 {
        return true;
    }
    let mut uf = UnionFind::new(nodes.len());
    let mut joined = 0;
    for i in chosen {
        let e = edges[i];
        if uf.union(index[e.from], index[e.to]) {
            joined += 1;
        }
    }
    joined == nodes.len() - 1
}

/// Searches for disjoint black (diffusive) and blue (blue solid, diffusive,
/// free, ghost) nets spanning the internal molecules.
pub fn is_doubly_connected(g: &AtomicGraph) -> Result<DoublyConnected> {
    g.validate()?;
    let mg = molecular_graph(g);
    let internal: Vec<usize> = (0..mg.molecules.count()).filter(|&m| !mg.molecules.external[m]).collect();
    let mut index = vec![usize::MAX; mg.molecules.count()];
    for (i, &m) in internal.iter().enumerate() {
        index[m] = i;
    }
    let inside = |e: &&MolEdge| !mg.molecules.external[e.from] && !mg.molecules.external[e.to];
    let diffusive: Vec<&MolEdge> = mg.edges.iter().filter(inside).filter(|e| e.kind.is_diffusive()).collect();
    let blue_only: Vec<&MolEdge> = mg
        .edges
        .iter()
        .filter(inside)
        .filter(|e| matches!(e.kind, EdgeKind::GBlue | EdgeKind::Free | EdgeKind::Ghost))
        .collect();
    let total = diffusive.len() + blue_only.len();
    if total > DOUBLY_CONNECTED_CAP {
        return Err(Error::capacity(
            "doubly connected candidate edges",
            total as u128,
            DOUBLY_CONNECTED_CAP as u128,
        ));
    }

    let all: Vec<&MolEdge> = diffusive.iter().chain(&blue_only).copied().collect();
    let nd = diffusive.len();
    for mask in 0u32..(1 << nd) {
        let black = (0..nd).filter(|i| mask >> i & 1 == 1);
        if !spans(&internal, &all, black, &index) {
            continue;
        }
        let blue = (0..all.len()).filter(|&i| i >= nd || mask >> i & 1 == 0);
        if spans(&internal, &all, blue.clone(), &index) {
            return Ok(DoublyConnected {
                holds: true,
                black: (0..nd).filter(|i| mask >> i & 1 == 1).map(|i| all[i].source).collect(),
                blue: blue.map(|i| all[i].source).collect(),
            });
        }
    }
    Ok(DoublyConnected { holds: false, black: Vec::new(), blue: Vec::new() })
}
