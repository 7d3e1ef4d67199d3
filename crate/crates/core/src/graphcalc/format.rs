//! Line-oriented text form:
//!
//! ```text
//! atoms 2 3
//! edge diffusive 2 0
//! edge g-blue 0 3 Q 0
//! weight light-red 0
//! coeff 0.5 -1.25
//! ```

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};

use super::{AtomicGraph, Edge, EdgeKind, Label, LabelKind, Weight, WeightKind};

impl EdgeKind {
    pub fn token(self) -> String {
        match self {
            EdgeKind::GBlue => "g-blue".into(),
            EdgeKind::GRed => "g-red".into(),
            EdgeKind::Waved => "waved".into(),
            EdgeKind::WavedPlus => "waved-plus".into(),
            EdgeKind::WavedMinus => "waved-minus".into(),
            EdgeKind::Diffusive => "diffusive".into(),
            EdgeKind::LabeledDiffusive(k) => format!("labeled-diffusive:{k}"),
            EdgeKind::Free => "free".into(),
            EdgeKind::Ghost => "ghost".into(),
            EdgeKind::Dotted => "dotted".into(),
            EdgeKind::CrossDotted => "cross-dotted".into(),
        }
    }
}

impl FromStr for EdgeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "g-blue" => EdgeKind::GBlue,
            "g-red" => EdgeKind::GRed,
            "waved" => EdgeKind::Waved,
            "waved-plus" => EdgeKind::WavedPlus,
            "waved-minus" => EdgeKind::WavedMinus,
            "diffusive" => EdgeKind::Diffusive,
            "free" => EdgeKind::Free,
            "ghost" => EdgeKind::Ghost,
            "dotted" => EdgeKind::Dotted,
            "cross-dotted" => EdgeKind::CrossDotted,
            _ => match s.strip_prefix("labeled-diffusive:").map(str::parse) {
                Some(Ok(k)) => EdgeKind::LabeledDiffusive(k),
                _ => return Err(Error::Format(format!("unknown edge kind {s:?}"))),
            },
        })
    }
}

impl WeightKind {
    pub fn token(self) -> &'static str {
        match self {
            WeightKind::RegularBlue => "regular-blue",
            WeightKind::RegularRed => "regular-red",
            WeightKind::LightBlue => "light-blue",
            WeightKind::LightRed => "light-red",
        }
    }
}

impl FromStr for WeightKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "regular-blue" => WeightKind::RegularBlue,
            "regular-red" => WeightKind::RegularRed,
            "light-blue" => WeightKind::LightBlue,
            "light-red" => WeightKind::LightRed,
            _ => return Err(Error::Format(format!("unknown weight kind {s:?}"))),
        })
    }
}

fn write_label(f: &mut fmt::Formatter<'_>, label: Option<Label>) -> fmt::Result {
    match label {
        Some(Label { kind: LabelKind::P, atom }) => write!(f, " P {atom}"),
        Some(Label { kind: LabelKind::Q, atom }) => write!(f, " Q {atom}"),
        None => Ok(()),
    }
}

impl fmt::Display for AtomicGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "atoms {} {}", self.n_internal, self.n_external)?;
        for e in &self.edges {
            write!(f, "edge {} {} {}", e.kind.token(), e.from, e.to)?;
            write_label(f, e.label)?;
            writeln!(f)?;
        }
        for w in &self.weights {
            write!(f, "weight {} {}", w.kind.token(), w.atom)?;
            write_label(f, w.label)?;
            writeln!(f)?;
        }
        writeln!(f, "coeff {:?} {:?}", self.coefficient.re, self.coefficient.im)
    }
}

fn parse_num<T: FromStr>(tok: Option<&str>, line: usize) -> Result<T> {
    tok.and_then(|t| t.parse().ok())
        .ok_or_else(|| Error::Format(format!("line {line}: expected a number")))
}

fn parse_label(rest: &[&str], line: usize) -> Result<Option<Label>> {
    match rest {
        [] => Ok(None),
        [k, atom] => {
            let kind = match *k {
                "P" => LabelKind::P,
                "Q" => LabelKind::Q,
                _ => return Err(Error::Format(format!("line {line}: unknown label {k:?}"))),
            };
            Ok(Some(Label { kind, atom: parse_num(Some(atom), line)? }))
        }
        _ => Err(Error::Format(format!("line {line}: trailing tokens"))),
    }
}

impl FromStr for AtomicGraph {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut graph: Option<AtomicGraph> = None;
        let mut coeff = None;
        for (i, raw) in s.lines().enumerate() {
            let line = i + 1;
            let toks: Vec<&str> = raw.split_whitespace().collect();
            let Some(&head) = toks.first() else { continue };
            if head != "atoms" && graph.is_none() {
                return Err(Error::Format(format!("line {line}: expected the atoms header first")));
            }
            match head {
                "atoms" if toks.len() == 3 && graph.is_none() => {
                    graph = Some(AtomicGraph::new(parse_num(toks.get(1).copied(), line)?, parse_num(toks.get(2).copied(), line)?));
                }
                "edge" if toks.len() >= 4 => {
                    let e = Edge {
                        kind: toks[1].parse()?,
                        from: parse_num(Some(toks[2]), line)?,
                        to: parse_num(Some(toks[3]), line)?,
                        label: parse_label(&toks[4..], line)?,
                    };
                    graph.as_mut().unwrap().edges.push(e);
                }
                "weight" if toks.len() >= 3 => {
                    let w = Weight {
                        kind: toks[1].parse()?,
                        atom: parse_num(Some(toks[2]), line)?,
                        label: parse_label(&toks[3..], line)?,
                    };
                    graph.as_mut().unwrap().weights.push(w);
                }
                "coeff" if toks.len() == 3 && coeff.is_none() => {
                    coeff = Some(Complex64::new(parse_num(Some(toks[1]), line)?, parse_num(Some(toks[2]), line)?));
                }
                _ => return Err(Error::Format(format!("line {line}: cannot parse {raw:?}"))),
            }
        }
        let mut g = graph.ok_or_else(|| Error::Format("missing atoms header".into()))?;
        g.coefficient = coeff.ok_or_else(|| Error::Format("missing coeff line".into()))?;
        g.validate()?;
        Ok(g)
    }
}
