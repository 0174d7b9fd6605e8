//! Silov ideal and the Bratteli diagram of the C*-envelope.

use std::collections::BTreeSet;

use serde::ser::{SerializeMap, Serializer};
use serde::Serialize;
use thiserror::Error;

use crate::bratteli::{bratteli, maximal_flags, BratteliDiagram, ColumnDefect};
use crate::digraph::VertexSet;
use crate::system::{SystemError, TailMode, TelescopedSystem};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EnvelopeError {
    #[error("node {index} of level {level} carries no compression projection")]
    MissingQ { level: usize, index: usize },
    #[error("the envelope needs a verified stationary tail")]
    NonStationary,
    #[error("system is not essentially unital: {}", .defects.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    NotEssentiallyUnital { defects: Vec<ColumnDefect> },
    #[error(transparent)]
    System(#[from] SystemError),
}

/// Recomputes maximality flags from the nodes' projections.
pub fn mark_maximal(d: &BratteliDiagram) -> Result<BratteliDiagram, EnvelopeError> {
    let mut out = d.clone();
    for (level, nodes) in out.levels_mut().iter_mut().enumerate() {
        let qs = nodes
            .iter()
            .enumerate()
            .map(|(index, n)| n.q.as_ref().ok_or(EnvelopeError::MissingQ { level, index }))
            .collect::<Result<Vec<&VertexSet>, _>>()?;
        let flags = maximal_flags(&qs);
        for (n, f) in nodes.iter_mut().zip(flags) {
            n.maximal = f;
        }
    }
    if d.stationary_from().is_some() {
        out.redetect_stationary();
    }
    Ok(out)
}

/// Nodes that never reach a maximal node at a strictly later level.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SilovGenerators {
    /// `(level, index)` pairs within the provided levels.
    pub nodes: BTreeSet<(usize, usize)>,
    /// Generators among the nodes of every level past the last provided one,
    /// indexed like the last level.
    pub tail: Vec<bool>,
}

impl SilovGenerators {
    pub fn contains(&self, level: usize, index: usize) -> bool {
        self.nodes.contains(&(level, index))
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

impl Serialize for SilovGenerators {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_seq(self.nodes.iter().map(|&(l, i)| [l, i]))
    }
}

/// A node is a generator iff nothing it feeds into, at any later level,
/// is maximal. Beyond the last level the last transition repeats.
pub fn silov_generators(d: &BratteliDiagram) -> Result<SilovGenerators, EnvelopeError> {
    d.stationary_from().ok_or(EnvelopeError::NonStationary)?;
    let count = d.num_levels();
    let last = d.transitions().last().expect("a stationary diagram has transitions");
    let last_flags = d.flags(count - 1);

    // Least fixed point of reaches(v) = ∃ w: n(v,w) > 0 ∧ (maximal(w) ∨ reaches(w))
    // on the repeating pattern.
    let width = last_flags.len();
    let mut reaches = vec![false; width];
    loop {
        let mut changed = false;
        for v in 0..width {
            if !reaches[v] && (0..width).any(|w| last.get(v, w) > 0 && (last_flags[w] || reaches[w])) {
                reaches[v] = true;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let tail: Vec<bool> = reaches.iter().map(|r| !r).collect();

    let mut nodes = BTreeSet::new();
    let mut later = reaches;
    for (v, r) in later.iter().enumerate() {
        if !r {
            nodes.insert((count - 1, v));
        }
    }
    for k in (0..count - 1).rev() {
        let t = &d.transitions()[k];
        let flags = d.flags(k + 1);
        let here: Vec<bool> = (0..t.rows())
            .map(|v| (0..t.cols()).any(|w| t.get(v, w) > 0 && (flags[w] || later[w])))
            .collect();
        for (v, r) in here.iter().enumerate() {
            if !r {
                nodes.insert((k, v));
            }
        }
        later = here;
    }

    for &(k, v) in &nodes {
        if k + 1 < count {
            let t = &d.transitions()[k];
            for w in 0..t.cols() {
                assert!(t.get(v, w) == 0 || nodes.contains(&(k + 1, w)), "generators are forward closed");
            }
        }
    }
    Ok(SilovGenerators { nodes, tail })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct UhfDescriptor {
    pub base_dim: usize,
    pub ratio: usize,
}

/// Recognizes a stationary single-node chain `M_d → M_{dm} → ...`.
pub fn classify_uhf(d: &BratteliDiagram) -> Option<UhfDescriptor> {
    let s = d.stationary_from()?;
    if d.levels()[s..].iter().any(|l| l.len() != 1) {
        return None;
    }
    let t = &d.transitions()[s];
    let ratio = t.get(0, 0);
    (ratio >= 1).then(|| UhfDescriptor {
        base_dim: d.levels()[s][0].dim,
        ratio,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeResult {
    /// Diagram of the enveloping AF algebra, maximality marked.
    pub diagram: BratteliDiagram,
    /// Diagram of the envelope.
    pub quotient: BratteliDiagram,
    pub removed: SilovGenerators,
    pub essentially_unital: bool,
    pub uhf: Option<UhfDescriptor>,
}

impl Serialize for EnvelopeResult {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(5))?;
        map.serialize_entry("levels", self.quotient.levels())?;
        map.serialize_entry("transitions", self.quotient.transitions())?;
        map.serialize_entry("stationary_from", &self.quotient.stationary_from())?;
        map.serialize_entry("removed", &self.removed)?;
        map.serialize_entry("uhf", &self.uhf)?;
        map.end()
    }
}

/// Deletes the Silov generators from the diagram of a stationary,
/// essentially unital telescoped system.
pub fn envelope_diagram(t: &TelescopedSystem) -> Result<EnvelopeResult, EnvelopeError> {
    let diagram = mark_maximal(&bratteli(t)?)?;
    if t.tail() == TailMode::Finite {
        return Err(EnvelopeError::NonStationary);
    }
    let defects = diagram.unitality_defects();
    if !defects.is_empty() {
        return Err(EnvelopeError::NotEssentiallyUnital { defects });
    }
    let removed = silov_generators(&diagram)?;
    let quotient = quotient_diagram(&diagram, &removed);
    let uhf = classify_uhf(&quotient);
    Ok(EnvelopeResult {
        diagram,
        quotient,
        removed,
        essentially_unital: true,
        uhf,
    })
}

/// Keeps the nodes outside `removed`, with dims unchanged and transitions
/// restricted.
pub fn quotient_diagram(d: &BratteliDiagram, removed: &SilovGenerators) -> BratteliDiagram {
    let keep: Vec<Vec<usize>> = d
        .levels()
        .iter()
        .enumerate()
        .map(|(k, nodes)| (0..nodes.len()).filter(|&i| !removed.contains(k, i)).collect())
        .collect();
    for (k, t) in d.transitions().iter().enumerate() {
        for &(_, v) in removed.nodes.iter().filter(|&&(l, _)| l == k) {
            assert!(
                keep[k + 1].iter().all(|&w| t.get(v, w) == 0),
                "removed nodes have no edges into surviving nodes"
            );
        }
    }
    let levels = d
        .levels()
        .iter()
        .zip(&keep)
        .map(|(nodes, keep)| keep.iter().map(|&i| nodes[i].clone()).collect())
        .collect();
    let transitions = d
        .transitions()
        .iter()
        .enumerate()
        .map(|(k, t)| t.restrict(&keep[k], &keep[k + 1]))
        .collect();
    BratteliDiagram::new(levels, transitions, d.stationary_from().is_some()).expect("restriction preserves shapes")
}
