//! Bratteli diagrams of telescoped systems.

use std::collections::BTreeMap;
use std::fmt;

use serde::de::{self, Deserializer};
use serde::ser::{SerializeSeq, Serializer};
use serde::{Deserialize, Serialize};

use crate::digraph::VertexSet;
use crate::regular::{compose, decide_compression_type};
use crate::system::{SystemError, TailMode, TelescopedSystem};

/// Multiplicities `n_ij` of summand `i` of one level inside summand `j` of
/// the next.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ConnectingMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<usize>,
}

impl ConnectingMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ConnectingMatrix {
            rows,
            cols,
            entries: vec![0; rows * cols],
        }
    }

    pub fn from_rows(rows: &[Vec<usize>]) -> Option<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return None;
        }
        Some(ConnectingMatrix {
            rows: rows.len(),
            cols,
            entries: rows.concat(),
        })
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> usize {
        self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, n: usize) {
        self.entries[i * self.cols + j] = n;
    }

    pub fn to_rows(&self) -> Vec<Vec<usize>> {
        (0..self.rows)
            .map(|i| self.entries[i * self.cols..(i + 1) * self.cols].to_vec())
            .collect()
    }

    /// Keeps the listed rows and columns, in the given order.
    pub fn restrict(&self, rows: &[usize], cols: &[usize]) -> Self {
        let mut m = Self::zeros(rows.len(), cols.len());
        for (a, &i) in rows.iter().enumerate() {
            for (b, &j) in cols.iter().enumerate() {
                m.set(a, b, self.get(i, j));
            }
        }
        m
    }

    /// `Σ_i n_ij · dims[i]`.
    pub fn column_sum(&self, j: usize, dims: &[usize]) -> usize {
        (0..self.rows).map(|i| self.get(i, j) * dims[i]).sum()
    }
}

impl fmt::Display for ConnectingMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (k, row) in self.to_rows().iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            let cells: Vec<String> = row.iter().map(usize::to_string).collect();
            write!(f, "[{}]", cells.join(","))?;
        }
        write!(f, "]")
    }
}

impl Serialize for ConnectingMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.rows))?;
        for row in self.to_rows() {
            seq.serialize_element(&row)?;
        }
        seq.end()
    }
}

impl<'de> Deserialize<'de> for ConnectingMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let rows = Vec::<Vec<usize>>::deserialize(deserializer)?;
        ConnectingMatrix::from_rows(&rows).ok_or_else(|| de::Error::custom("ragged multiplicity matrix"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Node {
    pub dim: usize,
    #[serde(skip_serializing, default)]
    pub q: Option<VertexSet>,
    pub maximal: bool,
}

/// A column whose multiplicities do not fill the target summand.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ColumnDefect {
    pub transition: usize,
    pub column: usize,
    pub column_sum: usize,
    pub dim: usize,
}

impl fmt::Display for ColumnDefect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "transition {} column {}: sum {} != dim {}",
            self.transition, self.column, self.column_sum, self.dim
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BratteliDiagram {
    levels: Vec<Vec<Node>>,
    transitions: Vec<ConnectingMatrix>,
    stationary_from: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DiagramError {
    #[error("a diagram with {levels} levels needs {expected} transitions, got {got}", expected = .levels.saturating_sub(1))]
    TransitionCount { levels: usize, got: usize },
    #[error("transition {0} does not match the sizes of its levels")]
    TransitionShape(usize),
    #[error("stationary_from {0} is past the last transition")]
    StationaryOutOfRange(usize),
}

impl BratteliDiagram {
    /// Assembles a diagram, checking shapes. `stationary` asks for the
    /// repeating tail to be detected.
    pub fn new(levels: Vec<Vec<Node>>, transitions: Vec<ConnectingMatrix>, stationary: bool) -> Result<Self, DiagramError> {
        check_shapes(&levels, &transitions)?;
        let stationary_from = if stationary {
            stationary_start(&levels, &transitions)
        } else {
            None
        };
        Ok(BratteliDiagram {
            levels,
            transitions,
            stationary_from,
        })
    }

    pub fn levels(&self) -> &[Vec<Node>] {
        &self.levels
    }

    pub fn transitions(&self) -> &[ConnectingMatrix] {
        &self.transitions
    }

    pub fn stationary_from(&self) -> Option<usize> {
        self.stationary_from
    }

    pub fn num_levels(&self) -> usize {
        self.levels.len()
    }

    pub fn dims(&self, level: usize) -> Vec<usize> {
        self.levels[level].iter().map(|n| n.dim).collect()
    }

    pub fn flags(&self, level: usize) -> Vec<bool> {
        self.levels[level].iter().map(|n| n.maximal).collect()
    }

    pub fn all_dims(&self) -> Vec<Vec<usize>> {
        (0..self.levels.len()).map(|k| self.dims(k)).collect()
    }

    pub fn transition_rows(&self) -> Vec<Vec<Vec<usize>>> {
        self.transitions.iter().map(ConnectingMatrix::to_rows).collect()
    }

    pub(crate) fn levels_mut(&mut self) -> &mut [Vec<Node>] {
        &mut self.levels
    }

    /// Recomputes `stationary_from` from the current pattern.
    pub fn redetect_stationary(&mut self) {
        self.stationary_from = stationary_start(&self.levels, &self.transitions);
    }

    /// Columns where `Σ_i n_ij · dim_i ≠ dim_j`.
    pub fn unitality_defects(&self) -> Vec<ColumnDefect> {
        let mut out = Vec::new();
        for (k, t) in self.transitions.iter().enumerate() {
            let dims = self.dims(k);
            for (j, node) in self.levels[k + 1].iter().enumerate() {
                let column_sum = t.column_sum(j, &dims);
                if column_sum != node.dim {
                    out.push(ColumnDefect {
                        transition: k,
                        column: j,
                        column_sum,
                        dim: node.dim,
                    });
                }
            }
        }
        out
    }
}

fn check_shapes(levels: &[Vec<Node>], transitions: &[ConnectingMatrix]) -> Result<(), DiagramError> {
    if transitions.len() + 1 != levels.len().max(1) {
        return Err(DiagramError::TransitionCount {
            levels: levels.len(),
            got: transitions.len(),
        });
    }
    for (k, t) in transitions.iter().enumerate() {
        if t.rows() != levels[k].len() || t.cols() != levels[k + 1].len() {
            return Err(DiagramError::TransitionShape(k));
        }
    }
    Ok(())
}

/// Earliest level from which every transition equals the last one and
/// every level carries the last level's maximality flags. Needs the last
/// two transitions to agree.
pub fn stationary_start(levels: &[Vec<Node>], transitions: &[ConnectingMatrix]) -> Option<usize> {
    let count = transitions.len();
    if count < 2 {
        return None;
    }
    let flags = |k: usize| levels[k].iter().map(|n| n.maximal).collect::<Vec<_>>();
    let last = &transitions[count - 1];
    let last_flags = flags(count);
    let matches = |k: usize| transitions[k] == *last && flags(k) == last_flags;
    if !matches(count - 2) || flags(count - 1) != last_flags {
        return None;
    }
    let mut s = count - 2;
    while s > 0 && matches(s - 1) {
        s -= 1;
    }
    Some(s)
}

/// Maximality by strict containment among the projections of one level.
pub fn maximal_flags(qs: &[&VertexSet]) -> Vec<bool> {
    qs.iter()
        .map(|q| !qs.iter().any(|p| p.len() > q.len() && q.is_subset(p)))
        .collect()
}

impl<'de> Deserialize<'de> for BratteliDiagram {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Raw {
            levels: Vec<Vec<Node>>,
            transitions: Vec<ConnectingMatrix>,
            #[serde(default)]
            stationary_from: Option<usize>,
        }
        let raw = Raw::deserialize(deserializer)?;
        check_shapes(&raw.levels, &raw.transitions).map_err(de::Error::custom)?;
        if let Some(s) = raw.stationary_from {
            if s >= raw.transitions.len().max(1) {
                return Err(de::Error::custom(DiagramError::StationaryOutOfRange(s)));
            }
        }
        Ok(BratteliDiagram {
            levels: raw.levels,
            transitions: raw.transitions,
            stationary_from: raw.stationary_from,
        })
    }
}

/// Multiplicities from telescoped level `level` into level `level + 1`.
///
/// Each component of the later map, composed with the earlier map,
/// decomposes into copies of the earlier projections; components sharing a
/// projection must yield the same counts.
pub fn connecting_matrix(t: &TelescopedSystem, level: usize) -> Result<ConnectingMatrix, SystemError> {
    let stages = t.stages();
    if level + 1 >= stages.len() {
        return Err(SystemError::StageOutOfRange(level));
    }
    let (here, next) = (&stages[level], &stages[level + 1]);
    let alpha = &t.base().maps()[here.index];
    let mut counts: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for eta in next.decomposition.components() {
        let j = next.summands.position(eta.q()).expect("component projection is a summand");
        let composite = compose(alpha, &eta.to_regular_map())?;
        let d = decide_compression_type(&composite);
        let d = d
            .decomposition()
            .expect("composites of compression-type maps are of compression type");
        let mut column = vec![0; here.summands.len()];
        for c in d.components() {
            let i = here.summands.position(c.q()).ok_or_else(|| SystemError::UnknownSummand {
                level,
                q: c.q().clone(),
            })?;
            column[i] += 1;
        }
        if let Some(seen) = counts.get(&j) {
            if *seen != column {
                return Err(SystemError::InconsistentJClass { level, target: j });
            }
        } else {
            counts.insert(j, column);
        }
    }
    let mut m = ConnectingMatrix::zeros(here.summands.len(), next.summands.len());
    for (j, column) in counts {
        for (i, n) in column.into_iter().enumerate() {
            m.set(i, j, n);
        }
    }
    if let Some(row) = (0..m.rows()).find(|&i| (0..m.cols()).all(|j| m.get(i, j) == 0)) {
        return Err(SystemError::DeadSummand { level, row });
    }
    Ok(m)
}

pub fn bratteli(t: &TelescopedSystem) -> Result<BratteliDiagram, SystemError> {
    let levels: Vec<Vec<Node>> = t
        .stages()
        .iter()
        .map(|s| {
            let qs: Vec<&VertexSet> = s.summands.projections().collect();
            let flags = maximal_flags(&qs);
            s.summands
                .summands
                .iter()
                .zip(flags)
                .map(|(sm, maximal)| Node {
                    dim: sm.dim,
                    q: Some(sm.q.clone()),
                    maximal,
                })
                .collect()
        })
        .collect();
    let transitions = (0..levels.len().saturating_sub(1))
        .map(|k| connecting_matrix(t, k))
        .collect::<Result<Vec<_>, _>>()?;
    for (k, m) in transitions.iter().enumerate() {
        let dims: Vec<usize> = levels[k].iter().map(|n| n.dim).collect();
        for (j, node) in levels[k + 1].iter().enumerate() {
            if m.column_sum(j, &dims) > node.dim {
                return Err(SystemError::DimensionRecursion { level: k, column: j });
            }
        }
    }
    let d = BratteliDiagram::new(levels, transitions, t.tail() == TailMode::Stationary)
        .expect("connecting matrices match their levels");
    Ok(d)
}

/// Whether every telescoped transition is unital. A finite tail cannot be
/// judged.
pub fn is_essentially_unital(t: &TelescopedSystem) -> Result<bool, SystemError> {
    if t.tail() == TailMode::Finite {
        return Err(SystemError::Indeterminate);
    }
    Ok(bratteli(t)?.unitality_defects().is_empty())
}
