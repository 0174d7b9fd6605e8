//! Reflexive digraphs, the digraph spaces they index, diagonal projections
//! and the connectivity combinatorics behind irreducibility.
//!
//! Vertices are labeled `1..=n`. An edge `(i, j)` indexes the matrix unit
//! `e_ij`, and the span of those units is the digraph space `A(G)` inside
//! `M_n`. When the edge set is also transitive the space is an algebra; that
//! is a property checked by [`Digraph::is_transitive`], not a separate type.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DigraphError {
    #[error("vertex {0} has no loop (i, i); digraphs must be reflexive")]
    MissingLoop(usize),
    #[error("vertex {vertex} out of range 1..={n}")]
    OutOfRange { vertex: usize, n: usize },
    #[error("a digraph needs at least one vertex")]
    Empty,
    #[error("empty diagonal projection")]
    EmptyProjection,
    #[error("unit e_{{{0}}} is not an edge of the space")]
    NotAnEdge(MatrixUnit),
    #[error("coefficient on {0} is not finite")]
    NonFinite(MatrixUnit),
}

/// A matrix unit `e_{row,col}`; doubles as the edge `(row, col)` indexing it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(from = "(usize, usize)", into = "(usize, usize)")]
pub struct MatrixUnit {
    pub row: usize,
    pub col: usize,
}

impl MatrixUnit {
    pub const fn new(row: usize, col: usize) -> Self {
        MatrixUnit { row, col }
    }

    pub const fn diag(v: usize) -> Self {
        MatrixUnit { row: v, col: v }
    }

    pub fn is_diagonal(&self) -> bool {
        self.row == self.col
    }
}

impl From<(usize, usize)> for MatrixUnit {
    fn from((row, col): (usize, usize)) -> Self {
        MatrixUnit { row, col }
    }
}

impl From<MatrixUnit> for (usize, usize) {
    fn from(u: MatrixUnit) -> Self {
        (u.row, u.col)
    }
}

impl fmt::Display for MatrixUnit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.row, self.col)
    }
}

/// Finite reflexive digraph without multiple edges.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawDigraph", into = "RawDigraph")]
pub struct Digraph {
    n: usize,
    edges: BTreeSet<MatrixUnit>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDigraph {
    n: usize,
    edges: Vec<(usize, usize)>,
}

impl TryFrom<RawDigraph> for Digraph {
    type Error = DigraphError;

    fn try_from(raw: RawDigraph) -> Result<Self, Self::Error> {
        Digraph::new(raw.n, raw.edges)
    }
}

impl From<Digraph> for RawDigraph {
    fn from(g: Digraph) -> Self {
        RawDigraph {
            n: g.n,
            edges: g.edges.iter().map(|&u| u.into()).collect(),
        }
    }
}

impl Digraph {
    /// Validates and builds a digraph. No reflexive closure is applied: a
    /// missing loop is an error.
    pub fn new<I, E>(n: usize, edges: I) -> Result<Self, DigraphError>
    where
        I: IntoIterator<Item = E>,
        E: Into<MatrixUnit>,
    {
        if n == 0 {
            return Err(DigraphError::Empty);
        }
        let mut set = BTreeSet::new();
        for e in edges {
            let e = e.into();
            for v in [e.row, e.col] {
                if v == 0 || v > n {
                    return Err(DigraphError::OutOfRange { vertex: v, n });
                }
            }
            set.insert(e);
        }
        if let Some(v) = (1..=n).find(|&v| !set.contains(&MatrixUnit::diag(v))) {
            return Err(DigraphError::MissingLoop(v));
        }
        Ok(Digraph { n, edges: set })
    }

    /// Upper triangular pattern `T_n`.
    pub fn upper_triangular(n: usize) -> Self {
        let edges = (1..=n).flat_map(|i| (i..=n).map(move |j| MatrixUnit::new(i, j)));
        Digraph::new(n, edges).expect("T_n is reflexive")
    }

    /// Complete reflexive digraph, i.e. the full matrix algebra `M_n`.
    pub fn complete(n: usize) -> Self {
        let edges = (1..=n).flat_map(|i| (1..=n).map(move |j| MatrixUnit::new(i, j)));
        Digraph::new(n, edges).expect("complete graph is reflexive")
    }

    /// The m-cycle `1 -> 2 -> ... -> m -> 1` with loops.
    pub fn cycle(m: usize) -> Self {
        let mut edges: Vec<MatrixUnit> = (1..=m).map(MatrixUnit::diag).collect();
        for i in 1..m {
            edges.push(MatrixUnit::new(i, i + 1));
        }
        if m > 1 {
            edges.push(MatrixUnit::new(m, 1));
        }
        Digraph::new(m, edges).expect("cycle is reflexive")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &BTreeSet<MatrixUnit> {
        &self.edges
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, row: usize, col: usize) -> bool {
        self.edges.contains(&MatrixUnit::new(row, col))
    }

    pub fn contains(&self, u: MatrixUnit) -> bool {
        self.edges.contains(&u)
    }

    pub fn vertices(&self) -> std::ops::RangeInclusive<usize> {
        1..=self.n
    }

    /// `(i,j), (j,k)` edges imply `(i,k)`.
    pub fn is_transitive(&self) -> bool {
        let mut out: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for e in &self.edges {
            out.entry(e.row).or_default().push(e.col);
        }
        self.edges.iter().all(|e| {
            out.get(&e.col)
                .is_none_or(|succ| succ.iter().all(|&k| self.has_edge(e.row, k)))
        })
    }

    /// Partition of `q` into connected components of the undirected graph
    /// underlying the induced subgraph on `q`. Components are sorted and
    /// listed by least element.
    pub fn underlying_components(&self, q: &VertexSet) -> Result<Vec<VertexSet>, DigraphError> {
        self.check_projection(q)?;
        let mut adj: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for e in &self.edges {
            if e.row != e.col && q.contains(e.row) && q.contains(e.col) {
                adj.entry(e.row).or_default().push(e.col);
                adj.entry(e.col).or_default().push(e.row);
            }
        }
        let mut seen = BTreeSet::new();
        let mut components = Vec::new();
        for &start in q.iter() {
            if !seen.insert(start) {
                continue;
            }
            let mut comp = BTreeSet::from([start]);
            let mut queue = VecDeque::from([start]);
            while let Some(v) = queue.pop_front() {
                for &w in adj.get(&v).into_iter().flatten() {
                    if seen.insert(w) {
                        comp.insert(w);
                        queue.push_back(w);
                    }
                }
            }
            components.push(VertexSet(comp));
        }
        Ok(components)
    }

    /// Whether `Q A(G) Q` generates all of `B(Q C^n)`, i.e. the compressed
    /// graph is connected as an undirected graph.
    pub fn is_irreducible(&self, q: &VertexSet) -> Result<bool, DigraphError> {
        Ok(self.underlying_components(q)?.len() == 1)
    }

    /// Full induced subgraph on `q`, relabeled `1..=|q|` in ascending order.
    /// The second value maps new labels (index + 1) back to old ones.
    pub fn induced_subspace(&self, q: &VertexSet) -> Result<(Digraph, Vec<usize>), DigraphError> {
        self.check_projection(q)?;
        let relabel: Vec<usize> = q.iter().copied().collect();
        let position: BTreeMap<usize, usize> =
            relabel.iter().enumerate().map(|(i, &v)| (v, i + 1)).collect();
        let edges = self.edges.iter().filter_map(|e| {
            Some(MatrixUnit::new(*position.get(&e.row)?, *position.get(&e.col)?))
        });
        let g = Digraph::new(relabel.len(), edges)?;
        Ok((g, relabel))
    }

    /// `A(G) ⊗ M_m` as a digraph space: vertex `(i, a)` is `(i - 1) m + a`.
    pub fn ampliate(&self, m: usize) -> Digraph {
        assert!(m >= 1, "ampliation multiplicity must be positive");
        let mut edges = BTreeSet::new();
        for e in &self.edges {
            for a in 1..=m {
                for b in 1..=m {
                    edges.insert(MatrixUnit::new(
                        ampliated_vertex(e.row, a, m),
                        ampliated_vertex(e.col, b, m),
                    ));
                }
            }
        }
        Digraph {
            n: self.n * m,
            edges,
        }
    }

    pub fn check_vertex(&self, v: usize) -> Result<(), DigraphError> {
        if v == 0 || v > self.n {
            Err(DigraphError::OutOfRange { vertex: v, n: self.n })
        } else {
            Ok(())
        }
    }

    fn check_projection(&self, q: &VertexSet) -> Result<(), DigraphError> {
        if q.is_empty() {
            return Err(DigraphError::EmptyProjection);
        }
        q.iter().try_for_each(|&v| self.check_vertex(v))
    }
}

/// Vertex `(i, a)` of an m-fold ampliation.
pub fn ampliated_vertex(i: usize, a: usize, m: usize) -> usize {
    (i - 1) * m + a
}

/// Subset of vertices; stands for the diagonal projection `Σ e_ii`.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexSet(BTreeSet<usize>);

impl VertexSet {
    pub fn new() -> Self {
        VertexSet(BTreeSet::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.0.contains(&v)
    }

    pub fn insert(&mut self, v: usize) -> bool {
        self.0.insert(v)
    }

    pub fn iter(&self) -> std::collections::btree_set::Iter<'_, usize> {
        self.0.iter()
    }

    pub fn least(&self) -> Option<usize> {
        self.0.first().copied()
    }

    pub fn is_subset(&self, other: &VertexSet) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn is_disjoint(&self, other: &VertexSet) -> bool {
        self.0.is_disjoint(&other.0)
    }

    pub fn as_set(&self) -> &BTreeSet<usize> {
        &self.0
    }

    /// Canonical summand order: least vertex first, then lexicographic.
    pub fn canonical_cmp(&self, other: &VertexSet) -> std::cmp::Ordering {
        self.least()
            .cmp(&other.least())
            .then_with(|| self.0.iter().cmp(other.0.iter()))
    }
}

impl FromIterator<usize> for VertexSet {
    fn from_iter<T: IntoIterator<Item = usize>>(iter: T) -> Self {
        VertexSet(iter.into_iter().collect())
    }
}

impl<const N: usize> From<[usize; N]> for VertexSet {
    fn from(vs: [usize; N]) -> Self {
        vs.into_iter().collect()
    }
}

impl<'a> IntoIterator for &'a VertexSet {
    type Item = &'a usize;
    type IntoIter = std::collections::btree_set::Iter<'a, usize>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

impl fmt::Display for VertexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "}}")
    }
}

/// A concrete element of a digraph space.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceElement {
    space: Arc<Digraph>,
    coeffs: BTreeMap<MatrixUnit, Complex64>,
}

impl SpaceElement {
    pub fn new<I>(space: Arc<Digraph>, coeffs: I) -> Result<Self, DigraphError>
    where
        I: IntoIterator<Item = (MatrixUnit, Complex64)>,
    {
        let mut map = BTreeMap::new();
        for (u, c) in coeffs {
            if !space.contains(u) {
                return Err(DigraphError::NotAnEdge(u));
            }
            if !(c.re.is_finite() && c.im.is_finite()) {
                return Err(DigraphError::NonFinite(u));
            }
            *map.entry(u).or_insert(Complex64::new(0.0, 0.0)) += c;
        }
        map.retain(|_, c| *c != Complex64::new(0.0, 0.0));
        Ok(SpaceElement { space, coeffs: map })
    }

    pub fn zero(space: Arc<Digraph>) -> Self {
        SpaceElement {
            space,
            coeffs: BTreeMap::new(),
        }
    }

    /// The matrix unit `e_u` itself.
    pub fn unit(space: Arc<Digraph>, u: MatrixUnit) -> Result<Self, DigraphError> {
        Self::new(space, [(u, Complex64::new(1.0, 0.0))])
    }

    /// Real-coefficient shorthand.
    pub fn from_real<I>(space: Arc<Digraph>, coeffs: I) -> Result<Self, DigraphError>
    where
        I: IntoIterator<Item = ((usize, usize), f64)>,
    {
        Self::new(
            space,
            coeffs
                .into_iter()
                .map(|(e, c)| (MatrixUnit::from(e), Complex64::new(c, 0.0))),
        )
    }

    pub fn space(&self) -> &Arc<Digraph> {
        &self.space
    }

    pub fn coeffs(&self) -> &BTreeMap<MatrixUnit, Complex64> {
        &self.coeffs
    }

    pub fn coeff(&self, u: MatrixUnit) -> Complex64 {
        self.coeffs.get(&u).copied().unwrap_or_default()
    }

    pub fn support_len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Sum of two elements of the same space.
    pub fn add(&self, other: &SpaceElement) -> Result<SpaceElement, DigraphError> {
        assert_eq!(self.space, other.space, "elements live in different spaces");
        let terms = self.coeffs.iter().chain(other.coeffs.iter()).map(|(&u, &c)| (u, c));
        SpaceElement::new(self.space.clone(), terms)
    }

    pub fn scale(&self, s: Complex64) -> SpaceElement {
        let terms = self.coeffs.iter().map(|(&u, &c)| (u, c * s));
        SpaceElement::new(self.space.clone(), terms).expect("scaling keeps the support")
    }

    /// `Q a Q`.
    pub fn compress(&self, q: &VertexSet) -> SpaceElement {
        SpaceElement {
            space: self.space.clone(),
            coeffs: self
                .coeffs
                .iter()
                .filter(|(u, _)| q.contains(u.row) && q.contains(u.col))
                .map(|(&u, &c)| (u, c))
                .collect(),
        }
    }
}
