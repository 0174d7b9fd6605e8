//! Regular bimodule maps between digraph spaces and their compression-type
//! structure.
//!
//! A [`RegularMap`] is stored as its matrix-unit image table. The central
//! routine is [`decide_compression_type`], which either splits a map into
//! elementary compression pieces or exhibits a cycle in the domain graph
//! together with an element whose norm the map strictly increases.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::de::{self, Deserializer};
use serde::ser::{SerializeMap, SerializeStruct, Serializer};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::digraph::{ampliated_vertex, Digraph, DigraphError, MatrixUnit, SpaceElement, VertexSet};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MapError {
    #[error("image table has an entry for {0}, which is not an edge of the domain")]
    UnknownEdge(MatrixUnit),
    #[error("image of {edge} contains {unit}, which is not an edge of the codomain")]
    OutsideCodomain { edge: MatrixUnit, unit: MatrixUnit },
    #[error("diagonal unit {edge} is sent to the off-diagonal unit {unit}")]
    NonDiagonalImage { edge: MatrixUnit, unit: MatrixUnit },
    #[error("images of {first} and {second} share the diagonal unit {unit}")]
    DiagonalOverlap {
        first: MatrixUnit,
        second: MatrixUnit,
        unit: MatrixUnit,
    },
    #[error("unit {unit} in the image of {edge} is not dominated by the diagonal images")]
    NotDominated { edge: MatrixUnit, unit: MatrixUnit },
    #[error("image of {edge} is not an orthogonal sum: {first} and {second} share a row or column")]
    NotOrthogonal {
        edge: MatrixUnit,
        first: MatrixUnit,
        second: MatrixUnit,
    },
    #[error("{0} is not an irreducible projection of the domain")]
    NotIrreducible(VertexSet),
    #[error("edge ({0}, {1}) is not carried to an edge of the codomain")]
    EdgeNotPreserved(usize, usize),
    #[error("vertex correspondence is not injective")]
    NotInjective,
    #[error("vertex correspondence is not defined exactly on the compression projection")]
    CorrespondenceMismatch,
    #[error("range {0} is not connected in the codomain")]
    RangeDisconnected(VertexSet),
    #[error("components {0} and {1} have overlapping ranges")]
    RangeOverlap(usize, usize),
    #[error("codomain of the first map does not match the domain of the second")]
    DomainMismatch,
    #[error(transparent)]
    Digraph(#[from] DigraphError),
}

/// Linear map sending each matrix unit of `dom` to an orthogonal sum of
/// matrix units of `cod`, bimodular over the diagonals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegularMap {
    dom: Arc<Digraph>,
    cod: Arc<Digraph>,
    images: BTreeMap<MatrixUnit, BTreeSet<MatrixUnit>>,
}

impl RegularMap {
    /// Validates an image table. Domain edges absent from `images` are sent
    /// to zero.
    pub fn new(
        dom: Arc<Digraph>,
        cod: Arc<Digraph>,
        images: BTreeMap<MatrixUnit, BTreeSet<MatrixUnit>>,
    ) -> Result<Self, MapError> {
        if let Some(&e) = images.keys().find(|e| !dom.contains(**e)) {
            return Err(MapError::UnknownEdge(e));
        }
        let mut table: BTreeMap<MatrixUnit, BTreeSet<MatrixUnit>> =
            dom.edges().iter().map(|&e| (e, BTreeSet::new())).collect();
        for (e, units) in images {
            table.insert(e, units);
        }
        let map = RegularMap {
            dom,
            cod,
            images: table,
        };
        map.validate()?;
        Ok(map)
    }

    /// Convenience constructor from plain tuples.
    pub fn from_table<I, U>(dom: Arc<Digraph>, cod: Arc<Digraph>, table: I) -> Result<Self, MapError>
    where
        I: IntoIterator<Item = ((usize, usize), U)>,
        U: IntoIterator<Item = (usize, usize)>,
    {
        let images = table
            .into_iter()
            .map(|(e, us)| (MatrixUnit::from(e), us.into_iter().map(MatrixUnit::from).collect()))
            .collect();
        RegularMap::new(dom, cod, images)
    }

    pub fn identity(space: Arc<Digraph>) -> Self {
        let images = space
            .edges()
            .iter()
            .map(|&e| (e, BTreeSet::from([e])))
            .collect();
        RegularMap {
            dom: space.clone(),
            cod: space,
            images,
        }
    }

    pub fn zero(dom: Arc<Digraph>, cod: Arc<Digraph>) -> Self {
        let images = dom.edges().iter().map(|&e| (e, BTreeSet::new())).collect();
        RegularMap { dom, cod, images }
    }

    fn validate(&self) -> Result<(), MapError> {
        for (&e, units) in &self.images {
            if let Some(&u) = units.iter().find(|u| !self.cod.contains(**u)) {
                return Err(MapError::OutsideCodomain { edge: e, unit: u });
            }
            if e.is_diagonal() {
                if let Some(&u) = units.iter().find(|u| !u.is_diagonal()) {
                    return Err(MapError::NonDiagonalImage { edge: e, unit: u });
                }
            }
        }
        let mut owner: BTreeMap<usize, usize> = BTreeMap::new();
        for v in self.dom.vertices() {
            for u in self.image(MatrixUnit::diag(v)) {
                if let Some(prev) = owner.insert(u.row, v) {
                    return Err(MapError::DiagonalOverlap {
                        first: MatrixUnit::diag(prev),
                        second: MatrixUnit::diag(v),
                        unit: *u,
                    });
                }
            }
        }
        for (&e, units) in &self.images {
            for &u in units {
                if owner.get(&u.row) != Some(&e.row) || owner.get(&u.col) != Some(&e.col) {
                    return Err(MapError::NotDominated { edge: e, unit: u });
                }
            }
            let mut rows = BTreeMap::new();
            let mut cols = BTreeMap::new();
            for &u in units {
                let clash = rows.insert(u.row, u).or_else(|| cols.insert(u.col, u));
                if let Some(prev) = clash {
                    return Err(MapError::NotOrthogonal {
                        edge: e,
                        first: prev,
                        second: u,
                    });
                }
            }
        }
        Ok(())
    }

    pub fn dom(&self) -> &Arc<Digraph> {
        &self.dom
    }

    pub fn cod(&self) -> &Arc<Digraph> {
        &self.cod
    }

    pub fn images(&self) -> &BTreeMap<MatrixUnit, BTreeSet<MatrixUnit>> {
        &self.images
    }

    /// Image units of a domain edge; empty for non-edges.
    pub fn image(&self, e: MatrixUnit) -> impl Iterator<Item = &MatrixUnit> {
        self.images.get(&e).into_iter().flatten()
    }

    /// Linear extension of the unit table.
    pub fn apply(&self, a: &SpaceElement) -> Result<SpaceElement, MapError> {
        if **a.space() != *self.dom {
            return Err(MapError::DomainMismatch);
        }
        let terms = a
            .coeffs()
            .iter()
            .flat_map(|(e, &c)| self.image(*e).map(move |&u| (u, c)));
        Ok(SpaceElement::new(self.cod.clone(), terms)?)
    }

    /// `g ∘ self`.
    pub fn then(&self, g: &RegularMap) -> Result<RegularMap, MapError> {
        compose(self, g)
    }
}

impl fmt::Display for RegularMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (e, units) in &self.images {
            write!(f, "e_{{{e}}} ->")?;
            if units.is_empty() {
                write!(f, " 0")?;
            }
            for u in units {
                write!(f, " f_{{{u}}}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// `{"dom": .., "cod": .., "images": {"i,j": [[k,l], ..]}}` with keys in
/// numeric edge order.
impl Serialize for RegularMap {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        struct Table<'a>(&'a BTreeMap<MatrixUnit, BTreeSet<MatrixUnit>>);
        impl Serialize for Table<'_> {
            fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
                let mut m = serializer.serialize_map(Some(self.0.len()))?;
                for (e, units) in self.0 {
                    m.serialize_entry(&e.to_string(), units)?;
                }
                m.end()
            }
        }
        let mut s = serializer.serialize_struct("RegularMap", 3)?;
        s.serialize_field("dom", &*self.dom)?;
        s.serialize_field("cod", &*self.cod)?;
        s.serialize_field("images", &Table(&self.images))?;
        s.end()
    }
}

impl<'de> Deserialize<'de> for RegularMap {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Raw {
            dom: Digraph,
            cod: Digraph,
            images: BTreeMap<String, Vec<MatrixUnit>>,
        }
        let raw = Raw::deserialize(deserializer)?;
        let mut images = BTreeMap::new();
        for (key, units) in raw.images {
            let edge = parse_edge_key(&key)
                .ok_or_else(|| de::Error::custom(format!("bad edge key {key:?}, expected \"i,j\"")))?;
            images.insert(edge, units.into_iter().collect());
        }
        RegularMap::new(Arc::new(raw.dom), Arc::new(raw.cod), images).map_err(de::Error::custom)
    }
}

fn parse_edge_key(key: &str) -> Option<MatrixUnit> {
    let (i, j) = key.split_once(',')?;
    Some(MatrixUnit::new(i.trim().parse().ok()?, j.trim().parse().ok()?))
}

/// Compression by an irreducible `Q` followed by the matrix-unit embedding
/// induced by the vertex injection `rho`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ElementaryCompressionMap {
    dom: Arc<Digraph>,
    cod: Arc<Digraph>,
    q: VertexSet,
    rho: BTreeMap<usize, usize>,
}

impl ElementaryCompressionMap {
    pub fn new(
        dom: Arc<Digraph>,
        cod: Arc<Digraph>,
        q: VertexSet,
        rho: BTreeMap<usize, usize>,
    ) -> Result<Self, MapError> {
        if rho.len() != q.len() || !q.iter().all(|v| rho.contains_key(v)) {
            return Err(MapError::CorrespondenceMismatch);
        }
        for &t in rho.values() {
            cod.check_vertex(t)?;
        }
        let range: VertexSet = rho.values().copied().collect();
        if range.len() != rho.len() {
            return Err(MapError::NotInjective);
        }
        if !dom.is_irreducible(&q)? {
            return Err(MapError::NotIrreducible(q));
        }
        for e in dom.edges() {
            if let (Some(&a), Some(&b)) = (rho.get(&e.row), rho.get(&e.col)) {
                if !cod.has_edge(a, b) {
                    return Err(MapError::EdgeNotPreserved(e.row, e.col));
                }
            }
        }
        if cod.underlying_components(&range)?.len() != 1 {
            return Err(MapError::RangeDisconnected(range));
        }
        Ok(ElementaryCompressionMap { dom, cod, q, rho })
    }

    /// Placement of `q` given as the list of target vertices in ascending
    /// order of `q`.
    pub fn placed(
        dom: Arc<Digraph>,
        cod: Arc<Digraph>,
        q: VertexSet,
        targets: &[usize],
    ) -> Result<Self, MapError> {
        if targets.len() != q.len() {
            return Err(MapError::CorrespondenceMismatch);
        }
        let rho = q.iter().copied().zip(targets.iter().copied()).collect();
        Self::new(dom, cod, q, rho)
    }

    pub fn dom(&self) -> &Arc<Digraph> {
        &self.dom
    }

    pub fn cod(&self) -> &Arc<Digraph> {
        &self.cod
    }

    pub fn q(&self) -> &VertexSet {
        &self.q
    }

    pub fn rho(&self) -> &BTreeMap<usize, usize> {
        &self.rho
    }

    pub fn rank(&self) -> usize {
        self.q.len()
    }

    /// Support of the range projection `P`.
    pub fn range(&self) -> VertexSet {
        self.rho.values().copied().collect()
    }

    pub fn to_regular_map(&self) -> RegularMap {
        assemble(self.dom.clone(), self.cod.clone(), std::slice::from_ref(self))
            .expect("a single elementary map always assembles")
    }
}

/// Direct sum of elementary maps with pairwise disjoint ranges, ordered by
/// least range vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompressionTypeDecomposition {
    dom: Arc<Digraph>,
    cod: Arc<Digraph>,
    components: Vec<ElementaryCompressionMap>,
}

impl CompressionTypeDecomposition {
    pub fn new(
        dom: Arc<Digraph>,
        cod: Arc<Digraph>,
        mut components: Vec<ElementaryCompressionMap>,
    ) -> Result<Self, MapError> {
        check_components(&dom, &cod, &components)?;
        components.sort_by_key(|c| c.range().least());
        Ok(CompressionTypeDecomposition {
            dom,
            cod,
            components,
        })
    }

    pub fn dom(&self) -> &Arc<Digraph> {
        &self.dom
    }

    pub fn cod(&self) -> &Arc<Digraph> {
        &self.cod
    }

    pub fn components(&self) -> &[ElementaryCompressionMap] {
        &self.components
    }

    pub fn assemble(&self) -> RegularMap {
        assemble(self.dom.clone(), self.cod.clone(), &self.components)
            .expect("decomposition components were checked at construction")
    }

    /// Distinct compression projections, canonically ordered.
    pub fn summands(&self) -> SummandStructure {
        image_summands(self)
    }
}

fn check_components(
    dom: &Arc<Digraph>,
    cod: &Arc<Digraph>,
    components: &[ElementaryCompressionMap],
) -> Result<(), MapError> {
    if components.iter().any(|c| c.dom != *dom || c.cod != *cod) {
        return Err(MapError::DomainMismatch);
    }
    let ranges: Vec<VertexSet> = components.iter().map(|c| c.range()).collect();
    for i in 0..ranges.len() {
        for j in i + 1..ranges.len() {
            if !ranges[i].is_disjoint(&ranges[j]) {
                return Err(MapError::RangeOverlap(i, j));
            }
        }
    }
    Ok(())
}

/// Direct sum of elementary compression maps:
/// `images(i,j) = { (rho_c(i), rho_c(j)) : i, j ∈ Q_c }`.
pub fn assemble(
    dom: Arc<Digraph>,
    cod: Arc<Digraph>,
    components: &[ElementaryCompressionMap],
) -> Result<RegularMap, MapError> {
    check_components(&dom, &cod, components)?;
    let mut images: BTreeMap<MatrixUnit, BTreeSet<MatrixUnit>> =
        dom.edges().iter().map(|&e| (e, BTreeSet::new())).collect();
    for c in components {
        for (e, units) in images.iter_mut() {
            if let (Some(&a), Some(&b)) = (c.rho.get(&e.row), c.rho.get(&e.col)) {
                units.insert(MatrixUnit::new(a, b));
            }
        }
    }
    RegularMap::new(dom, cod, images)
}

/// One step of an obstruction cycle: the domain edge and whether it runs
/// along the traversal direction (`n_m -> n_{m+1}`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CycleEdge {
    pub edge: MatrixUnit,
    pub forward: bool,
}

/// Cycle in the domain graph whose image under the map is broken, with the
/// element certifying that the map is not contractive.
#[derive(Debug, Clone, PartialEq)]
pub struct CycleObstruction {
    /// `n_1, ..., n_l`, pairwise distinct.
    pub cycle_vertices: Vec<usize>,
    /// `E_m` joins `n_m` and `n_{m+1}`; the last edge closes the cycle.
    pub cycle_edges: Vec<CycleEdge>,
    /// 1-based positions `t` where `E_t` and `E_{t-1}` (with `E_0 = E_l`)
    /// run in the same direction.
    pub same_direction: Vec<usize>,
    pub witness: SpaceElement,
}

impl CycleObstruction {
    fn from_cycle(space: Arc<Digraph>, vertices: Vec<usize>, edges: Vec<MatrixUnit>) -> Self {
        let l = vertices.len();
        debug_assert!(l >= 2 && edges.len() == l);
        let cycle_edges: Vec<CycleEdge> = edges
            .iter()
            .enumerate()
            .map(|(m, &e)| {
                let (from, to) = (vertices[m], vertices[(m + 1) % l]);
                debug_assert!(e == MatrixUnit::new(from, to) || e == MatrixUnit::new(to, from));
                CycleEdge {
                    edge: e,
                    forward: e.row == from && e.col == to,
                }
            })
            .collect();
        let same_direction: Vec<usize> = (0..l)
            .filter(|&m| cycle_edges[m].forward == cycle_edges[(m + l - 1) % l].forward)
            .map(|m| m + 1)
            .collect();
        let one = Complex64::new(1.0, 0.0);
        let terms = cycle_edges[..l - 1]
            .iter()
            .map(|c| (c.edge, one))
            .chain(same_direction.iter().map(|&t| (MatrixUnit::diag(vertices[t - 1]), one)))
            .chain(std::iter::once((cycle_edges[l - 1].edge, -one)));
        let witness = SpaceElement::new(space, terms).expect("cycle edges belong to the domain");
        CycleObstruction {
            cycle_vertices: vertices,
            cycle_edges,
            same_direction,
            witness,
        }
    }

    pub fn len(&self) -> usize {
        self.cycle_vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cycle_vertices.is_empty()
    }

    /// Size of the cycle pattern inside the witness once zero rows and
    /// columns are deleted: `(l + |T|) / 2`.
    pub fn pattern_size(&self) -> usize {
        (self.len() + self.same_direction.len()) / 2
    }
}

impl fmt::Display for CycleObstruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "cycle")?;
        for c in &self.cycle_edges {
            write!(f, " ({})", c.edge)?;
        }
        write!(f, "; witness")?;
        for (u, c) in self.witness.coeffs() {
            write!(f, " {:+}e_{{{u}}}", c.re)?;
        }
        Ok(())
    }
}

pub fn witness_element(o: &CycleObstruction) -> &SpaceElement {
    &o.witness
}

/// Outcome of [`decide_compression_type`].
#[derive(Debug, Clone, PartialEq)]
pub enum Decision {
    Compression(CompressionTypeDecomposition),
    Obstruction(CycleObstruction),
}

impl Decision {
    pub fn is_compression(&self) -> bool {
        matches!(self, Decision::Compression(_))
    }

    pub fn decomposition(&self) -> Option<&CompressionTypeDecomposition> {
        match self {
            Decision::Compression(d) => Some(d),
            Decision::Obstruction(_) => None,
        }
    }

    pub fn obstruction(&self) -> Option<&CycleObstruction> {
        match self {
            Decision::Compression(_) => None,
            Decision::Obstruction(o) => Some(o),
        }
    }
}

struct Link {
    to: usize,
    edge: MatrixUnit,
}

/// Orbit algorithm: decides whether a regular map is of compression type
/// (equivalently, contractive).
///
/// Each codomain vertex occurring in some `f(e_jj)` is labeled `j`. Orbits
/// are grown breadth-first over the image units, starting from the least
/// unvisited labeled vertex. Two orbit vertices sharing a label, or a domain
/// edge between orbit labels that the map kills inside the orbit, close a
/// cycle in the domain; otherwise every orbit is one elementary component.
pub fn decide_compression_type(f: &RegularMap) -> Decision {
    let mut label: BTreeMap<usize, usize> = BTreeMap::new();
    for v in f.dom.vertices() {
        for u in f.image(MatrixUnit::diag(v)) {
            label.insert(u.row, v);
        }
    }
    let mut links: BTreeMap<usize, Vec<(MatrixUnit, Link)>> = BTreeMap::new();
    for (&e, units) in &f.images {
        for &u in units.iter().filter(|u| !u.is_diagonal()) {
            links.entry(u.row).or_default().push((u, Link { to: u.col, edge: e }));
            links.entry(u.col).or_default().push((u, Link { to: u.row, edge: e }));
        }
    }
    for l in links.values_mut() {
        l.sort_by_key(|(u, _)| *u);
    }

    let mut visited = BTreeSet::new();
    let mut components = Vec::new();
    for &start in label.keys() {
        if visited.contains(&start) {
            continue;
        }
        // parent[v] = (tree parent, domain edge of the linking unit)
        let mut parent: BTreeMap<usize, Option<(usize, MatrixUnit)>> = BTreeMap::from([(start, None)]);
        let mut owner: BTreeMap<usize, usize> = BTreeMap::from([(label[&start], start)]);
        let mut queue = VecDeque::from([start]);
        visited.insert(start);
        while let Some(v) = queue.pop_front() {
            for (_, link) in links.get(&v).into_iter().flatten() {
                let w = link.to;
                if parent.contains_key(&w) {
                    continue;
                }
                let lw = label[&w];
                if let Some(&x) = owner.get(&lw) {
                    let (vertices, mut edges) = tree_path(&parent, &label, x, v);
                    edges.push(link.edge);
                    return Decision::Obstruction(CycleObstruction::from_cycle(
                        f.dom.clone(),
                        vertices,
                        edges,
                    ));
                }
                parent.insert(w, Some((v, link.edge)));
                owner.insert(lw, w);
                visited.insert(w);
                queue.push_back(w);
            }
        }
        for e in f.dom.edges().iter().filter(|e| !e.is_diagonal()) {
            if let (Some(&a), Some(&b)) = (owner.get(&e.row), owner.get(&e.col)) {
                if !f.images[e].contains(&MatrixUnit::new(a, b)) {
                    let (vertices, mut edges) = tree_path(&parent, &label, a, b);
                    edges.push(*e);
                    return Decision::Obstruction(CycleObstruction::from_cycle(
                        f.dom.clone(),
                        vertices,
                        edges,
                    ));
                }
            }
        }
        let q: VertexSet = owner.keys().copied().collect();
        let component = ElementaryCompressionMap::new(f.dom.clone(), f.cod.clone(), q, owner)
            .expect("an obstruction-free orbit is an elementary compression");
        components.push(component);
    }
    let d = CompressionTypeDecomposition::new(f.dom.clone(), f.cod.clone(), components)
        .expect("orbits are disjoint");
    debug_assert_eq!(&d.assemble(), f);
    Decision::Compression(d)
}

/// Path `from -> ... -> to` in the BFS tree, returned as the domain labels
/// of its vertices and the domain edges of its links.
fn tree_path(
    parent: &BTreeMap<usize, Option<(usize, MatrixUnit)>>,
    label: &BTreeMap<usize, usize>,
    from: usize,
    to: usize,
) -> (Vec<usize>, Vec<MatrixUnit>) {
    let ancestors = |mut v: usize| {
        let mut chain = vec![(v, None)];
        while let Some(&Some((p, e))) = parent.get(&v) {
            chain.last_mut().unwrap().1 = Some(e);
            chain.push((p, None));
            v = p;
        }
        chain
    };
    let up = ancestors(from);
    let down = ancestors(to);
    let down_set: BTreeSet<usize> = down.iter().map(|(v, _)| *v).collect();
    let meet = up.iter().position(|(v, _)| down_set.contains(v)).unwrap();
    let meet_vertex = up[meet].0;
    let down_meet = down.iter().position(|(v, _)| *v == meet_vertex).unwrap();

    let mut vertices: Vec<usize> = up[..=meet].iter().map(|(v, _)| label[v]).collect();
    let mut edges: Vec<MatrixUnit> = up[..meet].iter().map(|(_, e)| e.unwrap()).collect();
    for i in (0..down_meet).rev() {
        vertices.push(label[&down[i].0]);
        edges.push(down[i].1.unwrap());
    }
    (vertices, edges)
}

/// `g ∘ f`: `images(i,j) = ⋃_{(a,b) ∈ f(i,j)} g(a,b)`.
pub fn compose(f: &RegularMap, g: &RegularMap) -> Result<RegularMap, MapError> {
    if *f.cod != *g.dom {
        return Err(MapError::DomainMismatch);
    }
    let images = f
        .images
        .iter()
        .map(|(&e, units)| (e, units.iter().flat_map(|&u| g.image(u).copied()).collect()))
        .collect();
    RegularMap::new(f.dom.clone(), g.cod.clone(), images)
}

/// A summand `B(Q C^n) ≅ M_dim` of the C*-algebra generated by an image.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Summand {
    pub q: VertexSet,
    pub dim: usize,
}

/// Distinct compression projections of a compression-type map.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct SummandStructure {
    pub summands: Vec<Summand>,
}

impl SummandStructure {
    pub fn from_projections<I: IntoIterator<Item = VertexSet>>(qs: I) -> Self {
        let mut qs: Vec<VertexSet> = qs.into_iter().collect();
        qs.sort_by(|a, b| a.canonical_cmp(b));
        qs.dedup();
        SummandStructure {
            summands: qs
                .into_iter()
                .map(|q| Summand { dim: q.len(), q })
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.summands.len()
    }

    pub fn is_empty(&self) -> bool {
        self.summands.is_empty()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.summands.iter().map(|s| s.dim).collect()
    }

    pub fn projections(&self) -> impl Iterator<Item = &VertexSet> {
        self.summands.iter().map(|s| &s.q)
    }

    pub fn position(&self, q: &VertexSet) -> Option<usize> {
        self.summands.iter().position(|s| &s.q == q)
    }
}

/// One summand per distinct `Q` (literal vertex-set equality).
pub fn image_summands(d: &CompressionTypeDecomposition) -> SummandStructure {
    SummandStructure::from_projections(d.components.iter().map(|c| c.q.clone()))
}

/// `f ⊗ id_m` on `A(G) ⊗ M_m -> A(H) ⊗ M_m`.
pub fn ampliate_map(f: &RegularMap, m: usize) -> RegularMap {
    let dom = Arc::new(f.dom.ampliate(m));
    let cod = Arc::new(f.cod.ampliate(m));
    let mut images = BTreeMap::new();
    for (e, units) in &f.images {
        for a in 1..=m {
            for b in 1..=m {
                let key = MatrixUnit::new(ampliated_vertex(e.row, a, m), ampliated_vertex(e.col, b, m));
                let vals = units
                    .iter()
                    .map(|u| MatrixUnit::new(ampliated_vertex(u.row, a, m), ampliated_vertex(u.col, b, m)))
                    .collect();
                images.insert(key, vals);
            }
        }
    }
    RegularMap::new(dom, cod, images).expect("ampliation preserves regularity")
}
