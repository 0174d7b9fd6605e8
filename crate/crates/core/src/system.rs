//! Direct systems of digraph spaces with compression-type connecting maps.
//!
//! Infinite systems are given by a finite prefix together with a
//! [`TailMode`]. `Stationary` means the Bratteli pattern of the last
//! provided transition repeats forever; the envelope machinery only runs on
//! such systems once the repetition has been observed in the data.

use std::collections::BTreeSet;
use std::sync::Arc;

use serde::de::{self, Deserializer};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bratteli::{BratteliDiagram, ConnectingMatrix};
use crate::digraph::{Digraph, SpaceElement, VertexSet};
use crate::numeric::{compression_norm, NumericError};
use crate::regular::{
    assemble, compose, decide_compression_type, CompressionTypeDecomposition, CycleObstruction, Decision,
    ElementaryCompressionMap, MapError, RegularMap, SummandStructure,
};

/// Largest `T_n` the AF realization will build.
pub const MAX_REALIZATION_VERTICES: usize = 1 << 10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SystemError {
    #[error("a direct system needs at least two spaces, got {0}")]
    TooShort(usize),
    #[error("map {0} does not run between spaces {0} and {next}", next = .0 + 1)]
    ShapeMismatch(usize),
    #[error("map {stage} is not of compression type: {obstruction}")]
    NotCompressionType {
        stage: usize,
        obstruction: Box<CycleObstruction>,
    },
    #[error("compression projections have not stabilized within the {provided} provided maps")]
    NotStabilized { provided: usize },
    #[error("level {level}: components with the same projection for target summand {target} disagree")]
    InconsistentJClass { level: usize, target: usize },
    #[error("level {level}: composite projection {q} is not a summand of the level")]
    UnknownSummand { level: usize, q: VertexSet },
    #[error("level {level}: summand {row} does not embed into the next level")]
    DeadSummand { level: usize, row: usize },
    #[error("level {level}: dimension recursion fails at column {column}")]
    DimensionRecursion { level: usize, column: usize },
    #[error("essential unitality cannot be judged for a finite tail")]
    Indeterminate,
    #[error("stage {0} is outside the system")]
    StageOutOfRange(usize),
    #[error("norm changed from {before} to {after} past a stable stage")]
    NotIsometric { before: f64, after: f64 },
    #[error("transition {0} has the wrong shape for its levels")]
    TransitionShape(usize),
    #[error("level {level}: summand dimensions must be positive")]
    ZeroDimension { level: usize },
    #[error("transition {level}: row {row} is zero")]
    ZeroRow { level: usize, row: usize },
    #[error("transition {level}: column {column} is zero")]
    ZeroColumn { level: usize, column: usize },
    #[error("transition {level}: column {column} sums to {sum}, summand has dimension {dim}")]
    NonUnitalColumn {
        level: usize,
        column: usize,
        sum: usize,
        dim: usize,
    },
    #[error("level {level} needs more than {max} vertices", max = MAX_REALIZATION_VERTICES)]
    Overflow { level: usize },
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Numeric(#[from] NumericError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TailMode {
    Finite,
    Stationary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DirectSystem {
    spaces: Vec<Arc<Digraph>>,
    maps: Vec<RegularMap>,
    decompositions: Vec<CompressionTypeDecomposition>,
    tail: TailMode,
}

impl DirectSystem {
    /// Checks composability and decides every map; a map that is not of
    /// compression type is rejected with its cycle witness.
    pub fn new(spaces: Vec<Digraph>, maps: Vec<RegularMap>, tail: TailMode) -> Result<Self, SystemError> {
        if spaces.len() < 2 {
            return Err(SystemError::TooShort(spaces.len()));
        }
        if maps.len() + 1 != spaces.len() {
            return Err(SystemError::ShapeMismatch(maps.len().min(spaces.len() - 1)));
        }
        let spaces: Vec<Arc<Digraph>> = spaces.into_iter().map(Arc::new).collect();
        let mut decompositions = Vec::with_capacity(maps.len());
        for (k, f) in maps.iter().enumerate() {
            if **f.dom() != *spaces[k] || **f.cod() != *spaces[k + 1] {
                return Err(SystemError::ShapeMismatch(k));
            }
            match decide_compression_type(f) {
                Decision::Compression(d) => decompositions.push(d),
                Decision::Obstruction(o) => {
                    return Err(SystemError::NotCompressionType {
                        stage: k,
                        obstruction: Box::new(o),
                    })
                }
            }
        }
        Ok(DirectSystem {
            spaces,
            maps,
            decompositions,
            tail,
        })
    }

    pub fn spaces(&self) -> &[Arc<Digraph>] {
        &self.spaces
    }

    pub fn maps(&self) -> &[RegularMap] {
        &self.maps
    }

    pub fn decompositions(&self) -> &[CompressionTypeDecomposition] {
        &self.decompositions
    }

    pub fn tail(&self) -> TailMode {
        self.tail
    }

    pub fn num_maps(&self) -> usize {
        self.maps.len()
    }

    /// `φ_{l-1} ∘ ... ∘ φ_k`, i.e. the maps `k..l` composed.
    pub fn composite(&self, k: usize, l: usize) -> Result<RegularMap, SystemError> {
        if k >= l || l > self.maps.len() {
            return Err(SystemError::StageOutOfRange(l));
        }
        let mut f = self.maps[k].clone();
        for g in &self.maps[k + 1..l] {
            f = compose(&f, g)?;
        }
        Ok(f)
    }
}

impl Serialize for DirectSystem {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Raw<'a> {
            spaces: Vec<&'a Digraph>,
            maps: &'a [RegularMap],
            tail: TailMode,
        }
        Raw {
            spaces: self.spaces.iter().map(|s| &**s).collect(),
            maps: &self.maps,
            tail: self.tail,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for DirectSystem {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = RawSystem::deserialize(deserializer)?;
        DirectSystem::new(raw.spaces, raw.maps, raw.tail).map_err(de::Error::custom)
    }
}

/// File shape of a system before mathematical validation.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSystem {
    pub spaces: Vec<Digraph>,
    pub maps: Vec<RegularMap>,
    pub tail: TailMode,
}

/// One stage of a telescoped system: the map out of `spaces[index]` with
/// its decomposition and distinct compression projections.
#[derive(Debug, Clone, PartialEq)]
pub struct Stage {
    pub index: usize,
    pub decomposition: CompressionTypeDecomposition,
    pub summands: SummandStructure,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TelescopedSystem {
    base: DirectSystem,
    start_index: usize,
    stages: Vec<Stage>,
    stable: bool,
}

impl TelescopedSystem {
    pub fn base(&self) -> &DirectSystem {
        &self.base
    }

    /// First map of the telescoped range.
    pub fn start_index(&self) -> usize {
        self.start_index
    }

    pub fn stages(&self) -> &[Stage] {
        &self.stages
    }

    /// Whether stability was witnessed by at least one later map.
    pub fn is_stable(&self) -> bool {
        self.stable
    }

    pub fn tail(&self) -> TailMode {
        self.base.tail
    }

    pub fn connecting_matrix(&self, level: usize) -> Result<ConnectingMatrix, SystemError> {
        crate::bratteli::connecting_matrix(self, level)
    }

    pub fn bratteli(&self) -> Result<BratteliDiagram, SystemError> {
        crate::bratteli::bratteli(self)
    }

    /// Norm of the image of `a ∈ spaces[k]` in the limit.
    ///
    /// `a` is pushed to the first telescoped stage at or after `k`, where the
    /// norm is the compression norm of that stage. One further push is
    /// checked to leave the norm unchanged.
    pub fn limit_norm(&self, k: usize, a: &SpaceElement, tol: f64) -> Result<f64, SystemError> {
        let maps = self.base.maps();
        if k >= maps.len() {
            return Err(SystemError::StageOutOfRange(k));
        }
        if **a.space() != *self.base.spaces[k] {
            return Err(MapError::DomainMismatch.into());
        }
        let mut a = a.clone();
        let mut k = k;
        while k < self.start_index {
            a = maps[k].apply(&a)?;
            k += 1;
        }
        let value = compression_norm(&self.base.decompositions[k], &a, tol)?;
        if k + 1 < maps.len() {
            let pushed = maps[k].apply(&a)?;
            let next = compression_norm(&self.base.decompositions[k + 1], &pushed, tol)?;
            if (next - value).abs() > 2.0 * tol * value.max(1.0) {
                return Err(SystemError::NotIsometric {
                    before: value,
                    after: next,
                });
            }
        }
        Ok(value)
    }
}

fn projection_set(d: &CompressionTypeDecomposition) -> BTreeSet<VertexSet> {
    d.components().iter().map(|c| c.q().clone()).collect()
}

/// Whether the projections of every composite `φ_l ∘ ... ∘ φ_k` (all
/// provided `l`) coincide with those of `φ_k`.
pub fn stage_is_stable(s: &DirectSystem, k: usize) -> Result<bool, SystemError> {
    let own = projection_set(&s.decompositions[k]);
    let mut composite = s.maps[k].clone();
    let mut previous = own.clone();
    for g in &s.maps[k + 1..] {
        composite = compose(&composite, g)?;
        let d = decide_compression_type(&composite);
        let d = d
            .decomposition()
            .expect("composites of compression-type maps are of compression type");
        let current = projection_set(d);
        debug_assert!(current.iter().all(|q| previous.iter().any(|p| q.is_subset(p))));
        if current != own {
            return Ok(false);
        }
        previous = current;
    }
    Ok(true)
}

/// Drops the initial maps whose compression projections still shrink under
/// later maps, keeping the tail from the first stage after which every stage
/// is stable.
///
/// A stationary tail additionally needs the last two transitions (three
/// stages) inside the stable range, so the repeating pattern is witnessed.
pub fn telescope(s: &DirectSystem) -> Result<TelescopedSystem, SystemError> {
    let count = s.num_maps();
    let mut start = count - 1;
    while start > 0 && stage_is_stable(s, start - 1)? {
        start -= 1;
    }
    if s.tail == TailMode::Stationary && (count < 3 || start > count - 3) {
        return Err(SystemError::NotStabilized { provided: count });
    }
    let stages = (start..count)
        .map(|k| Stage {
            index: k,
            decomposition: s.decompositions[k].clone(),
            summands: s.decompositions[k].summands(),
        })
        .collect();
    Ok(TelescopedSystem {
        base: s.clone(),
        start_index: start,
        stages,
        stable: start + 1 < count,
    })
}

/// Builds a system `T_{2^{N_0}} -> T_{2^{N_1}} -> ...` of block-diagonal
/// triangular embeddings realizing a unital Bratteli pattern.
///
/// Level `k`'s summands become consecutive diagonal intervals of
/// `T_{2^{N_k}}` starting at vertex 1. Transition `k` sends block `i`
/// into block `j` of the next level `n_ij` times, copies stacked with `i`
/// ascending then copy index ascending; all other units die. One more
/// map carries the last level identically onto itself so that every given
/// level appears as a stage of the result.
pub fn triangular_system_from_bratteli(
    dims: &[Vec<usize>],
    transitions: &[Vec<Vec<usize>>],
) -> Result<DirectSystem, SystemError> {
    if dims.len() != transitions.len() + 1 {
        return Err(SystemError::TransitionShape(transitions.len().min(dims.len())));
    }
    for (level, d) in dims.iter().enumerate() {
        if d.is_empty() || d.contains(&0) {
            return Err(SystemError::ZeroDimension { level });
        }
    }
    for (k, t) in transitions.iter().enumerate() {
        let (rows, cols) = (dims[k].len(), dims[k + 1].len());
        if t.len() != rows || t.iter().any(|r| r.len() != cols) {
            return Err(SystemError::TransitionShape(k));
        }
        if let Some(row) = t.iter().position(|r| r.iter().all(|&n| n == 0)) {
            return Err(SystemError::ZeroRow { level: k, row });
        }
        for column in 0..cols {
            if t.iter().all(|r| r[column] == 0) {
                return Err(SystemError::ZeroColumn { level: k, column });
            }
            let sum = t
                .iter()
                .zip(&dims[k])
                .try_fold(0usize, |acc, (r, &d)| acc.checked_add(r[column].checked_mul(d)?))
                .ok_or(SystemError::Overflow { level: k + 1 })?;
            if sum != dims[k + 1][column] {
                return Err(SystemError::NonUnitalColumn {
                    level: k,
                    column,
                    sum,
                    dim: dims[k + 1][column],
                });
            }
        }
    }

    let mut all_dims: Vec<Vec<usize>> = dims.to_vec();
    all_dims.push(dims.last().unwrap().clone());
    let last = dims.last().unwrap().len();
    let mut all_transitions: Vec<Vec<Vec<usize>>> = transitions.to_vec();
    all_transitions.push((0..last).map(|i| (0..last).map(|j| usize::from(i == j)).collect()).collect());

    let sizes = all_dims
        .iter()
        .enumerate()
        .map(|(level, d)| {
            d.iter()
                .try_fold(0usize, |acc, &x| acc.checked_add(x))
                .and_then(usize::checked_next_power_of_two)
                .filter(|&s| s <= MAX_REALIZATION_VERTICES)
                .ok_or(SystemError::Overflow { level })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let spaces: Vec<Arc<Digraph>> = sizes.into_iter().map(|n| Arc::new(Digraph::upper_triangular(n))).collect();

    let blocks = |d: &[usize]| -> Vec<VertexSet> {
        let mut start = 1;
        d.iter()
            .map(|&len| {
                let b: VertexSet = (start..start + len).collect();
                start += len;
                b
            })
            .collect()
    };

    let mut maps = Vec::with_capacity(all_transitions.len());
    for (k, t) in all_transitions.iter().enumerate() {
        let source = blocks(&all_dims[k]);
        let target = blocks(&all_dims[k + 1]);
        let mut components = Vec::new();
        for (j, tb) in target.iter().enumerate() {
            let mut cursor = tb.least().unwrap();
            for (i, sb) in source.iter().enumerate() {
                for _ in 0..t[i][j] {
                    let targets: Vec<usize> = (cursor..cursor + sb.len()).collect();
                    components.push(ElementaryCompressionMap::placed(
                        spaces[k].clone(),
                        spaces[k + 1].clone(),
                        sb.clone(),
                        &targets,
                    )?);
                    cursor += sb.len();
                }
            }
        }
        maps.push(assemble(spaces[k].clone(), spaces[k + 1].clone(), &components)?);
    }
    let spaces = spaces.into_iter().map(|s| (*s).clone()).collect();
    DirectSystem::new(spaces, maps, TailMode::Stationary)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regular::ElementaryCompressionMap;

    fn t(n: usize) -> Arc<Digraph> {
        Arc::new(Digraph::upper_triangular(n))
    }

    /// `a ↦ a ⊕ 0` from `T_n` into `T_{n+1}`.
    fn corner(n: usize) -> RegularMap {
        ElementaryCompressionMap::placed(t(n), t(n + 1), (1..=n).collect(), &(1..=n).collect::<Vec<_>>())
            .unwrap()
            .to_regular_map()
    }

    fn corner_system(from: usize, spaces: usize) -> DirectSystem {
        let sp = (from..from + spaces).map(Digraph::upper_triangular).collect();
        let maps = (from..from + spaces - 1).map(corner).collect();
        DirectSystem::new(sp, maps, TailMode::Stationary).unwrap()
    }

    #[test]
    fn shape_checks() {
        assert_eq!(
            DirectSystem::new(vec![Digraph::upper_triangular(2)], vec![], TailMode::Finite),
            Err(SystemError::TooShort(1))
        );
        let err = DirectSystem::new(
            vec![Digraph::upper_triangular(2), Digraph::upper_triangular(3)],
            vec![corner(3)],
            TailMode::Finite,
        );
        assert_eq!(err, Err(SystemError::ShapeMismatch(0)));
        let id = DirectSystem::new(
            vec![Digraph::upper_triangular(2), Digraph::upper_triangular(2)],
            vec![RegularMap::identity(t(2))],
            TailMode::Finite,
        );
        assert!(id.is_ok());
    }

    #[test]
    fn corner_telescoping_is_identity() {
        let s = corner_system(2, 4);
        let tel = telescope(&s).unwrap();
        assert_eq!(tel.start_index(), 0);
        for st in tel.stages() {
            let n = st.index + 2;
            assert_eq!(st.summands.len(), 1);
            assert_eq!(st.summands.summands[0].q, (1..=n).collect());
        }
    }

    #[test]
    fn dying_projection_advances_start() {
        // T_2 -> T_3 keeps {1} and {1,2}; the second map kills the copy of {1,2}.
        let f = assemble(
            t(2),
            t(3),
            &[
                ElementaryCompressionMap::placed(t(2), t(3), VertexSet::from([1]), &[1]).unwrap(),
                ElementaryCompressionMap::placed(t(2), t(3), VertexSet::from([1, 2]), &[2, 3]).unwrap(),
            ],
        )
        .unwrap();
        let g = ElementaryCompressionMap::placed(t(3), t(3), VertexSet::from([1]), &[1])
            .unwrap()
            .to_regular_map();
        let s = DirectSystem::new(
            vec![Digraph::upper_triangular(2), Digraph::upper_triangular(3), Digraph::upper_triangular(3)],
            vec![f, g],
            TailMode::Finite,
        )
        .unwrap();
        assert!(!stage_is_stable(&s, 0).unwrap());
        let tel = telescope(&s).unwrap();
        assert_eq!(tel.start_index(), 1);
        assert!(!tel.is_stable());
        let stationary = DirectSystem::new(s.spaces.iter().map(|g| (**g).clone()).collect(), s.maps.clone(), TailMode::Stationary)
            .unwrap();
        assert_eq!(telescope(&stationary), Err(SystemError::NotStabilized { provided: 2 }));
    }

    #[test]
    fn realization_errors() {
        let dims = vec![vec![1, 2], vec![1, 4]];
        assert_eq!(
            triangular_system_from_bratteli(&dims, &[vec![vec![0, 0], vec![1, 2]]]),
            Err(SystemError::ZeroRow { level: 0, row: 0 })
        );
        assert!(matches!(
            triangular_system_from_bratteli(&dims, &[vec![vec![1, 0], vec![0, 1]]]),
            Err(SystemError::NonUnitalColumn { column: 1, sum: 2, dim: 4, .. })
        ));
        assert!(matches!(
            triangular_system_from_bratteli(&[vec![1], vec![1, 1]], &[vec![vec![1, 0]]]),
            Err(SystemError::ZeroColumn { column: 1, .. })
        ));
        assert!(matches!(
            triangular_system_from_bratteli(&[vec![1000], vec![2000]], &[vec![vec![2]]]),
            Err(SystemError::Overflow { level: 1 })
        ));
    }

    #[test]
    fn realization_shapes() {
        let s = triangular_system_from_bratteli(&[vec![1, 2], vec![1, 4]], &[vec![vec![1, 0], vec![0, 2]]]).unwrap();
        let sizes: Vec<usize> = s.spaces().iter().map(|g| g.n()).collect();
        assert_eq!(sizes, vec![4, 8, 8]);
        let ranges: Vec<VertexSet> = s.decompositions()[0].components().iter().map(|c| c.range()).collect();
        assert_eq!(ranges, vec![VertexSet::from([1]), VertexSet::from([2, 3]), VertexSet::from([4, 5])]);
    }
}
