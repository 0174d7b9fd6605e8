//! Seeded generators of random digraphs, regular maps and Bratteli patterns.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;

use crate::digraph::{Digraph, MatrixUnit, VertexSet};
use crate::regular::{assemble, ElementaryCompressionMap, RegularMap};

/// Reflexive digraph on `n` vertices, each other edge present with
/// probability `density`.
pub fn random_digraph<R: Rng + ?Sized>(rng: &mut R, n: usize, density: f64) -> Digraph {
    let mut edges: Vec<MatrixUnit> = (1..=n).map(MatrixUnit::diag).collect();
    for i in 1..=n {
        for j in 1..=n {
            if i != j && rng.random_bool(density) {
                edges.push(MatrixUnit::new(i, j));
            }
        }
    }
    Digraph::new(n, edges).expect("loops are present")
}

/// Regular map with random diagonal supports and random partial matchings
/// on the other edges. Most such maps are not of compression type.
pub fn random_regular_map<R: Rng + ?Sized>(rng: &mut R, dom_max: usize, cod_max: usize) -> RegularMap {
    let (n, m) = (rng.random_range(1..=dom_max), rng.random_range(1..=cod_max));
    let dom = Arc::new(random_digraph(rng, n, 0.45));
    let cod = Arc::new(random_digraph(rng, m, 0.6));
    let mut pool: Vec<usize> = (1..=cod.n()).collect();
    pool.shuffle(rng);
    let mut support: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for j in dom.vertices() {
        let want = [0, 1, 1, 2][rng.random_range(0..4)].min(pool.len());
        support.insert(j, pool.split_off(pool.len() - want));
    }
    let mut images: BTreeMap<MatrixUnit, BTreeSet<MatrixUnit>> = BTreeMap::new();
    for &e in dom.edges() {
        if e.is_diagonal() {
            images.insert(e, support[&e.row].iter().map(|&k| MatrixUnit::diag(k)).collect());
            continue;
        }
        let mut candidates: Vec<MatrixUnit> = support[&e.row]
            .iter()
            .flat_map(|&a| support[&e.col].iter().map(move |&b| MatrixUnit::new(a, b)))
            .filter(|u| cod.has_edge(u.row, u.col))
            .collect();
        candidates.shuffle(rng);
        let (mut rows, mut cols) = (BTreeSet::new(), BTreeSet::new());
        let mut chosen = BTreeSet::new();
        for u in candidates {
            if rng.random_bool(0.8) && !rows.contains(&u.row) && !cols.contains(&u.col) {
                rows.insert(u.row);
                cols.insert(u.col);
                chosen.insert(u);
            }
        }
        images.insert(e, chosen);
    }
    RegularMap::new(dom, cod, images).expect("construction satisfies the regularity rules")
}

/// Connected vertex set grown from a random vertex, at most `max` large.
pub fn random_irreducible<R: Rng + ?Sized>(rng: &mut R, g: &Digraph, max: usize) -> VertexSet {
    let start = rng.random_range(1..=g.n());
    let target = rng.random_range(1..=max.max(1));
    let mut q = VertexSet::from([start]);
    while q.len() < target {
        let frontier: Vec<usize> = g
            .edges()
            .iter()
            .filter(|u| q.contains(u.row) != q.contains(u.col))
            .map(|u| if q.contains(u.row) { u.col } else { u.row })
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        match frontier.choose(rng) {
            Some(&v) => {
                q.insert(v);
            }
            None => break,
        }
    }
    q
}

/// Compression-type map out of `dom`: random irreducible projections placed
/// at disjoint random positions of a codomain that contains their edges
/// plus random extra edges.
pub fn random_compression_map_from<R: Rng + ?Sized>(rng: &mut R, dom: Arc<Digraph>, cod_max: usize) -> RegularMap {
    let mut qs = Vec::new();
    let mut used = 0;
    for _ in 0..rng.random_range(0..=3) {
        let q = random_irreducible(rng, &dom, 3);
        if used + q.len() > cod_max {
            break;
        }
        used += q.len();
        qs.push(q);
    }
    let n = rng.random_range(used.max(1)..=cod_max.max(used).max(1));
    let mut slots: Vec<usize> = (1..=n).collect();
    slots.shuffle(rng);
    let mut placements = Vec::new();
    let mut edges: BTreeSet<MatrixUnit> = (1..=n).map(MatrixUnit::diag).collect();
    for q in qs {
        let targets = slots.split_off(slots.len() - q.len());
        let rho: BTreeMap<usize, usize> = q.iter().copied().zip(targets.iter().copied()).collect();
        for e in dom.edges() {
            if let (Some(&a), Some(&b)) = (rho.get(&e.row), rho.get(&e.col)) {
                edges.insert(MatrixUnit::new(a, b));
            }
        }
        placements.push((q, targets));
    }
    for i in 1..=n {
        for j in 1..=n {
            if i != j && rng.random_bool(0.25) {
                edges.insert(MatrixUnit::new(i, j));
            }
        }
    }
    let cod = Arc::new(Digraph::new(n, edges).expect("loops are present"));
    let components: Vec<ElementaryCompressionMap> = placements
        .into_iter()
        .map(|(q, targets)| {
            ElementaryCompressionMap::placed(dom.clone(), cod.clone(), q, &targets).expect("edges were added")
        })
        .collect();
    assemble(dom, cod, &components).expect("ranges are disjoint")
}

pub fn random_compression_map<R: Rng + ?Sized>(rng: &mut R, dom_max: usize, cod_max: usize) -> RegularMap {
    let n = rng.random_range(1..=dom_max);
    let dom = Arc::new(random_digraph(rng, n, 0.45));
    random_compression_map_from(rng, dom, cod_max)
}

/// A unital Bratteli pattern repeating one square matrix over `levels`
/// levels, with every summand dimension at most `max_dim`.
pub fn random_stationary_pattern<R: Rng + ?Sized>(
    rng: &mut R,
    max_summands: usize,
    max_dim: usize,
    levels: usize,
) -> (Vec<Vec<usize>>, Vec<Vec<Vec<usize>>>) {
    loop {
        let r = rng.random_range(1..=max_summands);
        let m: Vec<Vec<usize>> = (0..r)
            .map(|_| (0..r).map(|_| [0, 0, 1, 1, 2][rng.random_range(0..5)]).collect())
            .collect();
        let zero_row = m.iter().any(|row| row.iter().all(|&x| x == 0));
        let zero_col = (0..r).any(|j| m.iter().all(|row| row[j] == 0));
        if zero_row || zero_col {
            continue;
        }
        let mut dims = vec![(0..r).map(|_| rng.random_range(1..=max_dim)).collect::<Vec<usize>>()];
        for _ in 1..levels {
            let prev = dims.last().unwrap();
            let next: Vec<usize> = (0..r).map(|j| (0..r).map(|i| m[i][j] * prev[i]).sum()).collect();
            dims.push(next);
        }
        if dims.iter().flatten().all(|&d| d <= max_dim) {
            return (dims, vec![m; levels - 1]);
        }
    }
}
