use std::sync::Arc;

use afenv::bratteli::is_essentially_unital;
use afenv::envelope::{classify_uhf, envelope_diagram, EnvelopeError, UhfDescriptor};
use afenv::numeric::{compression_norm, random_element, trial_rng};
use afenv::{
    assemble, telescope, triangular_system_from_bratteli, Digraph, DirectSystem, ElementaryCompressionMap,
    MatrixUnit, RegularMap, SpaceElement, SystemError, TailMode, VertexSet,
};

fn t(n: usize) -> Arc<Digraph> {
    Arc::new(Digraph::upper_triangular(n))
}

fn interval(a: usize, b: usize) -> VertexSet {
    (a..=b).collect()
}

fn place(dom: usize, cod: usize, q: VertexSet, first: usize) -> ElementaryCompressionMap {
    let targets: Vec<usize> = (first..first + q.len()).collect();
    ElementaryCompressionMap::placed(t(dom), t(cod), q, &targets).unwrap()
}

/// `a ↦ a_22 ⊕ pap ⊕ pap` from `T_n` to `T_{2n-1}`, `p` the last `n-1` diagonal units.
fn doubling(n: usize) -> RegularMap {
    let m = 2 * n - 1;
    assemble(
        t(n),
        t(m),
        &[
            place(n, m, VertexSet::from([2]), 1),
            place(n, m, interval(2, n), 2),
            place(n, m, interval(2, n), n + 1),
        ],
    )
    .unwrap()
}

/// `a ↦ a ⊕ a_ii` from `T_n` to `T_{n+1}`.
fn interval_compression(n: usize, i: usize) -> RegularMap {
    assemble(t(n), t(n + 1), &[place(n, n + 1, interval(1, n), 1), place(n, n + 1, VertexSet::from([i]), n + 1)])
        .unwrap()
}

/// `a ↦ a ⊕ 0` from `T_n` to `T_{n+1}`.
fn corner(n: usize) -> RegularMap {
    place(n, n + 1, interval(1, n), 1).to_regular_map()
}

fn system(sizes: &[usize], map: impl Fn(usize) -> RegularMap) -> DirectSystem {
    let spaces = sizes.iter().map(|&n| Digraph::upper_triangular(n)).collect();
    let maps = sizes[..sizes.len() - 1].iter().map(|&n| map(n)).collect();
    DirectSystem::new(spaces, maps, TailMode::Stationary).unwrap()
}

fn doubling_system() -> DirectSystem {
    system(&[3, 5, 9, 17], doubling)
}

#[test]
fn doubling_diagram_and_envelope() {
    let tel = telescope(&doubling_system()).unwrap();
    assert_eq!(tel.start_index(), 0);
    let d = tel.bratteli().unwrap();
    assert_eq!(d.all_dims(), vec![vec![1, 2], vec![1, 4], vec![1, 8]]);
    assert_eq!(d.transition_rows(), vec![vec![vec![1, 0], vec![0, 2]]; 2]);
    assert_eq!(d.stationary_from(), Some(0));
    assert_eq!(d.flags(0), vec![false, true]);
    assert!(is_essentially_unital(&tel).unwrap());

    let env = envelope_diagram(&tel).unwrap();
    assert_eq!(env.removed.nodes, [(0, 0), (1, 0), (2, 0)].into_iter().collect());
    assert_eq!(env.quotient.all_dims(), vec![vec![2], vec![4], vec![8]]);
    assert_eq!(env.quotient.transition_rows(), vec![vec![vec![2]]; 2]);
    assert_eq!(env.uhf, Some(UhfDescriptor { base_dim: 2, ratio: 2 }));
    assert_eq!(classify_uhf(&env.quotient), env.uhf);
}

#[test]
fn doubling_limit_norms() {
    let tel = telescope(&doubling_system()).unwrap();
    let e = |i, j| SpaceElement::unit(t(3), MatrixUnit::new(i, j)).unwrap();
    assert_eq!(tel.limit_norm(0, &e(1, 1), 1e-9).unwrap(), 0.0);
    assert!((tel.limit_norm(0, &e(2, 2), 1e-9).unwrap() - 1.0).abs() < 1e-12);
    let a = e(1, 2).add(&e(2, 3)).unwrap();
    let d = &tel.base().decompositions()[0];
    assert!((compression_norm(d, &a, 1e-9).unwrap() - 1.0).abs() < 1e-12);
    assert!(matches!(tel.limit_norm(3, &e(1, 1), 1e-9), Err(SystemError::StageOutOfRange(3))));
}

#[test]
fn surviving_summands_carry_the_norm() {
    // Dropping the non-maximal summands leaves every compression norm unchanged.
    let tel = telescope(&doubling_system()).unwrap();
    for (k, stage) in tel.stages().iter().enumerate() {
        let space = tel.base().spaces()[stage.index].clone();
        for trial in 0..50 {
            let a = random_element(&space, &mut trial_rng(k as u64, trial));
            let full = compression_norm(&stage.decomposition, &a, 1e-9).unwrap();
            let kept = stage
                .summands
                .projections()
                .filter(|q| stage.summands.projections().all(|p| p == *q || !q.is_subset(p)))
                .map(|q| afenv::numeric::compressed_norm(&a, q, 1e-9).unwrap())
                .fold(0.0, f64::max);
            assert!((full - kept).abs() <= 1e-9, "stage {k} trial {trial}: {full} vs {kept}");
        }
    }
}

#[test]
fn interval_compression_envelope() {
    let tel = telescope(&system(&[5, 6, 7, 8], |n| interval_compression(n, 3))).unwrap();
    let d = tel.bratteli().unwrap();
    assert_eq!(d.all_dims(), vec![vec![5, 1], vec![6, 1], vec![7, 1]]);
    assert_eq!(d.transition_rows(), vec![vec![vec![1, 0], vec![1, 1]]; 2]);
    assert_eq!(d.flags(1), vec![true, false]);
    assert!(is_essentially_unital(&tel).unwrap());
    let env = envelope_diagram(&tel).unwrap();
    assert!(env.removed.is_empty());
    assert_eq!(env.quotient, env.diagram);
    assert_eq!(env.uhf, None);
}

#[test]
fn corner_system_is_rejected() {
    let tel = telescope(&system(&[2, 3, 4, 5], corner)).unwrap();
    let d = tel.bratteli().unwrap();
    assert_eq!(d.all_dims(), vec![vec![2], vec![3], vec![4]]);
    assert_eq!(d.transition_rows(), vec![vec![vec![1]]; 2]);
    assert!(!is_essentially_unital(&tel).unwrap());
    match envelope_diagram(&tel) {
        Err(EnvelopeError::NotEssentiallyUnital { defects }) => {
            assert_eq!(defects.len(), 2);
            assert_eq!((defects[0].column_sum, defects[0].dim), (2, 3));
        }
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn finite_tail_is_indeterminate() {
    let s = doubling_system();
    let finite = DirectSystem::new(
        s.spaces().iter().map(|g| (**g).clone()).collect(),
        s.maps().to_vec(),
        TailMode::Finite,
    )
    .unwrap();
    let tel = telescope(&finite).unwrap();
    assert_eq!(tel.bratteli().unwrap().stationary_from(), None);
    assert_eq!(is_essentially_unital(&tel), Err(SystemError::Indeterminate));
    assert_eq!(envelope_diagram(&tel), Err(EnvelopeError::NonStationary));
}

#[test]
fn identity_system() {
    let s = DirectSystem::new(
        vec![Digraph::upper_triangular(3), Digraph::upper_triangular(3)],
        vec![RegularMap::identity(t(3))],
        TailMode::Finite,
    )
    .unwrap();
    let tel = telescope(&s).unwrap();
    let d = tel.bratteli().unwrap();
    assert_eq!(d.all_dims(), vec![vec![3]]);
    let s = system(&[3, 3, 3, 3], |n| RegularMap::identity(t(n)));
    let d = telescope(&s).unwrap().bratteli().unwrap();
    assert_eq!(d.transition_rows(), vec![vec![vec![1]]; 2]);
}

#[test]
fn truncation_in_a_system_is_reported() {
    let cyc = Arc::new(Digraph::cycle(3));
    let f = RegularMap::from_table(
        cyc.clone(),
        cyc.clone(),
        cyc.edges()
            .iter()
            .map(|e| ((e.row, e.col), if (e.row, e.col) == (3, 1) { vec![] } else { vec![(e.row, e.col)] })),
    )
    .unwrap();
    let err = DirectSystem::new(vec![Digraph::cycle(3), Digraph::cycle(3)], vec![f], TailMode::Finite).unwrap_err();
    match err {
        SystemError::NotCompressionType { stage, obstruction } => {
            assert_eq!(stage, 0);
            assert_eq!(obstruction.len(), 3);
        }
        other => panic!("unexpected {other}"),
    }
}

#[test]
fn realized_doubling_pattern() {
    let dims = vec![vec![1, 2], vec![1, 4], vec![1, 8]];
    let tr = vec![vec![vec![1, 0], vec![0, 2]]; 2];
    let s = triangular_system_from_bratteli(&dims, &tr).unwrap();
    let tel = telescope(&s).unwrap();
    let env = envelope_diagram(&tel).unwrap();
    assert!(env.removed.is_empty());
    assert_eq!(env.quotient.all_dims(), dims);
    assert_eq!(env.quotient.transition_rows(), tr);

    let s = triangular_system_from_bratteli(&[vec![2], vec![4], vec![8]], &[vec![vec![2]], vec![vec![2]]]).unwrap();
    let env = envelope_diagram(&telescope(&s).unwrap()).unwrap();
    assert_eq!(env.uhf, Some(UhfDescriptor { base_dim: 2, ratio: 2 }));
}

#[test]
fn system_json_round_trip() {
    let s = doubling_system();
    let json = serde_json::to_string(&s).unwrap();
    let back: DirectSystem = serde_json::from_str(&json).unwrap();
    assert_eq!(back, s);
}
