use std::collections::BTreeSet;
use std::sync::Arc;

use afenv::bratteli::{is_essentially_unital, BratteliDiagram, ConnectingMatrix, Node};
use afenv::envelope::{envelope_diagram, silov_generators};
use afenv::numeric::{
    compression_norm, contractivity_probe, norm, operator_norm, random_element, realize, trial_rng, ComplexMatrix,
};
use afenv::regular::{ampliate_map, witness_element};
use afenv::sample::{
    random_compression_map, random_compression_map_from, random_digraph, random_regular_map,
    random_stationary_pattern,
};
use afenv::system::stage_is_stable;
use afenv::{
    assemble, compose, decide_compression_type, telescope, triangular_system_from_bratteli, Decision, DirectSystem,
    SpaceElement, TailMode, VertexSet,
};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::Rng;

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}

/// Chain of three composable compression-type maps.
fn chain(seed: u64) -> DirectSystem {
    let mut rng = trial_rng(seed, 0);
    let mut maps = vec![random_compression_map(&mut rng, 5, 8)];
    for _ in 0..2 {
        let dom = maps.last().unwrap().cod().clone();
        maps.push(random_compression_map_from(&mut rng, dom, 8));
    }
    let mut spaces = vec![(**maps[0].dom()).clone()];
    spaces.extend(maps.iter().map(|f| (**f.cod()).clone()));
    DirectSystem::new(spaces, maps, TailMode::Finite).unwrap()
}

proptest! {
    #![proptest_config(config(64))]

    #[test]
    fn components_partition_the_projection(seed in any::<u64>()) {
        let mut rng = trial_rng(seed, 0);
        let n = rng.random_range(1..=7);
        let g = random_digraph(&mut rng, n, 0.3);
        let q: VertexSet = g.vertices().filter(|_| rng.random_bool(0.6)).collect();
        prop_assume!(!q.is_empty());
        let parts = g.underlying_components(&q).unwrap();
        let mut union = BTreeSet::new();
        for p in &parts {
            for v in p.iter() {
                prop_assert!(union.insert(*v));
            }
        }
        prop_assert_eq!(&union, q.as_set());
        prop_assert_eq!(g.is_irreducible(&q).unwrap(), parts.len() == 1);
    }

    #[test]
    fn ampliated_space_edge_count(seed in any::<u64>(), m in 1usize..4) {
        let mut rng = trial_rng(seed, 0);
        let n = rng.random_range(1..=5);
        let g = random_digraph(&mut rng, n, 0.4);
        prop_assert_eq!(g.ampliate(m).num_edges(), g.num_edges() * m * m);
    }

    #[test]
    fn decision_round_trip(seed in any::<u64>()) {
        let mut rng = trial_rng(seed, 0);
        let f = random_compression_map(&mut rng, 6, 12);
        let d = decide_compression_type(&f);
        let d = d.decomposition().expect("assembled maps decompose");
        prop_assert_eq!(&d.assemble(), &f);
        let again = decide_compression_type(&d.assemble());
        prop_assert_eq!(again.decomposition(), Some(d));
        let rebuilt = assemble(f.dom().clone(), f.cod().clone(), d.components()).unwrap();
        prop_assert_eq!(rebuilt, f);
    }

    #[test]
    fn composition_is_associative(seed in any::<u64>()) {
        let s = chain(seed);
        let [f, g, h] = [&s.maps()[0], &s.maps()[1], &s.maps()[2]];
        let left = compose(&compose(f, g).unwrap(), h).unwrap();
        let right = compose(f, &compose(g, h).unwrap()).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn composite_projections_refine(seed in any::<u64>()) {
        let s = chain(seed);
        for k in 0..s.num_maps() {
            let source: Vec<&VertexSet> = s.decompositions()[k].components().iter().map(|c| c.q()).collect();
            for l in k + 1..=s.num_maps() {
                let comp = s.composite(k, l).unwrap();
                let d = decide_compression_type(&comp);
                let d = d.decomposition().expect("composites decompose");
                for c in d.components() {
                    prop_assert!(source.iter().any(|q| c.q().is_subset(q)));
                }
            }
        }
    }

    #[test]
    fn stable_stages_keep_their_projections(seed in any::<u64>()) {
        let s = chain(seed);
        let t = telescope(&s).unwrap();
        for k in t.start_index()..s.num_maps() {
            prop_assert!(stage_is_stable(&s, k).unwrap());
        }
        for stage in t.stages() {
            let own: BTreeSet<VertexSet> = stage.summands.projections().cloned().collect();
            for l in stage.index + 1..=s.num_maps() {
                let d = decide_compression_type(&s.composite(stage.index, l).unwrap());
                let qs: BTreeSet<VertexSet> =
                    d.decomposition().unwrap().components().iter().map(|c| c.q().clone()).collect();
                prop_assert_eq!(&qs, &own);
            }
        }
    }

    #[test]
    fn ampliation_preserves_the_verdict(seed in any::<u64>(), m in 2usize..4) {
        let mut rng = trial_rng(seed, 0);
        let f = if rng.random_bool(0.5) { random_regular_map(&mut rng, 4, 6) } else { random_compression_map(&mut rng, 4, 6) };
        let accepted = decide_compression_type(&f).is_compression();
        let g = ampliate_map(&f, m);
        prop_assert_eq!(decide_compression_type(&g).is_compression(), accepted);
        if let Decision::Compression(d) = decide_compression_type(&f) {
            let ranks: Vec<usize> = d.components().iter().map(|c| c.rank() * m).collect();
            let dg = decide_compression_type(&g);
            let mut amp: Vec<usize> = dg.decomposition().unwrap().components().iter().map(|c| c.rank()).collect();
            let mut want = ranks;
            amp.sort();
            want.sort();
            prop_assert_eq!(amp, want);
        }
    }
}

proptest! {
    #![proptest_config(config(32))]

    #[test]
    fn accepted_maps_are_contractive(seed in any::<u64>()) {
        let mut rng = trial_rng(seed, 0);
        let f = random_compression_map(&mut rng, 6, 12);
        let report = contractivity_probe(&f, 40, seed, 1e-9, &[]).unwrap();
        prop_assert!(report.is_contractive(), "{:?}", report);
    }

    #[test]
    fn witnesses_expand(seed in any::<u64>()) {
        let mut rng = trial_rng(seed, 0);
        let f = random_regular_map(&mut rng, 6, 12);
        if let Decision::Obstruction(o) = decide_compression_type(&f) {
            let a = witness_element(&o);
            let before = norm(&realize(a));
            let after = norm(&realize(&f.apply(a).unwrap()));
            prop_assert!(after >= before + 1e-6, "{} -> {}", before, after);
        }
    }

    #[test]
    fn image_norm_is_the_compression_norm(seed in any::<u64>()) {
        let mut rng = trial_rng(seed, 0);
        let f = random_compression_map(&mut rng, 6, 12);
        let d = decide_compression_type(&f);
        let d = d.decomposition().unwrap();
        let a = random_element(f.dom(), &mut rng);
        let direct = norm(&realize(&f.apply(&a).unwrap()));
        prop_assert!((direct - compression_norm(d, &a, 1e-9).unwrap()).abs() <= 2e-9);
    }

    #[test]
    fn stable_pushes_are_isometric(seed in any::<u64>()) {
        let s = chain(seed);
        let t = telescope(&s).unwrap();
        let k = t.start_index();
        prop_assume!(k + 1 < s.num_maps());
        let mut rng = trial_rng(seed, 1);
        let a = random_element(&s.spaces()[k], &mut rng);
        let image = s.maps()[k].apply(&a).unwrap();
        let here = compression_norm(&s.decompositions()[k], &a, 1e-9).unwrap();
        let there = compression_norm(&s.decompositions()[k + 1], &image, 1e-9).unwrap();
        prop_assert!((here - there).abs() <= 1e-9);
        prop_assert!((t.limit_norm(k, &a, 1e-9).unwrap() - here).abs() <= 1e-12);
    }

    #[test]
    fn operator_norm_is_submultiplicative(seed in any::<u64>(), n in 1usize..9) {
        let mut rng = trial_rng(seed, 0);
        let mut draw = || ComplexMatrix::from_fn(n, n, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        let (a, b) = (draw(), draw());
        let ab = operator_norm(&a.mul(&b), 1e-9).unwrap().value;
        prop_assert!(ab <= norm(&a) * norm(&b) + 1e-9);
    }

    #[test]
    fn realization_is_injective(seed in any::<u64>()) {
        let mut rng = trial_rng(seed, 0);
        let g = Arc::new(random_digraph(&mut rng, 4, 0.5));
        let a = random_element(&g, &mut rng);
        let b = random_element(&g, &mut rng);
        prop_assert_eq!(a == b, realize(&a) == realize(&b));
        let zero = SpaceElement::zero(g.clone());
        prop_assert_eq!(realize(&zero), ComplexMatrix::zeros(4, 4));
    }
}

proptest! {
    #![proptest_config(config(12))]

    #[test]
    fn realized_patterns_round_trip(seed in any::<u64>(), levels in 3usize..5) {
        let mut rng = trial_rng(seed, 0);
        let (dims, tr) = random_stationary_pattern(&mut rng, 4, 8, levels);
        let s = triangular_system_from_bratteli(&dims, &tr).unwrap();
        let t = telescope(&s).unwrap();
        prop_assert!(is_essentially_unital(&t).unwrap());
        let env = envelope_diagram(&t).unwrap();
        prop_assert!(env.removed.is_empty());
        prop_assert_eq!(env.quotient.all_dims(), dims);
        prop_assert_eq!(env.quotient.transition_rows(), tr);
    }

    #[test]
    fn generators_are_forward_closed(seed in any::<u64>()) {
        let mut rng = trial_rng(seed, 0);
        let r = rng.random_range(1..=4);
        let m: Vec<Vec<usize>> = (0..r).map(|_| (0..r).map(|_| rng.random_range(0..2)).collect()).collect();
        let flags: Vec<bool> = (0..r).map(|_| rng.random_bool(0.4)).collect();
        let level = || flags.iter().map(|&maximal| Node { dim: 1, q: None, maximal }).collect::<Vec<_>>();
        let t = ConnectingMatrix::from_rows(&m).unwrap();
        let d = BratteliDiagram::new(vec![level(), level(), level()], vec![t.clone(), t.clone()], true).unwrap();
        let g = silov_generators(&d).unwrap();
        for &(k, v) in &g.nodes {
            if k < 2 {
                for w in 0..r {
                    prop_assert!(t.get(v, w) == 0 || g.contains(k + 1, w));
                }
            }
            prop_assert_eq!(g.tail[v], k == 2 || g.tail[v]);
        }
        for v in 0..r {
            prop_assert_eq!(g.contains(2, v), g.tail[v]);
        }
    }
}
