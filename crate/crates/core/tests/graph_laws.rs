mod common;

use std::sync::Arc;

use dcl_core::canon::canonicalize;
use dcl_core::hom::{enumerate_homomorphisms, find_isomorphism, HomSearch};
use dcl_core::limits::{coproduct, pullback, pushout};
use dcl_core::random::{self, rng};
use dcl_core::{compose, Graph, GraphMorphism};
use proptest::prelude::*;

use common::{brute_force_homs, graph, renamed_graph, small};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn composition_is_associative_and_unital(seed in any::<u64>()) {
        let mut r = rng(seed);
        let c = graph(&mut r);
        let h = random::morphism_into(&mut r, &c, "b", small());
        let g = random::morphism_into(&mut r, h.dom(), "a", small());
        let f = random::morphism_into(&mut r, g.dom(), "z", small());
        let left = compose(&compose(&f, &g).unwrap(), &h).unwrap();
        let right = compose(&f, &compose(&g, &h).unwrap()).unwrap();
        prop_assert_eq!(left, right);
        let id = GraphMorphism::identity(f.dom().clone());
        prop_assert_eq!(compose(&id, &f).unwrap(), f.clone());
        prop_assert_eq!(compose(&f, &GraphMorphism::identity(f.cod().clone())).unwrap(), f);
    }

    #[test]
    fn hom_search_matches_brute_force(seed in any::<u64>()) {
        let mut r = rng(seed);
        let dom = graph(&mut r);
        let cod = graph(&mut r);
        let found = enumerate_homomorphisms(&dom, &cod, usize::MAX).unwrap();
        prop_assert!(!found.truncated);
        prop_assert_eq!(found.morphisms.len(), brute_force_homs(&dom, &cod));
        for m in &found.morphisms {
            prop_assert!(GraphMorphism::new(dom.clone(), cod.clone(), m.node_map().clone(), m.arrow_map().clone()).is_ok());
        }
    }

    #[test]
    fn pullback_square_commutes_and_counts_pairs(seed in any::<u64>()) {
        let mut r = rng(seed);
        let c = graph(&mut r);
        let f = random::morphism_into(&mut r, &c, "p", small());
        let g = random::morphism_into(&mut r, &c, "q", small());
        let pb = pullback(&f, &g).unwrap();
        prop_assert_eq!(compose(&pb.left, &f).unwrap(), compose(&pb.right, &g).unwrap().with_cod(f.cod().clone()).unwrap());
        let node_pairs = f.dom().nodes().map(|x| g.dom().nodes().filter(|y| f.node(x) == g.node(y)).count()).sum::<usize>();
        let arrow_pairs = f.dom().arrows().map(|(x, _)| g.dom().arrows().filter(|(y, _)| f.arrow(x) == g.arrow(y)).count()).sum::<usize>();
        prop_assert_eq!(pb.apex.node_count(), node_pairs);
        prop_assert_eq!(pb.apex.arrow_count(), arrow_pairs);
    }

    #[test]
    fn pushout_square_commutes_and_is_jointly_surjective(seed in any::<u64>()) {
        let mut r = rng(seed);
        let a = graph(&mut r);
        let f = random::morphism_into(&mut r, &a, "p", small());
        let b = graph(&mut r);
        let Some(g) = HomSearch::new(f.dom().clone(), b.clone()).first().unwrap() else { return Ok(()) };
        let po = pushout(&f, &g).unwrap();
        prop_assert_eq!(compose(&f, &po.from_left).unwrap(), compose(&g, &po.from_right).unwrap());
        for x in po.apex.nodes() {
            let hit = po.from_left.node_map().values().chain(po.from_right.node_map().values()).any(|y| y == x);
            prop_assert!(hit, "apex node {} not covered", x);
        }
        prop_assert!(po.apex.arrow_count() <= a.arrow_count() + b.arrow_count());
    }

    #[test]
    fn canonical_form_is_a_complete_invariant(seed in any::<u64>()) {
        let mut r = rng(seed);
        let g = graph(&mut r);
        let (copy, _) = renamed_graph(&g);
        let c1 = canonicalize(&g).unwrap();
        let c2 = canonicalize(&copy).unwrap();
        prop_assert_eq!(&c1.graph, &c2.graph);
        prop_assert!(c1.relabeling.is_isomorphism());
        let h = graph(&mut r);
        let same = canonicalize(&h).unwrap().graph == c1.graph;
        prop_assert_eq!(same, find_isomorphism(&g, &h).unwrap().is_some());
    }
}

#[test]
fn coproduct_is_disjoint_union() {
    let g = Arc::new(Graph::new(["a", "b"], [("e", "a", "b")]).unwrap());
    let h = Arc::new(Graph::new(["a"], [("l", "a", "a")]).unwrap());
    let c = coproduct(&g, &h);
    assert_eq!(c.apex.node_count(), 3);
    assert_eq!(c.apex.arrow_count(), 2);
    assert!(c.from_left.is_injective() && c.from_right.is_injective());
}

#[test]
fn malformed_graphs_are_rejected() {
    assert!(Graph::new(["a", "a"], Vec::<(&str, &str, &str)>::new()).is_err());
    assert!(Graph::new(["a"], [("e", "a", "b")]).is_err());
    assert!(Graph::new(["a"], [("a", "a", "a")]).is_err());
}

#[test]
fn terminal_graph_receives_exactly_one_map() {
    let t = Arc::new(Graph::terminal());
    let mut r = rng(1);
    for _ in 0..20 {
        let g = graph(&mut r);
        assert_eq!(enumerate_homomorphisms(&g, &t, 10).unwrap().morphisms.len(), 1);
    }
}
