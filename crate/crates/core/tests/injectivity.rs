use dcl_core::enumerate::{enumerate_instances, Bounds};
use dcl_core::fixtures::{fig2a, fig2b, seed_theory_arrow};
use dcl_core::injectivity::{
    coproduct_formula, coproduct_macro, derive_step, formula_key, infer, injective, SearchCaps, Step,
};
use dcl_core::random::{self, rng, Limits};
use dcl_core::signature::arrow_arity;
use dcl_core::slice::{SliceMorphism, TypedInstance};
use dcl_core::compose;
use proptest::prelude::*;
use rand::seq::SliceRandom;

fn limits() -> Limits {
    Limits { max_nodes: 2, max_arrows: 1, max_per_sort: 2, max_per_arrow: 2 }
}

/// Every test map `P → t` is checked against every map `Q → t`.
fn factors_everywhere(t: &TypedInstance, f: &SliceMorphism) -> bool {
    let tests = SliceMorphism::search(f.from(), t).unwrap().collect(usize::MAX).unwrap().morphisms;
    let through = SliceMorphism::search(f.to(), t).unwrap().collect(usize::MAX).unwrap().morphisms;
    tests.iter().all(|x| through.iter().any(|g| compose(f.map(), g).unwrap() == *x))
}

fn formula(seed: u64) -> Option<SliceMorphism> {
    let mut r = rng(seed);
    let schema = arrow_arity();
    let p = random::instance(&mut r, &schema, "p", limits());
    let q = random::instance(&mut r, &schema, "q", limits());
    let maps = SliceMorphism::search(&p, &q).unwrap().collect(16).unwrap().morphisms;
    let map = maps.choose(&mut r)?.clone();
    Some(SliceMorphism::new(p, q, map).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn injectivity_matches_brute_force(seed in any::<u64>()) {
        let Some(f) = formula(seed) else { return Ok(()) };
        let mut r = rng(seed ^ 1);
        let t = random::instance(&mut r, &arrow_arity(), "t", Limits { max_per_sort: 3, ..limits() });
        prop_assert_eq!(injective(&t, &f).unwrap(), factors_everywhere(&t, &f));
    }

    #[test]
    fn formula_key_respects_renaming(seed in any::<u64>()) {
        let Some(f) = formula(seed) else { return Ok(()) };
        let id = SliceMorphism::identity(f.from());
        prop_assert_eq!(formula_key(&id.then(&f).unwrap()).unwrap(), formula_key(&f).unwrap());
        prop_assert_eq!(formula_key(&f).unwrap() == formula_key(&id).unwrap(), f.is_isomorphism());
    }
}

#[test]
fn seed_axioms_express_totality_and_single_valuedness() {
    let schema = arrow_arity();
    for t in enumerate_instances(&schema, Bounds { per_sort: 2, parallel: 2 }).unwrap() {
        let total = t.fiber("A").all(|x| t.carrier().arrows().any(|(_, a)| a.src == x));
        let targets = |x: &str| {
            t.carrier().arrows().filter(|(_, a)| a.src == x).map(|(_, a)| a.tgt.clone()).collect::<Vec<_>>()
        };
        let single = t.fiber("A").all(|x| targets(x).windows(2).all(|w| w[0] == w[1]));
        assert_eq!(injective(&t, &fig2a()).unwrap(), total);
        assert_eq!(injective(&t, &fig2b()).unwrap(), single);
    }
}

#[test]
fn derived_formulas_hold_in_every_model() {
    let theory = seed_theory_arrow();
    let caps = SearchCaps { depth: 2, max_formulas: 16, ..SearchCaps::default() };
    let inference = infer(&theory, caps).unwrap();
    assert!(inference.derived.len() > 2);
    let models: Vec<_> = enumerate_instances(&arrow_arity(), Bounds { per_sort: 2, parallel: 1 })
        .unwrap()
        .into_iter()
        .filter(|t| theory.formulas().values().all(|f| injective(t, f).unwrap()))
        .collect();
    assert!(!models.is_empty());
    for d in &inference.derived {
        d.derivation.verify(&theory).unwrap();
        for m in &models {
            assert!(injective(m, &d.derivation.conclusion).unwrap(), "{:?}", d.derivation.script());
        }
    }
}

#[test]
fn coproduct_macro_builds_the_sum() {
    let theory = seed_theory_arrow();
    let e = derive_step(&theory, Step::Axiom("e".into())).unwrap();
    let u = derive_step(&theory, Step::Axiom("u".into())).unwrap();
    let sum = coproduct_macro(&theory, e, u).unwrap();
    assert_eq!(sum.script(), ["axiom", "pushout", "axiom", "pushout", "composition", "coproduct"]);
    let direct = coproduct_formula(&fig2a(), &fig2b()).unwrap();
    assert_eq!(formula_key(&sum.conclusion).unwrap(), formula_key(&direct).unwrap());
}

#[test]
fn ill_formed_steps_are_rejected() {
    let theory = seed_theory_arrow();
    assert!(derive_step(&theory, Step::Axiom("missing".into())).is_err());
    let e = derive_step(&theory, Step::Axiom("e".into())).unwrap();
    let u = derive_step(&theory, Step::Axiom("u".into())).unwrap();
    assert!(derive_step(&theory, Step::Composition(e.clone(), u)).is_err());
    let other = SliceMorphism::identity(fig2b().to());
    assert!(derive_step(&theory, Step::Pushout(e, other)).is_err());
}

#[test]
fn identities_are_always_derivable_and_satisfied() {
    let theory = seed_theory_arrow();
    let x = TypedInstance::terminal(arrow_arity());
    let d = derive_step(&theory, Step::Identity(x.clone())).unwrap();
    assert!(d.conclusion.is_isomorphism());
    let empty = TypedInstance::empty(arrow_arity());
    assert!(injective(&empty, &d.conclusion).unwrap());
}
