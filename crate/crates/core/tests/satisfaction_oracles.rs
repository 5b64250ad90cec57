//! Builtin semantics against direct set computations on the indexed
//! presentation, over every instance of the arity within small bounds.

use std::collections::BTreeSet;

use dcl_core::enumerate::{enumerate_instances, Bounds};
use dcl_core::fixtures;
use dcl_core::indexed::{to_indexed, IndexedSemantics};
use dcl_core::satisfaction::{satisfies, validate_instance, ValidateOptions};
use dcl_core::signature::{ConstraintSymbol, Signature};
use dcl_core::sketch::ConstraintDeclaration;
use dcl_core::slice::TypedInstance;
use dcl_core::GraphMorphism;

type Rel = BTreeSet<(String, String)>;

fn rel(ix: &IndexedSemantics, arrow: &str) -> Rel {
    ix.arrow_span(arrow).unwrap().iter().map(|(_, s, t)| (s.clone(), t.clone())).collect()
}

fn image(r: &Rel, x: &str) -> BTreeSet<String> {
    r.iter().filter(|(s, _)| s == x).map(|(_, t)| t.clone()).collect()
}

fn then(r: &Rel, s: &Rel) -> Rel {
    r.iter()
        .flat_map(|(a, b)| s.iter().filter(move |(c, _)| c == b).map(move |(_, d)| (a.clone(), d.clone())))
        .collect()
}

fn check(sig: &Signature, label: &str, bounds: Bounds, oracle: impl Fn(&IndexedSemantics) -> bool) -> usize {
    let arity = sig.symbol(label).unwrap().arity().clone();
    let d = ConstraintDeclaration::new("d", label, GraphMorphism::identity(arity.clone()));
    let all = enumerate_instances(&arity, bounds).unwrap();
    for t in &all {
        let v = satisfies(sig, t, &d).unwrap();
        assert!(!v.is_unknown(), "{label}");
        assert_eq!(v.is_valid(), oracle(&to_indexed(t)), "{label} on {t:?}");
    }
    all.len()
}

#[test]
fn composite_inclusion_and_commutativity() {
    let sig = Signature::builtin();
    let bounds = Bounds { per_sort: 1, parallel: 1 };
    let paths = |ix: &IndexedSemantics| (then(&rel(ix, "p1"), &rel(ix, "p2")), then(&rel(ix, "q1"), &rel(ix, "q2")));
    let n = check(&sig, "[⇒]4", bounds, |ix| {
        let (p, q) = paths(ix);
        p.is_subset(&q)
    });
    check(&sig, "[comm]", bounds, |ix| {
        let (p, q) = paths(ix);
        p == q
    });
    assert!(n > 16);
}

#[test]
fn key_oracle() {
    let sig = Signature::builtin();
    check(&sig, "[key]", Bounds { per_sort: 2, parallel: 1 }, |ix| {
        let (k1, k2) = (rel(ix, "k1"), rel(ix, "k2"));
        let keys: Vec<_> = ix.node_set("K").unwrap().iter().map(|x| (image(&k1, x), image(&k2, x))).collect();
        keys.iter().collect::<BTreeSet<_>>().len() == keys.len()
    });
}

#[test]
fn joint_monicity_oracles() {
    let sig = Signature::builtin();
    let bounds = Bounds { per_sort: 2, parallel: 1 };
    let shared = |ix: &IndexedSemantics| {
        let (f, g) = (rel(ix, "f"), rel(ix, "g"));
        let span: Vec<&String> = ix.node_set("R").unwrap().iter().collect();
        span.iter().enumerate().any(|(i, x)| {
            span[i + 1..].iter().any(|y| {
                !image(&f, x).is_disjoint(&image(&f, y)) && !image(&g, x).is_disjoint(&image(&g, y))
            })
        })
    };
    check(&sig, "[jm]", bounds, |ix| !shared(ix));
    check(&sig, "[jm!]", bounds, |ix| {
        let (f, g) = (rel(ix, "f"), rel(ix, "g"));
        let functional = ix.node_set("R").unwrap().iter().all(|x| image(&f, x).len() == 1 && image(&g, x).len() == 1);
        functional && !shared(ix)
    });
}

#[test]
fn multiplicity_with_gap() {
    let mut sig = Signature::builtin();
    sig.add_symbol(ConstraintSymbol::multiplicity("[1..4,6]").unwrap()).unwrap();
    let admissible = |k: usize| matches!(k, 1..=4 | 6);
    check(&sig, "[1..4,6]", Bounds { per_sort: 3, parallel: 2 }, |ix| {
        let r = rel(ix, "r");
        ix.node_set("A").unwrap().iter().all(|x| admissible(image(&r, x).len()))
    });
    // One source element fanning out to k targets.
    let sym = sig.symbol("[1..4,6]").unwrap();
    for k in 0..=8 {
        let ys: Vec<String> = (0..k).map(|i| format!("y{i}")).collect();
        let ls: Vec<String> = (0..k).map(|i| format!("l{i}")).collect();
        let mut el = vec![("x", "A")];
        el.extend(ys.iter().map(|y| (y.as_str(), "B")));
        let ln: Vec<_> = ls.iter().zip(&ys).map(|(l, y)| (l.as_str(), "x", y.as_str(), "r")).collect();
        let t = TypedInstance::build(sym.arity().clone(), &el, &ln).unwrap();
        assert_eq!(sym.evaluate(&t).unwrap().is_valid(), admissible(k), "k = {k}");
    }
}

#[test]
fn subset_counts_parallel_links_once() {
    let sig = Signature::builtin();
    check(&sig, "[⇒]", Bounds { per_sort: 2, parallel: 2 }, |ix| rel(ix, "r1").is_subset(&rel(ix, "r2")));
}

// The shipped vehicle instance is valid.
#[test]
fn vehicle_instance_is_valid() {
    let sketch = fixtures::fig1_sketch().unwrap();
    let report = validate_instance(&sketch, &fixtures::fig1_instance(None), ValidateOptions::default()).unwrap();
    assert!(report.with_status(dcl_core::satisfaction::Status::Invalid).is_empty());
    assert!(report.with_status(dcl_core::satisfaction::Status::Unknown).is_empty());
}

// The span is jointly monic, but the leg lifts to `[1]` fail.
#[test]
fn relational_join_fails_closure() {
    let sketch = fixtures::fig3_sketch().unwrap();
    let t = fixtures::fig3_instance();
    let options = ValidateOptions { allow_unclosed: true, jobs: 1 };
    let open = validate_instance(&sketch, &t, options).unwrap();
    assert!(open.with_status(dcl_core::satisfaction::Status::Invalid).is_empty());
    let closed = validate_instance(&sketch.close(), &t, ValidateOptions::default()).unwrap();
    assert!(!closed.with_status(dcl_core::satisfaction::Status::Invalid).is_empty());
}

#[test]
fn unbound_instances_satisfy_everything() {
    let sig = Signature::builtin();
    for s in sig.symbols() {
        let empty = TypedInstance::empty(s.arity().clone());
        assert!(s.evaluate(&empty).unwrap().is_valid(), "{}", s.name());
    }
}
