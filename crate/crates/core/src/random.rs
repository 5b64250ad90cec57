//! Seeded generators of small graphs, morphisms, instances and deltas for
//! the property harnesses.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::delta::Delta;
use crate::error::Result;
use crate::graph::{Arrow, Graph, GraphMorphism};
use crate::hom::HomSearch;
use crate::signature::Signature;
use crate::sketch::ConstraintDeclaration;
use crate::slice::{SliceMorphism, TypedInstance};

pub type DclRng = ChaCha8Rng;

pub fn rng(seed: u64) -> DclRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Shape limits for generated graphs and instances.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    pub max_nodes: usize,
    pub max_arrows: usize,
    /// Elements per schema node in generated instances.
    pub max_per_sort: usize,
    /// Links per schema arrow in generated instances.
    pub max_per_arrow: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_nodes: 5,
            max_arrows: 6,
            max_per_sort: 2,
            max_per_arrow: 3,
        }
    }
}

/// A graph with `1..=max_nodes` nodes `{prefix}n{i}` and up to
/// `max_arrows` arrows `{prefix}e{i}`.
pub fn graph(rng: &mut DclRng, prefix: &str, limits: Limits) -> Graph {
    let n = rng.gen_range(1..=limits.max_nodes.max(1));
    let m = rng.gen_range(0..=limits.max_arrows);
    let nodes: Vec<String> = (0..n).map(|i| format!("{prefix}n{i}")).collect();
    let arrows: BTreeMap<String, Arrow> = (0..m)
        .map(|i| {
            let src = nodes.choose(rng).expect("non-empty").clone();
            let tgt = nodes.choose(rng).expect("non-empty").clone();
            (format!("{prefix}e{i}"), Arrow { src, tgt })
        })
        .collect();
    Graph::from_parts(nodes.into_iter().collect(), arrows)
}

/// A random graph `G` with a morphism `G → cod`. Every arrow of `G` is
/// placed over a random arrow of `cod` between preimages of its ends.
pub fn morphism_into(rng: &mut DclRng, cod: &Arc<Graph>, prefix: &str, limits: Limits) -> GraphMorphism {
    let cod_nodes: Vec<&str> = cod.nodes().collect();
    let cod_arrows: Vec<(&str, &Arrow)> = cod.arrows().collect();
    let n = rng.gen_range(1..=limits.max_nodes.max(1));
    let mut node_map = BTreeMap::new();
    let mut fiber: BTreeMap<&str, Vec<String>> = BTreeMap::new();
    for i in 0..n {
        let id = format!("{prefix}n{i}");
        let img = *cod_nodes.choose(rng).expect("codomain has nodes");
        node_map.insert(id.clone(), img.to_string());
        fiber.entry(img).or_default().push(id);
    }
    let mut arrows = BTreeMap::new();
    let mut arrow_map = BTreeMap::new();
    if !cod_arrows.is_empty() {
        let m = rng.gen_range(0..=limits.max_arrows);
        for i in 0..m {
            let (a, arrow) = *cod_arrows.choose(rng).expect("non-empty");
            let (Some(srcs), Some(tgts)) = (fiber.get(arrow.src.as_str()), fiber.get(arrow.tgt.as_str())) else {
                continue;
            };
            let id = format!("{prefix}e{i}");
            arrows.insert(
                id.clone(),
                Arrow {
                    src: srcs.choose(rng).expect("non-empty").clone(),
                    tgt: tgts.choose(rng).expect("non-empty").clone(),
                },
            );
            arrow_map.insert(id, a.to_string());
        }
    }
    let dom = Arc::new(Graph::from_parts(node_map.keys().cloned().collect(), arrows));
    GraphMorphism::new_unchecked(dom, cod.clone(), node_map, arrow_map)
}

/// A random instance over `schema` with element ids `{prefix}x{i}` and
/// link ids `{prefix}l{i}`.
pub fn instance(rng: &mut DclRng, schema: &Arc<Graph>, prefix: &str, limits: Limits) -> TypedInstance {
    let mut nodes = BTreeSet::new();
    let mut typing_n = BTreeMap::new();
    let mut fiber: BTreeMap<&str, Vec<String>> = BTreeMap::new();
    let mut k = 0;
    for s in schema.nodes() {
        for _ in 0..rng.gen_range(0..=limits.max_per_sort) {
            let id = format!("{prefix}x{k}");
            k += 1;
            nodes.insert(id.clone());
            typing_n.insert(id.clone(), s.to_string());
            fiber.entry(s).or_default().push(id);
        }
    }
    let mut arrows = BTreeMap::new();
    let mut typing_a = BTreeMap::new();
    let mut k = 0;
    for (a, arrow) in schema.arrows() {
        let (Some(srcs), Some(tgts)) = (fiber.get(arrow.src.as_str()), fiber.get(arrow.tgt.as_str())) else {
            continue;
        };
        for _ in 0..rng.gen_range(0..=limits.max_per_arrow) {
            let id = format!("{prefix}l{k}");
            k += 1;
            arrows.insert(
                id.clone(),
                Arrow {
                    src: srcs.choose(rng).expect("non-empty").clone(),
                    tgt: tgts.choose(rng).expect("non-empty").clone(),
                },
            );
            typing_a.insert(id, a.to_string());
        }
    }
    let carrier = Arc::new(Graph::from_parts(nodes, arrows));
    TypedInstance::new(GraphMorphism::new_unchecked(carrier, schema.clone(), typing_n, typing_a))
}

/// A declaration of a random symbol from `labels` with a random binding
/// into `carrier`; `None` when no listed symbol binds.
pub fn declaration(
    rng: &mut DclRng,
    sig: &Signature,
    labels: &[&str],
    carrier: &Arc<Graph>,
    id: &str,
) -> Result<Option<ConstraintDeclaration>> {
    let mut options = Vec::new();
    for &label in labels {
        let sym = sig.symbol(label)?;
        let homs = HomSearch::new(sym.arity().clone(), carrier.clone()).collect(64)?;
        if !homs.morphisms.is_empty() {
            options.push((label, homs.morphisms));
        }
    }
    let Some((label, homs)) = options.choose(rng) else {
        return Ok(None);
    };
    let binding = homs.choose(rng).expect("non-empty").clone();
    Ok(Some(ConstraintDeclaration::new(id, *label, binding)))
}

/// Labels of the builtin symbols used by the harnesses.
pub const BUILTIN_LABELS: [&str; 10] = [
    "[0..*]", "[0..1]", "[1]", "[1..*]", "[⇒]", "[⇒]4", "[key]", "[comm]", "[jm]", "[jm!]",
];

/// A random sub-instance with its inclusion.
pub fn sub_instance(rng: &mut DclRng, t: &TypedInstance) -> SliceMorphism {
    let keep: BTreeSet<&str> = t.carrier().nodes().filter(|_| rng.gen_bool(0.7)).collect();
    let arrows: Vec<&str> = t
        .carrier()
        .arrows()
        .filter(|(_, a)| keep.contains(a.src.as_str()) && keep.contains(a.tgt.as_str()))
        .map(|(e, _)| e)
        .filter(|_| rng.gen_bool(0.7))
        .collect();
    let sub = Arc::new(
        t.carrier()
            .subgraph(keep.iter().copied(), arrows.iter().copied())
            .expect("closed under incidence"),
    );
    let nodes: Vec<(&str, &str)> = keep.iter().map(|&x| (x, x)).collect();
    let edges: Vec<(&str, &str)> = arrows.iter().map(|&x| (x, x)).collect();
    let incl = GraphMorphism::from_pairs(sub, t.carrier().clone(), &nodes, &edges).expect("inclusion");
    let from = TypedInstance::new(crate::graph::compose(&incl, t.typing()).expect("composable"));
    SliceMorphism::new(from, t.clone(), incl).expect("inclusion commutes")
}

/// A random super-instance of `t` adding up to `extra` nodes and links
/// (ids `{prefix}y{i}`, `{prefix}k{i}`), with its inclusion.
pub fn super_instance(rng: &mut DclRng, t: &TypedInstance, prefix: &str, extra: usize) -> SliceMorphism {
    let schema = t.schema();
    let sorts: Vec<&str> = schema.nodes().collect();
    let mut nodes = t.carrier().node_set().clone();
    let mut arrows = t.carrier().arrow_map().clone();
    let mut typing_n = t.typing().node_map().clone();
    let mut typing_a = t.typing().arrow_map().clone();
    for i in 0..rng.gen_range(0..=extra) {
        let s = *sorts.choose(rng).expect("schema has nodes");
        let id = format!("{prefix}y{i}");
        nodes.insert(id.clone());
        typing_n.insert(id, s.to_string());
    }
    let schema_arrows: Vec<(&str, &Arrow)> = schema.arrows().collect();
    for i in 0..rng.gen_range(0..=extra) {
        let Some(&(a, arrow)) = schema_arrows.choose(rng) else { break };
        let srcs: Vec<&String> = typing_n.iter().filter(|(_, s)| **s == arrow.src).map(|(x, _)| x).collect();
        let tgts: Vec<&String> = typing_n.iter().filter(|(_, s)| **s == arrow.tgt).map(|(x, _)| x).collect();
        let (Some(&s), Some(&tg)) = (srcs.choose(rng), tgts.choose(rng)) else { continue };
        let id = format!("{prefix}k{i}");
        arrows.insert(id.clone(), Arrow { src: s.clone(), tgt: tg.clone() });
        typing_a.insert(id, a.to_string());
    }
    let carrier = Arc::new(Graph::from_parts(nodes, arrows));
    let bigger = TypedInstance::new(GraphMorphism::new_unchecked(carrier.clone(), schema.clone(), typing_n, typing_a));
    let incl = GraphMorphism::new_unchecked(
        t.carrier().clone(),
        carrier,
        t.carrier().nodes().map(|x| (x.to_string(), x.to_string())).collect(),
        t.carrier().arrows().map(|(x, _)| (x.to_string(), x.to_string())).collect(),
    );
    SliceMorphism::new(t.clone(), bigger, incl).expect("inclusion commutes")
}

/// A delta out of `source`: delete a random part, then insert fresh
/// elements.
pub fn delta_from(rng: &mut DclRng, source: &TypedInstance, prefix: &str) -> Delta {
    let left = sub_instance(rng, source);
    let right = super_instance(rng, left.from(), prefix, 3);
    Delta::new(left, right).expect("legs share the apex")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generators_are_reproducible() {
        let limits = Limits::default();
        let a = graph(&mut rng(7), "", limits);
        let b = graph(&mut rng(7), "", limits);
        assert_eq!(a, b);
        let g = Arc::new(a);
        let f1 = morphism_into(&mut rng(9), &g, "h", limits);
        let f2 = morphism_into(&mut rng(9), &g, "h", limits);
        assert_eq!(f1, f2);
        GraphMorphism::new(f1.dom().clone(), f1.cod().clone(), f1.node_map().clone(), f1.arrow_map().clone()).unwrap();
    }

    #[test]
    fn generated_values_are_well_formed() {
        let mut r = rng(3);
        let limits = Limits::default();
        for _ in 0..50 {
            let g = Arc::new(graph(&mut r, "", limits));
            let t = instance(&mut r, &g, "", limits);
            GraphMorphism::new(t.carrier().clone(), g.clone(), t.typing().node_map().clone(), t.typing().arrow_map().clone())
                .unwrap();
            let d = delta_from(&mut r, &t, "u");
            assert_eq!(d.source(), &t);
        }
    }
}
