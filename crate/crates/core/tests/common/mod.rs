#![allow(dead_code)]

use std::collections::BTreeMap;
use std::sync::Arc;

use dcl_core::random::{self, DclRng, Limits};
use dcl_core::slice::TypedInstance;
use dcl_core::{Graph, GraphMorphism};

pub fn small() -> Limits {
    Limits { max_nodes: 4, max_arrows: 5, max_per_sort: 2, max_per_arrow: 2 }
}

/// Fresh ids in reverse sorted order, so that the renaming also scrambles
/// the iteration order.
pub fn scramble<'a>(ids: impl Iterator<Item = &'a str>, prefix: &str) -> BTreeMap<String, String> {
    let ids: Vec<&str> = ids.collect();
    let n = ids.len();
    ids.iter().enumerate().map(|(i, x)| (x.to_string(), format!("{prefix}{:03}", n - i))).collect()
}

/// An isomorphic copy of `g` with the isomorphism onto it.
pub fn renamed_graph(g: &Arc<Graph>) -> (Arc<Graph>, GraphMorphism) {
    let nodes = scramble(g.nodes(), "v");
    let arrows = scramble(g.arrows().map(|(a, _)| a), "w");
    let copy = Graph::new(
        nodes.values().cloned(),
        g.arrows().map(|(a, e)| (arrows[a].clone(), nodes[&e.src].clone(), nodes[&e.tgt].clone())),
    )
    .unwrap();
    let copy = Arc::new(copy);
    let iso = GraphMorphism::new(g.clone(), copy.clone(), nodes, arrows).unwrap();
    (copy, iso)
}

/// An isomorphic copy of `t` over the same schema.
pub fn renamed_instance(t: &TypedInstance) -> TypedInstance {
    let nodes = scramble(t.carrier().nodes(), "x");
    let links = scramble(t.carrier().arrows().map(|(a, _)| a), "l");
    let el: Vec<(String, String)> =
        t.carrier().nodes().map(|x| (nodes[x].clone(), t.type_of(x).unwrap().to_string())).collect();
    let ln: Vec<(String, String, String, String)> = t
        .carrier()
        .arrows()
        .map(|(l, a)| (links[l].clone(), nodes[&a.src].clone(), nodes[&a.tgt].clone(), t.type_of(l).unwrap().to_string()))
        .collect();
    let el: Vec<(&str, &str)> = el.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
    let ln: Vec<(&str, &str, &str, &str)> =
        ln.iter().map(|(a, b, c, d)| (a.as_str(), b.as_str(), c.as_str(), d.as_str())).collect();
    TypedInstance::build(t.schema().clone(), &el, &ln).unwrap()
}

pub fn graph(rng: &mut DclRng) -> Arc<Graph> {
    Arc::new(random::graph(rng, "", small()))
}

/// All maps `dom → cod` found by trying every assignment; the oracle for
/// homomorphism search.
pub fn brute_force_homs(dom: &Arc<Graph>, cod: &Arc<Graph>) -> usize {
    let dn: Vec<&str> = dom.nodes().collect();
    let cn: Vec<&str> = cod.nodes().collect();
    let mut count = 0;
    let mut assign = vec![0usize; dn.len()];
    if !dn.is_empty() && cn.is_empty() {
        return 0;
    }
    loop {
        let node = |x: &str| cn[assign[dn.iter().position(|y| *y == x).unwrap()]];
        let mut ways = 1usize;
        for (_, a) in dom.arrows() {
            let (s, t) = (node(&a.src), node(&a.tgt));
            ways *= cod.arrows().filter(|(_, b)| b.src == s && b.tgt == t).count();
        }
        count += ways;
        let mut i = 0;
        loop {
            if i == dn.len() {
                return count;
            }
            assign[i] += 1;
            if assign[i] < cn.len() {
                break;
            }
            assign[i] = 0;
            i += 1;
        }
    }
}
