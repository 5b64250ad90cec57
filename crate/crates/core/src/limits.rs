//! Pullbacks, pushouts and coproducts of graphs, computed strictly.
//!
//! Pullback elements are pairs rendered as `"(a|b)"`. Pushout elements are
//! equivalence classes of tagged elements of the disjoint union, rendered as
//! their sorted members joined by `=`, each member tagged `L:` or `R:`.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;

use crate::error::{DclError, Result};
use crate::graph::{Arrow, Graph, GraphMorphism};

pub fn pair_id(a: &str, b: &str) -> String {
    format!("({a}|{b})")
}

/// A pullback square: `left ; f = right ; g`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pullback {
    pub apex: Arc<Graph>,
    /// Projection to `f.dom`.
    pub left: GraphMorphism,
    /// Projection to `g.dom`.
    pub right: GraphMorphism,
}

/// Pullback of the cospan `f: A → C ← B: g`.
pub fn pullback(f: &GraphMorphism, g: &GraphMorphism) -> Result<Pullback> {
    if !Arc::ptr_eq(f.cod(), g.cod()) && f.cod() != g.cod() {
        return Err(DclError::Mismatch {
            what: "pullback codomains",
            expected: f.cod().summary(),
            found: g.cod().summary(),
        });
    }
    let (a, b) = (f.dom(), g.dom());

    let mut fiber_b: HashMap<&str, Vec<&str>> = HashMap::new();
    for (n, img) in g.node_map() {
        fiber_b.entry(img.as_str()).or_default().push(n.as_str());
    }
    let mut nodes = BTreeSet::new();
    let mut left_n = BTreeMap::new();
    let mut right_n = BTreeMap::new();
    for (x, img) in f.node_map() {
        for y in fiber_b.get(img.as_str()).into_iter().flatten() {
            let id = pair_id(x, y);
            left_n.insert(id.clone(), x.clone());
            right_n.insert(id.clone(), y.to_string());
            nodes.insert(id);
        }
    }

    let mut arrow_fiber_b: HashMap<&str, Vec<&str>> = HashMap::new();
    for (e, img) in g.arrow_map() {
        arrow_fiber_b.entry(img.as_str()).or_default().push(e.as_str());
    }
    let mut arrows = BTreeMap::new();
    let mut left_a = BTreeMap::new();
    let mut right_a = BTreeMap::new();
    for (x, img) in f.arrow_map() {
        let ax = a.arrow(x).expect("domain arrow");
        for y in arrow_fiber_b.get(img.as_str()).into_iter().flatten() {
            let by = b.arrow(y).expect("domain arrow");
            let id = pair_id(x, y);
            arrows.insert(
                id.clone(),
                Arrow {
                    src: pair_id(&ax.src, &by.src),
                    tgt: pair_id(&ax.tgt, &by.tgt),
                },
            );
            left_a.insert(id.clone(), x.clone());
            right_a.insert(id, y.to_string());
        }
    }
    if arrows.keys().any(|k| nodes.contains(k)) || nodes.len() != left_n.len() {
        return Err(DclError::MalformedGraph(
            "pullback pair ids collide; element ids must not contain unbalanced `(`, `|`, `)`".into(),
        ));
    }
    let apex = Arc::new(Graph::from_parts(nodes, arrows));
    Ok(Pullback {
        left: GraphMorphism::new_unchecked(apex.clone(), a.clone(), left_n, left_a),
        right: GraphMorphism::new_unchecked(apex.clone(), b.clone(), right_n, right_a),
        apex,
    })
}

/// A pushout square: `f ; from_left = g ; from_right`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pushout {
    pub apex: Arc<Graph>,
    /// Injection of `f.cod` (this is `g` pushed along `f`).
    pub from_left: GraphMorphism,
    /// Injection of `g.cod` (this is `f` pushed along `g`).
    pub from_right: GraphMorphism,
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Quotient of `L + R` by the equivalence generated by `pairs`; returns the
/// class id of every tagged element.
fn glue<'a>(
    left: impl Iterator<Item = &'a str>,
    right: impl Iterator<Item = &'a str>,
    pairs: impl Iterator<Item = (&'a str, &'a str)>,
) -> (Vec<String>, HashMap<&'a str, String>, HashMap<&'a str, String>) {
    let left: Vec<&str> = left.collect();
    let right: Vec<&str> = right.collect();
    let li: HashMap<&str, usize> = left.iter().enumerate().map(|(i, x)| (*x, i)).collect();
    let ri: HashMap<&str, usize> = right.iter().enumerate().map(|(i, x)| (*x, i + left.len())).collect();
    let mut uf = UnionFind::new(left.len() + right.len());
    for (l, r) in pairs {
        uf.union(li[l], ri[r]);
    }
    let tagged: Vec<String> = left
        .iter()
        .map(|x| format!("L:{x}"))
        .chain(right.iter().map(|x| format!("R:{x}")))
        .collect();
    let mut members: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..tagged.len() {
        members.entry(uf.find(i)).or_default().push(i);
    }
    let mut class_name = vec![String::new(); tagged.len()];
    let mut classes = Vec::with_capacity(members.len());
    for ms in members.values() {
        let mut names: Vec<&str> = ms.iter().map(|&i| tagged[i].as_str()).collect();
        names.sort_unstable();
        let name = names.join("=");
        for &i in ms {
            class_name[i] = name.clone();
        }
        classes.push(name);
    }
    let lmap = left.iter().map(|x| (*x, class_name[li[x]].clone())).collect();
    let rmap = right.iter().map(|x| (*x, class_name[ri[x]].clone())).collect();
    (classes, lmap, rmap)
}

/// Pushout of the span `f: C → X`, `g: C → Y`.
pub fn pushout(f: &GraphMorphism, g: &GraphMorphism) -> Result<Pushout> {
    if !Arc::ptr_eq(f.dom(), g.dom()) && f.dom() != g.dom() {
        return Err(DclError::Mismatch {
            what: "pushout domains",
            expected: f.dom().summary(),
            found: g.dom().summary(),
        });
    }
    let (x, y) = (f.cod(), g.cod());
    let (node_classes, ln, rn) = glue(
        x.nodes(),
        y.nodes(),
        f.dom().nodes().map(|c| (f.node(c), g.node(c))),
    );
    let (_arrow_classes, la, ra) = glue(
        x.arrows().map(|(a, _)| a),
        y.arrows().map(|(a, _)| a),
        f.dom().arrows().map(|(c, _)| (f.arrow(c), g.arrow(c))),
    );
    let mut arrows = BTreeMap::new();
    for (a, arrow) in x.arrows() {
        arrows.insert(
            la[a].clone(),
            Arrow {
                src: ln[arrow.src.as_str()].clone(),
                tgt: ln[arrow.tgt.as_str()].clone(),
            },
        );
    }
    for (a, arrow) in y.arrows() {
        arrows.entry(ra[a].clone()).or_insert_with(|| Arrow {
            src: rn[arrow.src.as_str()].clone(),
            tgt: rn[arrow.tgt.as_str()].clone(),
        });
    }
    let nodes: BTreeSet<String> = node_classes.into_iter().collect();
    let apex = Arc::new(Graph::from_parts(nodes, arrows));
    let to_owned = |m: &HashMap<&str, String>| -> BTreeMap<String, String> {
        m.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
    };
    Ok(Pushout {
        from_left: GraphMorphism::new_unchecked(x.clone(), apex.clone(), to_owned(&ln), to_owned(&la)),
        from_right: GraphMorphism::new_unchecked(y.clone(), apex.clone(), to_owned(&rn), to_owned(&ra)),
        apex,
    })
}

/// Coproduct `x + y` with its two injections.
pub fn coproduct(x: &Arc<Graph>, y: &Arc<Graph>) -> Pushout {
    let f = GraphMorphism::initial(x.clone());
    let g = GraphMorphism::initial(y.clone()).with_dom(f.dom().clone()).expect("empty domains agree");
    pushout(&f, &g).expect("span out of the empty graph")
}
