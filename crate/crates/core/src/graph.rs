//! Finite directed multigraphs and their morphisms.
//!
//! Node and arrow identifiers are opaque strings. The two id spaces of a
//! graph are disjoint. Everything here is an immutable value; operations
//! return fresh graphs and morphisms.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use crate::error::{DclError, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Arrow {
    pub src: String,
    pub tgt: String,
}

/// A finite directed multigraph.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Graph {
    nodes: BTreeSet<String>,
    arrows: BTreeMap<String, Arrow>,
}

impl Graph {
    /// Builds a graph, rejecting duplicate ids, overlapping id spaces and
    /// dangling arrow endpoints.
    pub fn new<N, A, S>(nodes: N, arrows: A) -> Result<Graph>
    where
        N: IntoIterator<Item = S>,
        A: IntoIterator<Item = (S, S, S)>,
        S: Into<String>,
    {
        let mut node_set = BTreeSet::new();
        for n in nodes {
            let n = n.into();
            if !node_set.insert(n.clone()) {
                return Err(DclError::MalformedGraph(format!("duplicate node id `{n}`")));
            }
        }
        let mut arrow_map = BTreeMap::new();
        for (id, src, tgt) in arrows {
            let (id, src, tgt) = (id.into(), src.into(), tgt.into());
            if node_set.contains(&id) {
                return Err(DclError::MalformedGraph(format!(
                    "id `{id}` is used both as a node and as an arrow"
                )));
            }
            for end in [&src, &tgt] {
                if !node_set.contains(end) {
                    return Err(DclError::MalformedGraph(format!(
                        "arrow `{id}` has endpoint `{end}` which is not a node"
                    )));
                }
            }
            if arrow_map.insert(id.clone(), Arrow { src, tgt }).is_some() {
                return Err(DclError::MalformedGraph(format!("duplicate arrow id `{id}`")));
            }
        }
        Ok(Graph {
            nodes: node_set,
            arrows: arrow_map,
        })
    }

    pub fn builder() -> GraphBuilder {
        GraphBuilder::default()
    }

    pub fn empty() -> Graph {
        Graph::default()
    }

    /// The terminal graph: one node with one loop.
    pub fn terminal() -> Graph {
        Graph::new(["*"], [("*loop", "*", "*")]).expect("terminal graph is well formed")
    }

    /// A discrete graph on the given nodes.
    pub fn discrete<S: Into<String>>(nodes: impl IntoIterator<Item = S>) -> Result<Graph> {
        Graph::new(nodes.into_iter().map(Into::into), Vec::<(String, String, String)>::new())
    }

    pub(crate) fn from_parts(nodes: BTreeSet<String>, arrows: BTreeMap<String, Arrow>) -> Graph {
        // Internal constructors are re-validated under the unit tests only.
        #[cfg(test)]
        assert!(arrows
            .iter()
            .all(|(id, a)| !nodes.contains(id) && nodes.contains(&a.src) && nodes.contains(&a.tgt)));
        Graph { nodes, arrows }
    }

    pub fn nodes(&self) -> impl ExactSizeIterator<Item = &str> + '_ {
        self.nodes.iter().map(String::as_str)
    }

    pub fn arrows(&self) -> impl ExactSizeIterator<Item = (&str, &Arrow)> + '_ {
        self.arrows.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn node_set(&self) -> &BTreeSet<String> {
        &self.nodes
    }

    pub fn arrow_map(&self) -> &BTreeMap<String, Arrow> {
        &self.arrows
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn arrow_count(&self) -> usize {
        self.arrows.len()
    }

    /// Total number of elements (nodes plus arrows).
    pub fn size(&self) -> usize {
        self.nodes.len() + self.arrows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn has_node(&self, id: &str) -> bool {
        self.nodes.contains(id)
    }

    pub fn has_arrow(&self, id: &str) -> bool {
        self.arrows.contains_key(id)
    }

    pub fn arrow(&self, id: &str) -> Option<&Arrow> {
        self.arrows.get(id)
    }

    pub fn arrows_between<'a>(
        &'a self,
        src: &'a str,
        tgt: &'a str,
    ) -> impl Iterator<Item = &'a str> + 'a {
        self.arrows
            .iter()
            .filter(move |(_, a)| a.src == src && a.tgt == tgt)
            .map(|(id, _)| id.as_str())
    }

    pub fn out_degree(&self, node: &str) -> usize {
        self.arrows.values().filter(|a| a.src == node).count()
    }

    pub fn in_degree(&self, node: &str) -> usize {
        self.arrows.values().filter(|a| a.tgt == node).count()
    }

    /// The subgraph spanned by the given nodes and arrows. Arrows whose
    /// endpoints are not kept are an error.
    pub fn subgraph<'a>(
        &self,
        nodes: impl IntoIterator<Item = &'a str>,
        arrows: impl IntoIterator<Item = &'a str>,
    ) -> Result<Graph> {
        let nodes: Vec<&str> = nodes.into_iter().collect();
        for n in &nodes {
            if !self.has_node(n) {
                return Err(DclError::MalformedGraph(format!("`{n}` is not a node")));
            }
        }
        let mut kept = Vec::new();
        for a in arrows {
            let arrow = self
                .arrow(a)
                .ok_or_else(|| DclError::MalformedGraph(format!("`{a}` is not an arrow")))?;
            kept.push((a, arrow.src.as_str(), arrow.tgt.as_str()));
        }
        Graph::new(nodes, kept)
    }

    /// Short human readable summary used in error messages.
    pub fn summary(&self) -> String {
        const SHOW: usize = 6;
        let mut s = String::from("{");
        for (i, n) in self.nodes.iter().take(SHOW).enumerate() {
            if i > 0 {
                s.push(',');
            }
            s.push_str(n);
        }
        if self.nodes.len() > SHOW {
            s.push_str(",…");
        }
        s.push_str(&format!("; {} arrows}}", self.arrows.len()));
        s
    }
}

impl fmt::Display for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "nodes [")?;
        for (i, n) in self.nodes.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{n}")?;
        }
        write!(f, "] arrows [")?;
        for (i, (id, a)) in self.arrows.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{id}: {} -> {}", a.src, a.tgt)?;
        }
        write!(f, "]")
    }
}

#[derive(Debug, Default, Clone)]
pub struct GraphBuilder {
    nodes: Vec<String>,
    arrows: Vec<(String, String, String)>,
}

impl GraphBuilder {
    pub fn node(mut self, id: impl Into<String>) -> Self {
        self.nodes.push(id.into());
        self
    }

    pub fn nodes<S: Into<String>>(mut self, ids: impl IntoIterator<Item = S>) -> Self {
        self.nodes.extend(ids.into_iter().map(Into::into));
        self
    }

    pub fn arrow(mut self, id: impl Into<String>, src: impl Into<String>, tgt: impl Into<String>) -> Self {
        self.arrows.push((id.into(), src.into(), tgt.into()));
        self
    }

    pub fn build(self) -> Result<Graph> {
        Graph::new(self.nodes, self.arrows)
    }
}

fn check_map(
    dom: &Graph,
    cod: &Graph,
    nodes: &BTreeMap<String, String>,
    arrows: &BTreeMap<String, String>,
) -> Result<()> {
    if nodes.len() != dom.node_count() || arrows.len() != dom.arrow_count() {
        for n in dom.nodes() {
            if !nodes.contains_key(n) {
                return Err(DclError::MalformedMorphism(format!("node `{n}` is not mapped")));
            }
        }
        for (a, _) in dom.arrows() {
            if !arrows.contains_key(a) {
                return Err(DclError::MalformedMorphism(format!("arrow `{a}` is not mapped")));
            }
        }
        return Err(DclError::MalformedMorphism(
            "map mentions elements outside the domain".into(),
        ));
    }
    for (n, img) in nodes {
        if !dom.has_node(n) {
            return Err(DclError::MalformedMorphism(format!("`{n}` is not a domain node")));
        }
        if !cod.has_node(img) {
            return Err(DclError::MalformedMorphism(format!(
                "node `{n}` is sent to `{img}`, which is not a codomain node"
            )));
        }
    }
    for (a, img) in arrows {
        let src = dom
            .arrow(a)
            .ok_or_else(|| DclError::MalformedMorphism(format!("`{a}` is not a domain arrow")))?;
        let tgt_arrow = cod.arrow(img).ok_or_else(|| {
            DclError::MalformedMorphism(format!(
                "arrow `{a}` is sent to `{img}`, which is not a codomain arrow"
            ))
        })?;
        if nodes[&src.src] != tgt_arrow.src || nodes[&src.tgt] != tgt_arrow.tgt {
            return Err(DclError::MalformedMorphism(format!(
                "arrow `{a}` is sent to `{img}` but incidence is not preserved"
            )));
        }
    }
    Ok(())
}

/// A structure preserving map between graphs.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GraphMorphism {
    dom: Arc<Graph>,
    cod: Arc<Graph>,
    nodes: BTreeMap<String, String>,
    arrows: BTreeMap<String, String>,
}

impl GraphMorphism {
    /// Checks totality, codomain membership and incidence preservation.
    pub fn new(
        dom: Arc<Graph>,
        cod: Arc<Graph>,
        nodes: BTreeMap<String, String>,
        arrows: BTreeMap<String, String>,
    ) -> Result<GraphMorphism> {
        check_map(&dom, &cod, &nodes, &arrows)?;
        Ok(GraphMorphism {
            dom,
            cod,
            nodes,
            arrows,
        })
    }

    /// Construction for maps already known to be valid.
    pub(crate) fn new_unchecked(
        dom: Arc<Graph>,
        cod: Arc<Graph>,
        nodes: BTreeMap<String, String>,
        arrows: BTreeMap<String, String>,
    ) -> GraphMorphism {
        let m = GraphMorphism {
            dom,
            cod,
            nodes,
            arrows,
        };
        #[cfg(test)]
        assert!(
            check_map(&m.dom, &m.cod, &m.nodes, &m.arrows).is_ok(),
            "invalid morphism built internally"
        );
        m
    }

    /// Convenience constructor from slices of string pairs.
    pub fn from_pairs(
        dom: Arc<Graph>,
        cod: Arc<Graph>,
        nodes: &[(&str, &str)],
        arrows: &[(&str, &str)],
    ) -> Result<GraphMorphism> {
        let nodes = nodes.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect();
        let arrows = arrows.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect();
        GraphMorphism::new(dom, cod, nodes, arrows)
    }

    pub fn identity(g: Arc<Graph>) -> GraphMorphism {
        let nodes = g.nodes().map(|n| (n.to_string(), n.to_string())).collect();
        let arrows = g.arrows().map(|(a, _)| (a.to_string(), a.to_string())).collect();
        GraphMorphism {
            dom: g.clone(),
            cod: g,
            nodes,
            arrows,
        }
    }

    /// The unique morphism out of the empty graph.
    pub fn initial(cod: Arc<Graph>) -> GraphMorphism {
        GraphMorphism {
            dom: Arc::new(Graph::empty()),
            cod,
            nodes: BTreeMap::new(),
            arrows: BTreeMap::new(),
        }
    }

    pub fn dom(&self) -> &Arc<Graph> {
        &self.dom
    }

    pub fn cod(&self) -> &Arc<Graph> {
        &self.cod
    }

    pub fn node(&self, n: &str) -> &str {
        &self.nodes[n]
    }

    pub fn arrow(&self, a: &str) -> &str {
        &self.arrows[a]
    }

    pub fn node_map(&self) -> &BTreeMap<String, String> {
        &self.nodes
    }

    pub fn arrow_map(&self) -> &BTreeMap<String, String> {
        &self.arrows
    }

    /// Image of an element, whether node or arrow.
    pub fn image(&self, element: &str) -> Option<&str> {
        self.nodes
            .get(element)
            .or_else(|| self.arrows.get(element))
            .map(String::as_str)
    }

    /// Diagrammatic-order composition: `self` first, then `g`.
    pub fn then(&self, g: &GraphMorphism) -> Result<GraphMorphism> {
        compose(self, g)
    }

    pub fn is_identity(&self) -> bool {
        self.dom == self.cod
            && self.nodes.iter().all(|(a, b)| a == b)
            && self.arrows.iter().all(|(a, b)| a == b)
    }

    pub fn is_injective(&self) -> bool {
        let n: BTreeSet<_> = self.nodes.values().collect();
        let a: BTreeSet<_> = self.arrows.values().collect();
        n.len() == self.nodes.len() && a.len() == self.arrows.len()
    }

    pub fn is_surjective(&self) -> bool {
        let n: BTreeSet<_> = self.nodes.values().collect();
        let a: BTreeSet<_> = self.arrows.values().collect();
        n.len() == self.cod.node_count() && a.len() == self.cod.arrow_count()
    }

    pub fn is_isomorphism(&self) -> bool {
        self.is_injective() && self.is_surjective()
    }

    /// Inverse of a bijective morphism.
    pub fn inverse(&self) -> Option<GraphMorphism> {
        if !self.is_isomorphism() {
            return None;
        }
        let nodes = self.nodes.iter().map(|(a, b)| (b.clone(), a.clone())).collect();
        let arrows = self.arrows.iter().map(|(a, b)| (b.clone(), a.clone())).collect();
        Some(GraphMorphism::new_unchecked(
            self.cod.clone(),
            self.dom.clone(),
            nodes,
            arrows,
        ))
    }

    /// Same maps, codomain replaced by an equal graph. Used to re-point a
    /// morphism at a shared `Arc`.
    pub fn with_cod(&self, cod: Arc<Graph>) -> Result<GraphMorphism> {
        self.clone().into_cod(cod)
    }

    /// [`GraphMorphism::with_cod`] without copying the maps.
    pub fn into_cod(self, cod: Arc<Graph>) -> Result<GraphMorphism> {
        if !Arc::ptr_eq(&cod, &self.cod) && *cod != *self.cod {
            return Err(DclError::Mismatch {
                what: "codomain",
                expected: self.cod.summary(),
                found: cod.summary(),
            });
        }
        Ok(GraphMorphism { cod, ..self })
    }

    pub fn with_dom(&self, dom: Arc<Graph>) -> Result<GraphMorphism> {
        if !Arc::ptr_eq(&dom, &self.dom) && *dom != *self.dom {
            return Err(DclError::Mismatch {
                what: "domain",
                expected: self.dom.summary(),
                found: dom.summary(),
            });
        }
        Ok(GraphMorphism {
            dom,
            ..self.clone()
        })
    }
}

impl fmt::Display for GraphMorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        let mut first = true;
        for (a, b) in self.nodes.iter().chain(self.arrows.iter()) {
            if !first {
                write!(f, ", ")?;
            }
            first = false;
            write!(f, "{a}↦{b}")?;
        }
        write!(f, "}}")
    }
}

/// Componentwise composition `f ; g`.
pub fn compose(f: &GraphMorphism, g: &GraphMorphism) -> Result<GraphMorphism> {
    if !Arc::ptr_eq(&f.cod, &g.dom) && f.cod != g.dom {
        return Err(DclError::NotComposable {
            left: f.cod.summary(),
            right: g.dom.summary(),
        });
    }
    let nodes = f
        .nodes
        .iter()
        .map(|(a, b)| (a.clone(), g.nodes[b].clone()))
        .collect();
    let arrows = f
        .arrows
        .iter()
        .map(|(a, b)| (a.clone(), g.arrows[b].clone()))
        .collect();
    Ok(GraphMorphism {
        dom: f.dom.clone(),
        cod: g.cod.clone(),
        nodes,
        arrows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn arrow_graph() -> Arc<Graph> {
        Arc::new(Graph::new(["1", "2"], [("e", "1", "2")]).unwrap())
    }

    #[test]
    fn rejects_dangling_and_duplicate_ids() {
        assert!(Graph::new(["a"], [("e", "a", "b")]).is_err());
        assert!(Graph::new(["a", "a"], Vec::<(&str, &str, &str)>::new()).is_err());
        assert!(Graph::new(["a"], [("a", "a", "a")]).is_err());
        assert!(Graph::new(["a"], [("e", "a", "a"), ("e", "a", "a")]).is_err());
    }

    #[test]
    fn morphism_checks_incidence() {
        let g = arrow_graph();
        let h = Arc::new(Graph::new(["x", "y"], [("u", "y", "x")]).unwrap());
        let bad = GraphMorphism::from_pairs(g.clone(), h.clone(), &[("1", "x"), ("2", "y")], &[("e", "u")]);
        assert!(matches!(bad, Err(DclError::MalformedMorphism(_))));
        let good = GraphMorphism::from_pairs(g, h, &[("1", "y"), ("2", "x")], &[("e", "u")]);
        assert!(good.is_ok());
    }

    #[test]
    fn partial_map_is_rejected() {
        let g = arrow_graph();
        let res = GraphMorphism::from_pairs(g.clone(), g, &[("1", "1")], &[("e", "e")]);
        assert!(res.is_err());
    }

    #[test]
    fn identity_is_unit_for_composition() {
        let g = arrow_graph();
        let loop_graph = Arc::new(Graph::new(["p"], [("l", "p", "p")]).unwrap());
        let f = GraphMorphism::from_pairs(g, loop_graph.clone(), &[("1", "p"), ("2", "p")], &[("e", "l")]).unwrap();
        assert_eq!(compose(&f, &GraphMorphism::identity(loop_graph)).unwrap(), f);
        assert_eq!(compose(&GraphMorphism::identity(f.dom().clone()), &f).unwrap(), f);
    }

    #[test]
    fn singleton_chain_composes_to_evident_map() {
        let a = Arc::new(Graph::discrete(["a"]).unwrap());
        let b = Arc::new(Graph::discrete(["b"]).unwrap());
        let c = Arc::new(Graph::discrete(["c"]).unwrap());
        let f = GraphMorphism::from_pairs(a.clone(), b.clone(), &[("a", "b")], &[]).unwrap();
        let g = GraphMorphism::from_pairs(b, c.clone(), &[("b", "c")], &[]).unwrap();
        let fg = compose(&f, &g).unwrap();
        assert_eq!(fg, GraphMorphism::from_pairs(a, c, &[("a", "c")], &[]).unwrap());
    }

    #[test]
    fn composition_error_names_graphs() {
        let a = Arc::new(Graph::discrete(["a"]).unwrap());
        let b = Arc::new(Graph::discrete(["b"]).unwrap());
        let f = GraphMorphism::identity(a);
        let g = GraphMorphism::identity(b);
        match compose(&f, &g) {
            Err(DclError::NotComposable { left, right }) => {
                assert!(left.contains('a'));
                assert!(right.contains('b'));
            }
            other => panic!("expected composition error, got {other:?}"),
        }
    }

    #[test]
    fn inverse_of_iso() {
        let g = arrow_graph();
        let h = Arc::new(Graph::new(["x", "y"], [("u", "x", "y")]).unwrap());
        let f = GraphMorphism::from_pairs(g.clone(), h, &[("1", "x"), ("2", "y")], &[("e", "u")]).unwrap();
        let inv = f.inverse().unwrap();
        assert!(compose(&f, &inv).unwrap().is_identity());
    }
}
