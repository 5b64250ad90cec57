//! The indexed presentation of typed instances: a set per schema node and a
//! span of sets per schema arrow.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use crate::error::{DclError, Result};
use crate::graph::{Arrow, Graph, GraphMorphism};
use crate::limits::pair_id;
use crate::slice::{find_instance_isomorphism, TypedInstance};

/// A link of an arrow span: `(link id, source element, target element)`.
pub type Link = (String, String, String);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexedSemantics {
    schema: Arc<Graph>,
    node_sets: BTreeMap<String, BTreeSet<String>>,
    arrow_spans: BTreeMap<String, BTreeSet<Link>>,
}

impl IndexedSemantics {
    /// Checks that every schema element has an entry and every link's
    /// endpoints lie in the right sets. Missing entries are read as empty.
    pub fn new(
        schema: Arc<Graph>,
        mut node_sets: BTreeMap<String, BTreeSet<String>>,
        mut arrow_spans: BTreeMap<String, BTreeSet<Link>>,
    ) -> Result<IndexedSemantics> {
        for k in node_sets.keys() {
            if !schema.has_node(k) {
                return Err(DclError::MalformedGraph(format!("`{k}` is not a schema node")));
            }
        }
        for k in arrow_spans.keys() {
            if !schema.has_arrow(k) {
                return Err(DclError::MalformedGraph(format!("`{k}` is not a schema arrow")));
            }
        }
        for n in schema.nodes() {
            node_sets.entry(n.to_string()).or_default();
        }
        for (a, arrow) in schema.arrows() {
            let links = arrow_spans.entry(a.to_string()).or_default();
            let mut seen = BTreeSet::new();
            for (id, s, t) in links.iter() {
                if !seen.insert(id) {
                    return Err(DclError::MalformedGraph(format!("link `{id}` repeated in span `{a}`")));
                }
                if !node_sets[&arrow.src].contains(s) || !node_sets[&arrow.tgt].contains(t) {
                    return Err(DclError::MalformedGraph(format!(
                        "link `{id}` of `{a}` leaves the sets of `{}` and `{}`",
                        arrow.src, arrow.tgt
                    )));
                }
            }
        }
        Ok(IndexedSemantics {
            schema,
            node_sets,
            arrow_spans,
        })
    }

    pub fn schema(&self) -> &Arc<Graph> {
        &self.schema
    }

    pub fn node_set(&self, node: &str) -> Option<&BTreeSet<String>> {
        self.node_sets.get(node)
    }

    pub fn arrow_span(&self, arrow: &str) -> Option<&BTreeSet<Link>> {
        self.arrow_spans.get(arrow)
    }

    pub fn node_sets(&self) -> &BTreeMap<String, BTreeSet<String>> {
        &self.node_sets
    }

    pub fn arrow_spans(&self) -> &BTreeMap<String, BTreeSet<Link>> {
        &self.arrow_spans
    }
}

/// Fibers of the typing over each schema element.
pub fn to_indexed(t: &TypedInstance) -> IndexedSemantics {
    let schema = t.schema().clone();
    let mut node_sets: BTreeMap<String, BTreeSet<String>> =
        schema.nodes().map(|n| (n.to_string(), BTreeSet::new())).collect();
    let mut arrow_spans: BTreeMap<String, BTreeSet<Link>> =
        schema.arrows().map(|(a, _)| (a.to_string(), BTreeSet::new())).collect();
    for (x, ty) in t.typing().node_map() {
        node_sets.get_mut(ty).expect("typed node").insert(x.clone());
    }
    for (e, ty) in t.typing().arrow_map() {
        let arrow = t.carrier().arrow(e).expect("carrier arrow");
        arrow_spans
            .get_mut(ty)
            .expect("typed arrow")
            .insert((e.clone(), arrow.src.clone(), arrow.tgt.clone()));
    }
    IndexedSemantics {
        schema,
        node_sets,
        arrow_spans,
    }
}

/// The total graph of elements with its typing projection. Element `x`
/// over schema node `N` becomes carrier node `"(x|N)"`; links likewise.
pub fn from_indexed(ix: &IndexedSemantics) -> TypedInstance {
    let mut nodes = BTreeSet::new();
    let mut node_typing = BTreeMap::new();
    for (n, xs) in &ix.node_sets {
        for x in xs {
            let id = pair_id(x, n);
            node_typing.insert(id.clone(), n.clone());
            nodes.insert(id);
        }
    }
    let mut arrows = BTreeMap::new();
    let mut arrow_typing = BTreeMap::new();
    for (a, links) in &ix.arrow_spans {
        let arrow = ix.schema.arrow(a).expect("schema arrow");
        for (id, s, t) in links {
            let eid = pair_id(id, a);
            arrows.insert(
                eid.clone(),
                Arrow {
                    src: pair_id(s, &arrow.src),
                    tgt: pair_id(t, &arrow.tgt),
                },
            );
            arrow_typing.insert(eid, a.clone());
        }
    }
    let carrier = Arc::new(Graph::from_parts(nodes, arrows));
    TypedInstance::new(GraphMorphism::new_unchecked(
        carrier,
        ix.schema.clone(),
        node_typing,
        arrow_typing,
    ))
}

/// Isomorphism of indexed presentations: a family of bijections between
/// the sets that respects every span.
pub fn indexed_isomorphic(a: &IndexedSemantics, b: &IndexedSemantics) -> Result<bool> {
    if a.schema != b.schema {
        return Ok(false);
    }
    let b = from_indexed(b).with_schema(a.schema.clone())?;
    Ok(find_instance_isomorphism(&from_indexed(a), &b)?.is_some())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn schema() -> Arc<Graph> {
        Arc::new(
            Graph::new(
                ["Driver", "Vehicle", "License", "VehType"],
                [
                    ("drives", "Driver", "Vehicle"),
                    ("of", "Vehicle", "VehType"),
                    ("lcdBy", "Driver", "License"),
                    ("covers", "License", "VehType"),
                ],
            )
            .unwrap(),
        )
    }

    #[test]
    fn empty_instance_has_empty_fibers() {
        let ix = to_indexed(&TypedInstance::empty(schema()));
        assert!(ix.node_sets().values().all(|s| s.is_empty()));
        assert!(ix.arrow_spans().values().all(|s| s.is_empty()));
        assert!(from_indexed(&ix).carrier().is_empty());
    }

    #[test]
    fn parallel_covers_links_survive() {
        let s = schema();
        let sets = [("Driver", vec!["d"]), ("License", vec!["L"]), ("VehType", vec!["V"])]
            .into_iter()
            .map(|(k, v)| (k.to_string(), v.into_iter().map(String::from).collect()))
            .collect();
        let covers: BTreeSet<Link> = [("c", "L", "V"), ("c'", "L", "V")]
            .into_iter()
            .map(|(a, b, c)| (a.into(), b.into(), c.into()))
            .collect();
        let lcd: BTreeSet<Link> = [("l".into(), "d".into(), "L".into())].into();
        let spans = [("covers".to_string(), covers), ("lcdBy".to_string(), lcd)].into();
        let ix = IndexedSemantics::new(s, sets, spans).unwrap();
        let t = from_indexed(&ix);
        assert_eq!(t.arrow_fiber("covers").count(), 2);
        let back = to_indexed(&t);
        let links = back.arrow_span("covers").unwrap();
        let ends: BTreeSet<_> = links.iter().map(|(_, s, t)| (s.clone(), t.clone())).collect();
        assert_eq!(links.len(), 2);
        assert_eq!(ends.len(), 1);
        assert!(indexed_isomorphic(&ix, &back).unwrap());
    }

    #[test]
    fn dangling_link_rejected() {
        let s = schema();
        let spans = [("of".to_string(), [("o".to_string(), "v".to_string(), "T".to_string())].into())].into();
        assert!(IndexedSemantics::new(s, BTreeMap::new(), spans).is_err());
    }
}
