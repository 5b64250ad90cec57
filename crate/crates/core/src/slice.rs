//! Typed instances: graphs over a schema graph, and their morphisms.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::canon::{canonicalize_labelled, CanonicalForm, Labels};
use crate::error::{DclError, Result};
use crate::graph::{compose, Graph, GraphMorphism};
use crate::hom::{isomorphism_search, HomSearch};
use crate::limits::{pullback, pushout};

/// An instance `typing: carrier → schema`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TypedInstance {
    typing: GraphMorphism,
}

impl TypedInstance {
    pub fn new(typing: GraphMorphism) -> Self {
        TypedInstance { typing }
    }

    /// The empty instance over a schema.
    pub fn empty(schema: Arc<Graph>) -> Self {
        TypedInstance::new(GraphMorphism::initial(schema))
    }

    /// Builds an instance from `(element, type)` pairs and
    /// `(link, source, target, type)` quadruples.
    pub fn build(schema: Arc<Graph>, elements: &[(&str, &str)], links: &[(&str, &str, &str, &str)]) -> Result<Self> {
        let carrier = Graph::new(
            elements.iter().map(|(x, _)| *x),
            links.iter().map(|(l, s, t, _)| (*l, *s, *t)),
        )?;
        let nodes = elements.iter().map(|(x, s)| (x.to_string(), s.to_string())).collect();
        let arrows = links.iter().map(|(l, _, _, a)| (l.to_string(), a.to_string())).collect();
        Ok(TypedInstance::new(GraphMorphism::new(Arc::new(carrier), schema, nodes, arrows)?))
    }

    /// The schema viewed as an instance over itself.
    pub fn terminal(schema: Arc<Graph>) -> Self {
        TypedInstance::new(GraphMorphism::identity(schema))
    }

    pub fn typing(&self) -> &GraphMorphism {
        &self.typing
    }

    pub fn carrier(&self) -> &Arc<Graph> {
        self.typing.dom()
    }

    pub fn schema(&self) -> &Arc<Graph> {
        self.typing.cod()
    }

    /// Type of a carrier element (node or arrow).
    pub fn type_of(&self, element: &str) -> Option<&str> {
        self.typing.image(element)
    }

    /// Carrier nodes typed by a schema node, in sorted order.
    pub fn fiber<'a>(&'a self, schema_node: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        self.typing
            .node_map()
            .iter()
            .filter(move |(_, t)| t.as_str() == schema_node)
            .map(|(n, _)| n.as_str())
    }

    /// Carrier arrows typed by a schema arrow, in sorted order.
    pub fn arrow_fiber<'a>(&'a self, schema_arrow: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        self.typing
            .arrow_map()
            .iter()
            .filter(move |(_, t)| t.as_str() == schema_arrow)
            .map(|(n, _)| n.as_str())
    }

    pub fn element_count(&self) -> usize {
        self.carrier().size()
    }

    /// Re-points the schema at a shared `Arc` holding an equal graph.
    pub fn with_schema(&self, schema: Arc<Graph>) -> Result<TypedInstance> {
        self.clone().into_schema(schema)
    }

    pub fn into_schema(self, schema: Arc<Graph>) -> Result<TypedInstance> {
        Ok(TypedInstance::new(self.typing.into_cod(schema)?))
    }
}

/// A morphism of instances over the same schema: `map ; to.typing = from.typing`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SliceMorphism {
    from: TypedInstance,
    to: TypedInstance,
    map: GraphMorphism,
}

impl SliceMorphism {
    pub fn new(from: TypedInstance, to: TypedInstance, map: GraphMorphism) -> Result<SliceMorphism> {
        if from.schema() != to.schema() {
            return Err(DclError::Mismatch {
                what: "slice morphism schemas",
                expected: from.schema().summary(),
                found: to.schema().summary(),
            });
        }
        if map.dom() != from.carrier() || map.cod() != to.carrier() {
            return Err(DclError::MalformedMorphism(
                "slice morphism map does not run between the instance carriers".into(),
            ));
        }
        let composite = compose(&map, to.typing())?;
        if composite.node_map() != from.typing().node_map()
            || composite.arrow_map() != from.typing().arrow_map()
        {
            return Err(DclError::MalformedMorphism(
                "slice morphism triangle does not commute with the typings".into(),
            ));
        }
        let map = map.with_dom(from.carrier().clone())?.with_cod(to.carrier().clone())?;
        Ok(SliceMorphism { from, to, map })
    }

    pub(crate) fn new_unchecked(from: TypedInstance, to: TypedInstance, map: GraphMorphism) -> SliceMorphism {
        #[cfg(test)]
        assert!(SliceMorphism::new(from.clone(), to.clone(), map.clone()).is_ok());
        SliceMorphism { from, to, map }
    }

    pub fn identity(t: &TypedInstance) -> SliceMorphism {
        SliceMorphism {
            from: t.clone(),
            to: t.clone(),
            map: GraphMorphism::identity(t.carrier().clone()),
        }
    }

    pub fn from(&self) -> &TypedInstance {
        &self.from
    }

    pub fn to(&self) -> &TypedInstance {
        &self.to
    }

    pub fn map(&self) -> &GraphMorphism {
        &self.map
    }

    pub fn schema(&self) -> &Arc<Graph> {
        self.from.schema()
    }

    /// `self ; g`, exact.
    pub fn then(&self, g: &SliceMorphism) -> Result<SliceMorphism> {
        if self.to != g.from {
            return Err(DclError::NotComposable {
                left: self.to.carrier().summary(),
                right: g.from.carrier().summary(),
            });
        }
        Ok(SliceMorphism {
            from: self.from.clone(),
            to: g.to.clone(),
            map: compose(&self.map, &g.map)?,
        })
    }

    pub fn is_isomorphism(&self) -> bool {
        self.map.is_isomorphism()
    }

    pub fn is_monic(&self) -> bool {
        self.map.is_injective()
    }

    pub fn inverse(&self) -> Option<SliceMorphism> {
        Some(SliceMorphism {
            from: self.to.clone(),
            to: self.from.clone(),
            map: self.map.inverse()?,
        })
    }

    /// Search for slice morphisms `from → to` (all maps commuting with typing).
    pub fn search(from: &TypedInstance, to: &TypedInstance) -> Result<HomSearch> {
        if from.schema() != to.schema() {
            return Err(DclError::Mismatch {
                what: "slice search schemas",
                expected: from.schema().summary(),
                found: to.schema().summary(),
            });
        }
        Ok(HomSearch::new(from.carrier().clone(), to.carrier().clone()).over(from.typing(), to.typing()))
    }
}

/// Restriction `t↾m`: pull `t` back along `m: H → G`.
pub fn restrict(t: &TypedInstance, m: &GraphMorphism) -> Result<TypedInstance> {
    Ok(restrict_with_projection(t, m)?.0)
}

/// Restriction together with the projection of the restricted carrier onto
/// `t`'s carrier.
pub fn restrict_with_projection(t: &TypedInstance, m: &GraphMorphism) -> Result<(TypedInstance, GraphMorphism)> {
    if t.schema() != m.cod() {
        return Err(DclError::Mismatch {
            what: "restriction schema",
            expected: m.cod().summary(),
            found: t.schema().summary(),
        });
    }
    let pb = pullback(t.typing(), m)?;
    let typing = pb.right.into_cod(m.dom().clone())?;
    Ok((TypedInstance::new(typing), pb.left))
}

/// Cartesian lift of `q: A → B` at `t` over `B` for the codomain fibration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CartesianLift {
    /// The restricted instance over `A`.
    pub instance: TypedInstance,
    /// Carrier component of the lift (restricted carrier → t's carrier).
    pub carrier_map: GraphMorphism,
    /// Schema component, `q` itself.
    pub schema_map: GraphMorphism,
}

pub fn cod_lift(t: &TypedInstance, q: &GraphMorphism) -> Result<CartesianLift> {
    let (instance, carrier_map) = restrict_with_projection(t, q)?;
    Ok(CartesianLift {
        instance,
        carrier_map,
        schema_map: q.clone(),
    })
}

impl CartesianLift {
    /// Mediating maps `u'` into the lift for a competitor square
    /// `u ; t = s ; w ; q` (with `u: Y → X`, `s: Y → C`, `w: C → A`):
    /// `u' ; carrier_map = u` and `u' ; instance.typing = s ; w`.
    pub fn factorizations(
        &self,
        s: &GraphMorphism,
        w: &GraphMorphism,
        u: &GraphMorphism,
        limit: usize,
    ) -> Result<Vec<GraphMorphism>> {
        let sw = compose(s, w)?;
        let carrier = self.instance.carrier();
        let mut above: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
        for (p, x) in self.carrier_map.node_map().iter().chain(self.carrier_map.arrow_map()) {
            above.entry(x.as_str()).or_default().push(p.as_str());
        }
        let empty = Vec::new();
        let mut search = HomSearch::new(u.dom().clone(), carrier.clone()).over(&sw, self.instance.typing());
        for (y, x) in u.node_map() {
            search = search.restrict_node(y, above.get(x.as_str()).unwrap_or(&empty));
        }
        for (y, x) in u.arrow_map() {
            search = search.restrict_arrow(y, above.get(x.as_str()).unwrap_or(&empty));
        }
        Ok(search.collect(limit)?.morphisms)
    }
}

/// Lift by precomposition: the instance `p ; t.typing` with its evident
/// triangle into `t`.
pub fn dom_lift(t: &TypedInstance, p: &GraphMorphism) -> Result<SliceMorphism> {
    if p.cod() != t.carrier() {
        return Err(DclError::Mismatch {
            what: "lift codomain",
            expected: t.carrier().summary(),
            found: p.cod().summary(),
        });
    }
    let lifted = TypedInstance::new(compose(p, t.typing())?);
    Ok(SliceMorphism::new_unchecked(lifted, t.clone(), p.with_cod(t.carrier().clone())?))
}

/// Canonical representative of a typed instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CanonicalInstance {
    pub instance: TypedInstance,
    /// Slice isomorphism from the input onto `instance`.
    pub relabeling: GraphMorphism,
}

fn type_labels(t: &TypedInstance) -> Labels {
    let schema = t.schema();
    let ranks: BTreeMap<&str, u32> = schema
        .nodes()
        .chain(schema.arrows().map(|(a, _)| a))
        .enumerate()
        .map(|(i, x)| (x, i as u32))
        .collect();
    Labels {
        node: t.typing().node_map().values().map(|x| ranks[x.as_str()]).collect(),
        arrow: t.typing().arrow_map().values().map(|x| ranks[x.as_str()]).collect(),
    }
}

/// Canonicalizes a typed instance; isomorphic instances (isos commuting
/// with typing) get identical canonical instances.
pub fn canonicalize_instance(t: &TypedInstance) -> Result<CanonicalInstance> {
    let labels = type_labels(t);
    let CanonicalForm { graph, relabeling } = canonicalize_labelled(t.carrier(), &labels)?.form;
    let nodes = t.typing().node_map().iter().map(|(x, ty)| (relabeling.node(x).to_string(), ty.clone())).collect();
    let arrows = t.typing().arrow_map().iter().map(|(x, ty)| (relabeling.arrow(x).to_string(), ty.clone())).collect();
    Ok(CanonicalInstance {
        instance: TypedInstance::new(GraphMorphism::new_unchecked(graph, t.schema().clone(), nodes, arrows)),
        relabeling,
    })
}

/// Lexicographically least slice isomorphism `a → b`, if any.
pub fn find_instance_isomorphism(a: &TypedInstance, b: &TypedInstance) -> Result<Option<SliceMorphism>> {
    if a.schema() != b.schema() {
        return Ok(None);
    }
    let Some(search) = isomorphism_search(a.carrier(), b.carrier()) else {
        return Ok(None);
    };
    let found = search.over(a.typing(), b.typing()).first()?;
    Ok(found.map(|m| SliceMorphism::new_unchecked(a.clone(), b.clone(), m)))
}

/// Pushout of slice morphisms out of a common instance; the typing of the
/// apex is induced by the universal property.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlicePushout {
    pub apex: TypedInstance,
    pub from_left: SliceMorphism,
    pub from_right: SliceMorphism,
}

pub fn slice_pushout(f: &SliceMorphism, g: &SliceMorphism) -> Result<SlicePushout> {
    if f.from() != g.from() {
        return Err(DclError::Mismatch {
            what: "slice pushout domains",
            expected: f.from().carrier().summary(),
            found: g.from().carrier().summary(),
        });
    }
    let po = pushout(f.map(), g.map())?;
    let mut nodes = BTreeMap::new();
    let mut arrows = BTreeMap::new();
    for (x, c) in po.from_left.node_map() {
        nodes.insert(c.clone(), f.to().typing().node(x).to_string());
    }
    for (y, c) in po.from_right.node_map() {
        nodes.entry(c.clone()).or_insert_with(|| g.to().typing().node(y).to_string());
    }
    for (x, c) in po.from_left.arrow_map() {
        arrows.insert(c.clone(), f.to().typing().arrow(x).to_string());
    }
    for (y, c) in po.from_right.arrow_map() {
        arrows.entry(c.clone()).or_insert_with(|| g.to().typing().arrow(y).to_string());
    }
    let apex = TypedInstance::new(GraphMorphism::new_unchecked(
        po.apex.clone(),
        f.schema().clone(),
        nodes,
        arrows,
    ));
    Ok(SlicePushout {
        from_left: SliceMorphism::new_unchecked(f.to().clone(), apex.clone(), po.from_left),
        from_right: SliceMorphism::new_unchecked(g.to().clone(), apex.clone(), po.from_right),
        apex,
    })
}

/// Coproduct of two instances over the same schema.
pub fn slice_coproduct(a: &TypedInstance, b: &TypedInstance) -> Result<SlicePushout> {
    let empty = TypedInstance::empty(a.schema().clone());
    let ia = SliceMorphism::new_unchecked(
        empty.clone(),
        a.clone(),
        GraphMorphism::initial(a.carrier().clone()).with_dom(empty.carrier().clone())?,
    );
    let b = b.with_schema(a.schema().clone())?;
    let ib = SliceMorphism::new_unchecked(
        empty.clone(),
        b.clone(),
        GraphMorphism::initial(b.carrier().clone()).with_dom(empty.carrier().clone())?,
    );
    slice_pushout(&ia, &ib)
}
