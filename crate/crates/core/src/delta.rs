//! Instance updates as spans of slice morphisms, composed by pullback.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::{DclError, Result};
use crate::graph::{compose, GraphMorphism};
use crate::limits::{pair_id, pullback};
use crate::slice::{canonicalize_instance, restrict_with_projection, SliceMorphism, TypedInstance};

/// A span `source ← apex → target` of slice morphisms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Delta {
    left: SliceMorphism,
    right: SliceMorphism,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Backward,
}

impl Delta {
    pub fn new(left: SliceMorphism, right: SliceMorphism) -> Result<Delta> {
        if left.from() != right.from() {
            return Err(DclError::Delta("legs do not share an apex".into()));
        }
        if left.schema() != right.schema() {
            return Err(DclError::Delta("endpoints live over different schemas".into()));
        }
        Ok(Delta { left, right })
    }

    pub fn identity(t: &TypedInstance) -> Delta {
        Delta {
            left: SliceMorphism::identity(t),
            right: SliceMorphism::identity(t),
        }
    }

    /// Forward gives `(id, f)`, backward gives `(f, id)`.
    pub fn of(f: &SliceMorphism, direction: Direction) -> Delta {
        let id = SliceMorphism::identity(f.from());
        match direction {
            Direction::Forward => Delta {
                left: id,
                right: f.clone(),
            },
            Direction::Backward => Delta {
                left: f.clone(),
                right: id,
            },
        }
    }

    pub fn source(&self) -> &TypedInstance {
        self.left.to()
    }

    pub fn target(&self) -> &TypedInstance {
        self.right.to()
    }

    pub fn apex(&self) -> &TypedInstance {
        self.left.from()
    }

    pub fn left(&self) -> &SliceMorphism {
        &self.left
    }

    pub fn right(&self) -> &SliceMorphism {
        &self.right
    }

    /// Whether both legs are injective.
    pub fn is_monic(&self) -> bool {
        self.left.is_monic() && self.right.is_monic()
    }

    /// The same span with its apex replaced by the canonical representative.
    pub fn canonical(&self) -> Result<Delta> {
        let c = canonicalize_instance(self.apex())?;
        let inv = c.relabeling.inverse().expect("relabeling is an isomorphism");
        let leg = |m: &SliceMorphism| -> Result<SliceMorphism> {
            let map = compose(&inv, m.map())?.with_dom(c.instance.carrier().clone())?;
            Ok(SliceMorphism::new_unchecked(c.instance.clone(), m.to().clone(), map))
        };
        Ok(Delta {
            left: leg(&self.left)?,
            right: leg(&self.right)?,
        })
    }

    /// An apex isomorphism commuting with both legs, if one exists.
    pub fn apex_isomorphism(&self, other: &Delta) -> Result<Option<SliceMorphism>> {
        if self.source() != other.source() || self.target() != other.target() {
            return Ok(None);
        }
        let (a, b) = (self.apex(), other.apex());
        if a.carrier().node_count() != b.carrier().node_count()
            || a.carrier().arrow_count() != b.carrier().arrow_count()
        {
            return Ok(None);
        }
        let mut by_legs: BTreeMap<(&str, &str), Vec<&str>> = BTreeMap::new();
        for x in b.carrier().nodes() {
            by_legs
                .entry((other.left.map().node(x), other.right.map().node(x)))
                .or_default()
                .push(x);
        }
        for (x, _) in b.carrier().arrows() {
            by_legs
                .entry((other.left.map().arrow(x), other.right.map().arrow(x)))
                .or_default()
                .push(x);
        }
        let empty = Vec::new();
        let mut search = SliceMorphism::search(a, b)?.injective(true);
        for x in a.carrier().nodes() {
            let key = (self.left.map().node(x), self.right.map().node(x));
            search = search.restrict_node(x, by_legs.get(&key).unwrap_or(&empty));
        }
        for (x, _) in a.carrier().arrows() {
            let key = (self.left.map().arrow(x), self.right.map().arrow(x));
            search = search.restrict_arrow(x, by_legs.get(&key).unwrap_or(&empty));
        }
        Ok(search
            .first()?
            .map(|m| SliceMorphism::new_unchecked(a.clone(), b.clone(), m)))
    }

    /// Equality of deltas up to apex isomorphism.
    pub fn equivalent(&self, other: &Delta) -> Result<bool> {
        Ok(self.apex_isomorphism(other)?.is_some())
    }
}

/// `d1` followed by `d2`: the apex is the pullback of `d1.right` and
/// `d2.left` over the shared instance, canonicalized.
pub fn compose_delta(d1: &Delta, d2: &Delta) -> Result<Delta> {
    if d1.target() != d2.source() {
        return Err(DclError::Delta(format!(
            "target {} of the first delta is not the source {} of the second",
            d1.target().carrier().summary(),
            d2.source().carrier().summary()
        )));
    }
    let pb = pullback(d1.right.map(), d2.left.map())?;
    let typing = compose(&pb.left, d1.apex().typing())?;
    let apex = TypedInstance::new(typing);
    let left = SliceMorphism::new_unchecked(apex.clone(), d1.source().clone(), compose(&pb.left, d1.left.map())?);
    let right = SliceMorphism::new_unchecked(apex, d2.target().clone(), compose(&pb.right, d2.right.map())?);
    Delta { left, right }.canonical()
}

/// Map induced on restrictions: for restrictions built by
/// [`restrict_with_projection`], `(x|h) ↦ (m(x)|h)`.
fn induced_on_restrictions(
    m: &GraphMorphism,
    from: &(TypedInstance, GraphMorphism),
    to: &TypedInstance,
) -> Result<GraphMorphism> {
    let (r, proj) = from;
    let nodes = r
        .typing()
        .node_map()
        .iter()
        .map(|(p, h)| (p.clone(), pair_id(m.node(proj.node(p)), h)))
        .collect();
    let arrows = r
        .typing()
        .arrow_map()
        .iter()
        .map(|(p, h)| (p.clone(), pair_id(m.arrow(proj.arrow(p)), h)))
        .collect();
    GraphMorphism::new(r.carrier().clone(), to.carrier().clone(), nodes, arrows)
}

/// Restricts all three instances of a delta along a schema morphism.
pub fn pullback_delta(f: &GraphMorphism, d: &Delta) -> Result<Delta> {
    if d.apex().schema() != f.cod() {
        return Err(DclError::Mismatch {
            what: "delta schema",
            expected: f.cod().summary(),
            found: d.apex().schema().summary(),
        });
    }
    let apex = restrict_with_projection(d.apex(), f)?;
    let source = restrict_with_projection(d.source(), f)?.0;
    let target = restrict_with_projection(d.target(), f)?.0;
    let schema: &Arc<_> = apex.0.schema();
    let source = source.with_schema(schema.clone())?;
    let target = target.with_schema(schema.clone())?;
    let left = induced_on_restrictions(d.left.map(), &apex, &source)?;
    let right = induced_on_restrictions(d.right.map(), &apex, &target)?;
    Ok(Delta {
        left: SliceMorphism::new(apex.0.clone(), source, left)?,
        right: SliceMorphism::new(apex.0, target, right)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;

    fn schema() -> Arc<Graph> {
        Arc::new(Graph::new(["A"], [("r", "A", "A")]).unwrap())
    }

    fn discrete(schema: &Arc<Graph>, xs: &[&str]) -> TypedInstance {
        let carrier = Arc::new(Graph::discrete(xs.iter().copied()).unwrap());
        let nodes = xs.iter().map(|x| (x.to_string(), "A".to_string())).collect();
        TypedInstance::new(GraphMorphism::new(carrier, schema.clone(), nodes, BTreeMap::new()).unwrap())
    }

    fn inclusion(a: &TypedInstance, b: &TypedInstance) -> SliceMorphism {
        let nodes: Vec<(&str, &str)> = a.carrier().nodes().map(|x| (x, x)).collect();
        let map = GraphMorphism::from_pairs(a.carrier().clone(), b.carrier().clone(), &nodes, &[]).unwrap();
        SliceMorphism::new(a.clone(), b.clone(), map).unwrap()
    }

    #[test]
    fn delete_then_add() {
        let s = schema();
        let t = discrete(&s, &["x", "y"]);
        let t_minus = discrete(&s, &["x"]);
        let t_plus = discrete(&s, &["x", "z"]);
        let d1 = Delta::of(&inclusion(&t_minus, &t), Direction::Backward);
        let d2 = Delta::of(&inclusion(&t_minus, &t_plus), Direction::Forward);
        let c = compose_delta(&d1, &d2).unwrap();
        assert_eq!(c.apex().carrier().node_count(), 1);
        assert_eq!(c.left().map().node_map().values().collect::<Vec<_>>(), ["x"]);
        assert_eq!(c.right().map().node_map().values().collect::<Vec<_>>(), ["x"]);
        assert_eq!(c.target(), &t_plus);
    }

    #[test]
    fn identity_is_unit() {
        let s = schema();
        let t = discrete(&s, &["x", "y"]);
        let t_minus = discrete(&s, &["x"]);
        let d = Delta::of(&inclusion(&t_minus, &t), Direction::Forward);
        let l = compose_delta(&Delta::identity(&t_minus), &d).unwrap();
        let r = compose_delta(&d, &Delta::identity(&t)).unwrap();
        assert!(l.equivalent(&d).unwrap());
        assert!(r.equivalent(&d).unwrap());
    }

    #[test]
    fn endpoint_mismatch() {
        let s = schema();
        let t = discrete(&s, &["x"]);
        let u = discrete(&s, &["y"]);
        assert!(compose_delta(&Delta::identity(&t), &Delta::identity(&u)).is_err());
    }

    #[test]
    fn backward_reverses_endpoints() {
        let s = schema();
        let a = discrete(&s, &["x"]);
        let b = discrete(&s, &["x", "y"]);
        let f = inclusion(&a, &b);
        let fwd = Delta::of(&f, Direction::Forward);
        let bwd = Delta::of(&f, Direction::Backward);
        assert_eq!((fwd.source(), fwd.target()), (&a, &b));
        assert_eq!((bwd.source(), bwd.target()), (&b, &a));
    }

    #[test]
    fn pullback_of_identity_delta() {
        let s = schema();
        let t = discrete(&s, &["x", "y"]);
        let d = pullback_delta(&GraphMorphism::identity(s), &Delta::identity(&t)).unwrap();
        assert!(d.left().map().is_identity());
        assert!(d.right().map().is_identity());
        assert_eq!(d.apex().carrier().node_count(), 2);
    }
}
