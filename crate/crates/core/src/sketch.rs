//! Sketches: a carrier graph with labelled constraint declarations.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use crate::error::{DclError, Result};
use crate::graph::{compose, Graph, GraphMorphism};
use crate::signature::{Semantics, Signature};

/// A constraint symbol bound into a carrier: `binding: arity → carrier`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ConstraintDeclaration {
    id: String,
    label: String,
    binding: GraphMorphism,
}

impl ConstraintDeclaration {
    pub fn new(id: impl Into<String>, label: impl Into<String>, binding: GraphMorphism) -> ConstraintDeclaration {
        ConstraintDeclaration {
            id: id.into(),
            label: label.into(),
            binding,
        }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn binding(&self) -> &GraphMorphism {
        &self.binding
    }

    /// Same label and binding, ignoring the id.
    pub fn same_constraint(&self, other: &ConstraintDeclaration) -> bool {
        self.label == other.label && self.binding == other.binding
    }
}

/// Covariant translation along a carrier morphism: the binding is
/// post-composed with `f`; the id gains a trailing `'`.
pub fn translate_declaration(f: &GraphMorphism, d: &ConstraintDeclaration) -> Result<ConstraintDeclaration> {
    if **d.binding.cod() != **f.dom() {
        return Err(DclError::Mismatch {
            what: "declaration carrier and translation domain",
            expected: f.dom().summary(),
            found: d.binding.cod().summary(),
        });
    }
    Ok(ConstraintDeclaration {
        id: format!("{}'", d.id),
        label: d.label.clone(),
        binding: compose(d.binding(), f)?.with_cod(f.cod().clone())?,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sketch {
    carrier: Arc<Graph>,
    signature: Arc<Signature>,
    declarations: BTreeMap<String, ConstraintDeclaration>,
    closed: bool,
}

/// A dependency a declaration is waiting on.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct MissingLift {
    pub declaration: String,
    pub dependency: String,
}

/// Which declaration discharges a dependency of another.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct ClosureLift {
    pub declaration: String,
    pub dependency: String,
    pub lifted: String,
}

impl Sketch {
    /// Checks every declaration against the signature and carrier. The
    /// sketch is marked closed when the closure condition already holds.
    pub fn new(
        carrier: Arc<Graph>,
        signature: Arc<Signature>,
        declarations: impl IntoIterator<Item = ConstraintDeclaration>,
    ) -> Result<Sketch> {
        let mut sketch = Sketch {
            carrier,
            signature,
            declarations: BTreeMap::new(),
            closed: false,
        };
        for d in declarations {
            sketch.insert(d)?;
        }
        sketch.closed = sketch.missing_lifts().is_empty();
        Ok(sketch)
    }

    fn insert(&mut self, d: ConstraintDeclaration) -> Result<()> {
        let sym = self.signature.symbol(&d.label)?;
        if **d.binding.dom() != **sym.arity() {
            return Err(DclError::Sketch(format!(
                "binding of `{}` does not start at the arity of `{}`",
                d.id, d.label
            )));
        }
        if **d.binding.cod() != *self.carrier {
            return Err(DclError::Sketch(format!("binding of `{}` does not land in the carrier", d.id)));
        }
        if self.declarations.contains_key(&d.id) {
            return Err(DclError::Sketch(format!("declaration id `{}` repeated", d.id)));
        }
        let binding = d.binding.with_dom(sym.arity().clone())?.with_cod(self.carrier.clone())?;
        self.declarations
            .insert(d.id.clone(), ConstraintDeclaration { binding, ..d });
        Ok(())
    }

    /// A sketch with no declarations.
    pub fn bare(carrier: Arc<Graph>, signature: Arc<Signature>) -> Sketch {
        Sketch {
            carrier,
            signature,
            declarations: BTreeMap::new(),
            closed: true,
        }
    }

    pub fn carrier(&self) -> &Arc<Graph> {
        &self.carrier
    }

    pub fn signature(&self) -> &Arc<Signature> {
        &self.signature
    }

    /// Declarations in id order.
    pub fn declarations(&self) -> impl ExactSizeIterator<Item = &ConstraintDeclaration> {
        self.declarations.values()
    }

    pub fn declaration(&self, id: &str) -> Option<&ConstraintDeclaration> {
        self.declarations.get(id)
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    /// The same sketch with further declarations.
    pub fn with_declarations(&self, extra: impl IntoIterator<Item = ConstraintDeclaration>) -> Result<Sketch> {
        Sketch::new(
            self.carrier.clone(),
            self.signature.clone(),
            self.declarations.values().cloned().chain(extra),
        )
    }

    /// The same sketch without the given declarations.
    pub fn without(&self, ids: &[&str]) -> Sketch {
        let mut s = self.clone();
        for id in ids {
            s.declarations.remove(*id);
        }
        s.closed = s.missing_lifts().is_empty();
        s
    }

    fn find(&self, label: &str, binding: &GraphMorphism) -> Option<&ConstraintDeclaration> {
        self.declarations
            .values()
            .find(|d| d.label == label && d.binding == *binding)
    }

    fn required(&self, d: &ConstraintDeclaration) -> Vec<(String, String, GraphMorphism)> {
        self.signature
            .dependencies_from(&d.label)
            .map(|dep| {
                let b = compose(dep.arity_map(), &d.binding)
                    .expect("arity maps end at the symbol arity")
                    .with_cod(self.carrier.clone())
                    .expect("same carrier");
                (dep.id().to_string(), dep.to().to_string(), b)
            })
            .collect()
    }

    /// Dependencies of declarations with no matching declaration.
    pub fn missing_lifts(&self) -> Vec<MissingLift> {
        let mut out = Vec::new();
        for d in self.declarations.values() {
            for (dep, label, binding) in self.required(d) {
                if self.find(&label, &binding).is_none() {
                    out.push(MissingLift {
                        declaration: d.id.clone(),
                        dependency: dep,
                    });
                }
            }
        }
        out
    }

    /// For a closed sketch, the declaration (least id) discharging each
    /// dependency of each declaration.
    pub fn closure_lifts(&self) -> Vec<ClosureLift> {
        let mut out = Vec::new();
        for d in self.declarations.values() {
            for (dep, label, binding) in self.required(d) {
                if let Some(l) = self.find(&label, &binding) {
                    out.push(ClosureLift {
                        declaration: d.id.clone(),
                        dependency: dep,
                        lifted: l.id.clone(),
                    });
                }
            }
        }
        out
    }

    /// Least closed extension. New declarations are named
    /// `<parent id>/<dependency id>`.
    pub fn close(&self) -> Sketch {
        let mut s = self.clone();
        let mut queue: Vec<String> = s.declarations.keys().cloned().collect();
        while let Some(id) = queue.pop() {
            let d = s.declarations[&id].clone();
            for (dep, label, binding) in s.required(&d) {
                if s.find(&label, &binding).is_some() {
                    continue;
                }
                let mut new_id = format!("{id}/{dep}");
                while s.declarations.contains_key(&new_id) {
                    new_id.push('\'');
                }
                s.declarations.insert(
                    new_id.clone(),
                    ConstraintDeclaration {
                        id: new_id.clone(),
                        label,
                        binding,
                    },
                );
                queue.push(new_id);
            }
        }
        s.closed = true;
        s
    }

    /// Pairs of distinct declarations with the same label and binding.
    pub fn extensional_duplicates(&self) -> Vec<(String, String)> {
        let ds: Vec<_> = self.declarations.values().collect();
        let mut out = Vec::new();
        for (i, a) in ds.iter().enumerate() {
            for b in &ds[i + 1..] {
                if a.same_constraint(b) {
                    out.push((a.id.clone(), b.id.clone()));
                }
            }
        }
        out
    }

    /// All declarations translated along `f: carrier → G′`.
    pub fn translate(&self, f: &GraphMorphism) -> Result<Sketch> {
        if **f.dom() != *self.carrier {
            return Err(DclError::Mismatch {
                what: "translation domain",
                expected: self.carrier.summary(),
                found: f.dom().summary(),
            });
        }
        let decls = self
            .declarations
            .values()
            .map(|d| translate_declaration(f, d))
            .collect::<Result<Vec<_>>>()?;
        Sketch::new(f.cod().clone(), self.signature.clone(), decls)
    }

    /// Adds the default multiplicity to every carrier arrow that no
    /// multiplicity declaration (including `[0..*]`) binds: `[1..*]` on
    /// associations and `[1]` on attributes.
    pub fn elaborate_defaults(&self, policy: &DefaultPolicy) -> Result<Sketch> {
        let mut constrained = BTreeSet::new();
        for d in self.declarations.values() {
            let sym = self.signature.symbol(&d.label)?;
            if let Semantics::Multiplicity(_) = sym.semantics() {
                constrained.extend(d.binding.arrow_map().values().cloned());
            }
        }
        let mut extra = Vec::new();
        for (a, arrow) in self.carrier.arrows() {
            let label = match (policy.associations.contains(a), policy.attributes.contains(a)) {
                (true, false) => &policy.association_default,
                (false, true) => &policy.attribute_default,
                (true, true) => {
                    return Err(DclError::Sketch(format!("arrow `{a}` is both association and attribute")))
                }
                (false, false) => {
                    return Err(DclError::Sketch(format!("arrow `{a}` is neither association nor attribute")))
                }
            };
            if constrained.contains(a) {
                continue;
            }
            let sym = self.signature.symbol(label)?;
            let (r, shape) = sym.arity().arrows().next().expect("multiplicity arity");
            let binding = GraphMorphism::from_pairs(
                sym.arity().clone(),
                self.carrier.clone(),
                &[(&shape.src, &arrow.src), (&shape.tgt, &arrow.tgt)],
                &[(r, a)],
            )?;
            let mut id = format!("default/{a}");
            while self.declarations.contains_key(&id) {
                id.push('\'');
            }
            extra.push(ConstraintDeclaration::new(id, label.clone(), binding));
        }
        self.with_declarations(extra)
    }
}

/// Partition of carrier arrows for default multiplicities.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DefaultPolicy {
    pub associations: BTreeSet<String>,
    pub attributes: BTreeSet<String>,
    pub association_default: String,
    pub attribute_default: String,
}

impl DefaultPolicy {
    pub fn new<S: Into<String>>(
        associations: impl IntoIterator<Item = S>,
        attributes: impl IntoIterator<Item = S>,
    ) -> DefaultPolicy {
        DefaultPolicy {
            associations: associations.into_iter().map(Into::into).collect(),
            attributes: attributes.into_iter().map(Into::into).collect(),
            association_default: "[1..*]".into(),
            attribute_default: "[1]".into(),
        }
    }
}

/// A carrier morphism together with an explicit declaration map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SketchMorphism {
    graph_map: GraphMorphism,
    decl_map: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum MorphismViolation {
    /// The graph map does not run between the carriers.
    Carriers,
    /// A source declaration has no image.
    Unmapped(String),
    /// The image of a declaration does not exist in the target.
    UnknownTarget { declaration: String, image: String },
    Label { declaration: String, image: String },
    Binding { declaration: String, image: String },
}

impl SketchMorphism {
    pub fn new(graph_map: GraphMorphism, decl_map: BTreeMap<String, String>) -> SketchMorphism {
        SketchMorphism { graph_map, decl_map }
    }

    pub fn identity(s: &Sketch) -> SketchMorphism {
        SketchMorphism {
            graph_map: GraphMorphism::identity(s.carrier.clone()),
            decl_map: s.declarations.keys().map(|k| (k.clone(), k.clone())).collect(),
        }
    }

    /// The graph map plus each source declaration sent to a target
    /// declaration with the translated binding. Fails if one is missing.
    pub fn inferred(graph_map: GraphMorphism, from: &Sketch, to: &Sketch) -> Result<SketchMorphism> {
        let mut decl_map = BTreeMap::new();
        for d in from.declarations() {
            let t = translate_declaration(&graph_map, d)?;
            let image = to.find(&t.label, &t.binding.with_cod(to.carrier.clone())?).ok_or_else(|| {
                DclError::Sketch(format!("no declaration in the target matches the translation of `{}`", d.id))
            })?;
            decl_map.insert(d.id.clone(), image.id.clone());
        }
        Ok(SketchMorphism { graph_map, decl_map })
    }

    pub fn graph_map(&self) -> &GraphMorphism {
        &self.graph_map
    }

    pub fn decl_map(&self) -> &BTreeMap<String, String> {
        &self.decl_map
    }

    pub fn then(&self, g: &SketchMorphism) -> Result<SketchMorphism> {
        let decl_map = self
            .decl_map
            .iter()
            .map(|(a, b)| {
                g.decl_map
                    .get(b)
                    .map(|c| (a.clone(), c.clone()))
                    .ok_or_else(|| DclError::Sketch(format!("declaration `{b}` unmapped by the second morphism")))
            })
            .collect::<Result<_>>()?;
        Ok(SketchMorphism {
            graph_map: compose(&self.graph_map, &g.graph_map)?,
            decl_map,
        })
    }

    /// Label preservation and binding coherence per declaration.
    pub fn check(&self, from: &Sketch, to: &Sketch) -> Vec<MorphismViolation> {
        let mut out = Vec::new();
        if **self.graph_map.dom() != *from.carrier || **self.graph_map.cod() != *to.carrier {
            out.push(MorphismViolation::Carriers);
            return out;
        }
        for d in from.declarations() {
            let Some(image) = self.decl_map.get(&d.id) else {
                out.push(MorphismViolation::Unmapped(d.id.clone()));
                continue;
            };
            let Some(target) = to.declaration(image) else {
                out.push(MorphismViolation::UnknownTarget {
                    declaration: d.id.clone(),
                    image: image.clone(),
                });
                continue;
            };
            if target.label != d.label {
                out.push(MorphismViolation::Label {
                    declaration: d.id.clone(),
                    image: image.clone(),
                });
                continue;
            }
            let translated = compose(&d.binding, &self.graph_map).expect("carriers checked");
            if translated.node_map() != target.binding.node_map()
                || translated.arrow_map() != target.binding.arrow_map()
            {
                out.push(MorphismViolation::Binding {
                    declaration: d.id.clone(),
                    image: image.clone(),
                });
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signature::{arrow_arity, leg_map, span_arity};

    fn span_carrier() -> Arc<Graph> {
        Arc::new(Graph::new(["Lic", "Drv", "Typ"], [("by", "Lic", "Drv"), ("for", "Lic", "Typ")]).unwrap())
    }

    fn jm_sketch() -> Sketch {
        let carrier = span_carrier();
        let b = GraphMorphism::from_pairs(
            span_arity(),
            carrier.clone(),
            &[("R", "Lic"), ("A", "Drv"), ("B", "Typ")],
            &[("f", "by"), ("g", "for")],
        )
        .unwrap();
        Sketch::new(carrier, Arc::new(Signature::builtin()), [ConstraintDeclaration::new("j", "[jm]", b)]).unwrap()
    }

    #[test]
    fn closure_adds_leg_constraints() {
        let s = jm_sketch();
        assert!(!s.is_closed());
        let c = s.close();
        assert!(c.is_closed());
        let ids: Vec<&str> = c.declarations().map(|d| d.id()).collect();
        assert_eq!(ids, ["j", "j/d1", "j/d2"]);
        let j = c.declaration("j").unwrap().binding();
        for (id, leg) in [("j/d1", "f"), ("j/d2", "g")] {
            let d = c.declaration(id).unwrap();
            assert_eq!(d.label(), "[1]");
            assert_eq!(d.binding(), &compose(&leg_map(leg), j).unwrap());
        }
        assert_eq!(c.close(), c);
        assert_eq!(c.closure_lifts().len(), 2);
    }

    #[test]
    fn translation_is_functorial() {
        let s = jm_sketch();
        let d = s.declaration("j").unwrap();
        let id = GraphMorphism::identity(s.carrier().clone());
        let t = translate_declaration(&id, d).unwrap();
        assert_eq!(t.binding(), d.binding());
        assert_eq!(t.id(), "j'");
    }

    #[test]
    fn morphism_checks() {
        let s = jm_sketch().close();
        assert!(SketchMorphism::identity(&s).check(&s, &s).is_empty());
        let mut m = SketchMorphism::identity(&s);
        m.decl_map.remove("j/d1");
        assert_eq!(m.check(&s, &s), [MorphismViolation::Unmapped("j/d1".into())]);
        let mut m = SketchMorphism::identity(&s);
        m.decl_map.insert("j".into(), "j/d1".into());
        assert!(matches!(m.check(&s, &s)[..], [MorphismViolation::Label { .. }]));
    }

    #[test]
    fn defaults() {
        let carrier = Arc::new(Graph::new(["V", "T", "S"], [("of", "V", "T"), ("code", "V", "S")]).unwrap());
        let sig = Arc::new(Signature::builtin());
        let b = GraphMorphism::from_pairs(arrow_arity(), carrier.clone(), &[("A", "V"), ("B", "T")], &[("r", "of")]).unwrap();
        let s = Sketch::new(carrier.clone(), sig.clone(), [ConstraintDeclaration::new("free", "[0..*]", b)]).unwrap();
        let e = s.elaborate_defaults(&DefaultPolicy::new(["of"], ["code"])).unwrap();
        let labels: Vec<(&str, &str)> = e.declarations().map(|d| (d.id(), d.label())).collect();
        assert_eq!(labels, [("default/code", "[1]"), ("free", "[0..*]")]);
        assert!(s.elaborate_defaults(&DefaultPolicy::new(["of"], Vec::<&str>::new())).is_err());
        let empty = Sketch::bare(Arc::new(Graph::empty()), sig);
        assert_eq!(empty.elaborate_defaults(&DefaultPolicy::new(Vec::<&str>::new(), vec![])).unwrap(), empty);
    }
}
