//! Constraint symbols, their semantics and the dependencies between them.

mod builtin;
mod eval;

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use crate::enumerate::{for_each_instance, Bounds};
use crate::error::{DclError, Result};
use crate::graph::{compose, Graph, GraphMorphism};
use crate::slice::{canonicalize_instance, restrict, SliceMorphism, TypedInstance};

pub use builtin::{arrow_arity, key_arity, leg_map, parallel_arity, span_arity, square_arity, Multiplicity};
pub use eval::{
    check_injectivity, check_lifting, lifting_to_regular, regular_to_lifting, Counterexample, Evidence, Factorization,
    Verdict, Witness,
};

/// How validity of an instance over the arity is decided.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Semantics {
    /// Distinct targets per source element lie in one of the intervals.
    Multiplicity(Multiplicity),
    /// Elements of the class node are determined by their attribute values.
    Key,
    /// Every link of the first arrow (by id) has a parallel link of the second.
    Subset,
    /// The composite of the first path is included in that of the second.
    /// Paths are the first and last two arrows by id.
    CompositeSubset4,
    /// No two distinct span elements share both feet. `strict` also
    /// requires each leg to be single valued and total.
    JointlyMonic { strict: bool },
    /// The composites of the two paths coincide (path layout as for
    /// [`Semantics::CompositeSubset4`]).
    Commutativity,
    /// Injectivity with respect to a slice morphism over the arity.
    Regular(SliceMorphism),
    /// Lifting against `m: W → R` with `n: R → arity`.
    Lifting { m: GraphMorphism, n: GraphMorphism },
    /// An explicit list of valid instances, stored canonically.
    Table(BTreeMap<String, TypedInstance>),
}

impl Semantics {
    pub fn kind(&self) -> &'static str {
        match self {
            Semantics::Multiplicity(_) => "multiplicity",
            Semantics::Key => "key",
            Semantics::Subset => "subset",
            Semantics::CompositeSubset4 => "composite_subset4",
            Semantics::JointlyMonic { strict: false } => "jointly_monic",
            Semantics::JointlyMonic { strict: true } => "jointly_monic_strict",
            Semantics::Commutativity => "commutativity",
            Semantics::Regular(_) => "regular",
            Semantics::Lifting { .. } => "lifting",
            Semantics::Table(_) => "table",
        }
    }

    /// A table semantics from instances; entries are canonicalized and
    /// duplicates up to isomorphism rejected.
    pub fn table<S: Into<String>>(arity: &Arc<Graph>, entries: impl IntoIterator<Item = (S, TypedInstance)>) -> Result<Semantics> {
        let mut out = BTreeMap::new();
        let mut seen = std::collections::HashMap::new();
        for (id, t) in entries {
            let id = id.into();
            if t.schema() != arity {
                return Err(DclError::Signature(format!("table entry `{id}` is not typed over the arity")));
            }
            let c = canonicalize_instance(&t.with_schema(arity.clone())?)?.instance;
            if let Some(other) = seen.insert(c.clone(), id.clone()) {
                return Err(DclError::Signature(format!("table entries `{other}` and `{id}` are isomorphic")));
            }
            if out.insert(id.clone(), c).is_some() {
                return Err(DclError::Signature(format!("table entry id `{id}` repeated")));
            }
        }
        Ok(Semantics::Table(out))
    }
}

/// A named constraint symbol with its arity graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstraintSymbol {
    name: String,
    arity: Arc<Graph>,
    semantics: Semantics,
}

fn shape_error(name: &str, what: &str) -> DclError {
    DclError::Signature(format!("arity of `{name}` does not fit {what}"))
}

/// Arrows of a two-path arity, in the order `p1, p2, q1, q2`.
pub(crate) fn square_paths(arity: &Graph) -> Option<[&str; 4]> {
    let ids: Vec<&str> = arity.arrows().map(|(a, _)| a).collect();
    let [p1, p2, q1, q2] = ids[..] else { return None };
    let a = |x: &str| arity.arrow(x).expect("arity arrow");
    let ok = a(p1).tgt == a(p2).src
        && a(q1).tgt == a(q2).src
        && a(p1).src == a(q1).src
        && a(p2).tgt == a(q2).tgt;
    ok.then_some([p1, p2, q1, q2])
}

impl ConstraintSymbol {
    pub fn new(name: impl Into<String>, arity: Arc<Graph>, semantics: Semantics) -> Result<ConstraintSymbol> {
        let name = name.into();
        let arrows: Vec<_> = arity.arrows().collect();
        match &semantics {
            Semantics::Multiplicity(_) => {
                if arrows.len() != 1 || arity.node_count() > 2 {
                    return Err(shape_error(&name, "a single arrow"));
                }
            }
            Semantics::Key => {
                let Some((_, first)) = arrows.first() else {
                    return Err(shape_error(&name, "a key (no attributes)"));
                };
                if arrows.iter().any(|(_, a)| a.src != first.src || a.tgt == first.src) {
                    return Err(shape_error(&name, "a key (attribute arrows out of one class node)"));
                }
            }
            Semantics::Subset => {
                if arrows.len() != 2 || arrows[0].1 != arrows[1].1 {
                    return Err(shape_error(&name, "two parallel arrows"));
                }
            }
            Semantics::CompositeSubset4 | Semantics::Commutativity => {
                if square_paths(&arity).is_none() {
                    return Err(shape_error(&name, "two paths of length two"));
                }
            }
            Semantics::JointlyMonic { .. } => {
                if arrows.len() != 2 || arrows[0].1.src != arrows[1].1.src {
                    return Err(shape_error(&name, "a span"));
                }
            }
            Semantics::Regular(formula) => {
                if **formula.schema() != *arity {
                    return Err(shape_error(&name, "the regular formula"));
                }
            }
            Semantics::Lifting { m, n } => {
                if **n.cod() != *arity || **m.cod() != **n.dom() {
                    return Err(shape_error(&name, "the lifting pair"));
                }
            }
            Semantics::Table(entries) => {
                if entries.values().any(|t| **t.schema() != *arity) {
                    return Err(shape_error(&name, "the table entries"));
                }
            }
        }
        Ok(ConstraintSymbol { name, arity, semantics })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn arity(&self) -> &Arc<Graph> {
        &self.arity
    }

    pub fn semantics(&self) -> &Semantics {
        &self.semantics
    }

    /// Decides `t ⊨ self` for an instance typed over the arity.
    pub fn evaluate(&self, t: &TypedInstance) -> Result<Verdict> {
        eval::evaluate(self, t)
    }
}

/// `from` depends on `to`: every valid `from` instance restricts along
/// `arity_map: arity(to) → arity(from)` to a valid `to` instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dependency {
    id: String,
    from: String,
    to: String,
    arity_map: GraphMorphism,
}

impl Dependency {
    pub fn new(id: impl Into<String>, from: impl Into<String>, to: impl Into<String>, arity_map: GraphMorphism) -> Dependency {
        Dependency {
            id: id.into(),
            from: from.into(),
            to: to.into(),
            arity_map,
        }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn from(&self) -> &str {
        &self.from
    }

    pub fn to(&self) -> &str {
        &self.to
    }

    pub fn arity_map(&self) -> &GraphMorphism {
        &self.arity_map
    }
}

/// Constraint symbols plus an acyclic family of dependencies.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Signature {
    symbols: BTreeMap<String, ConstraintSymbol>,
    dependencies: BTreeMap<String, Dependency>,
}

impl Signature {
    pub fn new() -> Signature {
        Signature::default()
    }

    pub fn add_symbol(&mut self, symbol: ConstraintSymbol) -> Result<()> {
        if self.symbols.contains_key(symbol.name()) {
            return Err(DclError::Signature(format!("symbol `{}` declared twice", symbol.name())));
        }
        self.symbols.insert(symbol.name.clone(), symbol);
        Ok(())
    }

    /// Replaces a symbol; dependencies touching it are re-checked.
    pub fn replace_symbol(&mut self, symbol: ConstraintSymbol) -> Result<()> {
        let mut next = self.clone();
        next.symbols.insert(symbol.name.clone(), symbol);
        for d in next.dependencies.values() {
            next.check_dependency(d)?;
        }
        *self = next;
        Ok(())
    }

    fn check_dependency(&self, d: &Dependency) -> Result<()> {
        let from = self.symbol(&d.from)?;
        let to = self.symbol(&d.to)?;
        if **d.arity_map.dom() != **to.arity() || **d.arity_map.cod() != **from.arity() {
            return Err(DclError::Signature(format!(
                "dependency `{}` must map the arity of `{}` into the arity of `{}`",
                d.id, d.to, d.from
            )));
        }
        Ok(())
    }

    /// Adds a dependency, rejecting it if it would close a cycle.
    pub fn add_dependency(&mut self, d: Dependency) -> Result<()> {
        if self.dependencies.contains_key(&d.id) {
            return Err(DclError::Signature(format!("dependency `{}` declared twice", d.id)));
        }
        self.check_dependency(&d)?;
        if self.reaches(&d.to, &d.from) {
            return Err(DclError::Signature(format!(
                "dependency `{}` from `{}` to `{}` closes a cycle",
                d.id, d.from, d.to
            )));
        }
        let from = self.symbols[&d.from].arity.clone();
        let to = self.symbols[&d.to].arity.clone();
        let arity_map = d.arity_map.with_dom(to)?.with_cod(from)?;
        self.dependencies.insert(d.id.clone(), Dependency { arity_map, ..d });
        Ok(())
    }

    pub fn remove_dependency(&mut self, id: &str) -> Option<Dependency> {
        self.dependencies.remove(id)
    }

    fn reaches(&self, from: &str, to: &str) -> bool {
        let mut stack = vec![from];
        let mut seen = BTreeSet::new();
        while let Some(s) = stack.pop() {
            if s == to {
                return true;
            }
            if seen.insert(s) {
                stack.extend(self.dependencies_from(s).map(|d| d.to.as_str()));
            }
        }
        false
    }

    /// Whether the dependency graph is acyclic.
    pub fn is_acyclic(&self) -> bool {
        self.dependencies.values().all(|d| !self.reaches(&d.to, &d.from))
    }

    pub fn symbol(&self, name: &str) -> Result<&ConstraintSymbol> {
        self.symbols
            .get(name)
            .ok_or_else(|| DclError::UnknownSymbol(name.to_string()))
    }

    pub fn symbols(&self) -> impl Iterator<Item = &ConstraintSymbol> {
        self.symbols.values()
    }

    pub fn dependency(&self, id: &str) -> Option<&Dependency> {
        self.dependencies.get(id)
    }

    pub fn dependencies(&self) -> impl Iterator<Item = &Dependency> {
        self.dependencies.values()
    }

    pub fn dependencies_from<'a>(&'a self, symbol: &'a str) -> impl Iterator<Item = &'a Dependency> + 'a {
        self.dependencies.values().filter(move |d| d.from == symbol)
    }

    /// Composite of two dependencies `c → c′ → c″`, as an unregistered
    /// dependency with arity map `d2.arity_map ; d1.arity_map`.
    pub fn compose_dependencies(&self, d1: &Dependency, d2: &Dependency) -> Result<Dependency> {
        if d1.to != d2.from {
            return Err(DclError::Signature(format!(
                "dependencies `{}` and `{}` do not compose",
                d1.id, d2.id
            )));
        }
        Ok(Dependency {
            id: format!("{};{}", d1.id, d2.id),
            from: d1.from.clone(),
            to: d2.to.clone(),
            arity_map: compose(&d2.arity_map, &d1.arity_map)?,
        })
    }

    /// Exhaustively checks each dependency on all valid instances within
    /// `bounds`.
    pub fn verify_dependency_soundness(&self, bounds: Bounds) -> Result<Vec<SoundnessReport>> {
        self.dependencies
            .values()
            .map(|d| self.verify_one(d, bounds))
            .collect()
    }

    pub fn verify_one(&self, d: &Dependency, bounds: Bounds) -> Result<SoundnessReport> {
        let from = self.symbol(&d.from)?;
        let to = self.symbol(&d.to)?;
        let mut report = SoundnessReport {
            dependency: d.id.clone(),
            checked: 0,
            valid: 0,
            violations: 0,
            witness: None,
        };
        let mut failure = None;
        for_each_instance(from.arity(), bounds, |t| {
            report.checked += 1;
            let mut step = || -> Result<()> {
                if let Verdict::Valid(_) = from.evaluate(t)? {
                    report.valid += 1;
                    let r = restrict(t, &d.arity_map)?.with_schema(to.arity().clone())?;
                    if !matches!(to.evaluate(&r)?, Verdict::Valid(_)) {
                        report.violations += 1;
                        report.witness.get_or_insert_with(|| t.clone());
                    }
                }
                Ok(())
            };
            match step() {
                Ok(()) => std::ops::ControlFlow::Continue(()),
                Err(e) => {
                    failure = Some(e);
                    std::ops::ControlFlow::Break(())
                }
            }
        })?;
        match failure {
            Some(e) => Err(e),
            None => Ok(report),
        }
    }
}

/// Outcome of checking one dependency exhaustively.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SoundnessReport {
    pub dependency: String,
    /// Instances (up to isomorphism) examined.
    pub checked: usize,
    /// Those valid for the depending symbol.
    pub valid: usize,
    pub violations: usize,
    /// First valid instance whose restriction is not valid.
    pub witness: Option<TypedInstance>,
}

impl SoundnessReport {
    pub fn is_sound(&self) -> bool {
        self.violations == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cycles_rejected() {
        let mut sig = Signature::builtin();
        let id = GraphMorphism::identity(arrow_arity());
        sig.add_dependency(Dependency::new("x", "[1]", "[0..1]", id.clone())).unwrap();
        let err = sig.add_dependency(Dependency::new("y", "[0..1]", "[1]", id)).unwrap_err();
        assert!(matches!(err, DclError::Signature(_)));
        assert!(sig.is_acyclic());
    }

    #[test]
    fn dependency_arity_checked() {
        let mut sig = Signature::builtin();
        let id = GraphMorphism::identity(arrow_arity());
        assert!(sig.add_dependency(Dependency::new("bad", "[jm]", "[1]", id)).is_err());
    }

    #[test]
    fn table_rejects_duplicates() {
        let arity = arrow_arity();
        let e = TypedInstance::empty(arity.clone());
        assert!(Semantics::table(&arity, [("a", e.clone()), ("b", e)]).is_err());
    }

    #[test]
    fn no_dependencies_no_reports() {
        let mut sig = Signature::new();
        sig.add_symbol(ConstraintSymbol::multiplicity("[1]").unwrap()).unwrap();
        let r = sig.verify_dependency_soundness(Bounds { per_sort: 2, parallel: 1 }).unwrap();
        assert!(r.is_empty());
    }

    #[test]
    fn wrong_dependency_reported() {
        let mut sig = Signature::builtin();
        let id = GraphMorphism::identity(arrow_arity());
        sig.add_dependency(Dependency::new("wrong", "[0..1]", "[1..*]", id)).unwrap();
        let r = sig.verify_one(sig.dependency("wrong").unwrap(), Bounds { per_sort: 2, parallel: 2 }).unwrap();
        assert!(!r.is_sound());
        let w = r.witness.unwrap();
        assert!(w.fiber("A").count() >= 1);
        assert!(w.carrier().arrow_count() == 0);
    }

    #[test]
    fn strict_jm_dependencies_sound() {
        let sig = Signature::builtin();
        let b = Bounds { per_sort: 2, parallel: 1 };
        for id in ["d1!", "d2!"] {
            assert!(sig.verify_one(sig.dependency(id).unwrap(), b).unwrap().is_sound());
        }
        assert!(!sig.verify_one(sig.dependency("d1").unwrap(), b).unwrap().is_sound());
    }
}
