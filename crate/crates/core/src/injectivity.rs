//! Injectivity logic: theories of formula morphisms, checkable
//! derivations, bounded proof search and a finite-model entailment oracle.
//!
//! Formulas are slice morphisms over the ambient schema; plain graphs are
//! the slice over the terminal graph.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::sync::Arc;

use crate::canon::{canonicalize_labelled, Labels};
use crate::enumerate::{enumerate_instances, Bounds};
use crate::error::{DclError, Result};
use crate::graph::{Graph, GraphMorphism};
use crate::slice::{slice_coproduct, slice_pushout, SliceMorphism, TypedInstance};

/// Largest size bound accepted by the semantic oracle.
pub const MAX_SEMANTIC_BOUND: usize = 4;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Ambient {
    /// Plain graphs.
    Graphs,
    /// Graphs over a fixed arity graph.
    Slice(Arc<Graph>),
}

impl Ambient {
    pub fn schema(&self) -> Arc<Graph> {
        match self {
            Ambient::Graphs => Arc::new(Graph::terminal()),
            Ambient::Slice(g) => g.clone(),
        }
    }
}

/// A plain graph as an object over the terminal graph.
pub fn over_terminal(g: &Arc<Graph>) -> TypedInstance {
    let terminal = Arc::new(Graph::terminal());
    let (node, arrow) = {
        let (a, arr) = terminal.arrows().next().expect("terminal loop");
        (arr.src.clone(), a.to_string())
    };
    TypedInstance::new(GraphMorphism::new_unchecked(
        g.clone(),
        terminal,
        g.nodes().map(|n| (n.to_string(), node.clone())).collect(),
        g.arrows().map(|(a, _)| (a.to_string(), arrow.clone())).collect(),
    ))
}

/// A plain graph morphism as a formula over the terminal graph.
pub fn plain_formula(f: &GraphMorphism) -> SliceMorphism {
    SliceMorphism::new_unchecked(over_terminal(f.dom()), over_terminal(f.cod()), f.clone())
}

fn rehome(f: &SliceMorphism, schema: &Arc<Graph>) -> Result<SliceMorphism> {
    let from = f.from().with_schema(schema.clone())?;
    let to = f.to().with_schema(schema.clone())?;
    let map = f.map().with_dom(from.carrier().clone())?.with_cod(to.carrier().clone())?;
    SliceMorphism::new(from, to, map)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InjTheory {
    ambient: Ambient,
    schema: Arc<Graph>,
    formulas: BTreeMap<String, SliceMorphism>,
}

impl InjTheory {
    pub fn new<S: Into<String>>(
        ambient: Ambient,
        formulas: impl IntoIterator<Item = (S, SliceMorphism)>,
    ) -> Result<InjTheory> {
        let schema = ambient.schema();
        let mut out = BTreeMap::new();
        for (name, f) in formulas {
            let name = name.into();
            if **f.schema() != *schema {
                return Err(DclError::Mismatch {
                    what: "formula ambient",
                    expected: schema.summary(),
                    found: f.schema().summary(),
                });
            }
            if out.insert(name.clone(), rehome(&f, &schema)?).is_some() {
                return Err(DclError::Derivation(format!("formula name `{name}` repeated")));
            }
        }
        Ok(InjTheory {
            ambient,
            schema,
            formulas: out,
        })
    }

    pub fn ambient(&self) -> &Ambient {
        &self.ambient
    }

    pub fn schema(&self) -> &Arc<Graph> {
        &self.schema
    }

    pub fn formulas(&self) -> &BTreeMap<String, SliceMorphism> {
        &self.formulas
    }

    pub fn formula(&self, name: &str) -> Option<&SliceMorphism> {
        self.formulas.get(name)
    }

    /// Brings a formula into this theory's ambient.
    pub fn admit(&self, f: &SliceMorphism) -> Result<SliceMorphism> {
        if **f.schema() != *self.schema {
            return Err(DclError::Mismatch {
                what: "formula ambient",
                expected: self.schema.summary(),
                found: f.schema().summary(),
            });
        }
        rehome(f, &self.schema)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Rule {
    Axiom { name: String },
    Identity,
    Composition,
    /// From `h = conclusion ; second`, conclude the first factor.
    Cancellation { second: SliceMorphism },
    /// The premise pushed along `along`.
    Pushout { along: SliceMorphism },
    /// Wraps the expanded pushout/pushout/composition script.
    CoproductMacro,
}

impl Rule {
    pub fn name(&self) -> &'static str {
        match self {
            Rule::Axiom { .. } => "axiom",
            Rule::Identity => "identity",
            Rule::Composition => "composition",
            Rule::Cancellation { .. } => "cancellation",
            Rule::Pushout { .. } => "pushout",
            Rule::CoproductMacro => "coproduct",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Derivation {
    pub conclusion: SliceMorphism,
    pub rule: Rule,
    pub premises: Vec<Derivation>,
}

impl Derivation {
    /// Rule names in post-order.
    pub fn script(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        self.walk(&mut out);
        out
    }

    fn walk(&self, out: &mut Vec<&'static str>) {
        for p in &self.premises {
            p.walk(out);
        }
        out.push(self.rule.name());
    }

    pub fn size(&self) -> usize {
        1 + self.premises.iter().map(Derivation::size).sum::<usize>()
    }

    /// Re-checks every node against its recorded side data.
    pub fn verify(&self, theory: &InjTheory) -> Result<()> {
        for p in &self.premises {
            p.verify(theory)?;
        }
        let fail = |msg: String| Err(DclError::Derivation(format!("{} step: {msg}", self.rule.name())));
        let c = &self.conclusion;
        if **c.schema() != **theory.schema() {
            return fail("conclusion outside the ambient".into());
        }
        let arity = match &self.rule {
            Rule::Axiom { .. } | Rule::Identity => 0,
            Rule::Composition => 2,
            _ => 1,
        };
        if self.premises.len() != arity {
            return fail(format!("expected {arity} premises, found {}", self.premises.len()));
        }
        match &self.rule {
            Rule::Axiom { name } => match theory.formula(name) {
                Some(f) if f == c => Ok(()),
                Some(_) => fail(format!("conclusion differs from formula `{name}`")),
                None => fail(format!("no formula `{name}` in the theory")),
            },
            Rule::Identity => {
                if c.from() == c.to() && c.map().is_identity() {
                    Ok(())
                } else {
                    fail("conclusion is not an identity".into())
                }
            }
            Rule::Composition => {
                let (f1, f2) = (&self.premises[0].conclusion, &self.premises[1].conclusion);
                match f1.then(f2) {
                    Ok(h) if &h == c => Ok(()),
                    Ok(_) => fail("conclusion differs from the composite".into()),
                    Err(e) => fail(format!("premises do not compose: {e}")),
                }
            }
            Rule::Cancellation { second } => {
                let h = &self.premises[0].conclusion;
                match c.then(second) {
                    Ok(k) if &k == h => Ok(()),
                    Ok(_) => fail("recorded factorization does not recompose the premise".into()),
                    Err(e) => fail(format!("recorded factorization does not compose: {e}")),
                }
            }
            Rule::Pushout { along } => {
                let f = &self.premises[0].conclusion;
                if along.from() != f.from() {
                    return fail("pushout leg does not share the premise's domain".into());
                }
                let po = slice_pushout(f, along)?;
                if &po.from_right == c {
                    Ok(())
                } else {
                    fail("conclusion differs from the recomputed pushout".into())
                }
            }
            Rule::CoproductMacro => {
                let inner = &self.premises[0];
                let shape = inner.rule == Rule::Composition
                    && inner.premises.iter().all(|p| matches!(p.rule, Rule::Pushout { .. }));
                if !shape {
                    fail("expansion is not pushout, pushout, composition".into())
                } else if &inner.conclusion != c {
                    fail("conclusion differs from the expansion".into())
                } else {
                    Ok(())
                }
            }
        }
    }
}

/// One rule application.
#[derive(Debug, Clone)]
pub enum Step {
    Axiom(String),
    Identity(TypedInstance),
    Composition(Derivation, Derivation),
    /// A derived composite with a factorization `first ; second` of it.
    Cancellation {
        composite: Derivation,
        first: SliceMorphism,
        second: SliceMorphism,
    },
    Pushout(Derivation, SliceMorphism),
}

/// Applies one rule, checking its side conditions.
pub fn derive_step(theory: &InjTheory, step: Step) -> Result<Derivation> {
    let d = match step {
        Step::Axiom(name) => {
            let f = theory
                .formula(&name)
                .ok_or_else(|| DclError::Derivation(format!("no formula `{name}` in the theory")))?;
            Derivation {
                conclusion: f.clone(),
                rule: Rule::Axiom { name },
                premises: vec![],
            }
        }
        Step::Identity(x) => {
            let x = x.with_schema(theory.schema().clone())?;
            Derivation {
                conclusion: SliceMorphism::identity(&x),
                rule: Rule::Identity,
                premises: vec![],
            }
        }
        Step::Composition(d1, d2) => {
            if d1.conclusion.to() != d2.conclusion.from() {
                return Err(DclError::Derivation(
                    "composition step: codomain of the first formula is not the domain of the second".into(),
                ));
            }
            Derivation {
                conclusion: d1.conclusion.then(&d2.conclusion)?,
                rule: Rule::Composition,
                premises: vec![d1, d2],
            }
        }
        Step::Cancellation { composite, first, second } => {
            let first = theory.admit(&first)?;
            let second = theory.admit(&second)?;
            Derivation {
                conclusion: first,
                rule: Rule::Cancellation { second },
                premises: vec![composite],
            }
        }
        Step::Pushout(d, along) => {
            let along = theory.admit(&along)?;
            if along.from() != d.conclusion.from() {
                return Err(DclError::Derivation(
                    "pushout step: the leg does not start at the formula's domain".into(),
                ));
            }
            let po = slice_pushout(&d.conclusion, &along)?;
            Derivation {
                conclusion: po.from_right,
                rule: Rule::Pushout { along },
                premises: vec![d],
            }
        }
    };
    d.verify(theory)?;
    Ok(d)
}

/// `f1 + f2` by pushing `f1` along the first coprojection, pushing `f2`
/// along the second coprojection followed by `f1 + P2`, and composing.
pub fn coproduct_macro(theory: &InjTheory, d1: Derivation, d2: Derivation) -> Result<Derivation> {
    let cp = slice_coproduct(d1.conclusion.from(), d2.conclusion.from())?;
    let first = derive_step(theory, Step::Pushout(d1, cp.from_left))?;
    let leg = cp.from_right.then(&first.conclusion)?;
    let second = derive_step(theory, Step::Pushout(d2, leg))?;
    let expansion = derive_step(theory, Step::Composition(first, second))?;
    let d = Derivation {
        conclusion: expansion.conclusion.clone(),
        rule: Rule::CoproductMacro,
        premises: vec![expansion],
    };
    d.verify(theory)?;
    Ok(d)
}

/// The coproduct morphism `f1 + f2: P1 + P2 → Q1 + Q2`, computed directly.
pub fn coproduct_formula(f1: &SliceMorphism, f2: &SliceMorphism) -> Result<SliceMorphism> {
    let p = slice_coproduct(f1.from(), f2.from())?;
    let q = slice_coproduct(f1.to(), f2.to())?;
    let mut nodes = BTreeMap::new();
    let mut arrows = BTreeMap::new();
    for (f, pin, qin) in [
        (f1, &p.from_left, &q.from_left),
        (f2, &p.from_right, &q.from_right),
    ] {
        for (x, y) in f.map().node_map() {
            nodes.insert(pin.map().node(x).to_string(), qin.map().node(y).to_string());
        }
        for (x, y) in f.map().arrow_map() {
            arrows.insert(pin.map().arrow(x).to_string(), qin.map().arrow(y).to_string());
        }
    }
    let map = GraphMorphism::new(p.apex.carrier().clone(), q.apex.carrier().clone(), nodes, arrows)?;
    SliceMorphism::new(p.apex, q.apex, map)
}

/// A string equal for two formulas exactly when they are isomorphic as
/// objects of the arrow category over the ambient.
pub fn formula_key(f: &SliceMorphism) -> Result<String> {
    let schema = f.schema();
    let rank: HashMap<&str, u32> = schema
        .nodes()
        .chain(schema.arrows().map(|(a, _)| a))
        .enumerate()
        .map(|(i, x)| (x, i as u32))
        .collect();
    let mut labels: HashMap<String, u32> = HashMap::new();
    let mut b = Graph::builder();
    let mut arrow_labels: HashMap<String, u32> = HashMap::new();
    for (side, t, base) in [("p", f.from(), 0u32), ("q", f.to(), 2u32)] {
        for (x, ty) in t.typing().node_map() {
            let id = format!("{side}.{x}");
            labels.insert(id.clone(), 4 * rank[ty.as_str()] + base);
            b = b.node(id);
        }
        for (a, arrow) in t.carrier().arrows() {
            let id = format!("{side}a.{a}");
            labels.insert(id.clone(), 4 * rank[t.typing().arrow(a)] + base + 1);
            b = b.node(id.clone());
            for (end, tag, label) in [(&arrow.src, "s", 0), (&arrow.tgt, "t", 1)] {
                let e = format!("{tag}.{side}.{a}");
                arrow_labels.insert(e.clone(), label);
                b = b.arrow(e, id.clone(), format!("{side}.{end}"));
            }
        }
    }
    for (x, y) in f.map().node_map() {
        let e = format!("m.{x}");
        arrow_labels.insert(e.clone(), 2);
        b = b.arrow(e, format!("p.{x}"), format!("q.{y}"));
    }
    for (x, y) in f.map().arrow_map() {
        let e = format!("ma.{x}");
        arrow_labels.insert(e.clone(), 2);
        b = b.arrow(e, format!("pa.{x}"), format!("qa.{y}"));
    }
    let g = Arc::new(b.build()?);
    let l = Labels {
        node: g.nodes().map(|n| labels[n]).collect(),
        arrow: g.arrows().map(|(a, _)| arrow_labels[a]).collect(),
    };
    let form = canonicalize_labelled(&g, &l)?.form;
    let mut node_label: BTreeMap<&str, u32> = BTreeMap::new();
    for (orig, canon) in form.relabeling.node_map() {
        node_label.insert(canon.as_str(), labels[orig]);
    }
    let mut arrow_label: BTreeMap<&str, u32> = BTreeMap::new();
    for (orig, canon) in form.relabeling.arrow_map() {
        arrow_label.insert(canon.as_str(), arrow_labels[orig]);
    }
    let mut key = String::new();
    for (n, l) in &node_label {
        key.push_str(&format!("{n}={l};"));
    }
    for (a, arrow) in form.graph.arrows() {
        key.push_str(&format!("{a}:{}>{}={};", arrow.src, arrow.tgt, arrow_label[a]));
    }
    Ok(key)
}

/// `t ⊨ f`: every map from the domain of `f` into `t` factors through `f`.
pub fn injective(t: &TypedInstance, f: &SliceMorphism) -> Result<bool> {
    let tests = SliceMorphism::search(f.from(), t)?;
    let through = SliceMorphism::search(f.to(), t)?;
    let mut ok = true;
    let mut failure = None;
    tests.for_each(|x| match through.clone().extending(f.map(), x).exists() {
        Ok(true) => std::ops::ControlFlow::Continue(()),
        Ok(false) => {
            ok = false;
            std::ops::ControlFlow::Break(())
        }
        Err(e) => {
            failure = Some(e);
            std::ops::ControlFlow::Break(())
        }
    })?;
    match failure {
        Some(e) => Err(e),
        None => Ok(ok),
    }
}

/// Finite-model entailment with the models of the theory cached per bound.
pub struct SemanticOracle<'t> {
    theory: &'t InjTheory,
    models: BTreeMap<usize, Vec<TypedInstance>>,
}

impl<'t> SemanticOracle<'t> {
    pub fn new(theory: &'t InjTheory) -> Self {
        SemanticOracle {
            theory,
            models: BTreeMap::new(),
        }
    }

    /// Objects up to isomorphism with at most `bound` elements per ambient
    /// node and at most one link per ordered pair, injective for every
    /// formula of the theory.
    pub fn models(&mut self, bound: usize) -> Result<&[TypedInstance]> {
        if bound > MAX_SEMANTIC_BOUND {
            return Err(DclError::SizeGuard(format!(
                "semantic bound {bound} exceeds {MAX_SEMANTIC_BOUND}"
            )));
        }
        if !self.models.contains_key(&bound) {
            let schema = self.theory.schema();
            let all = enumerate_instances(schema, Bounds { per_sort: bound, parallel: 1 })?;
            let mut kept = Vec::new();
            for a in all {
                let mut model = true;
                for f in self.theory.formulas().values() {
                    if !injective(&a, f)? {
                        model = false;
                        break;
                    }
                }
                if model {
                    kept.push(a);
                }
            }
            self.models.insert(bound, kept);
        }
        Ok(&self.models[&bound])
    }

    /// Every model of the theory within the bound is `f`-injective.
    pub fn entails(&mut self, f: &SliceMorphism, bound: usize) -> Result<bool> {
        let f = self.theory.admit(f)?;
        for a in self.models(bound)? {
            if !injective(a, &f)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// `F ⊨ f` relative to the size bound.
pub fn semantic_entails(theory: &InjTheory, f: &SliceMorphism, bound: usize) -> Result<bool> {
    SemanticOracle::new(theory).entails(f, bound)
}

/// Resource limits for proof search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchCaps {
    /// Rounds of rule application.
    pub depth: usize,
    /// Largest object (nodes plus arrows) materialized or concluded about.
    pub max_object_size: usize,
    /// Morphisms tried per (formula, object) pair.
    pub hom_limit: usize,
    /// Derived formulas kept, axioms included.
    pub max_formulas: usize,
}

impl Default for SearchCaps {
    fn default() -> Self {
        SearchCaps {
            depth: 4,
            max_object_size: 8,
            hom_limit: 4,
            max_formulas: 48,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Derived {
    /// Round in which the formula was first concluded.
    pub depth: usize,
    pub derivation: Derivation,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Inference {
    /// Pairwise non-isomorphic conclusions in discovery order.
    pub derived: Vec<Derived>,
    /// Some conclusion was dropped by a cap.
    pub truncated: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Entailment {
    Derivable(Derivation),
    Unknown(String),
}

impl fmt::Display for Entailment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Entailment::Derivable(d) => write!(f, "derivable ({})", d.script().join(", ")),
            Entailment::Unknown(why) => write!(f, "unknown ({why})"),
        }
    }
}

struct Engine<'t> {
    theory: &'t InjTheory,
    caps: SearchCaps,
    formulas: Vec<Derived>,
    keys: HashSet<String>,
    objects: Vec<TypedInstance>,
    goal: Option<String>,
    done: HashSet<(u8, usize, usize)>,
    truncated: bool,
}

enum Admit {
    Kept,
    Skipped,
    Goal(Derivation),
}

impl<'t> Engine<'t> {
    fn new(theory: &'t InjTheory, caps: SearchCaps, goal: Option<&SliceMorphism>) -> Result<Self> {
        let mut e = Engine {
            theory,
            caps,
            formulas: Vec::new(),
            keys: HashSet::new(),
            objects: Vec::new(),
            goal: None,
            done: HashSet::new(),
            truncated: false,
        };
        if let Some(g) = goal {
            e.goal = Some(formula_key(g)?);
            e.materialize(g.from());
            e.materialize(g.to());
        }
        Ok(e)
    }

    fn materialize(&mut self, x: &TypedInstance) {
        if x.element_count() <= self.caps.max_object_size && !self.objects.contains(x) {
            self.objects.push(x.clone());
        }
    }

    fn admit(&mut self, d: Derivation, depth: usize) -> Result<Admit> {
        let c = &d.conclusion;
        if c.from().element_count() > self.caps.max_object_size || c.to().element_count() > self.caps.max_object_size {
            self.truncated = true;
            return Ok(Admit::Skipped);
        }
        let key = match formula_key(c) {
            Ok(k) => k,
            Err(DclError::SizeGuard(_)) | Err(DclError::SearchExhausted(_)) => {
                self.truncated = true;
                return Ok(Admit::Skipped);
            }
            Err(e) => return Err(e),
        };
        if self.goal.as_ref() == Some(&key) {
            return Ok(Admit::Goal(d));
        }
        if depth > 0 && c.is_isomorphism() {
            return Ok(Admit::Skipped);
        }
        if !self.keys.insert(key) {
            return Ok(Admit::Skipped);
        }
        if self.formulas.len() >= self.caps.max_formulas {
            self.truncated = true;
            return Ok(Admit::Skipped);
        }
        let (from, to) = (c.from().clone(), c.to().clone());
        self.formulas.push(Derived { depth, derivation: d });
        self.materialize(&from);
        self.materialize(&to);
        Ok(Admit::Kept)
    }

    fn fresh(&mut self, rule: u8, i: usize, j: usize) -> bool {
        self.done.insert((rule, i, j))
    }

    fn candidates(&mut self) -> Result<Vec<Derivation>> {
        let theory = self.theory;
        let (nf, no) = (self.formulas.len(), self.objects.len());
        let legs: Vec<&SliceMorphism> = theory.formulas().values().collect();
        let mut out = Vec::new();
        for i in 0..nf {
            for (k, g) in legs.iter().enumerate() {
                if self.fresh(0, i, k) && g.from() == self.formulas[i].derivation.conclusion.from() {
                    out.push(derive_step(
                        theory,
                        Step::Pushout(self.formulas[i].derivation.clone(), (*g).clone()),
                    )?);
                }
            }
        }
        for i in 0..nf {
            for o in 0..no {
                if !self.fresh(1, i, o) {
                    continue;
                }
                let d = &self.formulas[i].derivation;
                let target = &self.objects[o];
                let homs = SliceMorphism::search(d.conclusion.from(), target)?.collect(self.caps.hom_limit)?;
                for h in homs.morphisms {
                    let along = SliceMorphism::new_unchecked(d.conclusion.from().clone(), target.clone(), h);
                    out.push(derive_step(theory, Step::Pushout(d.clone(), along))?);
                }
            }
        }
        for i in 0..nf {
            for o in 0..no {
                if !self.fresh(2, i, o) {
                    continue;
                }
                let d = &self.formulas[i].derivation;
                let h = &d.conclusion;
                let middle = &self.objects[o];
                let firsts = SliceMorphism::search(h.from(), middle)?.collect(self.caps.hom_limit)?;
                for f1 in firsts.morphisms {
                    let second = SliceMorphism::search(middle, h.to())?
                        .extending(&f1, h.map())
                        .first()?;
                    if let Some(f2) = second {
                        let first = SliceMorphism::new_unchecked(h.from().clone(), middle.clone(), f1);
                        let second = SliceMorphism::new_unchecked(middle.clone(), h.to().clone(), f2);
                        out.push(derive_step(
                            theory,
                            Step::Cancellation {
                                composite: d.clone(),
                                first,
                                second,
                            },
                        )?);
                    }
                }
            }
        }
        for i in 0..nf {
            for j in 0..nf {
                if !self.fresh(3, i, j) {
                    continue;
                }
                let (a, b) = (&self.formulas[i].derivation, &self.formulas[j].derivation);
                if a.conclusion.to() == b.conclusion.from() {
                    out.push(derive_step(theory, Step::Composition(a.clone(), b.clone()))?);
                }
            }
        }
        Ok(out)
    }

    fn run(&mut self) -> Result<Option<Derivation>> {
        for name in self.theory.formulas().keys() {
            let d = derive_step(self.theory, Step::Axiom(name.clone()))?;
            if let Admit::Goal(d) = self.admit(d, 0)? {
                return Ok(Some(d));
            }
        }
        if let Some(key) = &self.goal {
            for o in self.objects.clone() {
                let id = derive_step(self.theory, Step::Identity(o))?;
                if &formula_key(&id.conclusion)? == key {
                    return Ok(Some(id));
                }
            }
        }
        for depth in 1..=self.caps.depth {
            let before = self.formulas.len();
            for d in self.candidates()? {
                if let Admit::Goal(d) = self.admit(d, depth)? {
                    return Ok(Some(d));
                }
            }
            if self.formulas.len() == before && !self.truncated && depth > 1 {
                break;
            }
        }
        Ok(None)
    }
}

/// Saturates the theory under the rules for `caps.depth` rounds.
pub fn infer(theory: &InjTheory, caps: SearchCaps) -> Result<Inference> {
    let mut e = Engine::new(theory, caps, None)?;
    e.run()?;
    Ok(Inference {
        derived: e.formulas,
        truncated: e.truncated,
    })
}

/// Breadth-first proof search for `goal` up to isomorphism of formulas.
/// Never refutes: failure within the caps is `Unknown`.
pub fn bounded_entailment(theory: &InjTheory, goal: &SliceMorphism, caps: SearchCaps) -> Result<Entailment> {
    let goal = theory.admit(goal)?;
    let mut e = Engine::new(theory, caps, Some(&goal))?;
    match e.run()? {
        Some(d) => Ok(Entailment::Derivable(d)),
        None => Ok(Entailment::Unknown(format!(
            "not found within depth {} ({} formulas{})",
            caps.depth,
            e.formulas.len(),
            if e.truncated { ", caps reached" } else { "" }
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{fig2a, fig2b};
    use crate::signature::arrow_arity;

    fn t1() -> InjTheory {
        InjTheory::new(Ambient::Slice(arrow_arity()), [("e", fig2a()), ("u", fig2b())]).unwrap()
    }

    #[test]
    fn key_is_invariant_under_renaming() {
        let f = fig2b();
        let schema = arrow_arity();
        let p = TypedInstance::build(
            schema.clone(),
            &[("z", "A"), ("y1", "B"), ("y2", "B")],
            &[("k1", "z", "y2", "r"), ("k2", "z", "y1", "r")],
        )
        .unwrap();
        let q = TypedInstance::build(schema, &[("z", "A"), ("y", "B")], &[("j1", "z", "y", "r"), ("j2", "z", "y", "r")])
            .unwrap();
        let m = GraphMorphism::from_pairs(
            p.carrier().clone(),
            q.carrier().clone(),
            &[("z", "z"), ("y1", "y"), ("y2", "y")],
            &[("k1", "j2"), ("k2", "j1")],
        )
        .unwrap();
        let g = SliceMorphism::new(p, q, m).unwrap();
        assert_eq!(formula_key(&f).unwrap(), formula_key(&g).unwrap());
        assert_ne!(formula_key(&f).unwrap(), formula_key(&fig2a()).unwrap());
    }

    #[test]
    fn members_and_identities_are_entailed() {
        let t = t1();
        let mut o = SemanticOracle::new(&t);
        for b in 1..=3 {
            assert!(o.entails(&fig2a(), b).unwrap());
            assert!(o.entails(&SliceMorphism::identity(fig2b().to()), b).unwrap());
        }
        assert!(o.models(MAX_SEMANTIC_BOUND + 1).is_err());
    }

    #[test]
    fn non_consequence_is_rejected() {
        let only_e = InjTheory::new(Ambient::Slice(arrow_arity()), [("e", fig2a())]).unwrap();
        assert!(!semantic_entails(&only_e, &fig2b(), 2).unwrap());
    }

    #[test]
    fn macro_matches_direct_coproduct() {
        let t = t1();
        let d1 = derive_step(&t, Step::Axiom("e".into())).unwrap();
        let d2 = derive_step(&t, Step::Axiom("u".into())).unwrap();
        let m = coproduct_macro(&t, d1, d2).unwrap();
        assert_eq!(m.premises[0].script(), ["axiom", "pushout", "axiom", "pushout", "composition"]);
        let direct = coproduct_formula(&fig2a(), &fig2b()).unwrap();
        assert_eq!(formula_key(&m.conclusion).unwrap(), formula_key(&direct).unwrap());
        m.verify(&t).unwrap();
    }

    #[test]
    fn bad_side_data_fails_verification() {
        let t = t1();
        let mut d = derive_step(&t, Step::Axiom("e".into())).unwrap();
        d.rule = Rule::Axiom { name: "u".into() };
        assert!(d.verify(&t).is_err());
        let d1 = derive_step(&t, Step::Axiom("e".into())).unwrap();
        let d2 = derive_step(&t, Step::Axiom("u".into())).unwrap();
        assert!(derive_step(&t, Step::Composition(d1, d2)).is_err());
    }

    #[test]
    fn composite_of_members_found_at_depth_one() {
        let schema = Arc::new(Graph::terminal());
        let x = Arc::new(Graph::new(["x"], Vec::<(&str, &str, &str)>::new()).unwrap());
        let xy = Arc::new(Graph::new(["x", "y"], [("e", "x", "y")]).unwrap());
        let xyz = Arc::new(Graph::new(["x", "y", "z"], [("e", "x", "y"), ("k", "y", "z")]).unwrap());
        let f1 = GraphMorphism::from_pairs(x, xy.clone(), &[("x", "x")], &[]).unwrap();
        let f2 = GraphMorphism::from_pairs(xy, xyz, &[("x", "x"), ("y", "y")], &[("e", "e")]).unwrap();
        let t = InjTheory::new(Ambient::Graphs, [("f1", plain_formula(&f1)), ("f2", plain_formula(&f2))]).unwrap();
        assert_eq!(**t.schema(), *schema);
        let goal = plain_formula(&f1.then(&f2).unwrap());
        let Entailment::Derivable(d) = bounded_entailment(&t, &goal, SearchCaps::default()).unwrap() else {
            panic!("composite not found");
        };
        assert_eq!(d.script(), ["axiom", "axiom", "composition"]);
        d.verify(&t).unwrap();
        assert!(semantic_entails(&t, &goal, 3).unwrap());
    }
}
