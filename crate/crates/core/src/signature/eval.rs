use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use crate::error::{DclError, Result};
use crate::graph::{compose, GraphMorphism};
use crate::hom::HomSearch;
use crate::slice::{canonicalize_instance, SliceMorphism, TypedInstance};

use super::{square_paths, ConstraintSymbol, Semantics};

/// A testing map and the map it factors through, both flattened to
/// element tables.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Factorization {
    pub given: BTreeMap<String, String>,
    pub through: BTreeMap<String, String>,
}

/// Semantics-specific justification of a valid verdict. Element ids refer
/// to the canonical restricted instance.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Witness {
    None,
    /// Distinct targets per source element.
    Counts(BTreeMap<String, u64>),
    /// Attribute value sets per class element; pairwise distinct.
    Keys(BTreeMap<String, Vec<Vec<String>>>),
    /// Each included link or path to a covering one.
    Inclusion(BTreeMap<String, String>),
    Factorizations(Vec<Factorization>),
    TableEntry(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Evidence {
    /// Canonical form of the evaluated instance.
    pub restricted: TypedInstance,
    pub witness: Witness,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Counterexample {
    /// Canonical form of the evaluated instance.
    pub restricted: TypedInstance,
    /// Offending elements, canonical ids.
    pub offending: Vec<String>,
    /// The same elements in the ids of the evaluated instance, sorted.
    pub located: Vec<String>,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Verdict {
    Valid(Evidence),
    Invalid(Counterexample),
    /// A search or size limit was hit; never read as valid.
    Unknown(String),
}

impl Verdict {
    pub fn is_valid(&self) -> bool {
        matches!(self, Verdict::Valid(_))
    }

    pub fn is_invalid(&self) -> bool {
        matches!(self, Verdict::Invalid(_))
    }

    pub fn is_unknown(&self) -> bool {
        matches!(self, Verdict::Unknown(_))
    }

    pub fn status(&self) -> &'static str {
        match self {
            Verdict::Valid(_) => "valid",
            Verdict::Invalid(_) => "invalid",
            Verdict::Unknown(_) => "unknown",
        }
    }

    pub fn evidence(&self) -> Option<&Evidence> {
        match self {
            Verdict::Valid(e) => Some(e),
            _ => None,
        }
    }

    pub fn counterexample(&self) -> Option<&Counterexample> {
        match self {
            Verdict::Invalid(c) => Some(c),
            _ => None,
        }
    }
}

pub(crate) enum Decision {
    Holds(Witness),
    Fails { offending: Vec<String>, reason: String },
}

fn fails(offending: impl IntoIterator<Item = impl Into<String>>, reason: impl Into<String>) -> Result<Decision> {
    let mut offending: Vec<String> = offending.into_iter().map(Into::into).collect();
    offending.sort();
    offending.dedup();
    Ok(Decision::Fails {
        offending,
        reason: reason.into(),
    })
}

fn unknown_on_limits(e: DclError) -> Result<Verdict> {
    match e {
        DclError::SearchExhausted(m) | DclError::SizeGuard(m) => Ok(Verdict::Unknown(m)),
        e => Err(e),
    }
}

/// Canonicalizes `t`, decides on the canonical form and packages a verdict.
pub(crate) fn finish(t: &TypedInstance, decide: impl FnOnce(&TypedInstance) -> Result<Decision>) -> Result<Verdict> {
    let canon = match canonicalize_instance(t) {
        Ok(c) => c,
        Err(e) => return unknown_on_limits(e),
    };
    let c = canon.instance;
    match decide(&c) {
        Ok(Decision::Holds(witness)) => Ok(Verdict::Valid(Evidence { restricted: c, witness })),
        Ok(Decision::Fails { offending, reason }) => {
            let wanted: BTreeSet<&str> = offending.iter().map(String::as_str).collect();
            let located = canon
                .relabeling
                .node_map()
                .iter()
                .chain(canon.relabeling.arrow_map())
                .filter(|(_, y)| wanted.contains(y.as_str()))
                .map(|(x, _)| x.clone())
                .collect();
            Ok(Verdict::Invalid(Counterexample {
                restricted: c,
                offending,
                located,
                reason,
            }))
        }
        Err(e) => unknown_on_limits(e),
    }
}

pub(crate) fn evaluate(sym: &ConstraintSymbol, t: &TypedInstance) -> Result<Verdict> {
    if **t.schema() != **sym.arity() {
        return Err(DclError::Mismatch {
            what: "instance is not typed over the arity of the symbol",
            expected: sym.arity().summary(),
            found: t.schema().summary(),
        });
    }
    if Arc::ptr_eq(t.schema(), sym.arity()) {
        return finish(t, |c| decide(sym, c));
    }
    let t = t.with_schema(sym.arity().clone())?;
    finish(&t, |c| decide(sym, c))
}

type Links<'a> = Vec<(&'a str, &'a str, &'a str)>;

fn links<'a>(t: &'a TypedInstance, arrow: &'a str) -> Links<'a> {
    t.arrow_fiber(arrow)
        .map(|e| {
            let a = t.carrier().arrow(e).expect("carrier arrow");
            (e, a.src.as_str(), a.tgt.as_str())
        })
        .collect()
}

fn targets<'a>(ls: &Links<'a>) -> BTreeMap<&'a str, BTreeSet<&'a str>> {
    let mut out: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    for &(_, s, t) in ls {
        out.entry(s).or_default().insert(t);
    }
    out
}

/// Composite relation of two link families, with the least path per pair.
fn composite<'a>(first: &Links<'a>, second: &Links<'a>) -> BTreeMap<(&'a str, &'a str), String> {
    let mut out: BTreeMap<(&str, &str), String> = BTreeMap::new();
    for &(l1, x, y) in first {
        for &(l2, y2, z) in second {
            if y == y2 {
                let path = format!("{l1};{l2}");
                out.entry((x, z))
                    .and_modify(|p| {
                        if path < *p {
                            *p = path.clone()
                        }
                    })
                    .or_insert(path);
            }
        }
    }
    out
}

fn included<'a>(
    small: &BTreeMap<(&'a str, &'a str), String>,
    big: &BTreeMap<(&'a str, &'a str), String>,
    prefix: &str,
    into: &mut BTreeMap<String, String>,
) -> Option<(&'a str, &'a str)> {
    for (pair, path) in small {
        match big.get(pair) {
            Some(cover) => {
                into.insert(format!("{prefix}{path}"), cover.clone());
            }
            None => return Some(*pair),
        }
    }
    None
}

fn decide(sym: &ConstraintSymbol, c: &TypedInstance) -> Result<Decision> {
    let arity = sym.arity();
    let arrows: Vec<&str> = arity.arrows().map(|(a, _)| a).collect();
    match sym.semantics() {
        Semantics::Multiplicity(m) => {
            let (r, arrow) = arity.arrows().next().expect("single arrow");
            let ts = targets(&links(c, r));
            let mut counts = BTreeMap::new();
            let mut bad = Vec::new();
            for x in c.fiber(&arrow.src) {
                let n = ts.get(x).map_or(0, |s| s.len()) as u64;
                if !m.admits(n) {
                    bad.push(x);
                }
                counts.insert(x.to_string(), n);
            }
            if bad.is_empty() {
                Ok(Decision::Holds(Witness::Counts(counts)))
            } else {
                fails(bad, format!("link counts outside {m}"))
            }
        }
        Semantics::Key => {
            let class = &arity.arrow(arrows[0]).expect("arrow").src;
            let per_attr: Vec<_> = arrows.iter().map(|a| targets(&links(c, a))).collect();
            let mut keys = BTreeMap::new();
            let mut by_key: BTreeMap<Vec<Vec<String>>, Vec<&str>> = BTreeMap::new();
            for x in c.fiber(class) {
                let key: Vec<Vec<String>> = per_attr
                    .iter()
                    .map(|ts| ts.get(x).into_iter().flatten().map(|s| s.to_string()).collect())
                    .collect();
                by_key.entry(key.clone()).or_default().push(x);
                keys.insert(x.to_string(), key);
            }
            let clash: Vec<&str> = by_key.values().filter(|xs| xs.len() > 1).flatten().copied().collect();
            if clash.is_empty() {
                Ok(Decision::Holds(Witness::Keys(keys)))
            } else {
                fails(clash, "distinct elements share their key")
            }
        }
        Semantics::Subset => {
            let big = links(c, arrows[1]);
            let mut cover = BTreeMap::new();
            for (l, s, t) in links(c, arrows[0]) {
                match big.iter().find(|&&(_, s2, t2)| s2 == s && t2 == t) {
                    Some(&(m, _, _)) => {
                        cover.insert(l.to_string(), m.to_string());
                    }
                    None => return fails([l, s, t], format!("`{}` link without a parallel `{}` link", arrows[0], arrows[1])),
                }
            }
            Ok(Decision::Holds(Witness::Inclusion(cover)))
        }
        Semantics::CompositeSubset4 | Semantics::Commutativity => {
            let [p1, p2, q1, q2] = square_paths(arity).expect("checked at construction");
            let p = composite(&links(c, p1), &links(c, p2));
            let q = composite(&links(c, q1), &links(c, q2));
            let mut cover = BTreeMap::new();
            let commut = matches!(sym.semantics(), Semantics::Commutativity);
            let prefix = if commut { "p:" } else { "" };
            if let Some((x, z)) = included(&p, &q, prefix, &mut cover) {
                return fails([x, z], format!("{p1};{p2} reaches a target {q1};{q2} does not"));
            }
            if commut {
                if let Some((x, z)) = included(&q, &p, "q:", &mut cover) {
                    return fails([x, z], format!("{q1};{q2} reaches a target {p1};{p2} does not"));
                }
            }
            Ok(Decision::Holds(Witness::Inclusion(cover)))
        }
        Semantics::JointlyMonic { strict } => {
            let span = &arity.arrow(arrows[0]).expect("arrow").src;
            let f = targets(&links(c, arrows[0]));
            let g = targets(&links(c, arrows[1]));
            let empty = BTreeSet::new();
            let elems: Vec<&str> = c.fiber(span).collect();
            if *strict {
                for &x in &elems {
                    if f.get(x).unwrap_or(&empty).len() != 1 || g.get(x).unwrap_or(&empty).len() != 1 {
                        return fails([x], "span leg is not single valued");
                    }
                }
            }
            for (i, &x) in elems.iter().enumerate() {
                for &y in &elems[i + 1..] {
                    let fx = f.get(x).unwrap_or(&empty);
                    let gx = g.get(x).unwrap_or(&empty);
                    let fy = f.get(y).unwrap_or(&empty);
                    let gy = g.get(y).unwrap_or(&empty);
                    if !fx.is_disjoint(fy) && !gx.is_disjoint(gy) {
                        return fails([x, y], "distinct span elements share both feet");
                    }
                }
            }
            Ok(Decision::Holds(Witness::None))
        }
        Semantics::Regular(formula) => injectivity(c, formula),
        Semantics::Lifting { m, n } => lifting(c, m, n),
        Semantics::Table(entries) => match entries.iter().find(|(_, e)| *e == c) {
            Some((id, _)) => Ok(Decision::Holds(Witness::TableEntry(id.clone()))),
            None => fails(Vec::<String>::new(), "instance matches no table entry"),
        },
    }
}

fn flatten(m: &GraphMorphism) -> BTreeMap<String, String> {
    m.node_map()
        .iter()
        .chain(m.arrow_map())
        .map(|(a, b)| (a.clone(), b.clone()))
        .collect()
}

fn search_all(
    search: &HomSearch,
    mut each: impl FnMut(&GraphMorphism) -> Result<Option<Decision>>,
) -> Result<Option<Decision>> {
    let mut out = None;
    let mut failure = None;
    search.for_each(|x| match each(x) {
        Ok(None) => std::ops::ControlFlow::Continue(()),
        Ok(Some(d)) => {
            out = Some(d);
            std::ops::ControlFlow::Break(())
        }
        Err(e) => {
            failure = Some(e);
            std::ops::ControlFlow::Break(())
        }
    })?;
    match failure {
        Some(e) => Err(e),
        None => Ok(out),
    }
}

fn injectivity(t: &TypedInstance, f: &SliceMorphism) -> Result<Decision> {
    let tests = SliceMorphism::search(f.from(), &t.with_schema(f.schema().clone())?)?;
    let through = SliceMorphism::search(f.to(), &t.with_schema(f.schema().clone())?)?;
    let mut table = Vec::new();
    let failed = search_all(&tests, |x| {
        match through.clone().extending(f.map(), x).first()? {
            Some(y) => {
                table.push(Factorization {
                    given: flatten(x),
                    through: flatten(&y),
                });
                Ok(None)
            }
            None => Ok(Some(fails(x.node_map().values().chain(x.arrow_map().values()), "testing map does not factor through the formula")?)),
        }
    })?;
    Ok(failed.unwrap_or(Decision::Holds(Witness::Factorizations(table))))
}

fn lifting(t: &TypedInstance, m: &GraphMorphism, n: &GraphMorphism) -> Result<Decision> {
    let mn = compose(m, n)?;
    let typing = t.typing();
    let tests = HomSearch::new(m.dom().clone(), t.carrier().clone()).over(&mn, typing);
    let lifts = HomSearch::new(n.dom().clone(), t.carrier().clone()).over(n, typing);
    let mut table = Vec::new();
    let failed = search_all(&tests, |x| match lifts.clone().extending(m, x).first()? {
        Some(l) => {
            table.push(Factorization {
                given: flatten(x),
                through: flatten(&l),
            });
            Ok(None)
        }
        None => Ok(Some(fails(
            x.node_map().values().chain(x.arrow_map().values()),
            "commuting square without a lift",
        )?)),
    })?;
    Ok(failed.unwrap_or(Decision::Holds(Witness::Factorizations(table))))
}

/// `t ⊨ f` in the injectivity sense: every slice map from the domain of
/// `f` into `t` factors through `f`.
pub fn check_injectivity(t: &TypedInstance, formula: &SliceMorphism) -> Result<Verdict> {
    if **t.schema() != **formula.schema() {
        return Err(DclError::Mismatch {
            what: "formula and instance schemas",
            expected: formula.schema().summary(),
            found: t.schema().summary(),
        });
    }
    finish(t, |c| injectivity(c, formula))
}

/// Lifting property of `t` against `m: W → R` over `n: R → schema`.
pub fn check_lifting(t: &TypedInstance, m: &GraphMorphism, n: &GraphMorphism) -> Result<Verdict> {
    if **n.cod() != **t.schema() || **m.cod() != **n.dom() {
        return Err(DclError::Mismatch {
            what: "lifting pair and instance",
            expected: t.schema().summary(),
            found: n.cod().summary(),
        });
    }
    let n = n.with_cod(t.schema().clone())?;
    finish(t, |c| lifting(c, m, &n))
}

/// `(m, n) = (f, typing of the codomain of f)`.
pub fn regular_to_lifting(formula: &SliceMorphism) -> (GraphMorphism, GraphMorphism) {
    (formula.map().clone(), formula.to().typing().clone())
}

/// The slice morphism `m` from `(W, m;n)` to `(R, n)`.
pub fn lifting_to_regular(m: &GraphMorphism, n: &GraphMorphism) -> Result<SliceMorphism> {
    let from = TypedInstance::new(compose(m, n)?);
    let to = TypedInstance::new(n.clone());
    SliceMorphism::new(from, to, m.clone())
}

impl ConstraintSymbol {
    /// The same constraint in the other presentation: regular symbols become
    /// lifting symbols and vice versa. The name gains a trailing `'`.
    pub fn translated(&self) -> Result<ConstraintSymbol> {
        let sem = match self.semantics() {
            Semantics::Regular(f) => {
                let (m, n) = regular_to_lifting(f);
                Semantics::Lifting { m, n }
            }
            Semantics::Lifting { m, n } => Semantics::Regular(lifting_to_regular(m, n)?),
            other => {
                return Err(DclError::Signature(format!(
                    "`{}` has {} semantics, which has no lifting form",
                    self.name(),
                    other.kind()
                )))
            }
        };
        ConstraintSymbol::new(format!("{}'", self.name()), self.arity().clone(), sem)
    }
}
