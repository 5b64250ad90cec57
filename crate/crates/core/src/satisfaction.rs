//! Satisfaction of declarations by instances, with evidence, and its
//! behaviour under schema morphisms.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{DclError, Result};
use crate::graph::{Graph, GraphMorphism};
use crate::hom::HomSearch;
use crate::signature::{Dependency, Signature, Verdict};
use crate::sketch::{translate_declaration, ConstraintDeclaration, Sketch, SketchMorphism};
use crate::slice::{restrict, restrict_with_projection, TypedInstance};

pub use crate::delta::pullback_delta;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Status {
    Valid,
    Invalid,
    Unknown,
}

impl Status {
    pub fn of(v: &Verdict) -> Status {
        match v {
            Verdict::Valid(_) => Status::Valid,
            Verdict::Invalid(_) => Status::Invalid,
            Verdict::Unknown(_) => Status::Unknown,
        }
    }

    /// Conjunction in which any unknown makes the whole unknown.
    pub fn all(statuses: impl IntoIterator<Item = Status>) -> Status {
        statuses.into_iter().fold(Status::Valid, |acc, s| match (acc, s) {
            (Status::Unknown, _) | (_, Status::Unknown) => Status::Unknown,
            (Status::Invalid, _) | (_, Status::Invalid) => Status::Invalid,
            _ => Status::Valid,
        })
    }

    pub fn exit_code(self) -> i32 {
        match self {
            Status::Valid => 0,
            Status::Invalid => 1,
            Status::Unknown => 2,
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Valid => "valid",
            Status::Invalid => "invalid",
            Status::Unknown => "unknown",
        })
    }
}

/// `t ⊨ d`: restrict `t` along the binding and evaluate the label.
/// Offending elements of an invalid verdict are located in `t`'s carrier.
pub fn satisfies(sig: &Signature, t: &TypedInstance, d: &ConstraintDeclaration) -> Result<Verdict> {
    let sym = sig.symbol(d.label())?;
    let (r, proj) = if d.binding().is_injective() {
        preimage(t, d.binding())?
    } else {
        restrict_with_projection(t, d.binding())?
    };
    let r = r.into_schema(sym.arity().clone())?;
    let mut v = sym.evaluate(&r)?;
    if let Verdict::Invalid(c) = &mut v {
        let mut located: Vec<String> = c
            .located
            .iter()
            .map(|x| proj.image(x).expect("restricted element").to_string())
            .collect();
        located.sort();
        located.dedup();
        c.located = located;
    }
    Ok(v)
}

/// Restriction along a monic binding: the elements typed in its image,
/// under their own ids, with the inclusion.
fn preimage(t: &TypedInstance, b: &GraphMorphism) -> Result<(TypedInstance, GraphMorphism)> {
    if t.schema() != b.cod() {
        return restrict_with_projection(t, b);
    }
    let back_n: HashMap<&str, &str> = b.node_map().iter().map(|(x, y)| (y.as_str(), x.as_str())).collect();
    let back_a: HashMap<&str, &str> = b.arrow_map().iter().map(|(x, y)| (y.as_str(), x.as_str())).collect();
    let keep = |m: &BTreeMap<String, String>, back: &HashMap<&str, &str>| -> BTreeMap<String, String> {
        m.iter()
            .filter_map(|(x, ty)| back.get(ty.as_str()).map(|a| (x.clone(), a.to_string())))
            .collect()
    };
    let nodes = keep(t.typing().node_map(), &back_n);
    let arrows = keep(t.typing().arrow_map(), &back_a);
    let carrier = Arc::new(Graph::from_parts(
        nodes.keys().cloned().collect(),
        arrows
            .keys()
            .map(|e| (e.clone(), t.carrier().arrow(e).expect("carrier arrow").clone()))
            .collect(),
    ));
    let same = |m: &BTreeMap<String, String>| m.keys().map(|x| (x.clone(), x.clone())).collect();
    let incl = GraphMorphism::new_unchecked(carrier.clone(), t.carrier().clone(), same(&nodes), same(&arrows));
    let typing = GraphMorphism::new_unchecked(carrier, b.dom().clone(), nodes, arrows);
    Ok((TypedInstance::new(typing), incl))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeclarationVerdict {
    pub declaration: String,
    pub label: String,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    /// In declaration id order.
    pub declarations: Vec<DeclarationVerdict>,
    pub overall: Status,
}

impl ValidationReport {
    fn assemble(declarations: Vec<DeclarationVerdict>) -> ValidationReport {
        let overall = Status::all(declarations.iter().map(|d| Status::of(&d.verdict)));
        ValidationReport { declarations, overall }
    }

    pub fn verdict(&self, declaration: &str) -> Option<&Verdict> {
        self.declarations
            .iter()
            .find(|d| d.declaration == declaration)
            .map(|d| &d.verdict)
    }

    /// Declaration ids whose verdict has the given status.
    pub fn with_status(&self, status: Status) -> Vec<&str> {
        self.declarations
            .iter()
            .filter(|d| Status::of(&d.verdict) == status)
            .map(|d| d.declaration.as_str())
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ValidateOptions {
    pub allow_unclosed: bool,
    /// Worker threads; `1` evaluates sequentially.
    pub jobs: usize,
}

impl Default for ValidateOptions {
    fn default() -> Self {
        ValidateOptions {
            allow_unclosed: false,
            jobs: 1,
        }
    }
}

/// Checks every declaration of `s` against `t`.
pub fn validate_instance(s: &Sketch, t: &TypedInstance, options: ValidateOptions) -> Result<ValidationReport> {
    if **t.schema() != **s.carrier() {
        return Err(DclError::Mismatch {
            what: "instance schema and sketch carrier",
            expected: s.carrier().summary(),
            found: t.schema().summary(),
        });
    }
    if !s.is_closed() && !options.allow_unclosed {
        let missing: Vec<String> = s
            .missing_lifts()
            .into_iter()
            .map(|m| format!("{} via {}", m.declaration, m.dependency))
            .collect();
        return Err(DclError::Sketch(format!(
            "sketch is not closed; missing declarations for {}",
            missing.join(", ")
        )));
    }
    let t = t.with_schema(s.carrier().clone())?;
    let decls: Vec<&ConstraintDeclaration> = s.declarations().collect();
    let check = |d: &&ConstraintDeclaration| -> Result<DeclarationVerdict> {
        Ok(DeclarationVerdict {
            declaration: d.id().to_string(),
            label: d.label().to_string(),
            verdict: satisfies(s.signature(), &t, d)?,
        })
    };
    let verdicts = if options.jobs > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(options.jobs)
            .build()
            .map_err(|e| DclError::Invalid(format!("cannot start worker pool: {e}")))?;
        pool.install(|| decls.par_iter().map(check).collect::<Result<Vec<_>>>())?
    } else {
        decls.iter().map(check).collect::<Result<Vec<_>>>()?
    };
    Ok(ValidationReport::assemble(verdicts))
}

/// The model reduct `f*(t′)`.
pub fn migrate_instance(f: &GraphMorphism, t: &TypedInstance) -> Result<TypedInstance> {
    restrict(t, f)
}

/// Deliberate faults for exercising the harness.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    /// Translate declarations to the lexicographically least binding into
    /// the target carrier instead of post-composing.
    LeastBinding,
}

/// Both sides of the satisfaction condition for one triple.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SatAxiomCheck {
    /// `f*(t′) ⊨ d`
    pub reduct: Verdict,
    /// `t′ ⊨ f_*(d)`
    pub translated: Verdict,
    pub passed: bool,
}

fn same_outcome(a: &Verdict, b: &Verdict) -> bool {
    match (a, b) {
        (Verdict::Valid(x), Verdict::Valid(y)) => x == y,
        (Verdict::Invalid(x), Verdict::Invalid(y)) => x.restricted == y.restricted && x.offending == y.offending,
        (Verdict::Unknown(_), Verdict::Unknown(_)) => true,
        _ => false,
    }
}

/// Checks `f*(t′) ⊨ d ⟺ t′ ⊨ f_*(d)` and that both sides carry the same
/// canonical evidence.
pub fn verify_sat_axiom(
    sig: &Signature,
    f: &GraphMorphism,
    d: &ConstraintDeclaration,
    t: &TypedInstance,
) -> Result<SatAxiomCheck> {
    verify_sat_axiom_with(sig, f, d, t, None)
}

pub fn verify_sat_axiom_with(
    sig: &Signature,
    f: &GraphMorphism,
    d: &ConstraintDeclaration,
    t: &TypedInstance,
    fault: Option<Fault>,
) -> Result<SatAxiomCheck> {
    let reduct = satisfies(sig, &migrate_instance(f, t)?, d)?;
    let pushed = match fault {
        None => translate_declaration(f, d)?,
        Some(Fault::LeastBinding) => {
            let arity = d.binding().dom().clone();
            let least = HomSearch::new(arity, f.cod().clone()).first()?.ok_or_else(|| {
                DclError::Invalid("no binding into the target carrier".into())
            })?;
            ConstraintDeclaration::new(format!("{}'", d.id()), d.label(), least)
        }
    };
    let t = t.with_schema(f.cod().clone())?;
    let translated = satisfies(sig, &t, &pushed)?;
    let passed = same_outcome(&reduct, &translated);
    Ok(SatAxiomCheck {
        reduct,
        translated,
        passed,
    })
}

/// Lifts a valid verdict along a dependency: restrict its evidence along
/// the arity map and evaluate the contributed symbol.
pub fn propagate_evidence(sig: &Signature, v: &Verdict, dep: &Dependency) -> Result<Verdict> {
    let Verdict::Valid(e) = v else {
        return Err(DclError::Invalid(format!(
            "only valid verdicts propagate; got {}",
            v.status()
        )));
    };
    let from = sig.symbol(dep.from())?;
    if **e.restricted.schema() != **from.arity() {
        return Err(DclError::Mismatch {
            what: "evidence arity",
            expected: from.arity().summary(),
            found: e.restricted.schema().summary(),
        });
    }
    let to = sig.symbol(dep.to())?;
    let r = restrict(&e.restricted, dep.arity_map())?.with_schema(to.arity().clone())?;
    to.evaluate(&r)
}

/// Transfers a valid report along a sketch morphism `f: S → S′` to the
/// reduct instance; each verdict is taken from the image declaration.
pub fn reduct_sketch_instance(
    f: &SketchMorphism,
    s: &Sketch,
    s_prime: &Sketch,
    t: &TypedInstance,
    report: &ValidationReport,
) -> Result<(TypedInstance, ValidationReport)> {
    if report.overall != Status::Valid {
        return Err(DclError::Invalid(format!(
            "the instance is not valid for the target sketch (overall {})",
            report.overall
        )));
    }
    let violations = f.check(s, s_prime);
    if !violations.is_empty() {
        return Err(DclError::Sketch(format!("not a sketch morphism: {violations:?}")));
    }
    let reduct = migrate_instance(f.graph_map(), &t.with_schema(s_prime.carrier().clone())?)?
        .with_schema(s.carrier().clone())?;
    let mut out = Vec::new();
    for d in s.declarations() {
        let image = &f.decl_map()[d.id()];
        let verdict = report
            .verdict(image)
            .ok_or_else(|| DclError::Invalid(format!("report has no verdict for `{image}`")))?;
        out.push(DeclarationVerdict {
            declaration: d.id().to_string(),
            label: d.label().to_string(),
            verdict: verdict.clone(),
        });
    }
    Ok((reduct, ValidationReport::assemble(out)))
}
