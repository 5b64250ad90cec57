//! Seeded satisfaction-condition trials over random schema morphisms.

use crate::error::Result;
use crate::graph::GraphMorphism;
use crate::io::canonical_bytes;
use crate::random::{self, Limits, BUILTIN_LABELS};
use crate::satisfaction::{verify_sat_axiom_with, Fault, SatAxiomCheck};
use crate::signature::Signature;
use crate::sketch::ConstraintDeclaration;
use crate::slice::TypedInstance;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SataxOptions {
    pub trials: usize,
    pub seed: u64,
    pub max_nodes: usize,
    pub max_arrows: usize,
    pub fault: Option<Fault>,
}

impl Default for SataxOptions {
    fn default() -> Self {
        SataxOptions {
            trials: 1000,
            seed: 0,
            max_nodes: 5,
            max_arrows: 6,
            fault: None,
        }
    }
}

/// A schema morphism `f: G → G′`, a declaration over `G` and an instance
/// over `G′`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Triple {
    pub morphism: GraphMorphism,
    pub declaration: ConstraintDeclaration,
    pub instance: TypedInstance,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SataxFailure {
    pub index: usize,
    pub triple: Triple,
    pub check: SatAxiomCheck,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SataxSummary {
    pub trials: usize,
    pub passed: usize,
    pub failures: Vec<SataxFailure>,
}

impl SataxSummary {
    pub fn all_passed(&self) -> bool {
        self.passed == self.trials
    }
}

/// The triples of a run, in order. Draws that admit no declaration are
/// redrawn from the same stream.
pub fn triples(sig: &Signature, options: &SataxOptions) -> Result<Vec<Triple>> {
    let mut rng = random::rng(options.seed);
    let limits = Limits {
        max_nodes: options.max_nodes,
        max_arrows: options.max_arrows,
        ..Limits::default()
    };
    let mut out = Vec::with_capacity(options.trials);
    while out.len() < options.trials {
        let target = std::sync::Arc::new(random::graph(&mut rng, "", limits));
        let morphism = random::morphism_into(&mut rng, &target, "s", limits);
        let Some(declaration) = random::declaration(&mut rng, sig, &BUILTIN_LABELS, morphism.dom(), "d")? else {
            continue;
        };
        let instance = random::instance(&mut rng, &target, "", limits);
        out.push(Triple {
            morphism,
            declaration,
            instance,
        });
    }
    Ok(out)
}

/// A trial passes when both sides agree and their canonical evidence
/// serializes to the same bytes.
pub fn check_triple(sig: &Signature, t: &Triple, fault: Option<Fault>) -> Result<SatAxiomCheck> {
    let mut check = verify_sat_axiom_with(sig, &t.morphism, &t.declaration, &t.instance, fault)?;
    check.passed = check.passed && canonical_bytes(&check.reduct) == canonical_bytes(&check.translated);
    Ok(check)
}

pub fn run_satax(sig: &Signature, options: &SataxOptions) -> Result<SataxSummary> {
    let mut summary = SataxSummary {
        trials: options.trials,
        passed: 0,
        failures: Vec::new(),
    };
    for (index, triple) in triples(sig, options)?.into_iter().enumerate() {
        let check = check_triple(sig, &triple, options.fault)?;
        if check.passed {
            summary.passed += 1;
        } else {
            summary.failures.push(SataxFailure { index, triple, check });
        }
    }
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_trials_pass() {
        let s = run_satax(&Signature::builtin(), &SataxOptions { trials: 0, ..Default::default() }).unwrap();
        assert!(s.all_passed());
    }

    #[test]
    fn small_run_passes_and_repeats() {
        let sig = Signature::builtin();
        let opts = SataxOptions { trials: 40, seed: 11, ..Default::default() };
        assert_eq!(triples(&sig, &opts).unwrap(), triples(&sig, &opts).unwrap());
        let s = run_satax(&sig, &opts).unwrap();
        assert!(s.all_passed(), "{:?}", s.failures.first());
    }

    #[test]
    fn injected_fault_is_caught() {
        let sig = Signature::builtin();
        let opts = SataxOptions {
            trials: 200,
            seed: 5,
            fault: Some(Fault::LeastBinding),
            ..Default::default()
        };
        let s = run_satax(&sig, &opts).unwrap();
        assert!(!s.failures.is_empty());
    }
}
