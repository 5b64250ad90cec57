//! Standard arity graphs and the builtin signature.

use std::fmt;
use std::sync::Arc;

use crate::error::{DclError, Result};
use crate::graph::{Graph, GraphMorphism};

use super::{ConstraintSymbol, Dependency, Semantics, Signature};

/// `A -r→ B`
pub fn arrow_arity() -> Arc<Graph> {
    Arc::new(Graph::new(["A", "B"], [("r", "A", "B")]).expect("static arity"))
}

/// `A -r1→ B`, `A -r2→ B`
pub fn parallel_arity() -> Arc<Graph> {
    Arc::new(Graph::new(["A", "B"], [("r1", "A", "B"), ("r2", "A", "B")]).expect("static arity"))
}

/// Two paths `A -p1→ B -p2→ D` and `A -q1→ C -q2→ D`.
pub fn square_arity() -> Arc<Graph> {
    Arc::new(
        Graph::new(
            ["A", "B", "C", "D"],
            [("p1", "A", "B"), ("p2", "B", "D"), ("q1", "A", "C"), ("q2", "C", "D")],
        )
        .expect("static arity"),
    )
}

/// `A ←f- R -g→ B`
pub fn span_arity() -> Arc<Graph> {
    Arc::new(Graph::new(["R", "A", "B"], [("f", "R", "A"), ("g", "R", "B")]).expect("static arity"))
}

/// A class node `K` with attribute arrows `k1..kn` to `V1..Vn`.
pub fn key_arity(attributes: usize) -> Arc<Graph> {
    let mut b = Graph::builder().node("K");
    for i in 1..=attributes {
        b = b.node(format!("V{i}")).arrow(format!("k{i}"), "K", format!("V{i}"));
    }
    Arc::new(b.build().expect("static arity"))
}

/// Sorted disjoint intervals of admissible counts; `None` is unbounded.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Multiplicity {
    intervals: Vec<(u64, Option<u64>)>,
}

impl Multiplicity {
    pub fn new(mut intervals: Vec<(u64, Option<u64>)>) -> Result<Multiplicity> {
        if intervals.is_empty() {
            return Err(DclError::Signature("multiplicity without intervals".into()));
        }
        intervals.sort();
        for &(lo, hi) in &intervals {
            if hi.is_some_and(|hi| hi < lo) {
                return Err(DclError::Signature(format!("empty multiplicity interval {lo}..{hi:?}")));
            }
        }
        for w in intervals.windows(2) {
            match w[0].1 {
                Some(hi) if hi < w[1].0 => {}
                _ => {
                    return Err(DclError::Signature(
                        "multiplicity intervals overlap or follow an unbounded one".into(),
                    ))
                }
            }
        }
        Ok(Multiplicity { intervals })
    }

    /// Parses labels such as `[1]`, `[0..1]`, `[1..*]`, `[1..4,6]`.
    pub fn parse(label: &str) -> Result<Multiplicity> {
        let bad = || DclError::Parse(format!("`{label}` is not a multiplicity"));
        let inner = label
            .trim()
            .strip_prefix('[')
            .and_then(|s| s.strip_suffix(']'))
            .ok_or_else(bad)?;
        let mut intervals = Vec::new();
        for part in inner.split(',') {
            let part = part.trim();
            let (lo, hi) = match part.split_once("..") {
                Some((lo, hi)) => (lo.trim(), hi.trim()),
                None => (part, part),
            };
            let lo: u64 = lo.parse().map_err(|_| bad())?;
            let hi = if hi == "*" {
                None
            } else {
                Some(hi.parse::<u64>().map_err(|_| bad())?)
            };
            intervals.push((lo, hi));
        }
        Multiplicity::new(intervals)
    }

    pub fn intervals(&self) -> &[(u64, Option<u64>)] {
        &self.intervals
    }

    pub fn admits(&self, n: u64) -> bool {
        self.intervals
            .iter()
            .any(|&(lo, hi)| lo <= n && hi.is_none_or(|hi| n <= hi))
    }

    /// Whether every count is admissible.
    pub fn is_trivial(&self) -> bool {
        self.intervals == [(0, None)]
    }
}

impl fmt::Display for Multiplicity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, &(lo, hi)) in self.intervals.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            match hi {
                Some(hi) if hi == lo => write!(f, "{lo}")?,
                Some(hi) => write!(f, "{lo}..{hi}")?,
                None => write!(f, "{lo}..*")?,
            }
        }
        write!(f, "]")
    }
}

impl ConstraintSymbol {
    /// A multiplicity symbol named by its label, over [`arrow_arity`].
    pub fn multiplicity(label: &str) -> Result<ConstraintSymbol> {
        let m = Multiplicity::parse(label)?;
        ConstraintSymbol::new(label, arrow_arity(), Semantics::Multiplicity(m))
    }
}

/// The arity map of a span leg dependency: `A ↦ R`, `B ↦ end`, `r ↦ leg`.
pub fn leg_map(leg: &str) -> GraphMorphism {
    let end = if leg == "f" { "A" } else { "B" };
    GraphMorphism::from_pairs(arrow_arity(), span_arity(), &[("A", "R"), ("B", end)], &[("r", leg)])
        .expect("static arity map")
}

impl Signature {
    /// Multiplicities `[0..*]`, `[0..1]`, `[1]`, `[1..*]`; `[⇒]`, `[⇒]4`,
    /// `[key]` (two attributes), `[comm]`, `[jm]` and `[jm!]`. Both joint
    /// monicity symbols carry the leg dependencies `d1`, `d2` (resp. `d1!`,
    /// `d2!`) to `[1]`.
    pub fn builtin() -> Signature {
        let mut sig = Signature::new();
        for label in ["[0..*]", "[0..1]", "[1]", "[1..*]"] {
            sig.add_symbol(ConstraintSymbol::multiplicity(label).expect("builtin"))
                .expect("builtin");
        }
        let fixed = [
            ("[⇒]", parallel_arity(), Semantics::Subset),
            ("[⇒]4", square_arity(), Semantics::CompositeSubset4),
            ("[key]", key_arity(2), Semantics::Key),
            ("[comm]", square_arity(), Semantics::Commutativity),
            ("[jm]", span_arity(), Semantics::JointlyMonic { strict: false }),
            ("[jm!]", span_arity(), Semantics::JointlyMonic { strict: true }),
        ];
        for (name, arity, sem) in fixed {
            sig.add_symbol(ConstraintSymbol::new(name, arity, sem).expect("builtin"))
                .expect("builtin");
        }
        for (jm, suffix) in [("[jm]", ""), ("[jm!]", "!")] {
            for (leg, d) in [("f", "d1"), ("g", "d2")] {
                sig.add_dependency(Dependency::new(format!("{d}{suffix}"), jm, "[1]", leg_map(leg)))
                    .expect("builtin");
            }
        }
        sig
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_print() {
        let m = Multiplicity::parse("[1..4,6]").unwrap();
        assert_eq!(m.intervals(), &[(1, Some(4)), (6, Some(6))]);
        assert_eq!(m.to_string(), "[1..4,6]");
        assert!(m.admits(3) && !m.admits(5) && m.admits(6) && !m.admits(0) && !m.admits(7));
        assert_eq!(Multiplicity::parse("[1..*]").unwrap().to_string(), "[1..*]");
        assert!(Multiplicity::parse("[0..*]").unwrap().is_trivial());
    }

    #[test]
    fn malformed_multiplicities() {
        assert!(Multiplicity::parse("1..2").is_err());
        assert!(Multiplicity::parse("[2..1]").is_err());
        assert!(Multiplicity::parse("[0..3,2]").is_err());
        assert!(Multiplicity::parse("[1..*,4]").is_err());
        assert!(Multiplicity::parse("[a]").is_err());
    }

    #[test]
    fn builtin_dependencies() {
        let sig = Signature::builtin();
        let deps: Vec<_> = sig.dependencies_from("[jm]").map(|d| d.id().to_string()).collect();
        assert_eq!(deps, ["d1", "d2"]);
        let d1 = sig.dependency("d1").unwrap();
        assert_eq!(d1.arity_map().node("A"), "R");
        assert_eq!(d1.arity_map().arrow("r"), "f");
        assert_eq!(sig.dependency("d2").unwrap().arity_map().arrow("r"), "g");
    }
}
