use thiserror::Error;

/// Errors raised by the constraint engine.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DclError {
    #[error("malformed graph: {0}")]
    MalformedGraph(String),

    #[error("malformed morphism: {0}")]
    MalformedMorphism(String),

    #[error("cannot compose: codomain {left} differs from domain {right}")]
    NotComposable { left: String, right: String },

    #[error("{what}: expected {expected}, found {found}")]
    Mismatch {
        what: &'static str,
        expected: String,
        found: String,
    },

    #[error("size guard exceeded: {0}")]
    SizeGuard(String),

    #[error("search limit exhausted: {0}")]
    SearchExhausted(String),

    #[error("unknown constraint symbol `{0}`")]
    UnknownSymbol(String),

    #[error("invalid signature: {0}")]
    Signature(String),

    #[error("invalid sketch: {0}")]
    Sketch(String),

    #[error("invalid delta: {0}")]
    Delta(String),

    #[error("derivation rejected: {0}")]
    Derivation(String),

    #[error("{0}")]
    Invalid(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, DclError>;
