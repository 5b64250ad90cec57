//! Diagram constraint logic over finite directed multigraphs.

pub mod canon;
pub mod config;
pub mod error;
pub mod graph;
pub mod harness;
pub mod hom;
pub mod delta;
pub mod enumerate;
pub mod fixtures;
pub mod indexed;
pub mod injectivity;
pub mod io;
pub mod limits;
pub mod random;
pub mod satisfaction;
pub mod signature;
pub mod sketch;
pub mod slice;

pub use error::{DclError, Result};
pub use graph::{compose, Arrow, Graph, GraphBuilder, GraphMorphism};
