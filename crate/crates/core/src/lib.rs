//! Approximation algorithms for demand matching with per-vertex capacities and a matroid
//! constraint, in exact rational arithmetic.

pub mod error;
pub mod hardness;
pub mod instance;
pub mod iterated;
pub mod lp;
pub mod matroid;
pub mod oracle;
pub mod pruning;
pub mod ptas;
pub mod rational;

pub use error::{Error, Result};
pub use instance::{classify, Classification, Edge, EdgeId, EdgeSet, Endpoint, Instance, Solution, Vertex, VertexId};
pub use matroid::{Matroid, MatroidSpec};
pub use rational::Q;
