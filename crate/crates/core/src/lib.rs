//! Poisson small-world networks on the torus: generation, decentralised
//! routing and scaling analysis.

pub mod analysis;
pub mod error;
pub mod genmodel;
pub mod geometry;
pub mod routing;
pub mod verify;

pub use error::{AnalysisError, FormatError, GraphError, ModelError, RouteError};
pub use genmodel::{generate, DegreeConvention, Graph, ModelParams, NodeId};
pub use geometry::{Torus, TorusPoint};
pub use routing::{route, Algorithm, RouteResult, RouteStatus};
