//! Monte Carlo estimators for heat semigroups on differential forms over
//! compact Riemannian manifolds.

pub mod error;
pub mod exterior;
pub mod geometry;
pub mod transport;
pub mod forms;
pub mod oracles;
pub mod stats;
pub mod estimators;
pub mod validation;
pub mod record;

pub use error::{Error, Result};
pub use exterior::{DegreeMap, MultiVector};
pub use geometry::{Frame, ManifoldModel};
