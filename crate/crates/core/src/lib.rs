//! Observable-state renormalization for scalar φ^l theories in dimensional
//! regularization: ε-series algebra, the one-loop coefficient tables, the
//! finite parts of the two-point and l-point correlators, the internal-state
//! factorization with its projector, and the RG flows of mass and coupling
//! together with their perturbative-validity domains.

pub mod correlator;
pub mod dimreg;
pub mod error;
pub mod laurent;
pub mod ode;
pub mod poly;
pub mod rgflow;
pub mod statespace;
pub mod validity;

pub use error::{Error, Result};
pub use laurent::LaurentSeries;
