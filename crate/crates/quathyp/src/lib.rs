//! Quaternionic hyperbolic geometry in the Siegel domain model.
//!
//! Points of `H_ℍⁿ ∪ ∂H_ℍⁿ` are lifted to `ℍ^{n,1}`, a right vector space
//! over the quaternions carrying the Hermitian form
//! `⟨z, w⟩ = w̄₁ z_{n+1} + Σ w̄ᵢ zᵢ + w̄_{n+1} z₁`. On top of that the crate
//! computes cross-ratios, Cartan angular invariants, Bergman distances,
//! normalized Gram matrices of boundary quadruples with their moduli
//! coordinates, and decides congruence of point configurations.

pub mod congruence;
pub mod error;
pub mod hform;
pub mod invariants;
pub mod linalg;
pub mod metric;
pub mod moduli;
pub mod quat;

pub use error::GeometryError;
pub use hform::{ClosurePoint, HVector, Isometry, Location, Sign};
pub use quat::{Quaternion, UnitImaginary, DEFAULT_EPS};
