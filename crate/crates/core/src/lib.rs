//! Killing tensors on the 3-sphere through their algebraic curvature tensors.
//!
//! A symmetric endomorphism `R` of Λ²ℝ⁴ satisfying the Bianchi identity
//! defines a Killing tensor `K_x(v,w) = R(x,v,x,w)` on S³. The crate decides
//! integrability of such tensors algebraically, builds Stäckel systems from
//! points of the Killing–Stäckel variety, classifies separation coordinates,
//! and checks everything numerically on the embedded sphere.

pub mod coords;
pub mod corpus;
pub mod decomposition;
pub mod error;
pub mod integrability;
pub mod ksvariety;
pub mod lambda2;
pub mod oracle;
pub mod staeckel;
pub mod wire;

pub use error::{Error, Result};

/// Tolerances shared by every verdict function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToleranceConfig {
    /// Relative tolerance for "equals zero" decisions on normalized residuals.
    pub eq: f64,
    /// Relative tolerance for grouping eigenvalues.
    pub grouping: f64,
    /// Relative singular-value threshold for rank decisions.
    pub rank: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        ToleranceConfig {
            eq: 1e-10,
            grouping: 1e-8,
            rank: 1e-9,
        }
    }
}
