//! Numerical workbench for the quantum az+b group at an even root of unity
//! `q = e^{2πi/N}`.
//!
//! The group `Γ = ∪_k q^k ℝ₊` is modelled on a finite lattice (N phase
//! sectors × M modulus shells) carrying a symmetric nondegenerate
//! bicharacter χ. On `ℓ²` of that lattice the crate builds the canonical
//! operator pair `(a, b)`, the crossed-product structure (character
//! unitaries, dual action, Weyl decomposition), the multiplicative unitary
//! `W = F(ab⁻¹ ⊗ b)·χ(b⁻¹ ⊗ I, I ⊗ a)`, and unitary representations
//! `V = F(d ⊗ b)·χ(c ⊗ I, I ⊗ a)`, where `F` is a unit-modulus phase table
//! on the lattice characterized by the exponential functional equation
//! `F(S +̇ R) = F(S)F(R)` for q²-commuting pairs and found numerically.
//!
//! Everything is dense complex linear algebra with a deterministic Jacobi
//! eigensolver; every approximate check reports a measured residual.

pub mod calib;
pub mod cmat;
pub mod eig;
pub mod error;
pub mod lattice;
pub mod legs;
pub mod model;
pub mod multiplicative;
pub mod qexp;
pub mod rep;
pub mod tolerance;

pub use calib::Calibration;
pub use cmat::CMat;
pub use error::Error;
pub use lattice::{GammaBar, GroupElement, LatticeParams};
pub use tolerance::TolerancePolicy;

pub type Result<T> = std::result::Result<T, Error>;
