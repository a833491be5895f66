use thiserror::Error;

/// Errors surfaced by lattice construction, spectral routines and the
/// operator-model operations. Residual-style failures carry the measured
/// value so reports can show how far the precondition was missed.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not Hermitian (relative residual {residual:.3e})")]
    NotHermitian { residual: f64 },

    #[error("matrix is not normal (relative commutator {residual:.3e}, tolerance {tolerance:.3e})")]
    NotNormal { residual: f64, tolerance: f64 },

    #[error("family does not commute (relative commutator {residual:.3e})")]
    NonCommuting { residual: f64 },

    #[error("point is off the lattice rays (sector distance {distance:.3e})")]
    OffRay { distance: f64 },

    #[error("spectrum off the lattice (distance {distance:.3e}, tolerance {tolerance:.3e})")]
    SpectrumOffLattice { distance: f64, tolerance: f64 },

    #[error("operator has a kernel (smallest |eigenvalue| {min_abs:.3e})")]
    KernelPresent { min_abs: f64 },

    #[error("contraction norm not below one (I - Z*Z has min eigenvalue {min_eig:.3e})")]
    NotContraction { min_eig: f64 },

    #[error("memory budget refused: dim {dim} exceeds dense triple-leg budget {budget}")]
    MemoryBudget { dim: usize, budget: usize },

    #[error("slice deviates from a multiple of identity (worst {worst:.3e}, gate {gate:.3e})")]
    SliceDeviation { worst: f64, gate: f64 },

    #[error("character match failed (score {score:.3e}, gate {gate:.3e})")]
    CharacterMismatch { score: f64, gate: f64 },

    #[error("factor blocks do not commute (worst {residual:.3e}, gate {gate:.3e})")]
    BlocksNotCommuting { residual: f64, gate: f64 },

    #[error("off-block mass above gate ({mass:.3e} > {gate:.3e})")]
    OffBlockMass { mass: f64, gate: f64 },

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("config: {0}")]
    Config(String),
}
