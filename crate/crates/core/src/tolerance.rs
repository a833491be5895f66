//! One record holds every numerical tolerance; checks report measured
//! residuals alongside the gate they were held to.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TolerancePolicy {
    /// hermitian_eig precondition, relative
    pub hermitian_tol: f64,
    /// normal_eig precondition ‖[T,T*]‖/‖T‖², relative
    pub normality_tol: f64,
    /// joint_diag / bifuncalc pairwise commutator gate, relative
    pub commuting_tol: f64,
    /// accepted off-diagonal mass after joint diagonalization, relative
    pub joint_offdiag_tol: f64,
    /// eigenvalue clustering threshold, relative to ‖T‖
    pub cluster_tol: f64,
    /// snap tolerance for declared-lattice spectra
    pub snap_tol: f64,
    /// ray membership tolerance in sector units
    pub ray_tol: f64,
    /// normality gate for declared quasi-normal arguments (S+R, ab⁻¹ paths)
    pub quasi_normality_tol: f64,
    /// |eigenvalue| below this · scale counts as kernel
    pub kernel_tol: f64,
    /// extract_c slice gate
    pub slice_gate: f64,
    /// factor_f off-block gate
    pub block_gate: f64,
    /// extract_c character-match gate
    pub character_gate: f64,
    /// extract_d required lattice-match rate
    pub lattice_match_rate: f64,
    /// Jacobi sweep cap
    pub max_sweeps: usize,
    /// bulk window fraction per modulus leg
    pub window_fraction: f64,
    /// dense triple-leg budget: refuse (NM)³ materialization above this NM
    pub dense_leg_budget: usize,
}

impl Default for TolerancePolicy {
    fn default() -> Self {
        TolerancePolicy {
            hermitian_tol: 1e-10,
            normality_tol: 1e-8,
            commuting_tol: 1e-8,
            joint_offdiag_tol: 1e-8,
            cluster_tol: 1e-8,
            snap_tol: 1e-6,
            ray_tol: 1e-6,
            quasi_normality_tol: 0.35,
            kernel_tol: 1e-12,
            slice_gate: 1e-3,
            block_gate: 1e-4,
            character_gate: 1e-6,
            lattice_match_rate: 0.9,
            max_sweeps: 64,
            window_fraction: 0.5,
            dense_leg_budget: 16,
        }
    }
}
