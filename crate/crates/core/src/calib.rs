//! Calibration record: residual levels measured once on the reference
//! lattice by `qazb calibrate`, committed in `calibration.toml` at the
//! workspace root, and used by the acceptance gates at a 2× scale.
//! `QAZB_CONFIG` overrides the embedded copy with a file path.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Calibration {
    pub version: String,
    /// reference lattice and seed the values were measured at
    pub n: u32,
    pub m: u32,
    pub seed: u64,

    pub fourier_unitarity: f64,
    pub phase_relation: f64,
    pub modulus_relation_nonwrap: f64,
    pub sr_qsq_residual: f64,
    pub sr_sum_normality: f64,
    pub ab_inv_normality: f64,
    pub ab_inv_ray_distance: f64,

    pub qexp_objective: f64,
    pub qexp_commutator: f64,
    pub qexp_equation: f64,
    pub qexp_circular_variance: f64,
    pub qexp_gauge_pair_distance: f64,

    pub w_unitarity: f64,
    pub pentagon_solved: f64,
    pub pentagon_baseline: f64,
    pub delta_res_a: f64,
    pub delta_res_b: f64,
    pub delta_res_a_baseline: f64,
    pub delta_res_b_baseline: f64,

    pub rep_residual_onedim: f64,
    pub rep_residual_built: f64,
    pub rep_residual_regular: f64,
    pub rep_negative_control: f64,
    pub decompose_roundtrip: f64,
    pub por1_built: f64,
    pub por2_built: f64,
    pub leg_identity_built: f64,
    pub stad1_built: f64,
    pub regular_d_match_rate: f64,
}

impl Calibration {
    /// The committed calibration shipped with the crate.
    pub fn embedded() -> Self {
        let text = include_str!("../../../calibration.toml");
        toml::from_str(text).expect("embedded calibration.toml parses")
    }

    /// Load from `QAZB_CONFIG` if set, else the embedded copy.
    pub fn load() -> Result<Self> {
        match std::env::var("QAZB_CONFIG") {
            Ok(path) if !path.is_empty() => {
                let text = std::fs::read_to_string(&path)?;
                toml::from_str(&text).map_err(|e| Error::Config(format!("{path}: {e}")))
            }
            _ => Ok(Self::embedded()),
        }
    }

    /// Acceptance gate: 2× the calibrated value.
    pub fn gate(&self, calibrated: f64) -> f64 {
        2.0 * calibrated
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn embedded_parses() {
        let c = Calibration::embedded();
        assert_eq!(c.n, 6);
        assert_eq!(c.m, 2);
        assert!(c.pentagon_solved > 0.0);
    }
}
