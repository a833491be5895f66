//! The multiplicative unitary W = F(ab⁻¹ ⊗ b) · χ(b⁻¹ ⊗ I, I ⊗ a), the
//! pentagon residual, and the comultiplication checks on the generators.
//!
//! The F-factor is assembled blockwise over the b-eigenbasis of the second
//! leg (F(x ⊗ b) = Σ_β F(βx) ⊗ P_β, all blocks sharing one Jacobi basis of
//! ab⁻¹); the χ-factor is diagonal in the (b-eigen, position) product basis.
//! In the finite model ab⁻¹ is only approximately normal and its spectrum
//! sits between the rays, so both measurements are part of the build report
//! and the gate is the declared quasi-normal tolerance.

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::cmat::CMat;
use crate::eig::quasi_normal_eig;
use crate::lattice::LatticeParams;
use crate::legs::{two_leg_apply, two_leg_product, two_leg_times_big, LegPattern, TwoLeg};
use crate::model::{bulk_selector, kron_selector, GPair};
use crate::qexp::QExp;
use crate::tolerance::TolerancePolicy;
use crate::{Error, Result};

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct WBuildReport {
    /// relative normality defect of ab⁻¹
    pub ab_inv_normality: f64,
    /// worst sector distance of Sp(ab⁻¹ ⊗ b) to the rays, in units of 2π/N
    pub ray_distance: f64,
    /// ‖W W† − I‖_F / √dim
    pub unitarity: f64,
}

#[derive(Debug, Clone)]
pub struct MultUnitary {
    pub lattice: LatticeParams,
    pub w: CMat,
    pub report: WBuildReport,
}

/// χ(z, w) extended to arbitrary nonzero points (continuous in both ray
/// coordinates); zero in either slot gives 1.
pub(crate) fn chi_total(p: &LatticeParams, z: Complex64, w: Complex64) -> Complex64 {
    if z.norm() == 0.0 || w.norm() == 0.0 {
        return Complex64::new(1.0, 0.0);
    }
    p.chi_coords(p.ray_coords_full(z), p.ray_coords_full(w))
}

/// Assemble Σ_i block(μ_i) ⊗ v_i v_i† for an eigenbasis held in columns.
pub(crate) fn assemble_leg2_blocks(blocks: &[CMat], basis: &CMat) -> CMat {
    let k = blocks[0].dim();
    let d = basis.dim();
    let mut out = CMat::zeros(k * d);
    for (i, blk) in blocks.iter().enumerate() {
        for r2 in 0..d {
            let br = basis[(r2, i)];
            if br.norm_sqr() == 0.0 {
                continue;
            }
            for c2 in 0..d {
                let proj = br * basis[(c2, i)].conj();
                if proj.norm_sqr() == 0.0 {
                    continue;
                }
                for r1 in 0..k {
                    for c1 in 0..k {
                        out[(r1 * d + r2, c1 * d + c2)] += blk[(r1, c1)] * proj;
                    }
                }
            }
        }
    }
    out
}

pub fn build_w(pair: &GPair, f: &QExp, pol: &TolerancePolicy) -> Result<MultUnitary> {
    let p = &pair.lattice;
    let d = p.dim();
    let sd_b = quasi_normal_eig(&pair.b, p.n, pol);
    let min_abs = sd_b
        .eigenvalues
        .iter()
        .map(|z| z.norm())
        .fold(f64::INFINITY, f64::min);
    if min_abs <= pol.kernel_tol * pair.b.max_abs() {
        return Err(Error::KernelPresent { min_abs });
    }
    let binv_vals: Vec<Complex64> = sd_b.eigenvalues.iter().map(|z| 1.0 / z).collect();
    let binv = CMat::conjugate_diag(&sd_b.basis, &binv_vals);
    let x = pair.a.matmul(&binv);
    let ab_inv_normality = x.normality_defect();
    if ab_inv_normality > pol.quasi_normality_tol {
        return Err(Error::NotNormal {
            residual: ab_inv_normality,
            tolerance: pol.quasi_normality_tol,
        });
    }
    let sd_x = quasi_normal_eig(&x, p.n, pol);
    let ray_distance = sd_x
        .eigenvalues
        .iter()
        .map(|z| {
            let rc = p.ray_coords_full(*z);
            (rc.sector - rc.sector.round()).abs()
        })
        .fold(0.0, f64::max);

    // F-factor: blocks F(β·x) in the shared basis of x
    let blocks: Vec<CMat> = sd_b
        .eigenvalues
        .iter()
        .map(|&beta| {
            let vals: Vec<Complex64> = sd_x
                .eigenvalues
                .iter()
                .map(|&z| f.eval_extended(beta * z))
                .collect();
            CMat::conjugate_diag(&sd_x.basis, &vals)
        })
        .collect();
    let ff = assemble_leg2_blocks(&blocks, &sd_b.basis);

    // χ-factor: diagonal in (b-eigen ⊗ position)
    let avals: Vec<Complex64> = p.elements().map(|g| p.embed(g)).collect();
    let mut chif = CMat::zeros(d * d);
    for i1 in 0..d {
        let z1 = binv_vals[i1];
        for r2 in 0..d {
            let br = sd_b.basis[(r2, i1)];
            if br.norm_sqr() == 0.0 {
                continue;
            }
            for c2 in 0..d {
                let proj = br * sd_b.basis[(c2, i1)].conj();
                for g2 in 0..d {
                    chif[(r2 * d + g2, c2 * d + g2)] += proj * chi_total(p, z1, avals[g2]);
                }
            }
        }
    }

    let w = ff.matmul(&chif);
    let unitarity = w.unitarity_defect() / (d as f64);
    Ok(MultUnitary {
        lattice: p.clone(),
        w,
        report: WBuildReport {
            ab_inv_normality,
            ray_distance,
            unitarity,
        },
    })
}

/// Δ(x) = W (x ⊗ I) W†.
pub fn comultiply(wu: &MultUnitary, x: &CMat) -> Result<CMat> {
    let d = wu.lattice.dim();
    x.check_dim(d)?;
    let placed = crate::legs::kron(x, &CMat::identity(d));
    Ok(wu.w.matmul(&placed).matmul(&wu.w.adjoint()))
}

/// Bulk-windowed pentagon residual ‖W₂₃W₁₂ − W₁₂W₁₃W₂₃‖, rms-normalized.
/// Dense triple-leg evaluation; refuses above the configured NM budget.
pub fn pentagon_residual(wu: &MultUnitary, pol: &TolerancePolicy) -> Result<f64> {
    let d = wu.lattice.dim();
    if d > pol.dense_leg_budget {
        return Err(Error::MemoryBudget {
            dim: d,
            budget: pol.dense_leg_budget,
        });
    }
    let dims = (d, d, d);
    let w23 = TwoLeg {
        mat: &wu.w,
        pattern: LegPattern::TwoThree,
    };
    let w12 = TwoLeg {
        mat: &wu.w,
        pattern: LegPattern::OneTwo,
    };
    let w13 = TwoLeg {
        mat: &wu.w,
        pattern: LegPattern::OneThree,
    };
    let lhs = two_leg_product(&w23, &w12, dims)?;
    let r1 = two_leg_product(&w13, &w23, dims)?;
    let rhs = two_leg_times_big(&w12, &r1, dims)?;
    let sel1 = bulk_selector(&wu.lattice, pol.window_fraction);
    let sel = kron_selector(&kron_selector(&sel1, &sel1), &sel1);
    let rank: f64 = sel.iter().sum();
    Ok(lhs.sub_ref(&rhs).window(&sel).fro_norm() / rank.sqrt().max(1.0))
}

/// Sampled pentagon residual through probe vectors (structured mode for
/// lattices above the dense budget). Deterministic for a fixed seed.
pub fn pentagon_residual_probes(
    wu: &MultUnitary,
    probes: usize,
    seed: u64,
    pol: &TolerancePolicy,
) -> f64 {
    let d = wu.lattice.dim();
    let dims = (d, d, d);
    let total = d * d * d;
    let sel1 = bulk_selector(&wu.lattice, pol.window_fraction);
    let sel = kron_selector(&kron_selector(&sel1, &sel1), &sel1);
    let w23 = TwoLeg {
        mat: &wu.w,
        pattern: LegPattern::TwoThree,
    };
    let w12 = TwoLeg {
        mat: &wu.w,
        pattern: LegPattern::OneTwo,
    };
    let w13 = TwoLeg {
        mat: &wu.w,
        pattern: LegPattern::OneThree,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut acc = 0.0;
    for _ in 0..probes.max(1) {
        let v: Vec<Complex64> = (0..total)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let lhs = two_leg_apply(&w23, &two_leg_apply(&w12, &v, dims), dims);
        let rhs = two_leg_apply(
            &w12,
            &two_leg_apply(&w13, &two_leg_apply(&w23, &v, dims), dims),
            dims,
        );
        let diff2: f64 = lhs
            .iter()
            .zip(&rhs)
            .zip(&sel)
            .map(|((x, y), &s)| (x - y).norm_sqr() * s)
            .sum();
        acc += diff2 / (norm * norm);
    }
    (acc / probes.max(1) as f64).sqrt()
}

/// Bulk-windowed relative residuals of Δ(a) = a⊗a and Δ(b) = a⊗b + b⊗I.
pub fn delta_checks(wu: &MultUnitary, pair: &GPair, pol: &TolerancePolicy) -> Result<(f64, f64)> {
    let p = &pair.lattice;
    let d = p.dim();
    let sel1 = bulk_selector(p, pol.window_fraction);
    let sel = kron_selector(&sel1, &sel1);
    let da = comultiply(wu, &pair.a)?;
    let target_a = crate::legs::kron(&pair.a, &pair.a);
    let res_a = da.sub_ref(&target_a).window(&sel).fro_norm()
        / target_a.window(&sel).fro_norm().max(f64::MIN_POSITIVE);
    let db = comultiply(wu, &pair.b)?;
    let target_b = crate::legs::kron(&pair.a, &pair.b)
        .add_ref(&crate::legs::kron(&pair.b, &CMat::identity(d)));
    let res_b = db.sub_ref(&target_b).window(&sel).fro_norm()
        / target_b.window(&sel).fro_norm().max(f64::MIN_POSITIVE);
    Ok((res_a, res_b))
}
