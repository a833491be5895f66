//! The brute-force calibration run: measures every residual level the
//! approximate layer gates on, at the reference lattice, and emits the
//! record committed as calibration.toml.

use anyhow::{anyhow, Result};
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qazb_core::eig::quasi_normal_eig;
use qazb_core::lattice::{GammaBar, GroupElement, LatticeParams};
use qazb_core::model::{canonical_pair, fourier_chi};
use qazb_core::multiplicative::{build_w, delta_checks, pentagon_residual};
use qazb_core::qexp::{gauge_distance, make_sr_pair, solve, QExp, SolveOptions};
use qazb_core::rep::{build_v, decompose, rep_residual, sample_cd_pair, Representation};
use qazb_core::{Calibration, CMat, TolerancePolicy};

pub fn run(n: u32, m: u32, seed: u64) -> Result<Calibration> {
    let p = LatticeParams::new(n, m).map_err(|e| anyhow!("{e}"))?;
    let pol = TolerancePolicy::default();
    let pair = canonical_pair(&p, &pol);
    let d = p.dim();

    eprintln!("calibrate: exact layer");
    let f_mat = fourier_chi(&p);
    let fourier_unitarity = f_mat.unitarity_defect();
    let cert = &pair.certificate;
    let sr = make_sr_pair(&pair, &pol).map_err(|e| anyhow!("{e}"))?;

    eprintln!("calibrate: qexp solve (two independent runs)");
    let opts = SolveOptions {
        seed,
        ..Default::default()
    };
    let (f1, rep1) = solve(&p, &opts, &pol).map_err(|e| anyhow!("{e}"))?;
    let opts2 = SolveOptions {
        seed: seed + 1000,
        ..Default::default()
    };
    let (f2, _) = solve(&p, &opts2, &pol).map_err(|e| anyhow!("{e}"))?;
    let gauge = gauge_distance(&f1, &f2);

    eprintln!("calibrate: multiplicative unitary");
    let wu = build_w(&pair, &f1, &pol).map_err(|e| anyhow!("{e}"))?;
    let pentagon_solved = pentagon_residual(&wu, &pol).map_err(|e| anyhow!("{e}"))?;
    let (delta_a, delta_b) = delta_checks(&wu, &pair, &pol).map_err(|e| anyhow!("{e}"))?;
    let wu0 = build_w(&pair, &QExp::constant_one(&p), &pol).map_err(|e| anyhow!("{e}"))?;
    let pentagon_baseline = pentagon_residual(&wu0, &pol).map_err(|e| anyhow!("{e}"))?;
    let (delta_a0, delta_b0) = delta_checks(&wu0, &pair, &pol).map_err(|e| anyhow!("{e}"))?;

    eprintln!("calibrate: representations");
    let cd1 = crate::commands::onedim_pair(&p, GroupElement::new(1, -1), &pol)?;
    let v1 = build_v(&cd1, &pair, &f1, &pol).map_err(|e| anyhow!("{e}"))?;
    let rep_onedim = rep_residual(&v1, &wu, &pol).map_err(|e| anyhow!("{e}"))?;

    let mut rep_built: f64 = 0.0;
    let mut roundtrip: f64 = 0.0;
    let mut por1: f64 = 0.0;
    let mut por2: f64 = 0.0;
    let mut leg: f64 = 0.0;
    let mut stad1: f64 = 0.0;
    for i in 0..10u64 {
        let cd = sample_cd_pair(&pair, seed.wrapping_add(100 + i), &pol)
            .map_err(|e| anyhow!("{e}"))?;
        let v = build_v(&cd, &pair, &f1, &pol).map_err(|e| anyhow!("{e}"))?;
        rep_built = rep_built.max(rep_residual(&v, &wu, &pol).map_err(|e| anyhow!("{e}"))?);
        let (_, drep) = decompose(&v, &wu, &pair, &f1, &pol).map_err(|e| anyhow!("{e}"))?;
        roundtrip = roundtrip.max(drep.roundtrip);
        por1 = por1.max(drep.por1);
        por2 = por2.max(drep.por2);
        leg = leg.max(drep.leg_identity);
        stad1 = stad1.max(drep.stad1);
    }

    // the regular pair reproduces W; decompose it and score the d matching
    let sd_b = quasi_normal_eig(&pair.b, p.n, &pol);
    let inv: Vec<Complex64> = sd_b.eigenvalues.iter().map(|z| 1.0 / z).collect();
    let binv = CMat::conjugate_diag(&sd_b.basis, &inv);
    let x = pair.a.matmul(&binv);
    let vreg = Representation {
        kdim: d,
        v: wu.w.clone(),
        unitarity: wu.report.unitarity,
    };
    let rep_regular = rep_residual(&vreg, &wu, &pol).map_err(|e| anyhow!("{e}"))?;
    let regular_d_match_rate = regular_match_rate(&vreg, &x, &pair, &f1, &wu, &pol)?;

    // negative control: a random unitary on K ⊗ H
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(777));
    let raw = CMat::from_fn(d * d, |_, _| {
        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    });
    let herm = raw.add_ref(&raw.adjoint());
    let qbasis = qazb_core::eig::hermitian_eig(&herm, &pol)
        .map_err(|e| anyhow!("{e}"))?
        .basis;
    let vneg = Representation {
        kdim: d,
        v: qbasis,
        unitarity: 0.0,
    };
    let rep_negative = rep_residual(&vneg, &wu, &pol).map_err(|e| anyhow!("{e}"))?;

    Ok(Calibration {
        version: "v1".into(),
        n,
        m,
        seed,
        fourier_unitarity,
        phase_relation: cert.phase_relation,
        modulus_relation_nonwrap: cert.modulus_relation_nonwrap,
        sr_qsq_residual: sr.qsq_residual,
        sr_sum_normality: sr.sum_normality,
        ab_inv_normality: wu.report.ab_inv_normality,
        ab_inv_ray_distance: wu.report.ray_distance,
        qexp_objective: rep1.objective,
        qexp_commutator: rep1.commutator_residual,
        qexp_equation: rep1.equation_residual,
        qexp_circular_variance: rep1.circular_variance,
        qexp_gauge_pair_distance: gauge,
        w_unitarity: wu.report.unitarity,
        pentagon_solved,
        pentagon_baseline,
        delta_res_a: delta_a,
        delta_res_b: delta_b,
        delta_res_a_baseline: delta_a0,
        delta_res_b_baseline: delta_b0,
        rep_residual_onedim: rep_onedim,
        rep_residual_built: rep_built,
        rep_residual_regular: rep_regular,
        rep_negative_control: rep_negative,
        decompose_roundtrip: roundtrip,
        por1_built: por1,
        por2_built: por2,
        leg_identity_built: leg,
        stad1_built: stad1,
        regular_d_match_rate,
    })
}

/// Decompose the regular representation (V = W) and score how often the
/// matched lattice point is the nearest lattice point to the true
/// d-eigenvalue on that joint eigenvector.
fn regular_match_rate(
    vreg: &Representation,
    x_true: &CMat,
    pair: &qazb_core::model::GPair,
    f: &QExp,
    wu: &qazb_core::multiplicative::MultUnitary,
    pol: &TolerancePolicy,
) -> Result<f64> {
    let p = &pair.lattice;
    let (_, drep) = decompose(vreg, wu, pair, f, pol).map_err(|e| anyhow!("{e}"))?;
    // joint basis of the factor blocks is the shared Jacobi basis of ab⁻¹
    let sd_x = quasi_normal_eig(x_true, p.n, pol);
    let mut hits = 0usize;
    let kdim = vreg.kdim;
    for (i, matched) in drep.extract_d.elements.iter().enumerate() {
        // Rayleigh value of the true parameter on the i-th basis vector
        let col: Vec<Complex64> = (0..kdim).map(|r| sd_x.basis[(r, i)]).collect();
        let xv = x_true.apply(&col);
        let z: Complex64 = col.iter().zip(&xv).map(|(a, b)| a.conj() * b).sum();
        let mut best = (z.norm(), GammaBar::Zero);
        for g in p.elements() {
            let dist = (z - p.embed(g)).norm();
            if dist < best.0 {
                best = (dist, GammaBar::Point(g));
            }
        }
        let same = match (matched, best.1) {
            (GammaBar::Zero, GammaBar::Zero) => true,
            (GammaBar::Point(a), GammaBar::Point(b)) => *a == b,
            _ => false,
        };
        if same {
            hits += 1;
        }
    }
    Ok(hits as f64 / kdim as f64)
}
