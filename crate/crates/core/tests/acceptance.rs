//! Acceptance suite. One test per criterion; each prints a PASS/FAIL line
//! with the measured residual and the gate it is held to.
//!
//! Exact-layer criteria use fixed algebraic gates. Approximation-layer
//! criteria gate at 2× the committed calibration (calibration.toml,
//! regenerated by `qazb calibrate`).
//!
//! Four criteria are structurally unattainable in a finite lattice model and
//! fail here by design rather than being weakened; see README "Finite-size
//! behavior":
//!  - the q² commutation of the special pair (exact phase relation and
//!    ab = q²ba exclude each other on any finite lattice),
//!  - pentagon and Δ(a) residuals strictly below the trivial-table baseline
//!    (the baseline is the classical finite group, which is exact),
//!  - the 10× negative-control margin,
//!  - the ≥90% lattice match for the regular pair's d = ab⁻¹ (its spectrum
//!    sits between the lattice shells).

use std::sync::OnceLock;
use std::time::Instant;

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qazb_core::eig::{hermitian_eig, quasi_normal_eig, z_inverse, z_transform};
use qazb_core::lattice::{make_lattice, GammaBar, GroupElement, LatticeParams};
use qazb_core::model::{
    canonical_pair, char_unitary, dual_action, fourier_chi, translation_unitary, weyl_decompose,
    GPair,
};
use qazb_core::multiplicative::{build_w, delta_checks, pentagon_residual, MultUnitary};
use qazb_core::qexp::{gauge_distance, make_sr_pair, solve, QExp, SolveOptions, SolveReport};
use qazb_core::rep::{
    build_v, decompose, rep_residual, sample_cd_pair, CDPair, Representation,
};
use qazb_core::{Calibration, CMat, TolerancePolicy};

fn criterion(name: &str, residual: f64, gate: f64) {
    let pass = residual <= gate;
    println!(
        "ACCEPTANCE {:<44} {}  residual {:>12.4e}  gate {:>12.4e}",
        name,
        if pass { "PASS" } else { "FAIL" },
        residual,
        gate
    );
    assert!(pass, "{name}: residual {residual:.4e} above gate {gate:.4e}");
}

fn criterion_below(name: &str, value: f64, must_be_below: f64) {
    let pass = value < must_be_below;
    println!(
        "ACCEPTANCE {:<44} {}  value {:>12.4e}  must be below {:>12.4e}",
        name,
        if pass { "PASS" } else { "FAIL" },
        value,
        must_be_below
    );
    assert!(pass, "{name}: {value:.4e} not below {must_be_below:.4e}");
}

struct Fixture {
    p: LatticeParams,
    pol: TolerancePolicy,
    pair: GPair,
    f: QExp,
    solve_report: SolveReport,
    wu: MultUnitary,
    cal: Calibration,
}

static FIXTURE: OnceLock<Fixture> = OnceLock::new();

fn fixture() -> &'static Fixture {
    FIXTURE.get_or_init(|| {
        let p = make_lattice(6, 2).unwrap();
        let pol = TolerancePolicy::default();
        let pair = canonical_pair(&p, &pol);
        let cal = Calibration::embedded();
        let opts = SolveOptions {
            seed: cal.seed,
            ..Default::default()
        };
        let (f, solve_report) = solve(&p, &opts, &pol).unwrap();
        let wu = build_w(&pair, &f, &pol).unwrap();
        Fixture {
            p,
            pol,
            pair,
            f,
            solve_report,
            wu,
            cal,
        }
    })
}

// ---------------------------------------------------------------- exact layer

#[test]
fn bicharacter_suite() {
    let t0 = Instant::now();
    let p = make_lattice(6, 3).unwrap();
    let els: Vec<GroupElement> = p.elements().collect();
    let mut sym: f64 = 0.0;
    let mut unimod: f64 = 0.0;
    let mut mult: f64 = 0.0;
    for &g in &els {
        for &h in &els {
            sym = sym.max((p.chi(g, h) - p.chi(h, g)).norm());
            unimod = unimod.max((p.chi(g, h).norm() - 1.0).abs());
            for &f in &els {
                let (gh, wrapped) = p.mul(g, h);
                if !wrapped {
                    mult = mult.max((p.chi(gh, f) - p.chi(g, f) * p.chi(h, f)).norm());
                    // second slot by symmetry, checked explicitly anyway
                    mult = mult.max((p.chi(f, gh) - p.chi(f, g) * p.chi(f, h)).norm());
                }
            }
        }
    }
    let mut nondeg_worst: f64 = f64::INFINITY;
    for &g in &els {
        if g.is_identity() {
            continue;
        }
        let max_dev = els
            .iter()
            .map(|&h| (p.chi(g, h) - Complex64::new(1.0, 0.0)).norm())
            .fold(0.0, f64::max);
        nondeg_worst = nondeg_worst.min(max_dev);
    }
    criterion("bicharacter symmetry (6,3)", sym, 1e-12);
    criterion("bicharacter multiplicativity (6,3)", mult, 1e-12);
    criterion("bicharacter unimodularity (6,3)", unimod, 1e-12);
    // nondegenerate: every g != identity has some partner with chi far from 1
    criterion_below("bicharacter nondegeneracy (6,3)", 1e-12, nondeg_worst);
    let dt = t0.elapsed().as_secs_f64();
    criterion("bicharacter suite runtime (s)", dt, 5.0);
}

#[test]
fn canonical_pair_relations() {
    let pol = TolerancePolicy::default();
    for m in [2u32, 3, 4] {
        let p = make_lattice(6, m).unwrap();
        let f = fourier_chi(&p);
        criterion(
            &format!("fourier unitarity (6,{m})"),
            f.unitarity_defect(),
            1e-12,
        );
        let pair = canonical_pair(&p, &pol);
        criterion(
            &format!("phase relation (6,{m})"),
            pair.certificate.phase_relation,
            1e-10,
        );
        criterion(
            &format!("modulus relation non-wrap (6,{m})"),
            pair.certificate.modulus_relation_nonwrap,
            1e-10,
        );
        // Sp b = Sp a as multisets
        let sd = quasi_normal_eig(&pair.b, p.n, &pol);
        let mut avals: Vec<Complex64> = p.elements().map(|g| p.embed(g)).collect();
        let mut worst: f64 = 0.0;
        for z in &sd.eigenvalues {
            let (i, d) = avals
                .iter()
                .enumerate()
                .map(|(i, w)| (i, (z - w).norm()))
                .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
                .unwrap();
            worst = worst.max(d);
            avals.remove(i);
        }
        criterion(&format!("Sp b = Sp a multiset (6,{m})"), worst, 1e-10);
    }
}

#[test]
fn z_transform_roundtrip_50_normals() {
    let pol = TolerancePolicy::default();
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let raw = CMat::from_fn(8, |_, _| {
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        let basis = hermitian_eig(&raw.add_ref(&raw.adjoint()), &pol).unwrap().basis;
        let eigs: Vec<Complex64> = (0..8)
            .map(|_| Complex64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)))
            .collect();
        let t = CMat::conjugate_diag(&basis, &eigs);
        let z = z_transform(&t, &pol).unwrap();
        let back = z_inverse(&z, &pol).unwrap();
        worst = worst.max(back.dist(&t) / (1.0 + t.fro_norm()));
    }
    criterion("z-transform roundtrip, 50 random normals", worst, 1e-10);
}

#[test]
fn dual_action_criteria() {
    let pol = TolerancePolicy::default();
    let p = make_lattice(6, 3).unwrap();
    let pair = canonical_pair(&p, &pol);
    let t = GroupElement::new(2, 1);
    let ut = char_unitary(t, &pair, &pol).unwrap();
    let mut res_b: f64 = 0.0;
    let mut res_u: f64 = 0.0;
    let mut res_law: f64 = 0.0;
    for gamma in p.elements() {
        let (tb, _) = dual_action(gamma, &pair.b, &p);
        res_b = res_b.max(tb.dist(&pair.b));
        let (tu, _) = dual_action(gamma, &ut, &p);
        res_u = res_u.max(tu.dist(&ut.scale(p.chi(gamma, t))));
        for gamma2 in p.elements() {
            let (g12, wrapped) = p.mul(gamma, gamma2);
            if wrapped {
                continue;
            }
            let (l1, _) = translation_unitary(gamma, &p);
            let (l2, _) = translation_unitary(gamma2, &p);
            let (l12, _) = translation_unitary(g12, &p);
            res_law = res_law.max(l1.matmul(&l2).dist(&l12));
        }
    }
    criterion("dual action fixes b", res_b, 1e-12);
    criterion("dual action scales U_t by chi", res_u, 1e-10);
    criterion("dual action group law (wrap-free)", res_law, 1e-10);
}

#[test]
fn weyl_reconstruction_matrix_units() {
    let pol = TolerancePolicy::default();
    let p = make_lattice(6, 2).unwrap();
    let pair = canonical_pair(&p, &pol);
    let d = p.dim();
    let f = fourier_chi(&p);
    let uts: Vec<CMat> = p
        .elements()
        .map(|t| char_unitary(t, &pair, &pol).unwrap())
        .collect();
    let mut worst: f64 = 0.0;
    for r in 0..d {
        for c in 0..d {
            let mut unit = CMat::zeros(d);
            unit[(r, c)] = Complex64::new(1.0, 0.0);
            let table = weyl_decompose(&unit, &pair).unwrap();
            let mut rec = CMat::zeros(d);
            for ((_, coeff), ut) in table.coeffs.iter().zip(&uts) {
                let gb = f.adjoint().matmul(&CMat::from_diag(coeff)).matmul(&f);
                rec = rec.add_ref(&gb.matmul(ut));
            }
            worst = worst.max(rec.dist(&unit));
        }
    }
    criterion("weyl reconstruction on matrix units (6,2)", worst, 1e-10);
}

#[test]
fn sr_pair_q2_identity() {
    // Structurally unattainable in the finite model: the exact phase
    // relation forces b onto phase-step one, ab = q²ba onto step two.
    // Asserted as stated; the measured value is the honest outcome.
    let pol = TolerancePolicy::default();
    let p = make_lattice(6, 2).unwrap();
    let pair = canonical_pair(&p, &pol);
    let sr = make_sr_pair(&pair, &pol).unwrap();
    criterion("special pair RS = q^2 SR (6,2)", sr.qsq_residual, 1e-10);
}

#[test]
fn extract_c_exactness_20_pairs() {
    let t0 = Instant::now();
    let fx = fixture();
    let (p, pol, pair) = (&fx.p, &fx.pol, &fx.pair);
    let mut rng = ChaCha8Rng::seed_from_u64(9000);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let kdim = rng.gen_range(3..=6);
        let picks: Vec<GroupElement> = (0..kdim)
            .map(|_| p.element(rng.gen_range(0..p.dim())))
            .collect();
        let cvals: Vec<Complex64> = picks.iter().map(|&g| p.embed(g)).collect();
        let cd = CDPair::new(CMat::from_diag(&cvals), CMat::zeros(kdim), p, pol).unwrap();
        let v = build_v(&cd, pair, &fx.f, pol).unwrap();
        let (_, crep) = qazb_core::rep::extract_c(&v, pair, pol).unwrap();
        // multiset equality of the recovered lattice elements under the gate
        let mut want = picks.clone();
        want.sort();
        let mut got = crep.elements.clone();
        got.sort();
        assert_eq!(want, got, "planted and recovered elements differ");
        worst = worst.max(crep.worst_char_score);
    }
    criterion("extract_c synthesis inversion, 20 pairs", worst, 1e-6);
    criterion(
        "extract_c suite runtime (s)",
        t0.elapsed().as_secs_f64(),
        30.0,
    );
}

// -------------------------------------------------------- approximation layer

#[test]
fn qexp_solve_criteria() {
    let fx = fixture();
    let cal = &fx.cal;
    criterion(
        "qexp objective vs calibration",
        fx.solve_report.objective,
        cal.gate(cal.qexp_objective),
    );
    criterion(
        "qexp commutator residual",
        fx.solve_report.commutator_residual,
        cal.gate(cal.qexp_commutator),
    );
    criterion(
        "qexp equation residual",
        fx.solve_report.equation_residual,
        cal.gate(cal.qexp_equation),
    );
    // trivial solution rejected
    criterion_below(
        "qexp trivial solution rejected",
        1e-3,
        fx.solve_report.circular_variance,
    );
    // dilation-gauge agreement between two independent seeds
    let opts2 = SolveOptions {
        seed: cal.seed + 1000,
        ..Default::default()
    };
    let (f2, _) = solve(&fx.p, &opts2, &fx.pol).unwrap();
    let gd = gauge_distance(&fx.f, &f2);
    criterion(
        "qexp two-seed gauge agreement",
        gd,
        cal.gate(cal.qexp_gauge_pair_distance) + 1e-9,
    );
    // dilation covariance: residuals of a dilated table within 2x
    let (fd, _) = qazb_core::qexp::dilate(&fx.f, GroupElement::new(1, 0));
    let base = qazb_core::qexp::shift_objective(&fx.f, &fx.pair, fx.pol.window_fraction, &fx.pol);
    let dil = qazb_core::qexp::shift_objective(&fd, &fx.pair, fx.pol.window_fraction, &fx.pol);
    criterion("qexp dilation-gauge covariance", dil, 2.0 * base);
}

#[test]
fn w_unitarity_and_pentagon() {
    let fx = fixture();
    let cal = &fx.cal;
    criterion("w unitarity", fx.wu.report.unitarity, 1e-9);
    let pent = pentagon_residual(&fx.wu, &fx.pol).unwrap();
    criterion("pentagon vs calibration", pent, cal.gate(cal.pentagon_solved));
}

#[test]
fn pentagon_strictly_below_trivial_baseline() {
    // Unattainable: with F = 1 the model is the classical finite group and
    // its pentagon is exact, so no structured table can sit 5x below it.
    let fx = fixture();
    let pent = pentagon_residual(&fx.wu, &fx.pol).unwrap();
    let wu0 = build_w(&fx.pair, &QExp::constant_one(&fx.p), &fx.pol).unwrap();
    let base = pentagon_residual(&wu0, &fx.pol).unwrap();
    criterion_below("pentagon below trivial baseline by 5x", pent, base / 5.0);
}

#[test]
fn delta_residuals() {
    let fx = fixture();
    let cal = &fx.cal;
    let (res_a, res_b) = delta_checks(&fx.wu, &fx.pair, &fx.pol).unwrap();
    criterion("delta(a) vs calibration", res_a, cal.gate(cal.delta_res_a));
    criterion("delta(b) vs calibration", res_b, cal.gate(cal.delta_res_b));
    let wu0 = build_w(&fx.pair, &QExp::constant_one(&fx.p), &fx.pol).unwrap();
    let (_, res_b0) = delta_checks(&wu0, &fx.pair, &fx.pol).unwrap();
    criterion_below("delta(b) strictly below trivial baseline", res_b, res_b0);
}

#[test]
fn delta_a_strictly_below_trivial_baseline() {
    // Unattainable: the trivial table leaves Delta(a) exact (classical
    // group), and any structure in F necessarily raises it.
    let fx = fixture();
    let (res_a, _) = delta_checks(&fx.wu, &fx.pair, &fx.pol).unwrap();
    let wu0 = build_w(&fx.pair, &QExp::constant_one(&fx.p), &fx.pol).unwrap();
    let (res_a0, _) = delta_checks(&wu0, &fx.pair, &fx.pol).unwrap();
    criterion_below("delta(a) strictly below trivial baseline", res_a, res_a0);
}

#[test]
fn representation_roundtrips() {
    let fx = fixture();
    let cal = &fx.cal;
    let (p, pol, pair) = (&fx.p, &fx.pol, &fx.pair);
    let gate_rep = cal.gate(cal.rep_residual_built);
    let mut worst_rep: f64 = 0.0;
    let mut worst_roundtrip: f64 = 0.0;
    let mut worst_por1: f64 = 0.0;
    let mut worst_por2: f64 = 0.0;
    let mut worst_stad1: f64 = 0.0;
    let mut d_matched_all = true;
    for i in 0..10u64 {
        let cd = sample_cd_pair(pair, cal.seed.wrapping_add(100 + i), pol).unwrap();
        let v = build_v(&cd, pair, &fx.f, pol).unwrap();
        worst_rep = worst_rep.max(rep_residual(&v, &fx.wu, pol).unwrap());
        let (cd2, drep) = decompose(&v, &fx.wu, pair, &fx.f, pol).unwrap();
        worst_roundtrip = worst_roundtrip.max(drep.roundtrip);
        worst_por1 = worst_por1.max(drep.por1);
        worst_por2 = worst_por2.max(drep.por2);
        worst_stad1 = worst_stad1.max(drep.stad1);
        // c recovered exactly as a multiset under the 1e-6 gate
        let sd1 = quasi_normal_eig(&cd.c, p.n, pol);
        let sd2 = quasi_normal_eig(&cd2.c, p.n, pol);
        let mut want = sd1.eigenvalues.clone();
        for z in &sd2.eigenvalues {
            let (idx, dd) = want
                .iter()
                .enumerate()
                .map(|(idx, w)| (idx, (z - w).norm()))
                .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
                .unwrap();
            assert!(dd <= 1e-6, "c eigenvalue off by {dd:.3e}");
            want.remove(idx);
        }
        // d lattice match rate on the planted lattice pair
        let sdd1 = quasi_normal_eig(&cd.d, p.n, pol);
        let sdd2 = quasi_normal_eig(&cd2.d, p.n, pol);
        let mut wantd = sdd1.eigenvalues.clone();
        let mut hits = 0usize;
        for z in &sdd2.eigenvalues {
            let (idx, dd) = wantd
                .iter()
                .enumerate()
                .map(|(idx, w)| (idx, (z - w).norm()))
                .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
                .unwrap();
            if dd <= 1e-6 {
                hits += 1;
            }
            wantd.remove(idx);
        }
        if (hits as f64) < 0.9 * p.dim() as f64 {
            d_matched_all = false;
        }
        // self-duality: the recovered pair passes the same domain predicate
        criterion(
            &format!("self-duality certificate, pair {i}"),
            cd2.certificate.phase_relation,
            cd.certificate.phase_relation.max(1e-10) * 2.0,
        );
    }
    criterion("rep residual, 10 built pairs", worst_rep, gate_rep);
    criterion(
        "decompose roundtrip, 10 pairs",
        worst_roundtrip,
        cal.gate(cal.decompose_roundtrip).max(1e-9),
    );
    criterion("por1, 10 pairs", worst_por1, cal.gate(cal.por1_built).max(1e-9));
    criterion("por2, 10 pairs", worst_por2, cal.gate(cal.por2_built).max(1e-9));
    criterion("stad1, 10 pairs", worst_stad1, cal.gate(cal.stad1_built).max(1e-9));
    criterion_below(
        "d lattice-match rate >= 90%, 10 pairs",
        0.9,
        if d_matched_all { 1.0 } else { 0.0 },
    );
    // the regular pair reproduces W and stays under the gate
    let reg = Representation {
        kdim: p.dim(),
        v: fx.wu.w.clone(),
        unitarity: fx.wu.report.unitarity,
    };
    criterion(
        "rep residual, regular pair",
        rep_residual(&reg, &fx.wu, pol).unwrap(),
        cal.gate(cal.rep_residual_built.max(cal.rep_residual_regular)),
    );
    // one-dimensional representation
    let g0 = GroupElement::new(1, -1);
    let cd1 = CDPair::new(CMat::from_diag(&[p.embed(g0)]), CMat::zeros(1), p, pol).unwrap();
    let v1 = build_v(&cd1, pair, &fx.f, pol).unwrap();
    criterion(
        "rep residual, one-dimensional",
        rep_residual(&v1, &fx.wu, pol).unwrap(),
        cal.gate(cal.rep_residual_onedim).max(1e-9),
    );
}

#[test]
fn regular_pair_d_match_rate() {
    // Unattainable at desk scale: Sp(ab⁻¹) sits between the lattice shells
    // (half-sector phases, fractional log-moduli), so the exhaustive lattice
    // match cannot reach 90%. Measured honestly against the stated gate.
    let fx = fixture();
    let cal = &fx.cal;
    criterion_below(
        "regular pair d lattice-match rate >= 90%",
        0.9,
        cal.regular_d_match_rate + 1e-12,
    );
}

#[test]
fn negative_control_margin() {
    // Unattainable at desk scale: built-representation residuals are
    // dominated by the finite functional-equation defect, which sits at the
    // same order as a random unitary's residual.
    let fx = fixture();
    let cal = &fx.cal;
    let d = fx.p.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(cal.seed.wrapping_add(777));
    let raw = CMat::from_fn(d * d, |_, _| {
        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    });
    let basis = hermitian_eig(&raw.add_ref(&raw.adjoint()), &fx.pol).unwrap().basis;
    let vneg = Representation {
        kdim: d,
        v: basis,
        unitarity: 0.0,
    };
    let res = rep_residual(&vneg, &fx.wu, &fx.pol).unwrap();
    let gate = fx.cal.gate(fx.cal.rep_residual_built);
    criterion_below("negative control 10x above the gate", 10.0 * gate, res);
}

#[test]
fn negative_control_fails_the_gate() {
    // the weaker, attainable direction: a random unitary is rejected
    let fx = fixture();
    let d = fx.p.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(fx.cal.seed.wrapping_add(777));
    let raw = CMat::from_fn(d * d, |_, _| {
        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    });
    let basis = hermitian_eig(&raw.add_ref(&raw.adjoint()), &fx.pol).unwrap().basis;
    let vneg = Representation {
        kdim: d,
        v: basis,
        unitarity: 0.0,
    };
    let res = rep_residual(&vneg, &fx.wu, &fx.pol).unwrap();
    criterion_below(
        "negative control rejected by the gate",
        fx.cal.gate(fx.cal.rep_residual_built),
        res,
    );
}

#[test]
fn trivial_representation_decomposes() {
    let fx = fixture();
    let (p, pol) = (&fx.p, &fx.pol);
    let kdim = 3;
    let v = Representation {
        kdim,
        v: CMat::identity(kdim * p.dim()),
        unitarity: 0.0,
    };
    let (cd, rep) = decompose(&v, &fx.wu, &fx.pair, &fx.f, pol).unwrap();
    for m in &rep.extract_c.elements {
        assert!(m.is_identity(), "trivial rep must sit at the identity");
    }
    for e in &rep.extract_d.elements {
        assert!(matches!(e, GammaBar::Zero), "trivial rep must have d = 0");
    }
    criterion("trivial rep: c at identity, d = 0", cd.d.fro_norm(), 1e-9);
}
