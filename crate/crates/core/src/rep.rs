//! Unitary representations V = F(d ⊗ b) · χ(c ⊗ I, I ⊗ a) on K⊗H, the
//! representation-equation residual against W, and the decomposition of a
//! representation back into its parameter pair (c, d).
//!
//! Extraction routes:
//!  - c comes from the dual action: X_γ = V†·(id⊗θ_γ)(V) collapses to
//!    u_γ ⊗ I exactly in the finite model; the commuting unitaries u_γ are
//!    jointly diagonalized and each joint eigenvector's character tuple is
//!    matched exhaustively against {χ(m, ·)} (finite SNAG).
//!  - the remaining factor f = V·χ(c⊗I, I⊗a)† is block-diagonal in the
//!    b-eigenbasis of the H leg; its K-blocks f_β are functions F(β·d), so d
//!    is read off their joint eigenbasis by exhaustive lattice matching.
//!
//! Identities that translate the modulus direction (por1, por2, the leg
//! identity, stad1) are checked on the spectral subspace of the K-side
//! parameter excluding the shells that wrap, and bulk-windowed on H legs.

use num_complex::Complex64;

use crate::cmat::CMat;
use crate::eig::{joint_diag, quasi_normal_eig};
use crate::lattice::{GammaBar, GroupElement, LatticeParams};
use crate::legs::{two_leg_product, two_leg_times_big, LegPattern, TwoLeg};
use crate::model::{
    bulk_selector, check_domain, kron_selector, translation_unitary, DomainReport, GPair,
};
use crate::multiplicative::{assemble_leg2_blocks, chi_total, MultUnitary};
use crate::qexp::QExp;
use crate::tolerance::TolerancePolicy;
use crate::{Error, Result};

/// Parameter pair of a representation: normal c (no kernel) and normal d on
/// the lattice rays (d may have a kernel), with the same domain certificate
/// as the group pair.
#[derive(Debug, Clone)]
pub struct CDPair {
    pub kdim: usize,
    pub c: CMat,
    pub d: CMat,
    pub certificate: DomainReport,
}

impl CDPair {
    pub fn new(c: CMat, d: CMat, p: &LatticeParams, pol: &TolerancePolicy) -> Result<Self> {
        if c.dim() != d.dim() {
            return Err(Error::DimensionMismatch {
                expected: c.dim(),
                got: d.dim(),
            });
        }
        let certificate = check_domain(&c, &d, p, pol);
        Ok(CDPair {
            kdim: c.dim(),
            c,
            d,
            certificate,
        })
    }
}

#[derive(Debug, Clone)]
pub struct Representation {
    pub kdim: usize,
    pub v: CMat,
    /// ‖V V† − I‖_F / √dim
    pub unitarity: f64,
}

struct CBasis {
    basis: CMat,
    eigs: Vec<Complex64>,
}

fn c_eigenbasis(c: &CMat, p: &LatticeParams, pol: &TolerancePolicy) -> CBasis {
    let sd = quasi_normal_eig(c, p.n, pol);
    CBasis {
        basis: sd.basis,
        eigs: sd.eigenvalues,
    }
}

/// χ(c ⊗ I, I ⊗ a) assembled in the (c-eigen, position) product basis.
fn chi_factor(cb: &CBasis, p: &LatticeParams) -> CMat {
    let k = cb.eigs.len();
    let d = p.dim();
    let avals: Vec<Complex64> = p.elements().map(|g| p.embed(g)).collect();
    let mut out = CMat::zeros(k * d);
    for m in 0..k {
        for r1 in 0..k {
            let br = cb.basis[(r1, m)];
            if br.norm_sqr() == 0.0 {
                continue;
            }
            for c1 in 0..k {
                let proj = br * cb.basis[(c1, m)].conj();
                if proj.norm_sqr() == 0.0 {
                    continue;
                }
                for g2 in 0..d {
                    out[(r1 * d + g2, c1 * d + g2)] += proj * chi_total(p, cb.eigs[m], avals[g2]);
                }
            }
        }
    }
    out
}

/// F(d ⊗ s·b) for a scalar s: blocks F(s·β·d) over the b-eigenbasis of the
/// H leg, all sharing the Jacobi basis of d.
fn f_factor_scaled(
    d_op: &CMat,
    scale: Complex64,
    f: &QExp,
    pair: &GPair,
    pol: &TolerancePolicy,
) -> CMat {
    let p = &pair.lattice;
    let sd_b = quasi_normal_eig(&pair.b, p.n, pol);
    let sd_d = quasi_normal_eig(d_op, p.n, pol);
    let blocks: Vec<CMat> = sd_b
        .eigenvalues
        .iter()
        .map(|&beta| {
            let vals: Vec<Complex64> = sd_d
                .eigenvalues
                .iter()
                .map(|&z| f.eval_extended(scale * beta * z))
                .collect();
            CMat::conjugate_diag(&sd_d.basis, &vals)
        })
        .collect();
    assemble_leg2_blocks(&blocks, &sd_b.basis)
}

/// Build V = F(d⊗b)·χ(c⊗I, I⊗a). Requires ker b = ker c = {0}; F(0) = 1
/// covers any kernel of d.
pub fn build_v(cd: &CDPair, pair: &GPair, f: &QExp, pol: &TolerancePolicy) -> Result<Representation> {
    let p = &pair.lattice;
    let sd_b = quasi_normal_eig(&pair.b, p.n, pol);
    let min_b = sd_b
        .eigenvalues
        .iter()
        .map(|z| z.norm())
        .fold(f64::INFINITY, f64::min);
    if min_b <= pol.kernel_tol * pair.b.max_abs() {
        return Err(Error::KernelPresent { min_abs: min_b });
    }
    if cd.certificate.min_abs_eig_a <= pol.kernel_tol * cd.c.max_abs() {
        return Err(Error::KernelPresent {
            min_abs: cd.certificate.min_abs_eig_a,
        });
    }
    let ff = f_factor_scaled(&cd.d, Complex64::new(1.0, 0.0), f, pair, pol);
    let cb = c_eigenbasis(&cd.c, p, pol);
    let v = ff.matmul(&chi_factor(&cb, p));
    let unitarity = v.unitarity_defect() / ((cd.kdim * p.dim()) as f64).sqrt();
    Ok(Representation {
        kdim: cd.kdim,
        v,
        unitarity,
    })
}

/// Bulk-windowed rms residual of W₂₃V₁₂ − V₁₂V₁₃W₂₃ on K⊗H⊗H.
pub fn rep_residual(v: &Representation, wu: &MultUnitary, pol: &TolerancePolicy) -> Result<f64> {
    let p = &wu.lattice;
    let d = p.dim();
    let dims = (v.kdim, d, d);
    if d > pol.dense_leg_budget {
        return Err(Error::MemoryBudget {
            dim: d,
            budget: pol.dense_leg_budget,
        });
    }
    let w23 = TwoLeg {
        mat: &wu.w,
        pattern: LegPattern::TwoThree,
    };
    let v12 = TwoLeg {
        mat: &v.v,
        pattern: LegPattern::OneTwo,
    };
    let v13 = TwoLeg {
        mat: &v.v,
        pattern: LegPattern::OneThree,
    };
    let lhs = two_leg_product(&w23, &v12, dims)?;
    let r1 = two_leg_product(&v13, &w23, dims)?;
    let rhs = two_leg_times_big(&v12, &r1, dims)?;
    let sel1 = bulk_selector(p, pol.window_fraction);
    let selk = vec![1.0; v.kdim];
    let sel = kron_selector(&kron_selector(&selk, &sel1), &sel1);
    let rank: f64 = sel.iter().sum();
    Ok(lhs.sub_ref(&rhs).window(&sel).fro_norm() / rank.sqrt().max(1.0))
}

#[derive(Debug, Clone)]
pub struct ExtractCReport {
    /// worst ‖X_γ − u_γ⊗I‖_F / √dim over γ
    pub worst_slice: f64,
    /// worst ‖u_γ·u_γ' − u_γγ'‖_F on wrap-free products
    pub worst_multiplicativity: f64,
    /// worst rms character-match score over joint eigenvectors
    pub worst_char_score: f64,
    /// matched lattice element per joint eigenvector
    pub elements: Vec<GroupElement>,
}

/// Recover c from the dual-action slices of V.
pub fn extract_c(
    v: &Representation,
    pair: &GPair,
    pol: &TolerancePolicy,
) -> Result<(CMat, ExtractCReport)> {
    let p = &pair.lattice;
    let d = p.dim();
    let k = v.kdim;
    v.v.check_dim(k * d)?;
    let els: Vec<GroupElement> = p.elements().collect();
    let mut slices: Vec<CMat> = Vec::with_capacity(els.len());
    let mut worst_slice: f64 = 0.0;
    let scale = ((k * d) as f64).sqrt();
    for &gamma in &els {
        let (l, _) = translation_unitary(gamma, p);
        let il = crate::legs::kron(&CMat::identity(k), &l);
        let xg = v
            .v
            .adjoint()
            .matmul(&il)
            .matmul(&v.v)
            .matmul(&il.adjoint());
        let mut u = CMat::zeros(k);
        for i in 0..k {
            for ip in 0..k {
                let mut tr = Complex64::new(0.0, 0.0);
                for g in 0..d {
                    tr += xg[(i * d + g, ip * d + g)];
                }
                u[(i, ip)] = tr / d as f64;
            }
        }
        let dev = xg.sub_ref(&crate::legs::kron(&u, &CMat::identity(d))).fro_norm() / scale;
        worst_slice = worst_slice.max(dev);
        slices.push(u);
    }
    if worst_slice > pol.slice_gate {
        return Err(Error::SliceDeviation {
            worst: worst_slice,
            gate: pol.slice_gate,
        });
    }
    let mut worst_mult: f64 = 0.0;
    for (i, &g1) in els.iter().enumerate() {
        for (j, &g2) in els.iter().enumerate() {
            let (g12, w) = p.mul(g1, g2);
            if w {
                continue;
            }
            let prod = slices[i].matmul(&slices[j]);
            worst_mult = worst_mult.max(prod.dist(&slices[p.index(g12)]));
        }
    }
    if worst_mult > pol.character_gate {
        return Err(Error::CharacterMismatch {
            score: worst_mult,
            gate: pol.character_gate,
        });
    }
    let jb = joint_diag(&slices, pol)?;
    let mut elements = Vec::with_capacity(k);
    let mut worst_char: f64 = 0.0;
    for col in 0..k {
        let mut best = (f64::INFINITY, GroupElement::IDENTITY);
        for &m in &els {
            let score: f64 = els
                .iter()
                .enumerate()
                .map(|(gi, &g)| (jb.diagonals[gi][col] - p.chi(m, g)).norm_sqr())
                .sum::<f64>()
                / els.len() as f64;
            let score = score.sqrt();
            if score < best.0 {
                best = (score, m);
            }
        }
        worst_char = worst_char.max(best.0);
        elements.push(best.1);
    }
    if worst_char > pol.character_gate {
        return Err(Error::CharacterMismatch {
            score: worst_char,
            gate: pol.character_gate,
        });
    }
    let cvals: Vec<Complex64> = elements.iter().map(|&m| p.embed(m)).collect();
    let c = CMat::conjugate_diag(&jb.basis, &cvals);
    Ok((
        c,
        ExtractCReport {
            worst_slice,
            worst_multiplicativity: worst_mult,
            worst_char_score: worst_char,
            elements,
        },
    ))
}

/// Strip the χ-factor of a representation and return the K-blocks of
/// f = V·χ(c⊗I, I⊗a)† in the b-eigenbasis of the H leg, with the measured
/// relative off-block mass.
pub fn factor_f(
    v: &Representation,
    c: &CMat,
    pair: &GPair,
    pol: &TolerancePolicy,
) -> Result<(Vec<CMat>, f64)> {
    let p = &pair.lattice;
    let d = p.dim();
    let k = v.kdim;
    let cb = c_eigenbasis(c, p, pol);
    let f = v.v.matmul(&chi_factor(&cb, p).adjoint());
    let sd_b = quasi_normal_eig(&pair.b, p.n, pol);
    // transform the H leg into the b-eigenbasis
    let ub = &sd_b.basis;
    let iub = crate::legs::kron(&CMat::identity(k), ub);
    let ft = iub.adjoint().matmul(&f).matmul(&iub);
    let mut blocks = vec![CMat::zeros(k); d];
    let mut block_mass = 0.0;
    for i in 0..k {
        for ip in 0..k {
            for g in 0..d {
                let val = ft[(i * d + g, ip * d + g)];
                blocks[g][(i, ip)] = val;
                block_mass += val.norm_sqr();
            }
        }
    }
    let total = ft.fro_norm().powi(2);
    let off = (total - block_mass).max(0.0).sqrt() / total.sqrt().max(f64::MIN_POSITIVE);
    if off > pol.block_gate {
        return Err(Error::OffBlockMass {
            mass: off,
            gate: pol.block_gate,
        });
    }
    Ok((blocks, off))
}

#[derive(Debug, Clone)]
pub struct ExtractDReport {
    /// matched Γ̄ point per joint eigenvector (Zero encodes the kernel)
    pub elements: Vec<GammaBar>,
    /// rms match score per eigenvector
    pub scores: Vec<f64>,
    /// eigenvectors whose second-best candidate is within 10% of the best
    pub ambiguous: usize,
    /// worst pairwise commutator of the blocks, relative
    pub block_commutator: f64,
}

/// Recover d from the blocks f_β = F(β·d): joint-diagonalize and match each
/// eigenvector's value tuple against {F(embed(μ)·β)}_μ exhaustively over the
/// lattice and the adjoined zero.
pub fn extract_d(
    blocks: &[CMat],
    f: &QExp,
    pair: &GPair,
    pol: &TolerancePolicy,
) -> Result<(CMat, ExtractDReport)> {
    let p = &pair.lattice;
    let k = blocks[0].dim();
    let mut worst_comm: f64 = 0.0;
    for (i, x) in blocks.iter().enumerate() {
        for y in blocks.iter().skip(i + 1) {
            let scale = (x.fro_norm() * y.fro_norm()).max(f64::MIN_POSITIVE);
            worst_comm = worst_comm.max(x.commutator(y).fro_norm() / scale);
        }
    }
    if worst_comm > pol.block_gate {
        return Err(Error::BlocksNotCommuting {
            residual: worst_comm,
            gate: pol.block_gate,
        });
    }
    let jb = joint_diag(blocks, pol)?;
    let sd_b = quasi_normal_eig(&pair.b, p.n, pol);
    let betas = &sd_b.eigenvalues;
    let mut candidates: Vec<(GammaBar, Vec<Complex64>)> = Vec::with_capacity(p.dim() + 1);
    candidates.push((
        GammaBar::Zero,
        vec![Complex64::new(1.0, 0.0); betas.len()],
    ));
    for mu in p.elements() {
        let vals: Vec<Complex64> = betas
            .iter()
            .map(|&beta| f.eval_extended(p.embed(mu) * beta))
            .collect();
        candidates.push((GammaBar::Point(mu), vals));
    }
    let mut elements = Vec::with_capacity(k);
    let mut scores = Vec::with_capacity(k);
    let mut ambiguous = 0usize;
    for col in 0..k {
        let mut ranked: Vec<(f64, usize)> = candidates
            .iter()
            .enumerate()
            .map(|(ci, (_, vals))| {
                let s: f64 = vals
                    .iter()
                    .enumerate()
                    .map(|(bi, &w)| (jb.diagonals[bi][col] - w).norm_sqr())
                    .sum::<f64>()
                    / betas.len() as f64;
                (s.sqrt(), ci)
            })
            .collect();
        ranked.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let (best_score, best_ci) = ranked[0];
        if ranked.len() > 1 && ranked[1].0 < 1.1 * best_score {
            ambiguous += 1;
        }
        elements.push(candidates[best_ci].0);
        scores.push(best_score);
    }
    let dvals: Vec<Complex64> = elements.iter().map(|&e| p.embed_bar(e)).collect();
    let d = CMat::conjugate_diag(&jb.basis, &dvals);
    Ok((
        d,
        ExtractDReport {
            elements,
            scores,
            ambiguous,
            block_commutator: worst_comm,
        },
    ))
}

#[derive(Debug, Clone)]
pub struct DecomposeReport {
    pub extract_c: ExtractCReport,
    pub off_block_mass: f64,
    pub extract_d: ExtractDReport,
    /// consistency residuals of the proof identities, spectrally windowed
    pub por1: f64,
    pub por2: f64,
    pub leg_identity: f64,
    pub stad1: f64,
    /// bulk-windowed relative ‖V − build_v(c, d)‖
    pub roundtrip: f64,
}

/// Spectral projector of `op` excluding eigenvectors whose modulus shell
/// leaves the window under translation by `shift` shells.
fn nonwrap_projector(op: &CMat, shift: i64, p: &LatticeParams, pol: &TolerancePolicy) -> CMat {
    let sd = quasi_normal_eig(op, p.n, pol);
    let sel: Vec<Complex64> = sd
        .eigenvalues
        .iter()
        .map(|z| {
            if z.norm() == 0.0 {
                return Complex64::new(1.0, 0.0);
            }
            let s = (z.norm().ln() / p.lambda.ln()).round() as i64;
            if p.wraps(s + shift) {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(1.0, 0.0)
            }
        })
        .collect();
    CMat::conjugate_diag(&sd.basis, &sel)
}

fn windowed_rel(lhs: &CMat, rhs: &CMat, pk: &CMat, selh: &[f64], kdim: usize, d: usize) -> f64 {
    // project input columns: the K leg spectrally (the identities fail only
    // on the wrap shells of the K-side parameter, and the character
    // unitaries shift shells, so a two-sided same-shell compression would
    // annihilate the operators) and the H leg by the bulk selector
    let mut col_scale = vec![Complex64::new(0.0, 0.0); kdim * d];
    for i in 0..kdim {
        for g in 0..d {
            col_scale[i * d + g] = Complex64::new(selh[g], 0.0);
        }
    }
    let pkh = crate::legs::kron(pk, &CMat::identity(d));
    let num = pkh
        .matmul(&lhs.sub_ref(rhs))
        .diag_mul_right(&col_scale)
        .fro_norm();
    let den = pkh.matmul(rhs).diag_mul_right(&col_scale).fro_norm();
    num / den.max(f64::MIN_POSITIVE)
}

/// Full decomposition: extract_c → factor_f → extract_d, then the proof
/// identities and the synthesis round trip.
pub fn decompose(
    v: &Representation,
    wu: &MultUnitary,
    pair: &GPair,
    f: &QExp,
    pol: &TolerancePolicy,
) -> Result<(CDPair, DecomposeReport)> {
    let p = &pair.lattice;
    let d = p.dim();
    let _ = wu;
    let (c, crep) = extract_c(v, pair, pol)?;
    let (blocks, off_mass) = factor_f(v, &c, pair, pol)?;
    let (dmat, drep) = extract_d(&blocks, f, pair, pol)?;
    let cd = CDPair::new(c.clone(), dmat.clone(), p, pol)?;

    let cb = c_eigenbasis(&c, p, pol);
    let chif = chi_factor(&cb, p);
    let ffac = f_factor_scaled(&dmat, Complex64::new(1.0, 0.0), f, pair, pol);
    let selh = bulk_selector(p, pol.window_fraction);

    // por1: (χ(c,γ)⊗I)·V = F(d ⊗ γb)·χ(c⊗I, γI⊗a); por2 swaps the side.
    let mut por1: f64 = 0.0;
    let mut por2: f64 = 0.0;
    for gamma in [GroupElement::new(1, 0), GroupElement::new(0, -1)] {
        let gval = p.embed(gamma);
        let chi_cg: Vec<Complex64> = cb.eigs.iter().map(|&w| chi_total(p, w, gval)).collect();
        let ucg = CMat::conjugate_diag(&cb.basis, &chi_cg);
        let ucg_i = crate::legs::kron(&ucg, &CMat::identity(d));
        let ff_g = f_factor_scaled(&dmat, gval, f, pair, pol);
        let avals: Vec<Complex64> = p.elements().map(|g| p.embed(g)).collect();
        let mut chig = CMat::zeros(v.kdim * d);
        for m in 0..v.kdim {
            for r1 in 0..v.kdim {
                let br = cb.basis[(r1, m)];
                for c1 in 0..v.kdim {
                    let proj = br * cb.basis[(c1, m)].conj();
                    if proj.norm_sqr() == 0.0 {
                        continue;
                    }
                    for g2 in 0..d {
                        chig[(r1 * d + g2, c1 * d + g2)] +=
                            proj * chi_total(p, cb.eigs[m], gval * avals[g2]);
                    }
                }
            }
        }
        let pk = nonwrap_projector(&dmat, gamma.j, p, pol);
        let lhs1 = ucg_i.matmul(&v.v);
        let rhs1 = ff_g.matmul(&chig);
        por1 = por1.max(windowed_rel(&lhs1, &rhs1, &pk, &selh, v.kdim, d));
        let lhs2 = v.v.matmul(&ucg_i);
        let rhs2 = ffac.matmul(&chig);
        por2 = por2.max(windowed_rel(&lhs2, &rhs2, &pk, &selh, v.kdim, d));
    }

    // leg identity: per leg-2 position shell g2, V equals
    // (χ(c, α₂)†⊗I) · F(d ⊗ α₂b) · χ(c⊗I, I⊗α₂a)
    let mut leg_identity: f64 = 0.0;
    for g2 in p.elements() {
        if selh[p.index(g2)] == 0.0 {
            continue;
        }
        let alpha = p.embed(g2);
        let chi_cg: Vec<Complex64> = cb
            .eigs
            .iter()
            .map(|&w| chi_total(p, w, alpha).conj())
            .collect();
        let ucg = CMat::conjugate_diag(&cb.basis, &chi_cg);
        let ucg_i = crate::legs::kron(&ucg, &CMat::identity(d));
        let ff_g = f_factor_scaled(&dmat, alpha, f, pair, pol);
        let avals: Vec<Complex64> = p.elements().map(|g| p.embed(g)).collect();
        let mut chig = CMat::zeros(v.kdim * d);
        for m in 0..v.kdim {
            for r1 in 0..v.kdim {
                let br = cb.basis[(r1, m)];
                for c1 in 0..v.kdim {
                    let proj = br * cb.basis[(c1, m)].conj();
                    if proj.norm_sqr() == 0.0 {
                        continue;
                    }
                    for gg in 0..d {
                        chig[(r1 * d + gg, c1 * d + gg)] +=
                            proj * chi_total(p, cb.eigs[m], alpha * avals[gg]);
                    }
                }
            }
        }
        let rhs = ucg_i.matmul(&ff_g).matmul(&chig);
        let pk = nonwrap_projector(&dmat, g2.j, p, pol);
        leg_identity = leg_identity.max(windowed_rel(&v.v, &rhs, &pk, &selh, v.kdim, d));
    }

    // stad1: (d⊗I) = χ(c⊗I, I⊗a)†·(d⊗a)·χ(c⊗I, I⊗a), shell-windowed per a
    let lhs = crate::legs::kron(&dmat, &CMat::identity(d));
    let da = crate::legs::kron(&dmat, &pair.a);
    let rhs = chif.adjoint().matmul(&da).matmul(&chif);
    let mut stad1: f64 = 0.0;
    {
        // exclude, per position shell, the d-eigenvectors that wrap
        for g2 in p.elements() {
            if selh[p.index(g2)] == 0.0 {
                continue;
            }
            // the slice conjugates by the inverse character, so the wrap
            // shell is the one leaving the window under the inverse shift
            let pk = nonwrap_projector(&dmat, -g2.j, p, pol);
            let sel_one: Vec<f64> = p
                .elements()
                .map(|h| if h == g2 { 1.0 } else { 0.0 })
                .collect();
            stad1 = stad1.max(windowed_rel(&lhs, &rhs, &pk, &sel_one, v.kdim, d));
        }
    }

    // synthesis round trip, bulk-windowed relative
    let rebuilt = build_v(&cd, pair, f, pol)?;
    let selk = vec![1.0; v.kdim];
    let sel = kron_selector(&selk, &selh);
    let roundtrip = v.v.sub_ref(&rebuilt.v).window(&sel).fro_norm()
        / v.v.window(&sel).fro_norm().max(f64::MIN_POSITIVE);

    Ok((
        cd,
        DecomposeReport {
            extract_c: crep,
            off_block_mass: off_mass,
            extract_d: drep,
            por1,
            por2,
            leg_identity,
            stad1,
            roundtrip,
        },
    ))
}

/// Diagnostic slice through the Weyl decomposition: approximates
/// (id⊗φ_γ)V by evaluating each coefficient function at the smallest
/// modulus shell (the b → 0 extrapolation the finite model admits) and
/// compares against χ(c, γ). Not a gate.
pub fn phi_slice_diagnostic(
    v: &Representation,
    c: &CMat,
    pair: &GPair,
    pol: &TolerancePolicy,
) -> Result<f64> {
    let p = &pair.lattice;
    let d = p.dim();
    let k = v.kdim;
    let els: Vec<GroupElement> = p.elements().collect();
    // weyl-decompose each K-entry block of V
    let f = crate::model::fourier_chi(p);
    let cb = c_eigenbasis(c, p, pol);
    let mut worst: f64 = 0.0;
    // per K-entry (i, ip): block X on H; coefficients from X̃ = F X F†
    let mut coeff0 = vec![CMat::zeros(k); els.len()];
    for i in 0..k {
        for ip in 0..k {
            let x = CMat::from_fn(d, |r, cc| v.v[(i * d + r, ip * d + cc)]);
            let xb = f.matmul(&x).matmul(&f.adjoint());
            for (ti, &t) in els.iter().enumerate() {
                // evaluate g_t at the smallest-modulus shell: average of the
                // coefficient over eigenvalues with minimal |embed|
                let mut acc = Complex64::new(0.0, 0.0);
                let mut cnt = 0usize;
                for &g in &els {
                    if g.j == p.window_lo() {
                        let (gt, _) = p.mul(g, t);
                        acc += xb[(p.index(g), p.index(gt))];
                        cnt += 1;
                    }
                }
                coeff0[ti][(i, ip)] = acc / cnt as f64;
            }
        }
    }
    for gamma in p.elements() {
        let mut u = CMat::zeros(k);
        for (ti, &t) in els.iter().enumerate() {
            u = u.add_ref(&coeff0[ti].scale(p.chi(gamma, t)));
        }
        let chi_cg: Vec<Complex64> = cb
            .eigs
            .iter()
            .map(|&w| chi_total(p, w, p.embed(gamma)))
            .collect();
        let target = CMat::conjugate_diag(&cb.basis, &chi_cg);
        worst = worst.max(u.dist(&target) / (k as f64).sqrt());
    }
    Ok(worst)
}

/// Deterministic sample of a valid parameter pair: the canonical pair
/// conjugated by a random unitary, with optional pure-phase scalings.
pub fn sample_cd_pair(
    pair: &GPair,
    seed: u64,
    pol: &TolerancePolicy,
) -> Result<CDPair> {
    use rand::Rng;
    use rand::SeedableRng;
    let p = &pair.lattice;
    let d = p.dim();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let raw = CMat::from_fn(d, |_, _| {
        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    });
    let herm = raw.add_ref(&raw.adjoint());
    let q = crate::eig::hermitian_eig(&herm, pol)?.basis;
    let kphase = rng.gen_range(0..p.n as i64);
    let lphase = rng.gen_range(0..p.n as i64);
    let c = q
        .matmul(&pair.a)
        .matmul(&q.adjoint())
        .scale(p.embed(GroupElement::new(kphase, 0)));
    let dmat = q
        .matmul(&pair.b)
        .matmul(&q.adjoint())
        .scale(p.embed(GroupElement::new(lphase, 0)));
    CDPair::new(c, dmat, p, pol)
}
