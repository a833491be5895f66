//! Spectral machinery: a deterministic simultaneous Jacobi eigensolver for
//! Hermitian families, normal-matrix eigendecomposition via joint
//! diagonalization of the Hermitian real/imaginary parts, functional calculus
//! for one and two commuting normal matrices, and the z-transform.
//!
//! The Jacobi engine sweeps pivots in fixed row-major order with a
//! closed-form rotation per pivot (dominant eigenvector of a 3×3 pivot
//! matrix), so identical inputs give bit-identical decompositions.

use num_complex::Complex64;

use crate::cmat::CMat;
use crate::lattice::LatticeParams;
use crate::tolerance::TolerancePolicy;
use crate::{Error, Result};

/// Eigendecomposition with the basis holding eigenvectors in columns and
/// eigenvalue clusters grouped by proximity.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<Complex64>,
    pub basis: CMat,
    pub clusters: Vec<Vec<usize>>,
}

impl SpectralDecomposition {
    /// ‖T − U·diag·U†‖_F for the matrix this was computed from.
    pub fn reconstruction_residual(&self, t: &CMat) -> f64 {
        CMat::conjugate_diag(&self.basis, &self.eigenvalues).dist(t)
    }
}

fn herm_parts(t: &CMat) -> (CMat, CMat) {
    let ad = t.adjoint();
    let n = t.dim();
    let mut re = CMat::zeros(n);
    let mut im = CMat::zeros(n);
    for i in 0..n {
        for j in 0..n {
            re[(i, j)] = (t[(i, j)] + ad[(i, j)]) * 0.5;
            im[(i, j)] = (t[(i, j)] - ad[(i, j)]) * Complex64::new(0.0, -0.5);
        }
    }
    (re, im)
}

/// Dominant eigenvector of a symmetric 3×3, by a fixed-iteration Jacobi on
/// the 3×3 itself. Deterministic.
fn dominant_axis(g: [[f64; 3]; 3]) -> [f64; 3] {
    let mut a = g;
    let mut v = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    for _ in 0..24 {
        // largest off-diagonal pivot
        let (mut p, mut q, mut best) = (0usize, 1usize, a[0][1].abs());
        for (i, j) in [(0usize, 2usize), (1, 2)] {
            if a[i][j].abs() > best {
                best = a[i][j].abs();
                p = i;
                q = j;
            }
        }
        if best < 1e-300 {
            break;
        }
        let theta = 0.5 * (2.0 * a[p][q]).atan2(a[p][p] - a[q][q]);
        let (c, s) = (theta.cos(), theta.sin());
        for k in 0..3 {
            let (akp, akq) = (a[k][p], a[k][q]);
            a[k][p] = c * akp + s * akq;
            a[k][q] = -s * akp + c * akq;
        }
        for k in 0..3 {
            let (apk, aqk) = (a[p][k], a[q][k]);
            a[p][k] = c * apk + s * aqk;
            a[q][k] = -s * apk + c * aqk;
        }
        for k in 0..3 {
            let (vkp, vkq) = (v[k][p], v[k][q]);
            v[k][p] = c * vkp + s * vkq;
            v[k][q] = -s * vkp + c * vkq;
        }
    }
    let mut imax = 0;
    for i in 1..3 {
        if a[i][i] > a[imax][imax] {
            imax = i;
        }
    }
    [v[0][imax], v[1][imax], v[2][imax]]
}

/// Simultaneous unitary near-diagonalization of Hermitian matrices by cyclic
/// Jacobi sweeps. Returns the accumulated basis; the inputs are overwritten
/// with their (near-)diagonal transforms.
pub(crate) fn joint_jacobi(mats: &mut [CMat], max_sweeps: usize) -> CMat {
    let n = mats[0].dim();
    let mut u = CMat::identity(n);
    let scale: f64 = mats.iter().map(|m| m.fro_norm()).sum::<f64>() + f64::MIN_POSITIVE;
    let stop2 = (1e-14 * scale) * (1e-14 * scale);
    for _ in 0..max_sweeps {
        let mut changed = false;
        for p in 0..n.saturating_sub(1) {
            for q in (p + 1)..n {
                let piv: f64 = mats.iter().map(|m| m[(p, q)].norm_sqr()).sum();
                if piv <= stop2 {
                    continue;
                }
                let mut g = [[0.0f64; 3]; 3];
                for m in mats.iter() {
                    let h = [
                        (m[(p, p)] - m[(q, q)]).re,
                        2.0 * m[(p, q)].re,
                        2.0 * m[(p, q)].im,
                    ];
                    for i in 0..3 {
                        for j in 0..3 {
                            g[i][j] += h[i] * h[j];
                        }
                    }
                }
                let mut axis = dominant_axis(g);
                if axis[0] < 0.0 {
                    for x in &mut axis {
                        *x = -*x;
                    }
                }
                let [x, y, z] = axis;
                let c = ((x + 1.0) / 2.0).sqrt();
                let denom = (2.0 * (x + 1.0)).sqrt();
                if denom < 1e-150 {
                    continue;
                }
                let s = Complex64::new(y, -z) / denom;
                if s.norm() < 1e-15 {
                    continue;
                }
                changed = true;
                // R = [[c, -s̄],[s, c]];  A <- R† A R;  U <- U·R
                for m in mats.iter_mut() {
                    for j in 0..n {
                        let (ap, aq) = (m[(p, j)], m[(q, j)]);
                        m[(p, j)] = ap * c + aq * s.conj();
                        m[(q, j)] = -(ap * s) + aq * c;
                    }
                    for i in 0..n {
                        let (ap, aq) = (m[(i, p)], m[(i, q)]);
                        m[(i, p)] = ap * c + aq * s;
                        m[(i, q)] = -(ap * s.conj()) + aq * c;
                    }
                }
                for i in 0..n {
                    let (up, uq) = (u[(i, p)], u[(i, q)]);
                    u[(i, p)] = up * c + uq * s;
                    u[(i, q)] = -(up * s.conj()) + uq * c;
                }
            }
        }
        if !changed {
            break;
        }
    }
    u
}

fn cluster_indices(eigs: &[Complex64], tol: f64) -> Vec<Vec<usize>> {
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for i in 0..eigs.len() {
        match clusters
            .iter_mut()
            .find(|c| (eigs[c[0]] - eigs[i]).norm() <= tol)
        {
            Some(c) => c.push(i),
            None => clusters.push(vec![i]),
        }
    }
    clusters
}

fn permute_decomposition(basis: &CMat, eigs: &[Complex64], order: &[usize]) -> (CMat, Vec<Complex64>) {
    let n = eigs.len();
    let b = CMat::from_fn(n, |i, j| basis[(i, order[j])]);
    let e = order.iter().map(|&j| eigs[j]).collect();
    (b, e)
}

/// Eigendecomposition of a Hermitian matrix; eigenvalues real, ascending.
pub fn hermitian_eig(t: &CMat, pol: &TolerancePolicy) -> Result<SpectralDecomposition> {
    let defect = t.hermiticity_defect();
    if defect > pol.hermitian_tol {
        return Err(Error::NotHermitian { residual: defect });
    }
    let sym = t.add_ref(&t.adjoint()).scale(Complex64::new(0.5, 0.0));
    let mut mats = [sym];
    let basis = joint_jacobi(&mut mats, pol.max_sweeps);
    let eigs: Vec<Complex64> = mats[0]
        .diagonal()
        .iter()
        .map(|z| Complex64::new(z.re, 0.0))
        .collect();
    let mut order: Vec<usize> = (0..eigs.len()).collect();
    order.sort_by(|&i, &j| eigs[i].re.partial_cmp(&eigs[j].re).unwrap());
    let (basis, eigenvalues) = permute_decomposition(&basis, &eigs, &order);
    let clusters = cluster_indices(&eigenvalues, pol.cluster_tol * t.fro_norm());
    Ok(SpectralDecomposition {
        eigenvalues,
        basis,
        clusters,
    })
}

fn sector_modulus_key(z: Complex64, n: u32) -> (i64, f64, f64, f64) {
    let hbar = 2.0 * std::f64::consts::PI / n as f64;
    let sector = (z.arg() / hbar).round() as i64;
    (sector.rem_euclid(n as i64), z.norm(), z.re, z.im)
}

fn normal_eig_unchecked(t: &CMat, n_sectors: u32, max_sweeps: usize, cluster_tol: f64) -> SpectralDecomposition {
    let (re, im) = herm_parts(t);
    let mut mats = [re, im];
    let basis = joint_jacobi(&mut mats, max_sweeps);
    let eigs: Vec<Complex64> = (0..t.dim())
        .map(|i| Complex64::new(mats[0][(i, i)].re, mats[1][(i, i)].re))
        .collect();
    // deterministic ordering: sector rounded to 2π/N, then modulus, then re/im
    let mut order: Vec<usize> = (0..eigs.len()).collect();
    order.sort_by(|&i, &j| {
        let a = sector_modulus_key(eigs[i], n_sectors);
        let b = sector_modulus_key(eigs[j], n_sectors);
        a.partial_cmp(&b).unwrap()
    });
    let (basis, eigenvalues) = permute_decomposition(&basis, &eigs, &order);
    let clusters = cluster_indices(&eigenvalues, cluster_tol * t.fro_norm());
    SpectralDecomposition {
        eigenvalues,
        basis,
        clusters,
    }
}

/// Eigendecomposition of a normal matrix by joint diagonalization of its
/// Hermitian real and imaginary parts. Eigenvalue order: argument sector
/// (rounded to multiples of 2π/N), then modulus.
pub fn normal_eig(t: &CMat, n_sectors: u32, pol: &TolerancePolicy) -> Result<SpectralDecomposition> {
    let defect = t.normality_defect();
    if defect > pol.normality_tol {
        return Err(Error::NotNormal {
            residual: defect,
            tolerance: pol.normality_tol,
        });
    }
    Ok(normal_eig_unchecked(t, n_sectors, pol.max_sweeps, pol.cluster_tol))
}

/// Best-effort spectral data for a declared quasi-normal matrix: the unitary
/// Jacobi basis of the Re/Im pair and the diagonal of U†TU. Used by the
/// functional-calculus paths that the finite model forces onto mildly
/// non-normal arguments; the caller gates on the measured defect.
pub fn quasi_normal_eig(t: &CMat, n_sectors: u32, pol: &TolerancePolicy) -> SpectralDecomposition {
    normal_eig_unchecked(t, n_sectors, pol.max_sweeps, pol.cluster_tol)
}

/// Joint diagonalization of a commuting family (members may be normal, they
/// are split into Hermitian parts internally).
pub struct JointBasis {
    pub basis: CMat,
    /// diagonal of U†·T_k·U for each input T_k
    pub diagonals: Vec<Vec<Complex64>>,
    /// worst relative off-diagonal mass left in any member
    pub offdiag_rel: f64,
}

pub fn joint_diag(family: &[CMat], pol: &TolerancePolicy) -> Result<JointBasis> {
    if family.is_empty() {
        return Err(Error::InvalidParams("empty family".into()));
    }
    let n = family[0].dim();
    for m in family {
        m.check_dim(n)?;
    }
    // pairwise commutators
    for (i, x) in family.iter().enumerate() {
        for y in family.iter().skip(i + 1) {
            let scale = x.fro_norm() * y.fro_norm() + f64::MIN_POSITIVE;
            let c = x.commutator(y).fro_norm() / scale;
            if c > pol.commuting_tol {
                return Err(Error::NonCommuting { residual: c });
            }
        }
    }
    let mut parts: Vec<CMat> = Vec::with_capacity(2 * family.len());
    for m in family {
        let (re, im) = herm_parts(m);
        parts.push(re);
        parts.push(im);
    }
    let basis = joint_jacobi(&mut parts, pol.max_sweeps);
    let mut offdiag_rel: f64 = 0.0;
    let mut diagonals = Vec::with_capacity(family.len());
    for (k, m) in family.iter().enumerate() {
        let re = &parts[2 * k];
        let im = &parts[2 * k + 1];
        let mut off = 0.0;
        let mut diag = Vec::with_capacity(n);
        for i in 0..n {
            diag.push(Complex64::new(re[(i, i)].re, im[(i, i)].re));
            for j in 0..n {
                if i != j {
                    off += re[(i, j)].norm_sqr() + im[(i, j)].norm_sqr();
                }
            }
        }
        let rel = off.sqrt() / (m.fro_norm() + f64::MIN_POSITIVE);
        offdiag_rel = offdiag_rel.max(rel);
        diagonals.push(diag);
    }
    Ok(JointBasis {
        basis,
        diagonals,
        offdiag_rel,
    })
}

/// Functional calculus f(T) = U·diag(f(eig))·U† for a normal matrix.
pub fn funcalc(
    t: &CMat,
    n_sectors: u32,
    f: impl Fn(Complex64) -> Complex64,
    pol: &TolerancePolicy,
) -> Result<CMat> {
    let sd = normal_eig(t, n_sectors, pol)?;
    let vals: Vec<Complex64> = sd.eigenvalues.iter().map(|&z| f(z)).collect();
    Ok(CMat::conjugate_diag(&sd.basis, &vals))
}

/// Functional calculus with eigenvalues snapped to the lattice rays; errors
/// if any eigenvalue is farther than `snap_tol` from a ray point of integral
/// log-modulus grid (in the embedded metric).
pub fn funcalc_on_lattice(
    t: &CMat,
    p: &LatticeParams,
    f: impl Fn(Complex64) -> Complex64,
    pol: &TolerancePolicy,
) -> Result<CMat> {
    let sd = normal_eig(t, p.n, pol)?;
    let mut vals = Vec::with_capacity(sd.eigenvalues.len());
    for &z in &sd.eigenvalues {
        let d = p.lattice_distance(z);
        if d > pol.snap_tol {
            return Err(Error::SpectrumOffLattice {
                distance: d,
                tolerance: pol.snap_tol,
            });
        }
        let snapped = if z.norm() <= pol.snap_tol {
            Complex64::new(0.0, 0.0)
        } else {
            let rc = p.ray_coords_full(z);
            Complex64::from_polar(
                p.lambda.powf(rc.logmod.round()),
                p.hbar * rc.sector.round(),
            )
        };
        vals.push(f(snapped));
    }
    Ok(CMat::conjugate_diag(&sd.basis, &vals))
}

/// Functional calculus of two commuting normal matrices: evaluates
/// f(z₁, z₂) on the joint spectrum in a common eigenbasis.
pub fn bifuncalc(
    t1: &CMat,
    t2: &CMat,
    f: impl Fn(Complex64, Complex64) -> Complex64,
    pol: &TolerancePolicy,
) -> Result<CMat> {
    let jb = joint_diag(&[t1.clone(), t2.clone()], pol)?;
    let vals: Vec<Complex64> = jb.diagonals[0]
        .iter()
        .zip(&jb.diagonals[1])
        .map(|(&z1, &z2)| f(z1, z2))
        .collect();
    Ok(CMat::conjugate_diag(&jb.basis, &vals))
}

/// z-transform z_T = T(I + T†T)^{−1/2}; always a strict contraction.
pub fn z_transform(t: &CMat, pol: &TolerancePolicy) -> Result<CMat> {
    let g = t.adjoint().matmul(t); // T†T, positive semidefinite Hermitian
    let sd = hermitian_eig(&g, pol)?;
    let vals: Vec<Complex64> = sd
        .eigenvalues
        .iter()
        .map(|z| Complex64::new(1.0 / (1.0 + z.re.max(0.0)).sqrt(), 0.0))
        .collect();
    Ok(t.matmul(&CMat::conjugate_diag(&sd.basis, &vals)))
}

/// Inverse of the z-transform: T = Z(I − Z†Z)^{−1/2}; requires ‖Z‖ < 1.
pub fn z_inverse(z: &CMat, pol: &TolerancePolicy) -> Result<CMat> {
    let g = z.adjoint().matmul(z);
    let sd = hermitian_eig(&g, pol)?;
    let mut vals = Vec::with_capacity(sd.eigenvalues.len());
    for ev in &sd.eigenvalues {
        let gap = 1.0 - ev.re;
        if gap <= 1e-14 {
            return Err(Error::NotContraction { min_eig: gap });
        }
        vals.push(Complex64::new(1.0 / gap.sqrt(), 0.0));
    }
    Ok(z.matmul(&CMat::conjugate_diag(&sd.basis, &vals)))
}
