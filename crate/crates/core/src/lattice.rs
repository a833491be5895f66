//! Finite model of the multiplicative group `Γ = ∪_{k<N} q^k ℝ₊` and its
//! symmetric bicharacter χ.
//!
//! The phase direction is exactly cyclic (index k mod N). The modulus
//! direction ℝ₊ is sampled geometrically at powers of λ on a centered
//! window of M indices; λ is pinned to `exp(2π/√(NM))`, the unique value
//! for which the modulus clause of χ, `χ(γ, r) = |γ|^{N/(2πi)·log r}`,
//! restricts to a true Z_M bicharacter `exp(−2πi·jj'/M)` on the window.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::{Error, Result};

/// One lattice point of Γ: phase index `k` (canonical in `0..N`) and
/// modulus index `j` in the centered window `−j0 ..= M−1−j0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GroupElement {
    pub k: i64,
    pub j: i64,
}

impl GroupElement {
    pub const IDENTITY: GroupElement = GroupElement { k: 0, j: 0 };

    pub fn new(k: i64, j: i64) -> Self {
        GroupElement { k, j }
    }

    pub fn is_identity(&self) -> bool {
        self.k == 0 && self.j == 0
    }
}

/// A point of `Γ̄ = Γ ∪ {0}`. Zero is a distinguished sentinel, never a
/// `GroupElement`; operations take it explicitly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GammaBar {
    Zero,
    Point(GroupElement),
}

/// Ray coordinates of a nonzero complex number relative to the lattice:
/// `sector` counts multiples of 2π/N in the argument and `logmod` is the
/// base-λ logarithm of the modulus. Lattice points have both integral.
#[derive(Debug, Clone, Copy)]
pub struct RayCoords {
    pub sector: f64,
    pub logmod: f64,
}

/// Parameters of the finite lattice model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeParams {
    pub n: u32,
    pub m: u32,
    /// primitive root of unity e^{2πi/N}
    pub q: Complex64,
    /// 2π/N
    pub hbar: f64,
    /// modulus step exp(2π/√(NM))
    pub lambda: f64,
    /// centering offset floor(M/2)
    pub j0: i64,
}

/// Construct lattice parameters. N must be even and at least 6, M at least 2.
pub fn make_lattice(n: u32, m: u32) -> Result<LatticeParams> {
    LatticeParams::new(n, m)
}

impl LatticeParams {
    pub fn new(n: u32, m: u32) -> Result<Self> {
        if n % 2 != 0 || n < 6 {
            return Err(Error::InvalidParams(format!(
                "N must be even and >= 6, got {n}"
            )));
        }
        if m < 2 {
            return Err(Error::InvalidParams(format!("M must be >= 2, got {m}")));
        }
        let hbar = 2.0 * PI / n as f64;
        Ok(LatticeParams {
            n,
            m,
            q: Complex64::from_polar(1.0, hbar),
            hbar,
            lambda: (2.0 * PI / ((n as f64) * (m as f64)).sqrt()).exp(),
            j0: (m / 2) as i64,
        })
    }

    /// Hilbert-space dimension of the position model, N·M.
    pub fn dim(&self) -> usize {
        (self.n * self.m) as usize
    }

    pub fn window_lo(&self) -> i64 {
        -self.j0
    }

    pub fn window_hi(&self) -> i64 {
        self.m as i64 - 1 - self.j0
    }

    /// True if the modulus index leaves the window.
    pub fn wraps(&self, j: i64) -> bool {
        j < self.window_lo() || j > self.window_hi()
    }

    /// Canonical representative: k mod N, j reduced mod M into the window.
    pub fn reduce(&self, k: i64, j: i64) -> GroupElement {
        let n = self.n as i64;
        let m = self.m as i64;
        GroupElement {
            k: k.rem_euclid(n),
            j: (j + self.j0).rem_euclid(m) - self.j0,
        }
    }

    /// Group product with a wrap flag for the modulus window.
    pub fn mul(&self, g: GroupElement, h: GroupElement) -> (GroupElement, bool) {
        let (k, j) = (g.k + h.k, g.j + h.j);
        (self.reduce(k, j), self.wraps(j))
    }

    /// Group inverse with a wrap flag.
    pub fn inv(&self, g: GroupElement) -> (GroupElement, bool) {
        (self.reduce(-g.k, -g.j), self.wraps(-g.j))
    }

    /// Position-basis enumeration: k major, j ascending within the window.
    pub fn elements(&self) -> impl Iterator<Item = GroupElement> + '_ {
        let (lo, hi) = (self.window_lo(), self.window_hi());
        (0..self.n as i64).flat_map(move |k| (lo..=hi).map(move |j| GroupElement { k, j }))
    }

    pub fn index(&self, g: GroupElement) -> usize {
        debug_assert!(!self.wraps(g.j) && (0..self.n as i64).contains(&g.k));
        (g.k * self.m as i64 + (g.j + self.j0)) as usize
    }

    pub fn element(&self, idx: usize) -> GroupElement {
        let m = self.m as usize;
        GroupElement {
            k: (idx / m) as i64,
            j: (idx % m) as i64 - self.j0,
        }
    }

    /// Complex embedding q^k·λ^j of a lattice point; the sentinel zero of Γ̄
    /// embeds to 0.
    pub fn embed(&self, g: GroupElement) -> Complex64 {
        Complex64::from_polar(self.lambda.powi(g.j as i32), self.hbar * g.k as f64)
    }

    pub fn embed_bar(&self, g: GammaBar) -> Complex64 {
        match g {
            GammaBar::Zero => Complex64::new(0.0, 0.0),
            GammaBar::Point(g) => self.embed(g),
        }
    }

    /// The symmetric bicharacter on the lattice:
    /// `χ((k,j),(k',j')) = exp(2πi·kk'/N) · exp(−2πi·jj'/M)`.
    pub fn chi(&self, g: GroupElement, h: GroupElement) -> Complex64 {
        let ph = 2.0 * PI
            * ((g.k * h.k) as f64 / self.n as f64 - (g.j * h.j) as f64 / self.m as f64);
        Complex64::from_polar(1.0, ph)
    }

    /// Ray coordinates of an arbitrary nonzero complex number; integral
    /// coordinates are snapped to exact integers within 1e−9.
    pub fn ray_coords_full(&self, z: Complex64) -> RayCoords {
        let mut sector = z.arg() / self.hbar;
        let mut logmod = z.norm().ln() / self.lambda.ln();
        if (sector - sector.round()).abs() < 1e-9 {
            sector = sector.round();
        }
        if (logmod - logmod.round()).abs() < 1e-9 {
            logmod = logmod.round();
        }
        RayCoords { sector, logmod }
    }

    /// Ray coordinates requiring membership of the rays: the argument must be
    /// within `ray_tol` (in sector units) of a multiple of 2π/N.
    pub fn ray_coords(&self, z: Complex64, ray_tol: f64) -> Result<RayCoords> {
        let rc = self.ray_coords_full(z);
        let dist = (rc.sector - rc.sector.round()).abs();
        if dist > ray_tol {
            return Err(Error::OffRay { distance: dist });
        }
        Ok(RayCoords {
            sector: rc.sector.round(),
            logmod: rc.logmod,
        })
    }

    /// χ extended to ray points in both slots with continuous modulus:
    /// `exp(2πi·κκ'/N)·exp(−2πi·ss'/M)` in ray coordinates. A zero in either
    /// slot yields 1.
    pub fn chi_ray_zz(&self, z: Complex64, w: Complex64) -> Result<Complex64> {
        if z.norm() == 0.0 || w.norm() == 0.0 {
            return Ok(Complex64::new(1.0, 0.0));
        }
        let a = self.ray_coords(z, 1e-6)?;
        let b = self.ray_coords(w, 1e-6)?;
        Ok(self.chi_coords(a, b))
    }

    /// χ on a ray point against a lattice element.
    pub fn chi_ray(&self, z: Complex64, h: GroupElement) -> Result<Complex64> {
        self.chi_ray_zz(z, self.embed(h))
    }

    pub(crate) fn chi_coords(&self, a: RayCoords, b: RayCoords) -> Complex64 {
        let ph = 2.0 * PI
            * (a.sector * b.sector / self.n as f64 - a.logmod * b.logmod / self.m as f64);
        Complex64::from_polar(1.0, ph)
    }

    /// Max distance of `z` to the embedded window lattice ∪ {0}.
    pub fn lattice_distance(&self, z: Complex64) -> f64 {
        let mut best = z.norm(); // distance to the adjoined zero
        for g in self.elements() {
            best = best.min((z - self.embed(g)).norm());
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_params() {
        assert!(make_lattice(5, 3).is_err());
        assert!(make_lattice(4, 3).is_err());
        assert!(make_lattice(6, 1).is_err());
        assert!(make_lattice(6, 2).is_ok());
    }

    #[test]
    fn root_of_unity_and_hbar() {
        let p = make_lattice(6, 3).unwrap();
        assert!((p.q - Complex64::from_polar(1.0, PI / 3.0)).norm() < 1e-15);
        assert!((p.hbar - PI / 3.0).abs() < 1e-15);
        // q^N = 1, q^k != 1 for 0 < k < N
        let mut z = Complex64::new(1.0, 0.0);
        for _ in 0..6 {
            z *= p.q;
        }
        assert!((z - Complex64::new(1.0, 0.0)).norm() < 1e-14);
        for k in 1..6 {
            assert!((p.q.powi(k) - Complex64::new(1.0, 0.0)).norm() > 0.5);
        }
    }

    #[test]
    fn lambda_consistency() {
        // (N/2π)(ln λ)² = 2π/M makes the modulus clause a true Z_M bicharacter
        for (n, m) in [(6u32, 2u32), (6, 3), (6, 4), (8, 5)] {
            let p = make_lattice(n, m).unwrap();
            let lhs = n as f64 / (2.0 * PI) * p.lambda.ln().powi(2);
            assert!((lhs - 2.0 * PI / m as f64).abs() < 1e-14);
        }
        let p = make_lattice(6, 3).unwrap();
        assert!((p.lambda - (2.0 * PI / 18f64.sqrt()).exp()).abs() < 1e-12);
        assert!((p.lambda - 4.3972).abs() < 1e-3);
    }

    #[test]
    fn embedding() {
        let p = make_lattice(6, 3).unwrap();
        assert!((p.embed(GroupElement::IDENTITY) - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        assert!((p.embed(GroupElement::new(1, 0)) - Complex64::from_polar(1.0, PI / 3.0)).norm() < 1e-15);
        assert!((p.embed(GroupElement::new(0, 1)).norm() - p.lambda).abs() < 1e-12);
        // arg is a multiple of 2π/N
        for g in p.elements() {
            let s = p.embed(g).arg() / p.hbar;
            assert!((s - s.round()).abs() < 1e-9);
        }
    }

    #[test]
    fn group_arithmetic() {
        let p = make_lattice(6, 3).unwrap();
        let (prod, w) = p.mul(GroupElement::new(1, 0), GroupElement::new(5, 0));
        assert_eq!(prod, GroupElement::IDENTITY);
        assert!(!w);
        let (prod, w) = p.mul(GroupElement::new(0, 1), GroupElement::new(0, -1));
        assert_eq!(prod, GroupElement::IDENTITY);
        assert!(!w);
        // window-edge wrap
        let jmax = p.window_hi();
        let (_, w) = p.mul(GroupElement::new(0, jmax), GroupElement::new(0, 1));
        assert!(w);
        // embed multiplicativity off-wrap (brute force over the window)
        for g in p.elements() {
            for h in p.elements() {
                let (gh, wrapped) = p.mul(g, h);
                if !wrapped {
                    assert!((p.embed(gh) - p.embed(g) * p.embed(h)).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn inverse_wraps_when_window_asymmetric() {
        let p = make_lattice(6, 2).unwrap(); // window {-1, 0}
        let (inv, w) = p.inv(GroupElement::new(2, -1));
        assert!(w); // +1 is outside
        assert_eq!(inv, GroupElement::new(4, -1));
        let (inv, w) = p.inv(GroupElement::new(3, 0));
        assert!(!w);
        assert_eq!(inv, GroupElement::new(3, 0));
    }

    #[test]
    fn chi_values() {
        let p = make_lattice(6, 3).unwrap();
        // χ(q, q) = q
        let g = GroupElement::new(1, 0);
        assert!((p.chi(g, g) - p.q).norm() < 1e-15);
        // identity slot
        for h in p.elements() {
            assert!((p.chi(GroupElement::IDENTITY, h) - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        }
        // modulus clause at M=3: brute-force evaluation of |γ|^{N/(2πi) log r}
        let s = GroupElement::new(0, 1);
        let direct = {
            let gamma: Complex64 = Complex64::new(p.lambda, 0.0);
            let expo = Complex64::new(0.0, -(p.n as f64) / (2.0 * PI)) * gamma.norm().ln();
            (expo * Complex64::new(p.lambda.ln(), 0.0)).exp()
        };
        assert!((p.chi(s, s) - direct).norm() < 1e-12);
        assert!((p.chi(s, s) - Complex64::from_polar(1.0, -2.0 * PI / 3.0)).norm() < 1e-12);
    }

    #[test]
    fn bicharacter_laws() {
        let p = make_lattice(6, 3).unwrap();
        let els: Vec<_> = p.elements().collect();
        for &g in &els {
            for &h in &els {
                // symmetry and unimodularity
                assert!((p.chi(g, h) - p.chi(h, g)).norm() < 1e-15);
                assert!((p.chi(g, h).norm() - 1.0).abs() < 1e-15);
                for &f in &els {
                    let (gh, w) = p.mul(g, h);
                    if !w {
                        assert!((p.chi(gh, f) - p.chi(g, f) * p.chi(h, f)).norm() < 1e-12);
                    }
                }
            }
        }
        // nondegeneracy: chi(g,·) ≡ 1 over the window forces g = identity
        for &g in &els {
            if g.is_identity() {
                continue;
            }
            let trivial = els
                .iter()
                .all(|&h| (p.chi(g, h) - Complex64::new(1.0, 0.0)).norm() < 1e-9);
            assert!(!trivial);
        }
    }

    #[test]
    fn chi_ray_matches_chi_on_lattice() {
        let p = make_lattice(6, 3).unwrap();
        for g in p.elements() {
            for h in p.elements() {
                let r = p.chi_ray(p.embed(g), h).unwrap();
                assert!((r - p.chi(g, h)).norm() < 1e-12);
            }
        }
        // chi_ray(1, g) = 1
        for h in p.elements() {
            let r = p.chi_ray(Complex64::new(1.0, 0.0), h).unwrap();
            assert!((r - Complex64::new(1.0, 0.0)).norm() < 1e-14);
        }
        // half-step modulus point: exp(−πi/3) at M=3
        let z = Complex64::new(p.lambda.sqrt(), 0.0);
        let r = p.chi_ray(z, GroupElement::new(0, 1)).unwrap();
        assert!((r - Complex64::from_polar(1.0, -PI / 3.0)).norm() < 1e-12);
    }

    #[test]
    fn off_ray_rejected() {
        let p = make_lattice(6, 3).unwrap();
        let z = Complex64::from_polar(1.0, p.hbar * 0.5);
        assert!(matches!(
            p.chi_ray(z, GroupElement::IDENTITY),
            Err(Error::OffRay { .. })
        ));
    }

    #[test]
    fn index_roundtrip() {
        let p = make_lattice(8, 5).unwrap();
        for (i, g) in p.elements().enumerate() {
            assert_eq!(p.index(g), i);
            assert_eq!(p.element(i), g);
        }
    }
}
