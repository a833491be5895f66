//! Tensor-leg plumbing: Kronecker products, leg placement on a three-factor
//! space, and structured products of two-leg operators that avoid
//! materializing (d₁d₂d₃)-dimensional factors until the final result.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::cmat::CMat;
use crate::Result;

pub fn kron(x: &CMat, y: &CMat) -> CMat {
    let (dx, dy) = (x.dim(), y.dim());
    let n = dx * dy;
    let mut out = CMat::zeros(n);
    for i1 in 0..dx {
        for j1 in 0..dx {
            let v = x[(i1, j1)];
            if v.norm_sqr() == 0.0 {
                continue;
            }
            for i2 in 0..dy {
                for j2 in 0..dy {
                    out[(i1 * dy + i2, j1 * dy + j2)] = v * y[(i2, j2)];
                }
            }
        }
    }
    out
}

/// Which pair of legs a two-leg operator occupies on `H₁⊗H₂⊗H₃`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LegPattern {
    OneTwo,
    OneThree,
    TwoThree,
}

impl LegPattern {
    fn legs(self) -> (usize, usize) {
        match self {
            LegPattern::OneTwo => (0, 1),
            LegPattern::OneThree => (0, 2),
            LegPattern::TwoThree => (1, 2),
        }
    }
}

#[inline]
fn fuse(i: [usize; 3], dims: (usize, usize, usize)) -> usize {
    (i[0] * dims.1 + i[1]) * dims.2 + i[2]
}

/// Embed a two-leg operator into the three-factor space, acting as identity
/// on the remaining leg.
pub fn place_legs(x: &CMat, pattern: LegPattern, dims: (usize, usize, usize)) -> Result<CMat> {
    let (la, lb) = pattern.legs();
    let d = [dims.0, dims.1, dims.2];
    x.check_dim(d[la] * d[lb])?;
    let total = dims.0 * dims.1 * dims.2;
    let mut out = CMat::zeros(total);
    let mut idx = [0usize; 3];
    let mut jdx = [0usize; 3];
    for i0 in 0..d[0] {
        for i1 in 0..d[1] {
            for i2 in 0..d[2] {
                idx = [i0, i1, i2];
                let r = fuse(idx, dims);
                for ja in 0..d[la] {
                    for jb in 0..d[lb] {
                        jdx = idx;
                        jdx[la] = ja;
                        jdx[lb] = jb;
                        let c = fuse(jdx, dims);
                        out[(r, c)] = x[(idx[la] * d[lb] + idx[lb], ja * d[lb] + jb)];
                    }
                }
            }
        }
    }
    let _ = (idx, jdx);
    Ok(out)
}

/// A two-leg factor in a product expression on `H₁⊗H₂⊗H₃`.
pub struct TwoLeg<'a> {
    pub mat: &'a CMat,
    pub pattern: LegPattern,
}

/// Product of two two-leg operators that overlap in exactly one leg,
/// returned dense on the full three-factor space. Runs in O(d⁷) instead of
/// the O(d⁹) of a dense product of placed factors.
pub fn two_leg_product(a: &TwoLeg, b: &TwoLeg, dims: (usize, usize, usize)) -> Result<CMat> {
    let d = [dims.0, dims.1, dims.2];
    let (a0, a1) = a.pattern.legs();
    let (b0, b1) = b.pattern.legs();
    a.mat.check_dim(d[a0] * d[a1])?;
    b.mat.check_dim(d[b0] * d[b1])?;
    let total = d[0] * d[1] * d[2];
    let mut out = CMat::zeros(total);
    // shared legs: those occupied by both factors
    let in_a = |l: usize| l == a0 || l == a1;
    let in_b = |l: usize| l == b0 || l == b1;
    let shared: Vec<usize> = (0..3).filter(|&l| in_a(l) && in_b(l)).collect();
    if shared.len() != 1 {
        // same legs or disjoint legs: fall back to placed dense product
        let pa = place_legs(a.mat, a.pattern, dims)?;
        let pb = place_legs(b.mat, b.pattern, dims)?;
        return Ok(pa.matmul(&pb));
    }
    let s = shared[0];
    for r0 in 0..d[0] {
        for r1 in 0..d[1] {
            for r2 in 0..d[2] {
                let row = [r0, r1, r2];
                let rfused = fuse(row, dims);
                // column indices: legs of a not shared take a's column index,
                // legs of b not shared take b's column index, the remaining
                // free leg keeps the row index; sum over the shared leg.
                for c0 in 0..if in_a(0) || in_b(0) { d[0] } else { 1 } {
                    for c1 in 0..if in_a(1) || in_b(1) { d[1] } else { 1 } {
                        for c2 in 0..if in_a(2) || in_b(2) { d[2] } else { 1 } {
                            let col_raw = [c0, c1, c2];
                            let mut col = row;
                            for l in 0..3 {
                                if in_a(l) || in_b(l) {
                                    col[l] = col_raw[l];
                                }
                            }
                            let mut acc = Complex64::new(0.0, 0.0);
                            for m in 0..d[s] {
                                // a entry: rows from `row`, cols: shared -> m, a-own -> col
                                let mut ac = [0usize; 2];
                                let mut ar = [0usize; 2];
                                for (slot, &l) in [a0, a1].iter().enumerate() {
                                    ar[slot] = row[l];
                                    ac[slot] = if l == s { m } else { col[l] };
                                }
                                let av = a.mat[(ar[0] * d[a1] + ar[1], ac[0] * d[a1] + ac[1])];
                                if av.norm_sqr() == 0.0 {
                                    continue;
                                }
                                let mut bc = [0usize; 2];
                                let mut br = [0usize; 2];
                                for (slot, &l) in [b0, b1].iter().enumerate() {
                                    br[slot] = if l == s { m } else { row[l] };
                                    bc[slot] = col[l];
                                }
                                let bv = b.mat[(br[0] * d[b1] + br[1], bc[0] * d[b1] + bc[1])];
                                acc += av * bv;
                            }
                            out[(rfused, fuse(col, dims))] = acc;
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Left-multiply a dense three-leg matrix by a two-leg factor: O(d⁸).
pub fn two_leg_times_big(a: &TwoLeg, x: &CMat, dims: (usize, usize, usize)) -> Result<CMat> {
    let d = [dims.0, dims.1, dims.2];
    let (a0, a1) = a.pattern.legs();
    a.mat.check_dim(d[a0] * d[a1])?;
    let total = d[0] * d[1] * d[2];
    x.check_dim(total)?;
    let mut out = CMat::zeros(total);
    let rows: Vec<(usize, Vec<Complex64>)> = (0..total)
        .into_par_iter()
        .map(|rfused| {
            let row = [
                rfused / (d[1] * d[2]),
                (rfused / d[2]) % d[1],
                rfused % d[2],
            ];
            let mut acc = vec![Complex64::new(0.0, 0.0); total];
            for m0 in 0..d[a0] {
                for m1 in 0..d[a1] {
                    let av = a.mat[(row[a0] * d[a1] + row[a1], m0 * d[a1] + m1)];
                    if av.norm_sqr() == 0.0 {
                        continue;
                    }
                    let mut mid = row;
                    mid[a0] = m0;
                    mid[a1] = m1;
                    let mrow = x.row(fuse(mid, dims));
                    for (t, v) in acc.iter_mut().zip(mrow) {
                        *t += av * v;
                    }
                }
            }
            (rfused, acc)
        })
        .collect();
    for (r, acc) in rows {
        for (c, v) in acc.into_iter().enumerate() {
            out[(r, c)] = v;
        }
    }
    Ok(out)
}

/// Apply a two-leg factor to a vector of the three-factor space: O(d⁴·…).
pub fn two_leg_apply(a: &TwoLeg, v: &[Complex64], dims: (usize, usize, usize)) -> Vec<Complex64> {
    let d = [dims.0, dims.1, dims.2];
    let (a0, a1) = a.pattern.legs();
    let total = d[0] * d[1] * d[2];
    debug_assert_eq!(v.len(), total);
    let mut out = vec![Complex64::new(0.0, 0.0); total];
    for rfused in 0..total {
        let row = [
            rfused / (d[1] * d[2]),
            (rfused / d[2]) % d[1],
            rfused % d[2],
        ];
        let mut acc = Complex64::new(0.0, 0.0);
        for m0 in 0..d[a0] {
            for m1 in 0..d[a1] {
                let av = a.mat[(row[a0] * d[a1] + row[a1], m0 * d[a1] + m1)];
                if av.norm_sqr() == 0.0 {
                    continue;
                }
                let mut mid = row;
                mid[a0] = m0;
                mid[a1] = m1;
                acc += av * v[fuse(mid, dims)];
            }
        }
        out[rfused] = acc;
    }
    out
}

/// The 2↔3 leg-swap permutation matrix on `H₁⊗H₂⊗H₃`.
pub fn swap_legs_23(dims: (usize, usize, usize)) -> CMat {
    let total = dims.0 * dims.1 * dims.2;
    let mut p = CMat::zeros(total);
    for i0 in 0..dims.0 {
        for i1 in 0..dims.1 {
            for i2 in 0..dims.2 {
                let r = fuse([i0, i1, i2], dims);
                let c = fuse([i0, i2, i1], (dims.0, dims.2, dims.1));
                p[(r, c)] = Complex64::new(1.0, 0.0);
            }
        }
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn randm(n: usize, seed: u64) -> CMat {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        CMat::from_fn(n, |_, _| {
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        })
    }

    #[test]
    fn place_identity_any_pattern() {
        let dims = (2, 3, 2);
        let i6 = CMat::identity(6);
        for pat in [LegPattern::OneTwo, LegPattern::TwoThree] {
            let placed = place_legs(&i6, pat, dims).unwrap();
            assert!(placed.dist(&CMat::identity(12)) < 1e-15);
        }
        let i4 = CMat::identity(4);
        let placed = place_legs(&i4, LegPattern::OneThree, dims).unwrap();
        assert!(placed.dist(&CMat::identity(12)) < 1e-15);
    }

    #[test]
    fn place_12_with_trivial_third_leg() {
        let x = randm(6, 1);
        let placed = place_legs(&x, LegPattern::OneTwo, (2, 3, 1)).unwrap();
        assert!(placed.dist(&x) < 1e-15);
    }

    #[test]
    fn place_12_is_kron_with_identity() {
        let x = randm(4, 2);
        let placed = place_legs(&x, LegPattern::OneTwo, (2, 2, 3)).unwrap();
        assert!(placed.dist(&kron(&x, &CMat::identity(3))) < 1e-14);
        let placed23 = place_legs(&x, LegPattern::TwoThree, (3, 2, 2)).unwrap();
        assert!(placed23.dist(&kron(&CMat::identity(3), &x)) < 1e-14);
    }

    #[test]
    fn pattern_13_via_swap_conjugation() {
        // brute force on 2x2x2 random X
        let dims = (2, 2, 2);
        let x = randm(4, 3);
        let placed = place_legs(&x, LegPattern::OneThree, dims).unwrap();
        let p = swap_legs_23(dims);
        let expect = p.matmul(&place_legs(&x, LegPattern::OneTwo, dims).unwrap()).matmul(&p);
        assert!(placed.dist(&expect) < 1e-13);
    }

    #[test]
    fn leg_one_commutes_with_leg_23() {
        let dims = (3, 2, 2);
        let x = randm(3, 4); // acts on leg 1 only
        let y = randm(4, 5);
        let x123 = kron(&kron(&x, &CMat::identity(2)), &CMat::identity(2));
        let y23 = place_legs(&y, LegPattern::TwoThree, dims).unwrap();
        let c = x123.matmul(&y23).sub_ref(&y23.matmul(&x123));
        assert!(c.fro_norm() < 1e-13);
    }

    #[test]
    fn structured_product_matches_dense() {
        let dims = (3, 3, 3);
        let a = randm(9, 6);
        let b = randm(9, 7);
        for (pa, pb) in [
            (LegPattern::TwoThree, LegPattern::OneTwo),
            (LegPattern::OneTwo, LegPattern::OneThree),
            (LegPattern::OneThree, LegPattern::TwoThree),
        ] {
            let fast = two_leg_product(&TwoLeg { mat: &a, pattern: pa }, &TwoLeg { mat: &b, pattern: pb }, dims).unwrap();
            let dense = place_legs(&a, pa, dims)
                .unwrap()
                .matmul(&place_legs(&b, pb, dims).unwrap());
            assert!(fast.dist(&dense) < 1e-11, "pattern {pa:?} x {pb:?}");
        }
    }

    #[test]
    fn structured_big_product_matches_dense() {
        let dims = (2, 3, 2);
        let a = randm(6, 8);
        let x = randm(12, 9);
        let fast = two_leg_times_big(&TwoLeg { mat: &a, pattern: LegPattern::OneTwo }, &x, dims).unwrap();
        let dense = place_legs(&a, LegPattern::OneTwo, dims).unwrap().matmul(&x);
        assert!(fast.dist(&dense) < 1e-12);
    }

    #[test]
    fn apply_matches_dense() {
        let dims = (2, 3, 2);
        let a = randm(4, 10);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let v: Vec<Complex64> = (0..12)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let fast = two_leg_apply(&TwoLeg { mat: &a, pattern: LegPattern::OneThree }, &v, dims);
        let dense = place_legs(&a, LegPattern::OneThree, dims).unwrap().apply(&v);
        let err: f64 = fast
            .iter()
            .zip(&dense)
            .map(|(x, y)| (x - y).norm_sqr())
            .sum::<f64>()
            .sqrt();
        assert!(err < 1e-12);
    }
}
