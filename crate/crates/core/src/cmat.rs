//! Dense square complex matrices, row-major, with the handful of kernels the
//! workbench needs. Matrix products run parallel over output rows with a
//! fixed summation order per entry, so results are bit-identical across runs.

use num_complex::Complex64;
use rayon::prelude::*;
use std::ops::{Add, Mul, Sub};

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct CMat {
    dim: usize,
    data: Vec<Complex64>,
}

impl CMat {
    pub fn zeros(dim: usize) -> Self {
        CMat {
            dim,
            data: vec![Complex64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = CMat::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = CMat::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn from_diag(d: &[Complex64]) -> Self {
        let mut m = CMat::zeros(d.len());
        for (i, &v) in d.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn diagonal(&self) -> Vec<Complex64> {
        (0..self.dim).map(|i| self[(i, i)]).collect()
    }

    pub fn adjoint(&self) -> CMat {
        CMat::from_fn(self.dim, |i, j| self[(j, i)].conj())
    }

    pub fn scale(&self, s: Complex64) -> CMat {
        CMat {
            dim: self.dim,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn fro_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn check_dim(&self, expected: usize) -> Result<()> {
        if self.dim != expected {
            return Err(Error::DimensionMismatch {
                expected,
                got: self.dim,
            });
        }
        Ok(())
    }

    /// Left-multiply by a diagonal: diag(d) · self.
    pub fn diag_mul_left(&self, d: &[Complex64]) -> CMat {
        let mut out = self.clone();
        for i in 0..self.dim {
            let s = d[i];
            for j in 0..self.dim {
                out[(i, j)] *= s;
            }
        }
        out
    }

    /// Right-multiply by a diagonal: self · diag(d).
    pub fn diag_mul_right(&self, d: &[Complex64]) -> CMat {
        let mut out = self.clone();
        for i in 0..self.dim {
            for j in 0..self.dim {
                out[(i, j)] *= d[j];
            }
        }
        out
    }

    /// U · diag(d) · U† for a basis U holding eigenvectors in columns.
    pub fn conjugate_diag(basis: &CMat, d: &[Complex64]) -> CMat {
        basis.matmul(&CMat::from_diag(d)).matmul(&basis.adjoint())
    }

    /// self · other with rayon over rows; per-entry sums run in fixed k-order,
    /// so the result is bit-identical across runs and thread counts. Small
    /// products stay serial to avoid scheduling overhead.
    pub fn matmul(&self, other: &CMat) -> CMat {
        assert_eq!(self.dim, other.dim, "matmul dimension mismatch");
        let n = self.dim;
        let mut out = CMat::zeros(n);
        let row_task = |i: usize, row: &mut [Complex64]| {
            for k in 0..n {
                let aik = self.data[i * n + k];
                if aik.norm_sqr() == 0.0 {
                    continue;
                }
                let brow = &other.data[k * n..(k + 1) * n];
                for j in 0..n {
                    row[j] += aik * brow[j];
                }
            }
        };
        if n < 64 {
            for i in 0..n {
                row_task(i, &mut out.data[i * n..(i + 1) * n]);
            }
        } else {
            out.data
                .par_chunks_mut(n)
                .enumerate()
                .for_each(|(i, row)| row_task(i, row));
        }
        out
    }

    /// self · v for a vector v.
    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        let n = self.dim;
        (0..n)
            .map(|i| {
                let mut acc = Complex64::new(0.0, 0.0);
                for j in 0..n {
                    acc += self.data[i * n + j] * v[j];
                }
                acc
            })
            .collect()
    }

    /// Frobenius norm of self − other.
    pub fn dist(&self, other: &CMat) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(x, y)| (x - y).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// ‖self·self† − I‖_F, the unitarity defect.
    pub fn unitarity_defect(&self) -> f64 {
        self.matmul(&self.adjoint()).dist(&CMat::identity(self.dim))
    }

    /// ‖[self, self†]‖_F / ‖self‖²_F, the relative normality defect.
    pub fn normality_defect(&self) -> f64 {
        let ad = self.adjoint();
        let c = self.matmul(&ad).sub_ref(&ad.matmul(self));
        let n2 = self.fro_norm().powi(2);
        if n2 == 0.0 {
            0.0
        } else {
            c.fro_norm() / n2
        }
    }

    /// ‖self − self†‖_F / ‖self‖_F.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.fro_norm();
        if n == 0.0 {
            0.0
        } else {
            self.dist(&self.adjoint()) / n
        }
    }

    pub fn add_ref(&self, other: &CMat) -> CMat {
        assert_eq!(self.dim, other.dim);
        CMat {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(x, y)| x + y)
                .collect(),
        }
    }

    pub fn sub_ref(&self, other: &CMat) -> CMat {
        assert_eq!(self.dim, other.dim);
        CMat {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(x, y)| x - y)
                .collect(),
        }
    }

    /// Entrywise projection on both sides: diag(sel)·self·diag(sel) for a
    /// 0/1 selector, used by bulk-window compressions.
    pub fn window(&self, sel: &[f64]) -> CMat {
        CMat::from_fn(self.dim, |i, j| self[(i, j)] * sel[i] * sel[j])
    }

    /// Commutator self·other − other·self.
    pub fn commutator(&self, other: &CMat) -> CMat {
        self.matmul(other).sub_ref(&other.matmul(self))
    }
}

impl std::ops::Index<(usize, usize)> for CMat {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.dim + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.dim + j]
    }
}

impl Mul for &CMat {
    type Output = CMat;
    fn mul(self, rhs: &CMat) -> CMat {
        self.matmul(rhs)
    }
}

impl Add for &CMat {
    type Output = CMat;
    fn add(self, rhs: &CMat) -> CMat {
        self.add_ref(rhs)
    }
}

impl Sub for &CMat {
    type Output = CMat;
    fn sub(self, rhs: &CMat) -> CMat {
        self.sub_ref(rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matmul_identity() {
        let a = CMat::from_fn(4, |i, j| Complex64::new(i as f64, j as f64));
        let i4 = CMat::identity(4);
        assert!(a.matmul(&i4).dist(&a) < 1e-14);
        assert!(i4.matmul(&a).dist(&a) < 1e-14);
    }

    #[test]
    fn adjoint_involution() {
        let a = CMat::from_fn(3, |i, j| Complex64::new(i as f64 + 0.5, j as f64 - 1.0));
        assert!(a.adjoint().adjoint().dist(&a) < 1e-15);
    }

    #[test]
    fn diag_mul_agrees_with_matmul() {
        let a = CMat::from_fn(5, |i, j| Complex64::new((i * j) as f64, (i + j) as f64));
        let d: Vec<_> = (0..5).map(|i| Complex64::new(1.0 + i as f64, -0.3)).collect();
        let dm = CMat::from_diag(&d);
        assert!(a.diag_mul_left(&d).dist(&dm.matmul(&a)) < 1e-12);
        assert!(a.diag_mul_right(&d).dist(&a.matmul(&dm)) < 1e-12);
    }
}
