//! Dense complex matrices for small Hilbert-space dimensions, with a cyclic
//! Jacobi eigensolver for Hermitian matrices.
//!
//! Everything here targets dimensions up to 9; storage is row-major and all
//! values are immutable after construction.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Tolerance for Hermiticity checks on states/effects.
pub const HERMITICITY_TOL: f64 = 1e-12;
/// Tolerance for unitarity and channel-normalization checks.
pub const UNITARITY_TOL: f64 = 1e-10;

/// Dense complex matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix {
    dim: usize,
    entries: Vec<Complex64>,
}

impl CMatrix {
    /// Build from row-major entries; `entries.len()` must equal `dim*dim`
    /// and every entry must be finite.
    pub fn new(dim: usize, entries: Vec<Complex64>) -> Result<Self> {
        if dim == 0 || entries.len() != dim * dim {
            return Err(Error::BadShape {
                dim,
                len: entries.len(),
            });
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { dim, entries })
    }

    pub(crate) fn from_vec_unchecked(dim: usize, entries: Vec<Complex64>) -> Self {
        debug_assert_eq!(entries.len(), dim * dim);
        Self { dim, entries }
    }

    /// Fill from a function of (row, col).
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut entries = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                entries.push(f(i, j));
            }
        }
        Self { dim, entries }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            entries: vec![Complex64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_fn(dim, |i, j| {
            if i == j {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }

    /// Rank-1 projector |k><k| in the computational basis.
    pub fn basis_projector(dim: usize, k: usize) -> Self {
        assert!(k < dim, "basis index out of range");
        Self::from_fn(dim, |i, j| {
            if i == k && j == k {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }

    /// Projector |psi><psi| onto a (not necessarily normalized) ket.
    pub fn ket_projector(ket: &[Complex64]) -> Self {
        let norm2: f64 = ket.iter().map(|z| z.norm_sqr()).sum();
        let dim = ket.len();
        Self::from_fn(dim, |i, j| ket[i] * ket[j].conj() / norm2)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> Complex64 {
        self.entries[i * self.dim + j]
    }

    #[inline]
    fn at_mut(&mut self, i: usize, j: usize) -> &mut Complex64 {
        &mut self.entries[i * self.dim + j]
    }

    pub fn check_same_dim(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimMismatch {
                left: self.dim,
                right: other.dim,
            });
        }
        Ok(())
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim, rhs.dim, "matrix product dimension mismatch");
        let d = self.dim;
        let mut out = Self::zeros(d);
        for i in 0..d {
            for k in 0..d {
                let a = self.at(i, k);
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for j in 0..d {
                    *out.at_mut(i, j) += a * rhs.at(k, j);
                }
            }
        }
        out
    }

    pub fn add(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim, rhs.dim);
        Self::from_vec_unchecked(
            self.dim,
            self.entries
                .iter()
                .zip(&rhs.entries)
                .map(|(a, b)| a + b)
                .collect(),
        )
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim, rhs.dim);
        Self::from_vec_unchecked(
            self.dim,
            self.entries
                .iter()
                .zip(&rhs.entries)
                .map(|(a, b)| a - b)
                .collect(),
        )
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self::from_vec_unchecked(self.dim, self.entries.iter().map(|a| a * c).collect())
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self.at(j, i).conj())
    }

    /// Integer power by repeated multiplication (exponents here never exceed 16).
    pub fn pow(&self, n: u32) -> Self {
        let mut out = Self::identity(self.dim);
        for _ in 0..n {
            out = out.mul(self);
        }
        out
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.at(i, i)).sum()
    }

    /// Largest entry-wise modulus of `self - rhs`.
    pub fn max_abs_diff(&self, rhs: &Self) -> f64 {
        self.entries
            .iter()
            .zip(&rhs.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Largest entry-wise modulus of `self - self^dagger`.
    pub fn hermiticity_deviation(&self) -> f64 {
        let mut dev: f64 = 0.0;
        for i in 0..self.dim {
            for j in i..self.dim {
                dev = dev.max((self.at(i, j) - self.at(j, i).conj()).norm());
            }
        }
        dev
    }

    /// Largest entry-wise modulus of `self^dagger self - 1`.
    pub fn unitarity_deviation(&self) -> f64 {
        self.adjoint().mul(self).max_abs_diff(&Self::identity(self.dim))
    }

    /// Embed into a larger dimension, padding with zeros (top-left block).
    pub fn embed(&self, dim: usize) -> Self {
        assert!(dim >= self.dim, "embedding must not shrink the matrix");
        Self::from_fn(dim, |i, j| {
            if i < self.dim && j < self.dim {
                self.at(i, j)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }
}

/// Eigenvalues of a Hermitian matrix in nondecreasing order.
///
/// Rejects inputs whose Hermiticity deviation exceeds `1e-10`.
pub fn eig_hermitian(m: &CMatrix) -> Result<Vec<f64>> {
    Ok(eigh(m)?.0)
}

/// Full spectral decomposition of a Hermitian matrix by cyclic Jacobi
/// rotations: returns `(eigenvalues, vectors)` with eigenvalues ascending and
/// eigenvectors as the corresponding columns of the unitary `vectors`.
pub fn eigh(m: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    let dev = m.hermiticity_deviation();
    if dev > UNITARITY_TOL {
        return Err(Error::NotHermitian { deviation: dev });
    }
    let d = m.dim();
    let mut a = m.clone();
    // Symmetrize exactly so the sweep below only reads the upper triangle.
    for i in 0..d {
        *a.at_mut(i, i) = Complex64::new(a.at(i, i).re, 0.0);
        for j in (i + 1)..d {
            let avg = (a.at(i, j) + a.at(j, i).conj()) * 0.5;
            *a.at_mut(i, j) = avg;
            *a.at_mut(j, i) = avg.conj();
        }
    }
    let mut v = CMatrix::identity(d);

    let scale: f64 = a
        .entries()
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
        .max(1.0);
    let stop = 1e-15 * scale;

    for _sweep in 0..60 {
        let mut off: f64 = 0.0;
        for p in 0..d {
            for q in (p + 1)..d {
                off = off.max(a.at(p, q).norm());
            }
        }
        if off <= stop {
            break;
        }
        for p in 0..d {
            for q in (p + 1)..d {
                let apq = a.at(p, q);
                let mag = apq.norm();
                if mag <= stop * 1e-2 {
                    continue;
                }
                // Unitary 2x2 rotation zeroing the (p,q) entry:
                // R[p][p]=c, R[p][q]=s*phase, R[q][p]=-s*conj(phase), R[q][q]=c.
                let phase = apq / mag;
                let app = a.at(p, p).re;
                let aqq = a.at(q, q).re;
                let tau = (aqq - app) / (2.0 * mag);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let sp = phase * s;

                // A <- R^dagger A R, applied as column then row updates.
                for k in 0..d {
                    let akp = a.at(k, p);
                    let akq = a.at(k, q);
                    *a.at_mut(k, p) = akp * c - akq * sp.conj();
                    *a.at_mut(k, q) = akp * sp + akq * c;
                }
                for k in 0..d {
                    let apk = a.at(p, k);
                    let aqk = a.at(q, k);
                    *a.at_mut(p, k) = apk * c - aqk * sp;
                    *a.at_mut(q, k) = apk * sp.conj() + aqk * c;
                }
                for k in 0..d {
                    let vkp = v.at(k, p);
                    let vkq = v.at(k, q);
                    *v.at_mut(k, p) = vkp * c - vkq * sp.conj();
                    *v.at_mut(k, q) = vkp * sp + vkq * c;
                }
            }
        }
    }

    let mut pairs: Vec<(f64, usize)> = (0..d).map(|i| (a.at(i, i).re, i)).collect();
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    let values: Vec<f64> = pairs.iter().map(|(val, _)| *val).collect();
    let vectors = CMatrix::from_fn(d, |i, j| v.at(i, pairs[j].1));
    Ok((values, vectors))
}
