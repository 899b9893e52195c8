//! Dense complex matrices for the small operators used throughout the crate.
//!
//! Dimensions never exceed 16 (two qubits on the Choi space), so everything
//! is a row-major `Vec` and the eigensolver is plain cyclic Jacobi.

use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Which factor of a bipartite space to keep in a partial trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    A,
    B,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> ComplexMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex::one();
        }
        m
    }

    /// Builds a matrix from row-major entries; the length must equal `rows * cols`.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<Complex<T>>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::DimensionMismatch(
                "matrix dimensions must be positive".into(),
            ));
        }
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> Complex<T>,
    ) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    /// Real matrix from nested rows of `f64` literals. Panics on ragged input.
    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let n = rows.len();
        let m = rows.first().map_or(0, |r| r.len());
        assert!(rows.iter().all(|r| r.len() == m), "ragged rows");
        Self::from_fn(n, m, |r, c| Complex::new(T::lit(rows[r][c]), T::zero()))
    }

    pub fn from_diag(diag: &[Complex<T>]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    pub fn from_real_diag(diag: &[T]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = Complex::new(d, T::zero());
        }
        m
    }

    /// `|u⟩⟨v|`.
    pub fn outer(u: &[Complex<T>], v: &[Complex<T>]) -> Self {
        Self::from_fn(u.len(), v.len(), |r, c| u[r] * v[c].conj())
    }

    /// `|v⟩⟨v|`.
    pub fn projector(v: &[Complex<T>]) -> Self {
        Self::outer(v, v)
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[Complex<T>] {
        &self.data
    }

    pub fn diagonal(&self) -> Vec<Complex<T>> {
        (0..self.rows.min(self.cols))
            .map(|i| self[(i, i)])
            .collect()
    }

    pub fn map(&self, f: impl Fn(Complex<T>) -> Complex<T>) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| f(z)).collect(),
        }
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)])
    }

    pub fn conj(&self) -> Self {
        self.map(|z| z.conj())
    }

    pub fn scale(&self, s: T) -> Self {
        self.map(|z| z * s)
    }

    pub fn scale_complex(&self, s: Complex<T>) -> Self {
        self.map(|z| z * s)
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(r, k)];
                if a.is_zero() {
                    continue;
                }
                for c in 0..other.cols {
                    out.data[r * other.cols + c] = out.data[r * other.cols + c] + a * other[(k, c)];
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[Complex<T>]) -> Result<Vec<Complex<T>>> {
        if self.cols != v.len() {
            return Err(Error::DimensionMismatch(format!(
                "cannot apply {}x{} matrix to vector of length {}",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        Ok((0..self.rows)
            .map(|r| (0..self.cols).fold(Complex::zero(), |acc, c| acc + self[(r, c)] * v[c]))
            .collect())
    }

    /// Kronecker product; `self`'s indices are the major (slow) ones.
    pub fn kron(&self, other: &Self) -> Self {
        let rows = self.rows * other.rows;
        let cols = self.cols * other.cols;
        Self::from_fn(rows, cols, |r, c| {
            self[(r / other.rows, c / other.cols)] * other[(r % other.rows, c % other.cols)]
        })
    }

    /// Partial trace of an operator on `A ⊗ B` (A major), keeping `keep`.
    pub fn partial_trace(&self, dims: (usize, usize), keep: Subsystem) -> Result<Self> {
        let (da, db) = dims;
        let n = da * db;
        if !self.is_square() || self.rows != n {
            return Err(Error::DimensionMismatch(format!(
                "partial trace over {da}x{db} needs a {n}x{n} matrix, got {}x{}",
                self.rows, self.cols
            )));
        }
        let out = match keep {
            Subsystem::A => Self::from_fn(da, da, |i, j| {
                (0..db).fold(Complex::zero(), |acc, k| {
                    acc + self[(i * db + k, j * db + k)]
                })
            }),
            Subsystem::B => Self::from_fn(db, db, |i, j| {
                (0..da).fold(Complex::zero(), |acc, k| {
                    acc + self[(k * db + i, k * db + j)]
                })
            }),
        };
        Ok(out)
    }

    pub fn trace(&self) -> Complex<T> {
        self.diagonal()
            .into_iter()
            .fold(Complex::zero(), |a, b| a + b)
    }

    pub fn frobenius_norm(&self) -> T {
        self.data.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt()
    }

    /// Largest entrywise modulus of `self - other`; infinite on shape mismatch.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        if self.rows != other.rows || self.cols != other.cols {
            return T::infinity();
        }
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (*a - *b).norm())
            .fold(T::zero(), T::max)
    }

    /// `(M + M†)/2`.
    pub fn hermitian_part(&self) -> Self {
        let half = T::lit(0.5);
        Self::from_fn(self.rows, self.cols, |r, c| {
            (self[(r, c)] + self[(c, r)].conj()) * half
        })
    }

    fn hermitian_deviation(&self) -> T {
        let mut dev = T::zero();
        for r in 0..self.rows {
            for c in r..self.cols {
                dev = dev.max((self[(r, c)] - self[(c, r)].conj()).norm());
            }
        }
        dev
    }

    pub fn is_hermitian(&self, tol: T) -> bool {
        self.is_square() && self.hermitian_deviation() <= tol
    }

    pub fn is_psd(&self, tol: T) -> bool {
        if !self.is_hermitian(tol) {
            return false;
        }
        match self.hermitian_part().eigh() {
            Ok(e) => e.values.iter().all(|&v| v >= -tol),
            Err(_) => false,
        }
    }

    pub fn is_unitary(&self, tol: T) -> bool {
        if !self.is_square() {
            return false;
        }
        let prod = &self.adjoint() * self;
        prod.max_abs_diff(&Self::identity(self.rows)) <= tol
    }

    /// Largest singular value, from the spectrum of `M†M`.
    pub fn max_singular_value(&self) -> T {
        let gram = (&self.adjoint() * self).hermitian_part();
        let eig = gram.eigh().expect("M†M is Hermitian by construction");
        eig.values
            .last()
            .copied()
            .unwrap_or(T::zero())
            .max(T::zero())
            .sqrt()
    }

    /// Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi rotations.
    ///
    /// Eigenvalues are returned in ascending order with matching eigenvector
    /// columns. Sweeps stop once the off-diagonal Frobenius norm drops below
    /// [`Real::jacobi_tol`] (or machine precision relative to the matrix norm)
    /// or after 100 sweeps.
    pub fn eigh(&self) -> Result<HermitianEigen<T>> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "eigendecomposition of a non-square {}x{} matrix",
                self.rows, self.cols
            )));
        }
        let scale = T::one().max(self.frobenius_norm());
        let dev = self.hermitian_deviation();
        if dev > T::validation_tol() * scale {
            return Err(Error::NotHermitian(dev.to_f64_lossy()));
        }

        let n = self.rows;
        let mut a = self.hermitian_part();
        let mut v = Self::identity(n);
        let stop = T::jacobi_tol().max(T::epsilon() * scale);

        for _sweep in 0..100 {
            if a.off_diagonal_norm() < stop {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    a.jacobi_rotate(&mut v, p, q);
                }
            }
        }

        let mut order: Vec<usize> = (0..n).collect();
        let diag: Vec<T> = (0..n).map(|i| a[(i, i)].re).collect();
        order.sort_by(|&i, &j| {
            diag[i]
                .partial_cmp(&diag[j])
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        let values = order.iter().map(|&i| diag[i]).collect();
        let vectors = Self::from_fn(n, n, |r, c| v[(r, order[c])]);
        Ok(HermitianEigen { values, vectors })
    }

    fn off_diagonal_norm(&self) -> T {
        let mut acc = T::zero();
        for r in 0..self.rows {
            for c in 0..self.cols {
                if r != c {
                    acc = acc + self[(r, c)].norm_sqr();
                }
            }
        }
        acc.sqrt()
    }

    /// Annihilates `a[p][q]` with `A ← J† A J`, accumulating `V ← V J`.
    fn jacobi_rotate(&mut self, v: &mut Self, p: usize, q: usize) {
        let apq = self[(p, q)];
        let g = apq.norm();
        if g <= T::min_positive_value().sqrt() {
            return;
        }
        // Phase that makes the (p, q) entry real before the real rotation.
        let phase = apq / g;
        let app = self[(p, p)].re;
        let aqq = self[(q, q)].re;
        let tau = (aqq - app) / (g + g);
        let t = if tau >= T::zero() {
            T::one() / (tau + (T::one() + tau * tau).sqrt())
        } else {
            -T::one() / (-tau + (T::one() + tau * tau).sqrt())
        };
        let c = T::one() / (T::one() + t * t).sqrt();
        let s = t * c;

        let j_pp = Complex::new(c, T::zero());
        let j_pq = Complex::new(s, T::zero());
        let j_qp = phase.conj() * (-s);
        let j_qq = phase.conj() * c;

        let n = self.rows;
        for k in 0..n {
            let akp = self[(k, p)];
            let akq = self[(k, q)];
            self[(k, p)] = akp * j_pp + akq * j_qp;
            self[(k, q)] = akp * j_pq + akq * j_qq;
        }
        for k in 0..n {
            let apk = self[(p, k)];
            let aqk = self[(q, k)];
            self[(p, k)] = j_pp.conj() * apk + j_qp.conj() * aqk;
            self[(q, k)] = j_pq.conj() * apk + j_qq.conj() * aqk;
        }
        self[(p, q)] = Complex::zero();
        self[(q, p)] = Complex::zero();
        self[(p, p)] = Complex::new(self[(p, p)].re, T::zero());
        self[(q, q)] = Complex::new(self[(q, q)].re, T::zero());

        for k in 0..n {
            let vkp = v[(k, p)];
            let vkq = v[(k, q)];
            v[(k, p)] = vkp * j_pp + vkq * j_qp;
            v[(k, q)] = vkp * j_pq + vkq * j_qq;
        }
    }

    /// Principal square root of a PSD matrix.
    ///
    /// Eigenvalues in `[-tol, 0)` and positive ones at round-off level are
    /// clamped to zero first, so rank-deficient inputs keep their rank.
    pub fn psd_sqrt(&self) -> Result<Self> {
        let eig = self.eigh()?;
        eig.check_psd()?;
        let floor = eig.noise_floor();
        Ok(eig.map_values(|x| if x <= floor { T::zero() } else { x.sqrt() }))
    }

    /// `M^{-1/2}` for a positive definite matrix; fails if an eigenvalue is below `cutoff`.
    pub fn psd_inv_sqrt(&self, cutoff: T) -> Result<Self> {
        let eig = self.eigh()?;
        if let Some(&min) = eig.values.first() {
            if min < cutoff {
                return Err(Error::NotPositiveSemidefinite(min.to_f64_lossy()));
            }
        }
        Ok(eig.map_values(|x| T::one() / x.sqrt()))
    }
}

/// Spectral decomposition `M = V diag(values) V†`.
#[derive(Debug, Clone)]
pub struct HermitianEigen<T> {
    /// Ascending.
    pub values: Vec<T>,
    /// Unitary; column `k` pairs with `values[k]`.
    pub vectors: ComplexMatrix<T>,
}

impl<T: Real> HermitianEigen<T> {
    /// `V f(Λ) V†`.
    pub fn map_values(&self, f: impl Fn(T) -> T) -> ComplexMatrix<T> {
        let fv: Vec<T> = self.values.iter().map(|&x| f(x)).collect();
        self.map_values_from(&fv)
    }

    /// `V diag(values) V†` with replacement eigenvalues.
    pub fn map_values_from(&self, values: &[T]) -> ComplexMatrix<T> {
        let n = self.values.len();
        ComplexMatrix::from_fn(n, n, |r, c| {
            (0..n).fold(Complex::zero(), |acc, k| {
                acc + self.vectors[(r, k)] * self.vectors[(c, k)].conj() * values[k]
            })
        })
    }

    pub fn reconstruct(&self) -> ComplexMatrix<T> {
        self.map_values(|x| x)
    }

    pub fn eigenvector(&self, k: usize) -> Vec<Complex<T>> {
        (0..self.values.len())
            .map(|r| self.vectors[(r, k)])
            .collect()
    }

    /// Magnitude below which an eigenvalue is indistinguishable from round-off.
    pub fn noise_floor(&self) -> T {
        let scale = self.values.iter().fold(T::one(), |m, v| m.max(v.abs()));
        T::epsilon() * T::lit(64.0) * scale
    }

    /// Eigenvalues with round-off and small negative values set to zero.
    pub fn clamped_values(&self) -> Vec<T> {
        let floor = self.noise_floor();
        self.values
            .iter()
            .map(|&v| if v <= floor { T::zero() } else { v })
            .collect()
    }

    /// Errors if any eigenvalue lies below `-validation_tol`.
    pub fn check_psd(&self) -> Result<()> {
        match self.values.first() {
            Some(&min) if min < -T::validation_tol() => {
                Err(Error::NotPositiveSemidefinite(min.to_f64_lossy()))
            }
            _ => Ok(()),
        }
    }
}

pub fn matmul<T: Real>(a: &ComplexMatrix<T>, b: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
    a.matmul(b)
}

pub fn tensor<T: Real>(a: &ComplexMatrix<T>, b: &ComplexMatrix<T>) -> ComplexMatrix<T> {
    a.kron(b)
}

pub fn partial_trace<T: Real>(
    m: &ComplexMatrix<T>,
    dims: (usize, usize),
    keep: Subsystem,
) -> Result<ComplexMatrix<T>> {
    m.partial_trace(dims, keep)
}

pub fn hermitian_eig<T: Real>(m: &ComplexMatrix<T>) -> Result<HermitianEigen<T>> {
    m.eigh()
}

pub fn psd_sqrt<T: Real>(m: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
    m.psd_sqrt()
}

/// `⟨u|v⟩`.
pub fn inner<T: Real>(u: &[Complex<T>], v: &[Complex<T>]) -> Complex<T> {
    u.iter()
        .zip(v)
        .fold(Complex::zero(), |acc, (a, b)| acc + a.conj() * b)
}

impl<T> Index<(usize, usize)> for ComplexMatrix<T> {
    type Output = Complex<T>;

    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &Self::Output {
        debug_assert!(r < self.rows && c < self.cols);
        &self.data[r * self.cols + c]
    }
}

impl<T> IndexMut<(usize, usize)> for ComplexMatrix<T> {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Self::Output {
        debug_assert!(r < self.rows && c < self.cols);
        &mut self.data[r * self.cols + c]
    }
}

impl<T: Real> Mul for &ComplexMatrix<T> {
    type Output = ComplexMatrix<T>;

    fn mul(self, rhs: Self) -> ComplexMatrix<T> {
        self.matmul(rhs).expect("matrix dimensions must agree")
    }
}

impl<T: Real> Mul for ComplexMatrix<T> {
    type Output = ComplexMatrix<T>;

    fn mul(self, rhs: Self) -> ComplexMatrix<T> {
        &self * &rhs
    }
}

macro_rules! elementwise_op {
    ($trait:ident, $method:ident, $op:tt) => {
        impl<T: Real> $trait for &ComplexMatrix<T> {
            type Output = ComplexMatrix<T>;

            fn $method(self, rhs: Self) -> ComplexMatrix<T> {
                assert_eq!(
                    (self.rows, self.cols),
                    (rhs.rows, rhs.cols),
                    "matrix shapes must agree"
                );
                ComplexMatrix {
                    rows: self.rows,
                    cols: self.cols,
                    data: self.data.iter().zip(&rhs.data).map(|(a, b)| *a $op *b).collect(),
                }
            }
        }

        impl<T: Real> $trait for ComplexMatrix<T> {
            type Output = ComplexMatrix<T>;

            fn $method(self, rhs: Self) -> ComplexMatrix<T> {
                &self $op &rhs
            }
        }
    };
}

elementwise_op!(Add, add, +);
elementwise_op!(Sub, sub, -);
