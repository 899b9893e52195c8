//! Pure and mixed states, Pauli operators and Haar-random sampling.

use num_complex::Complex;
use num_traits::{One, Zero};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{inner, ComplexMatrix};
use crate::rng;
use crate::scalar::Real;

/// Pure qubit state `cos(θ/2)|0⟩ + e^{iφ} sin(θ/2)|1⟩` on the Poincaré sphere.
///
/// Angles are reduced at construction to `θ ∈ [0, π]`, `φ ∈ [0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PureQubitState<T> {
    theta: T,
    phi: T,
}

impl<T: Real> PureQubitState<T> {
    pub fn new(theta: T, phi: T) -> Self {
        let two_pi = T::TAU();
        let mut theta = theta % two_pi;
        if theta < T::zero() {
            theta = theta + two_pi;
        }
        let mut phi = phi;
        // θ ∈ (π, 2π) is the same point as 2π − θ on the opposite meridian.
        if theta > T::PI() {
            theta = two_pi - theta;
            phi = phi + T::PI();
        }
        let mut phi = phi % two_pi;
        if phi < T::zero() {
            phi = phi + two_pi;
        }
        if phi >= two_pi {
            phi = phi - two_pi;
        }
        Self { theta, phi }
    }

    pub fn from_degrees(theta: T, phi: T) -> Self {
        Self::new(theta.to_radians(), phi.to_radians())
    }

    #[inline]
    pub fn theta(&self) -> T {
        self.theta
    }

    #[inline]
    pub fn phi(&self) -> T {
        self.phi
    }

    pub fn to_vector(&self) -> StateVector<T> {
        let half = self.theta / T::lit(2.0);
        StateVector {
            amplitudes: vec![
                Complex::new(half.cos(), T::zero()),
                Complex::from_polar(half.sin(), self.phi),
            ],
        }
    }

    /// `sin(θ/2)|0⟩ − e^{iφ} cos(θ/2)|1⟩`.
    pub fn orthogonal_partner(&self) -> StateVector<T> {
        let half = self.theta / T::lit(2.0);
        StateVector {
            amplitudes: vec![
                Complex::new(half.sin(), T::zero()),
                -Complex::from_polar(half.cos(), self.phi),
            ],
        }
    }

    pub fn density(&self) -> DensityMatrix<T> {
        DensityMatrix::from_pure(&self.to_vector())
    }
}

pub fn to_vector<T: Real>(s: &PureQubitState<T>) -> StateVector<T> {
    s.to_vector()
}

pub fn orthogonal_partner<T: Real>(s: &PureQubitState<T>) -> StateVector<T> {
    s.orthogonal_partner()
}

/// Normalized state vector.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector<T> {
    amplitudes: Vec<Complex<T>>,
}

impl<T: Real> StateVector<T> {
    /// Accepts amplitudes whose norm is already 1 within `validation_tol`.
    pub fn new(amplitudes: Vec<Complex<T>>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::InvalidStateVector("empty amplitude vector".into()));
        }
        let norm_sqr: T = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm_sqr.sqrt() - T::one()).abs() > T::validation_tol() {
            return Err(Error::InvalidStateVector(format!(
                "norm {} differs from 1",
                norm_sqr.sqrt()
            )));
        }
        Ok(Self { amplitudes })
    }

    /// Rescales arbitrary amplitudes to unit norm, returning the original squared norm.
    pub fn normalize(amplitudes: Vec<Complex<T>>) -> Result<(Self, T)> {
        let norm_sqr: T = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if amplitudes.is_empty()
            || norm_sqr.is_nan()
            || norm_sqr <= T::zero()
            || !norm_sqr.is_finite()
        {
            return Err(Error::InvalidStateVector(format!(
                "cannot normalize a vector with squared norm {norm_sqr}"
            )));
        }
        let inv = T::one() / norm_sqr.sqrt();
        let amplitudes = amplitudes.into_iter().map(|a| a * inv).collect();
        Ok((Self { amplitudes }, norm_sqr))
    }

    /// Computational basis vector `|k⟩`.
    pub fn basis(dim: usize, k: usize) -> Self {
        assert!(k < dim, "basis index {k} out of range for dimension {dim}");
        let mut amplitudes = vec![Complex::zero(); dim];
        amplitudes[k] = Complex::one();
        Self { amplitudes }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amplitudes
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> Complex<T> {
        inner(&self.amplitudes, &other.amplitudes)
    }

    /// `|⟨self|other⟩|`, the phase-insensitive comparison used everywhere.
    pub fn overlap(&self, other: &Self) -> T {
        self.inner(other).norm()
    }

    pub fn tensor(&self, other: &Self) -> Self {
        let amplitudes = self
            .amplitudes
            .iter()
            .flat_map(|a| other.amplitudes.iter().map(move |b| *a * *b))
            .collect();
        Self { amplitudes }
    }

    pub fn projector(&self) -> ComplexMatrix<T> {
        ComplexMatrix::projector(&self.amplitudes)
    }

    pub fn density(&self) -> DensityMatrix<T> {
        DensityMatrix::from_pure(self)
    }

    /// `U|ψ⟩` for a unitary `U`; the result is renormalized to absorb round-off.
    pub fn evolve(&self, unitary: &ComplexMatrix<T>) -> Result<Self> {
        let out = unitary.mul_vec(&self.amplitudes)?;
        Ok(Self::normalize(out)?.0)
    }
}

/// Hermitian, positive semidefinite, unit-trace matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix<T> {
    matrix: ComplexMatrix<T>,
}

impl<T: Real> DensityMatrix<T> {
    /// Validates Hermiticity, unit trace and positivity at `validation_tol`.
    pub fn new(matrix: ComplexMatrix<T>) -> Result<Self> {
        let tol = T::validation_tol();
        if !matrix.is_square() {
            return Err(Error::InvalidDensityMatrix("matrix is not square".into()));
        }
        if !matrix.is_hermitian(tol) {
            return Err(Error::InvalidDensityMatrix(
                "matrix is not Hermitian".into(),
            ));
        }
        let tr = matrix.trace();
        if (tr.re - T::one()).abs() > tol || tr.im.abs() > tol {
            return Err(Error::InvalidDensityMatrix(format!("trace {} != 1", tr.re)));
        }
        let matrix = matrix.hermitian_part();
        let eig = matrix.eigh()?;
        if eig.values[0] < -tol {
            return Err(Error::InvalidDensityMatrix(format!(
                "negative eigenvalue {}",
                eig.values[0]
            )));
        }
        Ok(Self { matrix })
    }

    /// Projects a Hermitian PSD matrix of positive trace onto unit trace.
    pub fn normalized(matrix: ComplexMatrix<T>) -> Result<(Self, T)> {
        let tr = matrix.trace().re;
        if tr.is_nan() || tr <= T::zero() {
            return Err(Error::InvalidDensityMatrix(format!(
                "trace {tr} is not positive"
            )));
        }
        let rho = Self::new(matrix.scale(T::one() / tr))?;
        Ok((rho, tr))
    }

    /// Wraps a matrix known to be a state up to round-off; only the Hermitian part is kept.
    pub(crate) fn from_trusted(matrix: ComplexMatrix<T>) -> Self {
        Self {
            matrix: matrix.hermitian_part(),
        }
    }

    pub fn from_pure(psi: &StateVector<T>) -> Self {
        Self {
            matrix: psi.projector(),
        }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::identity(dim).scale(T::one() / T::lit(dim as f64)),
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix<T> {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix<T> {
        self.matrix
    }

    /// `Tr(ρ²)`.
    pub fn purity(&self) -> T {
        // ρ is Hermitian, so Tr(ρ²) = Σ |ρ_ij|².
        self.matrix.as_slice().iter().map(|z| z.norm_sqr()).sum()
    }

    /// Clamped, ascending eigenvalues.
    pub fn eigenvalues(&self) -> Vec<T> {
        self.matrix
            .eigh()
            .expect("density matrices are Hermitian")
            .values
            .into_iter()
            .map(|v| v.max(T::zero()))
            .collect()
    }

    /// `U ρ U†`.
    pub fn evolve(&self, unitary: &ComplexMatrix<T>) -> Result<Self> {
        let out = unitary.matmul(&self.matrix)?.matmul(&unitary.adjoint())?;
        Ok(Self::from_trusted(out))
    }

    pub fn tensor(&self, other: &Self) -> Self {
        Self {
            matrix: self.matrix.kron(&other.matrix),
        }
    }

    /// Trace distance `½‖ρ − σ‖₁`.
    pub fn trace_distance(&self, other: &Self) -> Result<T> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch(
                "trace distance of unequal dimensions".into(),
            ));
        }
        let diff = (&self.matrix - &other.matrix).hermitian_part();
        let eig = diff.eigh()?;
        Ok(eig.values.iter().map(|v| v.abs()).sum::<T>() / T::lit(2.0))
    }
}

/// Anything an expectation value can be taken in.
pub trait QuantumState<T: Real> {
    fn dim(&self) -> usize;

    /// `⟨ψ|A|ψ⟩` or `Tr[Aρ]`.
    fn expectation(&self, op: &ComplexMatrix<T>) -> Result<Complex<T>>;
}

impl<T: Real> QuantumState<T> for StateVector<T> {
    fn dim(&self) -> usize {
        StateVector::dim(self)
    }

    fn expectation(&self, op: &ComplexMatrix<T>) -> Result<Complex<T>> {
        if !op.is_square() || op.rows() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} operator on a dimension-{} state",
                op.rows(),
                op.cols(),
                self.dim()
            )));
        }
        let a_psi = op.mul_vec(&self.amplitudes)?;
        Ok(inner(&self.amplitudes, &a_psi))
    }
}

impl<T: Real> QuantumState<T> for DensityMatrix<T> {
    fn dim(&self) -> usize {
        DensityMatrix::dim(self)
    }

    fn expectation(&self, op: &ComplexMatrix<T>) -> Result<Complex<T>> {
        if !op.is_square() || op.rows() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} operator on a dimension-{} state",
                op.rows(),
                op.cols(),
                self.dim()
            )));
        }
        Ok(op.matmul(&self.matrix)?.trace())
    }
}

pub fn expectation<T: Real, S: QuantumState<T> + ?Sized>(
    op: &ComplexMatrix<T>,
    state: &S,
) -> Result<Complex<T>> {
    state.expectation(op)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pauli {
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn matrix<T: Real>(self) -> ComplexMatrix<T> {
        let o = Complex::zero();
        let one = Complex::one();
        let i = Complex::i();
        let data = match self {
            Pauli::X => vec![o, one, one, o],
            Pauli::Y => vec![o, -i, i, o],
            Pauli::Z => vec![one, o, o, -one],
        };
        ComplexMatrix::from_vec(2, 2, data).expect("2x2")
    }
}

pub fn pauli<T: Real>(axis: Pauli) -> ComplexMatrix<T> {
    axis.matrix()
}

pub fn purity<T: Real>(rho: &DensityMatrix<T>) -> T {
    rho.purity()
}

/// Haar-random pure state: `2·dim` standard normals as real and imaginary parts, normalized.
pub fn haar_random_pure_with<T: Real, R: Rng + ?Sized>(dim: usize, rng: &mut R) -> StateVector<T> {
    assert!(dim >= 1, "dimension must be positive");
    loop {
        let amps: Vec<Complex<T>> = (0..dim)
            .map(|_| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                Complex::new(T::lit(re), T::lit(im))
            })
            .collect();
        if let Ok((psi, _)) = StateVector::normalize(amps) {
            return psi;
        }
    }
}

/// Seeded convenience wrapper around [`haar_random_pure_with`].
pub fn haar_random_pure<T: Real>(dim: usize, seed: u64) -> Result<StateVector<T>> {
    if dim < 2 {
        return Err(Error::InvalidParameter(format!(
            "Haar sampling needs dim >= 2, got {dim}"
        )));
    }
    Ok(haar_random_pure_with(dim, &mut rng::seeded(seed)))
}

/// Haar-random unitary from Gram–Schmidt on Gaussian columns.
pub fn haar_random_unitary<T: Real, R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix<T> {
    let mut cols: Vec<Vec<Complex<T>>> = Vec::with_capacity(dim);
    while cols.len() < dim {
        let mut v: Vec<Complex<T>> = haar_random_pure_with::<T, _>(dim, rng).amplitudes;
        for u in &cols {
            let proj = inner(u, &v);
            for (vi, ui) in v.iter_mut().zip(u) {
                *vi = *vi - *ui * proj;
            }
        }
        if let Ok((psi, n)) = StateVector::normalize(v) {
            if n > T::lit(1e-6) {
                cols.push(psi.amplitudes);
            }
        }
    }
    ComplexMatrix::from_fn(dim, dim, |r, c| cols[c][r])
}

/// Mixed state distributed by the Hilbert–Schmidt measure: `GG†/Tr(GG†)` for a
/// square Ginibre matrix `G`.
pub fn hilbert_schmidt_random<T: Real, R: Rng + ?Sized>(
    dim: usize,
    rng: &mut R,
) -> DensityMatrix<T> {
    assert!(dim >= 1, "dimension must be positive");
    let g = ComplexMatrix::from_fn(dim, dim, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex::new(T::lit(re), T::lit(im))
    });
    let gg = &g * &g.adjoint();
    let tr = gg.trace().re;
    DensityMatrix::from_trusted(gg.scale(T::one() / tr))
}
