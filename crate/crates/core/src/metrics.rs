//! Figures of merit: fidelity, two-qubit entanglement and Haar-averaged overlaps.

use rayon::prelude::*;

use crate::channel::Channel;
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, Subsystem};
use crate::rng;
use crate::scalar::Real;
use crate::states::{haar_random_pure_with, DensityMatrix, Pauli, StateVector};

/// Uhlmann fidelity `F = [Tr √(√ρ₁ ρ₂ √ρ₁)]²`, clamped to `[0, 1]`.
pub fn fidelity<T: Real>(rho1: &DensityMatrix<T>, rho2: &DensityMatrix<T>) -> Result<T> {
    if rho1.dim() != rho2.dim() {
        return Err(Error::DimensionMismatch(format!(
            "fidelity between dimensions {} and {}",
            rho1.dim(),
            rho2.dim()
        )));
    }
    let root = rho1.matrix().psd_sqrt()?;
    let inner = (&(&root * rho2.matrix()) * &root).hermitian_part();
    let eig = inner.eigh()?;
    let tr_sqrt: T = eig.clamped_values().into_iter().map(|v| v.sqrt()).sum();
    Ok((tr_sqrt * tr_sqrt).max(T::zero()).min(T::one()))
}

/// Wootters concurrence of a two-qubit state.
pub fn concurrence<T: Real>(rho: &DensityMatrix<T>) -> Result<T> {
    if rho.dim() != 4 {
        return Err(Error::DimensionMismatch(format!(
            "concurrence needs two qubits, got dimension {}",
            rho.dim()
        )));
    }
    let yy = Pauli::Y.matrix::<T>().kron(&Pauli::Y.matrix());
    let flipped = &(&yy * &rho.matrix().conj()) * &yy;
    // ρρ̃ has the same spectrum as the Hermitian √ρ ρ̃ √ρ.
    let root = rho.matrix().psd_sqrt()?;
    let m = (&(&root * &flipped) * &root).hermitian_part();
    let mut mu: Vec<T> = m
        .eigh()?
        .clamped_values()
        .into_iter()
        .map(|v| v.sqrt())
        .collect();
    mu.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    let c = mu[0] - mu[1] - mu[2] - mu[3];
    Ok(c.max(T::zero()).min(T::one()))
}

/// `h(x) = −x log₂ x − (1 − x) log₂(1 − x)`, zero at the endpoints.
pub fn binary_entropy<T: Real>(x: T) -> T {
    let term = |p: T| {
        if p <= T::zero() {
            T::zero()
        } else {
            -p * p.log2()
        }
    };
    term(x) + term(T::one() - x)
}

/// Entanglement of formation `E_f = h((1 + √(1 − C²))/2)`.
pub fn entanglement_of_formation<T: Real>(rho: &DensityMatrix<T>) -> Result<T> {
    let c = concurrence(rho)?;
    Ok(eof_from_concurrence(c))
}

pub fn eof_from_concurrence<T: Real>(c: T) -> T {
    let x = (T::one() + (T::one() - c * c).max(T::zero()).sqrt()) / T::lit(2.0);
    binary_entropy(x)
}

/// Entanglement entropy of `U_CZ|ψ₁⟩|ψ₂⟩` in closed form.
pub fn pure_entropy<T: Real>(theta1: T, theta2: T) -> T {
    let s = theta1.sin() * theta2.sin();
    let x = (T::one() + (T::one() - s * s).max(T::zero()).sqrt()) / T::lit(2.0);
    binary_entropy(x)
}

/// Von Neumann entropy in bits.
pub fn von_neumann_entropy<T: Real>(rho: &DensityMatrix<T>) -> T {
    rho.eigenvalues()
        .into_iter()
        .filter(|&v| v > T::zero())
        .map(|v| -v * v.log2())
        .sum()
}

/// Entropy of the reduced state of a bipartite pure state.
pub fn entanglement_entropy<T: Real>(psi: &StateVector<T>, dims: (usize, usize)) -> Result<T> {
    let reduced = psi.projector().partial_trace(dims, Subsystem::A)?;
    Ok(von_neumann_entropy(&DensityMatrix::from_trusted(reduced)))
}

/// Sample mean and its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarloEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub samples: usize,
}

impl MonteCarloEstimate {
    /// `|mean − target| ≤ k·stderr`, with a floor for zero-variance estimators.
    pub fn within_sigma(&self, target: f64, k: f64) -> bool {
        (self.mean - target).abs() <= (k * self.stderr).max(1e-12)
    }
}

const HAAR_CHUNK: usize = 4096;

/// Monte Carlo average of `⟨ψ|E(|ψ⟩⟨ψ|)|ψ⟩` over Haar-random `|ψ⟩`.
///
/// For a pure input this is exactly the fidelity between input and output.
/// Samples are drawn in fixed-size chunks on independent streams of `seed`,
/// so the estimate does not depend on the thread count.
pub fn haar_average_overlap<T, C>(
    channel: &C,
    dim: usize,
    samples: usize,
    seed: u64,
) -> Result<MonteCarloEstimate>
where
    T: Real,
    C: Channel<T> + Sync + ?Sized,
{
    if samples < 2 {
        return Err(Error::InvalidParameter("need at least two samples".into()));
    }
    let chunks = samples.div_ceil(HAAR_CHUNK);
    let partial: Vec<Result<(f64, f64)>> = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = rng::stream(seed, chunk as u64);
            let n = HAAR_CHUNK.min(samples - chunk * HAAR_CHUNK);
            let mut sum = 0.0;
            let mut sum_sq = 0.0;
            for _ in 0..n {
                let psi: StateVector<T> = haar_random_pure_with(dim, &mut rng);
                let out = channel.apply(&psi.density())?;
                let overlap = psi.expectation_in(&out)?.to_f64_lossy();
                sum += overlap;
                sum_sq += overlap * overlap;
            }
            Ok((sum, sum_sq))
        })
        .collect();
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for p in partial {
        let (s, q) = p?;
        sum += s;
        sum_sq += q;
    }
    let n = samples as f64;
    let mean = sum / n;
    let var = ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0);
    Ok(MonteCarloEstimate {
        mean,
        stderr: (var / n).sqrt(),
        samples,
    })
}

/// Average state fidelity from process fidelity, `F = (d F_χ + 1)/(d + 1)`.
pub fn process_to_average_fidelity<T: Real>(f_chi: T, dim: usize) -> Result<T> {
    if !(f_chi >= -T::validation_tol() && f_chi <= T::one() + T::validation_tol()) {
        return Err(Error::InvalidParameter(format!(
            "process fidelity {f_chi} outside [0, 1]"
        )));
    }
    let d = T::lit(dim as f64);
    Ok((d * f_chi + T::one()) / (d + T::one()))
}

/// Process fidelity of a unitary with the identity, `|Tr U|²/d²`.
pub fn unitary_process_fidelity<T: Real>(u: &ComplexMatrix<T>) -> T {
    let d = T::lit(u.rows() as f64);
    u.trace().norm_sqr() / (d * d)
}

impl<T: Real> StateVector<T> {
    /// `⟨ψ|ρ|ψ⟩`.
    pub fn expectation_in(&self, rho: &DensityMatrix<T>) -> Result<T> {
        let v = rho.matrix().mul_vec(self.amplitudes())?;
        Ok(self
            .amplitudes()
            .iter()
            .zip(&v)
            .map(|(a, b)| (a.conj() * b).re)
            .sum())
    }
}
