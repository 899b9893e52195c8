//! Deterministic channels in Choi form and the minimum average overlap they
//! can reach on a latitude circle of the Bloch sphere.
//!
//! Choi convention: input-major, `χ = Σ_ij |i⟩⟨j| ⊗ E(|i⟩⟨j|)`, so that
//! `E(ρ) = Tr_in[(ρᵀ ⊗ I) χ]` and trace preservation reads `Tr_out χ = I`.

use num_complex::Complex;
use num_traits::Zero;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::channel::Channel;
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, Subsystem};
use crate::scalar::Real;
use crate::states::{DensityMatrix, Pauli};

#[derive(Debug, Clone, PartialEq)]
pub struct ChoiOperator<T> {
    d_in: usize,
    d_out: usize,
    matrix: ComplexMatrix<T>,
}

impl<T: Real> ChoiOperator<T> {
    /// Validates positivity and `Tr_out χ = I` at `validation_tol`.
    pub fn new(d_in: usize, d_out: usize, matrix: ComplexMatrix<T>) -> Result<Self> {
        let n = d_in * d_out;
        if d_in == 0 || d_out == 0 || !matrix.is_square() || matrix.rows() != n {
            return Err(Error::DimensionMismatch(format!(
                "Choi operator for {d_in} -> {d_out} must be {n}x{n}"
            )));
        }
        let tol = T::validation_tol();
        if !matrix.is_hermitian(tol) {
            let dev = matrix.max_abs_diff(&matrix.adjoint());
            return Err(Error::NotHermitian(dev.to_f64_lossy()));
        }
        let matrix = matrix.hermitian_part();
        let min = matrix.eigh()?.values[0];
        if min < -tol {
            return Err(Error::NotPositiveSemidefinite(min.to_f64_lossy()));
        }
        let chi = Self {
            d_in,
            d_out,
            matrix,
        };
        let dev = chi.trace_preservation_error();
        if dev > tol {
            return Err(Error::InvalidParameter(format!(
                "Tr_out χ deviates from identity by {:e}",
                dev.to_f64_lossy()
            )));
        }
        Ok(chi)
    }

    fn from_trusted(d_in: usize, d_out: usize, matrix: ComplexMatrix<T>) -> Self {
        Self {
            d_in,
            d_out,
            matrix: matrix.hermitian_part(),
        }
    }

    /// `Σ_k |K_k⟩⟩⟨⟨K_k|` with `|K⟩⟩ = Σ_i |i⟩ ⊗ K|i⟩`.
    pub fn from_kraus(kraus: &[ComplexMatrix<T>]) -> Result<Self> {
        let first = kraus
            .first()
            .ok_or_else(|| Error::InvalidParameter("no Kraus operators".into()))?;
        let (d_out, d_in) = (first.rows(), first.cols());
        let n = d_in * d_out;
        let mut matrix = ComplexMatrix::zeros(n, n);
        for k in kraus {
            if k.rows() != d_out || k.cols() != d_in {
                return Err(Error::DimensionMismatch(
                    "Kraus operators differ in shape".into(),
                ));
            }
            let vec: Vec<Complex<T>> = (0..n).map(|idx| k[(idx % d_out, idx / d_out)]).collect();
            matrix = &matrix + &ComplexMatrix::projector(&vec);
        }
        Self::new(d_in, d_out, matrix)
    }

    pub fn from_unitary(u: &ComplexMatrix<T>) -> Result<Self> {
        Self::from_kraus(std::slice::from_ref(u))
    }

    /// Projector onto `Σ_i |ii⟩`.
    pub fn identity(dim: usize) -> Self {
        Self::from_unitary(&ComplexMatrix::identity(dim)).expect("identity is a channel")
    }

    #[inline]
    pub fn d_in(&self) -> usize {
        self.d_in
    }

    #[inline]
    pub fn d_out(&self) -> usize {
        self.d_out
    }

    pub fn matrix(&self) -> &ComplexMatrix<T> {
        &self.matrix
    }

    /// `max |Tr_out χ − I|` entrywise.
    pub fn trace_preservation_error(&self) -> T {
        let reduced = self
            .matrix
            .partial_trace((self.d_in, self.d_out), Subsystem::A)
            .expect("dimensions checked at construction");
        reduced.max_abs_diff(&ComplexMatrix::identity(self.d_in))
    }

    pub fn min_eigenvalue(&self) -> Result<T> {
        Ok(self.matrix.eigh()?.values[0])
    }

    /// `(X ⊗ X) χ (X ⊗ X)`: the channel `ρ ↦ X E(XρX) X` for qubits.
    pub fn bit_flip_conjugate(&self) -> Result<Self> {
        if self.d_in != 2 || self.d_out != 2 {
            return Err(Error::DimensionMismatch(
                "bit flips need a qubit channel".into(),
            ));
        }
        let x = Pauli::X.matrix::<T>();
        let xx = x.kron(&x);
        Ok(Self::from_trusted(2, 2, &(&xx * &self.matrix) * &xx))
    }

    /// `(1 − t) χ + t other`.
    pub fn mix(&self, other: &Self, t: T) -> Result<Self> {
        if self.d_in != other.d_in || self.d_out != other.d_out {
            return Err(Error::DimensionMismatch(
                "mixing channels of different shape".into(),
            ));
        }
        if !(t >= T::zero() && t <= T::one()) {
            return Err(Error::InvalidParameter(format!(
                "mixing weight {t} outside [0, 1]"
            )));
        }
        let m = &self.matrix.scale(T::one() - t) + &other.matrix.scale(t);
        Ok(Self::from_trusted(self.d_in, self.d_out, m))
    }
}

impl<T: Real> Channel<T> for ChoiOperator<T> {
    fn apply(&self, rho: &DensityMatrix<T>) -> Result<DensityMatrix<T>> {
        apply_choi(self, rho)
    }
}

/// `E(ρ) = Tr_in[(ρᵀ ⊗ I) χ]`.
pub fn apply_choi<T: Real>(
    chi: &ChoiOperator<T>,
    rho: &DensityMatrix<T>,
) -> Result<DensityMatrix<T>> {
    let (di, dout) = (chi.d_in, chi.d_out);
    if rho.dim() != di {
        return Err(Error::DimensionMismatch(format!(
            "channel input dimension {di}, state dimension {}",
            rho.dim()
        )));
    }
    let r = rho.matrix();
    let m = &chi.matrix;
    let out = ComplexMatrix::from_fn(dout, dout, |a, b| {
        let mut acc = Complex::zero();
        for i in 0..di {
            for j in 0..di {
                acc = acc + r[(i, j)] * m[(i * dout + a, j * dout + b)];
            }
        }
        acc
    });
    DensityMatrix::new(out)
}

/// `c = cos(θ/2)`, `s = sin(θ/2)`.
fn half_angles<T: Real>(theta: T) -> (T, T) {
    let half = theta / T::lit(2.0);
    (half.cos(), half.sin())
}

/// φ-average of `ψᵀ ⊗ ψ` over the latitude circle at polar angle `θ`.
///
/// `F_θ(χ) = Tr[R_θ χ]` is then the average overlap between inputs on that
/// circle and their images.
pub fn r_theta<T: Real>(theta: T) -> ComplexMatrix<T> {
    let (c, s) = half_angles(theta);
    let (c2, s2) = (c * c, s * s);
    let mut r = ComplexMatrix::from_real_diag(&[c2 * c2, c2 * s2, c2 * s2, s2 * s2]);
    r[(0, 3)] = Complex::new(c2 * s2, T::zero());
    r[(3, 0)] = Complex::new(c2 * s2, T::zero());
    r
}

/// `Tr[R_θ χ]` for a qubit channel.
pub fn average_overlap<T: Real>(chi: &ChoiOperator<T>, theta: T) -> Result<T> {
    if chi.d_in != 2 || chi.d_out != 2 {
        return Err(Error::DimensionMismatch(format!(
            "average overlap needs a qubit channel, got {} -> {}",
            chi.d_in, chi.d_out
        )));
    }
    Ok(trace_product(&r_theta(theta), &chi.matrix))
}

/// `Re Tr[AB]` for Hermitian arguments.
fn trace_product<T: Real>(a: &ComplexMatrix<T>, b: &ComplexMatrix<T>) -> T {
    let n = a.rows();
    let mut acc = T::zero();
    for i in 0..n {
        for j in 0..n {
            acc = acc + (a[(i, j)] * b[(j, i)]).re;
        }
    }
    acc
}

/// `θ_T = 2 arcsin(1/√3)`, where the optimal map becomes unitary.
pub fn threshold_angle<T: Real>() -> T {
    T::lit(2.0) * (T::one() / T::lit(3.0).sqrt()).asin()
}

fn check_polar<T: Real>(theta: T) -> Result<()> {
    if theta >= T::zero() && theta <= T::PI() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "polar angle {theta} outside [0, π]"
        )))
    }
}

/// `a(θ) = sin²(θ/2)/cos θ` up to `θ_T`, then 1. Requires `θ ∈ [0, π/2]`.
pub fn optimal_amplitude<T: Real>(theta: T) -> Result<T> {
    if !(theta >= T::zero() && theta <= T::FRAC_PI_2()) {
        return Err(Error::InvalidParameter(format!(
            "amplitude defined on [0, π/2], got {theta}"
        )));
    }
    if theta <= threshold_angle() {
        let (_, s) = half_angles(theta);
        Ok((s * s / theta.cos()).min(T::one()))
    } else {
        Ok(T::one())
    }
}

/// `(a|00⟩ − |11⟩)(a⟨00| − ⟨11|) + (1 − a²)|01⟩⟨01|`.
///
/// For `θ > π/2` the map for `π − θ` is conjugated by bit flips on input and output.
pub fn chi_opt<T: Real>(theta: T) -> Result<ChoiOperator<T>> {
    check_polar(theta)?;
    if theta > T::FRAC_PI_2() {
        return chi_opt(T::PI() - theta)?.bit_flip_conjugate();
    }
    let a = optimal_amplitude(theta)?;
    let zero = Complex::zero();
    let v = [
        Complex::new(a, T::zero()),
        zero,
        zero,
        Complex::new(-T::one(), T::zero()),
    ];
    let mut m = ComplexMatrix::projector(&v);
    m[(1, 1)] = m[(1, 1)] + Complex::new(T::one() - a * a, T::zero());
    Ok(ChoiOperator::from_trusted(2, 2, m))
}

/// Minimum average overlap reachable by any channel on the circle at `θ`.
pub fn f_min<T: Real>(theta: T) -> Result<T> {
    check_polar(theta)?;
    let theta = if theta > T::FRAC_PI_2() {
        T::PI() - theta
    } else {
        theta
    };
    if theta <= threshold_angle() {
        let (_, s) = half_angles(theta);
        let s2 = s * s;
        let sin = theta.sin();
        Ok(sin * sin / T::lit(4.0) - s2 * s2 * s2 / theta.cos())
    } else {
        let c = theta.cos();
        Ok(c * c)
    }
}

/// Dual certificate `M = R_θ − λ ⊗ I` with `λ = Tr_out[R_θ χ_opt]`.
#[derive(Debug, Clone)]
pub struct Certificate<T> {
    pub theta: T,
    pub m: ComplexMatrix<T>,
    pub lambda_operator: ComplexMatrix<T>,
    /// Ascending, from the eigensolver.
    pub eigenvalues: Vec<T>,
    /// Ascending, from the closed forms.
    pub closed_form: Vec<T>,
}

impl<T: Real> Certificate<T> {
    pub fn min_eigenvalue(&self) -> T {
        self.eigenvalues[0]
    }

    /// `λ` from its closed form.
    pub fn lambda_closed_form(&self) -> ComplexMatrix<T> {
        let (c, s) = half_angles(self.theta);
        let (c2, s2) = (c * c, s * s);
        if self.theta <= threshold_angle() {
            let sin = self.theta.sin();
            ComplexMatrix::from_real_diag(&[
                sin * sin / T::lit(4.0),
                -s2 * s2 * s2 / self.theta.cos(),
            ])
        } else {
            let cos = self.theta.cos();
            ComplexMatrix::from_real_diag(&[cos * c2, -cos * s2])
        }
    }

    /// Largest gap between the numeric and closed-form spectra.
    pub fn spectrum_error(&self) -> T {
        self.eigenvalues
            .iter()
            .zip(&self.closed_form)
            .fold(T::zero(), |m, (a, b)| m.max((*a - *b).abs()))
    }
}

/// Positivity certificate for `θ ∈ (0, π/2]`.
pub fn certificate_m<T: Real>(theta: T) -> Result<Certificate<T>> {
    if !(theta > T::zero() && theta <= T::FRAC_PI_2()) {
        return Err(Error::InvalidParameter(format!(
            "certificate defined on (0, π/2], got {theta}"
        )));
    }
    let r = r_theta(theta);
    let chi = chi_opt(theta)?;
    let lambda = (&r * chi.matrix())
        .partial_trace((2, 2), Subsystem::A)?
        .hermitian_part();
    let m = (&r - &lambda.kron(&ComplexMatrix::identity(2))).hermitian_part();
    let eigenvalues = m.eigh()?.values;
    let (c, s) = half_angles(theta);
    let (c2, s2) = (c * c, s * s);
    let mut closed_form = if theta <= threshold_angle() {
        let d = c2 - s2;
        vec![
            T::zero(),
            T::zero(),
            c2 * d + c2 * s2 * s2 / d,
            c2 * s2 + s2 * s2 * s2 / d,
        ]
    } else {
        vec![
            T::zero(),
            T::lit(2.0) * c2 * s2,
            c2 * (T::lit(2.0) * s2 - c2),
            s2 * (T::lit(2.0) * c2 - s2),
        ]
    };
    closed_form.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    Ok(Certificate {
        theta,
        m,
        lambda_operator: lambda,
        eigenvalues,
        closed_form,
    })
}

/// `Tr[M χ]`; equals `F_θ(χ) − F_min(θ)` for trace-preserving `χ`.
pub fn certificate_gap<T: Real>(cert: &Certificate<T>, chi: &ChoiOperator<T>) -> T {
    trace_product(&cert.m, chi.matrix())
}

/// `(dI − ρ)/(d² − 1)`.
pub fn universal_inverter<T: Real>(rho: &DensityMatrix<T>, dim: usize) -> Result<DensityMatrix<T>> {
    if rho.dim() != dim || dim < 2 {
        return Err(Error::DimensionMismatch(format!(
            "inverter on dimension {dim}, state dimension {}",
            rho.dim()
        )));
    }
    let d = T::lit(dim as f64);
    let m = (&ComplexMatrix::identity(dim).scale(d) - rho.matrix())
        .scale(T::one() / (d * d - T::one()));
    DensityMatrix::new(m)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UniversalInverter {
    pub dim: usize,
}

impl<T: Real> Channel<T> for UniversalInverter {
    fn apply(&self, rho: &DensityMatrix<T>) -> Result<DensityMatrix<T>> {
        universal_inverter(rho, self.dim)
    }
}

impl UniversalInverter {
    /// `(d I − |Φ⟩⟨Φ|)/(d² − 1)` with `|Φ⟩ = Σ_i |ii⟩`.
    pub fn choi<T: Real>(&self) -> ChoiOperator<T> {
        let d = self.dim;
        let phi = ChoiOperator::<T>::identity(d);
        let dt = T::lit(d as f64);
        let m = (&ComplexMatrix::identity(d * d).scale(dt) - phi.matrix())
            .scale(T::one() / (dt * dt - T::one()));
        ChoiOperator::from_trusted(d, d, m)
    }
}

/// `diag(1, ω, ω², …)` with `ω = e^{2πi/d}`; traceless for `d ≥ 2`.
pub fn traceless_unitary<T: Real>(dim: usize) -> ComplexMatrix<T> {
    let diag: Vec<Complex<T>> = (0..dim)
        .map(|k| Complex::from_polar(T::one(), T::TAU() * T::lit(k as f64) / T::lit(dim as f64)))
        .collect();
    ComplexMatrix::from_diag(&diag)
}

/// Random channel from a Ginibre PSD matrix `X`, normalized by
/// `(Y^{-1/2} ⊗ I) X (Y^{-1/2} ⊗ I)` with `Y = Tr_out X`.
///
/// A near-singular `Y` is rejected and redrawn.
pub fn random_cptp<T: Real, R: Rng + ?Sized>(
    d_in: usize,
    d_out: usize,
    rng: &mut R,
) -> Result<ChoiOperator<T>> {
    if d_in < 2 || d_out < 2 {
        return Err(Error::InvalidParameter(
            "random channels need dimensions >= 2".into(),
        ));
    }
    let n = d_in * d_out;
    let cutoff = T::lit(1e-8);
    for _ in 0..64 {
        let g = ComplexMatrix::from_fn(n, n, |_, _| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex::new(T::lit(re), T::lit(im))
        });
        let x = &g * &g.adjoint();
        let y = x
            .partial_trace((d_in, d_out), Subsystem::A)?
            .hermitian_part();
        let Ok(y_inv) = y.psd_inv_sqrt(cutoff * y.trace().re) else {
            continue;
        };
        let left = y_inv.kron(&ComplexMatrix::identity(d_out));
        let chi = &(&left * &x) * &left;
        return Ok(ChoiOperator::from_trusted(d_in, d_out, chi));
    }
    Err(Error::SingularPartialTrace)
}
