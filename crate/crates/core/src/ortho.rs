//! Conditional orthogonalization by quantum filtering.
//!
//! Knowing only the mean value `a = ⟨ψ|A|ψ⟩` of some operator, the
//! (non-unitary) filter `A − aI` maps `|ψ⟩` onto a vector orthogonal to it.
//! Normalizing the filter by its largest singular value `λ` makes it a
//! physical contraction that succeeds with probability
//! `(⟨A†A⟩ − |a|²)/λ²`.
//!
//! For qubits with `A = σ_Z` the filter is diagonal and is realized as an
//! amplitude attenuation of `|0⟩` followed by a π phase shift. For two-qubit
//! states the same filter applied to the first qubit alone orthogonalizes
//! the joint state.

use num_complex::Complex;
use num_traits::One;

use crate::channel::Channel;
use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::scalar::Real;
use crate::states::{DensityMatrix, Pauli, PureQubitState, QuantumState, StateVector};

/// Normalized filter `(A − aI)/λ` with `λ` the largest singular value of `A − aI`.
///
/// `lambda` here is the scalar normalization. It is unrelated to the
/// operator `λ` that appears in the optimality certificate of
/// [`crate::bounds::certificate_m`].
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumFilter<T> {
    operator: ComplexMatrix<T>,
    lambda: T,
    mean: Complex<T>,
    mean_in_range: bool,
    reflected: bool,
}

impl<T: Real> QuantumFilter<T> {
    /// Contraction with unit largest singular value.
    pub fn operator(&self) -> &ComplexMatrix<T> {
        &self.operator
    }

    pub fn lambda(&self) -> T {
        self.lambda
    }

    pub fn mean(&self) -> Complex<T> {
        self.mean
    }

    /// False when `|a|` exceeds the largest singular value of `A`, which no
    /// physical state can produce. The filter is still built.
    pub fn mean_in_range(&self) -> bool {
        self.mean_in_range
    }

    /// True for a σ_Z filter built for the southern hemisphere (`θ > π/2`).
    pub fn is_reflected(&self) -> bool {
        self.reflected
    }

    pub fn dim(&self) -> usize {
        self.operator.rows()
    }

    /// `F ⊗ I_B` for filtering the first factor of a bipartite system.
    pub fn on_subsystem_a(&self, dim_b: usize) -> ComplexMatrix<T> {
        self.operator.kron(&ComplexMatrix::identity(dim_b))
    }
}

/// Filtered state together with the filter's success probability.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterOutcome<S, T> {
    pub state: S,
    pub p_success: T,
}

pub fn build_filter<T: Real>(
    a_op: &ComplexMatrix<T>,
    mean: Complex<T>,
) -> Result<QuantumFilter<T>> {
    if !a_op.is_square() {
        return Err(Error::DimensionMismatch(
            "filter observable must be square".into(),
        ));
    }
    let n = a_op.rows();
    let shifted = a_op - &ComplexMatrix::identity(n).scale_complex(mean);
    let lambda = shifted.max_singular_value();
    if lambda <= T::vanishing_norm_sqr().sqrt() {
        return Err(Error::DegenerateFilter);
    }
    let mean_in_range = mean.norm() <= a_op.max_singular_value() + T::validation_tol();
    Ok(QuantumFilter {
        operator: shifted.scale(T::one() / lambda),
        lambda,
        mean,
        mean_in_range,
        reflected: false,
    })
}

/// σ_Z filter for states of known polar angle `θ`.
///
/// On the northern hemisphere this is `diag(tan²(θ/2), −1)`. For `θ > π/2`
/// the roles of `|0⟩` and `|1⟩` swap: the result is `diag(1, −cot²(θ/2))`,
/// the bit-flip conjugate of the filter for `π − θ` up to an overall sign.
pub fn z_filter<T: Real>(theta: T) -> Result<QuantumFilter<T>> {
    if !(theta >= T::zero() && theta <= T::PI()) {
        return Err(Error::InvalidParameter(format!(
            "polar angle {theta} outside [0, π]"
        )));
    }
    if theta <= T::zero() || theta >= T::PI() {
        return Err(Error::DegenerateFilter);
    }
    let cos = theta.cos();
    let half_tan = (theta / T::lit(2.0)).tan();
    let mean = Complex::new(cos, T::zero());
    let (diag, lambda, reflected) = if theta <= T::FRAC_PI_2() {
        ([half_tan * half_tan, -T::one()], T::one() + cos, false)
    } else {
        let cot = T::one() / half_tan;
        ([T::one(), -(cot * cot)], T::one() - cos, true)
    };
    Ok(QuantumFilter {
        operator: ComplexMatrix::from_real_diag(&diag),
        lambda,
        mean,
        mean_in_range: true,
        reflected,
    })
}

/// Applies an arbitrary contraction to a pure state.
pub fn apply_operator<T: Real>(
    op: &ComplexMatrix<T>,
    state: &StateVector<T>,
) -> Result<FilterOutcome<StateVector<T>, T>> {
    if op.cols() != state.dim() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} filter on a dimension-{} state",
            op.rows(),
            op.cols(),
            state.dim()
        )));
    }
    let raw = op.mul_vec(state.amplitudes())?;
    let p: T = raw.iter().map(|z| z.norm_sqr()).sum();
    if p < T::vanishing_norm_sqr() {
        return Err(Error::FilteredToZero(p.to_f64_lossy()));
    }
    let (state, p_success) = StateVector::normalize(raw)?;
    Ok(FilterOutcome { state, p_success })
}

/// Applies an arbitrary contraction (single Kraus operator) to a mixed state.
pub fn apply_operator_density<T: Real>(
    op: &ComplexMatrix<T>,
    rho: &DensityMatrix<T>,
) -> Result<FilterOutcome<DensityMatrix<T>, T>> {
    if op.cols() != rho.dim() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} filter on a dimension-{} state",
            op.rows(),
            op.cols(),
            rho.dim()
        )));
    }
    let raw = op.matmul(rho.matrix())?.matmul(&op.adjoint())?;
    let p = raw.trace().re;
    if p < T::vanishing_norm_sqr() {
        return Err(Error::FilteredToZero(p.to_f64_lossy()));
    }
    let state = DensityMatrix::from_trusted(raw.scale(T::one() / p));
    Ok(FilterOutcome {
        state,
        p_success: p,
    })
}

pub fn apply_filter<T: Real>(
    filter: &QuantumFilter<T>,
    state: &StateVector<T>,
) -> Result<FilterOutcome<StateVector<T>, T>> {
    apply_operator(&filter.operator, state)
}

pub fn apply_filter_density<T: Real>(
    filter: &QuantumFilter<T>,
    rho: &DensityMatrix<T>,
) -> Result<FilterOutcome<DensityMatrix<T>, T>> {
    apply_operator_density(&filter.operator, rho)
}

/// Physical realization of the σ_Z filter: attenuate `|0⟩`, then a π phase shift.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoStepDecomposition<T> {
    pub theta: T,
    /// Amplitude factor applied to `|0⟩`; `tan²(θ/2)` for an ideal setting.
    pub attenuation: T,
    pub phase_shift: T,
    /// Half-wave plate rotation ϑ of the attenuator, `cos 2ϑ = attenuation`.
    pub waveplate_angle: T,
}

impl<T: Real> TwoStepDecomposition<T> {
    /// First step: `diag(attenuation, 1)`.
    pub fn attenuator(&self) -> ComplexMatrix<T> {
        ComplexMatrix::from_real_diag(&[self.attenuation, T::one()])
    }

    /// Second step: `diag(1, e^{iπ})`.
    pub fn phase_shifter(&self) -> ComplexMatrix<T> {
        ComplexMatrix::from_diag(&[
            Complex::one(),
            Complex::from_polar(T::one(), self.phase_shift),
        ])
    }

    /// Combined Kraus operator, phase shift after attenuation.
    pub fn filter_matrix(&self) -> ComplexMatrix<T> {
        &self.phase_shifter() * &self.attenuator()
    }

    /// Same decomposition with the attenuation set off by a relative error,
    /// `t → t(1 + err)`, clipped to `[0, 1]`.
    pub fn with_attenuation_error(&self, relative_error: T) -> Self {
        let attenuation = (self.attenuation * (T::one() + relative_error))
            .max(T::zero())
            .min(T::one());
        Self {
            attenuation,
            waveplate_angle: attenuation.acos() / T::lit(2.0),
            ..*self
        }
    }

    /// Where the ideal procedure sends a state on the `θ` circle: `θ → π − θ`, `φ → φ + π`.
    pub fn map_angles(&self, state: &PureQubitState<T>) -> PureQubitState<T> {
        PureQubitState::new(T::PI() - state.theta(), state.phi() + T::PI())
    }
}

pub fn two_step<T: Real>(theta: T) -> Result<TwoStepDecomposition<T>> {
    check_northern(theta)?;
    let t = (theta / T::lit(2.0)).tan();
    let attenuation = t * t;
    Ok(TwoStepDecomposition {
        theta,
        attenuation,
        phase_shift: T::PI(),
        waveplate_angle: attenuation.acos() / T::lit(2.0),
    })
}

fn check_northern<T: Real>(theta: T) -> Result<()> {
    if theta.is_nan() || theta < T::zero() || theta > T::FRAC_PI_2() + T::validation_tol() {
        return Err(Error::InvalidParameter(format!(
            "polar angle {theta} outside (0, π/2]"
        )));
    }
    if theta <= T::zero() {
        return Err(Error::DegenerateFilter);
    }
    Ok(())
}

/// `U_CZ = diag(1, 1, 1, −1)`.
pub fn cz_gate<T: Real>() -> ComplexMatrix<T> {
    ComplexMatrix::from_real_diag(&[T::one(), T::one(), T::one(), -T::one()])
}

/// `U_CZ |ψ₁⟩|ψ₂⟩`.
pub fn prepare_entangled<T: Real>(
    s1: &PureQubitState<T>,
    s2: &PureQubitState<T>,
) -> StateVector<T> {
    let product = s1.to_vector().tensor(&s2.to_vector());
    product
        .evolve(&cz_gate())
        .expect("4-dimensional product state")
}

/// `⟨σ_Z ⊗ I⟩`.
pub fn mean_z_first_qubit<T: Real, S: QuantumState<T>>(state: &S) -> Result<T> {
    let op = Pauli::Z.matrix::<T>().kron(&ComplexMatrix::identity(2));
    Ok(state.expectation(&op)?.re)
}

/// Orthogonalizes a two-qubit state with the σ_Z filter for `theta1` on the first qubit only.
///
/// `theta1` is taken as given, so a mismatched value (e.g. estimated from
/// counts) can be injected on purpose.
pub fn local_orthogonalize<T: Real>(
    psi: &StateVector<T>,
    theta1: T,
) -> Result<FilterOutcome<StateVector<T>, T>> {
    if psi.dim() != 4 {
        return Err(Error::DimensionMismatch(format!(
            "local orthogonalization expects two qubits, got dimension {}",
            psi.dim()
        )));
    }
    let filter = z_filter(theta1)?;
    apply_operator(&filter.on_subsystem_a(2), psi)
}

/// CZ gate with imperfect two-photon interference.
///
/// `ρ → V·UρU† + (1 − V)·D(UρU†)` where `D` removes the coherences between
/// `|11⟩` and the other three basis states. Only the `|11⟩` component
/// involves the interfering photon pair, so only its coherences degrade.
/// This is a phenomenological model, not derived from the optics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoisyCz<T> {
    visibility: T,
}

impl<T: Real> NoisyCz<T> {
    pub fn visibility(&self) -> T {
        self.visibility
    }
}

pub fn noisy_cz<T: Real>(visibility: T) -> Result<NoisyCz<T>> {
    if !(visibility >= T::zero() && visibility <= T::one()) {
        return Err(Error::InvalidParameter(format!(
            "visibility {visibility} outside [0, 1]"
        )));
    }
    Ok(NoisyCz { visibility })
}

impl<T: Real> Channel<T> for NoisyCz<T> {
    fn apply(&self, rho: &DensityMatrix<T>) -> Result<DensityMatrix<T>> {
        if rho.dim() != 4 {
            return Err(Error::DimensionMismatch(format!(
                "CZ acts on two qubits, got dimension {}",
                rho.dim()
            )));
        }
        let mut out = rho.evolve(&cz_gate())?.into_matrix();
        for k in 0..3 {
            out[(3, k)] = out[(3, k)] * self.visibility;
            out[(k, 3)] = out[(k, 3)] * self.visibility;
        }
        Ok(DensityMatrix::from_trusted(out))
    }
}

/// `⟨σ_Z⟩` estimate from H/V counts, clamped to the northern hemisphere `[0, 1]`.
pub fn estimate_mean_z<T: Real>(counts0: u64, counts1: u64) -> Result<T> {
    let total = counts0 + counts1;
    if total == 0 {
        return Err(Error::NoCounts);
    }
    let estimate = (T::lit(counts0 as f64) - T::lit(counts1 as f64)) / T::lit(total as f64);
    Ok(estimate.max(T::zero()).min(T::one()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use rand::Rng;
    use std::f64::consts::{FRAC_PI_2, PI};

    type M = ComplexMatrix<f64>;

    fn sigma_z() -> M {
        Pauli::Z.matrix()
    }

    #[test]
    fn build_filter_on_equator_is_sigma_z() {
        let f = build_filter(&sigma_z(), Complex::new(FRAC_PI_2.cos(), 0.0)).unwrap();
        assert!(f.operator().max_abs_diff(&sigma_z()) < 1e-15);
        assert!((f.lambda() - 1.0).abs() < 1e-15);
        assert!(f.mean_in_range());
    }

    #[test]
    fn build_filter_at_45_degrees() {
        let f = build_filter(&sigma_z(), Complex::new(45f64.to_radians().cos(), 0.0)).unwrap();
        let expected = M::from_real_diag(&[3.0 - 2.0 * 2f64.sqrt(), -1.0]);
        assert!(f.operator().max_abs_diff(&expected) < 1e-14);
        assert!((f.operator().max_singular_value() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn build_filter_rejects_degenerate() {
        let err = build_filter(&M::identity(2), Complex::new(1.0, 0.0)).unwrap_err();
        assert_eq!(err, Error::DegenerateFilter);
    }

    #[test]
    fn build_filter_flags_out_of_range_mean() {
        let f = build_filter(&sigma_z(), Complex::new(3.0, 0.0)).unwrap();
        assert!(!f.mean_in_range());
    }

    #[test]
    fn z_filter_examples() {
        let f = z_filter(FRAC_PI_2).unwrap();
        assert!(f.operator().max_abs_diff(&M::from_real_diag(&[1.0, -1.0])) < 1e-15);
        let f = z_filter(60f64.to_radians()).unwrap();
        assert!(
            f.operator()
                .max_abs_diff(&M::from_real_diag(&[1.0 / 3.0, -1.0]))
                < 1e-15
        );
        let f = z_filter(45f64.to_radians()).unwrap();
        assert!(
            f.operator()
                .max_abs_diff(&M::from_real_diag(&[3.0 - 2.0 * 2f64.sqrt(), -1.0]))
                < 1e-15
        );
        assert_eq!(z_filter(0.0).unwrap_err(), Error::DegenerateFilter);
        assert!(matches!(z_filter(-0.1), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn z_filter_matches_general_construction_on_both_hemispheres() {
        for deg in [10.0, 45.0, 89.0, 90.0, 100.0, 150.0] {
            let theta = f64::to_radians(deg);
            let z = z_filter(theta).unwrap();
            let general = build_filter(&sigma_z(), Complex::new(theta.cos(), 0.0)).unwrap();
            assert!(
                z.operator().max_abs_diff(general.operator()) < 1e-12,
                "θ = {deg}°"
            );
            assert!((z.lambda() - general.lambda()).abs() < 1e-12);
            assert_eq!(z.is_reflected(), deg > 90.0);
        }
    }

    #[test]
    fn southern_filter_is_bit_flip_conjugate() {
        let theta = 130f64.to_radians();
        let x: M = Pauli::X.matrix();
        let north = z_filter(PI - theta).unwrap();
        let conj = &(&x * north.operator()) * &x;
        assert!(
            z_filter(theta)
                .unwrap()
                .operator()
                .max_abs_diff(&conj.scale(-1.0))
                < 1e-12
        );
    }

    #[test]
    fn apply_filter_examples() {
        let phi = 0.7;
        let s = PureQubitState::new(FRAC_PI_2, phi);
        let out = apply_filter(&z_filter(FRAC_PI_2).unwrap(), &s.to_vector()).unwrap();
        assert!((out.p_success - 1.0).abs() < 1e-12);
        assert!(out.state.overlap(&s.to_vector()) < 1e-12);

        let theta = 45f64.to_radians();
        let s = PureQubitState::new(theta, 0.0);
        let out = apply_filter(&z_filter(theta).unwrap(), &s.to_vector()).unwrap();
        assert!((out.p_success - (3.0 - 2.0 * 2f64.sqrt())).abs() < 1e-12);
        assert!((out.state.overlap(&s.orthogonal_partner()) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn apply_filter_orthogonalizes_random_states() {
        let mut rng = rng::seeded(21);
        for _ in 0..1000 {
            let theta = rng.random_range(1e-3..=FRAC_PI_2);
            let s = PureQubitState::new(theta, rng.random_range(0.0..2.0 * PI));
            let out = apply_filter(&z_filter(theta).unwrap(), &s.to_vector()).unwrap();
            assert!(out.state.overlap(&s.to_vector()) < 1e-12);
            let t = (theta / 2.0).tan();
            assert!((out.p_success - t * t).abs() < 1e-12);
        }
    }

    #[test]
    fn apply_filter_detects_annihilation() {
        let f = z_filter(FRAC_PI_2).unwrap();
        let null = M::zeros(2, 2);
        assert!(matches!(
            apply_operator(&null, &StateVector::basis(2, 0)),
            Err(Error::FilteredToZero(_))
        ));
        assert!(apply_filter(&f, &StateVector::basis(4, 0)).is_err());
    }

    #[test]
    fn density_filter_agrees_with_pure_filter() {
        let s = PureQubitState::<f64>::new(0.8, 1.9);
        let f = z_filter(0.8).unwrap();
        let pure = apply_filter(&f, &s.to_vector()).unwrap();
        let mixed = apply_filter_density(&f, &s.density()).unwrap();
        assert!((pure.p_success - mixed.p_success).abs() < 1e-14);
        assert!(mixed.state.matrix().max_abs_diff(&pure.state.projector()) < 1e-12);
    }

    #[test]
    fn two_step_examples() {
        let d = two_step(FRAC_PI_2).unwrap();
        assert!((d.attenuation - 1.0).abs() < 1e-15);
        assert!(d.waveplate_angle.abs() < 1e-7);
        assert!((d.phase_shift - PI).abs() < 1e-15);

        let d = two_step(60f64.to_radians()).unwrap();
        assert!((d.attenuation - 1.0 / 3.0).abs() < 1e-12);
        assert!((d.waveplate_angle - 0.5 * (1.0f64 / 3.0).acos()).abs() < 1e-12);
        assert!(((2.0 * d.waveplate_angle).cos() - d.attenuation).abs() < 1e-12);

        assert!(two_step(0.0).is_err());
        assert!(two_step(2.0).is_err());
    }

    #[test]
    fn two_step_composition_matches_filter() {
        let theta = 45f64.to_radians();
        let s = PureQubitState::new(theta, 30f64.to_radians());
        let d = two_step(theta).unwrap();
        let composed = apply_operator(&d.filter_matrix(), &s.to_vector()).unwrap();
        let filtered = apply_filter(&z_filter(theta).unwrap(), &s.to_vector()).unwrap();
        assert!((composed.state.overlap(&filtered.state) - 1.0).abs() < 1e-12);

        let after_att = apply_operator(&d.attenuator(), &s.to_vector()).unwrap();
        let mirrored = PureQubitState::new(PI - theta, s.phi()).to_vector();
        assert!((after_att.state.overlap(&mirrored) - 1.0).abs() < 1e-12);
        let mapped = d.map_angles(&s).to_vector();
        assert!((composed.state.overlap(&mapped) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn attenuation_error_breaks_orthogonality() {
        let theta = 22f64.to_radians();
        let s = PureQubitState::new(theta, 0.0);
        let d = two_step(theta).unwrap().with_attenuation_error(0.02);
        let out = apply_operator(&d.filter_matrix(), &s.to_vector()).unwrap();
        assert!(out.state.overlap(&s.to_vector()) > 1e-3);
        assert!(((2.0 * d.waveplate_angle).cos() - d.attenuation).abs() < 1e-12);
    }

    #[test]
    fn cz_gate_action() {
        let u: M = cz_gate();
        assert!(u.is_unitary(1e-15));
        assert!((&u * &u).max_abs_diff(&M::identity(4)) < 1e-15);
        let one_one = StateVector::<f64>::basis(4, 3);
        let out = u.mul_vec(one_one.amplitudes()).unwrap();
        assert_eq!(out[3], Complex::new(-1.0, 0.0));
        let zero_zero = u
            .mul_vec(StateVector::<f64>::basis(4, 0).amplitudes())
            .unwrap();
        assert_eq!(zero_zero[0], Complex::new(1.0, 0.0));
    }

    // Closed form of the entangled state, written out independently of the gate product.
    fn entangled_closed_form(t1: f64, p1: f64, t2: f64, p2: f64) -> Vec<Complex<f64>> {
        let (c1, s1) = ((t1 / 2.0).cos(), (t1 / 2.0).sin());
        let (c2, s2) = ((t2 / 2.0).cos(), (t2 / 2.0).sin());
        let e1 = Complex::from_polar(1.0, p1);
        let e2 = Complex::from_polar(1.0, p2);
        vec![
            Complex::new(c1 * c2, 0.0),
            e2 * (c1 * s2),
            e1 * (s1 * c2),
            -(e1 * e2) * (s1 * s2),
        ]
    }

    #[test]
    fn prepare_entangled_matches_closed_form() {
        let mut rng = rng::seeded(22);
        for _ in 0..50 {
            let (t1, p1, t2, p2) = (
                rng.random_range(0.0..PI),
                rng.random_range(0.0..2.0 * PI),
                rng.random_range(0.0..PI),
                rng.random_range(0.0..2.0 * PI),
            );
            let psi = prepare_entangled(&PureQubitState::new(t1, p1), &PureQubitState::new(t2, p2));
            let oracle = entangled_closed_form(t1, p1, t2, p2);
            for (a, b) in psi.amplitudes().iter().zip(&oracle) {
                assert!((a - b).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn prepare_entangled_examples() {
        // (|0⟩|+⟩ + |1⟩|−⟩)/√2
        let eq = PureQubitState::new(FRAC_PI_2, 0.0);
        let psi = prepare_entangled(&eq, &eq);
        let expected = [0.5, 0.5, 0.5, -0.5];
        for (a, e) in psi.amplitudes().iter().zip(expected) {
            assert!((a.re - e).abs() < 1e-12 && a.im.abs() < 1e-12);
        }

        let north = PureQubitState::new(0.0, 0.0);
        let s2 = PureQubitState::<f64>::new(1.1, 0.4);
        let product = prepare_entangled(&north, &s2);
        let expected = StateVector::basis(2, 0).tensor(&s2.to_vector());
        assert!((product.overlap(&expected) - 1.0).abs() < 1e-12);

        let theta1 = 45f64.to_radians();
        let psi = prepare_entangled(&PureQubitState::new(theta1, 0.0), &eq);
        assert!((mean_z_first_qubit(&psi).unwrap() - theta1.cos()).abs() < 1e-12);
    }

    #[test]
    fn local_orthogonalize_examples() {
        let theta1 = 45f64.to_radians();
        let eq = PureQubitState::new(FRAC_PI_2, 0.0);
        let psi = prepare_entangled(&PureQubitState::new(theta1, 0.0), &eq);
        let out = local_orthogonalize(&psi, theta1).unwrap();
        assert!(out.state.overlap(&psi) < 1e-12);
        assert!((out.p_success - (3.0 - 2.0 * 2f64.sqrt())).abs() < 1e-12);

        let psi = prepare_entangled(&eq, &PureQubitState::new(0.3, 0.2));
        let out = local_orthogonalize(&psi, FRAC_PI_2).unwrap();
        assert!((out.p_success - 1.0).abs() < 1e-12);
        assert!(out.state.overlap(&psi) < 1e-12);

        assert!(local_orthogonalize(&StateVector::basis(2, 0), 0.5).is_err());
    }

    #[test]
    fn local_orthogonalize_random_states() {
        let mut rng = rng::seeded(23);
        for _ in 0..50 {
            let t1 = rng.random_range(1e-3..=FRAC_PI_2);
            let s1 = PureQubitState::new(t1, rng.random_range(0.0..2.0 * PI));
            let s2 =
                PureQubitState::new(rng.random_range(0.0..PI), rng.random_range(0.0..2.0 * PI));
            let psi = prepare_entangled(&s1, &s2);
            let out = local_orthogonalize(&psi, t1).unwrap();
            assert!(out.state.overlap(&psi) < 1e-12);
            let t = (t1 / 2.0).tan();
            assert!((out.p_success - t * t).abs() < 1e-12);
        }
    }

    #[test]
    fn noisy_cz_limits() {
        let eq = PureQubitState::new(FRAC_PI_2, 0.0);
        let product = eq.to_vector().tensor(&eq.to_vector()).density();
        let ideal = noisy_cz(1.0).unwrap().apply(&product).unwrap();
        assert!((ideal.purity() - 1.0).abs() < 1e-12);
        let expected = prepare_entangled(&eq, &eq).density();
        assert!(ideal.matrix().max_abs_diff(expected.matrix()) < 1e-12);

        let noisy = noisy_cz(0.94).unwrap().apply(&product).unwrap();
        assert!(noisy.purity() < 1.0);
        // Six coherences of modulus 1/4 are scaled by V: (10 + 6V²)/16.
        assert!((noisy.purity() - (10.0 + 6.0 * 0.94 * 0.94) / 16.0).abs() < 1e-12);
        assert!(DensityMatrix::new(noisy.matrix().clone()).is_ok());

        let dephased = noisy_cz(0.0).unwrap().apply(&product).unwrap();
        for k in 0..3 {
            assert!(dephased.matrix()[(3, k)].norm() < 1e-15);
            assert!(dephased.matrix()[(k, 3)].norm() < 1e-15);
        }
        assert!(noisy_cz(1.2).is_err());
    }

    #[test]
    fn mean_z_estimates() {
        assert_eq!(estimate_mean_z::<f64>(1000, 0).unwrap(), 1.0);
        assert!((estimate_mean_z::<f64>(750, 250).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(estimate_mean_z::<f64>(100, 300).unwrap(), 0.0);
        assert_eq!(estimate_mean_z::<f64>(0, 0).unwrap_err(), Error::NoCounts);
    }

    #[test]
    fn mean_z_estimate_from_binomial_counts() {
        use rand_distr::{Binomial, Distribution};
        let theta = 45f64.to_radians();
        let p0 = (theta / 2.0).cos().powi(2);
        let n = 100_000u64;
        let c0 = Binomial::new(n, p0).unwrap().sample(&mut rng::seeded(24));
        let est: f64 = estimate_mean_z(c0, n - c0).unwrap();
        // Var(2k/n − 1) = 4 p0 (1 − p0) / n.
        let sigma = (4.0 * p0 * (1.0 - p0) / n as f64).sqrt();
        assert!((est - theta.cos()).abs() < 3.0 * sigma);
    }
}
