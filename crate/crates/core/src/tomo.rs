//! Projective measurements in mutually unbiased bases, shot-noise sampling
//! and maximum-likelihood state reconstruction.

use std::collections::BTreeSet;
use std::fmt;

use num_complex::Complex;
use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::scalar::Real;
use crate::states::DensityMatrix;

/// Single-qubit measurement setting; the first listed outcome is the first projector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum BasisLabel {
    HV,
    DA,
    RL,
}

impl BasisLabel {
    pub const ALL: [BasisLabel; 3] = [BasisLabel::HV, BasisLabel::DA, BasisLabel::RL];

    /// The two basis kets, `H = |0⟩`, `D = (|0⟩+|1⟩)/√2`, `R = (|0⟩+i|1⟩)/√2`.
    pub fn kets<T: Real>(self) -> [[Complex<T>; 2]; 2] {
        let o = Complex::new(T::zero(), T::zero());
        let l = Complex::new(T::one(), T::zero());
        let h = Complex::new(T::FRAC_1_SQRT_2(), T::zero());
        let ih = Complex::new(T::zero(), T::FRAC_1_SQRT_2());
        match self {
            BasisLabel::HV => [[l, o], [o, l]],
            BasisLabel::DA => [[h, h], [h, -h]],
            BasisLabel::RL => [[h, ih], [h, -ih]],
        }
    }

    pub fn outcome_names(self) -> [char; 2] {
        match self {
            BasisLabel::HV => ['H', 'V'],
            BasisLabel::DA => ['D', 'A'],
            BasisLabel::RL => ['R', 'L'],
        }
    }
}

impl fmt::Display for BasisLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b] = self.outcome_names();
        write!(f, "{a}/{b}")
    }
}

/// Product of single-qubit settings with its rank-1 outcome projectors.
///
/// Outcomes are ordered lexicographically with the first qubit most significant.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementBasis<T> {
    labels: Vec<BasisLabel>,
    projectors: Vec<ComplexMatrix<T>>,
}

impl<T: Real> MeasurementBasis<T> {
    pub fn single(label: BasisLabel) -> Self {
        Self::product(&[label])
    }

    pub fn product(labels: &[BasisLabel]) -> Self {
        let mut kets: Vec<Vec<Complex<T>>> = vec![vec![Complex::new(T::one(), T::zero())]];
        for &label in labels {
            let local = label.kets::<T>();
            kets = kets
                .iter()
                .flat_map(|k| {
                    local.iter().map(move |l| {
                        k.iter()
                            .flat_map(|&a| l.iter().map(move |&b| a * b))
                            .collect::<Vec<_>>()
                    })
                })
                .collect();
        }
        Self {
            labels: labels.to_vec(),
            projectors: kets.iter().map(|k| ComplexMatrix::projector(k)).collect(),
        }
    }

    pub fn labels(&self) -> &[BasisLabel] {
        &self.labels
    }

    pub fn projectors(&self) -> &[ComplexMatrix<T>] {
        &self.projectors
    }

    pub fn dim(&self) -> usize {
        1 << self.labels.len()
    }

    /// Born probabilities `Tr[Π_j ρ]`, clipped at zero.
    pub fn probabilities(&self, rho: &DensityMatrix<T>) -> Result<Vec<T>> {
        if rho.dim() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "state of dimension {} measured in a {}-dimensional basis",
                rho.dim(),
                self.dim()
            )));
        }
        Ok(self
            .projectors
            .iter()
            .map(|p| born(p, rho.matrix()).max(T::zero()))
            .collect())
    }
}

/// All `3^n` product settings, first qubit's label most significant.
pub fn mub_set<T: Real>(n_qubits: usize) -> Vec<MeasurementBasis<T>> {
    label_tuples(n_qubits)
        .iter()
        .map(|l| MeasurementBasis::product(l))
        .collect()
}

fn label_tuples(n_qubits: usize) -> Vec<Vec<BasisLabel>> {
    let mut out = vec![Vec::new()];
    for _ in 0..n_qubits {
        out = out
            .into_iter()
            .flat_map(|prefix: Vec<BasisLabel>| {
                BasisLabel::ALL.iter().map(move |&l| {
                    let mut v = prefix.clone();
                    v.push(l);
                    v
                })
            })
            .collect();
    }
    out
}

/// Real part of `Tr[P ρ]`.
fn born<T: Real>(p: &ComplexMatrix<T>, rho: &ComplexMatrix<T>) -> T {
    let n = p.rows();
    let mut acc = T::zero();
    for i in 0..n {
        for j in 0..n {
            acc = acc + (p[(i, j)] * rho[(j, i)]).re;
        }
    }
    acc
}

/// Outcome counts of one measurement setting.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountsRecord {
    pub basis: Vec<BasisLabel>,
    pub counts: Vec<u64>,
    pub shots: u64,
}

impl CountsRecord {
    pub fn new(basis: Vec<BasisLabel>, counts: Vec<u64>) -> Result<Self> {
        let shots = counts.iter().sum();
        let record = Self {
            basis,
            counts,
            shots,
        };
        record.validate()?;
        Ok(record)
    }

    pub fn validate(&self) -> Result<()> {
        let expected = 1usize << self.basis.len();
        if self.basis.is_empty() {
            return Err(Error::InvalidCounts("empty basis label".into()));
        }
        if self.counts.len() != expected {
            return Err(Error::InvalidCounts(format!(
                "{} outcomes for a {}-qubit setting",
                self.counts.len(),
                self.basis.len()
            )));
        }
        let total: u64 = self.counts.iter().sum();
        if total != self.shots {
            return Err(Error::InvalidCounts(format!(
                "counts sum to {total}, shots = {}",
                self.shots
            )));
        }
        Ok(())
    }
}

/// Multinomial draw by a chain of conditional binomials.
pub fn sample_multinomial<R: Rng + ?Sized>(probs: &[f64], shots: u64, rng: &mut R) -> Vec<u64> {
    let mut remaining = shots;
    let mut mass: f64 = probs.iter().map(|p| p.max(0.0)).sum();
    let mut out = Vec::with_capacity(probs.len());
    for (k, &p) in probs.iter().enumerate() {
        let p = p.max(0.0);
        let n = if k + 1 == probs.len() {
            remaining
        } else if remaining == 0 || mass <= 0.0 {
            0
        } else {
            binomial(remaining, (p / mass).min(1.0), rng)
        };
        out.push(n);
        remaining -= n;
        mass -= p;
    }
    out
}

fn binomial<R: Rng + ?Sized>(n: u64, p: f64, rng: &mut R) -> u64 {
    if p <= 0.0 || n == 0 {
        return 0;
    }
    if p >= 1.0 {
        return n;
    }
    Binomial::new(n, p).expect("p lies in (0, 1)").sample(rng)
}

/// Measures `shots_per_basis` copies of `rho` in every setting.
pub fn simulate_counts<T: Real, R: Rng + ?Sized>(
    rho: &DensityMatrix<T>,
    bases: &[MeasurementBasis<T>],
    shots_per_basis: u64,
    rng: &mut R,
) -> Result<Vec<CountsRecord>> {
    bases
        .iter()
        .map(|basis| {
            let probs: Vec<f64> = basis
                .probabilities(rho)?
                .into_iter()
                .map(|p| p.to_f64_lossy())
                .collect();
            Ok(CountsRecord {
                basis: basis.labels().to_vec(),
                counts: sample_multinomial(&probs, shots_per_basis, rng),
                shots: shots_per_basis,
            })
        })
        .collect()
}

/// Output tomography behind a probabilistic filter.
///
/// Each setting is attempted `attempts_per_basis` times; only successful
/// (heralded) events are recorded, so the record's `shots` is the number of
/// coincidences in that setting.
#[derive(Debug, Clone, PartialEq)]
pub struct HeraldedCounts {
    pub records: Vec<CountsRecord>,
    pub attempts_per_basis: u64,
}

impl HeraldedCounts {
    /// Coincidence ratio, the estimate of the filter's success probability.
    pub fn success_ratio(&self) -> f64 {
        let heralded: u64 = self.records.iter().map(|r| r.shots).sum();
        let attempts = self.attempts_per_basis * self.records.len() as u64;
        if attempts == 0 {
            return 0.0;
        }
        heralded as f64 / attempts as f64
    }

    pub fn total_attempts(&self) -> u64 {
        self.attempts_per_basis * self.records.len() as u64
    }
}

pub fn simulate_heralded_counts<T: Real, R: Rng + ?Sized>(
    rho_out: &DensityMatrix<T>,
    p_success: T,
    bases: &[MeasurementBasis<T>],
    attempts_per_basis: u64,
    rng: &mut R,
) -> Result<HeraldedCounts> {
    let p = p_success.to_f64_lossy();
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!(
            "success probability {p} outside [0, 1]"
        )));
    }
    let mut records = Vec::with_capacity(bases.len());
    for basis in bases {
        let heralded = binomial(attempts_per_basis, p, rng);
        let mut r = simulate_counts(rho_out, std::slice::from_ref(basis), heralded, rng)?;
        records.append(&mut r);
    }
    Ok(HeraldedCounts {
        records,
        attempts_per_basis,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MleOptions {
    pub max_iterations: usize,
    /// Stop once successive iterates are this close in trace distance.
    pub tolerance: f64,
    /// Lower clamp on Born probabilities with nonzero frequency.
    pub probability_floor: f64,
    /// Smallest dilution tried before giving up on a likelihood increase.
    pub min_dilution: f64,
    /// Largest spectral over-relaxation after an undiluted step; 1 disables it.
    pub max_extrapolation: f64,
}

impl Default for MleOptions {
    fn default() -> Self {
        Self {
            max_iterations: 5000,
            tolerance: 1e-10,
            probability_floor: 1e-12,
            min_dilution: 1.0 / (1u64 << 20) as f64,
            max_extrapolation: 1e15,
        }
    }
}

#[derive(Debug, Clone)]
pub struct MleResult<T> {
    pub state: DensityMatrix<T>,
    pub iterations: usize,
    pub converged: bool,
    /// Log-likelihood `Σ f_j ln p_j` of the start point and of every accepted iterate.
    pub log_likelihood: Vec<f64>,
    /// Trace distance between the last two iterates.
    pub last_step: f64,
}

impl<T> MleResult<T> {
    /// Largest decrease of the log-likelihood between consecutive iterates.
    pub fn worst_likelihood_drop(&self) -> f64 {
        self.log_likelihood
            .windows(2)
            .map(|w| w[0] - w[1])
            .fold(0.0, f64::max)
    }
}

/// Relative frequencies attached to measurement projectors.
#[derive(Debug, Clone)]
pub struct MleProblem<T> {
    dim: usize,
    projectors: Vec<ComplexMatrix<T>>,
    frequencies: Vec<T>,
}

impl<T: Real> MleProblem<T> {
    /// Pools all records; repeated settings are merged. Requires every one of
    /// the `3^n` product settings.
    pub fn from_records(records: &[CountsRecord], dim: usize) -> Result<Self> {
        let n_qubits = qubits_for(dim)?;
        let mut seen = BTreeSet::new();
        let mut total = 0u64;
        for r in records {
            r.validate()?;
            if r.basis.len() != n_qubits {
                return Err(Error::DimensionMismatch(format!(
                    "{}-qubit record for dimension {dim}",
                    r.basis.len()
                )));
            }
            seen.insert(r.basis.clone());
            total += r.shots;
        }
        check_complete(&seen, n_qubits)?;
        if total == 0 {
            return Err(Error::NoCounts);
        }
        let norm = T::lit(total as f64);
        let mut projectors = Vec::new();
        let mut frequencies = Vec::new();
        for r in records {
            let basis = MeasurementBasis::<T>::product(&r.basis);
            for (p, &n) in basis.projectors.into_iter().zip(&r.counts) {
                projectors.push(p);
                frequencies.push(T::lit(n as f64) / norm);
            }
        }
        Ok(Self {
            dim,
            projectors,
            frequencies,
        })
    }

    /// Noiseless data: each setting contributes its exact outcome probabilities.
    pub fn from_probabilities(bases: &[MeasurementBasis<T>], probs: &[Vec<T>]) -> Result<Self> {
        if bases.len() != probs.len() || bases.is_empty() {
            return Err(Error::DimensionMismatch(
                "one probability vector per setting required".into(),
            ));
        }
        let dim = bases[0].dim();
        let n_qubits = qubits_for(dim)?;
        let seen: BTreeSet<Vec<BasisLabel>> = bases.iter().map(|b| b.labels.clone()).collect();
        if bases.iter().any(|b| b.dim() != dim) {
            return Err(Error::DimensionMismatch("mixed setting sizes".into()));
        }
        check_complete(&seen, n_qubits)?;
        let norm = T::lit(bases.len() as f64);
        let mut projectors = Vec::new();
        let mut frequencies = Vec::new();
        for (b, p) in bases.iter().zip(probs) {
            if p.len() != b.projectors.len() {
                return Err(Error::DimensionMismatch("probability vector length".into()));
            }
            projectors.extend(b.projectors.iter().cloned());
            frequencies.extend(p.iter().map(|&x| x / norm));
        }
        Ok(Self {
            dim,
            projectors,
            frequencies,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn probabilities(&self, rho: &ComplexMatrix<T>, floor: T) -> Vec<T> {
        self.projectors
            .iter()
            .zip(&self.frequencies)
            .map(|(p, &f)| {
                let q = born(p, rho);
                if f > T::zero() {
                    q.max(floor)
                } else {
                    q.max(T::zero())
                }
            })
            .collect()
    }

    pub fn log_likelihood(&self, rho: &DensityMatrix<T>) -> f64 {
        self.log_likelihood_at(
            rho.matrix(),
            T::lit(MleOptions::default().probability_floor),
        )
    }

    fn log_likelihood_at(&self, rho: &ComplexMatrix<T>, floor: T) -> f64 {
        self.probabilities(rho, floor)
            .iter()
            .zip(&self.frequencies)
            .filter(|(_, &f)| f > T::zero())
            .map(|(&p, &f)| f.to_f64_lossy() * p.to_f64_lossy().ln())
            .sum()
    }

    /// `R(ρ) = Σ_j (f_j / p_j) Π_j`.
    fn r_operator(&self, rho: &ComplexMatrix<T>, floor: T) -> ComplexMatrix<T> {
        let probs = self.probabilities(rho, floor);
        let mut r = ComplexMatrix::zeros(self.dim, self.dim);
        for ((proj, &f), &p) in self.projectors.iter().zip(&self.frequencies).zip(&probs) {
            if f > T::zero() {
                r = &r + &proj.scale(f / p);
            }
        }
        r
    }

    /// Diluted `RρR` iteration from `I/d`.
    ///
    /// A step `ρ ← N[(1−ε)ρ + ε RρR/Tr(RρR)]` starts at `ε = 1` and is halved
    /// until the likelihood does not decrease; if even `min_dilution` fails
    /// the current iterate is already a fixed point to working precision.
    /// An accepted `ε = 1` step is then over-relaxed spectrally when that
    /// strictly raises the likelihood further.
    pub fn solve(&self, opts: &MleOptions) -> Result<MleResult<T>> {
        let floor = T::lit(opts.probability_floor);
        let tol = opts.tolerance.max(T::epsilon().to_f64_lossy() * 100.0);
        let mut rho = DensityMatrix::<T>::maximally_mixed(self.dim).into_matrix();
        let mut trace = vec![self.log_likelihood_at(&rho, floor)];
        let mut last_step = f64::INFINITY;
        let mut converged = false;
        let mut iterations = 0;
        while iterations < opts.max_iterations {
            iterations += 1;
            let raw = self.raw_probabilities(&rho);
            let r = self.r_operator(&rho, floor);
            let rrr = (&(&r * &rho) * &r).hermitian_part();
            let tr = rrr.trace().re;
            if tr.is_nan() || tr <= T::zero() {
                return Err(Error::InvalidCounts("likelihood update vanished".into()));
            }
            let target = rrr.scale(T::one() / tr);
            let step_to = |e: f64| {
                let e = T::lit(e);
                let c = (&rho.scale(T::one() - e) + &target.scale(e)).hermitian_part();
                c.scale(T::one() / c.trace().re)
            };
            let mut eps = 1.0;
            let accepted = loop {
                let cand = step_to(eps);
                let gain = self.gain(&rho, &raw, &cand, floor);
                if gain >= T::zero() {
                    break Some((cand, gain));
                }
                eps *= 0.5;
                if eps < opts.min_dilution {
                    break None;
                }
            };
            let Some((mut next, plain_gain)) = accepted else {
                converged = true;
                last_step = 0.0;
                break;
            };
            if eps == 1.0 && opts.max_extrapolation > 1.0 {
                if let Some(cand) = self.extrapolate(&rho, &raw, &next, plain_gain, floor, opts)? {
                    next = cand;
                }
            }
            last_step = trace_distance(&rho, &next)?;
            rho = next;
            trace.push(self.log_likelihood_at(&rho, floor));
            if last_step < tol {
                converged = true;
                break;
            }
        }
        Ok(MleResult {
            state: DensityMatrix::normalized(rho)?.0,
            iterations,
            converged,
            log_likelihood: trace,
            last_step,
        })
    }

    /// Spectral over-relaxation of an undiluted step `rho → next`.
    ///
    /// Near the boundary the undiluted map creeps towards rank deficiency.
    /// Keeping the eigenvectors of `next`, its spectrum is pushed further along
    /// the same trend, each eigenvalue moving by at most a factor of four,
    /// and the reach is halved until the likelihood beats the plain step.
    fn extrapolate(
        &self,
        rho: &ComplexMatrix<T>,
        raw: &[T],
        next: &ComplexMatrix<T>,
        plain_gain: T,
        floor: T,
        opts: &MleOptions,
    ) -> Result<Option<ComplexMatrix<T>>> {
        let eig = next.eigh()?;
        let before: Vec<T> = (0..self.dim)
            .map(|k| {
                let v = eig.eigenvector(k);
                let rv = rho.mul_vec(&v)?;
                Ok(crate::linalg::inner(&v, &rv).re)
            })
            .collect::<Result<_>>()?;
        // Largest reach that shrinks some decreasing eigenvalue fourfold;
        // faster ones are clamped at a quarter of their current value.
        let quarter = T::lit(0.25);
        let four = T::lit(4.0);
        let mut reach = T::zero();
        for (&now, &was) in eig.values.iter().zip(&before) {
            if now > T::zero() && now < was {
                reach = reach.max(T::lit(0.75) * now / (was - now));
            }
        }
        reach = reach.min(T::lit(opts.max_extrapolation - 1.0));
        let two = T::lit(2.0);
        while reach >= T::one() {
            let spectrum: Vec<T> = eig
                .values
                .iter()
                .zip(&before)
                .map(|(&now, &was)| {
                    let now = now.max(T::zero());
                    (now + reach * (now - was))
                        .max(now * quarter)
                        .min(now * four)
                })
                .collect();
            let total: T = spectrum.iter().copied().sum();
            let cand = eig
                .map_values_from(&spectrum)
                .scale(T::one() / total)
                .hermitian_part();
            let gain = self.gain(rho, raw, &cand, floor);
            if gain > plain_gain {
                return Ok(Some(cand));
            }
            reach = reach / two;
        }
        Ok(None)
    }

    fn raw_probabilities(&self, rho: &ComplexMatrix<T>) -> Vec<T> {
        self.projectors.iter().map(|p| born(p, rho)).collect()
    }

    /// Log-likelihood change from `rho` to `cand`, evaluated from the
    /// probability differences so that tiny gains are not lost to cancellation.
    fn gain(&self, rho: &ComplexMatrix<T>, raw: &[T], cand: &ComplexMatrix<T>, floor: T) -> T {
        let delta = cand - rho;
        let mut acc = T::zero();
        for ((proj, &f), &p) in self.projectors.iter().zip(&self.frequencies).zip(raw) {
            if f <= T::zero() {
                continue;
            }
            let dp = born(proj, &delta);
            let q = p + dp;
            acc = acc
                + if p >= floor && q >= floor {
                    f * (dp / p).ln_1p()
                } else {
                    f * (q.max(floor).ln() - p.max(floor).ln())
                };
        }
        acc
    }
}

fn trace_distance<T: Real>(a: &ComplexMatrix<T>, b: &ComplexMatrix<T>) -> Result<f64> {
    let diff = (a - b).hermitian_part();
    let eig = diff.eigh()?;
    let s: T = eig.values.iter().map(|v| v.abs()).sum();
    Ok(s.to_f64_lossy() / 2.0)
}

fn qubits_for(dim: usize) -> Result<usize> {
    if dim < 2 || !dim.is_power_of_two() {
        return Err(Error::InvalidParameter(format!(
            "dimension {dim} is not a qubit register"
        )));
    }
    Ok(dim.trailing_zeros() as usize)
}

fn check_complete(seen: &BTreeSet<Vec<BasisLabel>>, n_qubits: usize) -> Result<()> {
    let missing: Vec<String> = label_tuples(n_qubits)
        .into_iter()
        .filter(|l| !seen.contains(l))
        .map(|l| {
            l.iter()
                .map(|b| b.to_string())
                .collect::<Vec<_>>()
                .join("x")
        })
        .collect();
    if missing.is_empty() {
        Ok(())
    } else {
        Err(Error::IncompleteTomography(format!(
            "missing settings {}",
            missing.join(", ")
        )))
    }
}

/// Maximum-likelihood reconstruction with default options.
pub fn mle_reconstruct<T: Real>(records: &[CountsRecord], dim: usize) -> Result<MleResult<T>> {
    MleProblem::from_records(records, dim)?.solve(&MleOptions::default())
}
