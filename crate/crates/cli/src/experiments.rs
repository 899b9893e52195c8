//! Simulated single-qubit, two-qubit and bound experiments.
//!
//! Each cell (state or row) draws from its own stream of the run seed, and
//! cells are evaluated in parallel but collected in input order, so output
//! is independent of the thread count.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use orthofilter::bounds::{
    average_overlap, certificate_m, chi_opt, f_min, random_cptp, traceless_unitary, ChoiOperator,
    UniversalInverter,
};
use orthofilter::channel::{Channel, UnitaryChannel};
use orthofilter::metrics::{entanglement_of_formation, fidelity, haar_average_overlap};
use orthofilter::ortho::{apply_operator_density, estimate_mean_z, noisy_cz, two_step, z_filter};
use orthofilter::rng::{self, SimRng};
use orthofilter::tomo::{
    mle_reconstruct, mub_set, simulate_counts, simulate_heralded_counts, BasisLabel, CountsRecord,
    MeasurementBasis,
};
use orthofilter::{Density, QubitState};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum MeanSource {
    /// `⟨σ_Z⟩` from the preparation.
    Known,
    /// `⟨σ_Z⟩` from the H/V counts of the input tomography.
    Measured,
}

impl FromStr for MeanSource {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "known" => Ok(Self::Known),
            "measured" => Ok(Self::Measured),
            other => Err(format!("unknown mean source `{other}`")),
        }
    }
}

impl fmt::Display for MeanSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Known => "known",
            Self::Measured => "measured",
        })
    }
}

/// One reconstructed (or exact) state kept for `--dump-states`.
#[derive(Debug, Clone, Serialize)]
pub struct StateDump {
    pub label: String,
    pub dim: usize,
    pub real: Vec<Vec<f64>>,
    pub imag: Vec<Vec<f64>>,
}

impl StateDump {
    pub fn new(label: impl Into<String>, rho: &Density) -> Self {
        let m = rho.matrix();
        let n = m.rows();
        Self {
            label: label.into(),
            dim: n,
            real: (0..n)
                .map(|i| (0..n).map(|j| m[(i, j)].re).collect())
                .collect(),
            imag: (0..n)
                .map(|i| (0..n).map(|j| m[(i, j)].im).collect())
                .collect(),
        }
    }
}

/// Counters over every MLE run of an experiment.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct MleSummary {
    pub reconstructions: usize,
    pub unconverged: usize,
    pub max_iterations: usize,
    pub worst_likelihood_drop: f64,
}

impl MleSummary {
    fn merge(self, other: Self) -> Self {
        Self {
            reconstructions: self.reconstructions + other.reconstructions,
            unconverged: self.unconverged + other.unconverged,
            max_iterations: self.max_iterations.max(other.max_iterations),
            worst_likelihood_drop: self.worst_likelihood_drop.max(other.worst_likelihood_drop),
        }
    }
}

fn reconstruct(
    records: &[CountsRecord],
    dim: usize,
    summary: &mut MleSummary,
) -> CliResult<Density> {
    let res = mle_reconstruct::<f64>(records, dim)?;
    *summary = summary.merge(MleSummary {
        reconstructions: 1,
        unconverged: usize::from(!res.converged),
        max_iterations: res.iterations,
        worst_likelihood_drop: res.worst_likelihood_drop(),
    });
    Ok(res.state)
}

fn check_shots(shots: u64) -> CliResult<()> {
    if shots == 0 {
        return Err(CliError::Config("shots must be positive".into()));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SingleParams {
    /// Polar angles in degrees, `(0, 90]`.
    pub theta: Vec<f64>,
    /// Azimuths in degrees.
    pub phi: Vec<f64>,
    pub shots: u64,
    pub attenuation_error: f64,
    pub mean_source: MeanSource,
    pub seed: u64,
}

impl Default for SingleParams {
    fn default() -> Self {
        Self {
            theta: vec![22.0, 44.0, 66.0, 88.0],
            phi: vec![0.0, 90.0, 180.0, 270.0],
            shots: 100_000,
            attenuation_error: 0.0,
            mean_source: MeanSource::Known,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SingleRow {
    pub theta: f64,
    pub phi: f64,
    pub overlap: f64,
    pub purity_in: f64,
    pub purity_out: f64,
    pub p_success: f64,
}

#[derive(Debug, Clone)]
pub struct SingleRun {
    pub rows: Vec<SingleRow>,
    pub states: Vec<StateDump>,
    pub mle: MleSummary,
}

/// First-qubit `⟨σ_Z⟩` from every record measured in H/V on that qubit.
pub fn measured_mean_z(records: &[CountsRecord]) -> CliResult<f64> {
    let (mut n0, mut n1) = (0u64, 0u64);
    for r in records
        .iter()
        .filter(|r| r.basis.first() == Some(&BasisLabel::HV))
    {
        let half = r.counts.len() / 2;
        n0 += r.counts[..half].iter().sum::<u64>();
        n1 += r.counts[half..].iter().sum::<u64>();
    }
    Ok(estimate_mean_z(n0, n1)?)
}

fn single_cell(
    theta: f64,
    phi: f64,
    p: &SingleParams,
    bases: &[MeasurementBasis<f64>],
    rng: &mut SimRng,
) -> CliResult<(SingleRow, [Density; 3], MleSummary)> {
    let mut mle = MleSummary::default();
    let rho_in = QubitState::from_degrees(theta, phi).density();
    let input = simulate_counts(&rho_in, bases, p.shots, rng)?;
    let est_in = reconstruct(&input, 2, &mut mle)?;

    let theta_used = match p.mean_source {
        MeanSource::Known => theta.to_radians(),
        MeanSource::Measured => measured_mean_z(&input)?.acos(),
    };
    let filter = two_step(theta_used)?
        .with_attenuation_error(p.attenuation_error)
        .filter_matrix();
    let out = apply_operator_density(&filter, &rho_in)?;
    let heralded = simulate_heralded_counts(&out.state, out.p_success, bases, p.shots, rng)?;
    let est_out = reconstruct(&heralded.records, 2, &mut mle)?;

    let row = SingleRow {
        theta,
        phi,
        overlap: fidelity(&est_in, &est_out)?,
        purity_in: est_in.purity(),
        purity_out: est_out.purity(),
        p_success: heralded.success_ratio(),
    };
    Ok((row, [rho_in, est_in, est_out], mle))
}

/// Input tomography, filtering with the two-step decomposition, heralded output
/// tomography, and the overlap of the two reconstructions, for every `(θ, φ)`.
pub fn run_single(p: &SingleParams) -> CliResult<SingleRun> {
    check_shots(p.shots)?;
    if p.theta.is_empty() || p.phi.is_empty() {
        return Err(CliError::Config(
            "need at least one theta and one phi".into(),
        ));
    }
    let bases = mub_set::<f64>(1);
    let cells: Vec<(f64, f64)> = p
        .theta
        .iter()
        .flat_map(|&t| p.phi.iter().map(move |&f| (t, f)))
        .collect();
    let results: Vec<_> = cells
        .par_iter()
        .enumerate()
        .map(|(k, &(t, f))| single_cell(t, f, p, &bases, &mut rng::stream(p.seed, k as u64)))
        .collect();
    let mut run = SingleRun {
        rows: Vec::with_capacity(cells.len()),
        states: Vec::new(),
        mle: MleSummary::default(),
    };
    for r in results {
        let (row, [exact, est_in, est_out], mle) = r?;
        let tag = format!("theta={},phi={}", row.theta, row.phi);
        run.states
            .push(StateDump::new(format!("{tag}:exact_in"), &exact));
        run.states
            .push(StateDump::new(format!("{tag}:in"), &est_in));
        run.states
            .push(StateDump::new(format!("{tag}:out"), &est_out));
        run.rows.push(row);
        run.mle = run.mle.merge(mle);
    }
    Ok(run)
}

/// `(θ₁, φ₁, θ₂, φ₂)` in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AngleRow {
    pub theta1: f64,
    pub phi1: f64,
    pub theta2: f64,
    pub phi2: f64,
}

impl FromStr for AngleRow {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let v: Vec<f64> = crate::config::parse_list(s, ',').map_err(|e| format!("{e}"))?;
        match v[..] {
            [theta1, phi1, theta2, phi2] => Ok(Self {
                theta1,
                phi1,
                theta2,
                phi2,
            }),
            _ => Err(format!("expected theta1,phi1,theta2,phi2, got `{s}`")),
        }
    }
}

/// The five angle settings of the two-qubit experiment.
pub fn reference_rows() -> Vec<AngleRow> {
    [
        (45.0, 0.0, 90.0, 0.0),
        (67.5, 0.0, 90.0, 0.0),
        (45.0, 0.0, 45.0, 0.0),
        (67.5, 0.0, 45.0, 0.0),
        (67.5, 90.0, 45.0, 90.0),
    ]
    .into_iter()
    .map(|(theta1, phi1, theta2, phi2)| AngleRow {
        theta1,
        phi1,
        theta2,
        phi2,
    })
    .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TwoQubitParams {
    pub rows: Vec<AngleRow>,
    pub shots: u64,
    pub visibility: f64,
    /// Recorded only; both variants are always computed.
    pub mean_source: MeanSource,
    pub seed: u64,
}

impl Default for TwoQubitParams {
    fn default() -> Self {
        Self {
            rows: reference_rows(),
            shots: 100_000,
            visibility: 0.94,
            mean_source: MeanSource::Known,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoQubitRow {
    pub theta1: f64,
    pub phi1: f64,
    pub theta2: f64,
    pub phi2: f64,
    #[serde(rename = "F")]
    pub f: f64,
    #[serde(rename = "F_prime")]
    pub f_prime: f64,
    #[serde(rename = "P_I")]
    pub p_i: f64,
    #[serde(rename = "P_O")]
    pub p_o: f64,
    #[serde(rename = "P_O_prime")]
    pub p_o_prime: f64,
    #[serde(rename = "Ef_I")]
    pub ef_i: f64,
    #[serde(rename = "Ef_O")]
    pub ef_o: f64,
    #[serde(rename = "Ef_O_prime")]
    pub ef_o_prime: f64,
}

#[derive(Debug, Clone)]
pub struct TwoQubitRun {
    pub rows: Vec<TwoQubitRow>,
    pub states: Vec<StateDump>,
    pub mle: MleSummary,
}

fn filter_and_measure(
    rho: &Density,
    theta1: f64,
    bases: &[MeasurementBasis<f64>],
    shots: u64,
    rng: &mut SimRng,
    mle: &mut MleSummary,
) -> CliResult<Density> {
    let op = z_filter(theta1)?.on_subsystem_a(2);
    let out = apply_operator_density(&op, rho)?;
    let heralded = simulate_heralded_counts(&out.state, out.p_success, bases, shots, rng)?;
    reconstruct(&heralded.records, 4, mle)
}

type TwoQubitCell = (TwoQubitRow, [Density; 4], MleSummary);

fn two_qubit_cell(
    a: AngleRow,
    p: &TwoQubitParams,
    bases: &[MeasurementBasis<f64>],
    rng: &mut SimRng,
) -> CliResult<TwoQubitCell> {
    let mut mle = MleSummary::default();
    let s1 = QubitState::from_degrees(a.theta1, a.phi1).density();
    let s2 = QubitState::from_degrees(a.theta2, a.phi2).density();
    let rho_in = noisy_cz(p.visibility)?.apply(&s1.tensor(&s2))?;
    let input = simulate_counts(&rho_in, bases, p.shots, rng)?;
    let est_in = reconstruct(&input, 4, &mut mle)?;

    let est_out = filter_and_measure(
        &rho_in,
        a.theta1.to_radians(),
        bases,
        p.shots,
        rng,
        &mut mle,
    )?;
    let theta_measured = measured_mean_z(&input)?.acos();
    let est_out_m = filter_and_measure(&rho_in, theta_measured, bases, p.shots, rng, &mut mle)?;

    let row = TwoQubitRow {
        theta1: a.theta1,
        phi1: a.phi1,
        theta2: a.theta2,
        phi2: a.phi2,
        f: fidelity(&est_in, &est_out)?,
        f_prime: fidelity(&est_in, &est_out_m)?,
        p_i: est_in.purity(),
        p_o: est_out.purity(),
        p_o_prime: est_out_m.purity(),
        ef_i: entanglement_of_formation(&est_in)?,
        ef_o: entanglement_of_formation(&est_out)?,
        ef_o_prime: entanglement_of_formation(&est_out_m)?,
    };
    Ok((row, [rho_in, est_in, est_out, est_out_m], mle))
}

/// CZ preparation with finite visibility, input tomography, first-qubit
/// filtering with known and with measured `⟨σ_Z⟩`, and output tomography.
pub fn run_two_qubit(p: &TwoQubitParams) -> CliResult<TwoQubitRun> {
    check_shots(p.shots)?;
    if p.rows.is_empty() {
        return Err(CliError::Config("need at least one row".into()));
    }
    let bases = mub_set::<f64>(2);
    let results: Vec<_> = p
        .rows
        .par_iter()
        .enumerate()
        .map(|(k, &a)| two_qubit_cell(a, p, &bases, &mut rng::stream(p.seed, k as u64)))
        .collect();
    let mut run = TwoQubitRun {
        rows: Vec::with_capacity(p.rows.len()),
        states: Vec::new(),
        mle: MleSummary::default(),
    };
    for r in results {
        let (row, states, mle) = r?;
        let tag = format!(
            "theta1={},phi1={},theta2={},phi2={}",
            row.theta1, row.phi1, row.theta2, row.phi2
        );
        for (name, rho) in ["exact_in", "in", "out", "out_prime"].iter().zip(&states) {
            run.states
                .push(StateDump::new(format!("{tag}:{name}"), rho));
        }
        run.rows.push(row);
        run.mle = run.mle.merge(mle);
    }
    Ok(run)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundsParams {
    /// Grid spacing in degrees; the grid covers `(0°, 180°)`.
    pub theta_step: f64,
    pub random_maps: usize,
    pub haar_samples: usize,
    pub seed: u64,
}

impl Default for BoundsParams {
    fn default() -> Self {
        Self {
            theta_step: 5.0,
            random_maps: 1000,
            haar_samples: 100_000,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundsRow {
    pub theta: f64,
    pub f_min: f64,
    pub achieved: f64,
    pub min_random: f64,
    pub cert_min_eig: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HaarRow {
    pub channel: String,
    pub d: usize,
    pub mean: f64,
    pub stderr: f64,
    pub target: f64,
    pub samples: usize,
}

#[derive(Debug, Clone)]
pub struct BoundsRun {
    pub rows: Vec<BoundsRow>,
    pub haar: Vec<HaarRow>,
}

pub fn theta_grid(step: f64) -> CliResult<Vec<f64>> {
    if !(step > 0.0 && step < 180.0) {
        return Err(CliError::Config(format!(
            "theta step {step} outside (0, 180)"
        )));
    }
    let n = (180.0 / step).ceil() as usize;
    Ok((1..n)
        .map(|k| k as f64 * step)
        .filter(|&t| t < 180.0)
        .collect())
}

fn bounds_row(theta: f64, maps: &[ChoiOperator<f64>]) -> CliResult<BoundsRow> {
    let rad = theta.to_radians();
    let folded = if rad > std::f64::consts::FRAC_PI_2 {
        std::f64::consts::PI - rad
    } else {
        rad
    };
    let mut min_random = f64::INFINITY;
    for chi in maps {
        min_random = min_random.min(average_overlap(chi, rad)?);
    }
    Ok(BoundsRow {
        theta,
        f_min: f_min(rad)?,
        achieved: average_overlap(&chi_opt(rad)?, rad)?,
        min_random,
        cert_min_eig: certificate_m(folded)?.min_eigenvalue(),
    })
}

/// Minimum-overlap curve with its certificate, random-map sweep, and the
/// Haar-averaged benchmark of the universal inverter and a traceless unitary.
pub fn run_bounds(p: &BoundsParams) -> CliResult<BoundsRun> {
    if p.random_maps == 0 {
        return Err(CliError::Config("random-maps must be positive".into()));
    }
    let grid = theta_grid(p.theta_step)?;
    let maps: Vec<ChoiOperator<f64>> = (0..p.random_maps)
        .into_par_iter()
        .map(|k| random_cptp(2, 2, &mut rng::stream(p.seed, k as u64)))
        .collect::<Result<_, _>>()?;
    let rows: Vec<BoundsRow> = grid
        .par_iter()
        .map(|&t| bounds_row(t, &maps))
        .collect::<CliResult<_>>()?;

    let mut haar = Vec::new();
    for (k, d) in [2usize, 3].into_iter().enumerate() {
        let target = 1.0 / (d as f64 + 1.0);
        let inverter = UniversalInverter { dim: d };
        let unitary = UnitaryChannel::new(traceless_unitary::<f64>(d));
        let channels: [(&str, &(dyn Channel<f64> + Sync)); 2] = [
            ("universal_inverter", &inverter),
            ("traceless_unitary", &unitary),
        ];
        for (j, (name, channel)) in channels.into_iter().enumerate() {
            let seed = haar_seed(p.seed, 2 * k + j);
            let est = haar_average_overlap(channel, d, p.haar_samples, seed)?;
            haar.push(HaarRow {
                channel: name.to_string(),
                d,
                mean: est.mean,
                stderr: est.stderr,
                target,
                samples: est.samples,
            });
        }
    }
    Ok(BoundsRun { rows, haar })
}

/// Seeds for the Haar estimates, kept apart from the random-map streams.
fn haar_seed(seed: u64, k: usize) -> u64 {
    seed ^ 0x9e37_79b9_7f4a_7c15u64.wrapping_mul(k as u64 + 1)
}
