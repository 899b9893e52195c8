use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use orthofilter_cli::config::{parse_list, ConfigFile};
use orthofilter_cli::experiments::{
    reference_rows, run_bounds, run_single, run_two_qubit, AngleRow, BoundsParams, MeanSource,
    SingleParams, TwoQubitParams,
};
use orthofilter_cli::output::{write_csv, write_json, write_states, Metadata};
use orthofilter_cli::{CliError, CliResult};

/// Simulated orthogonalization of partly unknown qubit states by quantum filtering.
///
/// Angles are in degrees. Every flag can also be set in a `key = value`
/// config file (`--config`); flags win.
#[derive(Debug, Parser)]
#[command(name = "orthofilter", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Single-qubit states on a (theta, phi) grid.
    Single(SingleArgs),
    /// CZ-entangled two-qubit states filtered on the first qubit.
    TwoQubit(TwoQubitArgs),
    /// Minimum-overlap curve, certificate, random-map sweep and Haar benchmark.
    Bounds(BoundsArgs),
}

#[derive(Debug, Args)]
struct Common {
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
    /// Also write the exact and reconstructed density matrices.
    #[arg(long)]
    dump_states: bool,
}

#[derive(Debug, Args)]
struct SingleArgs {
    /// Polar angles, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    theta: Vec<f64>,
    /// Azimuths, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    phi: Vec<f64>,
    /// Trials per measurement setting.
    #[arg(long)]
    shots: Option<u64>,
    /// Relative error of the attenuation factor.
    #[arg(long, allow_hyphen_values = true)]
    attenuation_error: Option<f64>,
    #[arg(long, value_enum)]
    mean_source: Option<MeanSource>,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct TwoQubitArgs {
    /// `theta1,phi1,theta2,phi2`; repeatable.
    #[arg(long)]
    row: Vec<AngleRow>,
    #[arg(long)]
    shots: Option<u64>,
    /// Two-photon interference visibility of the CZ gate.
    #[arg(long)]
    visibility: Option<f64>,
    /// Recorded in the metadata; known- and measured-mean columns are both written.
    #[arg(long, value_enum)]
    mean_source: Option<MeanSource>,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct BoundsArgs {
    #[arg(long)]
    theta_step: Option<f64>,
    #[arg(long)]
    random_maps: Option<usize>,
    #[arg(long)]
    haar_samples: Option<usize>,
    #[command(flatten)]
    common: Common,
}

const COMMON_KEYS: [&str; 3] = ["seed", "out", "dump-states"];

struct Resolved {
    cfg: ConfigFile,
    seed: u64,
    out: PathBuf,
    dump_states: bool,
}

fn resolve_common(common: &Common, extra_keys: &[&str]) -> CliResult<Resolved> {
    let keys: Vec<&str> = COMMON_KEYS.iter().chain(extra_keys).copied().collect();
    let cfg = match &common.config {
        Some(path) => ConfigFile::load(path, &keys)?,
        None => ConfigFile::default(),
    };
    let seed = cfg.resolve("seed", common.seed, 1)?;
    let out = cfg.resolve("out", common.out.clone(), PathBuf::from("out"))?;
    let dump_states = common.dump_states || cfg.resolve("dump-states", None, false)?;
    fs::create_dir_all(&out)?;
    Ok(Resolved {
        cfg,
        seed,
        out,
        dump_states,
    })
}

fn finish<P: Serialize>(
    r: &Resolved,
    mut meta: Metadata<'_, P>,
    tables: &[&str],
    dumped: bool,
) -> CliResult<()> {
    meta.files = tables.iter().map(|s| s.to_string()).collect();
    if dumped {
        meta.files.push("states.json".into());
    }
    write_json(&r.out.join("metadata.json"), &meta)
}

fn cmd_single(a: SingleArgs) -> CliResult<()> {
    let r = resolve_common(
        &a.common,
        &["theta", "phi", "shots", "attenuation-error", "mean-source"],
    )?;
    let d = SingleParams::default();
    let p = SingleParams {
        theta: r.cfg.resolve_list("theta", a.theta, d.theta)?,
        phi: r.cfg.resolve_list("phi", a.phi, d.phi)?,
        shots: r.cfg.resolve("shots", a.shots, d.shots)?,
        attenuation_error: r.cfg.resolve(
            "attenuation-error",
            a.attenuation_error,
            d.attenuation_error,
        )?,
        mean_source: r.cfg.resolve("mean-source", a.mean_source, d.mean_source)?,
        seed: r.seed,
    };
    let run = run_single(&p)?;
    write_csv(&r.out.join("single.csv"), &run.rows)?;
    if r.dump_states {
        write_states(&r.out.join("states.json"), &run.states)?;
    }
    let mut meta = Metadata::new("single", p.seed, &p);
    meta.mle = Some(run.mle);
    finish(&r, meta, &["single.csv"], r.dump_states)
}

fn cmd_two_qubit(a: TwoQubitArgs) -> CliResult<()> {
    let r = resolve_common(&a.common, &["row", "shots", "visibility", "mean-source"])?;
    let d = TwoQubitParams::default();
    let rows = if !a.row.is_empty() {
        a.row
    } else if let Some(text) = r.cfg.raw("row") {
        parse_list(text, ';').map_err(CliError::Config)?
    } else {
        reference_rows()
    };
    let p = TwoQubitParams {
        rows,
        shots: r.cfg.resolve("shots", a.shots, d.shots)?,
        visibility: r.cfg.resolve("visibility", a.visibility, d.visibility)?,
        mean_source: r.cfg.resolve("mean-source", a.mean_source, d.mean_source)?,
        seed: r.seed,
    };
    let run = run_two_qubit(&p)?;
    write_csv(&r.out.join("two_qubit.csv"), &run.rows)?;
    if r.dump_states {
        write_states(&r.out.join("states.json"), &run.states)?;
    }
    let mut meta = Metadata::new("two-qubit", p.seed, &p);
    meta.mle = Some(run.mle);
    finish(&r, meta, &["two_qubit.csv"], r.dump_states)
}

fn cmd_bounds(a: BoundsArgs) -> CliResult<()> {
    let r = resolve_common(&a.common, &["theta-step", "random-maps", "haar-samples"])?;
    let d = BoundsParams::default();
    let p = BoundsParams {
        theta_step: r.cfg.resolve("theta-step", a.theta_step, d.theta_step)?,
        random_maps: r.cfg.resolve("random-maps", a.random_maps, d.random_maps)?,
        haar_samples: r
            .cfg
            .resolve("haar-samples", a.haar_samples, d.haar_samples)?,
        seed: r.seed,
    };
    let run = run_bounds(&p)?;
    write_csv(&r.out.join("bounds.csv"), &run.rows)?;
    write_csv(&r.out.join("haar.csv"), &run.haar)?;
    finish(
        &r,
        Metadata::new("bounds", p.seed, &p),
        &["bounds.csv", "haar.csv"],
        false,
    )
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Single(a) => cmd_single(a),
        Command::TwoQubit(a) => cmd_two_qubit(a),
        Command::Bounds(a) => cmd_bounds(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
