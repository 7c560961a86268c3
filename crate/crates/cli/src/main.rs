//! `tqrm`: spectra, G-function roots, mean-field curves and phonon-state
//! diagnostics of the tripartite quantum Rabi model, written as CSV with a
//! JSON sidecar and optional SVG plots.
//!
//! Exit status: 0 on success, 2 on configuration errors, 3 on numerical
//! failures (with a JSON error object on stderr).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod output;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde_json::json;
use thiserror::Error;

use config::Settings;
use output::Artifacts;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Numerical(tqrm::Error),
}

impl From<tqrm::Error> for CliError {
    fn from(e: tqrm::Error) -> Self {
        fn is_input(e: &tqrm::Error) -> bool {
            match e {
                tqrm::Error::InvalidParameter(_)
                | tqrm::Error::InvalidTruncation(_)
                | tqrm::Error::SectorUnavailable { .. }
                | tqrm::Error::ZeroCoupling
                | tqrm::Error::ResonantRedirect => true,
                tqrm::Error::Sweep { source, .. } => is_input(source),
                _ => false,
            }
        }
        if is_input(&e) {
            CliError::Config(e.to_string())
        } else {
            CliError::Numerical(e)
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }

    fn to_json(&self) -> serde_json::Value {
        match self {
            CliError::Config(m) => json!({ "error": "config", "message": m }),
            CliError::Numerical(e) => json!({ "error": "numerical", "message": e.to_string(), "detail": format!("{e:?}") }),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "tqrm", version, about = "Tripartite quantum Rabi model toolkit")]
struct Cli {
    /// Boson frequency ω.
    #[arg(long, global = true)]
    omega: Option<f64>,
    /// Rabi frequency Ω.
    #[arg(long = "Omega", global = true)]
    rabi: Option<f64>,
    /// Detuning ε.
    #[arg(long, global = true, allow_hyphen_values = true)]
    eps: Option<f64>,
    /// Coupling g.
    #[arg(long, global = true, allow_hyphen_values = true)]
    g: Option<f64>,
    /// Coupling sweep `start:stop:step`.
    #[arg(long, global = true)]
    gscan: Option<String>,
    /// Phonon cutoff (ground states double it until converged).
    #[arg(long, global = true)]
    n_max: Option<usize>,
    /// Ceiling for the cutoff doubling.
    #[arg(long, global = true)]
    n_cap: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Also write an SVG plot.
    #[arg(long, global = true)]
    plot: bool,
    /// Worker threads; TQRM_THREADS overrides.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// key=value file; flags take precedence over it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Report energies in rad/s using the breathing frequency of the ion parameters.
    #[arg(long, global = true)]
    si: bool,
    /// Seed for randomized checks.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Lowest levels of a sector at one coupling or over --gscan.
    Spectrum {
        /// full, triplet, singlet, collective, plus or minus.
        #[arg(long)]
        sector: Option<String>,
        #[arg(long)]
        levels: Option<usize>,
    },
    /// G-function on an energy grid.
    Gfun {
        #[arg(long, allow_hyphen_values = true)]
        emin: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        emax: Option<f64>,
        #[arg(long)]
        estep: Option<f64>,
    },
    /// G-function roots with nearest diagonalization levels.
    Roots {
        #[arg(long, allow_hyphen_values = true)]
        emin: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        emax: Option<f64>,
        #[arg(long)]
        estep: Option<f64>,
    },
    /// Mean-field displacement and energy.
    Meanfield,
    /// Ground-state observables at one coupling or over --gscan.
    Ground {
        /// all, or a comma list of energy, nb, purity, var_x, var_p, x_mean, n_max_used.
        #[arg(long)]
        observable: Option<String>,
    },
    /// Phonon position density of the ground state.
    Density {
        #[arg(long, allow_hyphen_values = true)]
        xmin: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        xmax: Option<f64>,
        #[arg(long)]
        nx: Option<usize>,
    },
    /// Wigner function of the reduced phonon state.
    Wigner {
        #[arg(long, allow_hyphen_values = true)]
        xmin: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        xmax: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        pmin: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        pmax: Option<f64>,
        #[arg(long)]
        nx: Option<usize>,
        #[arg(long)]
        np: Option<usize>,
    },
    /// Fidelity of the reduced phonon state against a reference state.
    Fidelity {
        /// auto, vacuum, coherent, cat-plus, cat-minus or mixture.
        #[arg(long)]
        reference: Option<String>,
        /// Reference displacement; defaults to the mean-field minimum.
        #[arg(long, allow_hyphen_values = true)]
        alpha: Option<f64>,
    },
    /// Trapped-ion parameters to model couplings (angular SI units).
    Physical {
        #[arg(long)]
        mass: Option<f64>,
        #[arg(long)]
        charge: Option<i32>,
        #[arg(long)]
        nu: Option<f64>,
        #[arg(long)]
        omega_drive: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        vd_slope: Option<f64>,
        /// trap or breathing.
        #[arg(long)]
        convention: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        detuning: Option<f64>,
    },
    /// Operator identities (appendix) or symmetry checks (symmetry).
    Verify {
        what: String,
        /// Extra random parameter draws for the symmetry check.
        #[arg(long)]
        draws: Option<usize>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Spectrum { .. } => "spectrum",
            Command::Gfun { .. } => "gfun",
            Command::Roots { .. } => "roots",
            Command::Meanfield => "meanfield",
            Command::Ground { .. } => "ground",
            Command::Density { .. } => "density",
            Command::Wigner { .. } => "wigner",
            Command::Fidelity { .. } => "fidelity",
            Command::Physical { .. } => "physical",
            Command::Verify { .. } => "verify",
        }
    }
}

fn settings(cli: &Cli) -> Result<Settings, CliError> {
    let mut s = match &cli.config {
        Some(path) => Settings::from_file(path)?,
        None => Settings::default(),
    };
    s.set("omega", cli.omega);
    s.set("Omega", cli.rabi);
    s.set("eps", cli.eps);
    s.set("g", cli.g);
    s.set("gscan", cli.gscan.as_ref());
    s.set("n_max", cli.n_max);
    s.set("n_cap", cli.n_cap);
    s.set("out", cli.out.as_ref().map(|p| p.display()));
    s.set_flag("plot", cli.plot);
    s.set("threads", cli.threads);
    s.set_flag("si", cli.si);
    s.set("seed", cli.seed);
    match &cli.command {
        Command::Spectrum { sector, levels } => {
            s.set("sector", sector.as_ref());
            s.set("levels", *levels);
        }
        Command::Gfun { emin, emax, estep } | Command::Roots { emin, emax, estep } => {
            s.set("emin", *emin);
            s.set("emax", *emax);
            s.set("estep", *estep);
        }
        Command::Meanfield => {}
        Command::Ground { observable } => s.set("observable", observable.as_ref()),
        Command::Density { xmin, xmax, nx } => {
            s.set("xmin", *xmin);
            s.set("xmax", *xmax);
            s.set("nx", *nx);
        }
        Command::Wigner { xmin, xmax, pmin, pmax, nx, np } => {
            s.set("xmin", *xmin);
            s.set("xmax", *xmax);
            s.set("pmin", *pmin);
            s.set("pmax", *pmax);
            s.set("nx", *nx);
            s.set("np", *np);
        }
        Command::Fidelity { reference, alpha } => {
            s.set("reference", reference.as_ref());
            s.set("alpha", *alpha);
        }
        Command::Physical { mass, charge, nu, omega_drive, vd_slope, convention, detuning } => {
            s.set("mass", *mass);
            s.set("charge", *charge);
            s.set("nu", *nu);
            s.set("omega_drive", *omega_drive);
            s.set("vd_slope", *vd_slope);
            s.set("convention", convention.as_ref());
            s.set("detuning", *detuning);
        }
        Command::Verify { draws, .. } => s.set("draws", *draws),
    }
    Ok(s)
}

fn thread_count(s: &Settings) -> Result<Option<usize>, CliError> {
    let n = match std::env::var("TQRM_THREADS") {
        Ok(v) => Some(v.trim().parse::<usize>().map_err(|e| CliError::Config(format!("TQRM_THREADS={v:?}: {e}")))?),
        Err(_) => s.optional::<usize>("threads")?,
    };
    if n == Some(0) {
        return Err(CliError::Config("thread count must be at least 1".into()));
    }
    Ok(n)
}

fn run(cli: &Cli) -> Result<bool, CliError> {
    let start = Instant::now();
    let s = settings(cli)?;
    let threads = thread_count(&s)?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    let name = cli.command.name();
    let outcome = pool.install(|| match &cli.command {
        Command::Spectrum { .. } => commands::spectrum(&s),
        Command::Gfun { .. } => commands::gfun(&s),
        Command::Roots { .. } => commands::roots(&s),
        Command::Meanfield => commands::meanfield(&s),
        Command::Ground { .. } => commands::ground(&s),
        Command::Density { .. } => commands::density(&s),
        Command::Wigner { .. } => commands::wigner(&s),
        Command::Fidelity { .. } => commands::fidelity(&s),
        Command::Physical { .. } => commands::physical(&s),
        Command::Verify { what, .. } => commands::verify(&s, what),
    })?;

    let out_dir = PathBuf::from(s.get("out").unwrap_or("tqrm-out"));
    let artifacts = Artifacts::new(&out_dir, name)?;
    let csv = artifacts.write("csv", &outcome.table.to_csv())?;
    let mut written = vec![csv.display().to_string()];
    if s.flag("plot")? {
        if let Some(svg) = &outcome.svg {
            written.push(artifacts.write("svg", svg)?.display().to_string());
        }
    }
    let sidecar = json!({
        "command": name,
        "version": env!("CARGO_PKG_VERSION"),
        "settings": s.as_map(),
        "threads": threads.unwrap_or_else(|| pool.current_num_threads()),
        "energy_unit": outcome.table.energy_unit(),
        "energy_scale": outcome.table.energy_scale,
        "columns": outcome.table.column_docs(),
        "rows": outcome.table.rows.len(),
        "summary": outcome.summary,
        "wall_time_s": start.elapsed().as_secs_f64(),
    });
    let json_text = serde_json::to_string_pretty(&sidecar).expect("serializable") + "\n";
    written.push(artifacts.write("json", &json_text)?.display().to_string());

    for line in &outcome.report {
        println!("{line}");
    }
    println!("wrote {}", written.join(", "));
    if let Some(msg) = &outcome.failure {
        let err = json!({ "error": "verification", "message": msg });
        eprintln!("{err}");
        return Ok(false);
    }
    Ok(true)
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(3),
        Err(e) => {
            log::debug!("{e:?}");
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code())
        }
    }
}
