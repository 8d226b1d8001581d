//! Command-line entry point: one binary, subcommand per module, config
//! file plus flag overrides (flags win). CSV for time series, JSON for
//! scalars and summaries; every number is emitted with 17 significant
//! digits so identical invocations produce identical bytes.

use std::f64::consts::PI;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::dynamics::{self, Trajectory};
use crate::error::{Error, Result};
use crate::exchange;
use crate::kernel::{convolve_memory, MemoryKernel};
use crate::model::{
    BathOccupation, CouplingFunction, FieldBath, FieldQuantum, PhysicalConfig, ReservoirBath,
    ReservoirQuantum,
};
use crate::oracle::{self, BathSelection};
use crate::rates::{self, BroadeningKernel, Direction, SpectralRate};

#[derive(Parser, Debug)]
#[command(
    name = "qdho",
    version,
    about = "Damped oscillator + reservoir + vacuum engine"
)]
struct Cli {
    /// JSON config file with keys m, omega, e, beta, temperature, cutoff.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file; stdout when omitted. The oracle subcommand also writes
    /// a JSON summary next to it as <out>.json.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// csv for time series, json for scalar summaries.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Override the configured oscillator mass.
    #[arg(long, global = true)]
    m: Option<f64>,
    /// Override the configured oscillator frequency.
    #[arg(long, global = true)]
    omega: Option<f64>,
    /// Override the configured charge.
    #[arg(long, global = true)]
    e: Option<f64>,
    /// Override the configured friction coefficient.
    #[arg(long, global = true)]
    beta: Option<f64>,
    /// Override the configured temperature.
    #[arg(long, global = true)]
    temperature: Option<f64>,
    /// Override the configured UV cutoff.
    #[arg(long, global = true)]
    cutoff: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Memory kernel, its convolution with a harmonic test trajectory, and
    /// the pointwise residual against the Markovian drag.
    Kernel {
        #[arg(long, name = "t-end")]
        t_end: Option<f64>,
        #[arg(long)]
        step: Option<f64>,
        #[arg(long, name = "quad-points", default_value_t = 64)]
        quad_points: usize,
    },
    /// Expectation-value trajectory of one solver.
    Trajectory {
        #[arg(long, value_enum)]
        solver: Solver,
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        q0: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        v0: f64,
        #[arg(long, name = "t-end")]
        t_end: Option<f64>,
        #[arg(long)]
        step: Option<f64>,
        #[arg(long, name = "quad-points", default_value_t = 64)]
        quad_points: usize,
    },
    /// First-order transition rate for one oscillator occupation and bath
    /// combination.
    Rates {
        #[arg(long)]
        n: u32,
        #[arg(long, value_enum)]
        direction: Dir,
        #[arg(long, default_value = "vacuum")]
        field: String,
        #[arg(long, default_value = "vacuum")]
        reservoir: String,
        /// Evaluate the probability at this time (needs --eta).
        #[arg(long)]
        t: Option<f64>,
        /// Broadening width for resonance terms.
        #[arg(long)]
        eta: Option<f64>,
        #[arg(long, name = "kernel-shape", value_enum, default_value = "boxcar")]
        kernel_shape: Shape,
    },
    /// Vacuum↔reservoir exchange rate for one photon mode.
    Exchange {
        #[arg(long, value_enum)]
        mode: ExchangeMode,
        /// Photon as "dx dy dz lambda omega".
        #[arg(long)]
        photon: String,
        #[arg(long, default_value = "vacuum")]
        reservoir: String,
        #[arg(long)]
        t: Option<f64>,
        #[arg(long)]
        eta: Option<f64>,
        #[arg(long, name = "kernel-shape", value_enum, default_value = "boxcar")]
        kernel_shape: Shape,
    },
    /// Exact-diagonalization cross-check of the analytic decay slope.
    Oracle {
        #[arg(long, value_enum)]
        bath: Bath,
        #[arg(long, default_value_t = 1)]
        n: u32,
        #[arg(long, default_value_t = 400)]
        modes: usize,
        /// Band "a b" in units of omega.
        #[arg(long, default_value = "0.2 5")]
        band: String,
        /// Fit window and sampling as "t_lo t_hi steps" (absolute time);
        /// derived from the band and the analytic slope when omitted.
        #[arg(long, name = "t-grid")]
        t_grid: Option<String>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Solver {
    Markov,
    Nonmarkov,
    Rr,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Dir {
    Down,
    Up,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Shape {
    Boxcar,
    Lorentzian,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ExchangeMode {
    Absorb,
    Emit,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Bath {
    Reservoir,
    Field,
    Both,
}

/// 17 significant digits; the value round-trips bit-exactly and stays a
/// valid JSON number.
fn g17(x: f64) -> String {
    format!("{x:.16e}")
}

fn merge_config(cli: &Cli) -> Result<PhysicalConfig> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|err| {
                Error::Config(format!("cannot read config {}: {err}", path.display()))
            })?;
            PhysicalConfig::from_json(&text)?
        }
        None => PhysicalConfig::default(),
    };
    if let Some(m) = cli.m {
        cfg.m = m;
    }
    if let Some(omega) = cli.omega {
        cfg.omega = omega;
    }
    if let Some(e) = cli.e {
        cfg.e = e;
    }
    if let Some(beta) = cli.beta {
        cfg.beta = beta;
    }
    if let Some(t) = cli.temperature {
        cfg.temperature = t;
    }
    if let Some(c) = cli.cutoff {
        cfg.cutoff = c;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn write_output(path: Option<&Path>, content: &str) -> Result<()> {
    match path {
        Some(path) => {
            let mut file = fs::File::create(path)?;
            file.write_all(content.as_bytes())?;
            Ok(())
        }
        None => {
            std::io::stdout().write_all(content.as_bytes())?;
            Ok(())
        }
    }
}

fn csv(header: &str, rows: impl Iterator<Item = Vec<f64>>) -> String {
    let mut text = String::from(header);
    text.push('\n');
    for row in rows {
        let mut first = true;
        for value in row {
            if !first {
                text.push(',');
            }
            text.push_str(&g17(value));
            first = false;
        }
        text.push('\n');
    }
    text
}

fn parse_floats(text: &str, expected: usize, what: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = text.split_whitespace().collect();
    if parts.len() != expected {
        return Err(Error::Config(format!(
            "{what} needs {expected} values, got {} in {text:?}",
            parts.len()
        )));
    }
    parts
        .iter()
        .map(|p| {
            p.parse::<f64>()
                .map_err(|_| Error::Config(format!("{what}: cannot parse number {p:?}")))
        })
        .collect()
}

fn read_fock_lines(path: &str) -> Result<Vec<Vec<f64>>> {
    let text = fs::read_to_string(path)
        .map_err(|err| Error::Config(format!("cannot read Fock file {path}: {err}")))?;
    let mut rows = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let values: Result<Vec<f64>> = line
            .split_whitespace()
            .map(|p| {
                p.parse::<f64>()
                    .map_err(|_| Error::Config(format!("{path}: cannot parse number {p:?}")))
            })
            .collect();
        rows.push(values?);
    }
    if rows.is_empty() {
        return Err(Error::Config(format!("Fock file {path} lists no quanta")));
    }
    Ok(rows)
}

fn parse_reservoir_bath(spec: &str) -> Result<ReservoirBath> {
    if spec == "vacuum" {
        return Ok(BathOccupation::Vacuum);
    }
    if let Some(t) = spec.strip_prefix("thermal:") {
        let t: f64 = t
            .parse()
            .map_err(|_| Error::Config(format!("bad thermal temperature in {spec:?}")))?;
        let bath = BathOccupation::Thermal(t);
        bath.validate()?;
        return Ok(bath);
    }
    if let Some(path) = spec.strip_prefix("fock:") {
        let quanta = read_fock_lines(path)?
            .into_iter()
            .map(|row| {
                if row.len() != 1 {
                    return Err(Error::Config(format!(
                        "reservoir Fock lines carry one omega_p, got {row:?}"
                    )));
                }
                ReservoirQuantum::new(row[0])
            })
            .collect::<Result<Vec<_>>>()?;
        return Ok(BathOccupation::Fock(quanta));
    }
    Err(Error::Config(format!(
        "bath must be vacuum, thermal:T or fock:<file>, got {spec:?}"
    )))
}

fn parse_field_quantum(values: &[f64]) -> Result<FieldQuantum> {
    if values.len() != 5 {
        return Err(Error::Config(format!(
            "field quantum needs dx dy dz lambda omega_p, got {values:?}"
        )));
    }
    let lambda = values[3];
    if lambda != 1.0 && lambda != 2.0 {
        return Err(Error::Config(format!(
            "polarization index must be 1 or 2, got {lambda}"
        )));
    }
    FieldQuantum::new([values[0], values[1], values[2]], values[4], lambda as u8)
}

fn parse_field_bath(spec: &str) -> Result<FieldBath> {
    if spec == "vacuum" {
        return Ok(BathOccupation::Vacuum);
    }
    if let Some(t) = spec.strip_prefix("thermal:") {
        let t: f64 = t
            .parse()
            .map_err(|_| Error::Config(format!("bad thermal temperature in {spec:?}")))?;
        let bath = BathOccupation::Thermal(t);
        bath.validate()?;
        return Ok(bath);
    }
    if let Some(path) = spec.strip_prefix("fock:") {
        let quanta = read_fock_lines(path)?
            .iter()
            .map(|row| parse_field_quantum(row))
            .collect::<Result<Vec<_>>>()?;
        return Ok(BathOccupation::Fock(quanta));
    }
    Err(Error::Config(format!(
        "bath must be vacuum, thermal:T or fock:<file>, got {spec:?}"
    )))
}

fn rate_json(rate: &SpectralRate, evaluation: Option<(f64, f64, Shape, f64)>) -> Result<String> {
    let mut text = String::from("{\n");
    text.push_str(&format!("  \"smooth\": {},\n", g17(rate.smooth)));
    text.push_str("  \"resonances\": [");
    for (i, resonance) in rate.resonances.iter().enumerate() {
        if i > 0 {
            text.push_str(", ");
        }
        text.push_str(&format!(
            "{{\"location\": {}, \"weight\": {}}}",
            g17(resonance.location),
            g17(resonance.weight)
        ));
    }
    text.push(']');
    if let Some((t, eta, shape, omega_ref)) = evaluation {
        let kernel = match shape {
            Shape::Boxcar => BroadeningKernel::Boxcar,
            Shape::Lorentzian => BroadeningKernel::Lorentzian,
        };
        let probability = rates::evaluate_spectral_rate(rate, t, eta, kernel, omega_ref)?;
        text.push_str(&format!(",\n  \"probability\": {}", g17(probability.value)));
        text.push_str(&format!(",\n  \"clamped\": {}", probability.clamped));
    }
    text.push_str("\n}\n");
    Ok(text)
}

fn require_format(requested: Option<Format>, natural: Format, what: &str) -> Result<Format> {
    match requested {
        None => Ok(natural),
        Some(f) if f == natural => Ok(f),
        Some(_) => Err(Error::Config(format!(
            "{what} output is {} only",
            match natural {
                Format::Csv => "csv",
                Format::Json => "json",
            }
        ))),
    }
}

fn evaluation_args(
    t: Option<f64>,
    eta: Option<f64>,
    shape: Shape,
    omega_ref: f64,
) -> Result<Option<(f64, f64, Shape, f64)>> {
    match (t, eta) {
        (None, None) => Ok(None),
        (Some(t), Some(eta)) => Ok(Some((t, eta, shape, omega_ref))),
        _ => Err(Error::Config("--t and --eta must be given together".into())),
    }
}

fn run_kernel(
    cfg: &PhysicalConfig,
    t_end: Option<f64>,
    step: Option<f64>,
    quad_points: usize,
    out: Option<&Path>,
    format: Option<Format>,
) -> Result<()> {
    require_format(format, Format::Csv, "kernel")?;
    let period = 2.0 * PI / cfg.omega;
    let t_end = t_end.unwrap_or(10.0 * period);
    let h = step.unwrap_or_else(|| (0.4 / cfg.cutoff).min(period / 200.0));
    let kernel = MemoryKernel::new(
        CouplingFunction::special(cfg.beta),
        cfg.m,
        cfg.cutoff,
        quad_points,
    )?;
    let steps = (t_end / h).ceil() as usize + 1;
    let q: Vec<f64> = (0..steps)
        .map(|i| (cfg.omega * i as f64 * h).sin() / cfg.omega)
        .collect();
    let qdot: Vec<f64> = (0..steps)
        .map(|i| (cfg.omega * i as f64 * h).cos())
        .collect();
    let traj = Trajectory::from_samples(0.0, h, q, qdot)?;
    let drag = convolve_memory(&kernel, &traj)?;
    let gamma = kernel.grid(h, steps)?;
    let friction = cfg.friction_rate();
    let rows = (0..steps).map(|i| {
        let target = friction * traj.qdot[i];
        vec![traj.time(i), gamma[i], drag[i], target, drag[i] - target]
    });
    write_output(
        out,
        &csv("t,gamma,convolution,markov_target,residual", rows),
    )
}

#[allow(clippy::too_many_arguments)]
fn run_trajectory(
    cfg: &PhysicalConfig,
    solver: Solver,
    q0: f64,
    v0: f64,
    t_end: Option<f64>,
    step: Option<f64>,
    quad_points: usize,
    out: Option<&Path>,
    format: Option<Format>,
) -> Result<()> {
    require_format(format, Format::Csv, "trajectory")?;
    let period = 2.0 * PI / cfg.omega;
    let t_end = t_end.unwrap_or(10.0 * period);
    let default_step = match solver {
        Solver::Nonmarkov => (0.4 / cfg.cutoff).min(period / 200.0),
        _ => period / 200.0,
    };
    let h = step.unwrap_or(default_step);
    let traj = match solver {
        Solver::Markov => dynamics::solve_markovian(cfg, q0, v0, t_end, h)?,
        Solver::Rr => dynamics::solve_with_radiation_reaction(cfg, q0, v0, t_end, h)?,
        Solver::Nonmarkov => {
            let kernel = MemoryKernel::new(
                CouplingFunction::special(cfg.beta),
                cfg.m,
                cfg.cutoff,
                quad_points,
            )?;
            dynamics::solve_nonmarkovian(cfg, &kernel, q0, v0, t_end, h)?
        }
    };
    let energies = dynamics::energy(cfg, &traj);
    let rows = (0..traj.len()).map(|i| vec![traj.time(i), traj.q[i], traj.qdot[i], energies[i]]);
    write_output(out, &csv("t,q,qdot,energy", rows))
}

#[allow(clippy::too_many_arguments)]
fn run_rates(
    cfg: &PhysicalConfig,
    n: u32,
    direction: Dir,
    field: &str,
    reservoir: &str,
    evaluation: Option<(f64, f64, Shape, f64)>,
    out: Option<&Path>,
    format: Option<Format>,
) -> Result<()> {
    require_format(format, Format::Json, "rates")?;
    let field = parse_field_bath(field)?;
    let reservoir = parse_reservoir_bath(reservoir)?;
    let direction = match direction {
        Dir::Down => Direction::Down,
        Dir::Up => Direction::Up,
    };
    let rate = rates::transition_rate(n, direction, &field, &reservoir, cfg)?;
    write_output(out, &rate_json(&rate, evaluation)?)
}

#[allow(clippy::too_many_arguments)]
fn run_exchange(
    cfg: &PhysicalConfig,
    mode: ExchangeMode,
    photon: &str,
    reservoir: &str,
    t: Option<f64>,
    eta: Option<f64>,
    shape: Shape,
    out: Option<&Path>,
    format: Option<Format>,
) -> Result<()> {
    require_format(format, Format::Json, "exchange")?;
    let values = parse_floats(photon, 5, "--photon")?;
    let photon = parse_field_quantum(&values)?;
    let reservoir = parse_reservoir_bath(reservoir)?;
    let coupling = CouplingFunction::special(cfg.beta);
    let rate = match mode {
        ExchangeMode::Absorb => {
            exchange::photon_absorption_rate(&photon, &reservoir, &coupling, cfg)?
        }
        ExchangeMode::Emit => exchange::photon_emission_rate(&photon, &reservoir, &coupling, cfg)?,
    };
    let evaluation = evaluation_args(t, eta, shape, photon.omega_p)?;
    write_output(out, &rate_json(&rate, evaluation)?)
}

fn oracle_json(run: &oracle::OracleRun) -> String {
    let ratio = match run.ratio() {
        Some(r) => g17(r),
        None => "null".into(),
    };
    format!(
        "{{\n  \"fitted_slope\": {},\n  \"analytic_slope\": {},\n  \"ratio\": {}\n}}\n",
        g17(run.fitted_slope),
        g17(run.analytic_slope),
        ratio
    )
}

#[allow(clippy::too_many_arguments)]
fn run_oracle(
    cfg: &PhysicalConfig,
    bath: Bath,
    n: u32,
    modes: usize,
    band: &str,
    t_grid: Option<&str>,
    out: Option<&Path>,
    format: Option<Format>,
) -> Result<()> {
    let selection = match bath {
        Bath::Reservoir => BathSelection::Reservoir,
        Bath::Field => BathSelection::Field,
        Bath::Both => BathSelection::Both,
    };
    let band_values = parse_floats(band, 2, "--band")?;
    let band = (band_values[0] * cfg.omega, band_values[1] * cfg.omega);
    let bandwidth = band.1 - band.0;

    let times = match t_grid {
        Some(text) => {
            let values = parse_floats(text, 3, "--t-grid")?;
            let steps = values[2] as usize;
            if steps < 2 {
                return Err(Error::Config("--t-grid needs at least 2 steps".into()));
            }
            oracle::linspace(values[0], values[1], steps)
        }
        None => {
            if modes == 0 {
                return Err(Error::Config("--modes must be positive".into()));
            }
            let spacing = bandwidth / modes as f64;
            let t_rec = 2.0 * PI / spacing;
            let t_lo = 10.0 / bandwidth;
            let slope = oracle::analytic_down_slope(cfg, selection, n);
            let mut t_hi = 0.45 * t_rec;
            if slope > 0.0 {
                t_hi = t_hi.min(0.08 / slope);
            }
            if t_hi <= t_lo {
                return Err(Error::Precondition(format!(
                    "derived window [{t_lo}, {t_hi}] is empty; pass --t-grid explicitly"
                )));
            }
            oracle::linspace(t_lo, t_hi, 200)
        }
    };

    let run = oracle::run_first_step(cfg, selection, n, modes, band, &times)?;
    let series = csv(
        "t,P_stay,P_transfer",
        (0..run.times.len()).map(|i| vec![run.times[i], run.p_stay[i], run.p_transfer[i]]),
    );
    let summary = oracle_json(&run);
    match out {
        Some(path) => {
            write_output(Some(path), &series)?;
            let mut json_path = path.as_os_str().to_owned();
            json_path.push(".json");
            write_output(Some(Path::new(&json_path)), &summary)
        }
        None => match format.unwrap_or(Format::Json) {
            Format::Csv => write_output(None, &series),
            Format::Json => write_output(None, &summary),
        },
    }
}

/// Parse and dispatch one invocation.
pub fn execute<I, T>(args: I) -> Result<()>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(err)
            if matches!(
                err.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            ) =>
        {
            print!("{err}");
            return Ok(());
        }
        Err(err) => {
            let line = err
                .to_string()
                .lines()
                .next()
                .unwrap_or("bad arguments")
                .trim_start_matches("error: ")
                .to_string();
            return Err(Error::Config(line));
        }
    };
    let cfg = merge_config(&cli)?;
    let out = cli.out.as_deref();
    match cli.command {
        Command::Kernel {
            t_end,
            step,
            quad_points,
        } => run_kernel(&cfg, t_end, step, quad_points, out, cli.format),
        Command::Trajectory {
            solver,
            q0,
            v0,
            t_end,
            step,
            quad_points,
        } => run_trajectory(
            &cfg,
            solver,
            q0,
            v0,
            t_end,
            step,
            quad_points,
            out,
            cli.format,
        ),
        Command::Rates {
            n,
            direction,
            field,
            reservoir,
            t,
            eta,
            kernel_shape,
        } => {
            let evaluation = evaluation_args(t, eta, kernel_shape, cfg.omega)?;
            run_rates(
                &cfg, n, direction, &field, &reservoir, evaluation, out, cli.format,
            )
        }
        Command::Exchange {
            mode,
            photon,
            reservoir,
            t,
            eta,
            kernel_shape,
        } => run_exchange(
            &cfg,
            mode,
            &photon,
            &reservoir,
            t,
            eta,
            kernel_shape,
            out,
            cli.format,
        ),
        Command::Oracle {
            bath,
            n,
            modes,
            band,
            t_grid,
        } => run_oracle(
            &cfg,
            bath,
            n,
            modes,
            &band,
            t_grid.as_deref(),
            out,
            cli.format,
        ),
    }
}

/// Run from `std::env::args`, mapping errors to the documented exit codes
/// and the single-line `ERROR <code>: <message>` form on stderr.
pub fn main_entry() -> i32 {
    match execute(std::env::args_os()) {
        Ok(()) => 0,
        Err(err) => {
            let message = err.to_string().replace('\n', " ");
            let detail = message
                .split_once(": ")
                .map(|(_, rest)| rest.to_string())
                .unwrap_or(message);
            eprintln!("ERROR {}: {}", err.code(), detail);
            err.exit_code()
        }
    }
}
