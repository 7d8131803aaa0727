//! Command-line front end.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::constellation::Modulation;
use crate::error::Error;
use crate::geometry::{d_min_grid, singular_fade_states};
use crate::montecarlo::{
    fit_diversity, ErrorMetric, Phase, SerEstimate, SimConfig, Simulator, SnrSweep, SweepWriter,
    DEFAULT_ERROR_FLOOR,
};
use crate::netmap::NetworkMap;
use crate::selection::Scheme;

#[derive(Debug, Parser)]
#[command(
    name = "pnc",
    version,
    about = "Physical-layer network coding link simulator"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// MA-phase (or end-to-end) SER sweep with antenna selection.
    Sweep(SweepArgs),
    /// Relay-to-user broadcast SER sweep.
    Bc(BcArgs),
    /// Singular fade states and a d_min heatmap over the h_A/h_B plane.
    Geometry(GeometryArgs),
    /// Check a map file against the exclusive law.
    ValidateMap(ValidateMapArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Modulation: bpsk, qpsk, 8psk, 16psk.
    #[arg(long = "mod", default_value = "qpsk")]
    pub modulation: Modulation,
    /// Es/N0 range in dB, start:step:stop or a single value.
    #[arg(long, default_value = "0:5:30")]
    pub snr: SnrSweep,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Maximum trials per SNR point.
    #[arg(long, default_value_t = 100_000_000, value_parser = clap::value_parser!(u64).range(1..))]
    pub trials: u64,
    /// Stop a point once this many errors are counted.
    #[arg(long, default_value_t = 200, value_parser = clap::value_parser!(u64).range(1..))]
    pub target_errors: u64,
    /// Worker threads, 0 = all available cores.
    #[arg(long, default_value_t = 0)]
    pub workers: usize,
    /// Relay map file (defaults to bitwise XOR).
    #[arg(long)]
    pub map_file: Option<PathBuf>,
    /// Write CSV here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Antenna selection: none, tas1, tas2, jas.
    #[arg(long, default_value = "none")]
    pub scheme: Scheme,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub na: u64,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub nb: u64,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub nr: u64,
    /// MA error event: ncs or pair.
    #[arg(long, default_value = "ncs")]
    pub metric: ErrorMetric,
    /// ma (relay only) or e2e (relay then broadcast to user A).
    #[arg(long, default_value = "ma", value_parser = parse_sweep_phase)]
    pub phase: Phase,
}

fn parse_sweep_phase(s: &str) -> Result<Phase, String> {
    match s.parse()? {
        Phase::Bc => Err("use the bc subcommand for broadcast-only runs".into()),
        p => Ok(p),
    }
}

#[derive(Debug, Args)]
pub struct BcArgs {
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Args)]
pub struct GeometryArgs {
    #[arg(long = "mod", default_value = "qpsk")]
    pub modulation: Modulation,
    #[arg(long)]
    pub map_file: Option<PathBuf>,
    /// Real-axis range of γ = h_A/h_B, lo:hi.
    #[arg(long, default_value = "-2:2", value_parser = parse_span, allow_hyphen_values = true)]
    pub re: (f64, f64),
    /// Imaginary-axis range of γ, lo:hi.
    #[arg(long, default_value = "-2:2", value_parser = parse_span, allow_hyphen_values = true)]
    pub im: (f64, f64),
    /// Grid points per axis.
    #[arg(long, default_value_t = 201, value_parser = clap::value_parser!(u64).range(1..))]
    pub steps: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_span(s: &str) -> Result<(f64, f64), String> {
    let (lo, hi) = s
        .split_once(':')
        .ok_or_else(|| format!("'{s}' is not lo:hi"))?;
    let lo: f64 = lo
        .trim()
        .parse()
        .map_err(|_| format!("bad number '{lo}'"))?;
    let hi: f64 = hi
        .trim()
        .parse()
        .map_err(|_| format!("bad number '{hi}'"))?;
    if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
        return Err(format!("range '{s}' must satisfy lo <= hi"));
    }
    Ok((lo, hi))
}

#[derive(Debug, Args)]
pub struct ValidateMapArgs {
    /// Map file: first line M, then M rows of M integers.
    pub file: PathBuf,
}

/// A fully resolved command.
#[derive(Debug)]
pub enum Invocation {
    Sweep {
        cfg: SimConfig,
        map_file: Option<PathBuf>,
        out: Option<PathBuf>,
    },
    Geometry {
        modulation: Modulation,
        map_file: Option<PathBuf>,
        re: (f64, f64),
        im: (f64, f64),
        steps: usize,
        out: Option<PathBuf>,
    },
    ValidateMap {
        file: PathBuf,
    },
}

fn base_config(run: &RunArgs) -> SimConfig {
    SimConfig {
        modulation: run.modulation,
        sweep: run.snr,
        seed: run.seed,
        max_trials: run.trials,
        target_errors: run.target_errors,
        workers: run.workers,
        ..SimConfig::default()
    }
}

pub fn parse_args<I, T>(argv: I) -> Result<Invocation, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv)?;
    Ok(match cli.command {
        Command::Sweep(a) => {
            if a.phase == Phase::E2e && a.metric == ErrorMetric::Pair {
                return Err(clap::Error::raw(
                    clap::error::ErrorKind::ArgumentConflict,
                    "--metric pair only applies to --phase ma\n",
                ));
            }
            let cfg = SimConfig {
                n_a: a.na as usize,
                n_b: a.nb as usize,
                n_r: a.nr as usize,
                scheme: a.scheme,
                metric: a.metric,
                phase: a.phase,
                ..base_config(&a.run)
            };
            Invocation::Sweep {
                cfg,
                map_file: a.run.map_file,
                out: a.run.out,
            }
        }
        Command::Bc(a) => Invocation::Sweep {
            cfg: SimConfig {
                phase: Phase::Bc,
                ..base_config(&a.run)
            },
            map_file: a.run.map_file,
            out: a.run.out,
        },
        Command::Geometry(a) => Invocation::Geometry {
            modulation: a.modulation,
            map_file: a.map_file,
            re: a.re,
            im: a.im,
            steps: a.steps as usize,
            out: a.out,
        },
        Command::ValidateMap(a) => Invocation::ValidateMap { file: a.file },
    })
}

enum Failure {
    Usage(String),
    Runtime(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Runtime(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Runtime(e.into())
    }
}

fn load_map(path: &Option<PathBuf>, modulation: Modulation) -> Result<Option<NetworkMap>, Failure> {
    let Some(path) = path else { return Ok(None) };
    let map = NetworkMap::load(path)?;
    if map.order() != modulation.order() {
        return Err(Failure::Usage(format!(
            "--map-file has order {} but --mod {} has order {}",
            map.order(),
            modulation,
            modulation.order()
        )));
    }
    Ok(Some(map))
}

fn open_output<'a>(
    out: &Option<PathBuf>,
    stdout: &'a mut dyn Write,
) -> io::Result<Box<dyn Write + 'a>> {
    Ok(match out {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(stdout),
    })
}

fn summarize(cfg: &SimConfig, points: &[SerEstimate], err: &mut dyn Write) -> io::Result<()> {
    for p in points.iter().filter(|p| p.is_censored()) {
        writeln!(
            err,
            "# {} dB: no errors in {} trials (SER < {:.3e} at 95%)",
            p.snr_db,
            p.trials,
            p.interval().1
        )?;
    }
    let (lo, hi) = (cfg.sweep.start, cfg.sweep.stop);
    match fit_diversity(points, lo, hi) {
        Ok(fit) => writeln!(
            err,
            "# diversity slope {:.3} over {}..{} dB ({} points)",
            fit.slope,
            fit.window.0,
            fit.window.1,
            fit.points.len()
        ),
        Err(_) => writeln!(
            err,
            "# no diversity fit: fewer than two points with >= {DEFAULT_ERROR_FLOOR} errors"
        ),
    }
}

fn run_sweep(
    mut cfg: SimConfig,
    map_file: &Option<PathBuf>,
    out: &Option<PathBuf>,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<(), Failure> {
    cfg.map = load_map(map_file, cfg.modulation)?;
    let sim = Simulator::new(cfg).map_err(|e| match e {
        Error::InvalidConfig(msg) => Failure::Usage(msg),
        other => Failure::Runtime(other),
    })?;
    let mut writer = SweepWriter::new(open_output(out, stdout)?);
    let mut failed = None;
    let points = sim.run_sweep_with(|est| {
        if failed.is_none() {
            failed = writer.write(sim.config(), est).err();
        }
    });
    if let Some(e) = failed {
        return Err(e.into());
    }
    writer.into_inner()?.flush()?;
    summarize(sim.config(), &points, stderr)?;
    Ok(())
}

fn run_geometry(inv: &Invocation, stdout: &mut dyn Write) -> Result<(), Failure> {
    let Invocation::Geometry {
        modulation,
        map_file,
        re,
        im,
        steps,
        out,
    } = inv
    else {
        unreachable!()
    };
    let c = modulation.constellation();
    let m = match load_map(map_file, *modulation)? {
        Some(m) => m,
        None => NetworkMap::xor(c.order())?,
    };
    let states = singular_fade_states(&c, &m)?;
    let grid = d_min_grid(&c, &m, *re, *im, *steps)?;
    let mut w = open_output(out, stdout)?;
    writeln!(
        w,
        "# singular fade states of {} (gamma = h_A/h_B): {} finite nonzero{}{}",
        c.name(),
        states.ratios.len(),
        if states.includes_zero {
            ", gamma=0"
        } else {
            ""
        },
        if states.includes_infinity {
            ", gamma=inf"
        } else {
            ""
        },
    )?;
    for g in &states.ratios {
        writeln!(w, "# singular,{:.12},{:.12}", g.re, g.im)?;
    }
    writeln!(w, "re_gamma,im_gamma,d_min")?;
    for (x, y, d) in grid {
        writeln!(w, "{x},{y},{d:.9e}")?;
    }
    w.flush()?;
    Ok(())
}

fn run_validate(
    file: &PathBuf,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<bool, Failure> {
    let text = std::fs::read_to_string(file)?;
    match NetworkMap::parse(&text) {
        Ok(m) => {
            writeln!(stdout, "valid Latin square (M = {})", m.order())?;
            Ok(true)
        }
        Err(Error::ExclusiveLaw(v)) => {
            writeln!(stderr, "invalid map: {v}")?;
            Ok(false)
        }
        Err(e) => {
            writeln!(stderr, "invalid map: {e}")?;
            Ok(false)
        }
    }
}

/// Runs a parsed invocation; returns the process exit status.
pub fn execute(inv: Invocation, stdout: &mut dyn Write, stderr: &mut dyn Write) -> u8 {
    let result = match &inv {
        Invocation::Sweep { cfg, map_file, out } => {
            run_sweep(cfg.clone(), map_file, out, stdout, stderr).map(|_| true)
        }
        Invocation::Geometry { .. } => run_geometry(&inv, stdout).map(|_| true),
        Invocation::ValidateMap { file } => run_validate(file, stdout, stderr),
    };
    match result {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            2
        }
        Err(Failure::Runtime(e)) => {
            let _ = writeln!(stderr, "error: {e}");
            1
        }
    }
}

pub fn main_with_args<I, T>(argv: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let inv = match parse_args(argv) {
        Ok(inv) => inv,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let stdout = io::stdout();
    let stderr = io::stderr();
    ExitCode::from(execute(inv, &mut stdout.lock(), &mut stderr.lock()))
}
