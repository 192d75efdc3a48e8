//! Command-line front end.
//!
//! ```text
//! emitter-bell <g2-scan|bell-test|mc-bell|path-check> [--config FILE] [--KEY VALUE]...
//! ```
//!
//! Settings come from an optional `key = value` file and are overridden by
//! flags of the same name. CSV goes to `output` if set, otherwise stdout.
//!
//! Exit status: 0 success, 2 unknown command, 3 invalid configuration,
//! 4 output not writable.

use std::f64::consts::TAU;
use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use crate::bell::{bell_angle_settings, scan, ChSettings};
use crate::config::{ConfigError, KeyValues};
use crate::correlations::{g2_at_phase, joint_probability_at_phase, Efficiency, Visibility};
use crate::geometry::{phase_difference, DetectorSetting, EmitterPair};
use crate::montecarlo::{estimate_ch, McConfig};
use crate::pathmodel::{
    g2_from_paths, postselected_state, schmidt_rank, Bipartition, Mode, DEFAULT_SCHMIDT_TOL,
};
use crate::quantum::{two_photon_amplitude, FieldParams};

const DEFAULT_KD: f64 = 20.0;
const DEFAULT_SCAN_POINTS: u64 = 64;
const DEFAULT_PATH_GRID: u64 = 100;
const DEFAULT_TRIALS: u64 = 1_000_000;

#[derive(Debug, Parser)]
#[command(name = "emitter-bell", version, about = "Two-emitter photon correlations and CH74 Bell tests")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// G2 and joint detection probability over a phase or angle grid.
    G2Scan(Overrides),
    /// CH statistic at the Bell angles (or given settings) over a visibility grid.
    BellTest(Overrides),
    /// Monte Carlo coincidence runs, one CSV row per seed.
    McBell(Overrides),
    /// Compares path-model and field-operator G2 and reports the Schmidt rank.
    PathCheck(Overrides),
}

/// Every key may also be given in the config file, with `_` or `-`.
#[derive(Debug, Args, Default)]
struct Overrides {
    /// `key = value` configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Emitter separation times wavenumber.
    #[arg(long)]
    kd: Option<String>,
    #[arg(long)]
    e0: Option<String>,
    #[arg(long)]
    visibility: Option<String>,
    #[arg(long)]
    eta: Option<String>,
    /// Comma-separated phase differences (g2-scan).
    #[arg(long = "delta-phi")]
    delta_phi: Option<String>,
    /// Fixed angle of detector 1 (g2-scan with xi2).
    #[arg(long)]
    xi1: Option<String>,
    /// Comma-separated angles of detector 2 (g2-scan).
    #[arg(long)]
    xi2: Option<String>,
    /// Grid size: scan points, or points per axis for path-check.
    #[arg(long)]
    points: Option<String>,
    /// Comma-separated visibilities (bell-test).
    #[arg(long = "v-grid")]
    v_grid: Option<String>,
    /// `phi1, phi1', phi2, phi2'`.
    #[arg(long)]
    phases: Option<String>,
    /// Detector angles `xi1, xi1', xi2, xi2'`, converted with kd.
    #[arg(long)]
    angles: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// Comma-separated seeds (mc-bell); overrides seed/runs.
    #[arg(long)]
    seeds: Option<String>,
    /// Number of consecutive seeds starting at `seed`.
    #[arg(long)]
    runs: Option<String>,
    /// Trials per setting (mc-bell).
    #[arg(long)]
    trials: Option<String>,
    #[arg(long)]
    output: Option<String>,
}

#[derive(Debug)]
pub enum CliError {
    UnknownCommand(String),
    InvalidConfig(String),
    Output(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::UnknownCommand(_) => 2,
            CliError::InvalidConfig(_) => 3,
            CliError::Output(_) => 4,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::UnknownCommand(m) => write!(f, "unknown command: {m}"),
            CliError::InvalidConfig(m) => write!(f, "invalid configuration: {m}"),
            CliError::Output(m) => write!(f, "cannot write output: {m}"),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::InvalidConfig(e.0)
    }
}

impl From<crate::Error> for CliError {
    fn from(e: crate::Error) -> Self {
        CliError::InvalidConfig(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    G2Scan,
    BellTest,
    McBell,
    PathCheck,
}

/// Where each grid point comes from in a g2 scan.
#[derive(Debug, Clone, PartialEq)]
pub enum PhaseGrid {
    Phases(Vec<f64>),
    Angles { xi1: f64, xi2: Vec<f64> },
    Uniform(u64),
}

/// Fully validated run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: CommandKind,
    pub geometry: EmitterPair,
    pub field: FieldParams,
    pub visibility: Visibility,
    pub eta: Efficiency,
    pub phase_grid: PhaseGrid,
    pub v_grid: Vec<Visibility>,
    pub settings: ChSettings,
    pub path_grid: u64,
    pub seeds: Vec<u64>,
    pub trials: u64,
    pub output: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_key_values(command: CommandKind, kv: &KeyValues) -> Result<Self, CliError> {
        const KNOWN: &[&str] = &[
            "kd", "e0", "visibility", "eta", "delta_phi", "xi1", "xi2", "points", "v_grid",
            "phases", "angles", "seed", "seeds", "runs", "trials", "output",
        ];
        if let Some(k) = kv.keys().find(|k| !KNOWN.contains(k)) {
            return Err(CliError::InvalidConfig(format!("unknown key {k:?}")));
        }

        let geometry = EmitterPair::new(kv.number("kd")?.unwrap_or(DEFAULT_KD))?;
        let field = FieldParams::new(kv.number("e0")?.unwrap_or(1.0))?;
        let visibility = Visibility::new(kv.number("visibility")?.unwrap_or(1.0))?;
        let eta = Efficiency::new(kv.number("eta")?.unwrap_or(1.0))?;

        let phase_grid = match (kv.numbers("delta_phi")?, kv.numbers("xi2")?) {
            (Some(_), Some(_)) => {
                return Err(CliError::InvalidConfig("give either delta_phi or xi2, not both".into()))
            }
            (Some(p), None) => PhaseGrid::Phases(p),
            (None, Some(xi2)) => PhaseGrid::Angles { xi1: kv.number("xi1")?.unwrap_or(0.0), xi2 },
            (None, None) => PhaseGrid::Uniform(kv.integer("points")?.unwrap_or(DEFAULT_SCAN_POINTS)),
        };
        if matches!(phase_grid, PhaseGrid::Uniform(0)) {
            return Err(CliError::InvalidConfig("points must be at least 1".into()));
        }

        let v_grid = match kv.numbers("v_grid")? {
            Some(vs) => vs.into_iter().map(Visibility::new).collect::<Result<Vec<_>, _>>()?,
            None => (0..=100).map(|i| Visibility::new(i as f64 / 100.0)).collect::<Result<_, _>>()?,
        };

        let settings = match (kv.numbers("phases")?, kv.numbers("angles")?) {
            (Some(_), Some(_)) => {
                return Err(CliError::InvalidConfig("give either phases or angles, not both".into()))
            }
            (Some(p), None) => ChSettings::new(four(&p, "phases")?, visibility, eta)?,
            (None, Some(a)) => {
                let dets = four(&a, "angles")?;
                let dets = [
                    DetectorSetting::new(dets[0])?,
                    DetectorSetting::new(dets[1])?,
                    DetectorSetting::new(dets[2])?,
                    DetectorSetting::new(dets[3])?,
                ];
                ChSettings::from_detectors(&geometry, dets, visibility, eta)?
            }
            (None, None) => bell_angle_settings(visibility, eta),
        };

        let path_grid = kv.integer("points")?.unwrap_or(DEFAULT_PATH_GRID);
        if path_grid == 0 {
            return Err(CliError::InvalidConfig("points must be at least 1".into()));
        }

        let seeds = match kv.integers("seeds")? {
            Some(s) => s,
            None => {
                let start = kv.integer("seed")?.unwrap_or(1);
                let runs = kv.integer("runs")?.unwrap_or(1);
                (0..runs).map(|i| start.wrapping_add(i)).collect()
            }
        };
        let trials = kv.integer("trials")?.unwrap_or(DEFAULT_TRIALS);
        if trials == 0 {
            return Err(CliError::InvalidConfig("trials must be at least 1".into()));
        }

        Ok(Self {
            command,
            geometry,
            field,
            visibility,
            eta,
            phase_grid,
            v_grid,
            settings,
            path_grid,
            seeds,
            trials,
            output: kv.get("output").map(PathBuf::from),
        })
    }
}

fn four(values: &[f64], key: &str) -> Result<[f64; 4], CliError> {
    values
        .try_into()
        .map_err(|_| CliError::InvalidConfig(format!("{key} needs exactly 4 values, got {}", values.len())))
}

/// Shortest-form-independent numeric formatting: 17 significant digits.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Parses argv (including the program name), runs the command, and returns
/// the process exit status. Diagnostics go to stderr.
pub fn run(argv: Vec<String>) -> i32 {
    match try_run(argv, &mut io::stdout().lock()) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Like [`run`] but with stdout redirected to `out`.
pub fn try_run(argv: Vec<String>, out: &mut dyn Write) -> Result<(), CliError> {
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    write!(out, "{e}").map_err(|e| CliError::Output(e.to_string()))
                }
                ErrorKind::InvalidSubcommand
                | ErrorKind::MissingSubcommand
                | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => {
                    Err(CliError::UnknownCommand(first_line(&e.to_string())))
                }
                _ => Err(CliError::InvalidConfig(first_line(&e.to_string()))),
            };
        }
    };
    let (kind, flags) = match cli.command {
        Command::G2Scan(o) => (CommandKind::G2Scan, o),
        Command::BellTest(o) => (CommandKind::BellTest, o),
        Command::McBell(o) => (CommandKind::McBell, o),
        Command::PathCheck(o) => (CommandKind::PathCheck, o),
    };
    let kv = merge(&flags)?;
    let cfg = RunConfig::from_key_values(kind, &kv)?;
    let body = render(&cfg)?;
    match &cfg.output {
        Some(path) => fs::write(path, body.as_bytes())
            .map_err(|e| CliError::Output(format!("{}: {e}", path.display()))),
        None => out.write_all(body.as_bytes()).map_err(|e| CliError::Output(e.to_string())),
    }
}

fn first_line(s: &str) -> String {
    s.lines().next().unwrap_or("").trim_start_matches("error: ").to_string()
}

fn merge(o: &Overrides) -> Result<KeyValues, CliError> {
    let mut kv = match &o.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::InvalidConfig(format!("{}: {e}", path.display())))?;
            KeyValues::parse(&text)?
        }
        None => KeyValues::default(),
    };
    let flags = [
        ("kd", &o.kd),
        ("e0", &o.e0),
        ("visibility", &o.visibility),
        ("eta", &o.eta),
        ("delta_phi", &o.delta_phi),
        ("xi1", &o.xi1),
        ("xi2", &o.xi2),
        ("points", &o.points),
        ("v_grid", &o.v_grid),
        ("phases", &o.phases),
        ("angles", &o.angles),
        ("seed", &o.seed),
        ("seeds", &o.seeds),
        ("runs", &o.runs),
        ("trials", &o.trials),
        ("output", &o.output),
    ];
    for (key, value) in flags {
        if let Some(v) = value {
            kv.set(key, v.clone());
        }
    }
    Ok(kv)
}

/// Produces the command's output text (CSV or report line).
pub fn render(cfg: &RunConfig) -> Result<String, CliError> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let csv_err = |e: csv::Error| CliError::Output(e.to_string());
    match cfg.command {
        CommandKind::G2Scan => {
            w.write_record(["delta_phi", "g2", "joint_probability"]).map_err(csv_err)?;
            for dphi in scan_phases(cfg)? {
                let g2 = g2_at_phase(dphi, &cfg.field, cfg.visibility);
                let joint = joint_probability_at_phase(dphi, cfg.visibility, cfg.eta);
                w.write_record([fmt_num(dphi), fmt_num(g2), fmt_num(joint)]).map_err(csv_err)?;
            }
        }
        CommandKind::BellTest => {
            w.write_record(["v", "statistic", "lower_margin", "violated"]).map_err(csv_err)?;
            for row in scan(&cfg.v_grid, &[cfg.settings])? {
                w.write_record([
                    fmt_num(row.v.get()),
                    fmt_num(row.result.statistic),
                    fmt_num(row.result.lower_margin),
                    row.result.violated().to_string(),
                ])
                .map_err(csv_err)?;
            }
        }
        CommandKind::McBell => {
            w.write_record(["seed", "trials", "statistic_hat", "std_error", "sigma_violation"])
                .map_err(csv_err)?;
            for &seed in &cfg.seeds {
                let est = estimate_ch(&McConfig::new(seed, cfg.trials, cfg.settings)?)?;
                w.write_record([
                    seed.to_string(),
                    cfg.trials.to_string(),
                    fmt_num(est.statistic_hat),
                    fmt_num(est.std_error),
                    fmt_num(est.sigma_violation()),
                ])
                .map_err(csv_err)?;
            }
        }
        CommandKind::PathCheck => {
            let report = path_check(cfg)?;
            return Ok(format!(
                "max_deviation={} grid_points={} schmidt_rank={}\n",
                fmt_num(report.max_deviation),
                report.grid_points,
                report.schmidt_rank
            ));
        }
    }
    let bytes = w.into_inner().map_err(|e| CliError::Output(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Output(e.to_string()))
}

fn scan_phases(cfg: &RunConfig) -> Result<Vec<f64>, CliError> {
    Ok(match &cfg.phase_grid {
        PhaseGrid::Phases(p) => p.clone(),
        PhaseGrid::Uniform(n) => (0..*n).map(|i| TAU * i as f64 / *n as f64).collect(),
        PhaseGrid::Angles { xi1, xi2 } => {
            let d1 = DetectorSetting::new(*xi1)?;
            xi2.iter()
                .map(|&x| Ok(phase_difference(&cfg.geometry, &d1, &DetectorSetting::new(x)?)))
                .collect::<Result<_, crate::Error>>()?
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathCheckReport {
    pub max_deviation: f64,
    pub grid_points: u64,
    pub schmidt_rank: usize,
}

/// Compares `G2` from the four-mode path amplitude with `G2` from the atomic
/// field operators over an `n x n` grid of detector angles.
pub fn path_check(cfg: &RunConfig) -> Result<PathCheckReport, CliError> {
    let n = cfg.path_grid;
    let angle = |i: u64| {
        let half = std::f64::consts::FRAC_PI_2;
        if n == 1 {
            0.0
        } else {
            (-half + std::f64::consts::PI * i as f64 / (n - 1) as f64).clamp(-half, half)
        }
    };
    let g = &cfg.geometry;
    let mut max_dev = 0.0f64;
    for i in 0..n {
        let d1 = DetectorSetting::new(angle(i))?;
        let p1 = crate::geometry::phase_at(g, &d1);
        for j in 0..n {
            let d2 = DetectorSetting::new(angle(j))?;
            let p2 = crate::geometry::phase_at(g, &d2);
            let ops = two_photon_amplitude(g, &d1, &d2, &cfg.field).norm_sqr();
            max_dev = max_dev.max((g2_from_paths(p1, p2, &cfg.field) - ops).abs());
        }
    }
    let split = Bipartition::new(&[Mode::K1, Mode::K2])?;
    let rank = schmidt_rank(&postselected_state(true), &split, DEFAULT_SCHMIDT_TOL)?;
    Ok(PathCheckReport { max_deviation: max_dev, grid_points: n * n, schmidt_rank: rank })
}
