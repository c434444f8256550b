//! Argument parsing and report placement.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::config::{overlay, parse_entries, ConfigError, Entry, RunConfig, DEFAULTS_HELP};
use crate::run::{run, Command, Report, RunError};

/// Environment variable naming the directory for reports.
pub const OUT_DIR_ENV: &str = "TRIMODE_OUT_DIR";

#[derive(Parser, Debug)]
#[command(name = "trimode", version, about = "Three-mode entanglement calculator", after_help = DEFAULTS_HELP)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Sub,
}

#[derive(Subcommand, Debug)]
pub enum Sub {
    /// Heisenberg coefficients and mode populations
    Dynamics(Flags),
    /// 6x6 quadrature covariance matrix
    Covariance(Flags),
    /// Partial-transpose test of every single-mode cut
    Ppt(Flags),
    /// Truncated Fock state checked against the closed form
    State(Flags),
    /// Closed-form telecloning fidelities
    Teleclone(Flags),
    /// Monte Carlo telecloning fidelities
    TelecloneMc(Flags),
    /// Conditional twin-beam metrics, one row per (n2, n3, eta)
    Twb(Flags),
    /// Classical output energy over a pump-energy grid
    ClassicalSweep(Flags),
    /// Residuals of measured energies against the classical model
    ClassicalCompare(Flags),
}

impl Sub {
    fn split(&self) -> (Command, &Flags) {
        match self {
            Sub::Dynamics(f) => (Command::Dynamics, f),
            Sub::Covariance(f) => (Command::Covariance, f),
            Sub::Ppt(f) => (Command::Ppt, f),
            Sub::State(f) => (Command::State, f),
            Sub::Teleclone(f) => (Command::Teleclone, f),
            Sub::TelecloneMc(f) => (Command::TelecloneMc, f),
            Sub::Twb(f) => (Command::Twb, f),
            Sub::ClassicalSweep(f) => (Command::ClassicalSweep, f),
            Sub::ClassicalCompare(f) => (Command::ClassicalCompare, f),
        }
    }
}

/// Flags shared by every subcommand; each maps to the configuration key of
/// the same name with `-` replaced by `_`.
#[derive(Args, Debug, Default)]
pub struct Flags {
    /// Configuration file of key=value entries; flags override it
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Extra key=value entry (repeatable)
    #[arg(long = "set", value_name = "KEY=VALUE", allow_hyphen_values = true)]
    pub set: Vec<String>,
    /// Unit for bare numbers given to --e1, --e4, --from and --to
    #[arg(long, value_parser = ["J", "mJ", "uJ"])]
    pub unit: Option<String>,
    /// Use the equal-population point of --ratio
    #[arg(long)]
    pub symmetric: bool,

    /// |gamma1/gamma2|
    #[arg(long, allow_hyphen_values = true)]
    pub ratio: Option<String>,
    /// Reduced angle |Omega| t
    #[arg(long, allow_hyphen_values = true)]
    pub omega_t: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub gamma1: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub gamma1_phase: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub gamma2: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub gamma2_phase: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub time: Option<String>,
    /// Coherent seed amplitude of mode 1, re,im
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<String>,
    /// Coherent input to be cloned, re,im
    #[arg(long, allow_hyphen_values = true)]
    pub z: Option<String>,
    /// Detector efficiencies
    #[arg(long, allow_hyphen_values = true)]
    pub eta: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub n2: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub n3: Option<String>,
    /// Target fidelity of the second clone on the asymmetric frontier
    #[arg(long, allow_hyphen_values = true)]
    pub f3: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub cutoff: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub max_tail: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub samples: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub seed: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub c1: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub c2: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub e1: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub e4: Option<String>,
    /// Crystal length
    #[arg(long, allow_hyphen_values = true)]
    pub length: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub omega_ratio: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub from: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub to: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub steps: Option<String>,
    /// Measurement CSV with columns e5_joules, e2_joules
    #[arg(long)]
    pub data: Option<String>,
    /// Report path; defaults to $TRIMODE_OUT_DIR/<command>.<ext>, else stdout
    #[arg(long)]
    pub out: Option<String>,
    #[arg(long, value_parser = ["json", "csv"])]
    pub format: Option<String>,
    /// Write the amplitude cube of `state` to this file
    #[arg(long)]
    pub dump: Option<String>,
}

impl Flags {
    /// Flag values as configuration entries.
    pub fn entries(&self) -> Result<Vec<Entry>, ConfigError> {
        let mut out = Vec::new();
        let energy = |v: &String| match &self.unit {
            Some(u) if v.ends_with(|c: char| c.is_ascii_digit() || c == '.') => format!("{v}{u}"),
            _ => v.clone(),
        };
        let fields: [(&str, &Option<String>, bool); 30] = [
            ("ratio", &self.ratio, false),
            ("omega_t", &self.omega_t, false),
            ("gamma1", &self.gamma1, false),
            ("gamma1_phase", &self.gamma1_phase, false),
            ("gamma2", &self.gamma2, false),
            ("gamma2_phase", &self.gamma2_phase, false),
            ("time", &self.time, false),
            ("alpha", &self.alpha, false),
            ("z", &self.z, false),
            ("eta", &self.eta, false),
            ("n2", &self.n2, false),
            ("n3", &self.n3, false),
            ("f3", &self.f3, false),
            ("cutoff", &self.cutoff, false),
            ("max_tail", &self.max_tail, false),
            ("samples", &self.samples, false),
            ("seed", &self.seed, false),
            ("c1", &self.c1, false),
            ("c2", &self.c2, false),
            ("e1", &self.e1, true),
            ("e4", &self.e4, true),
            ("length", &self.length, false),
            ("omega_ratio", &self.omega_ratio, false),
            ("from", &self.from, true),
            ("to", &self.to, true),
            ("steps", &self.steps, false),
            ("data", &self.data, false),
            ("out", &self.out, false),
            ("format", &self.format, false),
            ("dump", &self.dump, false),
        ];
        for (key, value, is_energy) in fields {
            if let Some(v) = value {
                out.push(Entry::flag(key, if is_energy { energy(v) } else { v.clone() }));
            }
        }
        if self.symmetric {
            out.push(Entry::flag("symmetric", "true"));
        }
        for s in &self.set {
            match s.split_once('=') {
                Some((k, v)) if !k.is_empty() => out.push(Entry::flag(k, v)),
                _ => return Err(ConfigError::single(None, format!("--set expects KEY=VALUE, got {s:?}"))),
            }
        }
        Ok(out)
    }

    /// File entries overlaid with flags, validated.
    pub fn resolve(&self) -> Result<RunConfig, ConfigError> {
        let base = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| ConfigError::single(Some("config"), format!("cannot read {}: {e}", path.display())))?;
                parse_entries(&text)?
            }
            None => Vec::new(),
        };
        RunConfig::from_entries(&overlay(base, self.entries()?)?)
    }
}

/// Where a report goes: `out`, else the environment directory, else stdout.
pub fn destination(report: &Report, cfg: &RunConfig, env_dir: Option<&Path>) -> Option<PathBuf> {
    cfg.out
        .clone()
        .or_else(|| env_dir.map(|d| d.join(format!("{}.{}", report.command.name(), report.format.extension()))))
}

fn execute(cli: &Cli) -> Result<(), RunError> {
    let (cmd, flags) = cli.command.split();
    let cfg = flags.resolve()?;
    let report = run(cmd, &cfg)?;
    let env_dir = std::env::var_os(OUT_DIR_ENV).map(PathBuf::from);
    match destination(&report, &cfg, env_dir.as_deref()) {
        Some(path) => {
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent)?;
            }
            std::fs::write(&path, &report.body)?;
        }
        None => print!("{}", report.body),
    }
    Ok(())
}

/// Parses arguments, runs, and returns the process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{}", e.to_json());
            e.exit_code()
        }
    }
}
