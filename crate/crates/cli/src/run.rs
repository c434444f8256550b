//! Subcommands: each turns a [`RunConfig`] into a JSON or CSV report.

use std::io::Write;
use std::time::{SystemTime, UNIX_EPOCH};

use num_complex::Complex64;
use serde::Serialize;
use trimode::classical::{compare_measurements, linear_grid, sweep};
use trimode::conditional::twb_report;
use trimode::dynamics::{heisenberg_coefficients, mode_populations, seeded_populations};
use trimode::fock::{build_seeded_state, build_vacuum_state, moments, write_dump};
use trimode::gaussian::{covariance_from_coefficients, default_tolerance, ppt_test};
use trimode::telecloning::{analytic_report, asymmetric_frontier, mc_teleclone, FrontierPoint};
use trimode::{CloneReport, Error, ModeCoefficients, Populations, PptReport, Regime, TeleclonePlan, Truncation};

use crate::config::{ConfigError, Format, RunConfig};

/// Largest cutoff for dense (seeded) states, about 28 MB of amplitudes.
pub const MAX_DENSE_CUTOFF: usize = 120;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Dynamics,
    Covariance,
    Ppt,
    State,
    Teleclone,
    TelecloneMc,
    Twb,
    ClassicalSweep,
    ClassicalCompare,
}

impl Command {
    pub const ALL: [Command; 9] = [
        Command::Dynamics,
        Command::Covariance,
        Command::Ppt,
        Command::State,
        Command::Teleclone,
        Command::TelecloneMc,
        Command::Twb,
        Command::ClassicalSweep,
        Command::ClassicalCompare,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Dynamics => "dynamics",
            Command::Covariance => "covariance",
            Command::Ppt => "ppt",
            Command::State => "state",
            Command::Teleclone => "teleclone",
            Command::TelecloneMc => "teleclone-mc",
            Command::Twb => "twb",
            Command::ClassicalSweep => "classical-sweep",
            Command::ClassicalCompare => "classical-compare",
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    /// Bad input data, such as a malformed measurement file.
    #[error("{0}")]
    Input(String),
    /// A computed result failed its own accuracy contract.
    #[error("{0}")]
    Contract(String),
    #[error("writing output: {0}")]
    Output(#[from] std::io::Error),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) | RunError::Input(_) => 2,
            RunError::Contract(_) => 3,
            RunError::Output(_) => 1,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            RunError::Config(_) => "config",
            RunError::Input(_) => "input",
            RunError::Contract(_) => "contract",
            RunError::Output(_) => "output",
        }
    }

    /// Machine-readable form written to stderr.
    pub fn to_json(&self) -> serde_json::Value {
        let violations = match self {
            RunError::Config(e) => serde_json::to_value(&e.violations).unwrap_or_default(),
            _ => serde_json::Value::Array(Vec::new()),
        };
        serde_json::json!({
            "error": {
                "kind": self.kind(),
                "exit_code": self.exit_code(),
                "message": self.to_string(),
                "violations": violations,
            }
        })
    }
}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        match e {
            Error::TailBound { .. } | Error::Domain(_) => RunError::Contract(e.to_string()),
            Error::InvalidConfig(_) | Error::OutOfRange { .. } => {
                RunError::Config(ConfigError::single(None, e.to_string()))
            }
            Error::Parse { .. } | Error::Io(_) => RunError::Input(e.to_string()),
        }
    }
}

/// A rendered report.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub command: Command,
    pub format: Format,
    pub body: String,
}

#[derive(Serialize)]
struct Header {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    generated_unix: u64,
}

#[derive(Serialize)]
struct Envelope<'a, R> {
    header: Header,
    config: String,
    result: &'a R,
}

/// Seconds since the epoch, or `SOURCE_DATE_EPOCH` when set.
fn timestamp() -> u64 {
    std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or_else(|| SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()))
}

fn json<R: Serialize>(cmd: Command, cfg: &RunConfig, result: &R) -> Result<Report, RunError> {
    let env = Envelope {
        header: Header {
            tool: "trimode",
            version: env!("CARGO_PKG_VERSION"),
            command: cmd.name(),
            generated_unix: timestamp(),
        },
        config: cfg.to_text(),
        result,
    };
    let mut body = serde_json::to_string_pretty(&env).map_err(|e| RunError::Input(e.to_string()))?;
    body.push('\n');
    Ok(Report {
        command: cmd,
        format: Format::Json,
        body,
    })
}

/// CSV with two comment lines: the command and the echoed configuration.
fn csv<R: Serialize>(cmd: Command, cfg: &RunConfig, rows: &[R]) -> Result<Report, RunError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| RunError::Input(e.to_string()))?;
    }
    let data = w.into_inner().map_err(|e| RunError::Input(e.to_string()))?;
    let body = format!(
        "# trimode {} {}\n# config: {}\n{}",
        cmd.name(),
        env!("CARGO_PKG_VERSION"),
        cfg.to_text(),
        String::from_utf8_lossy(&data)
    );
    Ok(Report {
        command: cmd,
        format: Format::Csv,
        body,
    })
}

fn table<R: Serialize>(cmd: Command, cfg: &RunConfig, rows: &[R], default: Format) -> Result<Report, RunError> {
    match cfg.format.unwrap_or(default) {
        Format::Json => json(cmd, cfg, &rows),
        Format::Csv => csv(cmd, cfg, rows),
    }
}

fn single<R: Serialize>(cmd: Command, cfg: &RunConfig, result: &R) -> Result<Report, RunError> {
    match cfg.format {
        Some(Format::Csv) => csv(cmd, cfg, std::slice::from_ref(result)),
        _ => json(cmd, cfg, result),
    }
}

#[derive(Serialize)]
struct Couplings {
    ratio: f64,
    omega_t: f64,
    gamma1: Complex64,
    gamma2: Complex64,
    t: f64,
    regime: Regime,
}

fn couplings(cfg: &RunConfig) -> Result<(trimode::CouplingConfig<f64>, Couplings), RunError> {
    let c = cfg.couplings.config()?;
    let summary = Couplings {
        ratio: c.ratio(),
        omega_t: c.reduced_angle(),
        gamma1: c.gamma1,
        gamma2: c.gamma2,
        t: c.t,
        regime: c.regime(),
    };
    Ok((c, summary))
}

#[derive(Serialize)]
struct DynamicsResult {
    couplings: Couplings,
    coefficients: ModeCoefficients<f64>,
    commutator_residuals: [f64; 6],
    populations: Populations<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    seeded_populations: Option<Populations<f64>>,
}

#[derive(Serialize)]
struct CovarianceResult {
    couplings: Couplings,
    covariance: [[f64; 6]; 6],
    populations: Populations<f64>,
}

#[derive(Serialize)]
struct PptResult {
    couplings: Couplings,
    report: PptReport<f64>,
    entangled_cuts: [bool; 3],
    populations: Populations<f64>,
}

#[derive(Serialize)]
struct StateResult {
    couplings: Couplings,
    cutoff: usize,
    seeded: bool,
    norm_sqr: f64,
    tail_bound: f64,
    moment_bound: f64,
    fock_populations: Populations<f64>,
    analytic_populations: Populations<f64>,
    max_population_error: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    dump: Option<String>,
}

#[derive(Serialize)]
struct TelecloneResult {
    couplings: Couplings,
    plan: TeleclonePlan<f64>,
    report: CloneReport<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    frontier: Option<FrontierPoint<f64>>,
}

#[derive(Serialize)]
struct TelecloneMcResult {
    couplings: Couplings,
    report: CloneReport<f64>,
    analytic_f2: f64,
    analytic_f3: f64,
}

#[derive(Serialize)]
struct TwbRow {
    n2: f64,
    n3: f64,
    eta: f64,
    p0: f64,
    zeta12: f64,
    fid: f64,
    xi_star: f64,
}

#[derive(Serialize)]
struct SweepCsvRow {
    e5_joules: f64,
    e2_joules: f64,
}

#[derive(Serialize)]
struct CompareCsvRow {
    line: usize,
    e5_joules: f64,
    measured_joules: f64,
    predicted_joules: f64,
    residual_joules: f64,
}

/// Runs one subcommand. Side files (the amplitude dump) are written here;
/// the report itself is returned for the caller to place.
pub fn run(cmd: Command, cfg: &RunConfig) -> Result<Report, RunError> {
    match cmd {
        Command::Dynamics => {
            let (c, summary) = couplings(cfg)?;
            let k = heisenberg_coefficients(&c);
            let result = DynamicsResult {
                couplings: summary,
                commutator_residuals: k.commutator_residuals(),
                coefficients: k,
                populations: mode_populations(&c),
                seeded_populations: cfg.alpha.map(|a| seeded_populations(&c, a)),
            };
            json(cmd, cfg, &result)
        }
        Command::Covariance => {
            let (c, summary) = couplings(cfg)?;
            let cov = covariance_from_coefficients(&heisenberg_coefficients(&c));
            let result = CovarianceResult {
                couplings: summary,
                covariance: cov.c,
                populations: mode_populations(&c),
            };
            json(cmd, cfg, &result)
        }
        Command::Ppt => {
            let (c, summary) = couplings(cfg)?;
            let cov = covariance_from_coefficients(&heisenberg_coefficients(&c));
            let report = ppt_test(&cov, default_tolerance(&cov));
            let result = PptResult {
                couplings: summary,
                entangled_cuts: report.entangled_cuts(),
                report,
                populations: mode_populations(&c),
            };
            json(cmd, cfg, &result)
        }
        Command::State => state(cmd, cfg),
        Command::Teleclone => {
            let (c, summary) = couplings(cfg)?;
            let plan = TeleclonePlan::new(&c, cfg.alpha)?;
            let result = TelecloneResult {
                couplings: summary,
                report: analytic_report(cfg.z, &plan)?,
                plan,
                frontier: cfg.f3.map(asymmetric_frontier).transpose()?,
            };
            json(cmd, cfg, &result)
        }
        Command::TelecloneMc => {
            let (c, summary) = couplings(cfg)?;
            let plan = TeleclonePlan::new(&c, cfg.alpha)?;
            let exact = analytic_report(cfg.z, &plan)?;
            let result = TelecloneMcResult {
                couplings: summary,
                report: mc_teleclone(cfg.z, &c, cfg.alpha, cfg.samples, cfg.seed)?,
                analytic_f2: exact.f2,
                analytic_f3: exact.f3,
            };
            json(cmd, cfg, &result)
        }
        Command::Twb => {
            let mut rows = Vec::new();
            for (n2, n3) in cfg.population_pairs()? {
                for &eta in &cfg.eta {
                    let r = twb_report(n2, n3, eta)?;
                    rows.push(TwbRow {
                        n2,
                        n3,
                        eta,
                        p0: r.p0,
                        zeta12: r.zeta12,
                        fid: r.fid,
                        xi_star: r.xi_star,
                    });
                }
            }
            if rows.len() == 1 {
                single(cmd, cfg, &rows[0])
            } else {
                table(cmd, cfg, &rows, Format::Csv)
            }
        }
        Command::ClassicalSweep => {
            let grid = linear_grid(cfg.sweep.from, cfg.sweep.to, cfg.sweep.steps);
            let rows: Vec<SweepCsvRow> = sweep(&grid, &cfg.classical)?
                .into_iter()
                .map(|r| SweepCsvRow {
                    e5_joules: r.e5,
                    e2_joules: r.e2,
                })
                .collect();
            table(cmd, cfg, &rows, Format::Csv)
        }
        Command::ClassicalCompare => {
            let path = cfg
                .data
                .as_ref()
                .ok_or_else(|| ConfigError::single(Some("data"), "required by classical-compare"))?;
            let cmp = compare_measurements(path, &cfg.classical)?;
            match cfg.format.unwrap_or(Format::Json) {
                Format::Json => json(cmd, cfg, &cmp),
                Format::Csv => {
                    let rows: Vec<CompareCsvRow> = cmp
                        .rows
                        .iter()
                        .map(|r| CompareCsvRow {
                            line: r.line,
                            e5_joules: r.e5,
                            measured_joules: r.measured,
                            predicted_joules: r.predicted,
                            residual_joules: r.residual,
                        })
                        .collect();
                    csv(cmd, cfg, &rows)
                }
            }
        }
    }
}

fn state(cmd: Command, cfg: &RunConfig) -> Result<Report, RunError> {
    let (c, summary) = couplings(cfg)?;
    let trunc = match (cfg.cutoff, cfg.alpha) {
        (Some(k), _) => Truncation::new(k),
        (None, Some(a)) => Truncation::auto_seeded(&c, a),
        (None, None) => Truncation::auto_vacuum(&c),
    }
    .max_tail(cfg.max_tail);
    let s = match cfg.alpha {
        Some(a) => {
            if trunc.cutoff > MAX_DENSE_CUTOFF {
                return Err(ConfigError::single(
                    Some("cutoff"),
                    format!("seeded states need cutoff {} > {MAX_DENSE_CUTOFF}", trunc.cutoff),
                )
                .into());
            }
            build_seeded_state(&c, a, trunc)?
        }
        None => build_vacuum_state(&c, trunc)?,
    };
    let analytic = match cfg.alpha {
        Some(a) => seeded_populations(&c, a),
        None => mode_populations(&c),
    };
    let (fock, _) = moments(&s);
    let err = fock
        .as_array()
        .iter()
        .zip(analytic.as_array())
        .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    let allowed = s.moment_bound() + 1e-9 * analytic.n1.max(1.0);
    if err > allowed {
        return Err(RunError::Contract(format!(
            "Fock populations differ from the closed form by {err:.3e}, above the bound {allowed:.3e}"
        )));
    }
    if let Some(path) = &cfg.dump {
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        write_dump(&s, &mut w)?;
        w.flush()?;
    }
    let result = StateResult {
        couplings: summary,
        cutoff: s.cutoff(),
        seeded: cfg.alpha.is_some(),
        norm_sqr: s.norm_sqr(),
        tail_bound: s.tail_bound(),
        moment_bound: s.moment_bound(),
        fock_populations: fock,
        analytic_populations: analytic,
        max_population_error: err,
        dump: cfg.dump.as_ref().map(|p| p.display().to_string()),
    };
    json(cmd, cfg, &result)
}
