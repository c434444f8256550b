//! Run configuration as whitespace-separated `key=value` text. Flags on the
//! command line are turned into the same entries, so both paths share one
//! validator.

use std::collections::BTreeSet;
use std::fmt;
use std::path::PathBuf;

use num_complex::Complex64;
use serde::Serialize;
use trimode::dynamics::{optimal_symmetric_ratio, symmetric_point};
use trimode::{ClassicalParams, CouplingConfig};

/// Every accepted key, in the order used when echoing a configuration.
pub const KEYS: &[&str] = &[
    "ratio",
    "omega_t",
    "gamma1",
    "gamma1_phase",
    "gamma2",
    "gamma2_phase",
    "time",
    "symmetric",
    "alpha",
    "z",
    "eta",
    "n2",
    "n3",
    "f3",
    "cutoff",
    "max_tail",
    "samples",
    "seed",
    "c1",
    "c2",
    "e1",
    "e4",
    "length",
    "omega_ratio",
    "from",
    "to",
    "steps",
    "data",
    "out",
    "format",
    "dump",
];

const PHYSICAL: &[&str] = &["gamma1", "gamma1_phase", "gamma2", "gamma2_phase", "time"];

/// Text listing the defaults, shown by `--help`.
pub const DEFAULTS_HELP: &str = "\
Defaults (an empty configuration):
  ratio        0.5857864 (= sqrt(6 - sqrt(32)), where N2 = N3 = 1/2)
  omega_t      symmetric point of `ratio` (1.3621...)
  alpha        none (vacuum input)
  z            0,0
  eta          0.5
  n2, n3       populations of the coupling configuration
  cutoff       automatic
  max_tail     0.01
  samples      100000
  seed         1
  c1, c2       83000, 260000 (1/(J m^2))
  e1, e4       24mJ, 158mJ
  length       4mm
  omega_ratio  1064/355
  from, to     0J, 0.1J
  steps        101
  format       json for single reports, csv for sweeps

Keys accept units where they carry dimension: energies J, mJ, uJ; lengths
m, mm, um. Complex values are written re,im. Lists are comma separated.
Physical couplings (gamma1, gamma2 as magnitude with *_phase, and time) may
replace ratio and omega_t; reports always echo the reduced pair.

Environment:
  TRIMODE_OUT_DIR  directory for reports when --out is not given

Exit codes: 0 success, 1 report could not be written, 2 configuration or
input error, 3 numerical contract violation.";

/// One `key=value` pair and where it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub key: String,
    pub value: String,
    /// 1-based line in the configuration text; `None` for flags.
    pub line: Option<usize>,
}

impl Entry {
    pub fn flag(key: &str, value: impl Into<String>) -> Self {
        Self {
            key: key.to_string(),
            value: value.into(),
            line: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub key: Option<String>,
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(line) = self.line {
            write!(f, "line {line}: ")?;
        }
        if let Some(key) = &self.key {
            write!(f, "{key}: ")?;
        }
        f.write_str(&self.message)
    }
}

/// Every problem found in a configuration.
#[derive(Debug, Clone, PartialEq, Serialize, thiserror::Error)]
#[error("{}", self.violations.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
pub struct ConfigError {
    pub violations: Vec<Violation>,
}

impl ConfigError {
    pub fn single(key: Option<&str>, message: impl Into<String>) -> Self {
        Self {
            violations: vec![Violation {
                key: key.map(str::to_string),
                line: None,
                message: message.into(),
            }],
        }
    }

    /// True when some violation names `key`.
    pub fn mentions(&self, key: &str) -> bool {
        self.violations.iter().any(|v| v.key.as_deref() == Some(key))
    }
}

/// Coupling input after canonicalization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Couplings {
    /// `|γ₁/γ₂|` and the reduced angle.
    Reduced { ratio: f64, omega_t: f64 },
    /// `|γ₁| = |γ₂| = gamma`, which the reduced pair cannot express.
    Degenerate { gamma: f64, time: f64 },
}

impl Couplings {
    pub fn config(&self) -> Result<CouplingConfig<f64>, trimode::Error> {
        match *self {
            Couplings::Reduced { ratio, omega_t } => CouplingConfig::from_reduced(ratio, omega_t),
            Couplings::Degenerate { gamma, time } => {
                CouplingConfig::new(Complex64::new(gamma, 0.0), Complex64::new(gamma, 0.0), time)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
        }
    }
}

/// Pump-energy grid for the classical sweep, in joules.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRange {
    pub from: f64,
    pub to: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub couplings: Couplings,
    pub alpha: Option<Complex64>,
    pub z: Complex64,
    pub eta: Vec<f64>,
    /// Explicit `(N₂, N₃)` lists for the twin-beam grid.
    pub populations: Option<(Vec<f64>, Vec<f64>)>,
    pub f3: Option<f64>,
    pub cutoff: Option<usize>,
    pub max_tail: f64,
    pub samples: usize,
    pub seed: u64,
    pub classical: ClassicalParams<f64>,
    pub sweep: SweepRange,
    pub data: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub dump: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let sp = symmetric_point(optimal_symmetric_ratio::<f64>()).expect("ratio below 1");
        Self {
            couplings: Couplings::Reduced {
                ratio: sp.ratio,
                omega_t: sp.omega_t,
            },
            alpha: None,
            z: Complex64::new(0.0, 0.0),
            eta: vec![0.5],
            populations: None,
            f3: None,
            cutoff: None,
            max_tail: trimode::fock::DEFAULT_MAX_TAIL,
            samples: 100_000,
            seed: 1,
            classical: ClassicalParams::default(),
            sweep: SweepRange {
                from: 0.0,
                to: 0.1,
                steps: 101,
            },
            data: None,
            out: None,
            format: None,
            dump: None,
        }
    }
}

/// Parses and validates configuration text.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    RunConfig::from_entries(&parse_entries(text)?)
}

/// Splits text into entries. `#` starts a comment. Duplicates are left for
/// [`RunConfig::from_entries`] to report alongside every other violation.
pub fn parse_entries(text: &str) -> Result<Vec<Entry>, ConfigError> {
    let mut entries = Vec::new();
    let mut violations = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("");
        for token in line.split_whitespace() {
            match token.split_once('=') {
                Some((k, v)) if !k.is_empty() => entries.push(Entry {
                    key: k.to_string(),
                    value: v.to_string(),
                    line: Some(i + 1),
                }),
                _ => violations.push(Violation {
                    key: None,
                    line: Some(i + 1),
                    message: format!("expected key=value, got {token:?}"),
                }),
            }
        }
    }
    if violations.is_empty() {
        Ok(entries)
    } else {
        Err(ConfigError { violations })
    }
}

fn duplicates(entries: &[Entry]) -> Vec<Violation> {
    let mut seen = BTreeSet::new();
    entries
        .iter()
        .filter(|e| !seen.insert(e.key.as_str()))
        .map(|e| Violation {
            key: Some(e.key.clone()),
            line: e.line,
            message: "duplicate key".into(),
        })
        .collect()
}

/// Applies flag entries over file entries: a flag replaces the file entry
/// with the same key. Repeated flags are duplicates.
pub fn overlay(base: Vec<Entry>, flags: Vec<Entry>) -> Result<Vec<Entry>, ConfigError> {
    let dups = duplicates(&flags);
    if !dups.is_empty() {
        return Err(ConfigError { violations: dups });
    }
    let mut out: Vec<Entry> = base
        .into_iter()
        .filter(|e| !flags.iter().any(|f| f.key == e.key))
        .collect();
    out.extend(flags);
    Ok(out)
}

#[derive(Clone, Copy)]
enum Dim {
    None,
    Energy,
    Length,
}

const UNITS: &[(&str, f64, &str)] = &[
    ("J", 1.0, "energy"),
    ("mJ", 1e-3, "energy"),
    ("uJ", 1e-6, "energy"),
    ("m", 1.0, "length"),
    ("mm", 1e-3, "length"),
    ("um", 1e-6, "length"),
];

fn number(s: &str, dim: Dim) -> Result<f64, String> {
    let split = s.trim_end_matches(|c: char| c.is_ascii_alphabetic()).len();
    let (num, unit) = if split == 0 { (s, "") } else { s.split_at(split) };
    let scale = if unit.is_empty() {
        1.0
    } else {
        let (_, scale, kind) = UNITS
            .iter()
            .find(|(u, _, _)| *u == unit)
            .ok_or_else(|| format!("unknown unit {unit:?}"))?;
        let want = match dim {
            Dim::None => return Err(format!("unit mismatch: dimensionless value, got {unit}")),
            Dim::Energy => "energy",
            Dim::Length => "length",
        };
        if *kind != want {
            return Err(format!("unit mismatch: expected {want}, got {unit} ({kind})"));
        }
        *scale
    };
    let v: f64 = num.parse().map_err(|_| format!("not a number: {s:?}"))?;
    if !v.is_finite() {
        return Err(format!("not finite: {s:?}"));
    }
    Ok(v * scale)
}

fn require(v: f64, ok: bool, expected: &str) -> Result<f64, String> {
    if ok {
        Ok(v)
    } else {
        Err(format!("{v} out of range: expected {expected}"))
    }
}

fn positive(s: &str, dim: Dim) -> Result<f64, String> {
    let v = number(s, dim)?;
    require(v, v > 0.0, "> 0")
}

fn non_negative(s: &str, dim: Dim) -> Result<f64, String> {
    let v = number(s, dim)?;
    require(v, v >= 0.0, ">= 0")
}

fn list(s: &str, each: impl Fn(&str) -> Result<f64, String>) -> Result<Vec<f64>, String> {
    s.split(',').map(|p| each(p.trim())).collect()
}

fn complex(s: &str) -> Result<Complex64, String> {
    match s.split_once(',') {
        Some((re, im)) => Ok(Complex64::new(
            number(re.trim(), Dim::None)?,
            number(im.trim(), Dim::None)?,
        )),
        None => Ok(Complex64::new(number(s, Dim::None)?, 0.0)),
    }
}

fn integer<T: std::str::FromStr>(s: &str) -> Result<T, String> {
    s.parse().map_err(|_| format!("not an integer: {s:?}"))
}

fn bounded(s: &str, lo: usize, hi: usize) -> Result<usize, String> {
    let v: usize = integer(s)?;
    if (lo..=hi).contains(&v) {
        Ok(v)
    } else {
        Err(format!("{v} out of range: expected {lo}..={hi}"))
    }
}

fn path(s: &str) -> Result<PathBuf, String> {
    if s.is_empty() || s.contains(|c: char| c.is_whitespace() || c == '#') {
        Err(format!("path must be non-empty without whitespace or '#': {s:?}"))
    } else {
        Ok(PathBuf::from(s))
    }
}

/// Raw values collected before cross-field checks.
#[derive(Default)]
struct Draft {
    ratio: Option<f64>,
    omega_t: Option<f64>,
    gamma1: Option<f64>,
    gamma1_phase: Option<f64>,
    gamma2: Option<f64>,
    gamma2_phase: Option<f64>,
    time: Option<f64>,
    symmetric: Option<bool>,
    n2: Option<Vec<f64>>,
    n3: Option<Vec<f64>>,
}

impl RunConfig {
    pub fn from_entries(entries: &[Entry]) -> Result<Self, ConfigError> {
        let mut cfg = RunConfig::default();
        let mut d = Draft::default();
        let mut violations = duplicates(entries);
        for e in entries {
            let v = e.value.as_str();
            let r: Result<(), String> = (|| {
                match e.key.as_str() {
                    "ratio" => {
                        let r = positive(v, Dim::None)?;
                        if r == 1.0 {
                            return Err("ratio = 1 is degenerate; give gamma1, gamma2 and time instead".into());
                        }
                        d.ratio = Some(r);
                    }
                    "omega_t" => d.omega_t = Some(non_negative(v, Dim::None)?),
                    "gamma1" => d.gamma1 = Some(non_negative(v, Dim::None)?),
                    "gamma2" => d.gamma2 = Some(non_negative(v, Dim::None)?),
                    "gamma1_phase" => d.gamma1_phase = Some(number(v, Dim::None)?),
                    "gamma2_phase" => d.gamma2_phase = Some(number(v, Dim::None)?),
                    "time" => d.time = Some(non_negative(v, Dim::None)?),
                    "symmetric" => {
                        d.symmetric = Some(v.parse().map_err(|_| format!("expected true or false, got {v:?}"))?)
                    }
                    "alpha" => cfg.alpha = Some(complex(v)?),
                    "z" => cfg.z = complex(v)?,
                    "eta" => {
                        cfg.eta = list(v, |p| {
                            let x = number(p, Dim::None)?;
                            require(x, (0.0..=1.0).contains(&x), "within [0, 1]")
                        })?
                    }
                    "n2" => d.n2 = Some(list(v, |p| non_negative(p, Dim::None))?),
                    "n3" => d.n3 = Some(list(v, |p| non_negative(p, Dim::None))?),
                    "f3" => {
                        let x = number(v, Dim::None)?;
                        cfg.f3 = Some(require(x, (0.5..=2.0 / 3.0).contains(&x), "within [1/2, 2/3]")?);
                    }
                    "cutoff" => cfg.cutoff = Some(bounded(v, 1, 400)?),
                    "max_tail" => {
                        let x = number(v, Dim::None)?;
                        cfg.max_tail = require(x, x > 0.0 && x <= 1.0, "within (0, 1]")?;
                    }
                    "samples" => cfg.samples = bounded(v, 1000, 1_000_000_000)?,
                    "seed" => cfg.seed = integer(v)?,
                    "c1" => cfg.classical.c1 = positive(v, Dim::None)?,
                    "c2" => cfg.classical.c2 = positive(v, Dim::None)?,
                    "e1" => cfg.classical.e1 = positive(v, Dim::Energy)?,
                    "e4" => cfg.classical.e4 = positive(v, Dim::Energy)?,
                    "length" => cfg.classical.z = positive(v, Dim::Length)?,
                    "omega_ratio" => cfg.classical.omega_ratio = positive(v, Dim::None)?,
                    "from" => cfg.sweep.from = non_negative(v, Dim::Energy)?,
                    "to" => cfg.sweep.to = non_negative(v, Dim::Energy)?,
                    "steps" => cfg.sweep.steps = bounded(v, 1, 10_000_000)?,
                    "data" => cfg.data = Some(path(v)?),
                    "out" => cfg.out = Some(path(v)?),
                    "dump" => cfg.dump = Some(path(v)?),
                    "format" => {
                        cfg.format = Some(match v {
                            "json" => Format::Json,
                            "csv" => Format::Csv,
                            _ => return Err(format!("expected json or csv, got {v:?}")),
                        })
                    }
                    _ => return Err("unknown key".into()),
                }
                Ok(())
            })();
            if let Err(message) = r {
                violations.push(Violation {
                    key: Some(e.key.clone()),
                    line: e.line,
                    message,
                });
            }
        }
        let mut cross = |key: &str, message: String| {
            violations.push(Violation {
                key: Some(key.to_string()),
                line: None,
                message,
            })
        };
        match resolve_couplings(&d, entries) {
            Ok(Some(c)) => cfg.couplings = c,
            Ok(None) => {}
            Err((key, message)) => cross(key, message),
        }
        match (d.n2, d.n3) {
            (Some(a), Some(b)) => cfg.populations = Some((a, b)),
            (None, None) => {}
            (Some(_), None) => cross("n3", "n2 and n3 must be given together".into()),
            (None, Some(_)) => cross("n2", "n2 and n3 must be given together".into()),
        }
        if cfg.sweep.from > cfg.sweep.to {
            cross(
                "from",
                format!("from = {} exceeds to = {}", cfg.sweep.from, cfg.sweep.to),
            );
        }
        if violations.is_empty() {
            Ok(cfg)
        } else {
            Err(ConfigError { violations })
        }
    }

    /// Canonical text; parsing it gives back an equal configuration.
    pub fn to_text(&self) -> String {
        let f = |x: f64| format!("{x:?}");
        let c = |z: Complex64| format!("{:?},{:?}", z.re, z.im);
        let l = |v: &[f64]| v.iter().map(|x| f(*x)).collect::<Vec<_>>().join(",");
        let mut parts: Vec<(&str, String)> = Vec::new();
        match self.couplings {
            Couplings::Reduced { ratio, omega_t } => {
                parts.push(("ratio", f(ratio)));
                parts.push(("omega_t", f(omega_t)));
            }
            Couplings::Degenerate { gamma, time } => {
                parts.push(("gamma1", f(gamma)));
                parts.push(("gamma2", f(gamma)));
                parts.push(("time", f(time)));
            }
        }
        if let Some(a) = self.alpha {
            parts.push(("alpha", c(a)));
        }
        parts.push(("z", c(self.z)));
        parts.push(("eta", l(&self.eta)));
        if let Some((n2, n3)) = &self.populations {
            parts.push(("n2", l(n2)));
            parts.push(("n3", l(n3)));
        }
        if let Some(x) = self.f3 {
            parts.push(("f3", f(x)));
        }
        if let Some(k) = self.cutoff {
            parts.push(("cutoff", k.to_string()));
        }
        parts.push(("max_tail", f(self.max_tail)));
        parts.push(("samples", self.samples.to_string()));
        parts.push(("seed", self.seed.to_string()));
        let p = &self.classical;
        parts.push(("c1", f(p.c1)));
        parts.push(("c2", f(p.c2)));
        parts.push(("e1", f(p.e1)));
        parts.push(("e4", f(p.e4)));
        parts.push(("length", f(p.z)));
        parts.push(("omega_ratio", f(p.omega_ratio)));
        parts.push(("from", f(self.sweep.from)));
        parts.push(("to", f(self.sweep.to)));
        parts.push(("steps", self.sweep.steps.to_string()));
        for (key, p) in [("data", &self.data), ("out", &self.out), ("dump", &self.dump)] {
            if let Some(p) = p {
                parts.push((key, p.display().to_string()));
            }
        }
        if let Some(fmt) = self.format {
            parts.push(("format", fmt.extension().to_string()));
        }
        parts
            .into_iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// `(N₂, N₃)` pairs for the twin-beam grid.
    pub fn population_pairs(&self) -> Result<Vec<(f64, f64)>, trimode::Error> {
        match &self.populations {
            Some((n2, n3)) => Ok(n2.iter().flat_map(|&a| n3.iter().map(move |&b| (a, b))).collect()),
            None => {
                let p = trimode::dynamics::mode_populations(&self.couplings.config()?);
                Ok(vec![(p.n2, p.n3)])
            }
        }
    }
}

fn resolve_couplings(d: &Draft, entries: &[Entry]) -> Result<Option<Couplings>, (&'static str, String)> {
    let physical = entries.iter().any(|e| PHYSICAL.contains(&e.key.as_str()));
    if physical {
        if let Some(key) = ["ratio", "omega_t", "symmetric"]
            .into_iter()
            .find(|k| entries.iter().any(|e| e.key == *k))
        {
            return Err((key, "cannot be combined with physical couplings".into()));
        }
        let (Some(g1), Some(g2), Some(t)) = (d.gamma1, d.gamma2, d.time) else {
            let missing = ["gamma1", "gamma2", "time"]
                .into_iter()
                .find(|k| !entries.iter().any(|e| e.key == *k))
                .unwrap_or("gamma1");
            // Present but invalid values are already reported.
            return if entries.iter().any(|e| e.key == missing) {
                Ok(None)
            } else {
                Err((missing, "required with physical couplings".into()))
            };
        };
        if g2 == 0.0 {
            return Err(("gamma2", "must be > 0; the reduced ratio is undefined otherwise".into()));
        }
        if g1 == g2 {
            return Ok(Some(Couplings::Degenerate { gamma: g1, time: t }));
        }
        let cfg = CouplingConfig::new(
            Complex64::from_polar(g1, d.gamma1_phase.unwrap_or(0.0)),
            Complex64::from_polar(g2, d.gamma2_phase.unwrap_or(0.0)),
            t,
        )
        .map_err(|e| ("gamma1", e.to_string()))?;
        return Ok(Some(Couplings::Reduced {
            ratio: cfg.ratio(),
            omega_t: cfg.reduced_angle(),
        }));
    }
    let given_ratio = entries.iter().any(|e| e.key == "ratio");
    if given_ratio && d.ratio.is_none() {
        return Ok(None);
    }
    let ratio = d.ratio.unwrap_or_else(optimal_symmetric_ratio);
    let symmetric = d.symmetric.unwrap_or(false);
    match d.omega_t {
        Some(_) if symmetric => Err(("symmetric", "cannot be combined with omega_t".into())),
        Some(omega_t) => Ok(Some(Couplings::Reduced { ratio, omega_t })),
        None if entries.iter().any(|e| e.key == "omega_t") => Ok(None),
        None => match symmetric_point(ratio) {
            Some(sp) => Ok(Some(Couplings::Reduced {
                ratio,
                omega_t: sp.omega_t,
            })),
            None => Err((
                "omega_t",
                format!("required for ratio {ratio} > 1, which has no symmetric point"),
            )),
        },
    }
}
