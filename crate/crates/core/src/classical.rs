//! Classical energy-transfer model of the seeded crystal: output energy of
//! mode 2 as a function of the pump energy `E₅`, and comparison with measured
//! data.
//!
//! `E₂ = (ω₂/ω₁)·c₁E₄·c₂E₅·[(cos(√D z) − 1)/D]²·E₁` with `D = c₂E₅ − c₁E₄`.
//! The bracket is evaluated as `z²·V(Dz²)` with `V(y) = (1 − cos√y)/y`, which
//! is smooth through `D = 0` and turns into the `cosh` form for `D < 0`.

use std::io::Read;
use std::path::Path;

use serde::Serialize;

use crate::dynamics::versine_kernel;
use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

/// Parameters of the classical model; energies in joules, lengths in metres.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassicalParams<T> {
    /// Coupling of the seed interaction, 1/(J·m²).
    pub c1: T,
    /// Coupling of the pump interaction, 1/(J·m²).
    pub c2: T,
    /// Seed energy.
    pub e1: T,
    /// Energy of the first pump.
    pub e4: T,
    /// Interaction length.
    pub z: T,
    /// `ω₂/ω₁`.
    pub omega_ratio: T,
}

impl<T: Real> Default for ClassicalParams<T> {
    fn default() -> Self {
        Self {
            c1: lit(8.3e4),
            c2: lit(2.6e5),
            e1: lit(0.024),
            e4: lit(0.158),
            z: lit(0.004),
            omega_ratio: lit(1064.0 / 355.0),
        }
    }
}

impl<T: Real> ClassicalParams<T> {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("c1", self.c1),
            ("c2", self.c2),
            ("e1", self.e1),
            ("e4", self.e4),
            ("z", self.z),
            ("omega_ratio", self.omega_ratio),
        ];
        for (name, v) in fields {
            if !(v > T::zero() && v.is_finite()) {
                return Err(Error::OutOfRange {
                    name,
                    value: v.to_f64().unwrap_or(f64::NAN),
                    expected: "finite and > 0",
                });
            }
        }
        Ok(())
    }

    /// Pump energy at which `c₂E₅ = c₁E₄`.
    pub fn threshold(&self) -> T {
        self.c1 * self.e4 / self.c2
    }
}

/// Predicted output energy `E₂` for pump energy `e5`.
pub fn output_energy<T: Real>(e5: T, p: &ClassicalParams<T>) -> Result<T> {
    p.validate()?;
    if !(e5 >= T::zero() && e5.is_finite()) {
        return Err(Error::OutOfRange {
            name: "e5",
            value: e5.to_f64().unwrap_or(f64::NAN),
            expected: "finite and >= 0",
        });
    }
    let a = p.c1 * p.e4;
    let b = p.c2 * e5;
    let z2 = p.z * p.z;
    let bracket = z2 * versine_kernel((b - a) * z2);
    Ok(p.omega_ratio * a * b * bracket * bracket * p.e1)
}

/// One point of a sweep or comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow<T> {
    pub e5: T,
    pub e2: T,
}

/// `output_energy` at every grid point.
pub fn sweep<T: Real>(grid: &[T], p: &ClassicalParams<T>) -> Result<Vec<SweepRow<T>>> {
    grid.iter()
        .map(|&e5| {
            Ok(SweepRow {
                e5,
                e2: output_energy(e5, p)?,
            })
        })
        .collect()
}

/// Evenly spaced grid with `steps` points from `from` to `to` inclusive.
pub fn linear_grid<T: Real>(from: T, to: T, steps: usize) -> Vec<T> {
    match steps {
        0 => Vec::new(),
        1 => vec![from],
        _ => {
            let h = (to - from) / lit((steps - 1) as f64);
            (0..steps).map(|i| from + h * lit(i as f64)).collect()
        }
    }
}

/// Measured point with its prediction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComparedRow<T> {
    pub line: usize,
    pub e5: T,
    pub measured: T,
    pub predicted: T,
    pub residual: T,
}

/// Residuals of measured data against the model.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison<T> {
    pub rows: Vec<ComparedRow<T>>,
    pub max_abs: T,
    pub rms: T,
}

/// Reads a CSV with header `e5_joules,e2_joules` and compares each row with
/// the model. Lines starting with `#` are skipped. Errors carry the 1-based
/// line number of the offending row.
pub fn compare_measurements<T: Real>(path: impl AsRef<Path>, p: &ClassicalParams<T>) -> Result<Comparison<T>> {
    let file = std::fs::File::open(path)?;
    compare_reader(file, p)
}

pub fn compare_reader<T: Real, R: Read>(reader: R, p: &ClassicalParams<T>) -> Result<Comparison<T>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader);
    let header = rdr.headers().map_err(|e| csv_error(e, 1))?.clone();
    let col = |name: &str| {
        header.iter().position(|h| h == name).ok_or_else(|| Error::Parse {
            line: 1,
            message: format!("missing column {name}"),
        })
    };
    let (i5, i2) = (col("e5_joules")?, col("e2_joules")?);
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |pos| pos.line() as usize);
            csv_error(e, line)
        })?;
        let line = rec.position().map_or(0, |pos| pos.line() as usize);
        let field = |i: usize, name: &str| -> Result<T> {
            let s = rec.get(i).unwrap_or("");
            let v: f64 = s.parse().map_err(|_| Error::Parse {
                line,
                message: format!("{name}: not a number: {s:?}"),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    line,
                    message: format!("{name}: not finite"),
                });
            }
            Ok(lit(v))
        };
        let e5 = field(i5, "e5_joules")?;
        let measured = field(i2, "e2_joules")?;
        let predicted = output_energy(e5, p).map_err(|e| Error::Parse {
            line,
            message: e.to_string(),
        })?;
        rows.push(ComparedRow {
            line,
            e5,
            measured,
            predicted,
            residual: measured - predicted,
        });
    }
    if rows.is_empty() {
        return Err(Error::Parse {
            line: 1,
            message: "no data rows".into(),
        });
    }
    let max_abs = rows.iter().fold(T::zero(), |m, r| m.max(r.residual.abs()));
    let ss: T = rows.iter().map(|r| r.residual * r.residual).sum();
    let rms = (ss / lit(rows.len() as f64)).sqrt();
    Ok(Comparison { rows, max_abs, rms })
}

fn csv_error(e: csv::Error, line: usize) -> Error {
    Error::Parse {
        line,
        message: e.to_string(),
    }
}
