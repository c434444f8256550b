//! Conditional generation of a twin beam by on/off photodetection of one mode
//! of the vacuum-evolved three-mode state.
//!
//! The no-click element of an on/off detector with efficiency `η` is
//! `Π₀ = Σₙ (1−η)ⁿ |n⟩⟨n|` on the detected mode. Closed forms below are for
//! detection of mode 3; detecting mode 2 swaps `N₂` and `N₃`.

use num_complex::Complex;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fock::{reduce_weighted, DensityMatrix, Mode, TriFockState};
use crate::scalar::{cpow, lit, Real};

fn check_eta<T: Real>(eta: T) -> Result<()> {
    if eta >= T::zero() && eta <= T::one() {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            name: "eta",
            value: eta.to_f64().unwrap_or(f64::NAN),
            expected: "within [0, 1]",
        })
    }
}

fn check_population<T: Real>(name: &'static str, n: T) -> Result<()> {
    if n >= T::zero() && n.is_finite() {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            name,
            value: n.to_f64().unwrap_or(f64::NAN),
            expected: "finite and >= 0",
        })
    }
}

/// Probability of no click, `1/(1 + ηN₃)`.
pub fn no_click_probability<T: Real>(n3: T, eta: T) -> Result<T> {
    check_population("n3", n3)?;
    check_eta(eta)?;
    Ok(T::one() / (T::one() + eta * n3))
}

/// Photon-number correlation `ζ₁₂` of the conditional state.
pub fn photon_correlation<T: Real>(n2: T, n3: T, eta: T) -> Result<T> {
    check_population("n2", n2)?;
    check_population("n3", n3)?;
    check_eta(eta)?;
    let one = T::one();
    let denom = (one + eta * n3) * (lit::<T>(2.0) * n2 + n3 * (one - eta));
    if denom == T::zero() {
        if n2 == T::zero() && n3 == T::zero() {
            return Err(Error::Domain("photon correlation is undefined for n2 = n3 = 0".into()));
        }
        // n2 = 0 and η = 1: the conditional state is the vacuum, ζ₁₂ → 0.
        return Ok(T::zero());
    }
    Ok(n3 * (one - eta) * (one + n3) / denom)
}

/// Fidelity `⟨ξ|ϱ₀|ξ⟩` with the twin beam `√(1−ξ²) Σ ξⁿ|n,n⟩`.
///
/// With `xi = None` the maximizing `ξ* = √(N₂/(1+N₁))` is used, which gives
/// `(1 + ηN₃)/(1 + N₃)`. Returns `(fidelity, ξ*)`.
pub fn twb_fidelity<T: Real>(n2: T, n3: T, eta: T, xi: Option<T>) -> Result<(T, T)> {
    check_population("n2", n2)?;
    check_population("n3", n3)?;
    check_eta(eta)?;
    let one = T::one();
    let n1 = n2 + n3;
    let kappa = (n2 / (one + n1)).sqrt();
    match xi {
        None => Ok(((one + eta * n3) / (one + n3), kappa)),
        Some(x) if x.abs() < one => {
            let d = one - x * kappa;
            let fid = (one + eta * n3) / (one + n1) * (one - x * x) / (d * d);
            Ok((fid, kappa))
        }
        Some(x) => Err(Error::OutOfRange {
            name: "xi",
            value: x.to_f64().unwrap_or(f64::NAN),
            expected: "|xi| < 1",
        }),
    }
}

/// Summary of the conditional twin-beam generation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TwbReport<T> {
    pub p0: T,
    pub zeta12: T,
    pub fid: T,
    pub xi_star: T,
    pub eta: T,
}

pub fn twb_report<T: Real>(n2: T, n3: T, eta: T) -> Result<TwbReport<T>> {
    let (fid, xi_star) = twb_fidelity(n2, n3, eta, None)?;
    Ok(TwbReport {
        p0: no_click_probability(n3, eta)?,
        zeta12: photon_correlation(n2, n3, eta)?,
        fid,
        xi_star,
        eta,
    })
}

/// Normalized post-measurement state of the two undetected modes.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalState<T> {
    pub rho: DensityMatrix<T>,
    /// Probability of the no-click outcome within the truncation.
    pub p0: T,
}

/// Conditional state of modes 1 and 2 after no click on mode 3.
pub fn conditional_density<T: Real>(state: &TriFockState<T>, eta: T) -> Result<ConditionalState<T>> {
    conditional_density_on(state, Mode::Three, eta)
}

/// Conditional state of the two remaining modes (in ascending order) after no
/// click on `detected`.
pub fn conditional_density_on<T: Real>(state: &TriFockState<T>, detected: Mode, eta: T) -> Result<ConditionalState<T>> {
    check_eta(eta)?;
    let keep: Vec<Mode> = Mode::ALL.into_iter().filter(|&m| m != detected).collect();
    let d = detected.index();
    let loss = T::one() - eta;
    let mut rho = reduce_weighted(state, &keep, |n| loss.powi(n[d] as i32));
    let p0 = rho.trace();
    if p0 <= T::zero() {
        return Err(Error::Domain("no-click probability vanishes".into()));
    }
    rho.scale(T::one() / p0);
    Ok(ConditionalState { rho, p0 })
}

/// `ζ₁₂` evaluated from the diagonal of a two-mode density matrix:
/// `(⟨(n₁−n₂)²⟩ − (⟨n₁⟩−⟨n₂⟩)²)/(⟨n₁⟩+⟨n₂⟩)`.
pub fn density_photon_correlation<T: Real>(rho: &DensityMatrix<T>) -> Result<T> {
    if rho.modes() != 2 {
        return Err(Error::Domain("photon correlation needs a two-mode state".into()));
    }
    let tr = rho.trace();
    let n = |j: usize| rho.expect_diagonal(|d| lit(d[j] as f64)) / tr;
    let (n1, n2) = (n(0), n(1));
    let diff_sq = rho.expect_diagonal(|d| {
        let x = d[0] as f64 - d[1] as f64;
        lit(x * x)
    }) / tr;
    let denom = n1 + n2;
    if denom == T::zero() {
        return Err(Error::Domain(
            "photon correlation is undefined for an empty state".into(),
        ));
    }
    Ok((diff_sq - (n1 - n2) * (n1 - n2)) / denom)
}

/// `⟨ξ|ρ|ξ⟩` for the twin beam `√(1−|ξ|²) Σ ξⁿ|n,n⟩`, truncated to the
/// density matrix's levels.
pub fn twb_overlap<T: Real>(rho: &DensityMatrix<T>, xi: Complex<T>) -> Result<T> {
    if rho.modes() != 2 {
        return Err(Error::Domain("twin-beam overlap needs a two-mode state".into()));
    }
    if xi.norm() >= T::one() {
        return Err(Error::OutOfRange {
            name: "xi",
            value: xi.norm().to_f64().unwrap_or(f64::NAN),
            expected: "|xi| < 1",
        });
    }
    let norm = (T::one() - xi.norm_sqr()).sqrt();
    let psi: Vec<(usize, Complex<T>)> = (0..rho.side())
        .map(|n| (rho.index(&[n, n]), cpow(xi, n) * norm))
        .collect();
    Ok(rho.overlap(&psi).re)
}
