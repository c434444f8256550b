//! Closed-form Heisenberg evolution under
//! `H = γ₁ a₁†a₃† + γ₂ a₂†a₃ + h.c.`
//!
//! The operator vector `(a₁†, a₂, a₃)` evolves linearly, `v(t) = exp(M t) v(0)`,
//! and because `M³ = −Ω² M` with `Ω² = |γ₂|² − |γ₁|²` the propagator is
//! `I + M sin(Ωt)/Ω + M² (1 − cos Ωt)/Ω²`. Both scalar kernels are evaluated
//! as real functions of `Ω²t²`, which covers the trigonometric (`Ω² > 0`),
//! hyperbolic (`Ω² < 0`) and degenerate (`Ω² = 0`) regimes without complex
//! intermediates.
//!
//! The printed coefficient table this model is usually quoted with has the
//! `M²` contribution to `f₁, f₂, g₁, g₂` with the opposite sign, which breaks
//! `f₁(0) = g₂(0) = 1`. The coefficients here follow the propagator directly.

use num_complex::Complex;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::{lit, real, times_i, Real};

/// Below this value of `|Ω²t²|` the kernels switch to their Taylor series.
const SERIES_THRESHOLD: f64 = 1e-8;

/// Physical input: the two complex couplings (inverse time) and the
/// interaction time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CouplingConfig<T> {
    pub gamma1: Complex<T>,
    pub gamma2: Complex<T>,
    pub t: T,
}

/// Which closed form the propagator takes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// `|γ₂| > |γ₁|`, oscillating solutions.
    Trigonometric,
    /// `|γ₂| < |γ₁|`, exponentially growing solutions.
    Hyperbolic,
    /// `|γ₂| = |γ₁|`, polynomial growth.
    Degenerate,
}

impl<T: Real> CouplingConfig<T> {
    pub fn new(gamma1: Complex<T>, gamma2: Complex<T>, t: T) -> Result<Self> {
        let cfg = Self { gamma1, gamma2, t };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Builds a configuration from the reduced parameters `|γ₁/γ₂|` and the
    /// dimensionless angle `|Ω| t`, with `γ₂ = 1` and both couplings real.
    ///
    /// In the hyperbolic regime (`ratio > 1`) the angle is `|Γ| t` with
    /// `Γ² = |γ₁|² − |γ₂|²`. The degenerate ratio `1` carries no angle and is
    /// rejected; use physical couplings there.
    pub fn from_reduced(ratio: T, omega_t: T) -> Result<Self> {
        if !ratio.is_finite() || ratio <= T::zero() {
            return Err(Error::InvalidConfig(format!(
                "ratio must be positive and finite, got {ratio}"
            )));
        }
        if !omega_t.is_finite() || omega_t < T::zero() {
            return Err(Error::InvalidConfig(format!(
                "omega_t must be non-negative and finite, got {omega_t}"
            )));
        }
        let gap = (T::one() - ratio * ratio).abs();
        if gap == T::zero() {
            return Err(Error::InvalidConfig(
                "ratio = 1 is the degenerate regime; the reduced angle is undefined there".into(),
            ));
        }
        let t = omega_t / gap.sqrt();
        Self::new(real(ratio), real(T::one()), t)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = self.gamma1.re.is_finite()
            && self.gamma1.im.is_finite()
            && self.gamma2.re.is_finite()
            && self.gamma2.im.is_finite()
            && self.t.is_finite();
        if !finite {
            return Err(Error::InvalidConfig("couplings and time must be finite".into()));
        }
        if self.t < T::zero() {
            return Err(Error::InvalidConfig(format!(
                "interaction time must be non-negative, got {}",
                self.t
            )));
        }
        if self.gamma1.norm_sqr() == T::zero() && self.gamma2.norm_sqr() == T::zero() {
            return Err(Error::InvalidConfig("at least one coupling must be non-zero".into()));
        }
        Ok(())
    }

    /// `Ω² = |γ₂|² − |γ₁|²`.
    pub fn omega_sq(&self) -> T {
        self.gamma2.norm_sqr() - self.gamma1.norm_sqr()
    }

    pub fn regime(&self) -> Regime {
        let w = self.omega_sq();
        if w > T::zero() {
            Regime::Trigonometric
        } else if w < T::zero() {
            Regime::Hyperbolic
        } else {
            Regime::Degenerate
        }
    }

    /// `|γ₁/γ₂|` (infinite when `γ₂ = 0`).
    pub fn ratio(&self) -> T {
        self.gamma1.norm() / self.gamma2.norm()
    }

    /// Reduced angle `√|Ω²| · t`.
    pub fn reduced_angle(&self) -> T {
        self.omega_sq().abs().sqrt() * self.t
    }

    /// Same couplings, evolved for time `t` instead.
    pub fn with_time(&self, t: T) -> Self {
        Self { t, ..*self }
    }
}

/// `sin(√y)/√y`, continued analytically to `y ≤ 0`.
pub fn sinc_kernel<T: Real>(y: T) -> T {
    if y.abs() < lit(SERIES_THRESHOLD) {
        T::one() - y / lit(6.0) + y * y / lit(120.0)
    } else if y > T::zero() {
        let r = y.sqrt();
        r.sin() / r
    } else {
        let r = (-y).sqrt();
        r.sinh() / r
    }
}

/// `(1 − cos √y)/y`, continued analytically to `y ≤ 0`.
///
/// Written with half-angle squares so that there is no cancellation near 0.
pub fn versine_kernel<T: Real>(y: T) -> T {
    let two = lit::<T>(2.0);
    if y.abs() < lit(SERIES_THRESHOLD) {
        T::one() / two - y / lit(24.0) + y * y / lit(720.0)
    } else if y > T::zero() {
        let h = (y.sqrt() / two).sin();
        two * h * h / y
    } else {
        let h = ((-y).sqrt() / two).sinh();
        two * h * h / (-y)
    }
}

/// `cos √y`, continued analytically to `y ≤ 0`.
pub fn cos_kernel<T: Real>(y: T) -> T {
    if y.abs() < lit(SERIES_THRESHOLD) {
        T::one() - y * versine_kernel(y)
    } else if y > T::zero() {
        y.sqrt().cos()
    } else {
        (-y).sqrt().cosh()
    }
}

/// Scalar pieces of the propagator at signed time `t`.
struct Kernels<T> {
    /// `sin(Ωt)/Ω`
    s: T,
    /// `(1 − cos Ωt)/Ω²`
    v: T,
    /// `cos Ωt`
    c: T,
}

impl<T: Real> Kernels<T> {
    fn new(omega_sq: T, t: T) -> Self {
        let y = omega_sq * t * t;
        Self {
            s: t * sinc_kernel(y),
            v: t * t * versine_kernel(y),
            c: cos_kernel(y),
        }
    }
}

/// Coefficients of
/// `a₁†(t) = f₁a₁† + f₂a₂ + f₃a₃`,
/// `a₂(t) = g₁a₁† + g₂a₂ + g₃a₃`,
/// `a₃(t) = h₁a₁† + h₂a₂ + h₃a₃`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModeCoefficients<T> {
    pub f: [Complex<T>; 3],
    pub g: [Complex<T>; 3],
    pub h: [Complex<T>; 3],
    /// `Ω² = |γ₂|² − |γ₁|²`; `Γ = iΩ` is real when this is negative.
    pub omega_sq: T,
}

impl<T: Real> ModeCoefficients<T> {
    pub fn identity() -> Self {
        let (o, z) = (real(T::one()), real(T::zero()));
        Self {
            f: [o, z, z],
            g: [z, o, z],
            h: [z, z, o],
            omega_sq: T::zero(),
        }
    }

    /// Residuals of the six canonical-commutator identities, in the order
    /// `|f₁|²−|f₂|²−|f₃|²−1`, `|g₂|²+|g₃|²−|g₁|²−1`, `|h₂|²+|h₃|²−|h₁|²−1`,
    /// `−f₁ḡ₁+f₂ḡ₂+f₃ḡ₃`, `−f₁h̄₁+f₂h̄₂+f₃h̄₃`, `−g₁h̄₁+g₂h̄₂+g₃h̄₃`.
    pub fn commutator_residuals(&self) -> [T; 6] {
        let (f, g, h) = (&self.f, &self.g, &self.h);
        let one = T::one();
        let cross = |u: &[Complex<T>; 3], w: &[Complex<T>; 3]| {
            (-(u[0] * w[0].conj()) + u[1] * w[1].conj() + u[2] * w[2].conj()).norm()
        };
        [
            (f[0].norm_sqr() - f[1].norm_sqr() - f[2].norm_sqr() - one).abs(),
            (g[1].norm_sqr() + g[2].norm_sqr() - g[0].norm_sqr() - one).abs(),
            (h[1].norm_sqr() + h[2].norm_sqr() - h[0].norm_sqr() - one).abs(),
            cross(f, g),
            cross(f, h),
            cross(g, h),
        ]
    }

    /// Largest commutator residual.
    pub fn max_residual(&self) -> T {
        self.commutator_residuals().into_iter().fold(T::zero(), T::max)
    }

    /// Populations of the evolved vacuum read off the coefficients.
    pub fn vacuum_populations(&self) -> Populations<T> {
        Populations {
            n1: self.f[1].norm_sqr() + self.f[2].norm_sqr(),
            n2: self.g[0].norm_sqr(),
            n3: self.h[0].norm_sqr(),
        }
    }
}

fn coefficients_at<T: Real>(gamma1: Complex<T>, gamma2: Complex<T>, t: T) -> ModeCoefficients<T> {
    let omega_sq = gamma2.norm_sqr() - gamma1.norm_sqr();
    let k = Kernels::new(omega_sq, t);
    let one = T::one();
    let (g1c, g2c) = (gamma1.conj(), gamma2.conj());
    ModeCoefficients {
        f: [real(one + gamma1.norm_sqr() * k.v), g1c * g2c * k.v, times_i(g1c) * k.s],
        g: [
            -(gamma1 * gamma2) * k.v,
            real(one - gamma2.norm_sqr() * k.v),
            -times_i(gamma2) * k.s,
        ],
        h: [-times_i(gamma1) * k.s, -times_i(g2c) * k.s, real(k.c)],
        omega_sq,
    }
}

/// Heisenberg-picture coefficients after time `cfg.t`.
pub fn heisenberg_coefficients<T: Real>(cfg: &CouplingConfig<T>) -> ModeCoefficients<T> {
    coefficients_at(cfg.gamma1, cfg.gamma2, cfg.t)
}

/// Coefficients of the backward evolution, `f_j(−t)` etc.
pub fn backward_coefficients<T: Real>(cfg: &CouplingConfig<T>) -> ModeCoefficients<T> {
    coefficients_at(cfg.gamma1, cfg.gamma2, -cfg.t)
}

/// Mean photon numbers of the three modes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Populations<T> {
    pub n1: T,
    pub n2: T,
    pub n3: T,
}

impl<T: Real> Populations<T> {
    /// The conserved combination `N₁ − N₂ − N₃`.
    pub fn delta(&self) -> T {
        self.n1 - self.n2 - self.n3
    }

    pub fn as_array(&self) -> [T; 3] {
        [self.n1, self.n2, self.n3]
    }
}

/// Populations of the evolved vacuum:
/// `N₃ = |γ₁|² sin²(Ωt)/Ω²`, `N₂ = |γ₁|²|γ₂|² (1 − cos Ωt)²/Ω⁴`, `N₁ = N₂ + N₃`.
pub fn mode_populations<T: Real>(cfg: &CouplingConfig<T>) -> Populations<T> {
    let k = Kernels::new(cfg.omega_sq(), cfg.t);
    let a = cfg.gamma1.norm_sqr();
    let b = cfg.gamma2.norm_sqr();
    let n3 = a * k.s * k.s;
    let n2 = a * b * k.v * k.v;
    Populations { n1: n2 + n3, n2, n3 }
}

/// Populations when mode 1 starts in the coherent state `|α⟩`.
pub fn seeded_populations<T: Real>(cfg: &CouplingConfig<T>, alpha: Complex<T>) -> Populations<T> {
    let vac = mode_populations(cfg);
    let a2 = alpha.norm_sqr();
    let gain = T::one() + a2;
    Populations {
        n1: vac.n1 * gain + a2,
        n2: vac.n2 * gain,
        n3: vac.n3 * gain,
    }
}

/// Equal-population operating point `N₂ = N₃ = N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SymmetricPoint<T> {
    /// Coupling ratio `|γ₁/γ₂|`.
    pub ratio: T,
    /// Smallest positive `Ωt` with `cos Ωt = r²/(2 − r²)`; zero at `r = 1`.
    pub omega_t: T,
    /// Common population `N = 4r²/(2 − r²)²`.
    pub n: T,
}

impl<T: Real> SymmetricPoint<T> {
    /// A physical configuration reaching this point with `γ₂ = 1`.
    pub fn config(&self) -> Result<CouplingConfig<T>> {
        if self.ratio == T::one() {
            // Degenerate regime: N₃ = |γ₁|²t² and N₂ = |γ₁|⁴t⁴/4 meet at |γ₁|t = 2.
            CouplingConfig::new(real(T::one()), real(T::one()), lit(2.0))
        } else {
            CouplingConfig::from_reduced(self.ratio, self.omega_t)
        }
    }
}

/// Solves `N₂(Ωt) = N₃(Ωt)` for a coupling ratio; `None` when `ratio > 1`
/// (the cosine condition has no solution) or the ratio is not positive.
pub fn symmetric_point<T: Real>(ratio: T) -> Option<SymmetricPoint<T>> {
    if ratio.is_nan() || ratio <= T::zero() || ratio > T::one() {
        return None;
    }
    let r2 = ratio * ratio;
    let two = lit::<T>(2.0);
    let denom = two - r2;
    let cos = (r2 / denom).min(T::one());
    Some(SymmetricPoint {
        ratio,
        omega_t: cos.acos(),
        n: lit::<T>(4.0) * r2 / (denom * denom),
    })
}

/// The coupling ratio `√(6 − √32)` at which the symmetric population is `1/2`.
pub fn optimal_symmetric_ratio<T: Real>() -> T {
    (lit::<T>(6.0) - lit::<T>(32.0).sqrt()).sqrt()
}
