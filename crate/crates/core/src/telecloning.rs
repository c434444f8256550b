//! 1→2 telecloning of coherent states over the three-mode resource.
//!
//! Mode 1 is measured jointly with the input `|z⟩` (a coherent-state POVM
//! with outcomes `β`), the outcome is broadcast, and modes 2 and 3 are
//! displaced. Conditional clone states are coherent, so every fidelity is an
//! overlap `exp(−|c − z|²)` of coherent amplitudes.
//!
//! For a seeded crystal the resource is displaced by
//! `(αf₁(−t), −conj(αf₂(−t)), −conj(αf₃(−t)))`. The outcome distribution is
//! then centred at `αf₁(−t) − z̄` instead of `−z̄`, and the receivers remove the
//! whole known offset `conj(αf₁(−t))` from the outcome before applying the
//! unseeded correction. With that correction the clones coincide with the
//! unseeded ones for the re-referenced outcome.

use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::{backward_coefficients, mode_populations, CouplingConfig};
use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

/// Smallest Monte Carlo sample count accepted by [`mc_teleclone`].
pub const MIN_SAMPLES: usize = 1000;
/// Samples drawn from one RNG stream; fixes the work split independently of
/// the thread count.
const CHUNK: usize = 8192;

/// Gains and populations that fix the telecloning protocol.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TeleclonePlan<T> {
    /// `κ₂ = √(N₂/(1+N₁))`
    pub kappa2: T,
    /// `κ₃ = √(N₃/(1+N₁))`
    pub kappa3: T,
    pub n1: T,
    pub n2: T,
    pub n3: T,
    /// Coherent amplitude seeding mode 1, if any.
    pub seed_alpha: Option<Complex<T>>,
    /// Backward coefficients `f₁(−t), f₂(−t), f₃(−t)`, present for seeded plans.
    pub f_coeffs: Option<[Complex<T>; 3]>,
}

impl<T: Real> TeleclonePlan<T> {
    /// Unseeded plan from the populations of modes 2 and 3.
    pub fn from_populations(n2: T, n3: T) -> Result<Self> {
        check_population("n2", n2)?;
        check_population("n3", n3)?;
        let n1 = n2 + n3;
        let denom = T::one() + n1;
        Ok(Self {
            kappa2: (n2 / denom).sqrt(),
            kappa3: (n3 / denom).sqrt(),
            n1,
            n2,
            n3,
            seed_alpha: None,
            f_coeffs: None,
        })
    }

    /// Plan for the state evolved from the vacuum or from `|α, 0, 0⟩`.
    pub fn new(cfg: &CouplingConfig<T>, alpha: Option<Complex<T>>) -> Result<Self> {
        cfg.validate()?;
        let p = mode_populations(cfg);
        let mut plan = Self::from_populations(p.n2, p.n3)?;
        if let Some(a) = alpha {
            plan.seed_alpha = Some(a);
            plan.f_coeffs = Some(backward_coefficients(cfg).f);
        }
        Ok(plan)
    }

    /// `(conj(αf₁), conj(αf₂), conj(αf₃))` at `−t`, zero when unseeded.
    fn seed_terms(&self) -> [Complex<T>; 3] {
        match (self.seed_alpha, self.f_coeffs) {
            (Some(a), Some(f)) => f.map(|fj| (a * fj).conj()),
            _ => [Complex::new(T::zero(), T::zero()); 3],
        }
    }

    /// Centre of the outcome distribution for input `z`.
    pub fn outcome_center(&self, z: Complex<T>) -> Complex<T> {
        self.seed_terms()[0].conj() - z.conj()
    }

    pub fn kappas(&self) -> [T; 2] {
        [self.kappa2, self.kappa3]
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

/// Coherent amplitudes of modes 2 and 3 after outcome `β`:
/// `δⱼ = (z + β̄)κⱼ`, or for a seeded plan
/// `ζⱼ = (z + β̄ − conj(αf₁))κⱼ − conj(αfⱼ)`.
pub fn conditional_amplitudes<T: Real>(z: Complex<T>, beta: Complex<T>, plan: &TeleclonePlan<T>) -> [Complex<T>; 2] {
    let s = plan.seed_terms();
    let base = z + beta.conj() - s[0];
    [base * plan.kappa2 - s[1], base * plan.kappa3 - s[2]]
}

/// Displacement amounts `eⱼ` removed from the conditional amplitudes
/// (`cⱼ = ζⱼ − eⱼ`): `β̄` unseeded, `β̄ − conj(αf₁) − conj(αfⱼ)` seeded.
pub fn correction_displacements<T: Real>(beta: Complex<T>, plan: &TeleclonePlan<T>) -> [Complex<T>; 2] {
    let s = plan.seed_terms();
    let b = beta.conj() - s[0];
    [b - s[1], b - s[2]]
}

/// Clone amplitudes after the correcting displacements,
/// `cⱼ = zκⱼ + β̄′(κⱼ − 1)` with `β′ = β − αf₁(−t)` (`β′ = β` unseeded).
pub fn corrected_clone_amplitudes<T: Real>(
    z: Complex<T>,
    beta: Complex<T>,
    plan: &TeleclonePlan<T>,
) -> [Complex<T>; 2] {
    let zeta = conditional_amplitudes(z, beta, plan);
    let e = correction_displacements(beta, plan);
    [zeta[0] - e[0], zeta[1] - e[1]]
}

/// Fidelity of the symmetric clones, `1/(2 + 3N − 2√(N(2N+1)))`.
pub fn symmetric_fidelity<T: Real>(n: T) -> T {
    let (two, three) = (lit::<T>(2.0), lit::<T>(3.0));
    T::one() / (two + three * n - two * (n * (two * n + T::one())).sqrt())
}

/// `(F₂, F₃)` for populations `N₂, N₃`; independent of the input amplitude.
pub fn clone_fidelities<T: Real>(n2: T, n3: T) -> Result<(T, T)> {
    check_population("n2", n2)?;
    check_population("n3", n3)?;
    let two = lit::<T>(2.0);
    let total = n2 + n3 + T::one();
    let f = |a: T, b: T| T::one() / (two + b + two * a - two * (a * total).sqrt());
    Ok((f(n2, n3), f(n3, n2)))
}

/// Optimal asymmetric cloner for a prescribed `F₃`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrontierPoint<T> {
    pub n2: T,
    pub n3: T,
    pub f2: T,
    pub f3: T,
}

/// Largest `F₂` compatible with a given `F₃ ∈ [1/2, 2/3]`:
/// `N₂ = 1/F₃ − 1`, `N₃ = 1/(4(1/F₃ − 1))`, `F₂ = 4(1 − F₃)/(4 − 3F₃)`.
pub fn asymmetric_frontier<T: Real>(f3: T) -> Result<FrontierPoint<T>> {
    let lo = lit::<T>(0.5);
    let hi = lit::<T>(2.0) / lit(3.0);
    // Allow the upper end to be given as a rounded 2/3.
    if !(f3 >= lo && f3 <= hi + T::epsilon() * lit(4.0)) {
        return Err(Error::OutOfRange {
            name: "f3",
            value: f3.to_f64().unwrap_or(f64::NAN),
            expected: "within [1/2, 2/3]",
        });
    }
    let four = lit::<T>(4.0);
    let n2 = T::one() / f3 - T::one();
    Ok(FrontierPoint {
        n2,
        n3: T::one() / (four * n2),
        f2: four * (T::one() - f3) / (four - lit::<T>(3.0) * f3),
        f3,
    })
}

/// Stream of measurement outcomes `β`, complex Gaussian around `center` with
/// per-axis variance `(1+N₁)/2`.
pub struct OutcomeSampler<T> {
    rng: ChaCha8Rng,
    center: Complex<T>,
    sigma: T,
}

impl<T: Real> OutcomeSampler<T> {
    /// `stream` selects an independent ChaCha stream under the same seed.
    pub fn new(center: Complex<T>, n1: T, seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self {
            rng,
            center,
            sigma: ((T::one() + n1) / lit(2.0)).sqrt(),
        }
    }
}

impl<T: Real> Iterator for OutcomeSampler<T>
where
    StandardNormal: Distribution<T>,
{
    type Item = Complex<T>;

    fn next(&mut self) -> Option<Complex<T>> {
        let re: T = StandardNormal.sample(&mut self.rng);
        let im: T = StandardNormal.sample(&mut self.rng);
        Some(self.center + Complex::new(re, im) * self.sigma)
    }
}

/// Outcomes for the unseeded resource, distributed as
/// `P_z(β) = exp(−|β + z̄|²/(1+N₁)) / (π(1+N₁))`.
pub fn outcome_sampler<T: Real>(z: Complex<T>, n1: T, seed: u64) -> OutcomeSampler<T> {
    OutcomeSampler::new(-z.conj(), n1, seed, 0)
}

/// Clone fidelities, analytic or estimated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CloneReport<T> {
    pub f2: T,
    pub f3: T,
    pub stderr2: Option<T>,
    pub stderr3: Option<T>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub input_z: Complex<T>,
}

/// Closed-form report for a plan.
pub fn analytic_report<T: Real>(z: Complex<T>, plan: &TeleclonePlan<T>) -> Result<CloneReport<T>> {
    let (f2, f3) = clone_fidelities(plan.n2, plan.n3)?;
    Ok(CloneReport {
        f2,
        f3,
        stderr2: None,
        stderr3: None,
        samples: None,
        seed: None,
        input_z: z,
    })
}

/// Simulates the protocol: draws outcomes, applies the corrections, and
/// averages the per-outcome overlaps `exp(−|cⱼ(β) − z|²)`.
///
/// Work is split into fixed chunks, each on its own ChaCha stream of `seed`,
/// so the estimate is reproducible regardless of the thread count.
pub fn mc_teleclone<T: Real>(
    z: Complex<T>,
    cfg: &CouplingConfig<T>,
    alpha: Option<Complex<T>>,
    samples: usize,
    seed: u64,
) -> Result<CloneReport<T>>
where
    StandardNormal: Distribution<T>,
{
    if samples < MIN_SAMPLES {
        return Err(Error::OutOfRange {
            name: "samples",
            value: samples as f64,
            expected: "at least 1000",
        });
    }
    let plan = TeleclonePlan::new(cfg, alpha)?;
    let center = plan.outcome_center(z);
    let chunks = samples.div_ceil(CHUNK);
    let partial: Vec<[T; 4]> = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let len = CHUNK.min(samples - chunk * CHUNK);
            let sampler = OutcomeSampler::new(center, plan.n1, seed, chunk as u64);
            let mut acc = [T::zero(); 4];
            for beta in sampler.take(len) {
                let c = corrected_clone_amplitudes(z, beta, &plan);
                let f2 = (-(c[0] - z).norm_sqr()).exp();
                let f3 = (-(c[1] - z).norm_sqr()).exp();
                acc[0] = acc[0] + f2;
                acc[1] = acc[1] + f2 * f2;
                acc[2] = acc[2] + f3;
                acc[3] = acc[3] + f3 * f3;
            }
            acc
        })
        .collect();
    let mut tot = [T::zero(); 4];
    for p in &partial {
        for (t, v) in tot.iter_mut().zip(p) {
            *t = *t + *v;
        }
    }
    let n = lit::<T>(samples as f64);
    let stats = |sum: T, sq: T| {
        let mean = sum / n;
        let var = ((sq - n * mean * mean) / (n - T::one())).max(T::zero());
        (mean, (var / n).sqrt())
    };
    let (f2, e2) = stats(tot[0], tot[1]);
    let (f3, e3) = stats(tot[2], tot[3]);
    Ok(CloneReport {
        f2,
        f3,
        stderr2: Some(e2),
        stderr3: Some(e3),
        samples: Some(samples),
        seed: Some(seed),
        input_z: z,
    })
}
