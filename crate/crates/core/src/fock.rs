//! Truncated three-mode Fock-space states.
//!
//! The evolved vacuum is supported on `|p+q, p, q⟩` only, so it is stored as
//! a dense `(p, q)` table. Seeded states fill the full cube
//! `n₁, n₂, n₃ ≤ cutoff`. Both layouts answer the same queries (amplitude
//! lookup, ladder-operator moments, partial traces), which makes this module
//! the brute-force reference for every closed-form result in the crate.
//!
//! With `β₂ = g₁/f₁`, `β₁ = h₁/f₁` and `ε = 1/f₁` (`f₁ = √(1+N₁)` is real and
//! positive) the amplitude of `|n+p+q, p, q⟩` for the seed `|α, 0, 0⟩` is
//!
//! ```text
//! e^{−|α|²/2} ε^{n+1} α^n β₂^p β₁^q √((n+p+q)!) / (n! √(p! q!))
//! ```
//!
//! and the vacuum state is the `n = 0` slice.

use std::collections::HashMap;
use std::io::{Read, Write};

use num_complex::Complex;
use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::{backward_coefficients, heisenberg_coefficients, mode_populations, CouplingConfig, Populations};
use crate::error::{Error, Result};
use crate::gaussian::Covariance6;
use crate::linalg::hermitian_eigenvalues;
use crate::scalar::{cplx, lit, ln_factorials, real, Real};

/// Default ceiling on the discarded probability when building a state.
pub const DEFAULT_MAX_TAIL: f64 = 0.01;
/// Tail mass targeted by the automatic cutoff policy.
pub const AUTO_TAIL_TARGET: f64 = 1e-6;
/// Standard deviations of coherent-amplitude margin added for seeded states.
pub const SEED_SIGMA_MARGIN: f64 = 6.0;

/// One of the three interacting modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Mode {
    One,
    Two,
    Three,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::One, Mode::Two, Mode::Three];

    pub fn index(self) -> usize {
        match self {
            Mode::One => 0,
            Mode::Two => 1,
            Mode::Three => 2,
        }
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }
}

/// Photon-number cutoff per mode and the largest tolerated tail mass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Truncation<T> {
    pub cutoff: usize,
    pub max_tail: T,
}

impl<T: Real> Truncation<T> {
    pub fn new(cutoff: usize) -> Self {
        Self {
            cutoff,
            max_tail: lit(DEFAULT_MAX_TAIL),
        }
    }

    /// Overrides the tail-mass ceiling.
    pub fn max_tail(self, max_tail: T) -> Self {
        Self { max_tail, ..self }
    }

    /// Smallest cutoff whose geometric tail drops below [`AUTO_TAIL_TARGET`].
    pub fn auto_vacuum(cfg: &CouplingConfig<T>) -> Self {
        let s = thermal_ratio(mode_populations(cfg).n1);
        let cutoff = if s <= T::zero() {
            1
        } else {
            let k = (lit::<T>(AUTO_TAIL_TARGET).ln() / s.ln()).ceil();
            k.to_usize().unwrap_or(1).max(1)
        };
        Self::new(cutoff)
    }

    /// Vacuum policy plus a coherent margin of `|μ|² + 6|μ|` photons, grown
    /// until the exact mode-1 tail falls below [`AUTO_TAIL_TARGET`].
    pub fn auto_seeded(cfg: &CouplingConfig<T>, alpha: Complex<T>) -> Self {
        let base = Self::auto_vacuum(cfg).cutoff;
        let mu = heisenberg_coefficients(cfg).f[0].norm() * alpha.norm();
        let margin = (mu * mu + lit::<T>(SEED_SIGMA_MARGIN) * mu)
            .ceil()
            .to_usize()
            .unwrap_or(0);
        let mut cutoff = base + margin;
        let s = thermal_ratio(mode_populations(cfg).n1);
        while seeded_tail(s, alpha.norm_sqr(), cutoff).0 > lit(AUTO_TAIL_TARGET) {
            cutoff += 1;
        }
        Self::new(cutoff)
    }
}

/// `N₁/(1+N₁)`, the geometric ratio of the mode-1 photon distribution.
fn thermal_ratio<T: Real>(n1: T) -> T {
    n1 / (T::one() + n1)
}

/// `k ln y` with `0 · ln 0 = 0`.
fn xlogy<T: Real>(k: usize, y: T) -> T {
    if k == 0 {
        T::zero()
    } else {
        lit::<T>(k as f64) * y.ln()
    }
}

/// Tail mass and moment-error estimate of the vacuum state.
fn vacuum_tail<T: Real>(s: T, cutoff: usize) -> (T, T) {
    if s <= T::zero() {
        return (T::zero(), T::zero());
    }
    let tail = s.powi(cutoff as i32 + 1);
    let weighted = tail * (lit::<T>(cutoff as f64 + 2.0) + s / (T::one() - s));
    (tail, lit::<T>(3.0) * weighted)
}

/// Mode-1 photon distribution of the seeded state,
/// `P(m) = e^{−|α|²}(1−s) Σₙ C(m,n) (|α|²(1−s))ⁿ s^{m−n} / n!`.
fn seeded_marginal<T: Real>(s: T, alpha_sq: T, m: usize, lf: &[T]) -> T {
    let one = T::one();
    let a = alpha_sq * (one - s);
    let mut acc = T::zero();
    for n in 0..=m {
        if (a == T::zero() && n > 0) || (s == T::zero() && m > n) {
            continue;
        }
        let ln_term = lf[m] - lf[n] - lf[m - n] + xlogy(n, a) + xlogy(m - n, s) - lf[n];
        acc = acc + ln_term.exp();
    }
    (-alpha_sq).exp() * (one - s) * acc
}

/// Tail mass and moment-error estimate of the seeded state, summed
/// explicitly over the mode-1 marginal beyond the cutoff.
fn seeded_tail<T: Real>(s: T, alpha_sq: T, cutoff: usize) -> (T, T) {
    if alpha_sq == T::zero() {
        return vacuum_tail(s, cutoff);
    }
    let mean = s / (T::one() - s) * (T::one() + alpha_sq) + alpha_sq;
    let limit = cutoff + 4000;
    let lf = ln_factorials::<T>(limit + 1);
    let (mut tail, mut weighted, mut weighted_sqrt) = (T::zero(), T::zero(), T::zero());
    for m in (cutoff + 1)..=limit {
        let p = seeded_marginal(s, alpha_sq, m, &lf);
        tail = tail + p;
        let w = lit::<T>(m as f64 + 1.0);
        weighted = weighted + w * p;
        weighted_sqrt = weighted_sqrt + w.sqrt() * p;
        if lit::<T>(m as f64) > mean && p <= lit::<T>(1e-18) * tail.max(T::min_positive_value()) {
            break;
        }
    }
    let amp = T::one() + alpha_sq.sqrt() * (T::one() + mean).sqrt();
    let bound = lit::<T>(3.0) * weighted + lit::<T>(8.0) * amp * weighted_sqrt;
    (tail, bound)
}

#[derive(Debug, Clone, PartialEq)]
enum Storage<T> {
    /// Amplitudes of `|p+q, p, q⟩` at `p·(cutoff+1) + q`; zero for `p+q > cutoff`.
    Sector(Vec<Complex<T>>),
    /// Full cube indexed `(n₁·(cutoff+1) + n₂)·(cutoff+1) + n₃`.
    Dense(Vec<Complex<T>>),
}

/// Truncated three-mode pure state.
#[derive(Debug, Clone, PartialEq)]
pub struct TriFockState<T> {
    cutoff: usize,
    storage: Storage<T>,
    tail_bound: T,
    moment_bound: T,
}

impl<T: Real> TriFockState<T> {
    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    /// Upper bound on the probability discarded by the truncation.
    pub fn tail_bound(&self) -> T {
        self.tail_bound
    }

    /// Estimate of the largest covariance-entry error caused by truncation.
    pub fn moment_bound(&self) -> T {
        self.moment_bound
    }

    /// Whether the state is stored on the `n₁ = n₂ + n₃` sector.
    pub fn is_sector(&self) -> bool {
        matches!(self.storage, Storage::Sector(_))
    }

    fn side(&self) -> usize {
        self.cutoff + 1
    }

    /// Amplitude of `|n₁, n₂, n₃⟩`, zero outside the stored support.
    pub fn amp(&self, n: [usize; 3]) -> Complex<T> {
        let k = self.cutoff;
        if n.iter().any(|&x| x > k) {
            return Complex::new(T::zero(), T::zero());
        }
        let side = self.side();
        match &self.storage {
            Storage::Sector(a) => {
                if n[0] == n[1] + n[2] {
                    a[n[1] * side + n[2]]
                } else {
                    Complex::new(T::zero(), T::zero())
                }
            }
            Storage::Dense(a) => a[(n[0] * side + n[1]) * side + n[2]],
        }
    }

    /// Stored basis states with non-zero amplitude.
    pub fn nonzero(&self) -> Vec<([usize; 3], Complex<T>)> {
        let side = self.side();
        let k = self.cutoff;
        let zero = Complex::new(T::zero(), T::zero());
        match &self.storage {
            Storage::Sector(a) => (0..=k)
                .flat_map(|p| (0..=(k - p)).map(move |q| (p, q)))
                .map(|(p, q)| ([p + q, p, q], a[p * side + q]))
                .filter(|(_, c)| *c != zero)
                .collect(),
            Storage::Dense(a) => a
                .iter()
                .enumerate()
                .filter(|(_, c)| **c != zero)
                .map(|(i, c)| ([i / (side * side), (i / side) % side, i % side], *c))
                .collect(),
        }
    }

    /// `Σ|amps|²`.
    pub fn norm_sqr(&self) -> T {
        match &self.storage {
            Storage::Sector(a) | Storage::Dense(a) => a.iter().map(|c| c.norm_sqr()).sum(),
        }
    }

    /// Full `(cutoff+1)³` amplitude cube, row-major in `(n₁, n₂, n₃)`.
    pub fn to_dense(&self) -> Vec<Complex<T>> {
        match &self.storage {
            Storage::Dense(a) => a.clone(),
            Storage::Sector(_) => {
                let side = self.side();
                let mut out = vec![Complex::new(T::zero(), T::zero()); side * side * side];
                for (n, c) in self.nonzero() {
                    out[(n[0] * side + n[1]) * side + n[2]] = c;
                }
                out
            }
        }
    }

    /// `⟨ψ|O|ψ⟩` for a product of ladder operators, applied right to left.
    fn expect(&self, ops: &[Ladder]) -> Complex<T> {
        let mut acc = Complex::new(T::zero(), T::zero());
        for (n, c) in self.nonzero() {
            if let Some((m, coef)) = apply_ladder::<T, 3>(n, ops) {
                acc = acc + self.amp(m).conj() * c * coef;
            }
        }
        acc
    }
}

/// A single creation or annihilation operator.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Ladder {
    mode: usize,
    raise: bool,
}

pub(crate) fn lower(mode: usize) -> Ladder {
    Ladder { mode, raise: false }
}

pub(crate) fn raise(mode: usize) -> Ladder {
    Ladder { mode, raise: true }
}

/// Applies the operators (last first) to a basis state, returning the image
/// state and its coefficient, or `None` when annihilated.
pub(crate) fn apply_ladder<T: Real, const N: usize>(mut n: [usize; N], ops: &[Ladder]) -> Option<([usize; N], T)> {
    let mut coef = T::one();
    for op in ops.iter().rev() {
        let k = &mut n[op.mode];
        if op.raise {
            *k += 1;
            coef = coef * lit::<T>(*k as f64).sqrt();
        } else {
            if *k == 0 {
                return None;
            }
            coef = coef * lit::<T>(*k as f64).sqrt();
            *k -= 1;
        }
    }
    Some((n, coef))
}

/// First and second ladder moments of an `m`-mode state.
pub(crate) struct LadderMoments<T> {
    pub modes: usize,
    /// `⟨a_j⟩`
    pub mean: Vec<Complex<T>>,
    /// `⟨a_j a_k⟩`, row-major
    pub aa: Vec<Complex<T>>,
    /// `⟨a_j† a_k⟩`, row-major
    pub ada: Vec<Complex<T>>,
}

impl<T: Real> LadderMoments<T> {
    pub fn collect(modes: usize, mut expect: impl FnMut(&[Ladder]) -> Complex<T>) -> Self {
        let mean = (0..modes).map(|j| expect(&[lower(j)])).collect();
        let mut aa = Vec::with_capacity(modes * modes);
        let mut ada = Vec::with_capacity(modes * modes);
        for j in 0..modes {
            for k in 0..modes {
                aa.push(expect(&[lower(j), lower(k)]));
                ada.push(expect(&[raise(j), lower(k)]));
            }
        }
        Self { modes, mean, aa, ada }
    }

    pub fn populations(&self) -> Vec<T> {
        (0..self.modes).map(|j| self.ada[j * self.modes + j].re).collect()
    }

    /// Symmetrized, centred quadrature covariance in `(x…, p…)` ordering.
    pub fn covariance(&self) -> Vec<T> {
        let m = self.modes;
        let n = 2 * m;
        // R_i = u a + ū a† with u = 1 for x and u = −i for p.
        let u = |i: usize| {
            if i < m {
                cplx(T::one(), T::zero())
            } else {
                cplx(T::zero(), -T::one())
            }
        };
        let mode = |i: usize| i % m;
        let two = lit::<T>(2.0);
        let mean_r = |i: usize| two * (u(i) * self.mean[mode(i)]).re;
        let mut cov = vec![T::zero(); n * n];
        for i in 0..n {
            for j in 0..n {
                let (a, b) = (mode(i), mode(j));
                let (ui, uj) = (u(i), u(j));
                let aa = self.aa[a * m + b];
                let delta = if a == b { T::one() } else { T::zero() };
                // ⟨a_a a_b†⟩ = ⟨a_b† a_a⟩ + δ
                let a_adag = self.ada[b * m + a] + real(delta);
                let adag_a = self.ada[a * m + b];
                let val = ui * uj * aa
                    + ui * uj.conj() * a_adag
                    + ui.conj() * uj * adag_a
                    + ui.conj() * uj.conj() * aa.conj();
                cov[i * n + j] = val.re - mean_r(i) * mean_r(j);
            }
        }
        cov
    }
}

/// Photon-number expectations and quadrature covariance of a state.
pub fn moments<T: Real>(state: &TriFockState<T>) -> (Populations<T>, Covariance6<T>) {
    let lm = ladder_moments(state);
    let p = lm.populations();
    let v = lm.covariance();
    let mut c = [[T::zero(); 6]; 6];
    for i in 0..6 {
        for j in 0..6 {
            c[i][j] = v[i * 6 + j];
        }
    }
    (
        Populations {
            n1: p[0],
            n2: p[1],
            n3: p[2],
        },
        Covariance6 { c },
    )
}

/// `⟨a₁⟩, ⟨a₂⟩, ⟨a₃⟩`.
pub fn mode_means<T: Real>(state: &TriFockState<T>) -> [Complex<T>; 3] {
    [0, 1, 2].map(|j| state.expect(&[lower(j)]))
}

fn ladder_moments<T: Real>(state: &TriFockState<T>) -> LadderMoments<T> {
    LadderMoments::collect(3, |ops| state.expect(ops))
}

/// Pair amplitudes `(ε, β₂, β₁)` of the evolved vacuum.
///
/// Magnitudes come from the closed-form populations, phases from the
/// Heisenberg coefficients (`β₂ ∝ g₁`, `β₁ ∝ h₁`, since `f₁ > 0`).
fn pair_amplitudes<T: Real>(cfg: &CouplingConfig<T>) -> (T, Complex<T>, Complex<T>) {
    let pops = mode_populations(cfg);
    let k = heisenberg_coefficients(cfg);
    let denom = T::one() + pops.n1;
    let unit = |z: Complex<T>| {
        if z.norm() == T::zero() {
            real(T::one())
        } else {
            z / z.norm()
        }
    };
    let b2 = unit(k.g[0]) * (pops.n2 / denom).sqrt();
    let b1 = unit(k.h[0]) * (pops.n3 / denom).sqrt();
    (T::one() / denom.sqrt(), b2, b1)
}

struct AmplitudeTerms<T> {
    ln_eps: T,
    alpha: Complex<T>,
    b2: Complex<T>,
    b1: Complex<T>,
    lf: Vec<T>,
}

impl<T: Real> AmplitudeTerms<T> {
    fn new(cfg: &CouplingConfig<T>, alpha: Complex<T>, cutoff: usize) -> Self {
        let (eps, b2, b1) = pair_amplitudes(cfg);
        Self {
            ln_eps: eps.ln(),
            alpha,
            b2,
            b1,
            lf: ln_factorials(cutoff),
        }
    }

    /// Amplitude of `|n+p+q, p, q⟩`.
    fn amplitude(&self, n: usize, p: usize, q: usize) -> Complex<T> {
        let zero = Complex::new(T::zero(), T::zero());
        let vanishes = |z: Complex<T>, k: usize| k > 0 && z.norm() == T::zero();
        if vanishes(self.alpha, n) || vanishes(self.b2, p) || vanishes(self.b1, q) {
            return zero;
        }
        let lf = &self.lf;
        let half = lit::<T>(0.5);
        let ln_mag = -half * self.alpha.norm_sqr()
            + lit::<T>(n as f64 + 1.0) * self.ln_eps
            + xlogy(n, self.alpha.norm())
            + xlogy(p, self.b2.norm())
            + xlogy(q, self.b1.norm())
            + half * lf[n + p + q]
            - lf[n]
            - half * (lf[p] + lf[q]);
        let phase = lit::<T>(n as f64) * self.alpha.arg()
            + lit::<T>(p as f64) * self.b2.arg()
            + lit::<T>(q as f64) * self.b1.arg();
        Complex::from_polar(ln_mag.exp(), phase)
    }
}

fn check_tail<T: Real>(cutoff: usize, tail: T, max_tail: T) -> Result<()> {
    if tail > max_tail {
        return Err(Error::TailBound {
            cutoff,
            tail: tail.to_f64().unwrap_or(f64::NAN),
            limit: max_tail.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(())
}

/// Evolved vacuum `|T₀⟩` truncated at `n₁ ≤ cutoff`.
pub fn build_vacuum_state<T: Real>(cfg: &CouplingConfig<T>, trunc: Truncation<T>) -> Result<TriFockState<T>> {
    cfg.validate()?;
    let k = trunc.cutoff;
    let (tail, moment_bound) = vacuum_tail(thermal_ratio(mode_populations(cfg).n1), k);
    check_tail(k, tail, trunc.max_tail)?;
    let terms = AmplitudeTerms::new(cfg, real(T::zero()), k);
    let side = k + 1;
    let mut amps = vec![Complex::new(T::zero(), T::zero()); side * side];
    amps.par_chunks_mut(side).enumerate().for_each(|(p, row)| {
        for (q, slot) in row.iter_mut().enumerate().take(side - p) {
            *slot = terms.amplitude(0, p, q);
        }
    });
    Ok(TriFockState {
        cutoff: k,
        storage: Storage::Sector(amps),
        tail_bound: tail,
        moment_bound,
    })
}

/// Evolved coherent seed `U|α, 0, 0⟩`, evaluated term by term.
pub fn build_seeded_state<T: Real>(
    cfg: &CouplingConfig<T>,
    alpha: Complex<T>,
    trunc: Truncation<T>,
) -> Result<TriFockState<T>> {
    cfg.validate()?;
    let k = trunc.cutoff;
    let (tail, moment_bound) = seeded_tail(thermal_ratio(mode_populations(cfg).n1), alpha.norm_sqr(), k);
    check_tail(k, tail, trunc.max_tail)?;
    let terms = AmplitudeTerms::new(cfg, alpha, k);
    let side = k + 1;
    let mut amps = vec![Complex::new(T::zero(), T::zero()); side * side * side];
    amps.par_chunks_mut(side * side).enumerate().for_each(|(n1, slab)| {
        for p in 0..=n1 {
            for q in 0..=(n1 - p) {
                slab[p * side + q] = terms.amplitude(n1 - p - q, p, q);
            }
        }
    });
    Ok(TriFockState {
        cutoff: k,
        storage: Storage::Dense(amps),
        tail_bound: tail,
        moment_bound,
    })
}

/// Displacement amplitudes carrying `|T₀⟩` to the seeded state:
/// `(α f₁(−t), −conj(α f₂(−t)), −conj(α f₃(−t)))`.
pub fn seed_displacements<T: Real>(cfg: &CouplingConfig<T>, alpha: Complex<T>) -> [Complex<T>; 3] {
    let back = backward_coefficients(cfg);
    [
        alpha * back.f[0],
        -(alpha * back.f[1]).conj(),
        -(alpha * back.f[2]).conj(),
    ]
}

/// Generalized Laguerre polynomial `L_n^{(k)}(x)` by upward recurrence.
fn laguerre<T: Real>(n: usize, k: usize, x: T) -> T {
    let kk = lit::<T>(k as f64);
    let mut prev = T::one();
    if n == 0 {
        return prev;
    }
    let mut cur = T::one() + kk - x;
    for j in 1..n {
        let jj = lit::<T>(j as f64);
        let next = ((lit::<T>(2.0) * jj + T::one() + kk - x) * cur - (jj + kk) * prev) / (jj + T::one());
        prev = cur;
        cur = next;
    }
    cur
}

/// Matrix elements `⟨m|D(λ)|n⟩` for `m, n < dim`, row-major.
pub fn displacement_matrix<T: Real>(lambda: Complex<T>, dim: usize) -> Vec<Complex<T>> {
    let lf = ln_factorials::<T>(dim);
    let x = lambda.norm_sqr();
    let gauss = (-x / lit(2.0)).exp();
    let half = lit::<T>(0.5);
    let mut d = vec![Complex::new(T::zero(), T::zero()); dim * dim];
    for m in 0..dim {
        for n in 0..dim {
            let (lo, hi) = if m >= n { (n, m) } else { (m, n) };
            let base = if m >= n { lambda } else { -lambda.conj() };
            let pref = (half * (lf[lo] - lf[hi])).exp();
            let lag = laguerre(lo, hi - lo, x);
            d[m * dim + n] = crate::scalar::cpow(base, hi - lo) * (pref * gauss * lag);
        }
    }
    d
}

/// Applies `D₁(λ₁) ⊗ D₂(λ₂) ⊗ D₃(λ₃)` to a dense cube of side `side`.
fn displace_cube<T: Real>(cube: &[Complex<T>], side: usize, lambdas: [Complex<T>; 3]) -> Vec<Complex<T>> {
    let mut cur = cube.to_vec();
    let stride = [side * side, side, 1];
    for (mode, &lambda) in lambdas.iter().enumerate() {
        if lambda.norm() == T::zero() {
            continue;
        }
        let d = displacement_matrix(lambda, side);
        let s = stride[mode];
        let mut next = vec![Complex::new(T::zero(), T::zero()); cur.len()];
        next.par_iter_mut().enumerate().for_each(|(idx, out)| {
            let m = (idx / s) % side;
            let base = idx - m * s;
            let mut acc = Complex::new(T::zero(), T::zero());
            for n in 0..side {
                acc = acc + d[m * side + n] * cur[base + n * s];
            }
            *out = acc;
        });
        cur = next;
    }
    cur
}

/// Seeded state built as the triple displacement of `|T₀⟩`.
///
/// The vacuum state and the displacements are evaluated on a wider working
/// cube and cropped to `trunc.cutoff`, so the kept amplitudes do not see the
/// truncation edge.
pub fn build_seeded_state_by_displacement<T: Real>(
    cfg: &CouplingConfig<T>,
    alpha: Complex<T>,
    trunc: Truncation<T>,
) -> Result<TriFockState<T>> {
    cfg.validate()?;
    let k = trunc.cutoff;
    let (tail, moment_bound) = seeded_tail(thermal_ratio(mode_populations(cfg).n1), alpha.norm_sqr(), k);
    check_tail(k, tail, trunc.max_tail)?;
    let lambdas = seed_displacements(cfg, alpha);
    let lmax = lambdas.iter().fold(T::zero(), |m, l| m.max(l.norm()));
    let margin = 20 + (lmax * lmax + lit::<T>(10.0) * lmax).ceil().to_usize().unwrap_or(0);
    let wide = k + margin;
    let vac = build_vacuum_state(cfg, Truncation::new(wide).max_tail(T::one()))?;
    let side_w = wide + 1;
    let displaced = displace_cube(&vac.to_dense(), side_w, lambdas);
    let side = k + 1;
    let mut amps = vec![Complex::new(T::zero(), T::zero()); side * side * side];
    for a in 0..side {
        for b in 0..side {
            for c in 0..side {
                amps[(a * side + b) * side + c] = displaced[(a * side_w + b) * side_w + c];
            }
        }
    }
    Ok(TriFockState {
        cutoff: k,
        storage: Storage::Dense(amps),
        tail_bound: tail,
        moment_bound,
    })
}

/// Density matrix over a subset of modes; basis index is mixed-radix in the
/// order the modes were kept, each digit in `0..=cutoff`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix<T> {
    side: usize,
    modes: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> DensityMatrix<T> {
    pub fn from_parts(side: usize, modes: usize, data: Vec<Complex<T>>) -> Self {
        let dim = side.pow(modes as u32);
        assert_eq!(data.len(), dim * dim);
        Self { side, modes, data }
    }

    pub fn dim(&self) -> usize {
        self.side.pow(self.modes as u32)
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    /// Photon-number levels per mode (`cutoff + 1`).
    pub fn side(&self) -> usize {
        self.side
    }

    pub fn index(&self, n: &[usize]) -> usize {
        n.iter().fold(0, |acc, &d| acc * self.side + d)
    }

    pub fn digits(&self, mut i: usize) -> Vec<usize> {
        let mut d = vec![0; self.modes];
        for slot in d.iter_mut().rev() {
            *slot = i % self.side;
            i /= self.side;
        }
        d
    }

    pub fn get(&self, i: usize, j: usize) -> Complex<T> {
        self.data[i * self.dim() + j]
    }

    pub fn entry(&self, row: &[usize], col: &[usize]) -> Complex<T> {
        self.get(self.index(row), self.index(col))
    }

    pub fn trace(&self) -> T {
        (0..self.dim()).map(|i| self.get(i, i).re).sum()
    }

    pub fn scale(&mut self, s: T) {
        for z in &mut self.data {
            *z = *z * s;
        }
    }

    /// Largest `|ρ_ij − conj(ρ_ji)|`.
    pub fn hermiticity_residual(&self) -> T {
        let d = self.dim();
        let mut r = T::zero();
        for i in 0..d {
            for j in 0..d {
                r = r.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        r
    }

    /// All eigenvalues; dense `O(dim³)`, intended for small truncations.
    pub fn eigenvalues(&self) -> Vec<T> {
        let d = self.dim();
        let re: Vec<T> = self.data.iter().map(|z| z.re).collect();
        let im: Vec<T> = self.data.iter().map(|z| z.im).collect();
        hermitian_eigenvalues(&re, &im, d)
    }

    /// `Σᵢ ρᵢᵢ f(digits(i))`.
    pub fn expect_diagonal(&self, f: impl Fn(&[usize]) -> T) -> T {
        (0..self.dim()).map(|i| self.get(i, i).re * f(&self.digits(i))).sum()
    }

    /// `⟨ψ|ρ|ψ⟩` for a vector given by its non-zero components.
    pub fn overlap(&self, psi: &[(usize, Complex<T>)]) -> Complex<T> {
        let mut acc = Complex::new(T::zero(), T::zero());
        for &(i, ci) in psi {
            for &(j, cj) in psi {
                acc = acc + ci.conj() * self.get(i, j) * cj;
            }
        }
        acc
    }

    fn expect(&self, ops: &[Ladder]) -> Complex<T> {
        // Tr(ρO) = Σₙ ⟨m|O|n⟩ ρ_{n m}
        let d = self.dim();
        let mut acc = Complex::new(T::zero(), T::zero());
        for col in 0..d {
            let digits = self.digits(col);
            let mut n = [0usize; 8];
            n[..self.modes].copy_from_slice(&digits);
            if let Some((m, coef)) = apply_ladder::<T, 8>(n, ops) {
                if m[..self.modes].iter().any(|&x| x >= self.side) {
                    continue;
                }
                acc = acc + self.get(col, self.index(&m[..self.modes])) * coef;
            }
        }
        acc
    }

    /// Mean photon number per kept mode.
    pub fn populations(&self) -> Vec<T> {
        (0..self.modes).map(|j| self.expect(&[raise(j), lower(j)]).re).collect()
    }

    /// Quadrature covariance of the kept modes in `(x…, p…)` ordering.
    pub fn covariance(&self) -> Vec<T> {
        LadderMoments::collect(self.modes, |ops| self.expect(ops)).covariance()
    }
}

/// Partial trace keeping `keep` (in the given order).
pub fn reduce<T: Real>(state: &TriFockState<T>, keep: &[Mode]) -> DensityMatrix<T> {
    reduce_weighted(state, keep, |_| T::one())
}

/// Weight and kept-mode amplitudes sharing one traced configuration.
type Group<T> = (T, Vec<(usize, Complex<T>)>);

/// `Tr_traced[|ψ⟩⟨ψ| W]` where `W` is diagonal on the traced modes with
/// weight `weight(n)` for basis state `n` (only traced digits should matter).
pub fn reduce_weighted<T: Real>(
    state: &TriFockState<T>,
    keep: &[Mode],
    weight: impl Fn([usize; 3]) -> T,
) -> DensityMatrix<T> {
    let side = state.cutoff + 1;
    let traced: Vec<usize> = Mode::ALL
        .iter()
        .filter(|m| !keep.contains(m))
        .map(|m| m.index())
        .collect();
    let mut groups: HashMap<usize, Group<T>> = HashMap::new();
    for (n, c) in state.nonzero() {
        let key = traced.iter().fold(0, |acc, &t| acc * side + n[t]);
        let row = keep.iter().fold(0, |acc, m| acc * side + n[m.index()]);
        groups
            .entry(key)
            .or_insert_with(|| (weight(n), Vec::new()))
            .1
            .push((row, c));
    }
    let dim = side.pow(keep.len() as u32);
    let mut data = vec![Complex::new(T::zero(), T::zero()); dim * dim];
    for (_, (w, entries)) in groups {
        if w == T::zero() {
            continue;
        }
        for &(i, ci) in &entries {
            for &(j, cj) in &entries {
                data[i * dim + j] = data[i * dim + j] + ci * cj.conj() * w;
            }
        }
    }
    DensityMatrix {
        side,
        modes: keep.len(),
        data,
    }
}

/// Writes the amplitude cube: little-endian `u32` cutoff, `u32` mode count
/// (3), then `(cutoff+1)³` pairs of `f64` (re, im) in row-major
/// `(n₁, n₂, n₃)` order.
pub fn write_dump<T: Real, W: Write>(state: &TriFockState<T>, mut w: W) -> Result<()> {
    w.write_all(&(state.cutoff as u32).to_le_bytes())?;
    w.write_all(&3u32.to_le_bytes())?;
    for c in state.to_dense() {
        w.write_all(&c.re.to_f64().unwrap_or(f64::NAN).to_le_bytes())?;
        w.write_all(&c.im.to_f64().unwrap_or(f64::NAN).to_le_bytes())?;
    }
    Ok(())
}

/// Contents of an amplitude dump.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeDump {
    pub cutoff: usize,
    pub modes: usize,
    pub amps: Vec<Complex<f64>>,
}

pub fn read_dump<R: Read>(mut r: R) -> Result<AmplitudeDump> {
    let mut word = [0u8; 4];
    r.read_exact(&mut word)?;
    let cutoff = u32::from_le_bytes(word) as usize;
    r.read_exact(&mut word)?;
    let modes = u32::from_le_bytes(word) as usize;
    let count = (cutoff + 1).pow(modes as u32);
    let mut amps = Vec::with_capacity(count);
    let mut buf = [0u8; 16];
    for _ in 0..count {
        r.read_exact(&mut buf)?;
        let re = f64::from_le_bytes(buf[..8].try_into().expect("8 bytes"));
        let im = f64::from_le_bytes(buf[8..].try_into().expect("8 bytes"));
        amps.push(Complex::new(re, im));
    }
    Ok(AmplitudeDump { cutoff, modes, amps })
}
