//! Covariance-matrix description of the evolved three-mode state and the
//! partial-transpose inseparability test.
//!
//! Quadratures are `x = a + a†`, `p = −i(a − a†)` so the vacuum covariance is
//! the identity, and the phase-space ordering is `(x₁, x₂, x₃, p₁, p₂, p₃)`.
//! Displacement arguments relate to phase-space points through
//! `λⱼ = (pⱼ − i xⱼ)/√2`, which makes `χ(λ) = exp(−¼ xᵀ C x)`.

use num_complex::Complex;
use serde::Serialize;

use crate::dynamics::{heisenberg_coefficients, CouplingConfig, ModeCoefficients};
use crate::linalg::hermitian_eigenvalues;
use crate::scalar::{cplx, lit, Real};

/// Relative scale of the default inseparability tolerance.
pub const DEFAULT_PPT_TOLERANCE: f64 = 1e-9;

/// 6×6 real symmetric covariance matrix over `(x₁, x₂, x₃, p₁, p₂, p₃)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Covariance6<T> {
    pub c: [[T; 6]; 6],
}

impl<T: Real> Covariance6<T> {
    pub fn identity() -> Self {
        let mut c = [[T::zero(); 6]; 6];
        for (i, row) in c.iter_mut().enumerate() {
            row[i] = T::one();
        }
        Self { c }
    }

    pub fn from_rows(c: [[T; 6]; 6]) -> Self {
        Self { c }
    }

    pub fn to_vec(&self) -> Vec<T> {
        self.c.iter().flatten().copied().collect()
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> T {
        self.c.iter().flatten().fold(T::zero(), |m, x| m.max(x.abs()))
    }

    /// Largest `|C_ij − C_ji|`.
    pub fn symmetry_residual(&self) -> T {
        let mut r = T::zero();
        for i in 0..6 {
            for j in 0..6 {
                r = r.max((self.c[i][j] - self.c[j][i]).abs());
            }
        }
        r
    }

    /// Smallest eigenvalue of `C + iJ`; non-negative for a physical state.
    pub fn uncertainty_min_eigenvalue(&self) -> T {
        partial_transpose_min_eigenvalue(&self.to_vec(), 3, None)
    }

    /// Largest entry-wise difference to another covariance matrix.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        let mut r = T::zero();
        for i in 0..6 {
            for j in 0..6 {
                r = r.max((self.c[i][j] - other.c[i][j]).abs());
            }
        }
        r
    }
}

/// Heisenberg-transformed displacement arguments `λ′` such that
/// `χ(λ) = exp(−½ Σ|λ′ⱼ|²)`.
pub fn transformed_arguments<T: Real>(k: &ModeCoefficients<T>, lambdas: [Complex<T>; 3]) -> [Complex<T>; 3] {
    let [l1, l2, l3] = lambdas;
    let (f, g, h) = (&k.f, &k.g, &k.h);
    [
        f[0] * l1 - g[0] * l2.conj() - h[0] * l3.conj(),
        -(f[1].conj() * l1.conj()) + g[1].conj() * l2 + h[1].conj() * l3,
        -(f[2].conj() * l1.conj()) + g[2].conj() * l2 + h[2].conj() * l3,
    ]
}

/// Phase-space point `(x, p)` corresponding to displacement arguments.
pub fn phase_space_point<T: Real>(lambdas: [Complex<T>; 3]) -> [T; 6] {
    let s2 = lit::<T>(2.0).sqrt();
    let mut x = [T::zero(); 6];
    for j in 0..3 {
        x[j] = -s2 * lambdas[j].im;
        x[j + 3] = s2 * lambdas[j].re;
    }
    x
}

fn lambdas_from_point<T: Real>(x: &[T; 6]) -> [Complex<T>; 3] {
    let s2 = lit::<T>(2.0).sqrt();
    let mk = |j: usize| cplx(x[j + 3] / s2, -x[j] / s2);
    [mk(0), mk(1), mk(2)]
}

/// Covariance matrix reconstructed from the transformed arguments.
///
/// `λ′` is real-linear in `x`, so with `L` the real 6×6 matrix mapping `x` to
/// `(Re λ′, Im λ′)` the quadratic form `Σ|λ′|²` is `xᵀLᵀLx` and `C = 2LᵀL`.
pub fn covariance_from_coefficients<T: Real>(k: &ModeCoefficients<T>) -> Covariance6<T> {
    let mut l = [[T::zero(); 6]; 6];
    for col in 0..6 {
        let mut e = [T::zero(); 6];
        e[col] = T::one();
        let mu = transformed_arguments(k, lambdas_from_point(&e));
        for j in 0..3 {
            l[j][col] = mu[j].re;
            l[j + 3][col] = mu[j].im;
        }
    }
    let two = lit::<T>(2.0);
    let mut c = [[T::zero(); 6]; 6];
    for i in 0..6 {
        for j in i..6 {
            let s: T = (0..6).map(|r| l[r][i] * l[r][j]).sum();
            c[i][j] = two * s;
            c[j][i] = two * s;
        }
    }
    Covariance6 { c }
}

/// Covariance matrix of the state evolved from the vacuum.
pub fn covariance_from_couplings<T: Real>(cfg: &CouplingConfig<T>) -> Covariance6<T> {
    covariance_from_coefficients(&heisenberg_coefficients(cfg))
}

/// `χ(λ₁, λ₂, λ₃) = exp(−¼ xᵀ C x)`.
pub fn characteristic_function<T: Real>(cov: &Covariance6<T>, lambdas: [Complex<T>; 3]) -> Complex<T> {
    let x = phase_space_point(lambdas);
    let mut q = T::zero();
    for i in 0..6 {
        for j in 0..6 {
            q = q + x[i] * cov.c[i][j] * x[j];
        }
    }
    cplx((-q / lit(4.0)).exp(), T::zero())
}

/// `χ` through the transformed arguments, `exp(−½ Σ|λ′ⱼ|²)`.
pub fn characteristic_function_heisenberg<T: Real>(k: &ModeCoefficients<T>, lambdas: [Complex<T>; 3]) -> Complex<T> {
    let mu = transformed_arguments(k, lambdas);
    let s: T = mu.iter().map(|m| m.norm_sqr()).sum();
    cplx((-s / lit(2.0)).exp(), T::zero())
}

/// Smallest eigenvalue of `ΛCΛ − iJ` for an `n`-mode covariance matrix in
/// `(x…, p…)` ordering, where `Λ` flips the sign of `p_flip` (mode index from
/// zero). With `flip = None` this is the physicality test `C − iJ ≥ 0`, whose
/// spectrum equals that of `C + iJ`.
pub fn partial_transpose_min_eigenvalue<T: Real>(cov: &[T], modes: usize, flip: Option<usize>) -> T {
    let n = 2 * modes;
    assert_eq!(cov.len(), n * n, "covariance must be {n}x{n}");
    let sign = |i: usize| match flip {
        Some(m) if i == modes + m => -T::one(),
        _ => T::one(),
    };
    let mut re = vec![T::zero(); n * n];
    let mut im = vec![T::zero(); n * n];
    for i in 0..n {
        for j in 0..n {
            re[i * n + j] = sign(i) * cov[i * n + j] * sign(j);
        }
    }
    // −iJ with J = [[0, −I], [I, 0]]
    for m in 0..modes {
        im[m * n + (modes + m)] = T::one();
        im[(modes + m) * n + m] = -T::one();
    }
    hermitian_eigenvalues(&re, &im, n)[0]
}

/// Outcome of the three partial-transpose tests.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PptReport<T> {
    /// Minimum eigenvalue of `Γⱼ = ΛⱼCΛⱼ − iJ` for `j = 1, 2, 3`.
    pub min_eig: [T; 3],
    /// True when every `Γⱼ` has an eigenvalue below `−tol`.
    pub fully_inseparable: bool,
    pub tol: T,
}

impl<T: Real> PptReport<T> {
    /// Which single-mode cuts are certified entangled.
    pub fn entangled_cuts(&self) -> [bool; 3] {
        self.min_eig.map(|e| e < -self.tol)
    }
}

/// Default tolerance: `1e−9` times the largest covariance entry.
pub fn default_tolerance<T: Real>(cov: &Covariance6<T>) -> T {
    lit::<T>(DEFAULT_PPT_TOLERANCE) * cov.max_abs()
}

pub fn ppt_test<T: Real>(cov: &Covariance6<T>, tol: T) -> PptReport<T> {
    let v = cov.to_vec();
    let min_eig = [0, 1, 2].map(|j| partial_transpose_min_eigenvalue(&v, 3, Some(j)));
    PptReport {
        min_eig,
        fully_inseparable: min_eig.iter().all(|&e| e < -tol),
        tol,
    }
}
