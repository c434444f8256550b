#![allow(dead_code)]

use num_complex::Complex64;
use rand::Rng;
use trimode::CouplingConfig;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Random trigonometric or hyperbolic configuration with complex couplings,
/// `N₂, N₃ > 0` and `N₁ ≤ max_n1`.
pub fn random_config<R: Rng>(rng: &mut R, max_n1: f64) -> CouplingConfig<f64> {
    loop {
        let hyperbolic = rng.gen_bool(0.25);
        let ratio = if hyperbolic {
            rng.gen_range(1.05..2.5)
        } else {
            rng.gen_range(0.05..0.95)
        };
        let scale = rng.gen_range(0.3..3.0);
        let g1 = Complex64::from_polar(ratio * scale, rng.gen_range(-3.1..3.1));
        let g2 = Complex64::from_polar(scale, rng.gen_range(-3.1..3.1));
        let omega = (g2.norm_sqr() - g1.norm_sqr()).abs().sqrt();
        let angle = if hyperbolic {
            rng.gen_range(0.05..1.5)
        } else {
            rng.gen_range(0.05..6.2)
        };
        let cfg = CouplingConfig::new(g1, g2, angle / omega).unwrap();
        let p = trimode::dynamics::mode_populations(&cfg);
        if p.n1 <= max_n1 && p.n2 > 1e-6 && p.n3 > 1e-6 {
            return cfg;
        }
    }
}

/// Real couplings with `γ₂ = 1` producing the requested `N₂, N₃`
/// (trigonometric regime, requires `4N₂ > N₃²`).
pub fn config_for_populations(n2: f64, n3: f64) -> CouplingConfig<f64> {
    assert!(4.0 * n2 > n3 * n3, "populations outside the trigonometric regime");
    let n1 = n2 + n3;
    let b = (2.0 * (1.0 + n1).sqrt() - 2.0 - n3) / n2;
    let ratio = (1.0 - b).sqrt();
    let angle = 2.0 * (b * n2 / n3).sqrt().atan();
    CouplingConfig::from_reduced(ratio, angle).unwrap()
}

/// `dψ/dt = −iHψ` by classic RK4 with `steps` equal steps.
pub fn rk4(psi: &mut [Complex64], t: f64, steps: usize, apply_h: impl Fn(&[Complex64], &mut [Complex64])) {
    let dt = t / steps as f64;
    let n = psi.len();
    let minus_i = c(0.0, -1.0);
    let deriv = |x: &[Complex64], out: &mut [Complex64]| {
        out.iter_mut().for_each(|v| *v = c(0.0, 0.0));
        apply_h(x, out);
        out.iter_mut().for_each(|v| *v *= minus_i);
    };
    let (mut k1, mut k2, mut k3, mut k4) = (
        vec![c(0.0, 0.0); n],
        vec![c(0.0, 0.0); n],
        vec![c(0.0, 0.0); n],
        vec![c(0.0, 0.0); n],
    );
    let mut tmp = vec![c(0.0, 0.0); n];
    for _ in 0..steps {
        deriv(psi, &mut k1);
        for i in 0..n {
            tmp[i] = psi[i] + k1[i] * (dt / 2.0);
        }
        deriv(&tmp, &mut k2);
        for i in 0..n {
            tmp[i] = psi[i] + k2[i] * (dt / 2.0);
        }
        deriv(&tmp, &mut k3);
        for i in 0..n {
            tmp[i] = psi[i] + k3[i] * dt;
        }
        deriv(&tmp, &mut k4);
        for i in 0..n {
            psi[i] += (k1[i] + k2[i] * 2.0 + k3[i] * 2.0 + k4[i]) * (dt / 6.0);
        }
    }
}

/// `H = γ₁a₁†a₃† + γ₂a₂†a₃ + h.c.` on the full cube of side `side`.
pub fn apply_h_cube(g1: Complex64, g2: Complex64, side: usize) -> impl Fn(&[Complex64], &mut [Complex64]) {
    move |x, out| {
        let idx = |a: usize, b: usize, cc: usize| (a * side + b) * side + cc;
        for n1 in 0..side {
            for n2 in 0..side {
                for n3 in 0..side {
                    let v = x[idx(n1, n2, n3)];
                    if v == c(0.0, 0.0) {
                        continue;
                    }
                    let s = |k: usize| (k as f64).sqrt();
                    if n1 + 1 < side && n3 + 1 < side {
                        out[idx(n1 + 1, n2, n3 + 1)] += g1 * v * s(n1 + 1) * s(n3 + 1);
                    }
                    if n1 > 0 && n3 > 0 {
                        out[idx(n1 - 1, n2, n3 - 1)] += g1.conj() * v * s(n1) * s(n3);
                    }
                    if n2 + 1 < side && n3 > 0 {
                        out[idx(n1, n2 + 1, n3 - 1)] += g2 * v * s(n2 + 1) * s(n3);
                    }
                    if n2 > 0 && n3 + 1 < side {
                        out[idx(n1, n2 - 1, n3 + 1)] += g2.conj() * v * s(n2) * s(n3 + 1);
                    }
                }
            }
        }
    }
}

pub fn ln_fact(n: usize) -> f64 {
    (1..=n).map(|k| (k as f64).ln()).sum()
}
