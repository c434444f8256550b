mod common;

use common::c;
use num_complex::Complex64;
use trimode::dynamics::{optimal_symmetric_ratio, symmetric_point};
use trimode::telecloning::{
    asymmetric_frontier, clone_fidelities, conditional_amplitudes, corrected_clone_amplitudes, mc_teleclone,
    outcome_sampler, symmetric_fidelity, OutcomeSampler, TeleclonePlan,
};
use trimode::CouplingConfig;

fn optimal() -> CouplingConfig<f64> {
    symmetric_point(optimal_symmetric_ratio::<f64>())
        .unwrap()
        .config()
        .unwrap()
}

/// `∫ d²β P(β) exp(−|c(β) − z|²)` with `c = zκ + β̄(κ−1)`, by polar quadrature
/// around the outcome centre `−z̄`.
fn quadrature_fidelity(kappa: f64, n1: f64, z: Complex64) -> f64 {
    let var = 1.0 + n1;
    let radius = 12.0 * var.sqrt();
    let (nr, nt) = (4000, 64);
    let h = radius / nr as f64;
    let mut total = 0.0;
    for i in 0..=nr {
        let r = i as f64 * h;
        let w = if i == 0 || i == nr {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        let mut ring = 0.0;
        for j in 0..nt {
            let theta = 2.0 * std::f64::consts::PI * j as f64 / nt as f64;
            let beta = -z.conj() + Complex64::from_polar(r, theta);
            let clone = z * kappa + beta.conj() * (kappa - 1.0);
            ring += (-(clone - z).norm_sqr()).exp();
        }
        ring *= 2.0 * std::f64::consts::PI / nt as f64;
        total += w * r * ring * (-r * r / var).exp() / (std::f64::consts::PI * var);
    }
    total * h / 3.0
}

#[test]
fn closed_form_matches_quadrature() {
    for (n2, n3) in [(0.5, 0.5), (1.0, 0.25), (0.2, 0.9), (3.0, 0.1)] {
        let plan = TeleclonePlan::from_populations(n2, n3).unwrap();
        let (f2, f3) = clone_fidelities(n2, n3).unwrap();
        for z in [c(0.0, 0.0), c(1.5, -0.7)] {
            assert!((quadrature_fidelity(plan.kappa2, plan.n1, z) - f2).abs() < 1e-9);
            assert!((quadrature_fidelity(plan.kappa3, plan.n1, z) - f3).abs() < 1e-9);
        }
    }
}

#[test]
fn frontier_matches_numeric_maximization() {
    // For fixed F₃, maximize F₂ over N₂; N₃ is found by bisection on F₃(N₂, N₃) = target.
    let solve_n3 = |n2: f64, target: f64| -> Option<f64> {
        let f3 = |n3: f64| clone_fidelities(n2, n3).unwrap().1;
        let (mut lo, mut hi) = (0.0f64, 50.0f64);
        // F₃ rises then falls in N₃; search the rising branch up to its peak.
        let mut peak = lo;
        let mut best = f3(lo);
        for i in 1..=5000 {
            let x = hi * i as f64 / 5000.0;
            if f3(x) > best {
                best = f3(x);
                peak = x;
            }
        }
        if best < target {
            return None;
        }
        hi = peak;
        if f3(lo) > target {
            return None;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f3(mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Some(0.5 * (lo + hi))
    };
    for target in [0.55, 0.6, 0.65] {
        let mut best = 0.0f64;
        for i in 1..4000 {
            let n2 = 4.0 * i as f64 / 4000.0;
            if let Some(n3) = solve_n3(n2, target) {
                best = best.max(clone_fidelities(n2, n3).unwrap().0);
            }
        }
        let p = asymmetric_frontier(target).unwrap();
        assert!((best - p.f2).abs() < 1e-5, "target {target}: {best} vs {}", p.f2);
        let (f2, f3) = clone_fidelities(p.n2, p.n3).unwrap();
        assert!((f2 - p.f2).abs() < 1e-12 && (f3 - target).abs() < 1e-12);
    }
}

#[test]
fn classical_bound_window() {
    assert_eq!(symmetric_fidelity(0.0f64), 0.5);
    assert!((symmetric_fidelity(4.0f64) - 0.5).abs() < 1e-15);
    for n in [0.1, 1.0, 3.9] {
        assert!(symmetric_fidelity(n) > 0.5);
    }
    assert!(symmetric_fidelity(5.0f64) < 0.5);
    assert!((symmetric_fidelity(0.5f64) - 2.0 / 3.0).abs() < 1e-15);
}

#[test]
fn sampler_moments() {
    let z = c(0.4, 1.1);
    let n1 = 1.0;
    let n = 100_000;
    let samples: Vec<Complex64> = outcome_sampler(z, n1, 3).take(n).collect();
    let mean = samples.iter().sum::<Complex64>() / n as f64;
    let sigma = ((1.0 + n1) / 2.0f64).sqrt();
    let se = sigma / (n as f64).sqrt();
    assert!((mean.re + z.re).abs() < 4.0 * se && (mean.im - z.im).abs() < 4.0 * se);
    let var: f64 = samples.iter().map(|b| (b - mean).norm_sqr()).sum::<f64>() / (n - 1) as f64;
    assert!((var - (1.0 + n1)).abs() < 0.03);
    let unit: Vec<Complex64> = outcome_sampler(c(0.0, 0.0), 0.0, 9).take(n).collect();
    let v: f64 = unit.iter().map(|b| b.norm_sqr()).sum::<f64>() / n as f64;
    assert!((v - 1.0).abs() < 0.02);
}

#[test]
fn sampler_streams_differ() {
    let a: Vec<_> = OutcomeSampler::new(c(0.0, 0.0), 0.5f64, 1, 0).take(4).collect();
    let b: Vec<_> = OutcomeSampler::new(c(0.0, 0.0), 0.5f64, 1, 1).take(4).collect();
    assert_ne!(a, b);
}

#[test]
fn mc_matches_closed_form_for_several_inputs() {
    let cfg = CouplingConfig::from_reduced(0.4, 1.2).unwrap();
    let p = trimode::dynamics::mode_populations(&cfg);
    let (f2, f3) = clone_fidelities(p.n2, p.n3).unwrap();
    for (i, z) in [c(0.0, 0.0), c(2.0, 1.0), c(5.0, 3.0), c(-1.0, 0.5), c(0.0, -4.0)]
        .into_iter()
        .enumerate()
    {
        let r = mc_teleclone(z, &cfg, None, 100_000, 100 + i as u64).unwrap();
        assert!((r.f2 - f2).abs() < 4.0 * r.stderr2.unwrap(), "{z}: {} vs {f2}", r.f2);
        assert!((r.f3 - f3).abs() < 4.0 * r.stderr3.unwrap(), "{z}: {} vs {f3}", r.f3);
    }
}

#[test]
fn mc_at_optimal_point() {
    let r = mc_teleclone(c(2.0, 1.0), &optimal(), None, 100_000, 1).unwrap();
    assert!((r.f2 - 2.0 / 3.0).abs() < 0.005 && (r.f3 - 2.0 / 3.0).abs() < 0.005);
    assert_eq!(r.samples, Some(100_000));
    assert_eq!(r.seed, Some(1));
}

#[test]
fn seeded_with_zero_alpha_reduces_to_unseeded() {
    let cfg = optimal();
    let plain = TeleclonePlan::new(&cfg, None).unwrap();
    let seeded = TeleclonePlan::new(&cfg, Some(c(0.0, 0.0))).unwrap();
    let (z, beta) = (c(0.3, 0.9), c(-1.2, 0.4));
    let a = conditional_amplitudes(z, beta, &plain);
    let b = conditional_amplitudes(z, beta, &seeded);
    assert!((a[0] - b[0]).norm() < 1e-15 && (a[1] - b[1]).norm() < 1e-15);
}

#[test]
fn seeded_correction_reproduces_unseeded_clones() {
    let cfg = CouplingConfig::from_reduced(0.6, 1.1).unwrap();
    let plain = TeleclonePlan::new(&cfg, None).unwrap();
    let mut x = 0.37f64;
    let mut next = || {
        x = (x * 9301.0 + 49297.0) % 233280.0 / 233280.0 * 6.0 - 3.0;
        x
    };
    for _ in 0..100 {
        let z = c(next(), next());
        let alpha = c(next(), next());
        let beta = c(next(), next());
        let seeded = TeleclonePlan::new(&cfg, Some(alpha)).unwrap();
        let shift = seeded.outcome_center(z) - plain.outcome_center(z);
        let s = corrected_clone_amplitudes(z, beta, &seeded);
        let u = corrected_clone_amplitudes(z, beta - shift, &plain);
        assert!((s[0] - u[0]).norm() < 1e-12 && (s[1] - u[1]).norm() < 1e-12);
    }
}

#[test]
fn literal_seeded_correction_loses_fidelity() {
    // Displacing by β̄ − κⱼ·conj(αf₁) − conj(αfⱼ) leaves an offset of
    // (κⱼ − 1)·conj(αf₁) in every clone.
    let cfg = optimal();
    let alpha = c(1.0, 1.0);
    let plan = TeleclonePlan::new(&cfg, Some(alpha)).unwrap();
    let f = plan.f_coeffs.unwrap();
    let z = c(0.5, -0.2);
    let n = 100_000;
    let center = plan.outcome_center(z);
    let (mut lit_sum, mut fixed_sum) = (0.0, 0.0);
    for beta in OutcomeSampler::new(center, plan.n1, 4, 0).take(n) {
        let zeta = conditional_amplitudes(z, beta, &plan);
        let shift = beta.conj() - (alpha * f[0]).conj() * plan.kappa2 - (alpha * f[1]).conj();
        lit_sum += (-(zeta[0] - shift - z).norm_sqr()).exp();
        let fixed = corrected_clone_amplitudes(z, beta, &plan);
        fixed_sum += (-(fixed[0] - z).norm_sqr()).exp();
    }
    let (lit, fixed) = (lit_sum / n as f64, fixed_sum / n as f64);
    let k = plan.kappa2;
    let offset = ((1.0 - k) * (alpha * f[0]).norm()).powi(2);
    let spread = 1.0 + (1.0 - k).powi(2) * (1.0 + plan.n1);
    let expect_lit = (-offset / spread).exp() / spread;
    assert!((fixed - 2.0 / 3.0).abs() < 0.005);
    assert!((lit - expect_lit).abs() < 0.005, "{lit} vs {expect_lit}");
    assert!(lit < fixed - 0.05);
}

#[test]
fn seeded_mc_matches_unseeded() {
    let cfg = optimal();
    let z = c(2.0, 1.0);
    let a = mc_teleclone(z, &cfg, None, 100_000, 21).unwrap();
    let b = mc_teleclone(z, &cfg, Some(c(1.0, 1.0)), 100_000, 22).unwrap();
    let gap = 4.0 * (a.stderr2.unwrap() + b.stderr2.unwrap());
    assert!((a.f2 - b.f2).abs() < gap && (a.f3 - b.f3).abs() < gap);
}

#[test]
fn mc_independent_of_thread_count() {
    let cfg = optimal();
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| mc_teleclone(c(1.0, 0.0), &cfg, None, 50_000, 77).unwrap())
    };
    assert_eq!(run(1), run(4));
}

#[test]
fn single_precision_fidelities() {
    let (a, b) = clone_fidelities(0.5f32, 0.5).unwrap();
    assert!((a - 2.0 / 3.0).abs() < 1e-6 && (b - 2.0 / 3.0).abs() < 1e-6);
    let p = asymmetric_frontier(0.6f32).unwrap();
    assert!((p.f2 - 8.0 / 11.0).abs() < 1e-6);
}
