//! Independent numerical oracles for the closed forms.

mod common;

use common::{apply_h_cube, c, config_for_populations, ln_fact, random_config, rk4};
use nalgebra::{DMatrix, Matrix3};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use trimode::dynamics::{
    backward_coefficients, heisenberg_coefficients, mode_populations, seeded_populations, symmetric_point,
};
use trimode::fock::{
    build_seeded_state, build_seeded_state_by_displacement, build_vacuum_state, mode_means, moments, seed_displacements,
};
use trimode::gaussian::{
    characteristic_function, characteristic_function_heisenberg, covariance_from_coefficients,
    partial_transpose_min_eigenvalue,
};
use trimode::{CouplingConfig, Truncation};

/// `v̇ = Mv` for `v = (a₁†, a₂, a₃)`, from `ȧ = i[H, a]`.
fn generator(g1: Complex64, g2: Complex64) -> Matrix3<Complex64> {
    let i = c(0.0, 1.0);
    let z = c(0.0, 0.0);
    Matrix3::new(z, z, i * g1.conj(), z, z, -i * g2, -i * g1, -i * g2.conj(), z)
}

#[test]
fn coefficients_match_matrix_exponential() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..200 {
        let cfg = random_config(&mut rng, 50.0);
        let e = (generator(cfg.gamma1, cfg.gamma2) * c(cfg.t, 0.0)).exp();
        let k = heisenberg_coefficients(&cfg);
        let scale = e.iter().fold(1.0f64, |m, x| m.max(x.norm()));
        for j in 0..3 {
            assert!((e[(0, j)] - k.f[j]).norm() < 1e-10 * scale, "f{j} {cfg:?}");
            assert!((e[(1, j)] - k.g[j]).norm() < 1e-10 * scale, "g{j} {cfg:?}");
            assert!((e[(2, j)] - k.h[j]).norm() < 1e-10 * scale, "h{j} {cfg:?}");
        }
    }
}

#[test]
fn degenerate_regime_matches_matrix_exponential() {
    let cfg = CouplingConfig::new(c(0.6, 0.8), c(1.0, 0.0), 1.7).unwrap();
    let e = (generator(cfg.gamma1, cfg.gamma2) * c(cfg.t, 0.0)).exp();
    let k = heisenberg_coefficients(&cfg);
    for j in 0..3 {
        assert!((e[(0, j)] - k.f[j]).norm() < 1e-12);
        assert!((e[(1, j)] - k.g[j]).norm() < 1e-12);
        assert!((e[(2, j)] - k.h[j]).norm() < 1e-12);
    }
}

#[test]
fn backward_coefficients_invert_forward() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..50 {
        let cfg = random_config(&mut rng, 5.0);
        let fwd = heisenberg_coefficients(&cfg);
        let back = backward_coefficients(&cfg);
        let m = |k: &trimode::ModeCoefficients<f64>| {
            Matrix3::from_rows(&[k.f, k.g, k.h].map(|r: [Complex64; 3]| nalgebra::RowVector3::new(r[0], r[1], r[2])))
        };
        let prod = m(&fwd) * m(&back);
        assert!((prod - Matrix3::identity()).norm() < 1e-10);
    }
}

#[test]
fn regimes_join_continuously() {
    let t = 1.3;
    let at = |r: f64| heisenberg_coefficients(&CouplingConfig::new(c(r, 0.0), c(1.0, 0.0), t).unwrap());
    let mid = at(1.0);
    for eps in [1e-6, -1e-6, 1e-9, -1e-9] {
        let k = at(1.0 + eps);
        for j in 0..3 {
            assert!((k.f[j] - mid.f[j]).norm() < 1e-5);
            assert!((k.g[j] - mid.g[j]).norm() < 1e-5);
            assert!((k.h[j] - mid.h[j]).norm() < 1e-5);
        }
    }
}

#[test]
fn vacuum_state_matches_schrodinger_integration() {
    for (ratio, angle) in [(0.5, 1.0), (0.3, 2.5), (0.8, 0.6)] {
        let cfg = CouplingConfig::from_reduced(ratio, angle).unwrap();
        let g1 = c(0.0, 0.7) * ratio;
        let g2 = Complex64::from_polar(1.0, -0.4);
        let cfg = CouplingConfig::new(g1, g2, cfg.t).unwrap();
        assert!(mode_populations(&cfg).n1 < 0.6);
        let side = 22;
        let mut psi = vec![c(0.0, 0.0); side * side * side];
        psi[0] = c(1.0, 0.0);
        rk4(&mut psi, cfg.t, 4000, apply_h_cube(g1, g2, side));
        let state = build_vacuum_state(&cfg, Truncation::new(side - 1)).unwrap();
        let mut err = 0.0f64;
        for (n, amp) in state.nonzero() {
            if n[0] < 14 {
                err = err.max((psi[(n[0] * side + n[1]) * side + n[2]] - amp).norm());
            }
        }
        let outside: f64 = (0..psi.len())
            .filter(|&i| i / (side * side) != (i / side) % side + i % side)
            .map(|i| psi[i].norm())
            .fold(0.0, f64::max);
        assert!(outside < 1e-12, "population left the n1 = n2 + n3 sector");
        assert!(err < 1e-8, "ratio {ratio}: max amplitude error {err}");
    }
}

#[test]
fn seeded_state_matches_schrodinger_integration() {
    let g1 = c(0.4, 0.2);
    let g2 = Complex64::from_polar(1.0, 0.9);
    let cfg = CouplingConfig::new(g1, g2, 0.8).unwrap();
    let alpha = c(0.6, -0.3);
    let side = 18;
    let mut psi = vec![c(0.0, 0.0); side * side * side];
    for n in 0..side {
        let mag = (-alpha.norm_sqr() / 2.0 + n as f64 * alpha.norm().ln() - 0.5 * ln_fact(n)).exp();
        psi[n * side * side] = Complex64::from_polar(mag, n as f64 * alpha.arg());
    }
    rk4(&mut psi, cfg.t, 3000, apply_h_cube(g1, g2, side));
    let state = build_seeded_state(&cfg, alpha, Truncation::new(side - 1).max_tail(1.0)).unwrap();
    // Compare away from the truncation edge, where the cube evolution is exact.
    let keep = 10;
    let mut err = 0.0f64;
    for a in 0..keep {
        for b in 0..keep {
            for d in 0..keep {
                err = err.max((psi[(a * side + b) * side + d] - state.amp([a, b, d])).norm());
            }
        }
    }
    assert!(err < 1e-7, "max amplitude error {err}");
}

#[test]
fn seeded_expansion_equals_displaced_vacuum() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for alpha in [c(0.5, 0.0), c(-0.3, 0.8), c(1.0, 1.0)] {
        let cfg = random_config(&mut rng, 0.8);
        let trunc = Truncation::new(16).max_tail(1.0);
        let a = build_seeded_state(&cfg, alpha, trunc).unwrap().to_dense();
        let b = build_seeded_state_by_displacement(&cfg, alpha, trunc)
            .unwrap()
            .to_dense();
        let err = a.iter().zip(&b).fold(0.0f64, |m, (x, y)| m.max((x - y).norm()));
        assert!(err < 1e-8, "alpha {alpha}: {err}");
    }
}

#[test]
fn seed_displacements_are_heisenberg_means() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..20 {
        let cfg = random_config(&mut rng, 3.0);
        let alpha = c(0.7, -1.2);
        let k = heisenberg_coefficients(&cfg);
        let d = seed_displacements(&cfg, alpha);
        let expect = [k.f[0].conj() * alpha, k.g[0] * alpha.conj(), k.h[0] * alpha.conj()];
        for j in 0..3 {
            assert!((d[j] - expect[j]).norm() < 1e-10);
        }
    }
}

#[test]
fn seeded_state_moments_match_closed_forms() {
    let cfg = CouplingConfig::from_reduced(0.5, 0.9).unwrap();
    let alpha = c(0.8, 0.4);
    let state = build_seeded_state(&cfg, alpha, Truncation::auto_seeded(&cfg, alpha)).unwrap();
    let (pops, _) = moments(&state);
    let expect = seeded_populations(&cfg, alpha);
    let tol = state.moment_bound().max(1e-9);
    assert!((pops.n1 - expect.n1).abs() < tol);
    assert!((pops.n2 - expect.n2).abs() < tol);
    assert!((pops.n3 - expect.n3).abs() < tol);
    assert!((pops.delta() - alpha.norm_sqr()).abs() < 10.0 * tol);
    let means = mode_means(&state);
    let d = seed_displacements(&cfg, alpha);
    for j in 0..3 {
        assert!((means[j] - d[j]).norm() < 1e-6);
    }
}

#[test]
fn vacuum_moments_match_closed_forms() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..10 {
        let cfg = random_config(&mut rng, 2.0);
        let state = build_vacuum_state(&cfg, Truncation::new(40)).unwrap();
        let (pops, cov) = moments(&state);
        let expect = mode_populations(&cfg);
        let analytic = covariance_from_coefficients(&heisenberg_coefficients(&cfg));
        assert!(state.moment_bound() < 1e-5);
        let tol = state.moment_bound() + 1e-12;
        assert!(
            (pops.n1 - expect.n1).abs() <= tol,
            "{} vs {} (tol {tol})",
            pops.n1,
            expect.n1
        );
        assert!((pops.n2 - expect.n2).abs() <= tol);
        assert!(cov.max_abs_diff(&analytic) <= tol, "{}", cov.max_abs_diff(&analytic));
    }
}

#[test]
fn characteristic_function_routes_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..50 {
        let cfg = random_config(&mut rng, 3.0);
        let k = heisenberg_coefficients(&cfg);
        let cov = covariance_from_coefficients(&k);
        let l = [c(0.3, -0.2), c(-0.1, 0.4), c(0.25, 0.05)];
        let a = characteristic_function(&cov, l);
        let b = characteristic_function_heisenberg(&k, l);
        assert!((a - b).norm() < 1e-12);
    }
}

#[test]
fn covariance_matches_ladder_formula() {
    // C_{x₁x₁} = 1 + 2N₁ and C_{x₁x₂} = 2 Re(⟨a₁a₂⟩ + c.c.)/… checked via explicit moments.
    let cfg = CouplingConfig::new(c(0.5, 0.5), c(1.2, -0.3), 0.9).unwrap();
    let k = heisenberg_coefficients(&cfg);
    let cov = covariance_from_coefficients(&k);
    let p = mode_populations(&cfg);
    for (j, n) in p.as_array().iter().enumerate() {
        assert!((cov.c[j][j] - (1.0 + 2.0 * n)).abs() < 1e-12);
        assert!((cov.c[j + 3][j + 3] - (1.0 + 2.0 * n)).abs() < 1e-12);
    }
    // ⟨a₁a₂⟩ = f̄₁g₁ for the vacuum (a₁ = f̄₁a₁ + …, a₂ = g₁a₁† + …).
    let a1a2 = k.f[0].conj() * k.g[0];
    assert!((cov.c[0][1] - 2.0 * a1a2.re).abs() < 1e-12);
    assert!((cov.c[3][4] + 2.0 * a1a2.re).abs() < 1e-12);
}

fn gamma_matrix(cov: &[f64], flip: Option<usize>) -> DMatrix<Complex64> {
    let sign = |i: usize| if flip.map(|m| m + 3) == Some(i) { -1.0 } else { 1.0 };
    let mut g = DMatrix::from_fn(6, 6, |i, j| c(sign(i) * cov[i * 6 + j] * sign(j), 0.0));
    for m in 0..3 {
        g[(m, m + 3)] += c(0.0, 1.0);
        g[(m + 3, m)] -= c(0.0, 1.0);
    }
    g
}

#[test]
fn partial_transpose_eigenvalues_match_nalgebra() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..30 {
        let cfg = random_config(&mut rng, 2.0);
        let cov = covariance_from_coefficients(&heisenberg_coefficients(&cfg)).to_vec();
        for flip in [None, Some(0), Some(1), Some(2)] {
            let ours = partial_transpose_min_eigenvalue(&cov, 3, flip);
            let eig = gamma_matrix(&cov, flip).symmetric_eigenvalues();
            let theirs = eig.iter().cloned().fold(f64::INFINITY, f64::min);
            assert!((ours - theirs).abs() < 1e-10, "{flip:?}: {ours} vs {theirs}");
        }
    }
}

#[test]
fn inverse_iteration_confirms_negative_eigenvalue() {
    let cfg = CouplingConfig::from_reduced(0.5, 1.0).unwrap();
    let cov = covariance_from_coefficients(&heisenberg_coefficients(&cfg)).to_vec();
    for j in 0..3 {
        let lambda = partial_transpose_min_eigenvalue(&cov, 3, Some(j));
        assert!(lambda < 0.0);
        // Power iteration on (σ I − Γ) converges to the smallest eigenvalue of Γ.
        let g = gamma_matrix(&cov, Some(j));
        let sigma = g.norm();
        let shifted = DMatrix::<Complex64>::identity(6, 6) * c(sigma, 0.0) - &g;
        let mut v = nalgebra::DVector::from_fn(6, |i, _| c(1.0 + i as f64, 0.5));
        let mut est = 0.0;
        for _ in 0..20000 {
            let w = &shifted * &v;
            est = w.norm() / v.norm();
            v = w.normalize();
        }
        assert!((sigma - est - lambda).abs() < 1e-8, "{} vs {}", sigma - est, lambda);
    }
}

#[test]
fn symmetric_point_yields_equal_populations() {
    for r in [0.2f64, 0.5, 0.5857864376269049, 0.9, 1.0] {
        let sp = symmetric_point(r).unwrap();
        let p = mode_populations(&sp.config().unwrap());
        assert!((p.n2 - p.n3).abs() < 1e-10 && (p.n2 - sp.n).abs() < 1e-10, "{r}");
    }
}

#[test]
fn population_inversion_helper() {
    for (n2, n3) in [(0.25, 0.1), (1.2, 0.9), (0.5, 0.5)] {
        let p = mode_populations(&config_for_populations(n2, n3));
        assert!((p.n2 - n2).abs() < 1e-12 && (p.n3 - n3).abs() < 1e-12);
    }
}
