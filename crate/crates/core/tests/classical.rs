use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use trimode::classical::{compare_measurements, compare_reader, linear_grid, output_energy, sweep};
use trimode::{ClassicalParams, Error};

/// Direct evaluation of the printed form, away from the singular point.
fn direct(e5: f64, p: &ClassicalParams<f64>) -> f64 {
    let a = p.c1 * p.e4;
    let b = p.c2 * e5;
    let d = b - a;
    let bracket = if d > 0.0 {
        (d.sqrt() * p.z).cos() - 1.0
    } else {
        ((-d).sqrt() * p.z).cosh() - 1.0
    };
    p.omega_ratio * a * b / (d * d) * bracket * bracket * p.e1
}

#[test]
fn agrees_with_direct_formula_on_both_branches() {
    let p = ClassicalParams::<f64>::default();
    for e5 in [0.001, 0.01, 0.03, 0.045, 0.06, 0.08, 0.1, 0.5, 3.0, 20.0] {
        let a = output_energy(e5, &p).unwrap();
        let b = direct(e5, &p);
        assert!((a - b).abs() <= 1e-9 * b.abs().max(1e-12), "{e5}: {a} vs {b}");
    }
}

#[test]
fn large_argument_oscillation() {
    // Zeros at √D·z = 2πk.
    let p = ClassicalParams::<f64>::default();
    let d = (2.0 * std::f64::consts::PI / p.z).powi(2);
    let e5 = (d + p.c1 * p.e4) / p.c2;
    assert!(output_energy(e5, &p).unwrap() < 1e-12);
    assert!(output_energy(e5 * 0.8, &p).unwrap() > 1e-6);
}

#[test]
fn series_limit_at_threshold() {
    let p = ClassicalParams::<f64>::default();
    let x = p.threshold();
    // [cos(√y z) − 1]²/y² = z⁴/4 − y z⁶/24 + …
    let limit = p.omega_ratio * (p.c1 * p.e4).powi(2) * p.z.powi(4) / 4.0 * p.e1;
    assert!((output_energy(x, &p).unwrap() - limit).abs() < 1e-15);
    assert!((limit - 7.92e-4).abs() < 1e-6);
}

#[test]
fn branches_join_at_threshold() {
    let p = ClassicalParams::<f64>::default();
    let x = p.threshold();
    let e = output_energy(x, &p).unwrap();
    for s in [1.0 - 1e-8, 1.0 + 1e-8] {
        assert!((output_energy(x * s, &p).unwrap() - e).abs() < 1e-10);
    }
    for s in [1.0 - 1e-6, 1.0 + 1e-6] {
        assert!((output_energy(x * s, &p).unwrap() - e).abs() < 1e-9);
    }
}

#[test]
fn linear_in_seed_energy() {
    let p = ClassicalParams::<f64>::default();
    let q = ClassicalParams { e1: 3.0 * p.e1, ..p };
    for e5 in [0.0, 0.02, 0.05, 0.09] {
        let a = output_energy(e5, &p).unwrap();
        let b = output_energy(e5, &q).unwrap();
        assert!((b - 3.0 * a).abs() <= 1e-15 + 1e-12 * b);
    }
}

#[test]
fn sweep_shape_on_default_range() {
    let p = ClassicalParams::<f64>::default();
    let rows = sweep(&linear_grid(0.0, 0.1, 101), &p).unwrap();
    assert_eq!(rows.len(), 101);
    assert_eq!(rows[0].e2, 0.0);
    for w in rows.windows(2) {
        assert!(w[1].e2 > w[0].e2);
    }
    for r in &rows[1..] {
        assert!((r.e2 - direct(r.e5, &p)).abs() <= 1e-9 * r.e2);
    }
}

#[test]
fn self_generated_file_has_zero_residuals() {
    let p = ClassicalParams::<f64>::default();
    let mut f = tempfile::NamedTempFile::new().unwrap();
    writeln!(f, "e5_joules,e2_joules").unwrap();
    for r in sweep(&linear_grid(0.0, 0.1, 20), &p).unwrap() {
        writeln!(f, "{:e},{:e}", r.e5, r.e2).unwrap();
    }
    f.flush().unwrap();
    let cmp = compare_measurements(f.path(), &p).unwrap();
    assert_eq!(cmp.rows.len(), 20);
    assert!(cmp.max_abs < 1e-15 && cmp.rms < 1e-15);
    assert_eq!(cmp.rows[0].line, 2);
}

#[test]
fn noisy_data_rms_within_two_sigma() {
    let p = ClassicalParams::<f64>::default();
    let sigma = 2e-5;
    let noise = Normal::new(0.0, sigma).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut csv = String::from("e5_joules,e2_joules\n");
    for e5 in linear_grid(0.0, 0.1, 200) {
        let e2 = output_energy(e5, &p).unwrap() + noise.sample(&mut rng);
        csv.push_str(&format!("{e5},{e2}\n"));
    }
    let cmp = compare_reader(csv.as_bytes(), &p).unwrap();
    assert!(cmp.rms < 2.0 * sigma && cmp.rms > 0.5 * sigma, "{}", cmp.rms);
}

#[test]
fn malformed_inputs_name_the_line() {
    let p = ClassicalParams::<f64>::default();
    let cases = [
        ("e5_joules,e2_joules\n0.01,1e-4\n0.02,x\n", 3),
        ("e5_joules,e2_joules\n0.01,1e-4\n0.02\n", 3),
        ("e5_joules,e2_joules\n-0.01,1e-4\n", 2),
        ("e5,e2\n0.01,1e-4\n", 1),
        ("e5_joules,e2_joules\n", 1),
    ];
    for (text, want) in cases {
        match compare_reader(text.as_bytes(), &p) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, want, "{text:?}"),
            other => panic!("{text:?}: {other:?}"),
        }
    }
    assert!(matches!(
        compare_measurements("/nonexistent/file.csv", &p),
        Err(Error::Io(_))
    ));
}

#[test]
fn columns_may_be_reordered() {
    let p = ClassicalParams::<f64>::default();
    let e2 = output_energy(0.05, &p).unwrap();
    let text = format!("e2_joules,e5_joules\n{e2},0.05\n");
    let cmp = compare_reader(text.as_bytes(), &p).unwrap();
    assert!(cmp.max_abs < 1e-18);
}

#[test]
fn single_precision() {
    let p = ClassicalParams::<f32>::default();
    let a = output_energy(p.threshold(), &p).unwrap();
    assert!((a - 7.92e-4).abs() < 1e-5);
}
