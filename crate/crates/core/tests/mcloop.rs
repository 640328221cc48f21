use std::f64::consts::PI;

use hyploop::mcloop::*;
use num_complex::Complex64;

fn hexagonal(m: i64, n_samples: usize, n_steps: usize, seed: u64) -> LoopSampleSpec {
    LoopSampleSpec {
        omega1: Complex64::new(1.0, 0.0),
        omega2: Complex64::from_polar(1.0, PI / 3.0),
        p: 1,
        q: 0,
        m,
        n_steps,
        n_samples,
        seed,
        threads: 1,
    }
}

fn z(a: &McEstimate, b: &McEstimate) -> f64 {
    (a.mean - b.mean) / (a.stderr.powi(2) + b.stderr.powi(2)).sqrt()
}

#[test]
fn orientation_symmetry() {
    let a = estimate_hit_mass(&hexagonal(1, 20_000, 64, 1)).unwrap();
    let b = estimate_hit_mass(&hexagonal(-1, 20_000, 64, 2)).unwrap();
    assert!(z(&a, &b).abs() < 3.0, "{a:?} {b:?}");
}

#[test]
fn refinement_changes_estimate_by_less_than_one_sigma() {
    let coarse = estimate_hit_mass(&hexagonal(1, 20_000, 32, 3)).unwrap();
    let fine = estimate_hit_mass(&hexagonal(1, 20_000, 64, 3)).unwrap();
    assert!((coarse.mean - fine.mean).abs() < coarse.stderr, "{coarse:?} {fine:?}");
}

#[test]
fn stderr_halves_when_samples_quadruple() {
    let a = estimate_hit_mass(&hexagonal(1, 10_000, 32, 4)).unwrap();
    let b = estimate_hit_mass(&hexagonal(1, 40_000, 32, 5)).unwrap();
    let ratio = a.stderr / b.stderr;
    assert!((ratio / 2.0 - 1.0).abs() < 0.2, "{ratio}");
}

#[test]
fn winding_two_and_other_lattices() {
    let spec = hexagonal(2, 20_000, 64, 6);
    let est = estimate_hit_mass(&spec).unwrap();
    assert!((est.mean - spec.closed_form().unwrap()).abs() < 3.0 * est.stderr);
    let square = LoopSampleSpec {
        omega2: Complex64::new(0.0, 1.0),
        q: 1,
        ..hexagonal(1, 20_000, 64, 7)
    };
    let est = estimate_hit_mass(&square).unwrap();
    assert!(
        (est.mean - square.closed_form().unwrap()).abs() < 3.0 * est.stderr,
        "{est:?}"
    );
}

#[test]
fn invalid_specs_are_rejected() {
    assert!(estimate_hit_mass(&hexagonal(1, 100, 8, 0)).is_err());
    assert!(estimate_hit_mass(&hexagonal(0, 100, 32, 0)).is_err());
    let degenerate = LoopSampleSpec {
        omega2: Complex64::new(2.0, 0.0),
        ..hexagonal(1, 100, 32, 0)
    };
    assert!(estimate_hit_mass(&degenerate).is_err());
}
