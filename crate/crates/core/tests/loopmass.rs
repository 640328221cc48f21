use std::f64::consts::{E, PI};

use hyploop::hypgeom::QuadratureSpec;
use hyploop::loopmass::*;
use hyploop::Error;

#[test]
fn unit_hyperbolic_class() {
    let m = mass_hyperbolic_class(1.0, 1).unwrap();
    assert_eq!(m.formula_id, FormulaId::HypClass);
    assert!((m.value - 1.0 / (E - 1.0)).abs() < 1e-16);
}

#[test]
fn torus_hit_lies_below_class_mass() {
    let area = 3f64.sqrt() / 2.0;
    for m in [1i64, -1, 2, 5] {
        let hit = mass_torus_hit(area, 1.0, m).unwrap().value;
        let class = mass_flat_class(area, m.unsigned_abs() as f64).unwrap().value;
        assert!(hit > 0.0 && hit < class);
    }
    assert_eq!(
        mass_torus_hit(area, 1.0, 1).unwrap().value,
        mass_torus_hit(area, 1.0, -1).unwrap().value
    );
}

#[test]
fn masses_decrease_in_length_and_winding() {
    let mut prev = f64::INFINITY;
    for k in 1..40 {
        let v = mass_hyperbolic_class(0.25 * k as f64, 1).unwrap().value;
        assert!(v < prev);
        prev = v;
    }
    let mut prev = f64::INFINITY;
    for m in 1..10 {
        let v = mass_annulus_winding(3.0, m).unwrap().value;
        assert!(v < prev);
        prev = v;
    }
}

#[test]
fn winding_zero_is_infinite() {
    assert!(matches!(mass_annulus_winding(1.0, 0), Err(Error::InfiniteMass(_))));
    assert!(matches!(mass_torus_hit(1.0, 1.0, 0), Err(Error::InfiniteMass(_))));
}

#[test]
fn annulus_windings_sum_to_total() {
    let q = QuadratureSpec::default();
    let r = 5.0;
    let total = mass_annulus_total(r, AnnulusRoute::Series, &q).unwrap().value;
    let by_winding: f64 = (1..200).map(|m| 2.0 * mass_annulus_winding(r, m).unwrap().value).sum();
    assert!((total - by_winding).abs() < 1e-12, "{total} {by_winding}");
}

#[test]
fn formula_ids_round_trip() {
    for id in FormulaId::ALL {
        assert_eq!(FormulaId::parse(id.name()).unwrap(), id);
        assert!(!id.description().is_empty());
    }
}

#[test]
fn disc_and_sphere_masses() {
    let (f, h) = circle_log_derivatives(2.0).unwrap();
    assert_eq!(electrical_thickness(f, h).unwrap(), 0.0);
    let ellipse = ellipse_log_derivatives(0.7).unwrap();
    assert!(electrical_thickness(ellipse.0, ellipse.1).unwrap() > 0.0);
    assert!(mass_disc_winding_intersecting_k(-0.1, 1).is_err());
    let v = mass_disc_winding_intersecting_k(radial_slit_log_psi_prime(0.5).unwrap(), 2)
        .unwrap()
        .value;
    assert!(v > 0.0 && v.is_finite());
    let _ = PI;
}

#[test]
fn strip_identity_on_a_corner_of_the_grid() {
    let c = verify_strip_heat_integral(4.0, 3, 4.0, &QuadratureSpec::default()).unwrap();
    assert!(c.abs_err <= 1e-6, "{c:?}");
}
