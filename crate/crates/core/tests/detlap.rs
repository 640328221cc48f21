use std::f64::consts::PI;

use hyploop::detlap::*;
use hyploop::hypgeom::QuadratureSpec;
use hyploop::spectrum::{enumerate_spectrum, EnumerationOptions, GroupPresentation};

fn both(d: &DetInputs) -> (LogDet, LogDet) {
    let q = QuadratureSpec::default();
    (
        logdet_via_time_integrals(d, &q).unwrap(),
        logdet_via_blm(d, &q).unwrap(),
    )
}

#[test]
fn routes_agree_on_synthetic_spectra() {
    for sp in [
        sparse_spectrum().unwrap(),
        li_matched_spectrum(6.0, 1.0).unwrap(),
        dense_spectrum(8.0).unwrap(),
    ] {
        let d = DetInputs::new(4.0 * PI, sp, TailModel::default()).unwrap();
        let (a, b) = both(&d);
        assert!((a.value - b.value).abs() <= a.budget.quantified() + b.budget.quantified());
    }
}

#[test]
fn routes_agree_on_modular_torus_table() {
    let g = GroupPresentation::preset("modular-torus").unwrap();
    let table = enumerate_spectrum(&g, 12, None, EnumerationOptions::default()).unwrap();
    let d = DetInputs::from_table(4.0 * PI, &table, TailModel::default()).unwrap();
    let (a, b) = both(&d);
    assert!((a.value - b.value).abs() <= a.budget.quantified() + b.budget.quantified());
    let filtered = enumerate_spectrum(&g, 8, Some((1, 0)), EnumerationOptions::default()).unwrap();
    assert!(DetInputs::from_table(4.0 * PI, &filtered, TailModel::default()).is_err());
}

#[test]
fn constants_are_consistent() {
    let q = QuadratureSpec::default();
    let k = UniversalConstants::compute(&q).unwrap();
    assert!((k.c - (k.c2 - k.euler_gamma)).abs() <= k.c_bound + k.c2_bound + 1e-15);
    assert!((k.e - 0.053_809_688_760_482_6).abs() < 1e-13);
}

#[test]
fn area_enters_both_routes_identically() {
    let sp = sparse_spectrum().unwrap();
    let d1 = DetInputs::new(4.0 * PI, sp.clone(), TailModel::default()).unwrap();
    let d2 = DetInputs::new(8.0 * PI, sp, TailModel::default()).unwrap();
    let (a1, b1) = both(&d1);
    let (a2, b2) = both(&d2);
    let shift = -4.0 * PI * constant_e().value;
    assert!(((a2.value - a1.value) - shift).abs() < 1e-12);
    assert!(((b2.value - b1.value) - shift).abs() < 1e-12);
}
