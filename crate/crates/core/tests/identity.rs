use std::f64::consts::PI;

use hyploop::identity::*;
use hyploop::spectrum::{enumerate_spectrum, EnumerationOptions, GroupPresentation};
use hyploop::Error;

fn class_table(depth: u32, class: (i32, i32)) -> hyploop::spectrum::SpectrumTable {
    let g = GroupPresentation::preset("modular-torus").unwrap();
    enumerate_spectrum(&g, depth, Some(class), EnumerationOptions::default()).unwrap()
}

#[test]
fn hexagonal_lower_bound_and_monotone() {
    let report = flat_puncture_report(3f64.sqrt() / 2.0, 1.0, &class_table(14, (1, 0)), false).unwrap();
    assert!((report.lhs - 3f64.sqrt() / (2.0 * PI)).abs() < 1e-15);
    assert!(report.lower_bound_holds());
    assert!(report.strictly_increasing());
    assert!(report.verified_marking);
}

#[test]
fn pinned_classes_agree() {
    // The symmetry of the hexagonal torus permutes the six pinned classes.
    let base = class_partial_sums(&class_table(12, (1, 0))).unwrap();
    for c in PINNED_CLASSES {
        let other = class_partial_sums(&class_table(12, c)).unwrap();
        assert_eq!(other.len(), base.len(), "{c:?}");
        for (a, b) in base.iter().zip(&other) {
            assert!((a.1 - b.1).abs() < 1e-13);
        }
    }
}

#[test]
fn unpinned_class_needs_opt_in() {
    let t = class_table(10, (2, 1));
    let area = 3f64.sqrt() / 2.0;
    assert!(matches!(
        flat_puncture_report(area, 3f64.sqrt(), &t, false),
        Err(Error::UnverifiedMarking(_))
    ));
    let r = flat_puncture_report(area, 3f64.sqrt(), &t, true).unwrap();
    assert!(!r.verified_marking);
}

#[test]
fn csv_exports() {
    let report = flat_puncture_report(3f64.sqrt() / 2.0, 1.0, &class_table(12, (1, 0)), false).unwrap();
    let mut a = Vec::new();
    write_partial_sums_csv(&report, &mut a).unwrap();
    assert_eq!(String::from_utf8(a).unwrap().lines().count(), report.n_terms + 1);
    let mut b = Vec::new();
    write_summary_csv(&report, &mut b).unwrap();
    assert!(String::from_utf8(b)
        .unwrap()
        .starts_with("lhs,extrapolated,relative_gap"));
}

#[test]
fn extrapolation_recovers_a_c_over_l_tail() {
    let pts: Vec<(f64, f64)> = (0..12)
        .map(|k| {
            let l = 3.0 + 0.3 * k as f64;
            (l, 0.5 - 0.8 / l)
        })
        .collect();
    let fit = tail_extrapolate(&pts).unwrap();
    assert!((fit.limit - 0.5).abs() < 1e-12 && (fit.c - 0.8).abs() < 1e-12);
}
