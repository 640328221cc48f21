use std::collections::HashMap;

use hyploop::acceptance::brute_force_classes;
use hyploop::hypgeom::{length_from_trace, li_tilde};
use hyploop::spectrum::*;

fn torus(depth: u32) -> SpectrumTable {
    let g = GroupPresentation::preset("modular-torus").unwrap();
    enumerate_spectrum(&g, depth, None, EnumerationOptions::default()).unwrap()
}

#[test]
fn matches_brute_force_to_word_length_six() {
    let g = GroupPresentation::preset("modular-torus").unwrap();
    let table = torus(6);
    let brute = brute_force_classes(&g, 6).unwrap();
    assert_eq!(table.records.len(), brute.len());
    for r in &table.records {
        let (l, it) = brute[r.word.letters()];
        assert!((l - r.length).abs() <= 1e-12 * l.max(1.0), "{}", r.word);
        assert_eq!(it, r.iteration);
    }
}

#[test]
fn orientations_pair_up() {
    let table = torus(10);
    let by_word: HashMap<_, _> = table.records.iter().map(|r| (r.word.clone(), r.length)).collect();
    for r in &table.records {
        let inv = r.word.inverse();
        assert!(inv != r.word, "{} is its own inverse class", r.word);
        let l = by_word[&inv];
        assert!((l - r.length).abs() <= 1e-12 * l, "{}", r.word);
    }
}

#[test]
fn six_systoles_then_a_gap() {
    let table = torus(12);
    let systole = length_from_trace(3.0).unwrap();
    assert_eq!(counting_function(&table, systole + 1e-9).unwrap(), 6);
    assert_eq!(counting_function(&table, systole - 1e-9).unwrap(), 0);
    assert!(counting_function(&table, table.horizon + 1.0).is_err());
}

#[test]
fn markov_lengths_are_simple_geodesics_in_the_table() {
    let table = torus(14);
    for ml in markov_simple_lengths(3)
        .unwrap()
        .iter()
        .filter(|m| m.length <= table.horizon)
    {
        let traces: Vec<f64> = table
            .reliable_records()
            .filter(|r| (r.length - ml.length).abs() < 1e-9 * ml.length)
            .map(|r| r.trace)
            .collect();
        assert!(!traces.is_empty(), "Markov number {}", ml.markov_number);
        assert!(traces
            .iter()
            .all(|t| (t - 3.0 * ml.markov_number as f64).abs() < 1e-8 * t));
    }
}

#[test]
fn counting_grows_like_li() {
    // Oriented primitive count against li~(e^L) at the horizon: the prime
    // geodesic theorem puts the ratio near 1; finite-L corrections are large
    // at these lengths, so only the order of magnitude is checked.
    let table = torus(16);
    let n = counting_function(&table, table.horizon).unwrap() as f64;
    let ratio = n / li_tilde(table.horizon.exp());
    assert!(ratio > 0.2 && ratio < 5.0, "{ratio}");
}

#[test]
fn horizon_is_nondecreasing_in_depth() {
    let mut prev = 0.0;
    for d in [6, 8, 10, 12, 14] {
        let h = torus(d).horizon;
        assert!(h >= prev, "depth {d}: {h} < {prev}");
        prev = h;
    }
}

#[test]
fn filtered_table_is_the_class_slice() {
    let all = torus(12);
    let g = GroupPresentation::preset("modular-torus").unwrap();
    let one = enumerate_spectrum(&g, 12, Some((1, 0)), EnumerationOptions::default()).unwrap();
    let slice: Vec<_> = all.records.iter().filter(|r| r.homology == (1, 0)).collect();
    assert_eq!(one.records.len(), slice.len());
    assert!(one.records.iter().zip(slice).all(|(a, b)| a == b));
}

#[test]
fn thread_count_does_not_change_the_table() {
    let g = GroupPresentation::preset("modular-torus").unwrap();
    let a = enumerate_spectrum(&g, 10, None, EnumerationOptions { threads: 1 }).unwrap();
    let b = enumerate_spectrum(&g, 10, None, EnumerationOptions { threads: 3 }).unwrap();
    assert_eq!(a, b);
}

#[test]
fn cache_file_round_trip() {
    let table = torus(8);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.gspc");
    save_spectrum(&table, &path).unwrap();
    assert_eq!(load_spectrum(&path).unwrap(), table);
    let mut csv = Vec::new();
    write_csv(&table, &mut csv).unwrap();
    assert_eq!(String::from_utf8(csv).unwrap().lines().count(), table.records.len() + 1);
}
