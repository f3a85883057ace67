mod common;

use common::*;
use simnerve_core::corpus::{read_interactions, validate_corpus, write_interactions};
use simnerve_core::{InputFormat, InteractionSet, LoadOptions};

/// Loading rescales every vector by its norm, so values may move by an ulp.
fn assert_same(a: &InteractionSet, b: &InteractionSet) {
    assert_eq!(a.len(), b.len());
    for (x, y) in a.iter().zip(b) {
        assert_eq!((x.id, &x.if_text, &x.then_text), (y.id, &y.if_text, &y.then_text));
        for (u, v) in x.if_vec.iter().chain(&x.then_vec).zip(y.if_vec.iter().chain(&y.then_vec)) {
            assert!((u - v).abs() <= 4.0 * f64::EPSILON, "id {}: {u} vs {v}", x.id);
        }
    }
}

#[test]
fn csv_and_jsonl_round_trip() {
    let set = correlated_corpus(50, 7, 120);
    for format in [InputFormat::Csv, InputFormat::Jsonl] {
        let mut buf = Vec::new();
        write_interactions(&set, &mut buf, format).unwrap();
        let back = read_interactions(buf.as_slice(), format, LoadOptions::default()).unwrap();
        assert_same(&back, &set);
        let mut again = Vec::new();
        write_interactions(&back, &mut again, format).unwrap();
        let twice = read_interactions(again.as_slice(), format, LoadOptions::default()).unwrap();
        assert_same(&twice, &back);
    }
}

#[test]
fn files_round_trip_through_load() {
    let dir = tempfile::tempdir().unwrap();
    let set = random_corpus(20, 3, 121);
    for name in ["c.csv", "c.jsonl"] {
        let path = dir.path().join(name);
        let format = InputFormat::from_path(&path);
        write_interactions(&set, std::fs::File::create(&path).unwrap(), format).unwrap();
        let back = simnerve_core::load_interactions(&path, format, LoadOptions::default()).unwrap();
        assert_same(&back, &set);
        assert_eq!(back.source(), Some(path.as_path()));
    }
}

#[test]
fn validation_summarises_within() {
    let set = correlated_corpus(200, 5, 122);
    let report = validate_corpus(&set);
    let w: Vec<f64> = set.iter().map(|a| cos(&a.if_vec, &a.then_vec)).collect();
    let mean = w.iter().sum::<f64>() / w.len() as f64;
    assert_eq!(report.count, 200);
    assert!((report.within_mean - mean).abs() < 1e-12);
    assert!((report.within_min - w.iter().cloned().fold(f64::INFINITY, f64::min)).abs() < 1e-15);
    assert_eq!(report.within_negative, w.iter().filter(|x| **x < 0.0).count());
}
