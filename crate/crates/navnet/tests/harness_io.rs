//! Harness formats and replay: file round-trips under arbitrary finite
//! floats, byte-identical replays of randomized traces, and a golden
//! end-to-end record log.

mod common;

use navnet::harness::config::Config;
use navnet::harness::points::{parse_matrix, parse_points, write_matrix, write_points};
use navnet::harness::trace::{parse_trace, run_trace};
use navnet::harness::{fmt_f64, HarnessError};
use navnet::MetricPoint;
use proptest::prelude::*;
use rand::Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn point_files_round_trip_exactly(
        rows in prop::collection::vec((0u64..1000, prop::collection::vec(-1e12f64..1e12, 3)), 1..20)
    ) {
        let mut points: Vec<MetricPoint> = Vec::new();
        let mut used = std::collections::BTreeSet::new();
        for (id, coords) in rows {
            if used.insert(id) {
                points.push(MetricPoint::euclidean(id, coords));
            }
        }
        let text = write_points(3, &points).unwrap();
        let (dim, back) = parse_points(&text).unwrap();
        prop_assert_eq!(dim, 3);
        prop_assert_eq!(back.len(), points.len());
        for (a, b) in points.iter().zip(&back) {
            prop_assert_eq!(a.id, b.id);
            let (ca, cb) = (a.coords().unwrap(), b.coords().unwrap());
            for (x, y) in ca.iter().zip(cb) {
                prop_assert_eq!(x.to_bits(), y.to_bits());
            }
        }
    }

    #[test]
    fn matrix_files_round_trip_exactly(
        upper in prop::collection::vec(0.001f64..1e9, 6)
    ) {
        // Symmetric 4x4 with zero diagonal from six upper entries.
        let n = 4;
        let mut rows = vec![vec![0.0f64; n]; n];
        let mut it = upper.into_iter();
        for i in 0..n {
            for j in (i + 1)..n {
                let w = it.next().unwrap();
                rows[i][j] = w;
                rows[j][i] = w;
            }
        }
        let text = write_matrix(&rows).unwrap();
        let back = parse_matrix(&text).unwrap();
        for i in 0..n {
            for j in 0..n {
                prop_assert_eq!(rows[i][j].to_bits(), back[i][j].to_bits());
            }
        }
    }
}

/// Builds a plausible mixed trace: inserts (with occasional far
/// outliers), deletes, queries, and periodic verifies.
fn random_trace_text(seed: u64, ops: usize) -> String {
    let mut r = common::rng(seed);
    let mut live: Vec<u64> = Vec::new();
    let mut next_id = 0u64;
    let mut out = String::new();
    for step in 0..ops {
        let roll: f64 = r.gen();
        if live.len() < 4 || (roll < 0.5 && live.len() < 30) {
            let span = if r.gen_bool(0.1) { 200.0 } else { 1.0 };
            out.push_str(&format!(
                "INSERT {} {} {}\n",
                next_id,
                fmt_f64(r.gen_range(-span..=span)),
                fmt_f64(r.gen_range(-span..=span))
            ));
            live.push(next_id);
            next_id += 1;
        } else if roll < 0.75 {
            let idx = r.gen_range(0..live.len());
            out.push_str(&format!("DELETE {}\n", live.swap_remove(idx)));
        } else if roll < 0.90 {
            out.push_str(&format!(
                "AFN 0.5 1 {} {}\n",
                fmt_f64(r.gen_range(-1.0..=1.0)),
                fmt_f64(r.gen_range(-1.0..=1.0))
            ));
        } else if roll < 0.95 {
            out.push_str("GREEDY 2 0.5\n");
        } else {
            out.push_str("MEB 1.0\n");
        }
        if step % 25 == 0 {
            out.push_str("VERIFY\n");
        }
    }
    out.push_str("VERIFY\n");
    out
}

#[test]
fn randomized_replays_are_byte_identical_and_clean() {
    let mut cfg = Config::default();
    cfg.check_oracle = true;
    for seed in 0..4u64 {
        let text = random_trace_text(seed, 120);
        let ops = parse_trace(&text).unwrap();
        let a = run_trace(&ops, &cfg, None).unwrap();
        let b = run_trace(&ops, &cfg, None).unwrap();
        assert_eq!(a.output(), b.output(), "seed {seed}");
        assert!(a.passed(), "seed {seed}: {} verify / {} guarantee failures",
            a.verify_failures, a.guarantee_failures);
        assert_eq!(a.lines.len(), ops.len());
        // Every oracle-checked record passed on these honest replays.
        assert!(!a.output().contains(r#""oracle":"fail""#));
    }
}

#[test]
fn full_rebuild_config_replays_identically_sized_registries() {
    let text = random_trace_text(9, 80);
    let ops = parse_trace(&text).unwrap();
    let repair = run_trace(&ops, &Config::default(), None).unwrap();
    let mut cfg = Config::default();
    cfg.full_rebuild = true;
    let rebuild = run_trace(&ops, &cfg, None).unwrap();
    assert!(repair.passed() && rebuild.passed());
    // Verify records agree regardless of deletion strategy.
    let count = |r: &navnet::harness::trace::RunReport| {
        r.lines
            .iter()
            .filter(|l| l.contains(r#""op":"verify","pass":true"#))
            .count()
    };
    assert_eq!(count(&repair), count(&rebuild));
    assert!(count(&repair) > 0);
}

#[test]
fn golden_replay_of_a_fixed_trace() {
    let text = "INSERT 0 0.0 0.0\nINSERT 1 3.0 4.0\nAFN 0.5 1 0.0 0.0\nKCENTER 1 1.0\nVERIFY\nDELETE 0\nVERIFY\n";
    let ops = parse_trace(text).unwrap();
    let mut cfg = Config::default();
    cfg.check_oracle = true;
    let report = run_trace(&ops, &cfg, None).unwrap();
    assert!(report.passed());
    assert_eq!(report.lines[0], r#"{"op":"insert","id":0}"#);
    assert_eq!(report.lines[1], r#"{"op":"insert","id":1}"#);
    assert_eq!(
        report.lines[2],
        r#"{"op":"afn","eps":5.0000000000000000e-1,"id":1,"distance":5.0000000000000000e0,"stats":{"iterations":4,"max_frontier":2,"start_exponent":3,"end_exponent":0},"oracle":"pass"}"#
    );
    assert!(report.lines[3].starts_with(r#"{"op":"kcenter","k":1,"eps":1.0000000000000000e0,"centers":[["#));
    assert!(report.lines[3].ends_with(r#""coverage":"pass","oracle":"pass"}"#), "{}", report.lines[3]);
    assert_eq!(report.lines[4], r#"{"op":"verify","pass":true}"#);
    assert_eq!(report.lines[5], r#"{"op":"delete","id":0}"#);
    assert_eq!(report.lines[6], r#"{"op":"verify","pass":true}"#);
}

#[test]
fn malformed_inputs_surface_their_position() {
    assert!(matches!(
        parse_trace("INSERT 0 1.0\nINSERT 1\n"),
        Err(HarnessError::Parse { line: 2, .. })
    ));
    assert!(matches!(
        parse_points("dim 2\n0 0.0 0.0\n1 5.0\n"),
        Err(HarnessError::Parse { line: 3, .. })
    ));
    assert!(matches!(
        parse_matrix("matrix 2\n0.0 1.0\n1.0 x\n"),
        Err(HarnessError::Parse { line: 3, .. })
    ));
}
