//! Structure checks on the bundled example systems beyond what the
//! acceptance criteria already pin down.

mod common;

use common::*;
use entroflow::genfun;
use entroflow::oracle::{self, TruncatedGraph};
use entroflow::quotient::{build_quotient, Band};
use entroflow::GenFunError;

/// The two-sided geodesic system: eight classes, and the row of the class
/// holding -2 reaches exactly the root and the three positive classes.
#[test]
fn geodesic_system_row_structure() {
    let spec = load_spec("example2.spec");
    let q = build_quotient(&spec, "2").unwrap();
    assert_eq!(q.m(), 7);
    assert_eq!(q.ell, 7); // every vertex misses some outgoing edge
    assert!(q.classes.iter().skip(1).all(|c| c.band == Band::Constrained));

    // Classes are ordered {2},{3},{4,5},{6..},{-2},{-3},{-4,-5},{-6..};
    // index 4 holds {-2}.
    assert_eq!(q.follower_sets[4], vec![0, 1, 2, 3]);
    let sys = genfun::assemble(&q, 0.42, 1e-12).unwrap();
    for j in 0..=7 {
        let a = sys.a(4, j);
        if j <= 3 {
            assert!(a > 0.0, "alpha_4{j} should be positive");
        } else {
            assert_eq!(a, 0.0, "alpha_4{j} should vanish");
        }
    }
    // Mirror: the root row reaches exactly the negative classes.
    assert_eq!(q.follower_sets[0], vec![4, 5, 6, 7]);

    // The full system is no local perturbation (infinite exception set).
    assert!(matches!(
        genfun::phi_local_perturbation(&spec, "2", 0.3, 1e-12),
        Err(GenFunError::NotLocalPerturbation)
    ));
}

/// Truncation of the positive geodesic system to vertices 3..12: the
/// depth-first enumeration matches the transfer-matrix count exactly.
#[test]
fn geodesic_truncation_matches_transfer_matrix() {
    let spec = load_spec("example1.spec");
    let tg = TruncatedGraph::build(&spec, 7).unwrap(); // named 3,4,5 + family 6..12
    assert_eq!(tg.labels.len(), 10);
    for len in [2usize, 3, 4] {
        let dfs = oracle::enumerate_cycles(&tg, "3", len, 1 << 26).unwrap();
        let transfer = transfer_cycle_poly(&tg, "3", len);
        assert_eq!(dfs, transfer, "length {len}");
    }
}

/// Full 3-shift at length 8: the truncated cycle sum sits within the
/// geometric tail (2x)^L/(1-2x) of the closed form x/(1-2x).
#[test]
fn full_shift_truncation_gap() {
    let spec = load_spec("fullshift_n3.spec");
    let tg = TruncatedGraph::build(&spec, 0).unwrap();
    let poly = oracle::enumerate_cycles(&tg, "a", 8, 1 << 26).unwrap();
    let x: f64 = 0.2;
    let low = oracle::phi_truncated(&poly, x);
    let exact = x / (1.0 - 2.0 * x);
    let gap = exact - low;
    let tail_bound = (2.0 * x).powi(8) / (1.0 - 2.0 * x) / 3.0;
    assert!(gap > 0.0);
    assert!(gap <= tail_bound + 1e-12);
    assert!(gap < 2e-3);
}

/// The two-sided subsystem is a genuine complete-minus-exceptions graph
/// with two infinite families: all three evaluation paths must agree.
#[test]
fn subsystem_paths_agree() {
    let spec = load_spec("example2_subsystem.spec");
    let q = build_quotient(&spec, "3").unwrap();
    assert_eq!(q.ell, 3); // {4,5}, {-3}, {-4,-5} carry missing out-edges
    assert_eq!(q.m(), 5);
    let tol = 1e-13;
    for i in 1..=10 {
        let x = 0.042 * i as f64;
        let lin = genfun::solve_phi(&q, x, tol).unwrap();
        assert_eq!(lin.status, entroflow::EvalStatus::InDomain, "x={x}");
        let closed = genfun::phi_closed_form(&q, x, tol).unwrap();
        let pert = genfun::phi_local_perturbation(&spec, "3", x, tol).unwrap();
        assert!((lin.phi - closed).abs() < 1e-10, "x={x}");
        assert!((lin.phi - pert).abs() < 1e-10, "x={x}");
    }
}

/// Out-of-range query points are flagged, not computed.
#[test]
fn out_of_range_points_are_flagged() {
    let spec = load_spec("fullshift_n3.spec");
    let q = build_quotient(&spec, "a").unwrap();
    for x in [-0.5, 1.5] {
        let e = genfun::solve_phi(&q, x, 1e-12).unwrap();
        assert_eq!(e.status, entroflow::EvalStatus::BeyondSeriesRadius);
    }
}
