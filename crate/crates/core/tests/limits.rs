//! Limit-set analyses: spectral decomposition against hand-built tables,
//! minimality evidence, Denjoy gaps and orbit sampling.

mod common;

use circle_ifs::intervals::Inventory;
use circle_ifs::limits::decomposition::{spectral_decomposition, DecompositionStatus, PieceKind};
use circle_ifs::limits::denjoy::{denjoy_check, OrbitClosure};
use circle_ifs::limits::minimality::{bin_witnesses, minimality_certificate, MinimalityVerdict};
use circle_ifs::limits::orbit::{omega_limit, reach_interval, BinGrid, Escape, Walker};
use circle_ifs::limits::witness::WitnessKind;
use circle_ifs::maps::{CircleMap, MapFamily, MapPair};
use circle_ifs::{Budgets, Tolerances};
use common::{morse_smale_pair, morse_smale_table, perturbed_pair, Expected};

#[test]
fn morse_smale_pieces_match_hand_built_tables() {
    let (b, tol) = (Budgets::default(), Tolerances::default());
    for (name, pair, expected) in morse_smale_table() {
        let report = spectral_decomposition(&pair, 0.38, &b, &tol, 7).unwrap();
        let got: Vec<Expected> = report
            .pieces
            .iter()
            .map(|p| match p.kind {
                PieceKind::StarInterval { kind } => (Some(kind), p.a, p.b),
                PieceKind::FixedPoint { .. } => (None, p.a, p.b),
            })
            .collect();
        assert_eq!(got.len(), expected.len(), "{name}: {got:?}");
        for (g, e) in got.iter().zip(&expected) {
            assert_eq!(g.0, e.0, "{name}: {got:?}");
            assert!((g.1 - e.1).abs() < 1e-8 && (g.2 - e.2).abs() < 1e-8, "{name}: {g:?} vs {e:?}");
        }
        for p in &report.pieces {
            let w = p.witness.as_ref().unwrap_or_else(|| panic!("{name}: no witness for {p:?}"));
            assert_eq!(w.kind, WitnessKind::Contracting);
            assert!(w.verify(&pair), "{name}: witness fails for {p:?}");
            let pad = if p.a == p.b { 1e-2 } else { 1e-9 };
            assert!(w.fixed_point >= p.a - pad && w.fixed_point <= p.b + pad, "{name}: {w:?}");
        }
    }
}

#[test]
fn status_follows_ss_and_closeness() {
    let (b, tol) = (Budgets::default(), Tolerances::default());
    let table = morse_smale_table();
    let status = |i: usize| spectral_decomposition(&table[i].1, 0.38, &b, &tol, 1).unwrap().status;
    assert_eq!(status(0), DecompositionStatus::Minimal);
    assert_eq!(status(1), DecompositionStatus::Decomposed);
    assert!(matches!(status(9), DecompositionStatus::OutsideHypotheses { .. }));
}

#[test]
fn interval_pieces_are_sampled_densely() {
    let (b, tol) = (Budgets::default(), Tolerances::default());
    let pair = morse_smale_pair(0.02, &[0.1, 0.5], 0.02, &[0.3, 0.7]);
    let report = spectral_decomposition(&pair, 0.38, &b, &tol, 3).unwrap();
    for p in &report.pieces {
        let t = p.transitivity.as_ref().unwrap();
        // ss is sampled forwards, uu backwards: the orbit never leaves.
        assert_eq!(t.steps_outside, 0, "{p:?}");
        assert_eq!(t.bins_visited, t.bins, "{p:?}");
    }
}

#[test]
fn pair_without_ss_is_certified_minimal() {
    let (b, tol) = (Budgets::default(), Tolerances::default());
    let pair = morse_smale_table().swap_remove(10).1;
    let r = minimality_certificate(&pair, 0.38, 1e-2, 200_000, &b, &tol, 5).unwrap();
    match r.verdict {
        MinimalityVerdict::MinimalCertified { evidence } => {
            assert!(evidence.full_coverage());
            assert!(evidence.all_bins_witnessed(), "{:?} {:?}", evidence.attractors, evidence.repellers);
        }
        v => panic!("unexpected verdict {v:?}"),
    }
}

#[test]
fn bin_witnesses_verify_independently() {
    let tol = Tolerances::default();
    let pair = morse_smale_table().swap_remove(10).1;
    let grid = BinGrid::new(0.0, 1.0, 0.05);
    let inv = Inventory::compute(&pair, &tol).unwrap();
    let (ws, census) = bin_witnesses(&pair, &inv, false, &grid, 200_000, &tol, 2);
    assert!(census.missing.is_empty());
    let inv_inv = Inventory::compute(&pair.inverse(), &tol).unwrap();
    let (rs, census) = bin_witnesses(&pair, &inv_inv, true, &grid, 200_000, &tol, 2);
    assert!(census.missing.is_empty());
    for (b, (w, r)) in ws.iter().zip(&rs).enumerate() {
        let (lo, hi) = (b as f64 * 0.05, (b + 1) as f64 * 0.05);
        for (wt, kind) in [(w.as_ref().unwrap(), WitnessKind::Contracting), (r.as_ref().unwrap(), WitnessKind::Expanding)] {
            assert_eq!(wt.kind, kind);
            assert!(wt.verify(&pair), "bin {b}");
            let x = wt.fixed_point.rem_euclid(1.0);
            assert!(x > lo && x < hi, "bin {b}: fixed point {x}");
            // The periodic point really is one: w(x) = x + shift.
            let y = wt.word.apply(&pair, wt.fixed_point) - wt.shift as f64;
            assert!((y - wt.fixed_point).abs() < 1e-9, "bin {b}");
            let d = wt.derivative_at_fixed_point.abs();
            assert!(if kind == WitnessKind::Contracting { d < 1.0 } else { d > 1.0 });
        }
    }
}

#[test]
fn ss_pairs_are_not_minimal_and_irrational_ones_unknown() {
    let (b, tol) = (Budgets::default(), Tolerances::default());
    let pair = morse_smale_pair(0.02, &[0.1, 0.5], 0.02, &[0.3, 0.7]);
    let r = minimality_certificate(&pair, 0.38, 1e-2, 10_000, &b, &tol, 1).unwrap();
    assert!(matches!(r.verdict, MinimalityVerdict::NotMinimal { ref ss_intervals } if ss_intervals.len() == 1));
    let golden = (5f64.sqrt() - 1.0) / 2.0;
    let pair = perturbed_pair(golden, 0.05, 0.0, 0.0, 0.05, 0.1);
    let r = minimality_certificate(&pair, 0.38, 1e-2, 10_000, &b, &tol, 1).unwrap();
    assert!(matches!(r.verdict, MinimalityVerdict::Unknown { .. }));
    // No ss, but far from rotations: nothing is certified.
    let pair = morse_smale_pair(0.2, &[0.1, 0.4], 0.2, &[0.6, 0.9]);
    let r = minimality_certificate(&pair, 0.38, 1e-2, 10_000, &b, &tol, 1).unwrap();
    assert!(matches!(r.verdict, MinimalityVerdict::Unknown { ref reason } if reason.contains("closeness")), "{:?}", r.verdict);
}

#[test]
fn denjoy_gap_shrinks_inside_ss_interval() {
    let (b, tol) = (Budgets::default(), Tolerances::default());
    let pair = perturbed_pair(0.0, 0.05, 0.0, 0.0, 0.05, 0.25);
    let r = denjoy_check(&pair, 0.38, 1 << 18, &b, &tol, 11).unwrap();
    assert!(r.in_scope);
    assert_eq!(r.intervals.len(), 1);
    let iv = &r.intervals[0];
    assert!((iv.a - 0.5).abs() < 1e-9 && (iv.b - 0.75).abs() < 1e-9);
    assert!(iv.gap_monotone());
    assert!(iv.final_gap() < 1e-3, "{:?}", iv.checkpoints);
    assert_eq!(iv.closure, OrbitClosure::NonemptyInterior);
    assert!(!r.cantor_suspected());
}

#[test]
fn omega_limit_of_a_point_in_ss_stays_there() {
    let pair = perturbed_pair(0.0, 0.05, 0.0, 0.0, 0.05, 0.25);
    let w = Walker::new(&pair, false);
    let om = omega_limit(&w, 0.6, 60_000, 1e-2, (0.0, 1.0), 4);
    assert!(om.escapes.is_empty());
    assert!(!om.clusters.is_empty());
    for &(a, b) in &om.clusters {
        assert!(a >= 0.5 - 1e-2 && b <= 0.75 + 1e-2, "cluster ({a}, {b})");
    }
}

#[test]
fn reach_interval_returns_a_word_landing_in_the_target() {
    let pair = perturbed_pair(0.0, 0.05, 0.0, 0.0, 0.05, 0.25);
    // Forwards inside the ss interval [0.5, 0.75], backwards inside the
    // uu interval [0, 0.25].
    for (inverse, x, target) in [(false, 0.55, (0.61, 0.62)), (true, 0.05, (0.11, 0.12))] {
        let w = Walker::new(&pair, inverse);
        let word = reach_interval(&w, x, target, 100_000, 9).unwrap();
        let y = word.apply(&pair, x).rem_euclid(1.0);
        assert!(y > target.0 && y < target.1, "inverse = {inverse}: {y}");
    }
    // The ss interval is forward invariant: nothing outside is reachable.
    let w = Walker::new(&pair, false);
    assert!(reach_interval(&w, 0.6, (0.1, 0.2), 20_000, 1).is_err());
}

#[test]
fn line_orbits_escape() {
    let f = |shift| CircleMap::on_line(MapFamily::line_bump(shift, 0.0, vec![0.0, 1.0]), -5.0, 5.0).unwrap();
    let pair = MapPair::new(f(400.0), f(250.0)).unwrap();
    let om = omega_limit(&Walker::new(&pair, false), 0.0, 30_000, 0.1, (-5.0, 5.0), 1);
    assert_eq!(om.escapes, vec![Escape::PlusInfinity]);
    let om = omega_limit(&Walker::new(&pair, true), 0.0, 30_000, 0.1, (-5.0, 5.0), 1);
    assert_eq!(om.escapes, vec![Escape::MinusInfinity]);
}
