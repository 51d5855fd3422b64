//! Star intervals: duality under inversion, the ss/uu correspondence on
//! random pairs close to rotations, and the line cases.

mod common;

use circle_ifs::error::Error;
use circle_ifs::intervals::{basin_of, classify_interval, enumerate_star_intervals, Inventory, StarKind};
use circle_ifs::maps::distortion::closeness_certificate;
use circle_ifs::maps::{CircleMap, MapFamily, MapPair};
use circle_ifs::Tolerances;
use common::{morse_smale_pair, perturbed_pair, random_near_rotation_map};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn inverse_pair_sees_dual_kinds() {
    let tol = Tolerances::default();
    for pair in [
        morse_smale_pair(0.02, &[0.05, 0.2, 0.45, 0.6], 0.02, &[0.3, 0.8]),
        morse_smale_pair(-0.02, &[0.2, 0.6], 0.02, &[0.1, 0.7]),
        perturbed_pair(0.0, 0.05, 0.0, 0.0, 0.05, 0.25),
    ] {
        let fwd = enumerate_star_intervals(&pair, &tol).unwrap();
        let bwd = enumerate_star_intervals(&pair.inverse(), &tol).unwrap();
        let mut a: Vec<_> = fwd.iter().map(|k| (k.kind.dual(), (k.a * 1e9).round() as i64, (k.b * 1e9).round() as i64)).collect();
        let mut b: Vec<_> = bwd.iter().map(|k| (k.kind, (k.a * 1e9).round() as i64, (k.b * 1e9).round() as i64)).collect();
        a.sort();
        b.sort();
        assert_eq!(a, b);
    }
}

#[test]
fn ss_exists_exactly_when_uu_exists_on_random_pairs() {
    let tol = Tolerances::default();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut checked, mut with_ss) = (0, 0);
    while checked < 60 {
        let pair = MapPair::new(random_near_rotation_map(&mut rng), random_near_rotation_map(&mut rng)).unwrap();
        if !closeness_certificate(&pair.f0, 0.38).is_certified() || !closeness_certificate(&pair.f1, 0.38).is_certified() {
            continue;
        }
        let stars = match enumerate_star_intervals(&pair, &tol) {
            Ok(s) => s,
            // Shared fixed points are outside the hypotheses.
            Err(Error::CommonFixedPoint { .. }) => continue,
            Err(e) => panic!("{e}"),
        };
        let has = |k| stars.iter().any(|s| s.kind == k);
        assert_eq!(has(StarKind::Ss), has(StarKind::Uu), "{pair:?}");
        checked += 1;
        with_ss += has(StarKind::Ss) as usize;
    }
    // Both sides of the equivalence were exercised.
    assert!(with_ss > 5 && with_ss < 55, "{with_ss}");
}

#[test]
fn endpoints_sit_on_fixed_points_and_chart_is_standard() {
    let tol = Tolerances::default();
    let pair = morse_smale_pair(0.02, &[0.05, 0.25, 0.5, 0.75], 0.02, &[0.15, 0.35, 0.6, 0.9]);
    for k in enumerate_star_intervals(&pair, &tol).unwrap() {
        for (x, owner) in [(k.a, k.owner_a.unwrap()), (k.b, k.owner_b.unwrap())] {
            let f = pair.get(owner);
            assert!((f.lift(x) - x).abs() < 1e-12);
        }
        let cp = k.chart.pair(&pair);
        let (a, b) = k.chart_endpoints();
        for t in [0.1, 0.5, 0.9] {
            let x = a + t * (b - a);
            assert!(cp.f0.lift(x) < x && cp.f1.lift(x) > x, "{:?} at {x}", k.kind);
        }
        // a attracts for the chart g0.
        assert!(cp.f0.deriv(a) < 1.0);
        assert!(k.covering_witness.max_defect <= 1e-12, "{k:?}");
    }
}

#[test]
fn classify_interval_rejects_gaps_with_interior_fixed_points() {
    let tol = Tolerances::default();
    let pair = morse_smale_pair(0.02, &[0.1, 0.5], 0.02, &[0.3, 0.7]);
    let inv = Inventory::compute(&pair, &tol).unwrap();
    assert!(classify_interval(&pair, &inv, 0.1, 0.5, &tol).unwrap().is_none());
    let k = classify_interval(&pair, &inv, 0.1, 0.3, &tol).unwrap().unwrap();
    assert_eq!(k.kind, StarKind::Ss);
    // Not endpoints at all.
    assert!(classify_interval(&pair, &inv, 0.12, 0.3, &tol).unwrap().is_none());
}

#[test]
fn common_fixed_points_are_rejected() {
    let tol = Tolerances::default();
    let pair = perturbed_pair(0.0, 0.05, 0.0, 0.0, 0.07, 0.5);
    assert!(matches!(enumerate_star_intervals(&pair, &tol), Err(Error::CommonFixedPoint { .. })));
}

#[test]
fn basins_are_bounded_by_neighbouring_fixed_points() {
    let tol = Tolerances::default();
    let pair = morse_smale_pair(0.02, &[0.1, 0.4], 0.02, &[0.6, 0.9]);
    let inv = Inventory::compute(&pair, &tol).unwrap();
    let b = basin_of(&inv.f0[0], &inv.f0, true).unwrap();
    // On the circle the basin wraps around to the repeller from both sides.
    assert!(b.contains(0.3, true) && b.contains(-0.5, true) && b.contains(0.95, true) && b.contains(0.45, true));
    assert!(!b.contains(inv.f0[1].location, true));
    let lb = basin_of(&inv.f0[0], &inv.f0, false).unwrap();
    assert!(lb.contains(0.3, false) && !lb.contains(0.45, false));
    // Repellers have no basin.
    assert!(basin_of(&inv.f0[1], &inv.f0, true).is_none());
}

#[test]
fn unbounded_line_intervals() {
    let tol = Tolerances::default();
    // f0 attracts at 0 and f1 attracts at 1; between them f0 moves left
    // and f1 moves right.
    let f = |shift, amp, zeros: Vec<f64>| CircleMap::on_line(MapFamily::line_bump(shift, amp, zeros), -6.0, 6.0).unwrap();
    let pair = MapPair::new(f(0.0, -0.3, vec![0.0]), f(0.0, -0.3, vec![1.0])).unwrap();
    let stars = enumerate_star_intervals(&pair, &tol).unwrap();
    let kinds: Vec<_> = stars.iter().map(|k| (k.kind, k.a, k.b)).collect();
    assert!(kinds.iter().any(|&(k, a, b)| k == StarKind::Ss && a.abs() < 1e-9 && (b - 1.0).abs() < 1e-9), "{kinds:?}");
    assert_eq!(stars.len(), 1);
    // With f1 repelling at 1 the rays become one-sided intervals.
    let pair = MapPair::new(f(0.0, -0.3, vec![0.0]), f(0.0, 0.3, vec![1.0])).unwrap();
    let kinds: Vec<_> = enumerate_star_intervals(&pair, &tol).unwrap().iter().map(|k| (k.kind, k.a, k.b)).collect();
    assert_eq!(kinds.len(), 2, "{kinds:?}");
    assert!(kinds.contains(&(StarKind::S, f64::NEG_INFINITY, 0.0)), "{kinds:?}");
    assert!(kinds.contains(&(StarKind::U, 1.0, f64::INFINITY)), "{kinds:?}");
}
