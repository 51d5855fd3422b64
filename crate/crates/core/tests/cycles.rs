//! Reduction to fixed points, the attractor order and cycles.

mod common;

use circle_ifs::cycles::{find_cycle, precedes, reduce_pair, verify_cycle_order};
use circle_ifs::error::Error;
use circle_ifs::intervals::{enumerate_star_intervals, Inventory, StarKind};
use circle_ifs::maps::rotation::RotationVerdict;
use circle_ifs::maps::Generator;
use circle_ifs::{Budgets, Tolerances};
use common::*;

#[test]
fn half_rotation_is_reduced_to_its_square() {
    let (b, tol) = (Budgets::default(), Tolerances::default());
    let pair = perturbed_pair(0.5, 0.05, 0.0, 0.0, 0.05, 0.3);
    let r = reduce_pair(&pair, &b, &tol).unwrap();
    assert_eq!(r.powers, [2, 1]);
    assert_eq!(r.shifts, [1, 0]);
    assert!(matches!(r.rotation[0].as_ref().unwrap().verdict, RotationVerdict::Rational { p: 1, q: 2 }));
    assert!(r.has_periodic_points());
    // f0^2 - 1 agrees with composing f0 twice by hand.
    for i in 0..20 {
        let x = i as f64 / 20.0;
        let want = pair.f0.lift(pair.f0.lift(x)) - 1.0;
        assert!((r.pair.f0.lift(x) - want).abs() < 1e-13);
    }
    let inv = Inventory::compute(&r.pair, &tol).unwrap();
    assert!(!inv.f0.is_empty());
}

#[test]
fn irrational_looking_rotation_has_no_periodic_points() {
    let (b, tol) = (Budgets::default(), Tolerances::default());
    let pair = perturbed_pair((5f64.sqrt() - 1.0) / 2.0, 0.05, 0.0, 0.0, 0.05, 0.3);
    let r = reduce_pair(&pair, &b, &tol).unwrap();
    assert!(!r.has_periodic_points());
    assert_eq!(r.powers[0], 1);
}

#[test]
fn four_point_cycle_winds_once_and_satisfies_the_order() {
    let tol = Tolerances::default();
    let pair = cycle_pair();
    let inv = Inventory::compute(&pair, &tol).unwrap();
    let c = find_cycle(&pair, &inv).unwrap().unwrap();
    assert_eq!(c.length, 4);
    assert_eq!(c.displacement, 1);
    assert!(!c.is_ss_pair());
    let want = [0.0, 0.25, 0.5, 0.75, 1.0];
    for (got, want) in c.attractors.iter().zip(want) {
        assert!((got - want).abs() < 1e-10, "{:?}", c.attractors);
    }
    assert_eq!(c.owners, vec![Generator::F0, Generator::F1, Generator::F0, Generator::F1]);
    let cert = verify_cycle_order(&c, &pair, &tol).unwrap();
    assert_eq!(cert.entries.len(), 4);
    for e in &cert.entries {
        assert!(e.margin > 1e-3, "{e:?}");
        // Independent inverse by bisection.
        let owner = c.owners[(e.k + 1) % 4];
        let pre = bisect_inverse(pair.get(owner), e.s_k);
        assert!((pre - e.preimage).abs() < 1e-10);
        assert!(e.s_k < pre && pre < e.s_next && e.s_next < e.s_k_plus);
    }
}

#[test]
fn reversed_cycle_is_mirrored() {
    let tol = Tolerances::default();
    let pair = cycle_pair().reflect();
    let inv = Inventory::compute(&pair, &tol).unwrap();
    let c = find_cycle(&pair, &inv).unwrap().unwrap();
    assert_eq!(c.length, 4);
    assert!(c.mirrored);
    assert_eq!(c.displacement, -1);
    assert!(verify_cycle_order(&c, &pair, &tol).unwrap().mirrored);
}

#[test]
fn ss_pairs_give_folded_two_cycles() {
    let tol = Tolerances::default();
    let pair = morse_smale_pair(0.02, &[0.1, 0.5], 0.02, &[0.3, 0.7]);
    let inv = Inventory::compute(&pair, &tol).unwrap();
    let c = find_cycle(&pair, &inv).unwrap().unwrap();
    assert!(c.is_ss_pair());
    let lo = c.attractors[0].min(c.attractors[1]).rem_euclid(1.0);
    let ss: Vec<_> = enumerate_star_intervals(&pair, &tol).unwrap().into_iter().filter(|k| k.kind == StarKind::Ss).collect();
    assert_eq!(ss.len(), 1);
    assert!((lo - ss[0].a).abs() < 1e-10);
}

#[test]
fn precedence_is_basin_membership() {
    let tol = Tolerances::default();
    let pair = cycle_pair();
    let inv = Inventory::compute(&pair, &tol).unwrap();
    let a0 = inv.f0.iter().find(|r| r.location.abs() < 1e-9).unwrap();
    let b1 = inv.f1.iter().find(|r| (r.location - 0.25).abs() < 1e-9).unwrap();
    // 1/4 lies in the basin (-1/8, 3/8) of 0; 0 lies outside the basin
    // (1/8, 5/8) of 1/4.
    assert!(precedes(b1, a0, &inv, true));
    assert!(!precedes(a0, b1, &inv, true));
}

#[test]
fn order_violations_are_reported() {
    let tol = Tolerances::default();
    let pair = cycle_pair();
    let inv = Inventory::compute(&pair, &tol).unwrap();
    let mut c = find_cycle(&pair, &inv).unwrap().unwrap();
    c.neighbours[1] = c.attractors[2] - 0.01;
    assert!(matches!(verify_cycle_order(&c, &pair, &tol), Err(Error::OrderViolation { k: 1, .. })));
}
