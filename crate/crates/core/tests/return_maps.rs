mod common;

use circle_ifs::cycles::{find_cycle, verify_cycle_order};
use circle_ifs::intervals::{enumerate_star_intervals, Inventory, StarKind};
use circle_ifs::return_map::expansion::{
    cycle_condition, derivative_ratio_bound, duminy_condition, expansion_certificate, two_stage_ratio, ExpansionBound, Frame,
};
use circle_ifs::return_map::global::{build_global_return_map, CycleFrame};
use circle_ifs::return_map::local::{build_local_return_map, LocalFrame};
use circle_ifs::{Budgets, Tolerances};
use common::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn ss_of(pair: &circle_ifs::maps::MapPair) -> circle_ifs::intervals::StarInterval {
    let tol = Tolerances::default();
    enumerate_star_intervals(pair, &tol).unwrap().into_iter().find(|k| k.kind == StarKind::Ss).expect("ss interval")
}

#[test]
fn local_atlas_tiles_the_fundamental_domain() {
    let tol = Tolerances::default();
    let pair = perturbed_pair(0.0, 0.75, 0.0, 0.0, 0.75, 0.25);
    let k = ss_of(&pair);
    let at = build_local_return_map(&pair, &k, 12, &tol).unwrap();
    let (lo, hi) = at.domain;
    assert!((at.covered() + at.tail_mass - (hi - lo)).abs() < 1e-12);
    for w in at.pieces.windows(2) {
        assert!(w[0].hi <= w[1].lo + 1e-15, "pieces overlap");
    }
    assert!(at.tail_mass < 1e-6);
}

#[test]
fn local_atlas_matches_forward_walk() {
    let tol = Tolerances::default();
    let pair = perturbed_pair(0.0, 0.75, 0.0, 0.0, 0.75, 0.3);
    let k = ss_of(&pair);
    let at = build_local_return_map(&pair, &k, 12, &tol).unwrap();
    let cp = at.chart_pair(&pair);
    let (c, e) = at.domain;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut checked = 0;
    for _ in 0..2000 {
        let x = c + (e - c) * (1.0 - rng.random::<f64>());
        let Some(i) = at.locate(x) else { continue };
        let (y, m, n) = oracle_local_return(&cp.f0, &cp.f1, c, e, x);
        assert_eq!(at.pieces[i].indices, vec![m, n], "branch at {x}");
        let r = at.apply(&cp, x).unwrap();
        assert!((r - y).abs() < 1e-9, "replay {r} vs walk {y}");
        checked += 1;
    }
    assert!(checked > 1900);
}

#[test]
fn single_branch_when_second_image_leaves_domain() {
    // Strong f1 pushes u_2 = g1^2(a) beyond e: every point has m = 1.
    let tol = Tolerances::default();
    let pair = perturbed_pair(0.0, 0.75, 0.0, 0.0, 0.75, 0.25);
    let k = ss_of(&pair);
    let at = build_local_return_map(&pair, &k, 12, &tol).unwrap();
    let cp = at.chart_pair(&pair);
    let u2 = cp.f1.lift(cp.f1.lift(k.a));
    if u2 >= at.domain.1 {
        assert!(at.pieces.iter().all(|p| p.indices[0] == 1));
    }
}

#[test]
fn discontinuities_lie_on_the_orbit_of_a() {
    let tol = Tolerances::default();
    let pair = perturbed_pair(0.0, 0.75, 0.0, 0.0, 0.75, 0.25);
    let k = ss_of(&pair);
    let at = build_local_return_map(&pair, &k, 12, &tol).unwrap();
    let cp = at.chart_pair(&pair);
    assert!(!at.discontinuities.is_empty());
    for d in &at.discontinuities {
        assert!((d.expression.evaluate(&cp) - d.point).abs() < 1e-12);
        assert_eq!(d.expression.base, "a");
    }
    // d = g1^m g0^(n-1) g1(a) for the right end of I_{mn} with n > n_min.
    for p in &at.pieces {
        let (m, n) = (p.indices[0] as i32, p.indices[1] as i32);
        let d = cp.f1.pow(m).lift(cp.f0.pow(n).lift(cp.f1.lift(k.a)));
        assert!((d - p.lo).abs() < 1e-12);
    }
}

#[test]
fn deeper_atlas_only_refines_the_tail() {
    let tol = Tolerances::default();
    let pair = perturbed_pair(0.0, 0.6, 0.0, 0.0, 0.6, 0.3);
    let k = ss_of(&pair);
    let a6 = build_local_return_map(&pair, &k, 6, &tol).unwrap();
    let a9 = build_local_return_map(&pair, &k, 9, &tol).unwrap();
    for p in &a6.pieces {
        assert!(a9.pieces.contains(p));
    }
    assert!(a9.tail_mass < a6.tail_mass);
}

#[test]
fn local_condition_and_certificate_near_rotation() {
    let tol = Tolerances::default();
    let pair = perturbed_pair(0.0, 0.05, 0.0, 0.0, 0.05, 0.25);
    let k = ss_of(&pair);
    let cond = duminy_condition(&pair, &k, 0.38, &tol).unwrap();
    assert!(cond.holds(), "{cond:?}");
    let c = *cond.constants();
    assert!(c.epsilon_measured < 0.051);
    let at = build_local_return_map(&pair, &k, 12, &tol).unwrap();
    let cp = at.chart_pair(&pair);
    let frame = Frame::Local(LocalFrame::new(&cp, &k, &tol).unwrap());
    let cert = expansion_certificate(&at, &cp, &frame, ExpansionBound::Local(c), 1.1, 200, 3).unwrap();
    assert!(cert.lambda > cert.kappa);
    assert!(cert.measured_min > 1.0, "{cert:?}");

    // Ratio inequality on random sub-intervals of pieces.
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..300 {
        let i = rng.random_range(0..at.pieces.len());
        let p = &at.pieces[i];
        let mut u = [p.lo + p.len() * rng.random::<f64>(), p.lo + p.len() * rng.random::<f64>()];
        u.sort_by(f64::total_cmp);
        let r = derivative_ratio_bound(&at, &cp, i, u[0], u[1], &ExpansionBound::Local(c));
        assert!(r.satisfied(1e-6), "{r:?}");
    }
}

#[test]
fn strong_contraction_fails_the_local_condition() {
    let tol = Tolerances::default();
    let pair = perturbed_pair(0.0, 0.75, 0.0, 0.0, 0.75, 0.25);
    let k = ss_of(&pair);
    assert!(!duminy_condition(&pair, &k, 0.38, &tol).unwrap().holds());
    let half = duminy_condition(&pair, &k, 0.5, &tol).unwrap();
    assert!(!half.holds());
}

#[test]
fn two_point_cycle_uses_the_local_atlas() {
    let tol = Tolerances::default();
    let pair = perturbed_pair(0.0, 0.3, 0.5, 0.0, 0.3, 0.75);
    let inv = Inventory::compute(&pair, &tol).unwrap();
    let cyc = find_cycle(&pair, &inv).unwrap().expect("cycle");
    assert!(cyc.is_ss_pair());
    let g = build_global_return_map(&pair, &inv, &cyc, &Budgets::default(), 8, &tol).unwrap();
    let k = ss_of(&pair);
    let l = build_local_return_map(&pair, &k, 8, &tol).unwrap();
    assert_eq!(g, l);
}

#[test]
fn global_atlas_matches_stagewise_walk() {
    let tol = Tolerances::default();
    let pair = cycle_pair();
    let inv = Inventory::compute(&pair, &tol).unwrap();
    let cyc = find_cycle(&pair, &inv).unwrap().expect("cycle");
    println!("{cyc:?}");
    verify_cycle_order(&cyc, &pair, &tol).unwrap();
    let budgets = Budgets::default();
    let at = build_global_return_map(&pair, &inv, &cyc, &budgets, 6, &tol).unwrap();
    let fr = CycleFrame::new(&pair, &cyc, &tol).unwrap();
    let (lo, hi) = at.domain;
    assert!((at.covered() + at.tail_mass - (hi - lo)).abs() < 1e-10);
    let gs: Vec<&circle_ifs::maps::CircleMap> = fr.owners.iter().map(|g| fr.pair.get(*g)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut checked = 0;
    for _ in 0..500 {
        let i = rng.random_range(0..at.pieces.len());
        let p = &at.pieces[i];
        let x = p.lo + p.len() * (1.0 - rng.random::<f64>());
        assert_eq!(at.locate(x), Some(i));
        let (y, exps) = oracle_stage_return(&gs, &fr.s, fr.shift, x);
        let r = at.apply(&fr.pair, x).unwrap();
        assert!((r - y).abs() < 1e-9, "replay {r} vs walk {y} ({exps:?}, {:?})", at.pieces[i].word);
        assert!(r > lo && r <= hi + 1e-12);
        checked += 1;
    }
    assert!(checked > 0);
    let cond = cycle_condition(&pair, &cyc);
    println!("{cond:?} pieces {} tail {}", at.pieces.len(), at.tail_mass);
    if let ExpansionBound::Global(g) = ExpansionBound::Global(*cond.constants()) {
        for i in 0..at.pieces.len().min(50) {
            let p = &at.pieces[i];
            let (x, y) = (p.lo + 0.3 * p.len(), p.lo + 0.7 * p.len());
            let r = two_stage_ratio(&at, &fr.pair, i, 0, x, y, &g);
            assert!(r.satisfied(1e-6), "{r:?}");
        }
    }
}
