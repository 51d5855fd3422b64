//! Scenario builders and independent oracles shared by the integration
//! tests. The oracles only evaluate the maps forward and invert them by
//! plain bisection, so they do not share the library's Newton solver or
//! the atlas bookkeeping.
#![allow(dead_code)]

use circle_ifs::intervals::StarKind;
use circle_ifs::maps::{CircleMap, MapFamily, MapPair};

pub fn perturbed_pair(alpha0: f64, beta0: f64, phase0: f64, alpha1: f64, beta1: f64, phase1: f64) -> MapPair {
    let f0 = CircleMap::new(MapFamily::perturbed(alpha0, beta0, phase0)).unwrap();
    let f1 = CircleMap::new(MapFamily::perturbed(alpha1, beta1, phase1)).unwrap();
    MapPair::new(f0, f1).unwrap()
}

/// Solve `f(x) = y` for an increasing lift by bisection.
pub fn bisect_inverse(f: &CircleMap, y: f64) -> f64 {
    let (mut lo, mut hi) = (y - 1.0, y + 1.0);
    while f.lift(lo) > y {
        lo -= 1.0;
    }
    while f.lift(hi) < y {
        hi += 1.0;
    }
    for _ in 0..200 {
        let m = 0.5 * (lo + hi);
        if m <= lo || m >= hi {
            break;
        }
        if f.lift(m) < y {
            lo = m;
        } else {
            hi = m;
        }
    }
    0.5 * (lo + hi)
}

/// Return of `x ∈ (c, e]` to `A = (c, e]` through `(a, c]`: walk
/// `g1^-1` until the point leaves `A` on the left, then `g0^-1` until it
/// is back. Returns the point and the step counts `(m, n)`.
pub fn oracle_local_return(g0: &CircleMap, g1: &CircleMap, c: f64, e: f64, x: f64) -> (f64, u32, u32) {
    let (mut y, mut m, mut n) = (x, 0, 0);
    while y > c {
        y = bisect_inverse(g1, y);
        m += 1;
        assert!(m < 1_000_000, "oracle walk did not leave A");
    }
    while y <= c {
        y = bisect_inverse(g0, y);
        n += 1;
        assert!(n < 1_000_000, "oracle walk did not return");
    }
    assert!(y <= e + 1e-12, "returned beyond the fundamental domain");
    (y, m, n)
}

/// Stagewise return along a cycle `s_0 < ... < s_n` with owners `gs`.
pub fn oracle_stage_return(gs: &[&CircleMap], s: &[f64], shift: f64, x: f64) -> (f64, Vec<u32>) {
    let mut y = x;
    let mut exps = Vec::new();
    for (k, g) in gs.iter().enumerate() {
        let mut m = 0;
        while y <= s[k + 1] {
            y = bisect_inverse(g, y);
            m += 1;
            assert!(m < 1_000_000, "oracle stage did not terminate");
        }
        exps.push(m);
    }
    (y + shift, exps)
}

pub fn morse_smale(amplitude: f64, zeros: &[f64]) -> CircleMap {
    CircleMap::new(MapFamily::morse_smale(0.0, amplitude, zeros.to_vec())).unwrap()
}

pub fn morse_smale_pair(a0: f64, z0: &[f64], a1: f64, z1: &[f64]) -> MapPair {
    MapPair::new(morse_smale(a0, z0), morse_smale(a1, z1)).unwrap()
}

/// A random generator close to a rotation with rotation number 0: either
/// a perturbed rotation or a sine product with two or four well
/// separated zeros.
pub fn random_near_rotation_map(rng: &mut impl rand::Rng) -> CircleMap {
    if rng.random_bool(0.5) {
        let beta = rng.random_range(0.01..0.08);
        let phase = rng.random_range(0.0..1.0);
        CircleMap::new(MapFamily::perturbed(0.0, beta, phase)).unwrap()
    } else {
        let k = if rng.random_bool(0.5) { 2 } else { 4 };
        let start: f64 = rng.random_range(0.0..1.0);
        // Zeros at least 0.05 apart, spread over less than one turn.
        let mut zeros = vec![start];
        for _ in 1..k {
            let last = *zeros.last().unwrap();
            zeros.push(last + rng.random_range(0.05..0.9 / k as f64));
        }
        let amp = rng.random_range(0.005..0.03) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        CircleMap::new(MapFamily::morse_smale(0.0, amp, zeros)).unwrap()
    }
}

/// f0 attracts at 0 and 1/2, f1 at 1/4 and 3/4, with the repellers in
/// between: the attractors form the cycle 0 < 1/4 < 1/2 < 3/4 < 1.
pub fn cycle_pair() -> MapPair {
    morse_smale_pair(0.02, &[0.0, 0.375, 0.5, 0.875], -0.02, &[0.125, 0.25, 0.625, 0.75])
}

/// Rotation parameter at which `f^q - p - id` has zero mean over a grid:
/// inside the `p/q` tongue of the perturbed family.
pub fn tongue_centre(beta: f64, p: i64, q: i32) -> f64 {
    let mean = |a: f64| {
        let g = CircleMap::new(MapFamily::perturbed(a, beta, 0.0)).unwrap().pow(q);
        (0..500).map(|i| g.lift(i as f64 / 500.0) - i as f64 / 500.0 - p as f64).sum::<f64>() / 500.0
    };
    let (mut lo, mut hi) = (p as f64 / q as f64 - 0.05, p as f64 / q as f64 + 0.05);
    for _ in 0..60 {
        let m = 0.5 * (lo + hi);
        if mean(m) < 0.0 {
            lo = m;
        } else {
            hi = m;
        }
    }
    0.5 * (lo + hi)
}

/// Expected piece: `Some(kind)` for a star interval, `None` for an
/// isolated fixed point (then `a == b`).
pub type Expected = (Option<StarKind>, f64, f64);

pub fn ss(a: f64, b: f64) -> Expected {
    (Some(StarKind::Ss), a, b)
}
pub fn uu(a: f64, b: f64) -> Expected {
    (Some(StarKind::Uu), a, b)
}
pub fn su(a: f64, b: f64) -> Expected {
    (Some(StarKind::Su), a, b)
}
pub fn point(x: f64) -> Expected {
    (None, x, x)
}

/// Scenarios whose pieces were worked out by hand from the sign pattern
/// of each `f_i - id` (the zeros are the fixed points; with positive
/// amplitude the first zero attracts and stability alternates) and the
/// covering inequalities, which hold with a wide margin at small
/// amplitude.
pub fn morse_smale_table() -> Vec<(&'static str, MapPair, Vec<Expected>)> {
    let p = |a0, z0: &[f64], a1, z1: &[f64]| morse_smale_pair(a0, z0, a1, z1);
    vec![
        ("two su", p(0.02, &[0.1, 0.4], 0.02, &[0.6, 0.9]), vec![su(0.1, 0.4), su(0.6, 0.9)]),
        ("ss and uu", p(0.02, &[0.1, 0.5], 0.02, &[0.3, 0.7]), vec![ss(0.1, 0.3), uu(0.5, 0.7)]),
        ("ss and uu, roles swapped", p(0.02, &[0.3, 0.7], 0.02, &[0.1, 0.5]), vec![ss(0.1, 0.3), uu(0.5, 0.7)]),
        ("four zeros against two", p(0.02, &[0.05, 0.2, 0.45, 0.6], 0.02, &[0.3, 0.8]), vec![su(0.05, 0.2), ss(0.3, 0.45), uu(0.6, 0.8)]),
        ("nested pair", p(0.02, &[0.1, 0.6], 0.02, &[0.3, 0.4]), vec![ss(0.1, 0.3), uu(0.4, 0.6)]),
        ("reversed stability", p(-0.02, &[0.1, 0.5], 0.02, &[0.3, 0.7]), vec![ss(0.3, 0.5), uu(0.7, 1.1)]),
        (
            "interleaved fours",
            p(0.02, &[0.05, 0.25, 0.5, 0.75], 0.02, &[0.15, 0.35, 0.6, 0.9]),
            vec![ss(0.05, 0.15), uu(0.25, 0.35), ss(0.5, 0.6), uu(0.75, 0.9)],
        ),
        ("mirrored su", p(-0.02, &[0.2, 0.6], 0.02, &[0.1, 0.7]), vec![su(0.2, 0.6), su(0.7, 1.1)]),
        (
            "six zeros",
            p(0.02, &[0.05, 0.15, 0.3, 0.45, 0.6, 0.8], 0.02, &[0.9, 0.95]),
            vec![su(0.05, 0.15), su(0.3, 0.45), su(0.6, 0.8), su(0.9, 0.95)],
        ),
        // f1(0.3) = 0.30120 > f0(0.302) = 0.30074: no ss at the short gap.
        // f0^-1(0.7) = 0.7380 < f1^-1(0.8) = 0.7618: uu holds.
        ("strong amplitude", p(0.2, &[0.3, 0.8], 0.2, &[0.302, 0.7]), vec![point(0.3), point(0.302), uu(0.7, 0.8)]),
        (
            "rotation against sine product",
            MapPair::new(CircleMap::new(MapFamily::perturbed(0.0, 0.05, 0.5)).unwrap(), morse_smale(0.02, &[0.6, 0.7, 0.8, 0.9])).unwrap(),
            vec![su(0.0, 0.5), su(0.6, 0.7), su(0.8, 0.9)],
        ),
    ]
}
