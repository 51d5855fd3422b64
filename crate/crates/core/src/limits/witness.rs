//! Periodic-point witnesses: a word `w` and an interval `J` with
//! `w(J) ⊂ J` and `|Dw| < 1` on `J`. By the contraction principle `w` has
//! a unique fixed point in `J`, which is a hyperbolic attracting periodic
//! point of `w`. The expanding version (`w(J) ⊃ J`, `|Dw| > 1`) certifies
//! a repelling periodic point the same way, applied to `w^-1`.

use serde::{Deserialize, Serialize};

use crate::intervals::{Chart, StarInterval};
use crate::maps::fixed::{FixedPointRecord, Stability};
use crate::maps::{Generator, Letter, MapPair, Word};

/// Points at which `|Dw|` is sampled on `J`.
const DERIV_SAMPLES: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessKind {
    /// `w(J) ⊂ J`, `|Dw| < 1`: an attracting periodic point.
    Contracting,
    /// `w(J) ⊃ J`, `|Dw| > 1`: a repelling periodic point.
    Expanding,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodicWitness {
    pub kind: WitnessKind,
    /// Word in the generators of the pair, application order.
    pub word: Word,
    /// Integer translation applied after the word (circle only).
    pub shift: i64,
    /// `J` in lift coordinates.
    pub interval: (f64, f64),
    /// `w(J) - shift`.
    pub image: (f64, f64),
    /// Largest sampled `|Dw|` on `J` when contracting, smallest when
    /// expanding.
    pub derivative_bound: f64,
    pub fixed_point: f64,
    pub derivative_at_fixed_point: f64,
}

impl PeriodicWitness {
    /// Recompute image and derivative bound on the pair.
    pub fn verify(&self, pair: &MapPair) -> bool {
        let (lo, hi) = self.interval;
        let a = self.word.apply(pair, lo) - self.shift as f64;
        let b = self.word.apply(pair, hi) - self.shift as f64;
        let (dmin, dmax) = deriv_range(pair, &self.word, lo, hi);
        let inside = self.fixed_point >= lo && self.fixed_point <= hi;
        inside
            && match self.kind {
                WitnessKind::Contracting => a > lo && b < hi && dmax < 1.0,
                WitnessKind::Expanding => a < lo && b > hi && dmin > 1.0,
            }
    }
}

fn deriv_range(pair: &MapPair, w: &Word, lo: f64, hi: f64) -> (f64, f64) {
    (0..DERIV_SAMPLES).fold((f64::INFINITY, 0.0f64), |(mn, mx), i| {
        let x = lo + (hi - lo) * i as f64 / (DERIV_SAMPLES - 1) as f64;
        let d = w.apply_with_deriv(pair, x).1.abs();
        (mn.min(d), mx.max(d))
    })
}

/// Root of `w(x) - s - x` on `J`, where it changes sign: safeguarded
/// Newton.
fn fixed_point_in(pair: &MapPair, w: &Word, s: f64, lo: f64, hi: f64) -> f64 {
    let f_lo = w.apply(pair, lo) - s - lo;
    let (mut l, mut h) = (lo, hi);
    let mut x = 0.5 * (lo + hi);
    for _ in 0..200 {
        let (y, d) = w.apply_with_deriv(pair, x);
        let r = y - s - x;
        if r == 0.0 {
            break;
        }
        if (r > 0.0) == (f_lo > 0.0) {
            l = x;
        } else {
            h = x;
        }
        let newton = x - r / (d - 1.0);
        let next = if newton > l && newton < h { newton } else { 0.5 * (l + h) };
        let small = 4.0 * f64::EPSILON * x.abs().max(1.0);
        let step = (next - x).abs();
        x = next;
        if step <= small || h - l <= small {
            break;
        }
    }
    x
}

fn check(pair: &MapPair, w: &Word, j: (f64, f64), kind: WitnessKind) -> Option<PeriodicWitness> {
    let (lo, hi) = j;
    if !(hi > lo) {
        return None;
    }
    let (a, b) = (w.apply(pair, lo), w.apply(pair, hi));
    let shift = if pair.is_circle() { (0.5 * (a + b) - 0.5 * (lo + hi)).round() as i64 } else { 0 };
    let s = shift as f64;
    let (a, b) = (a - s, b - s);
    let ok = match kind {
        WitnessKind::Contracting => a > lo && b < hi,
        WitnessKind::Expanding => a < lo && b > hi,
    };
    if !ok {
        return None;
    }
    let (dmin, dmax) = deriv_range(pair, w, lo, hi);
    let bound = match kind {
        WitnessKind::Contracting if dmax < 1.0 => dmax,
        WitnessKind::Expanding if dmin > 1.0 => dmin,
        _ => return None,
    };
    let x = fixed_point_in(pair, w, s, lo, hi);
    let d = w.apply_with_deriv(pair, x).1;
    Some(PeriodicWitness { kind, word: w.clone(), shift, interval: (lo, hi), image: (a, b), derivative_bound: bound, fixed_point: x, derivative_at_fixed_point: d })
}

/// Check that `w` contracts `J` into itself (allowing an integer
/// translation on the circle) and locate its fixed point.
pub fn witness_for(pair: &MapPair, w: &Word, j: (f64, f64)) -> Option<PeriodicWitness> {
    check(pair, w, j, WitnessKind::Contracting)
}

/// Check that `w` expands `J` over itself and locate its fixed point.
pub fn expanding_witness_for(pair: &MapPair, w: &Word, j: (f64, f64)) -> Option<PeriodicWitness> {
    check(pair, w, j, WitnessKind::Expanding)
}

/// Shrink `J = [p - r, p + r]` until `w` contracts it into itself.
fn shrink_around(pair: &MapPair, w: &Word, p: f64, r0: f64) -> Option<PeriodicWitness> {
    let mut r = r0;
    for _ in 0..48 {
        if let Some(wt) = witness_for(pair, w, (p - r, p + r)) {
            return Some(wt);
        }
        r *= 0.5;
    }
    None
}

/// Witness for a hyperbolic fixed point of one generator: the generator
/// itself when it attracts, its inverse when it repels.
pub fn fixed_point_witness(pair: &MapPair, rec: &FixedPointRecord, gap: f64) -> Option<PeriodicWitness> {
    let e = match rec.stability {
        Stability::Attracting => 1,
        Stability::Repelling => -1,
        _ => return None,
    };
    let w = Word(vec![Letter { map: rec.map_tag, exponent: e }]);
    shrink_around(pair, &w, rec.location, (0.25 * gap).min(1e-2))
}

fn to_original(chart: &Chart, w: &Word) -> Word {
    let sign = if chart.inverted { -1 } else { 1 };
    Word(w.0.iter().map(|l| Letter { map: chart.original(l.map), exponent: sign * l.exponent }).collect())
}

/// Witness inside a star interval: a fixed point of `g0^n ∘ g1^m` or
/// `g1^m ∘ g0^n` (chart generators) in the interior, contracted onto by
/// the word or by its inverse.
pub fn star_interval_witness(pair: &MapPair, k: &StarInterval) -> Option<PeriodicWitness> {
    let cp = k.chart.pair(pair);
    let (a, b) = k.chart_endpoints();
    let b = if b.is_finite() { b } else { a + 4.0 };
    let grid = 256;
    const POWERS: [i32; 12] = [1, 2, 3, 4, 6, 8, 12, 16, 24, 32, 48, 64];
    let pairs = POWERS.iter().flat_map(|&m| POWERS.iter().map(move |&n| (m, n)));
    // Balanced words first: they are the cheapest.
    let mut pairs: Vec<(i32, i32)> = pairs.collect();
    pairs.sort_by_key(|&(m, n)| (m.max(n), m + n, m));
    for (m, n) in pairs {
        for first_g1 in [true, false] {
            let mut w = Word::empty();
            if first_g1 {
                w.push(Generator::F1, m);
                w.push(Generator::F0, n);
            } else {
                w.push(Generator::F0, n);
                w.push(Generator::F1, m);
            }
            let xs: Vec<f64> = (1..grid).map(|i| a + (b - a) * i as f64 / grid as f64).collect();
            let hs: Vec<f64> = xs.iter().map(|&x| w.apply(&cp, x) - x).collect();
            for i in 0..xs.len() - 1 {
                // A sign change of `w - id`: attracting for `w` when it
                // goes from + to -, otherwise attracting for `w^-1`.
                let attracting = hs[i] > 0.0 && hs[i + 1] <= 0.0;
                if !(attracting || (hs[i] < 0.0 && hs[i + 1] >= 0.0)) {
                    continue;
                }
                let (mut lo, mut hi) = (xs[i], xs[i + 1]);
                for _ in 0..100 {
                    let mid = 0.5 * (lo + hi);
                    if (w.apply(&cp, mid) - mid > 0.0) == attracting {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                let p = 0.5 * (lo + hi);
                let r0 = (p - a).min(b - p).min((b - a) / grid as f64);
                let wc = if attracting { w.clone() } else { w.inverse() };
                if let Some(wt) = shrink_around(&cp, &wc, p, r0) {
                    return Some(chart_back(&k.chart, wt));
                }
            }
        }
    }
    None
}

/// Express a chart witness in original coordinates and generators.
fn chart_back(chart: &Chart, wt: PeriodicWitness) -> PeriodicWitness {
    let word = to_original(chart, &wt.word);
    let flip = |(x, y): (f64, f64)| if chart.reflected { (-y, -x) } else { (x, y) };
    PeriodicWitness {
        word,
        shift: if chart.reflected { -wt.shift } else { wt.shift },
        interval: flip(wt.interval),
        image: flip(wt.image),
        kind: wt.kind,
        derivative_bound: wt.derivative_bound,
        fixed_point: chart.from_chart(wt.fixed_point),
        derivative_at_fixed_point: wt.derivative_at_fixed_point,
    }
}

/// A witness for a periodic point in the lifted interval `J`, which lies
/// in the basin of a hyperbolic attractor `p` of `g^sign` (derivative
/// `lambda` there), and `u` takes `p` into `J`.
///
/// The word is `w = u ∘ g^(sign N)`, which squeezes `J` towards `u(p)`.
/// With `sign = 1` it is returned as a contracting witness on `J`. With
/// `sign = -1` its inverse `v`, a word in positive powers, is returned as
/// an expanding witness on a small interval `K ⊂ J` around the fixed
/// point of `v` (this avoids evaluating inverse maps). `N` starts at the
/// estimate for squeezing `J` to `1e-12` near `p` when contracting, at 8
/// when expanding, and is doubled on failure.
pub fn bin_witness(pair: &MapPair, g: Generator, sign: i32, lambda: f64, u: &Word, j: (f64, f64)) -> Option<PeriodicWitness> {
    if sign > 0 {
        let est = ((1e-12 / (j.1 - j.0)).ln() / lambda.ln()).ceil();
        let mut n = if est.is_finite() { (est as i32).clamp(8, 1 << 16) } else { 1 << 12 };
        for _ in 0..5 {
            let mut w = Word::empty();
            w.push(g, n);
            if let Some(wt) = witness_for(pair, &w.then(u), j) {
                return Some(wt);
            }
            n = n.saturating_mul(2);
        }
        return None;
    }
    let mut n = 8;
    while n <= 1 << 16 {
        let mut w = Word::empty();
        w.push(g, -n);
        let v = w.then(u).inverse();
        n *= 2;
        let (a, b) = (v.apply(pair, j.0), v.apply(pair, j.1));
        let s = if pair.is_circle() { (0.5 * (a + b) - 0.5 * (j.0 + j.1)).round() } else { 0.0 };
        if !(a - s < j.0 && b - s > j.1) {
            continue;
        }
        let z = fixed_point_in(pair, &v, s, j.0, j.1);
        let dz = v.apply_with_deriv(pair, z).1.abs();
        if !(dz > 2.0) {
            continue;
        }
        let mut r = (0.25 / dz).min(z - j.0).min(j.1 - z);
        for _ in 0..30 {
            if let Some(wt) = expanding_witness_for(pair, &v, (z - r, z + r)) {
                return Some(wt);
            }
            r *= 0.5;
        }
    }
    None
}
