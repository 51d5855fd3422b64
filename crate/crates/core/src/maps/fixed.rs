//! Fixed and periodic points of `f^q` with stability classification.
//!
//! The displacement `h(x) = f^q(x) - x - p` is sampled on a uniform grid
//! of `2^12` cells. Sign changes are refined by bisection to machine
//! resolution. Local minima of `|h|` without a sign change are tangency
//! candidates: a golden-section search either finds a pair of nearby
//! transversal roots, a double root (a parabolic point), or proves the
//! candidate is not a fixed point. Anything in between is reported as
//! unresolved rather than silently dropped.

use serde::{Deserialize, Serialize};

use super::{wrap, CircleMap, Domain, Generator};
use crate::config::Tolerances;
use crate::error::{Error, Result};

/// Number of cells of the initial scan grid.
pub const SCAN_CELLS: usize = 1 << 12;

/// Local behaviour of `f^q` near a fixed point.
///
/// `SemiAttractingLeft` attracts points on its left and repels on its
/// right; `SemiAttractingRight` is the mirror case.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stability {
    Attracting,
    Repelling,
    SemiAttractingLeft,
    SemiAttractingRight,
    ParabolicUnresolved,
}

impl Stability {
    /// Attracts from at least one side.
    pub fn has_basin(self) -> bool {
        matches!(self, Stability::Attracting | Stability::SemiAttractingLeft | Stability::SemiAttractingRight)
    }

    pub fn attracts_from_left(self) -> bool {
        matches!(self, Stability::Attracting | Stability::SemiAttractingLeft)
    }

    pub fn attracts_from_right(self) -> bool {
        matches!(self, Stability::Attracting | Stability::SemiAttractingRight)
    }
}

/// A fixed point of `f^period`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedPointRecord {
    pub location: f64,
    pub period: u32,
    pub map_tag: Generator,
    pub stability: Stability,
    /// `D f^period` at the point.
    pub derivative: f64,
}

/// All fixed points of `map^period`, sorted by location.
///
/// On the circle, returns an empty list when `map^period - id` misses
/// every integer (the rotation number is incompatible with the period).
pub fn fixed_points(
    map: &CircleMap,
    period: u32,
    tag: Generator,
    tol: &Tolerances,
) -> Result<Vec<FixedPointRecord>> {
    assert!(period > 0, "period must be positive");
    let g = map.pow(period as i32);
    let (lo, hi) = map.domain().scan_window();
    let n = SCAN_CELLS;
    let xs: Vec<f64> = (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect();
    let raw: Vec<f64> = xs.iter().map(|&x| g.lift(x) - x).collect();

    let p = match map.domain() {
        Domain::Circle => {
            let (mn, mx) = raw.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
            let cand = (mn - tol.point).ceil();
            if cand > mx + tol.point {
                return Ok(Vec::new());
            }
            cand
        }
        Domain::Line { .. } => 0.0,
    };
    let h = |x: f64| g.lift(x) - x - p;
    let hs: Vec<f64> = raw.iter().map(|v| v - p).collect();

    if hs.iter().all(|v| v.abs() <= tol.point) {
        return Err(Error::ContinuumOfFixedPoints { period });
    }

    let mut roots: Vec<f64> = Vec::new();
    for i in 0..n {
        let (a, b) = (hs[i], hs[i + 1]);
        if a == 0.0 {
            roots.push(xs[i]);
        } else if a * b < 0.0 {
            roots.push(bisect(&h, xs[i], xs[i + 1], a));
        }
    }
    if hs[n] == 0.0 {
        roots.push(xs[n]);
    }

    // Tangency candidates: strict local minima of |h| with no sign change
    // in the neighbouring cells.
    let idx: Box<dyn Fn(isize) -> usize> = if map.domain().is_circle() {
        Box::new(move |i: isize| i.rem_euclid(n as isize) as usize)
    } else {
        Box::new(move |i: isize| i.clamp(0, n as isize) as usize)
    };
    let range: Vec<isize> = if map.domain().is_circle() { (0..n as isize).collect() } else { (1..n as isize).collect() };
    for i in range {
        let (l, c, r) = (hs[idx(i - 1)], hs[idx(i)], hs[idx(i + 1)]);
        if c == 0.0 || l * c <= 0.0 || c * r <= 0.0 {
            continue;
        }
        if !(c.abs() <= l.abs() && c.abs() < r.abs()) {
            continue;
        }
        let step = (hi - lo) / n as f64;
        let (a, b) = (xs[idx(i)] - step, xs[idx(i)] + step);
        let s = c.signum();
        let (xm, vm) = golden_min(|x| s * h(x), a, b);
        if vm <= 0.0 {
            // Two transversal roots hidden inside one cell pair.
            roots.push(bisect(&h, a, xm, h(a)));
            if vm < 0.0 {
                roots.push(bisect(&h, xm, b, h(xm)));
            }
        } else if vm <= tol.point {
            roots.push(xm);
        } else if vm <= 10.0 * tol.point {
            return Err(Error::UnresolvedTangency { location: xm, residual: vm });
        }
    }

    let circle = map.domain().is_circle();
    let mut locs: Vec<f64> = roots.into_iter().map(|x| if circle { wrap(x) } else { x }).collect();
    locs.sort_by(|a, b| a.total_cmp(b));
    locs.dedup_by(|b, a| (*b - *a).abs() < tol.point);
    if circle && locs.len() > 1 && locs[0] + 1.0 - locs[locs.len() - 1] < tol.point {
        locs.pop();
    }

    let k = locs.len();
    let mut out = Vec::with_capacity(k);
    for (j, &x) in locs.iter().enumerate() {
        // Distance to the neighbouring roots bounds the one-sided probes.
        let gap = if k == 1 {
            if circle { 1.0 } else { hi - lo }
        } else {
            let prev = if j > 0 { x - locs[j - 1] } else if circle { x + 1.0 - locs[k - 1] } else { f64::INFINITY };
            let next = if j + 1 < k { locs[j + 1] - x } else if circle { locs[0] + 1.0 - x } else { f64::INFINITY };
            prev.min(next)
        };
        let derivative = g.deriv(x);
        let stability = classify(&h, x, derivative, gap, tol);
        out.push(FixedPointRecord { location: x, period, map_tag: tag, stability, derivative });
    }
    Ok(out)
}

fn classify<H: Fn(f64) -> f64>(h: &H, x: f64, d: f64, gap: f64, tol: &Tolerances) -> Stability {
    if d < 1.0 - tol.margin {
        return Stability::Attracting;
    }
    if d > 1.0 + tol.margin {
        return Stability::Repelling;
    }
    let mut delta = (0.25 * gap).min(1e-3);
    while delta > 1e-8 {
        let (l, r) = (h(x - delta), h(x + delta));
        if l.abs() > tol.point && r.abs() > tol.point {
            return match (l > 0.0, r < 0.0) {
                (true, true) => Stability::Attracting,
                (false, false) => Stability::Repelling,
                (true, false) => Stability::SemiAttractingLeft,
                (false, true) => Stability::SemiAttractingRight,
            };
        }
        delta *= 4.0;
        if delta > 0.25 * gap {
            break;
        }
    }
    Stability::ParabolicUnresolved
}

/// Bisection for a sign change of `h` on `[a, b]` given `h(a)`.
fn bisect<H: Fn(f64) -> f64>(h: &H, mut a: f64, mut b: f64, ha: f64) -> f64 {
    let sa = ha.signum();
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let hm = h(m);
        if hm == 0.0 {
            return m;
        }
        if hm.signum() == sa {
            a = m;
        } else {
            b = m;
        }
    }
    // Return the endpoint with the smaller residual.
    if h(a).abs() <= h(b).abs() {
        a
    } else {
        b
    }
}

/// Golden-section minimisation of a unimodal function on `[a, b]`.
pub(crate) fn golden_min<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64) -> (f64, f64) {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if b - a <= 4.0 * f64::EPSILON * a.abs().max(1.0) {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Fixed points of one generator at period 1, failing with
/// [`Error::CommonFixedPoint`] if any coincide with `other`'s.
pub fn check_common_fixed_points(a: &[FixedPointRecord], b: &[FixedPointRecord], tol: &Tolerances, circle: bool) -> Result<()> {
    for p in a {
        for q in b {
            let mut d = (p.location - q.location).abs();
            if circle {
                d = d.min(1.0 - d);
            }
            if d <= tol.point.max(1e-9) {
                return Err(Error::CommonFixedPoint { location: p.location });
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::MapFamily;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn rotation_has_no_fixed_points() {
        let r = CircleMap::new(MapFamily::rotation(0.25)).unwrap();
        assert!(fixed_points(&r, 1, Generator::F0, &tol()).unwrap().is_empty());
        assert!(matches!(
            fixed_points(&r, 4, Generator::F0, &tol()),
            Err(Error::ContinuumOfFixedPoints { period: 4 })
        ));
    }

    #[test]
    fn perturbed_rotation_pair() {
        let f = CircleMap::new(MapFamily::perturbed(0.0, 0.05, 0.0)).unwrap();
        let fp = fixed_points(&f, 1, Generator::F0, &tol()).unwrap();
        assert_eq!(fp.len(), 2);
        assert!(fp[0].location.abs() < 1e-15);
        assert_eq!(fp[0].stability, Stability::Repelling);
        assert!((fp[0].derivative - 1.05).abs() < 1e-14);
        assert!((fp[1].location - 0.5).abs() < 1e-14);
        assert_eq!(fp[1].stability, Stability::Attracting);
    }

    #[test]
    fn parabolic_point_is_semi_attracting() {
        // x + (beta/2pi)(sin(2 pi x) - 1)... shift so the maximum of the
        // perturbation touches zero: f(x) = x - beta/2pi + beta/2pi sin(2pi x).
        let beta = 0.1;
        let f = CircleMap::new(MapFamily::perturbed(-beta / (2.0 * std::f64::consts::PI), beta, 0.0)).unwrap();
        let fp = fixed_points(&f, 1, Generator::F1, &tol()).unwrap();
        assert_eq!(fp.len(), 1);
        assert!((fp[0].location - 0.25).abs() < 1e-4);
        // f <= id everywhere: points on the right move left onto it.
        assert_eq!(fp[0].stability, Stability::SemiAttractingRight);
    }

    #[test]
    fn root_on_the_last_grid_point_is_kept() {
        // f(1) - 1 is exactly zero while f(0) - 0 is a rounding residue.
        let f = CircleMap::new(MapFamily::perturbed(0.0, 0.3, 0.5)).unwrap();
        let fp = fixed_points(&f, 1, Generator::F0, &tol()).unwrap();
        assert_eq!(fp.len(), 2);
        assert!(fp[0].location.abs() < 1e-12);
        assert_eq!(fp[0].stability, Stability::Attracting);
    }

    #[test]
    fn line_fixed_points() {
        let f = CircleMap::on_line(MapFamily::line_bump(0.0, 0.3, vec![-1.0, 1.0]), -6.0, 6.0).unwrap();
        let fp = fixed_points(&f, 1, Generator::F0, &tol()).unwrap();
        assert_eq!(fp.len(), 2);
        assert!((fp[0].location + 1.0).abs() < 1e-12);
        assert!((fp[1].location - 1.0).abs() < 1e-12);
    }
}
