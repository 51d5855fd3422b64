//! Distortion of `log Df`: the sup-ratio `Dist(f, I)` and the total
//! variation `V_f` on the whole circle.

use serde::{Deserialize, Serialize};

use super::fixed::{fixed_points, golden_min};
use super::{CircleMap, Generator};
use crate::config::Tolerances;
use crate::error::{Error, Result};

/// Default number of cells for distortion scans.
pub const DISTORTION_CELLS: usize = 1 << 12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistortionEstimate {
    /// The domain `[lo, hi]`; the whole circle is `[0, 1]` with
    /// `whole_circle` set.
    pub lo: f64,
    pub hi: f64,
    pub whole_circle: bool,
    /// `sup log Df - inf log Df` on the domain.
    pub sup_log_ratio: f64,
    /// Total variation of `log Df` on the domain.
    pub total_variation_log_df: f64,
    pub grid_resolution: usize,
}

/// `sup_{x,y in [lo,hi]} (g(x) - g(y))` for a continuous `g`, from a grid
/// refined by golden-section search around the extreme samples.
pub fn oscillation<G: Fn(f64) -> f64>(g: G, lo: f64, hi: f64, cells: usize) -> f64 {
    if !(hi > lo) {
        return 0.0;
    }
    let step = (hi - lo) / cells as f64;
    let vals: Vec<f64> = (0..=cells).map(|i| g(lo + step * i as f64)).collect();
    let (mut imax, mut imin) = (0, 0);
    for (i, v) in vals.iter().enumerate() {
        if *v > vals[imax] {
            imax = i;
        }
        if *v < vals[imin] {
            imin = i;
        }
    }
    let around = |i: usize| {
        let a = lo + step * (i as f64 - 1.0);
        let b = lo + step * (i as f64 + 1.0);
        (a.max(lo), b.min(hi))
    };
    let (a, b) = around(imax);
    let (_, neg_max) = golden_min(|x| -g(x), a, b);
    let (a, b) = around(imin);
    let (_, min) = golden_min(&g, a, b);
    let max = (-neg_max).max(vals[imax]);
    let min = min.min(vals[imin]);
    max - min
}

/// Total variation of `log Df` on `[lo, hi]`: split at the zeros of
/// `D^2f/Df` and add the absolute increments of `log Df` between them.
pub fn total_variation(map: &CircleMap, lo: f64, hi: f64, cells: usize) -> f64 {
    if !(hi > lo) {
        return 0.0;
    }
    let step = (hi - lo) / cells as f64;
    let slope = |x: f64| map.log_slope(x);
    let mut breaks = vec![lo];
    let mut prev = slope(lo);
    for i in 1..=cells {
        let x = lo + step * i as f64;
        let s = slope(x);
        if prev * s < 0.0 {
            let (mut a, mut b) = (x - step, x);
            let sa = prev.signum();
            for _ in 0..80 {
                let m = 0.5 * (a + b);
                if m <= a || m >= b {
                    break;
                }
                if slope(m).signum() == sa {
                    a = m;
                } else {
                    b = m;
                }
            }
            breaks.push(0.5 * (a + b));
        }
        if s != 0.0 {
            prev = s;
        }
    }
    breaks.push(hi);
    breaks
        .windows(2)
        .map(|w| (map.deriv(w[1]).ln() - map.deriv(w[0]).ln()).abs())
        .sum()
}

/// Distortion of `map` on `[lo, hi]`, or on the whole circle (or the scan
/// window of a line map) when `domain` is `None`.
pub fn distortion(map: &CircleMap, domain: Option<(f64, f64)>) -> DistortionEstimate {
    let whole = domain.is_none();
    let (lo, hi) = domain.unwrap_or_else(|| map.domain().scan_window());
    let cells = DISTORTION_CELLS;
    let sup = oscillation(|x| map.deriv(x).ln(), lo, hi, cells);
    let tv = total_variation(map, lo, hi, cells);
    DistortionEstimate {
        lo,
        hi,
        whole_circle: whole && map.domain().is_circle(),
        sup_log_ratio: sup,
        // The oscillation never exceeds the variation; reconcile rounding
        // differences between the two independent scans.
        total_variation_log_df: tv.max(sup),
        grid_resolution: cells,
    }
}

/// `V_f`, the total variation of `log Df` over the circle.
pub fn circle_variation(map: &CircleMap) -> f64 {
    distortion(map, None).total_variation_log_df
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Closeness {
    Certified { variation: f64 },
    Refuted { variation: f64 },
}

impl Closeness {
    pub fn is_certified(&self) -> bool {
        matches!(self, Closeness::Certified { .. })
    }

    pub fn variation(&self) -> f64 {
        match *self {
            Closeness::Certified { variation } | Closeness::Refuted { variation } => variation,
        }
    }
}

/// `V_f <= epsilon`.
pub fn closeness_certificate(map: &CircleMap, epsilon: f64) -> Closeness {
    assert!(epsilon > 0.0, "epsilon must be positive");
    let v = circle_variation(map);
    if v <= epsilon {
        Closeness::Certified { variation: v }
    } else {
        Closeness::Refuted { variation: v }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerDerivativeBounds {
    pub period: u32,
    pub variation: f64,
    /// `e^{-V_f}`.
    pub lower: f64,
    /// `e^{V_f}`.
    pub upper: f64,
    pub measured_min: f64,
    pub measured_max: f64,
}

/// Numerical slack allowed between the measured range and the envelope.
pub const ENVELOPE_SLACK: f64 = 1e-9;

fn has_periodic_points(map: &CircleMap, period: u32, tol: &Tolerances) -> Result<bool> {
    match fixed_points(map, period, Generator::F0, tol) {
        Ok(v) => Ok(!v.is_empty()),
        Err(Error::ContinuumOfFixedPoints { .. }) => Ok(true),
        Err(e) => Err(e),
    }
}

/// Compare the measured range of `D(map^period)` with `[e^{-V}, e^{V}]`.
///
/// The envelope holds when `period` is the least period of the periodic
/// points; for multiples of it `D(map^period)` can leave the envelope at
/// the periodic points themselves, so those are rejected.
pub fn power_derivative_bounds(map: &CircleMap, period: u32, tol: &Tolerances) -> Result<PowerDerivativeBounds> {
    if !has_periodic_points(map, period, tol)? {
        return Err(Error::NoPeriodicPoints { period });
    }
    for d in (1..period).filter(|d| period % d == 0) {
        if map.domain().is_circle() && has_periodic_points(map, d, tol)? {
            return Err(Error::HypothesisFailure(vec![format!("period {period} is not the least period; periodic points of period {d} exist")]));
        }
    }
    let v = circle_variation(map);
    let g = map.pow(period as i32);
    let (lo, hi) = map.domain().scan_window();
    let n = DISTORTION_CELLS;
    let (mut mn, mut mx) = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..=n {
        let d = g.deriv(lo + (hi - lo) * i as f64 / n as f64);
        mn = mn.min(d);
        mx = mx.max(d);
    }
    let out = PowerDerivativeBounds { period, variation: v, lower: (-v).exp(), upper: v.exp(), measured_min: mn, measured_max: mx };
    if mn < out.lower - ENVELOPE_SLACK || mx > out.upper + ENVELOPE_SLACK {
        return Err(Error::EnvelopeViolation { lower: out.lower, upper: out.upper, measured_min: mn, measured_max: mx });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::MapFamily;

    #[test]
    fn rotation_has_zero_distortion() {
        let r = CircleMap::new(MapFamily::rotation(0.3)).unwrap();
        let d = distortion(&r, None);
        assert_eq!(d.sup_log_ratio, 0.0);
        assert_eq!(d.total_variation_log_df, 0.0);
    }

    #[test]
    fn perturbed_variation_closed_form() {
        for beta in [0.05, 0.1, 0.3] {
            let f = CircleMap::new(MapFamily::perturbed(0.1, beta, 0.17)).unwrap();
            let want = 2.0 * ((1.0 + beta).ln() - (1.0 - beta).ln());
            let d = distortion(&f, None);
            assert!((d.total_variation_log_df - want).abs() < 1e-12, "beta {beta}");
            assert!((d.sup_log_ratio - want / 2.0).abs() < 1e-12, "beta {beta}");
        }
    }
}
