//! Circle and line diffeomorphisms with exact derivatives.
//!
//! A [`CircleMap`] is an iterate of a base family lift `F`, normalised by
//! an integer translation and optionally conjugated by `x -> -x`:
//!
//! ```text
//!     G(x) = F^p(x) - s,        p != 0 (negative p iterates F^-1)
//!     G(x) = -(F^p(-x) - s)     when reflected
//! ```
//!
//! Powers, inverses and reflections therefore stay closed-form: the
//! derivative and the log-derivative slope `D^2 G / DG` are accumulated
//! along the orbit by the chain rule.

pub mod distortion;
pub mod family;
pub mod fixed;
pub mod rotation;
pub mod solve;
pub mod word;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
pub use family::{MapFamily, MonotoneSpline};
pub use word::{Letter, Word};

/// Iteration cap for monotone inversion.
pub const INVERSION_MAX_ITER: usize = 200;

/// Which generator of the pair a record belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Generator {
    F0,
    F1,
}

impl Generator {
    pub fn other(self) -> Self {
        match self {
            Generator::F0 => Generator::F1,
            Generator::F1 => Generator::F0,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Generator::F0 => 0,
            Generator::F1 => 1,
        }
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Generator::F0 => "f0",
            Generator::F1 => "f1",
        })
    }
}

/// Phase space of a map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Domain {
    /// The circle `R/Z`, worked with through lifts.
    Circle,
    /// The real line; `window` bounds all grid scans.
    Line { lo: f64, hi: f64 },
}

impl Domain {
    pub fn is_circle(&self) -> bool {
        matches!(self, Domain::Circle)
    }

    /// The interval scanned for fixed points and distortion.
    pub fn scan_window(&self) -> (f64, f64) {
        match *self {
            Domain::Circle => (0.0, 1.0),
            Domain::Line { lo, hi } => (lo, hi),
        }
    }

    fn reflect(self) -> Self {
        match self {
            Domain::Circle => Domain::Circle,
            Domain::Line { lo, hi } => Domain::Line { lo: -hi, hi: -lo },
        }
    }
}

/// Reduce a lift value to `[0, 1)`.
pub fn wrap(x: f64) -> f64 {
    let r = x.rem_euclid(1.0);
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// An orientation-preserving diffeomorphism of the circle or the line.
#[derive(Debug, Clone, PartialEq)]
pub struct CircleMap {
    family: Arc<MapFamily>,
    power: i32,
    shift: i64,
    reflected: bool,
    domain: Domain,
}

impl CircleMap {
    /// A circle map from a periodic family, validated on a fine grid.
    pub fn new(family: MapFamily) -> Result<Self> {
        if !family.is_periodic() {
            return Err(Error::InvalidMap(format!(
                "{} is a line family; use CircleMap::on_line",
                family.id()
            )));
        }
        family.validate((0.0, 1.0))?;
        Ok(Self { family: Arc::new(family), power: 1, shift: 0, reflected: false, domain: Domain::Circle })
    }

    /// A line map; grid scans are restricted to `[lo, hi]`.
    pub fn on_line(family: MapFamily, lo: f64, hi: f64) -> Result<Self> {
        if !(lo < hi) {
            return Err(Error::InvalidMap(format!("empty line window [{lo}, {hi}]")));
        }
        // Check a wider window so that orbits leaving the scan window stay
        // in the region where the derivative is known to be positive.
        let pad = hi - lo;
        family.validate((lo - pad, hi + pad))?;
        Ok(Self {
            family: Arc::new(family),
            power: 1,
            shift: 0,
            reflected: false,
            domain: Domain::Line { lo, hi },
        })
    }

    pub fn family(&self) -> &MapFamily {
        &self.family
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn power(&self) -> i32 {
        self.power
    }

    pub fn shift(&self) -> i64 {
        self.shift
    }

    pub fn is_reflected(&self) -> bool {
        self.reflected
    }

    /// The generator this map was built from (power 1, no shift, no
    /// reflection).
    pub fn base(&self) -> CircleMap {
        Self { family: self.family.clone(), power: 1, shift: 0, reflected: false, domain: self.base_domain() }
    }

    fn base_domain(&self) -> Domain {
        if self.reflected {
            self.domain.reflect()
        } else {
            self.domain
        }
    }

    pub fn inverse(&self) -> CircleMap {
        Self { power: -self.power, shift: -self.shift, ..self.clone() }
    }

    /// `G^k` for `k != 0`.
    pub fn pow(&self, k: i32) -> CircleMap {
        assert!(k != 0, "zero power is the identity, not a diffeomorphism of the family");
        Self { power: self.power * k, shift: self.shift * k as i64, ..self.clone() }
    }

    /// `G - s` for an integer `s`, used to normalise `f^q` by its
    /// rotation displacement.
    pub fn shifted(&self, s: i64) -> CircleMap {
        assert!(self.domain.is_circle() || s == 0, "integer shifts only make sense on the circle");
        let s = if self.reflected { -s } else { s };
        Self { shift: self.shift + s, ..self.clone() }
    }

    /// Conjugate by `x -> -x`.
    pub fn reflect(&self) -> CircleMap {
        Self { reflected: !self.reflected, domain: self.domain.reflect(), ..self.clone() }
    }

    /// Number of base-family evaluations per application.
    pub fn cost(&self) -> u32 {
        self.power.unsigned_abs()
    }

    fn base_inverse(&self, y: f64) -> f64 {
        let f = &*self.family;
        let guess = 2.0 * y - f.value(y);
        solve::solve_increasing(|x| {
            let (v, d, _) = f.jet(x);
            (v, d)
        }, y, guess, INVERSION_MAX_ITER)
        .x
    }

    /// `(G(x), G'(x), G''(x)/G'(x))` on the lift.
    pub fn jet(&self, x: f64) -> (f64, f64, f64) {
        let mut y = if self.reflected { -x } else { x };
        let mut d = 1.0;
        let mut ls = 0.0;
        if self.power > 0 {
            for _ in 0..self.power {
                let (v, dv, d2v) = self.family.jet(y);
                ls += d2v / dv * d;
                d *= dv;
                y = v;
            }
        } else {
            for _ in 0..(-self.power) {
                let x0 = self.base_inverse(y);
                let (_, dv, d2v) = self.family.jet(x0);
                // (log D F^-1)'(y) = -(D^2F/DF)(x0) / DF(x0).
                ls += -d2v / (dv * dv) * d;
                d /= dv;
                y = x0;
            }
        }
        y -= self.shift as f64;
        if self.reflected {
            (-y, d, -ls)
        } else {
            (y, d, ls)
        }
    }

    /// Lift value `G(x)`.
    pub fn lift(&self, x: f64) -> f64 {
        let mut y = if self.reflected { -x } else { x };
        if self.power > 0 {
            for _ in 0..self.power {
                y = self.family.value(y);
            }
        } else {
            for _ in 0..(-self.power) {
                y = self.base_inverse(y);
            }
        }
        y -= self.shift as f64;
        if self.reflected {
            -y
        } else {
            y
        }
    }

    /// `G(x)` as a point of the phase space (reduced to `[0, 1)` on the
    /// circle).
    pub fn eval(&self, x: f64) -> f64 {
        match self.domain {
            Domain::Circle => wrap(self.lift(x)),
            Domain::Line { .. } => self.lift(x),
        }
    }

    pub fn deriv(&self, x: f64) -> f64 {
        self.jet(x).1
    }

    /// `G'(x)` and `G(x)`.
    pub fn value_and_deriv(&self, x: f64) -> (f64, f64) {
        let (v, d, _) = self.jet(x);
        (v, d)
    }

    /// `D^2 G / DG`, the derivative of `log DG`.
    pub fn log_slope(&self, x: f64) -> f64 {
        self.jet(x).2
    }

    /// Solve `G(x) = y` on the lift with residual at most `tol`.
    pub fn invert_lift(&self, y: f64, tol: f64) -> Result<f64> {
        assert!(tol > 0.0, "inversion tolerance must be positive");
        let guess = 2.0 * y - self.lift(y);
        let s = solve::solve_increasing(|x| self.value_and_deriv(x), y, guess, INVERSION_MAX_ITER);
        if s.residual <= tol {
            Ok(s.x)
        } else {
            Err(Error::NonConvergence { y, iterations: s.iterations })
        }
    }

    /// Solve `G(x) = y` and report `x` as a phase-space point.
    pub fn invert(&self, y: f64, tol: f64) -> Result<f64> {
        let x = self.invert_lift(y, tol)?;
        Ok(match self.domain {
            Domain::Circle => wrap(x),
            Domain::Line { .. } => x,
        })
    }

    /// Sign-aware displacement `G(x) - x`.
    pub fn displacement(&self, x: f64) -> f64 {
        self.lift(x) - x
    }
}

impl fmt::Display for CircleMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.family.id())?;
        if self.power != 1 {
            write!(f, "^{}", self.power)?;
        }
        if self.shift != 0 {
            write!(f, " - {}", self.shift)?;
        }
        if self.reflected {
            write!(f, " (reflected)")?;
        }
        Ok(())
    }
}

/// The generating pair `(f0, f1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MapPair {
    pub f0: CircleMap,
    pub f1: CircleMap,
}

impl MapPair {
    pub fn new(f0: CircleMap, f1: CircleMap) -> Result<Self> {
        if f0.domain().is_circle() != f1.domain().is_circle() {
            return Err(Error::InvalidMap("both generators must act on the same space".into()));
        }
        Ok(Self { f0, f1 })
    }

    pub fn get(&self, g: Generator) -> &CircleMap {
        match g {
            Generator::F0 => &self.f0,
            Generator::F1 => &self.f1,
        }
    }

    pub fn domain(&self) -> Domain {
        // Use the union of the two windows on the line.
        match (self.f0.domain(), self.f1.domain()) {
            (Domain::Line { lo: a, hi: b }, Domain::Line { lo: c, hi: d }) => {
                Domain::Line { lo: a.min(c), hi: b.max(d) }
            }
            _ => Domain::Circle,
        }
    }

    pub fn is_circle(&self) -> bool {
        self.f0.domain().is_circle()
    }

    /// `Phi^-1 = (f0^-1, f1^-1)`.
    pub fn inverse(&self) -> MapPair {
        Self { f0: self.f0.inverse(), f1: self.f1.inverse() }
    }

    /// Conjugate both maps by `x -> -x`.
    pub fn reflect(&self) -> MapPair {
        Self { f0: self.f0.reflect(), f1: self.f1.reflect() }
    }

    /// Exchange the roles of `f0` and `f1`.
    pub fn swap(&self) -> MapPair {
        Self { f0: self.f1.clone(), f1: self.f0.clone() }
    }

    /// Lift image of `x` under one generator raised to `exp`.
    pub fn apply(&self, g: Generator, exp: i32, x: f64) -> f64 {
        let m = self.get(g);
        let mut y = x;
        if exp > 0 {
            for _ in 0..exp {
                y = m.lift(y);
            }
        } else {
            let inv = m.inverse();
            for _ in 0..(-exp) {
                y = inv.lift(y);
            }
        }
        y
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pr(alpha: f64, beta: f64) -> CircleMap {
        CircleMap::new(MapFamily::perturbed(alpha, beta, 0.0)).unwrap()
    }

    #[test]
    fn rigid_rotation_eval_and_invert() {
        let r = pr(0.25, 0.0);
        assert_eq!(r.eval(0.5), 0.75);
        assert!((r.invert(0.75, 1e-12).unwrap() - 0.5).abs() < 1e-15);
        assert!((r.eval(0.9) - 0.15).abs() < 1e-15);
    }

    #[test]
    fn powers_inverses_and_shift_compose() {
        let f = pr(0.3, 0.2);
        let f3 = f.pow(3).shifted(1);
        let x = 0.137;
        let direct = f.lift(f.lift(f.lift(x))) - 1.0;
        assert!((f3.lift(x) - direct).abs() < 1e-14);
        let back = f3.inverse().lift(f3.lift(x));
        assert!((back - x).abs() < 1e-13);
        // chain rule
        let d = f.deriv(x) * f.deriv(f.lift(x)) * f.deriv(f.lift(f.lift(x)));
        assert!((f3.deriv(x) - d).abs() < 1e-13);
    }

    #[test]
    fn reflection_conjugates() {
        let f = pr(0.1, 0.4);
        let g = f.reflect();
        for &x in &[0.1, 0.37, 0.8] {
            assert!((g.lift(x) + f.lift(-x)).abs() < 1e-15);
            assert!((g.deriv(x) - f.deriv(-x)).abs() < 1e-15);
            assert!((g.log_slope(x) + f.log_slope(-x)).abs() < 1e-14);
        }
        let gi = g.inverse();
        assert!((gi.lift(g.lift(0.3)) - 0.3).abs() < 1e-14);
        // Shift after reflection acts in the reflected coordinates.
        let h = g.pow(2).shifted(1);
        assert!((h.lift(0.2) - (g.lift(g.lift(0.2)) - 1.0)).abs() < 1e-14);
    }

    #[test]
    fn inverse_log_slope_matches_differences() {
        let f = pr(0.05, 0.5).inverse();
        for &x in &[0.0, 0.21, 0.63] {
            let h = 1e-5;
            let nd = (f.deriv(x + h).ln() - f.deriv(x - h).ln()) / (2.0 * h);
            assert!((f.log_slope(x) - nd).abs() < 1e-6);
        }
    }

    #[test]
    fn unattainable_tolerance_is_reported() {
        let f = pr(0.1, 0.05);
        let y = 1e6 + 0.3;
        match f.invert_lift(y, 1e-30) {
            Err(Error::NonConvergence { .. }) => {}
            // Only an exact hit can meet a tolerance below the spacing of
            // doubles near 1e6.
            Ok(x) => assert_eq!(f.lift(x), y),
            Err(e) => panic!("unexpected error {e}"),
        }
    }
}
