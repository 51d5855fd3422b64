//! Rotation numbers and their rationality verdict.

use serde::{Deserialize, Serialize};

use super::fixed::fixed_points;
use super::{CircleMap, Generator};
use crate::config::Tolerances;
use crate::error::{Error, Result};

/// Rationality verdict of a rotation number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RotationVerdict {
    /// `f^q` has fixed points and its lift moves them by the integer `p`.
    /// `p` is not reduced modulo `q`.
    Rational { p: i64, q: u32 },
    IrrationalSuspected,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RotationNumber {
    /// Birkhoff estimate `(L^n(0) - 0) / n`.
    pub estimate: f64,
    /// `1 / n`.
    pub error_bound: f64,
    pub verdict: RotationVerdict,
}

impl RotationNumber {
    /// The rotation number reduced to `[0, 1)` when rational.
    pub fn value(&self) -> f64 {
        match self.verdict {
            RotationVerdict::Rational { p, q } => p.rem_euclid(q as i64) as f64 / q as f64,
            RotationVerdict::IrrationalSuspected => self.estimate.rem_euclid(1.0),
        }
    }
}

/// Estimate the rotation number and test rationality for denominators up
/// to `max_q`.
pub fn rotation_number(map: &CircleMap, budget: usize, tol: &Tolerances, max_q: u32) -> Result<RotationNumber> {
    if !map.domain().is_circle() {
        return Err(Error::InvalidMap("rotation numbers are defined for circle maps".into()));
    }
    let n = budget.max(1000);
    let mut x = 0.0;
    for _ in 0..n {
        x = map.lift(x);
    }
    let estimate = x / n as f64;
    let error_bound = 1.0 / n as f64;
    for q in 1..=max_q.max(1) {
        let t = estimate * q as f64;
        if (t - t.round()).abs() > q as f64 * error_bound + 1e-12 {
            continue;
        }
        let periodic = match fixed_points(map, q, Generator::F0, tol) {
            Ok(v) => !v.is_empty(),
            Err(Error::ContinuumOfFixedPoints { .. }) => true,
            Err(e) => return Err(e),
        };
        if periodic {
            return Ok(RotationNumber { estimate, error_bound, verdict: RotationVerdict::Rational { p: t.round() as i64, q } });
        }
    }
    Ok(RotationNumber { estimate, error_bound, verdict: RotationVerdict::IrrationalSuspected })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::MapFamily;

    #[test]
    fn rigid_quarter_rotation() {
        let r = CircleMap::new(MapFamily::rotation(0.25)).unwrap();
        let rn = rotation_number(&r, 1000, &Tolerances::default(), 12).unwrap();
        assert!((rn.estimate - 0.25).abs() < 1e-12);
        assert_eq!(rn.verdict, RotationVerdict::Rational { p: 1, q: 4 });
    }

    #[test]
    fn golden_rotation_is_irrational() {
        let r = CircleMap::new(MapFamily::rotation((5f64.sqrt() - 1.0) / 2.0)).unwrap();
        let rn = rotation_number(&r, 2000, &Tolerances::default(), 12).unwrap();
        assert_eq!(rn.verdict, RotationVerdict::IrrationalSuspected);
    }
}
