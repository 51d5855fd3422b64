//! Closed-form families of orientation-preserving diffeomorphisms.
//!
//! Every family evaluates the lift together with its first and second
//! derivatives, so distortion constants never rely on finite differences.

use std::f64::consts::PI;

use crate::error::{Error, Result};

const TAU: f64 = 2.0 * PI;

/// An analytic (or piecewise-cubic) lift `F: R -> R`.
#[derive(Debug, Clone, PartialEq)]
pub enum MapFamily {
    /// `x + alpha + beta/(2 pi) * sin(2 pi (x - phase))`; a diffeomorphism
    /// for `|beta| < 1`. `beta = 0` is the rigid rotation by `alpha`.
    PerturbedRotation { alpha: f64, beta: f64, phase: f64 },
    /// `x + shift + amplitude * prod_i sin(pi (x - z_i))` with an even
    /// number of zeros, so the product is 1-periodic. With `shift = 0`
    /// the fixed points are exactly the `z_i` and, for positive amplitude
    /// and sorted zeros, stability alternates starting with an attractor.
    MorseSmale { shift: f64, amplitude: f64, zeros: Vec<f64> },
    /// A periodic monotone cubic interpolant of lift values.
    Spline(MonotoneSpline),
    /// Real-line family `x + shift + amplitude * prod_i tanh(x - z_i)`.
    LineBump { shift: f64, amplitude: f64, zeros: Vec<f64> },
}

impl MapFamily {
    pub fn rotation(alpha: f64) -> Self {
        MapFamily::PerturbedRotation { alpha, beta: 0.0, phase: 0.0 }
    }

    pub fn perturbed(alpha: f64, beta: f64, phase: f64) -> Self {
        MapFamily::PerturbedRotation { alpha, beta, phase }
    }

    pub fn morse_smale(shift: f64, amplitude: f64, zeros: Vec<f64>) -> Self {
        MapFamily::MorseSmale { shift, amplitude, zeros }
    }

    pub fn line_bump(shift: f64, amplitude: f64, zeros: Vec<f64>) -> Self {
        MapFamily::LineBump { shift, amplitude, zeros }
    }

    /// Whether the lift commutes with `x -> x + 1`.
    pub fn is_periodic(&self) -> bool {
        !matches!(self, MapFamily::LineBump { .. })
    }

    /// Identifier used in scenario files and reports.
    pub fn id(&self) -> &'static str {
        match self {
            MapFamily::PerturbedRotation { .. } => "perturbed_rotation",
            MapFamily::MorseSmale { .. } => "morse_smale",
            MapFamily::Spline(_) => "monotone_spline",
            MapFamily::LineBump { .. } => "line_bump",
        }
    }

    /// `(F(x), F'(x), F''(x))`.
    pub fn jet(&self, x: f64) -> (f64, f64, f64) {
        match self {
            MapFamily::PerturbedRotation { alpha, beta, phase } => {
                let (s, c) = (TAU * (x - phase)).sin_cos();
                (x + alpha + beta / TAU * s, 1.0 + beta * c, -TAU * beta * s)
            }
            MapFamily::MorseSmale { shift, amplitude, zeros } => {
                let (g, dg, d2g) = product_jet(zeros, x, |u| {
                    let (s, c) = (PI * u).sin_cos();
                    (s, PI * c, -PI * PI * s)
                });
                (x + shift + amplitude * g, 1.0 + amplitude * dg, amplitude * d2g)
            }
            MapFamily::Spline(s) => s.jet(x),
            MapFamily::LineBump { shift, amplitude, zeros } => {
                let (g, dg, d2g) = product_jet(zeros, x, |u| {
                    let t = u.tanh();
                    let sech2 = 1.0 - t * t;
                    (t, sech2, -2.0 * sech2 * t)
                });
                (x + shift + amplitude * g, 1.0 + amplitude * dg, amplitude * d2g)
            }
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        match self {
            MapFamily::PerturbedRotation { alpha, beta, phase } => {
                x + alpha + beta / TAU * (TAU * (x - phase)).sin()
            }
            _ => self.jet(x).0,
        }
    }

    /// Check parameters and strict positivity of the derivative on a grid.
    pub fn validate(&self, window: (f64, f64)) -> Result<()> {
        match self {
            MapFamily::PerturbedRotation { alpha, beta, phase } => {
                finite(&[*alpha, *beta, *phase])?;
                if beta.abs() >= 1.0 {
                    return Err(Error::InvalidMap(format!(
                        "perturbed rotation needs |beta| < 1, got {beta}"
                    )));
                }
            }
            MapFamily::MorseSmale { shift, amplitude, zeros } => {
                finite(&[*shift, *amplitude])?;
                finite(zeros)?;
                if zeros.is_empty() || zeros.len() % 2 != 0 {
                    return Err(Error::InvalidMap(format!(
                        "morse_smale needs a positive even number of zeros, got {}",
                        zeros.len()
                    )));
                }
            }
            MapFamily::LineBump { shift, amplitude, zeros } => {
                finite(&[*shift, *amplitude])?;
                finite(zeros)?;
            }
            MapFamily::Spline(_) => {}
        }
        let (lo, hi) = window;
        let n = 8192;
        for i in 0..=n {
            let x = lo + (hi - lo) * i as f64 / n as f64;
            let d = self.jet(x).1;
            if !(d > 0.0) {
                return Err(Error::InvalidMap(format!(
                    "{}: derivative {d} is not positive at x = {x}",
                    self.id()
                )));
            }
        }
        if self.is_periodic() {
            for i in 0..64 {
                let x = -3.0 + 6.0 * i as f64 / 64.0;
                let gap = self.value(x + 1.0) - self.value(x) - 1.0;
                if gap.abs() > 1e-12 {
                    return Err(Error::InvalidMap(format!(
                        "{}: lift is not periodic (defect {gap:e} at x = {x})",
                        self.id()
                    )));
                }
            }
        }
        Ok(())
    }
}

fn finite(v: &[f64]) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidMap("non-finite parameter".into()))
    }
}

/// Value, first and second derivative of `prod_i phi(x - z_i)` given the
/// jet of `phi`.
fn product_jet<P>(zeros: &[f64], x: f64, phi: P) -> (f64, f64, f64)
where
    P: Fn(f64) -> (f64, f64, f64),
{
    // Running jets of the partial products: (p, p', p'') * (u, u', u'').
    let (mut p, mut dp, mut d2p) = (1.0, 0.0, 0.0);
    for &z in zeros {
        let (u, du, d2u) = phi(x - z);
        let np = p * u;
        let ndp = dp * u + p * du;
        let nd2p = d2p * u + 2.0 * dp * du + p * d2u;
        p = np;
        dp = ndp;
        d2p = nd2p;
    }
    (p, dp, d2p)
}

/// Periodic monotone cubic Hermite interpolant of a circle lift.
///
/// Knots lie in `[0, 1)`; the lift takes `values[i]` at `knots[i]` and is
/// extended by `F(x + 1) = F(x) + 1`. Tangents follow Fritsch–Carlson, so
/// the interpolant is strictly increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneSpline {
    xs: Vec<f64>,
    ys: Vec<f64>,
    ms: Vec<f64>,
}

impl MonotoneSpline {
    pub fn new(knots: &[f64], values: &[f64]) -> Result<Self> {
        let n = knots.len();
        if n < 2 || values.len() != n {
            return Err(Error::InvalidMap(
                "monotone_spline needs at least two knots and one value per knot".into(),
            ));
        }
        finite(knots)?;
        finite(values)?;
        if knots[0] < 0.0 || knots[n - 1] >= 1.0 {
            return Err(Error::InvalidMap("spline knots must lie in [0, 1)".into()));
        }
        let mut xs = knots.to_vec();
        let mut ys = values.to_vec();
        xs.push(knots[0] + 1.0);
        ys.push(values[0] + 1.0);
        for i in 0..n {
            if !(xs[i + 1] > xs[i]) || !(ys[i + 1] > ys[i]) {
                return Err(Error::InvalidMap(
                    "spline knots and values must be strictly increasing over one period".into(),
                ));
            }
        }
        let delta: Vec<f64> = (0..n).map(|i| (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i])).collect();
        let mut ms: Vec<f64> = (0..n)
            .map(|i| 0.5 * (delta[(i + n - 1) % n] + delta[i]))
            .collect();
        for i in 0..n {
            let j = (i + 1) % n;
            let a = ms[i] / delta[i];
            let b = ms[j] / delta[i];
            let r2 = a * a + b * b;
            if r2 > 9.0 {
                let tau = 3.0 / r2.sqrt();
                ms[i] = tau * a * delta[i];
                ms[j] = tau * b * delta[i];
            }
        }
        ms.push(ms[0]);
        Ok(Self { xs, ys, ms })
    }

    pub fn knots(&self) -> &[f64] {
        &self.xs[..self.xs.len() - 1]
    }

    pub fn values(&self) -> &[f64] {
        &self.ys[..self.ys.len() - 1]
    }

    fn jet(&self, x: f64) -> (f64, f64, f64) {
        let n = self.xs.len() - 1;
        let k = (x - self.xs[0]).floor();
        let t = x - k;
        // Largest i with xs[i] <= t, clamped to a valid cell.
        let i = match self.xs.partition_point(|&v| v <= t) {
            0 => 0,
            p => (p - 1).min(n - 1),
        };
        let h = self.xs[i + 1] - self.xs[i];
        let s = (t - self.xs[i]) / h;
        let (y0, y1) = (self.ys[i], self.ys[i + 1]);
        let (m0, m1) = (self.ms[i] * h, self.ms[i + 1] * h);
        let s2 = s * s;
        let s3 = s2 * s;
        let v = (2.0 * s3 - 3.0 * s2 + 1.0) * y0
            + (s3 - 2.0 * s2 + s) * m0
            + (-2.0 * s3 + 3.0 * s2) * y1
            + (s3 - s2) * m1;
        let d = ((6.0 * s2 - 6.0 * s) * y0
            + (3.0 * s2 - 4.0 * s + 1.0) * m0
            + (-6.0 * s2 + 6.0 * s) * y1
            + (3.0 * s2 - 2.0 * s) * m1)
            / h;
        let d2 = ((12.0 * s - 6.0) * y0
            + (6.0 * s - 4.0) * m0
            + (-12.0 * s + 6.0) * y1
            + (6.0 * s - 2.0) * m1)
            / (h * h);
        (v + k, d, d2)
    }
}
