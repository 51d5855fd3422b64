//! Expansion of the return map.
//!
//! Locally, with `ε >= sup |Dg0 - 1|` on the window `[a, e]` and
//! `V = (L0 + L1)|e - a|` (`L_i` the Lipschitz constant of `log Dg_i` on
//! the window, so that the distortions over disjoint fundamental domains
//! add up to at most `V`), every branch satisfies
//!
//! ```text
//! |R(J)| / |J| >= (1 - ε) ε^-1 e^-V · D(R(y)) / D(y),    D(y) = |g0(y) - y|,
//! ```
//!
//! for `J = [x, y]` inside a piece. Along a cycle of length `n`, with
//! `V_i` the total variation of `log Dg_i` on the circle, two consecutive
//! stages gain at least `e^-(V0+V1) / (e^V1 - 1)` and a full return at
//! least that to the power `n/2`. Iterating, `DR^N >= b^N · C` with
//! `C = inf D / sup D` over the domain.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::global::{stagewise_return, CycleFrame};
use super::local::{extended_return, LocalFrame};
use super::{displacement_d, AtlasKind, ReturnMapAtlas};
use crate::config::Tolerances;
use crate::cycles::Cycle;
use crate::error::{Error, Result};
use crate::intervals::StarInterval;
use crate::maps::distortion::circle_variation;
use crate::maps::fixed::golden_min;
use crate::maps::{MapPair, Word};

/// Grid used for suprema on windows.
const WINDOW_CELLS: usize = 2048;
/// Step cap for brute-force returns used outside the atlas.
pub const BRUTE_FORCE_STEPS: usize = 100_000;
/// Intervals narrower than this are not imaged directly.
pub const MIN_WIDTH: f64 = 1e-14;

/// `sup |g|` on `[lo, hi]` from a grid refined around the largest sample.
pub fn sup_abs<G: Fn(f64) -> f64>(g: G, lo: f64, hi: f64, cells: usize) -> f64 {
    if !(hi > lo) {
        return g(lo).abs();
    }
    let step = (hi - lo) / cells as f64;
    let (mut best, mut ib) = (f64::NEG_INFINITY, 0);
    for i in 0..=cells {
        let v = g(lo + step * i as f64).abs();
        if v > best {
            best = v;
            ib = i;
        }
    }
    let a = (lo + step * (ib as f64 - 1.0)).max(lo);
    let b = (lo + step * (ib as f64 + 1.0)).min(hi);
    let (_, neg) = golden_min(|x| -g(x).abs(), a, b);
    best.max(-neg)
}

/// Constants of the local condition, all in the standard chart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalConstants {
    /// The `ε` the condition is evaluated with.
    pub epsilon: f64,
    /// `sup |Dg0 - 1|` measured on the window.
    pub epsilon_measured: f64,
    /// Lipschitz constants of `log Dg0`, `log Dg1` on the window.
    pub v0: f64,
    pub v1: f64,
    /// `|e - a|`.
    pub width: f64,
    /// `V = (v0 + v1) · width`.
    pub v: f64,
    /// `(1 - ε) ε^-1 e^-V`.
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Condition<C> {
    /// `margin = bound - 1 > 0`.
    Holds { margin: f64, constants: C },
    Fails { witness: String, constants: C },
}

impl<C> Condition<C> {
    pub fn holds(&self) -> bool {
        matches!(self, Condition::Holds { .. })
    }

    pub fn constants(&self) -> &C {
        match self {
            Condition::Holds { constants, .. } | Condition::Fails { constants, .. } => constants,
        }
    }
}

/// `(1 - ε) ε^-1 e^-V`: gain of one local return.
pub fn local_bound(epsilon: f64, v: f64) -> f64 {
    (1.0 - epsilon) / epsilon * (-v).exp()
}

/// The local gain when only `|Dg - 1| < ε` is known, with the distortion
/// estimated by `V = 2ε² / (1 - ε)`.
pub fn local_bound_from_epsilon(epsilon: f64) -> f64 {
    local_bound(epsilon, 2.0 * epsilon * epsilon / (1.0 - epsilon))
}

/// The local gain for periodic generators whose powers satisfy
/// `e^-ε < Dg < e^ε`: the derivative condition holds with `e^ε - 1` and
/// the distortion is at most `2ε`.
pub fn local_bound_periodic(epsilon: f64) -> f64 {
    local_bound(epsilon.exp_m1(), 2.0 * epsilon)
}

/// `e^-(V0+V1) / (e^V1 - 1)`: gain of two consecutive cycle stages.
pub fn cycle_pair_bound(v0: f64, v1: f64) -> f64 {
    (-(v0 + v1)).exp() / v1.exp_m1()
}

/// Both hypotheses of the local theorem on `K`: `|Dg0 - 1| < ε` on the
/// window and `(1 - ε) ε^-1 e^-V > 1`.
pub fn duminy_condition(pair: &MapPair, k: &StarInterval, epsilon: f64, tol: &Tolerances) -> Result<Condition<LocalConstants>> {
    let cp = k.chart.pair(pair);
    let fr = LocalFrame::new(&cp, k, tol)?;
    let (lo, hi) = (fr.a, fr.e);
    let eps_m = sup_abs(|x| cp.f0.deriv(x) - 1.0, lo, hi, WINDOW_CELLS);
    let v0 = sup_abs(|x| cp.f0.log_slope(x), lo, hi, WINDOW_CELLS);
    let v1 = sup_abs(|x| cp.f1.log_slope(x), lo, hi, WINDOW_CELLS);
    let width = hi - lo;
    let v = (v0 + v1) * width;
    let bound = local_bound(epsilon, v);
    let constants = LocalConstants { epsilon, epsilon_measured: eps_m, v0, v1, width, v, bound };
    Ok(if !(eps_m < epsilon) {
        Condition::Fails { witness: format!("sup |Dg0 - 1| = {eps_m:e} is not below {epsilon}"), constants }
    } else if !(bound > 1.0) {
        Condition::Fails { witness: format!("(1 - ε) ε^-1 e^-V = {bound} does not exceed 1"), constants }
    } else {
        Condition::Holds { margin: bound - 1.0, constants }
    })
}

/// Constants of the cycle condition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GlobalConstants {
    /// Total variation of `log Dg_i` on the circle.
    pub v0: f64,
    pub v1: f64,
    pub cycle_length: usize,
    /// `e^-(V0+V1) / (e^V1 - 1)`: gain of two consecutive stages.
    pub pair_bound: f64,
    /// `pair_bound^(n/2)`: gain of one return.
    pub bound: f64,
}

pub fn cycle_condition(pair: &MapPair, cycle: &Cycle) -> Condition<GlobalConstants> {
    let cp = if cycle.mirrored { pair.reflect() } else { pair.clone() };
    let v0 = circle_variation(&cp.f0);
    let v1 = circle_variation(&cp.f1);
    let pair_bound = cycle_pair_bound(v0, v1);
    let bound = pair_bound.powf(cycle.length as f64 / 2.0);
    let constants = GlobalConstants { v0, v1, cycle_length: cycle.length, pair_bound, bound };
    if pair_bound > 1.0 {
        Condition::Holds { margin: pair_bound - 1.0, constants }
    } else {
        Condition::Fails { witness: format!("e^-(V0+V1)/(e^V1 - 1) = {pair_bound} does not exceed 1"), constants }
    }
}

/// The per-return constant of either construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ExpansionBound {
    Local(LocalConstants),
    Global(GlobalConstants),
}

impl ExpansionBound {
    pub fn per_return(&self) -> f64 {
        match self {
            ExpansionBound::Local(c) => c.bound,
            ExpansionBound::Global(c) => c.bound,
        }
    }
}

/// Measured and analytic sides of a ratio inequality.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioCheck {
    pub measured: f64,
    pub analytic: f64,
    /// The interval was too narrow to image; `measured` is the derivative
    /// at the right endpoint instead.
    pub degenerate: bool,
}

impl RatioCheck {
    pub fn satisfied(&self, slack: f64) -> bool {
        self.measured >= self.analytic - slack
    }
}

/// `|R(J)|/|J|` against `bound · D(R(y))/D(y)` for `J = [x, y]` inside
/// the piece `piece`.
pub fn derivative_ratio_bound(atlas: &ReturnMapAtlas, chart_pair: &MapPair, piece: usize, x: f64, y: f64, bound: &ExpansionBound) -> RatioCheck {
    let p = &atlas.pieces[piece];
    let ry = p.word.apply(chart_pair, y) + atlas.shift;
    let analytic = bound.per_return() * displacement_d(chart_pair, ry) / displacement_d(chart_pair, y);
    if y - x < MIN_WIDTH {
        let (_, d) = p.word.apply_with_deriv(chart_pair, y);
        return RatioCheck { measured: d, analytic, degenerate: true };
    }
    let rx = p.word.apply(chart_pair, x) + atlas.shift;
    RatioCheck { measured: (ry - rx) / (y - x), analytic, degenerate: false }
}

/// Apply the first `j` letters of a stage word.
fn partial(word: &Word, j: usize, chart_pair: &MapPair, x: f64) -> f64 {
    Word(word.0[..j].to_vec()).apply(chart_pair, x)
}

/// `|R_{j+2}(J)| / |R_j(J)|` against
/// `pair_bound · D(R_{j+2}(y)) / D(R_j(y))`, where `R_j` is the partial
/// return through the first `j` stages of the piece's branch.
pub fn two_stage_ratio(atlas: &ReturnMapAtlas, chart_pair: &MapPair, piece: usize, j: usize, x: f64, y: f64, constants: &GlobalConstants) -> RatioCheck {
    let w = &atlas.pieces[piece].word;
    assert!(j + 2 <= w.0.len(), "stage index out of range");
    let (xj, yj) = (partial(w, j, chart_pair, x), partial(w, j, chart_pair, y));
    let (xk, yk) = (partial(w, j + 2, chart_pair, x), partial(w, j + 2, chart_pair, y));
    let analytic = constants.pair_bound * displacement_d(chart_pair, yk) / displacement_d(chart_pair, yj);
    if yj - xj < MIN_WIDTH {
        let (_, d) = Word(w.0[j..j + 2].to_vec()).apply_with_deriv(chart_pair, yj);
        return RatioCheck { measured: d, analytic, degenerate: true };
    }
    RatioCheck { measured: (yk - xk) / (yj - xj), analytic, degenerate: false }
}

/// `R(x)` with its branch word: from the atlas, or by brute force in the
/// tail.
pub fn return_branch(atlas: &ReturnMapAtlas, chart_pair: &MapPair, frame: &Frame, x: f64) -> Option<Word> {
    if let Some(i) = atlas.locate(x) {
        return Some(atlas.pieces[i].word.clone());
    }
    match frame {
        Frame::Local(fr) => extended_return(chart_pair, fr, x, BRUTE_FORCE_STEPS).map(|(_, w)| w),
        Frame::Global(fr) => stagewise_return(fr, x, BRUTE_FORCE_STEPS).map(|(_, e)| super::global::stage_word(&fr.owners, &e)),
    }
}

/// Geometry needed for brute-force returns.
#[derive(Debug, Clone)]
pub enum Frame {
    Local(LocalFrame),
    Global(CycleFrame),
}

/// `C = inf D / sup D` over the part of `A` the atlas resolves.
///
/// For a cycle `D` vanishes at the left end `s_0` of `A`, so the infimum
/// is taken from the leftmost resolved piece on.
pub fn c_f0(atlas: &ReturnMapAtlas, chart_pair: &MapPair) -> f64 {
    let (mut lo, hi) = atlas.domain;
    if matches!(atlas.kind, AtlasKind::Global { .. }) {
        lo = atlas.pieces.first().map_or(hi, |p| p.lo);
    }
    let cells = 8192;
    let (mut mn, mut mx) = (f64::INFINITY, 0.0f64);
    for i in 0..=cells {
        let x = lo + (hi - lo) * i as f64 / cells as f64;
        let d = displacement_d(chart_pair, x);
        mn = mn.min(d);
        mx = mx.max(d);
    }
    mn / mx
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificateMethod {
    AnalyticBound,
    MeasuredMin,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionCertificate {
    /// Power `N` of the return map.
    pub n: u32,
    /// Certified lower bound `bound^N · C` for `DR^N` on `A`.
    pub lambda: f64,
    pub kappa: f64,
    pub method: CertificateMethod,
    pub constants: ExpansionBound,
    pub c_f0: f64,
    /// Minimum of `DR^N` over the sampled points.
    pub measured_min: f64,
    pub samples: usize,
    /// Samples whose orbit could not be followed (brute force exhausted).
    pub unresolved_samples: usize,
}

/// Smallest `N >= 1` with `b^N · c > kappa`.
pub fn smallest_power(b: f64, c: f64, kappa: f64) -> Option<u32> {
    if !(b > 1.0) || !(c > 0.0) {
        return None;
    }
    let mut n = ((kappa / c).ln() / b.ln()).floor().max(0.0) as u32 + 1;
    while n > 1 && b.powi(n as i32 - 1) * c > kappa {
        n -= 1;
    }
    while !(b.powi(n as i32) * c > kappa) {
        n += 1;
    }
    Some(n)
}

/// `DR^N(x)` by the chain rule along the replayed branches.
pub fn power_derivative(atlas: &ReturnMapAtlas, chart_pair: &MapPair, frame: &Frame, x: f64, n: u32) -> Option<f64> {
    let mut y = x;
    let mut d = 1.0;
    for _ in 0..n {
        let w = return_branch(atlas, chart_pair, frame, y)?;
        let (z, dz) = w.apply_with_deriv(chart_pair, y);
        d *= dz;
        y = z + atlas.shift;
        if !(y > atlas.domain.0 && y <= atlas.domain.1 + 1e-12) {
            // Rounding at a piece boundary; snap back into A.
            y = y.clamp(atlas.domain.0 + f64::EPSILON * y.abs().max(1.0), atlas.domain.1);
        }
    }
    Some(d)
}

/// Analytic expansion certificate with a sampled cross-check.
pub fn expansion_certificate(
    atlas: &ReturnMapAtlas,
    chart_pair: &MapPair,
    frame: &Frame,
    bound: ExpansionBound,
    kappa: f64,
    samples: usize,
    seed: u64,
) -> Result<ExpansionCertificate> {
    assert!(kappa > 1.0, "kappa must exceed one");
    let b = bound.per_return();
    let c = c_f0(atlas, chart_pair);
    let n = smallest_power(b, c, kappa).ok_or(Error::BoundNotExceeded { bound: b })?;
    let lambda = b.powi(n as i32) * c;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = atlas.domain;
    let xs: Vec<f64> = (0..samples).map(|_| lo + (hi - lo) * (1.0 - rng.random::<f64>())).collect();
    let ds: Vec<Option<f64>> = xs.par_iter().map(|&x| power_derivative(atlas, chart_pair, frame, x, n)).collect();
    let measured_min = ds.iter().flatten().copied().fold(f64::INFINITY, f64::min);
    let unresolved = ds.iter().filter(|d| d.is_none()).count();
    Ok(ExpansionCertificate {
        n,
        lambda,
        kappa,
        method: CertificateMethod::AnalyticBound,
        constants: bound,
        c_f0: c,
        measured_min,
        samples,
        unresolved_samples: unresolved,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smallest_power_matches_closed_form() {
        assert_eq!(smallest_power(1.02, 0.5, 1.1), Some(40));
        assert_eq!(smallest_power(2.0, 1.0, 1.5), Some(1));
        assert_eq!(smallest_power(1.0, 0.5, 1.1), None);
    }
}
