//! The first-return map of a star interval.
//!
//! In the standard chart `[a, b]` carries `g0 < id` (with `a` attracting)
//! and `g1 > id`. With `c = g1(a)` and `e = g0^-1(c)` the fundamental
//! domain is `A = (c, e]`. The auxiliary map
//!
//! ```text
//! F = g0^-1 on [a, c],    F = g1^-1 on (c, b]
//! ```
//!
//! sends a point of `A` back into `A` after `m` steps of `g1^-1` followed
//! by `n` steps of `g0^-1`, so `R = g0^-n ∘ g1^-m`.
//!
//! The first split is by `m`: with `u_m = g1^m(a)` the set `{m(x) = m}`
//! is `I_m = (u_m, min(u_{m+1}, e)]`. Inside `I_m` the point
//! `y = g1^-m(x)` lies in `(a, y_m]`, and `n(x) = n` exactly when
//! `y ∈ (v_n, v_{n-1}]` with `v_n = g0^n(c)`. The pieces are therefore
//! `I_{mn} = g1^m (v_n, min(v_{n-1}, y_m)]` for `n >= n_min(m)`, the
//! smallest `n` with `v_n < y_m`; the atlas keeps `depth` of them per `m`.

use super::{AtlasKind, Discontinuity, OrbitExpr, Piece, ReturnMapAtlas};
use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::intervals::StarInterval;
use crate::maps::{Generator, MapPair, Word};

/// Iteration cap for the orbits `u_m` and `v_n`.
const ORBIT_CAP: usize = 1_000_000;

/// Geometry of `A` in the standard chart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalFrame {
    pub a: f64,
    pub b: f64,
    /// `c = g1(a)`.
    pub c: f64,
    /// `e = g0^-1(c)`.
    pub e: f64,
}

impl LocalFrame {
    /// Frame of `K` for the chart pair; checks the chart orientation.
    pub fn new(chart_pair: &MapPair, k: &StarInterval, tol: &Tolerances) -> Result<Self> {
        let (a, b) = k.chart_endpoints();
        let (g0, g1) = (&chart_pair.f0, &chart_pair.f1);
        if (g0.lift(a) - a).abs() > tol.point.max(1e-9) {
            return Err(Error::InvalidMap(format!("chart endpoint {a} is not fixed by g0")));
        }
        let c = g1.lift(a);
        if !(c > a) {
            return Err(Error::InvalidMap(format!("g1 does not push {a} to the right")));
        }
        let e = g0.invert_lift(c, tol.inversion.max(1e-12 * c.abs()))?;
        if e > b {
            return Err(Error::OverlapEmpty);
        }
        Ok(Self { a, b, c, e })
    }

    pub fn in_domain(&self, x: f64) -> bool {
        x > self.c && x <= self.e
    }
}

/// One step of the auxiliary map `F`, with the letter used.
pub fn auxiliary_step(chart_pair: &MapPair, frame: &LocalFrame, x: f64) -> (f64, Generator) {
    if x <= frame.c {
        (chart_pair.f0.inverse().lift(x), Generator::F0)
    } else {
        (chart_pair.f1.inverse().lift(x), Generator::F1)
    }
}

/// `R` extended to `(a, b)`: iterate `F` until the orbit enters `A`
/// (`k(x) >= 0` steps), then apply the return `F^(m+n)`, which leaves `A`
/// through `(a, c]` and re-enters by a step of `g0^-1`. Returns the image
/// and the word used, or `None` after `max_steps`.
///
/// Note that for `x ∈ (g1^2(a), e]` the point `F(x) = g1^-1(x)` is already
/// in `A`; the return map still continues until the orbit has passed
/// through `(a, c]`.
pub fn extended_return(chart_pair: &MapPair, frame: &LocalFrame, x: f64, max_steps: usize) -> Option<(f64, Word)> {
    let mut y = x;
    let mut w = Word::empty();
    let mut steps = 0;
    while !frame.in_domain(y) {
        if !(y > frame.a) || steps >= max_steps {
            return None;
        }
        let (z, g) = auxiliary_step(chart_pair, frame, y);
        w.push(g, -1);
        y = z;
        steps += 1;
    }
    loop {
        if !(y > frame.a) || steps >= max_steps {
            return None;
        }
        let (z, g) = auxiliary_step(chart_pair, frame, y);
        w.push(g, -1);
        y = z;
        steps += 1;
        if g == Generator::F0 && frame.in_domain(y) {
            return Some((y, w));
        }
    }
}

fn expr(base_point: f64, word: Word, value: f64) -> OrbitExpr {
    OrbitExpr { base: "a".into(), base_point, word, value }
}

/// `[g1, g0^n, g1^m]`: the point `g1^m g0^n g1(a)`.
fn orbit_word(m: u32, n: u32) -> Word {
    let mut w = Word::empty();
    w.push(Generator::F1, 1);
    w.push(Generator::F0, n as i32);
    w.push(Generator::F1, m as i32);
    w
}

/// Build the local return-map atlas of `k` with `depth` pieces per
/// `I_m`.
pub fn build_local_return_map(pair: &MapPair, k: &StarInterval, depth: usize, tol: &Tolerances) -> Result<ReturnMapAtlas> {
    assert!(depth > 0, "depth must be positive");
    let cp = k.chart.pair(pair);
    let fr = LocalFrame::new(&cp, k, tol)?;
    let (g0, g1) = (&cp.f0, &cp.f1);
    let (a, c, e) = (fr.a, fr.c, fr.e);

    // u_1 = c < u_2 < ... ; u_M < e <= u_{M+1}.
    let mut u = vec![a, c];
    while *u.last().unwrap() < e {
        if u.len() > ORBIT_CAP {
            return Err(Error::BudgetExhausted { budget: ORBIT_CAP });
        }
        let next = g1.lift(*u.last().unwrap());
        u.push(next);
    }
    let big_m = u.len() - 2;

    // v_0 = c > v_1 > ... -> a, extended lazily.
    let mut v = vec![c];
    let v_at = |n: usize, v: &mut Vec<f64>| -> Result<f64> {
        while v.len() <= n {
            if v.len() > ORBIT_CAP {
                return Err(Error::BudgetExhausted { budget: ORBIT_CAP });
            }
            let next = g0.lift(*v.last().unwrap());
            v.push(next);
        }
        Ok(v[n])
    };

    let mut pieces = Vec::new();
    let mut tail = 0.0;
    let e_expr = {
        let mut w = Word::empty();
        w.push(Generator::F1, 1);
        w.push(Generator::F0, -1);
        expr(a, w, e)
    };
    for m in 1..=big_m {
        let lo_m = u[m];
        let (hi_m, hi_m_expr) = if u[m + 1] < e {
            let mut w = Word::empty();
            w.push(Generator::F1, (m + 1) as i32);
            (u[m + 1], expr(a, w, u[m + 1]))
        } else {
            (e, e_expr.clone())
        };
        let y_m = g1.pow(-(m as i32)).lift(hi_m);
        let mut n = 1;
        while v_at(n, &mut v)? >= y_m {
            n += 1;
        }
        let n_min = n;
        let mut hi = hi_m;
        let mut hi_expr = hi_m_expr;
        for n in n_min..n_min + depth {
            let vn = v_at(n, &mut v)?;
            let lo = g1.pow(m as i32).lift(vn);
            let lo_expr = expr(a, orbit_word(m as u32, n as u32), lo);
            let mut word = Word::empty();
            word.push(Generator::F1, -(m as i32));
            word.push(Generator::F0, -(n as i32));
            pieces.push(Piece {
                lo,
                hi,
                indices: vec![m as u32, n as u32],
                word,
                lo_expr: Some(lo_expr.clone()),
                hi_expr: Some(hi_expr),
            });
            hi = lo;
            hi_expr = lo_expr;
        }
        tail += hi - lo_m;
    }
    pieces.sort_by(|p, q| p.lo.total_cmp(&q.lo));

    let mut discontinuities: Vec<Discontinuity> = Vec::new();
    for p in &pieces {
        for ex in [&p.lo_expr, &p.hi_expr].into_iter().flatten() {
            let x = ex.value;
            if x > c + tol.point && x < e - tol.point && !discontinuities.iter().any(|d| (d.point - x).abs() <= tol.point) {
                discontinuities.push(Discontinuity { point: x, expression: ex.clone() });
            }
        }
    }
    // The accumulation points u_m, m >= 2, are discontinuities as well.
    for (m, &um) in u.iter().enumerate().take(big_m + 1).skip(2) {
        if !discontinuities.iter().any(|d| (d.point - um).abs() <= tol.point) {
            let mut w = Word::empty();
            w.push(Generator::F1, m as i32);
            discontinuities.push(Discontinuity { point: um, expression: expr(a, w, um) });
        }
    }
    discontinuities.sort_by(|p, q| p.point.total_cmp(&q.point));

    Ok(ReturnMapAtlas {
        kind: AtlasKind::Local { interval_kind: k.kind, a, b: fr.b },
        chart: k.chart,
        domain: (c, e),
        pieces,
        discontinuities,
        depth,
        tail_mass: tail,
        shift: 0.0,
    })
}
