//! Star intervals (`ss`, `su`, `uu`, `s`, `u`) and basins of attraction.
//!
//! A star interval has endpoints that are fixed points of the generators
//! and no fixed point of either generator inside. It is therefore always
//! a gap of the merged fixed-point inventory, and on a gap each `f_i - id`
//! has a constant sign. The kind is decided from those two signs, the
//! owners of the endpoints, and the covering inequality.
//!
//! Every bounded kind has a *standard chart*, obtained by inverting,
//! reflecting (`x -> -x`) and/or swapping the generators, in which the
//! interval is `[a, b]` with `g0 < id` and `g1 > id` on `(a, b)` and `a`
//! an attractor of `g0`. The return-map constructions work in that chart.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::maps::fixed::{check_common_fixed_points, fixed_points, FixedPointRecord, Stability};
use crate::maps::{wrap, Generator, MapPair};

/// Kind of a star interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StarKind {
    Ss,
    Su,
    Uu,
    S,
    U,
}

impl StarKind {
    /// The kind of the same interval seen by the inverse pair.
    pub fn dual(self) -> StarKind {
        match self {
            StarKind::Ss => StarKind::Uu,
            StarKind::Uu => StarKind::Ss,
            StarKind::Su => StarKind::Su,
            StarKind::S => StarKind::U,
            StarKind::U => StarKind::S,
        }
    }

    pub fn is_bounded(self) -> bool {
        matches!(self, StarKind::Ss | StarKind::Su | StarKind::Uu)
    }
}

impl fmt::Display for StarKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StarKind::Ss => "ss",
            StarKind::Su => "su",
            StarKind::Uu => "uu",
            StarKind::S => "s",
            StarKind::U => "u",
        })
    }
}

/// How to move a pair into the standard chart of an interval.
///
/// The chart pair is built by inverting both maps (if `inverted`), then
/// conjugating by `x -> -x` (if `reflected`), then exchanging the roles
/// of `f0` and `f1` (if `swapped`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Chart {
    pub inverted: bool,
    pub reflected: bool,
    pub swapped: bool,
}

impl Chart {
    pub fn pair(&self, pair: &MapPair) -> MapPair {
        let mut p = pair.clone();
        if self.inverted {
            p = p.inverse();
        }
        if self.reflected {
            p = p.reflect();
        }
        if self.swapped {
            p = p.swap();
        }
        p
    }

    /// Chart coordinate of a lift point.
    pub fn to_chart(&self, x: f64) -> f64 {
        if self.reflected {
            -x
        } else {
            x
        }
    }

    pub fn from_chart(&self, y: f64) -> f64 {
        self.to_chart(y)
    }

    /// Generator of the original pair playing the role of chart `g`.
    pub fn original(&self, g: Generator) -> Generator {
        if self.swapped {
            g.other()
        } else {
            g
        }
    }
}

/// Sampled evidence that `[a, b] ⊂ f0([a, b]) ∪ f1([a, b])`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoveringWitness {
    pub samples: usize,
    /// Largest distance from a sample to the union of the images
    /// (zero when every sample is covered).
    pub max_defect: f64,
}

/// A classified star interval, in lift coordinates. On the circle
/// `0 <= a < 1` and `a < b < a + 1`; on the line an unbounded end is
/// `±inf`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StarInterval {
    pub kind: StarKind,
    pub a: f64,
    pub b: f64,
    /// Generator fixing `a` (`None` for `-inf`).
    pub owner_a: Option<Generator>,
    /// Generator fixing `b` (`None` for `+inf`).
    pub owner_b: Option<Generator>,
    pub chart: Chart,
    pub covering_witness: CoveringWitness,
    /// A point of `f0(K) ∩ f1(K)`, when the intersection is nonempty.
    pub overlap_witness: Option<f64>,
    /// Whether the su interval needed the mirrored convention.
    pub mirrored: bool,
    pub warnings: Vec<String>,
}

impl StarInterval {
    /// Chart endpoints `(a', b')` with `a' < b'`.
    pub fn chart_endpoints(&self) -> (f64, f64) {
        let (x, y) = (self.chart.to_chart(self.a), self.chart.to_chart(self.b));
        if x <= y {
            (x, y)
        } else {
            (y, x)
        }
    }

    pub fn length(&self) -> f64 {
        self.b - self.a
    }

    /// Whether the lift point `x` (any representative on the circle) lies
    /// in `[a, b]`.
    pub fn contains(&self, x: f64, circle: bool) -> bool {
        if circle {
            let y = self.a + (x - self.a).rem_euclid(1.0);
            y <= self.b || (x - self.a).rem_euclid(1.0) == 0.0
        } else {
            x >= self.a && x <= self.b
        }
    }
}

/// Fixed points of both generators, with the common-point guard applied.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Inventory {
    pub f0: Vec<FixedPointRecord>,
    pub f1: Vec<FixedPointRecord>,
}

impl Inventory {
    pub fn compute(pair: &MapPair, tol: &Tolerances) -> Result<Self> {
        let f0 = fixed_points(&pair.f0, 1, Generator::F0, tol)?;
        let f1 = fixed_points(&pair.f1, 1, Generator::F1, tol)?;
        check_common_fixed_points(&f0, &f1, tol, pair.is_circle())?;
        Ok(Self { f0, f1 })
    }

    pub fn of(&self, g: Generator) -> &[FixedPointRecord] {
        match g {
            Generator::F0 => &self.f0,
            Generator::F1 => &self.f1,
        }
    }

    /// Both inventories merged and sorted by location.
    pub fn merged(&self) -> Vec<FixedPointRecord> {
        let mut all: Vec<FixedPointRecord> = self.f0.iter().chain(self.f1.iter()).cloned().collect();
        all.sort_by(|a, b| a.location.total_cmp(&b.location));
        all
    }

    pub fn is_empty(&self) -> bool {
        self.f0.is_empty() && self.f1.is_empty()
    }
}

/// Sign of `g - id` on an open gap, probed at interior points.
fn gap_sign(pair: &MapPair, g: Generator, a: f64, b: f64, tol: &Tolerances) -> Option<f64> {
    let m = pair.get(g);
    let probes: Vec<f64> = if b.is_finite() && a.is_finite() {
        [0.5, 0.25, 0.75, 0.125, 0.875].iter().map(|t| a + t * (b - a)).collect()
    } else if a.is_finite() {
        vec![a + 1.0, a + 0.25, a + 4.0]
    } else {
        vec![b - 1.0, b - 0.25, b - 4.0]
    };
    probes
        .into_iter()
        .map(|x| m.lift(x) - x)
        .find(|d| d.abs() > tol.point)
        .map(f64::signum)
}

fn covering(pair: &MapPair, a: f64, b: f64) -> CoveringWitness {
    let n = 256;
    let (f0a, f0b) = (pair.f0.lift(a), pair.f0.lift(b));
    let (f1a, f1b) = (pair.f1.lift(a), pair.f1.lift(b));
    let dist = |y: f64, lo: f64, hi: f64| if y < lo { lo - y } else if y > hi { y - hi } else { 0.0 };
    let mut defect: f64 = 0.0;
    for i in 0..=n {
        let y = a + (b - a) * i as f64 / n as f64;
        defect = defect.max(dist(y, f0a, f0b).min(dist(y, f1a, f1b)));
    }
    CoveringWitness { samples: n + 1, max_defect: defect }
}

fn overlap(pair: &MapPair, a: f64, b: f64) -> Option<f64> {
    let lo = pair.f0.lift(a).max(pair.f1.lift(a));
    let hi = pair.f0.lift(b).min(pair.f1.lift(b));
    (lo <= hi).then(|| 0.5 * (lo + hi))
}

fn unresolved(r: &FixedPointRecord) -> bool {
    r.stability == Stability::ParabolicUnresolved
}

/// Classify the gap `(a, b)` between consecutive inventory points `ra`
/// (at `a`) and `rb` (at `b`, possibly shifted by one turn).
fn classify_gap(
    pair: &MapPair,
    ra: &FixedPointRecord,
    rb: &FixedPointRecord,
    a: f64,
    b: f64,
    tol: &Tolerances,
) -> Result<Option<StarInterval>> {
    let (i, j) = (ra.map_tag, rb.map_tag);
    let (s_i, s_j) = match (gap_sign(pair, i, a, b, tol), gap_sign(pair, j, a, b, tol)) {
        (Some(x), Some(y)) => (x, y),
        _ => return Ok(None),
    };
    let mut warnings = Vec::new();
    if unresolved(ra) || unresolved(rb) {
        warnings.push("endpoint stability unresolved (parabolic)".to_string());
    }
    let make = |kind, chart, mirrored, warnings| StarInterval {
        kind,
        a,
        b,
        owner_a: Some(i),
        owner_b: Some(j),
        chart,
        covering_witness: covering(pair, a, b),
        overlap_witness: overlap(pair, a, b),
        mirrored,
        warnings,
    };
    // Covering inequality with the classification margin: a borderline
    // value is reported instead of guessed.
    let decide = |lhs: f64, rhs: f64, kind: StarKind| -> Result<bool> {
        let gapv = rhs - lhs;
        if gapv.abs() <= tol.margin * (b - a) * 1e-3 {
            return Err(Error::AmbiguousKind { a, b, first: kind.to_string(), second: "none".into() });
        }
        Ok(gapv > 0.0)
    };
    if i != j {
        let fi = pair.get(i);
        let fj = pair.get(j);
        if s_i < 0.0 && s_j > 0.0 {
            // a attracts for f_i, b attracts for f_j: ss when
            // f_j(a) <= f_i(b).
            if decide(fj.lift(a), fi.lift(b), StarKind::Ss)? {
                let chart = Chart { inverted: false, reflected: false, swapped: i == Generator::F1 };
                return Ok(Some(make(StarKind::Ss, chart, false, warnings)));
            }
        } else if s_i > 0.0 && s_j < 0.0 {
            // ss for the inverse pair.
            if decide(fj.inverse().lift(a), fi.inverse().lift(b), StarKind::Uu)? {
                let chart = Chart { inverted: true, reflected: false, swapped: i == Generator::F1 };
                return Ok(Some(make(StarKind::Uu, chart, false, warnings)));
            }
        }
        return Ok(None);
    }
    // Both endpoints belong to f_i; the other map has constant sign on
    // the closed interval.
    let k = i.other();
    let s_k = match gap_sign(pair, k, a, b, tol) {
        Some(s) => s,
        None => return Ok(None),
    };
    let fk = pair.get(k);
    if s_i < 0.0 && s_k > 0.0 {
        // Attractor-repeller pair with the other map pushing right.
        if decide(fk.lift(a), b, StarKind::Su)? {
            let chart = Chart { inverted: false, reflected: false, swapped: i == Generator::F1 };
            return Ok(Some(make(StarKind::Su, chart, false, warnings)));
        }
    } else if s_i > 0.0 && s_k < 0.0 {
        // Repeller-attractor pair: the mirror image of the case above.
        if decide(a, fk.lift(b), StarKind::Su)? {
            let chart = Chart { inverted: false, reflected: true, swapped: i == Generator::F1 };
            return Ok(Some(make(StarKind::Su, chart, true, warnings)));
        }
    }
    Ok(None)
}

/// Classify `[a, b]`, whose endpoints must be inventory points. Returns
/// `None` when some fixed point lies inside or no definition matches.
pub fn classify_interval(
    pair: &MapPair,
    inventory: &Inventory,
    a: f64,
    b: f64,
    tol: &Tolerances,
) -> Result<Option<StarInterval>> {
    let circle = pair.is_circle();
    let close = |x: f64, y: f64| {
        let d = (x - y).abs();
        if circle {
            d.min((d - d.round()).abs()) <= 1e-9
        } else {
            d <= 1e-9
        }
    };
    let merged = inventory.merged();
    let ra = merged.iter().find(|r| close(r.location, a));
    let rb = merged.iter().find(|r| close(r.location, b));
    let (ra, rb) = match (ra, rb) {
        (Some(x), Some(y)) => (x, y),
        _ => return Ok(None),
    };
    let inside = merged.iter().any(|r| {
        let x = if circle { a + (r.location - a).rem_euclid(1.0) } else { r.location };
        x > a + 1e-9 && x < b - 1e-9
    });
    if inside {
        return Ok(None);
    }
    classify_gap(pair, ra, rb, a, b, tol)
}

/// All star intervals of the pair.
pub fn enumerate_star_intervals(pair: &MapPair, tol: &Tolerances) -> Result<Vec<StarInterval>> {
    let inv = Inventory::compute(pair, tol)?;
    enumerate_with_inventory(pair, &inv, tol)
}

pub fn enumerate_with_inventory(pair: &MapPair, inv: &Inventory, tol: &Tolerances) -> Result<Vec<StarInterval>> {
    let merged = inv.merged();
    let mut out = Vec::new();
    if merged.is_empty() {
        return Ok(out);
    }
    let circle = pair.is_circle();
    let k = merged.len();
    let gaps = if circle { k } else { k - 1 };
    if circle && k == 1 {
        return Ok(out);
    }
    for g in 0..gaps {
        let ra = &merged[g];
        let rb = &merged[(g + 1) % k];
        let a = ra.location;
        let b = if g + 1 == k { rb.location + 1.0 } else { rb.location };
        if let Some(iv) = classify_gap(pair, ra, rb, a, b, tol)? {
            out.push(iv);
        }
    }
    if !circle {
        if let Some(iv) = unbounded_right(pair, &merged[k - 1], tol) {
            out.push(iv);
        }
        if let Some(iv) = unbounded_left(pair, &merged[0], tol) {
            out.push(iv);
        }
        out.sort_by(|x, y| x.a.total_cmp(&y.a));
    }
    Ok(out)
}

/// `[P, +inf]` with `P` the largest fixed point.
fn unbounded_right(pair: &MapPair, rp: &FixedPointRecord, tol: &Tolerances) -> Option<StarInterval> {
    let p = rp.location;
    let i = rp.map_tag;
    let s_i = gap_sign(pair, i, p, f64::INFINITY, tol)?;
    let s_k = gap_sign(pair, i.other(), p, f64::INFINITY, tol)?;
    let (kind, inverted) = match (s_i < 0.0, s_k > 0.0) {
        (true, true) => (StarKind::S, false),
        (false, false) => (StarKind::U, true),
        _ => return None,
    };
    Some(StarInterval {
        kind,
        a: p,
        b: f64::INFINITY,
        owner_a: Some(i),
        owner_b: None,
        chart: Chart { inverted, reflected: false, swapped: i == Generator::F1 },
        covering_witness: covering(pair, p, p + 4.0),
        overlap_witness: overlap(pair, p, p + 4.0),
        mirrored: false,
        warnings: Vec::new(),
    })
}

/// `[-inf, P]` with `P` the smallest fixed point.
fn unbounded_left(pair: &MapPair, rp: &FixedPointRecord, tol: &Tolerances) -> Option<StarInterval> {
    let p = rp.location;
    let i = rp.map_tag;
    let s_i = gap_sign(pair, i, f64::NEG_INFINITY, p, tol)?;
    let s_k = gap_sign(pair, i.other(), f64::NEG_INFINITY, p, tol)?;
    // Mirror of the right-hand case: P attracts for f_i from the left.
    let (kind, inverted) = match (s_i > 0.0, s_k < 0.0) {
        (true, true) => (StarKind::S, false),
        (false, false) => (StarKind::U, true),
        _ => return None,
    };
    Some(StarInterval {
        kind,
        a: f64::NEG_INFINITY,
        b: p,
        owner_a: None,
        owner_b: Some(i),
        chart: Chart { inverted, reflected: true, swapped: i == Generator::F1 },
        covering_witness: covering(pair, p - 4.0, p),
        overlap_witness: overlap(pair, p - 4.0, p),
        mirrored: true,
        warnings: Vec::new(),
    })
}

/// Basin of attraction of a fixed point of one generator. Lift
/// coordinates: the left part is `(lo, s)` and the right part `(s, hi)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Basin {
    pub attractor: FixedPointRecord,
    pub left: Option<(f64, f64)>,
    pub right: Option<(f64, f64)>,
}

impl Basin {
    /// Whether `x` lies in the basin (the attractor itself excluded).
    pub fn contains(&self, x: f64, circle: bool) -> bool {
        let s = self.attractor.location;
        if circle {
            let y = s + (x - s).rem_euclid(1.0);
            if y == s {
                return false;
            }
            if let Some((_, hi)) = self.right {
                if y < hi {
                    return true;
                }
            }
            if let Some((lo, _)) = self.left {
                if y - 1.0 > lo {
                    return true;
                }
            }
            false
        } else {
            self.right.is_some_and(|(_, hi)| x > s && x < hi) || self.left.is_some_and(|(lo, _)| x < s && x > lo)
        }
    }
}

/// Basin of `attractor` for its own generator, bounded by the neighbouring
/// fixed points of that generator. `None` for points with no basin.
pub fn basin_of(attractor: &FixedPointRecord, own: &[FixedPointRecord], circle: bool) -> Option<Basin> {
    if !attractor.stability.has_basin() {
        return None;
    }
    let s = attractor.location;
    let idx = own.iter().position(|r| (r.location - s).abs() <= 1e-12)?;
    let k = own.len();
    let (lo, hi) = if circle {
        let prev = if idx == 0 { own[k - 1].location - 1.0 } else { own[idx - 1].location };
        let next = if idx + 1 == k { own[0].location + 1.0 } else { own[idx + 1].location };
        (prev, next)
    } else {
        let prev = if idx == 0 { f64::NEG_INFINITY } else { own[idx - 1].location };
        let next = if idx + 1 == k { f64::INFINITY } else { own[idx + 1].location };
        (prev, next)
    };
    Some(Basin {
        attractor: attractor.clone(),
        left: attractor.stability.attracts_from_left().then_some((lo, s)),
        right: attractor.stability.attracts_from_right().then_some((s, hi)),
    })
}

/// Reduce a lift point to the phase space.
pub fn project(x: f64, circle: bool) -> f64 {
    if circle {
        wrap(x)
    } else {
        x
    }
}
