//! Spectral decomposition of the limit set into fixed points and star
//! intervals.
//!
//! After replacing the generators by `f^q - p`, every ω-limit point is a
//! fixed point of a generator or lies in a star interval; the pieces are
//! the star intervals together with the fixed points that no star
//! interval contains. Each piece carries a contraction witness (so it
//! meets the closure of the periodic points) and, for intervals, a
//! sampled transitivity statistic.

use serde::{Deserialize, Serialize};

use super::orbit::{stream_rng, BinGrid, Strategy, Walker};
use super::witness::{fixed_point_witness, star_interval_witness, PeriodicWitness};
use crate::config::{Budgets, Tolerances};
use crate::cycles::{reduce_pair, Reduction};
use crate::error::{Error, Result};
use crate::intervals::{enumerate_with_inventory, Inventory, StarInterval, StarKind};
use crate::maps::distortion::{closeness_certificate, Closeness};
use crate::maps::fixed::{FixedPointRecord, Stability};
use crate::maps::{Generator, MapPair};

/// Steps of the transitivity sample of an interval piece.
pub const TRANSITIVITY_STEPS: usize = 50_000;
/// Bins of the transitivity sample.
pub const TRANSITIVITY_BINS: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum PieceKind {
    FixedPoint { map: Generator, stability: Stability },
    StarInterval { kind: StarKind },
}

/// Fraction of the bins of an interval visited by one orbit started at
/// its midpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitivitySample {
    /// Whether the orbit was taken under `Phi^-1`.
    pub inverse: bool,
    pub steps: usize,
    pub bins: usize,
    pub bins_visited: usize,
    /// Steps the orbit spent outside the interval.
    pub steps_outside: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionPiece {
    pub kind: PieceKind,
    /// Endpoints (equal for a fixed point), lift coordinates.
    pub a: f64,
    pub b: f64,
    pub witness: Option<PeriodicWitness>,
    pub transitivity: Option<TransitivitySample>,
    /// Forward invariance under `Phi` (ss and s intervals, attracting
    /// fixed points of both maps are not distinguished here).
    pub forward_invariant: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum DecompositionStatus {
    /// Hypotheses certified and a star interval of kind ss exists.
    Decomposed,
    /// Hypotheses certified and no ss interval: the whole circle is
    /// minimal and there is nothing to decompose.
    Minimal,
    /// Pieces were computed but the closeness hypothesis failed.
    OutsideHypotheses { reasons: Vec<String> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReductionSummary {
    pub powers: [u32; 2],
    pub shifts: [i64; 2],
}

impl From<&Reduction> for ReductionSummary {
    fn from(r: &Reduction) -> Self {
        Self { powers: r.powers, shifts: r.shifts }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionReport {
    pub status: DecompositionStatus,
    pub pieces: Vec<DecompositionPiece>,
    pub reduction: ReductionSummary,
    /// `None` on the line.
    pub closeness: Option<[Closeness; 2]>,
    pub epsilon: f64,
    /// Length of gaps whose classification was inconclusive.
    pub unclassified_mass: f64,
    /// Some pieces share points (non-hyperbolic endpoints).
    pub overlaps: bool,
    pub warnings: Vec<String>,
}

fn transitivity(pair: &MapPair, k: &StarInterval, seed: u64) -> TransitivitySample {
    let inverse = k.chart.inverted;
    let walker = Walker::new(pair, inverse);
    let circle = pair.is_circle();
    let (a, b) = (k.a, if k.b.is_finite() { k.b } else { k.a + 4.0 });
    let (a, b) = if a.is_finite() { (a, b) } else { (b - 4.0, b) };
    let grid = BinGrid::new(a, b, (b - a) / TRANSITIVITY_BINS as f64);
    let mut seen = vec![false; grid.count];
    let mut outside = 0;
    let mut rng = stream_rng(seed, 0x7472_616e);
    let x = 0.5 * (a + b);
    walker.run(x, TRANSITIVITY_STEPS, Strategy::Mixed, &mut rng, |_, y, _| {
        let z = if circle { a + (y - a).rem_euclid(1.0) } else { y };
        match grid.index(z) {
            Some(i) => seen[i] = true,
            None => outside += 1,
        }
        true
    });
    TransitivitySample { inverse, steps: TRANSITIVITY_STEPS, bins: grid.count, bins_visited: seen.iter().filter(|s| **s).count(), steps_outside: outside }
}

fn in_interval(k: &StarInterval, x: f64, circle: bool) -> bool {
    let eps = 1e-9;
    if circle {
        let y = k.a + (x - k.a).rem_euclid(1.0);
        y <= k.b + eps || (x - k.a).rem_euclid(1.0) >= 1.0 - eps
    } else {
        x >= k.a - eps && x <= k.b + eps
    }
}

fn own_gap(rec: &FixedPointRecord, merged: &[FixedPointRecord], circle: bool) -> f64 {
    merged
        .iter()
        .filter(|r| !(r.location == rec.location && r.map_tag == rec.map_tag))
        .map(|r| {
            let d = (r.location - rec.location).abs();
            if circle {
                d.min(1.0 - d)
            } else {
                d
            }
        })
        .fold(1.0, f64::min)
}

/// Decompose the limit set of the pair. `epsilon` is the closeness
/// threshold of the hypotheses (ignored on the line).
pub fn spectral_decomposition(pair: &MapPair, epsilon: f64, budgets: &Budgets, tol: &Tolerances, seed: u64) -> Result<DecompositionReport> {
    let circle = pair.is_circle();
    let reduction = reduce_pair(pair, budgets, tol)?;
    let mut failures = Vec::new();
    if !reduction.has_periodic_points() {
        failures.push("a generator has no periodic points".to_string());
        return Err(Error::HypothesisFailure(failures));
    }
    let rp = &reduction.pair;
    let inv = Inventory::compute(rp, tol)?;
    if inv.f0.is_empty() || inv.f1.is_empty() {
        return Err(Error::HypothesisFailure(vec!["a reduced generator has no fixed points".into()]));
    }
    let closeness = circle.then(|| [closeness_certificate(&pair.f0, epsilon), closeness_certificate(&pair.f1, epsilon)]);
    let mut reasons = Vec::new();
    if let Some(c) = &closeness {
        for (i, cl) in c.iter().enumerate() {
            if !cl.is_certified() {
                reasons.push(format!("f{i} is not {epsilon}-close to a rotation (V = {:.6})", cl.variation()));
            }
        }
    }
    let mut warnings = Vec::new();
    let stars = enumerate_with_inventory(rp, &inv, tol)?;
    let merged = inv.merged();
    let mut unclassified = 0.0;
    for (i, r) in merged.iter().enumerate() {
        if r.stability == Stability::ParabolicUnresolved {
            warnings.push(format!("fixed point {} of {} has unresolved stability", r.location, r.map_tag));
            // The two adjacent gaps are not attributed reliably.
            let k = merged.len();
            let next = if i + 1 < k { merged[i + 1].location } else if circle { merged[0].location + 1.0 } else { r.location };
            let prev = if i > 0 { merged[i - 1].location } else if circle { merged[k - 1].location - 1.0 } else { r.location };
            unclassified += next - prev;
        }
    }

    let mut pieces = Vec::new();
    for (idx, k) in stars.iter().enumerate() {
        pieces.push(DecompositionPiece {
            kind: PieceKind::StarInterval { kind: k.kind },
            a: k.a,
            b: k.b,
            witness: star_interval_witness(rp, k),
            transitivity: Some(transitivity(rp, k, seed.wrapping_add(idx as u64))),
            forward_invariant: matches!(k.kind, StarKind::Ss | StarKind::S),
        });
        warnings.extend(k.warnings.iter().cloned());
    }
    for r in &merged {
        if stars.iter().any(|k| in_interval(k, r.location, circle)) {
            continue;
        }
        pieces.push(DecompositionPiece {
            kind: PieceKind::FixedPoint { map: r.map_tag, stability: r.stability },
            a: r.location,
            b: r.location,
            witness: fixed_point_witness(rp, r, own_gap(r, &merged, circle)),
            transitivity: None,
            forward_invariant: r.stability == Stability::Attracting,
        });
    }
    pieces.sort_by(|p, q| p.a.total_cmp(&q.a).then(p.b.total_cmp(&q.b)));
    let mut overlaps = false;
    for i in 0..stars.len() {
        for j in i + 1..stars.len() {
            let (p, q) = (&stars[i], &stars[j]);
            if in_interval(p, q.a, circle) || in_interval(p, q.b, circle) || in_interval(q, p.a, circle) {
                overlaps = true;
            }
        }
    }
    if overlaps {
        warnings.push("star intervals share points".into());
    }
    let has_ss = stars.iter().any(|k| k.kind == StarKind::Ss);
    let status = if !reasons.is_empty() {
        DecompositionStatus::OutsideHypotheses { reasons }
    } else if circle && !has_ss {
        DecompositionStatus::Minimal
    } else {
        DecompositionStatus::Decomposed
    };
    Ok(DecompositionReport {
        status,
        pieces,
        reduction: (&reduction).into(),
        closeness,
        epsilon,
        unclassified_mass: unclassified,
        overlaps,
        warnings,
    })
}
