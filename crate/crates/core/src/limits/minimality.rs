//! Minimality of the action on the circle.
//!
//! For pairs close to rotations the action is minimal exactly when there
//! is no star interval of kind ss. A certified verdict is backed by
//! numerical evidence: orbits of `Phi` and of `Phi^-1` hit every bin of
//! width `delta`, and every bin carries a word contracting it into itself
//! (an attracting periodic point) and a word of `Phi^-1` doing the same
//! (a repelling periodic point).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::orbit::{coverage, stream_rng, BinGrid, Coverage, Strategy, Walker};
use super::witness::{bin_witness, PeriodicWitness};
use crate::config::{Budgets, Tolerances};
use crate::cycles::reduce_pair;
use crate::error::Result;
use crate::intervals::{enumerate_with_inventory, Inventory, StarKind};
use crate::maps::distortion::{closeness_certificate, Closeness};
use crate::maps::fixed::{FixedPointRecord, Stability};
use crate::maps::{Generator, MapPair};

/// Independent coverage walks per direction.
pub const COVERAGE_SEEDS: u64 = 32;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessCensus {
    pub bins: usize,
    pub witnessed: usize,
    /// Bins without a witness.
    pub missing: Vec<usize>,
    /// Weakest derivative bound over all witnesses (largest `|Dw|` for
    /// contracting, smallest for expanding ones).
    pub weakest_bound: f64,
    pub longest_word: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimalityEvidence {
    pub delta: f64,
    pub budget: usize,
    pub forward: Vec<Coverage>,
    pub backward: Vec<Coverage>,
    pub attractors: WitnessCensus,
    pub repellers: WitnessCensus,
}

impl MinimalityEvidence {
    pub fn full_coverage(&self) -> bool {
        self.forward.iter().chain(&self.backward).all(Coverage::is_full)
    }

    pub fn all_bins_witnessed(&self) -> bool {
        self.attractors.missing.is_empty() && self.repellers.missing.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum MinimalityVerdict {
    /// Closeness certified, no ss interval.
    MinimalCertified { evidence: MinimalityEvidence },
    /// An ss interval `[a, b]` is a proper closed invariant set.
    NotMinimal { ss_intervals: Vec<(f64, f64)> },
    Unknown { reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimalityReport {
    pub verdict: MinimalityVerdict,
    pub epsilon: f64,
    pub closeness: Option<[Closeness; 2]>,
    pub powers: [u32; 2],
    pub shifts: [i64; 2],
}

/// Decide minimality; `delta` and `budget` size the numerical evidence.
pub fn minimality_certificate(pair: &MapPair, epsilon: f64, delta: f64, budget: usize, budgets: &Budgets, tol: &Tolerances, seed: u64) -> Result<MinimalityReport> {
    let mut report = MinimalityReport { verdict: MinimalityVerdict::Unknown { reason: String::new() }, epsilon, closeness: None, powers: [1, 1], shifts: [0, 0] };
    if !pair.is_circle() {
        report.verdict = MinimalityVerdict::Unknown { reason: "minimality is decided on the circle only".into() };
        return Ok(report);
    }
    let reduction = reduce_pair(pair, budgets, tol)?;
    report.powers = reduction.powers;
    report.shifts = reduction.shifts;
    let closeness = [closeness_certificate(&pair.f0, epsilon), closeness_certificate(&pair.f1, epsilon)];
    report.closeness = Some(closeness);
    if !reduction.has_periodic_points() {
        report.verdict = MinimalityVerdict::Unknown { reason: "irrational rotation number suspected".into() };
        return Ok(report);
    }
    let rp = &reduction.pair;
    let inv = Inventory::compute(rp, tol)?;
    let stars = enumerate_with_inventory(rp, &inv, tol)?;
    let ss: Vec<(f64, f64)> = stars.iter().filter(|k| k.kind == StarKind::Ss).map(|k| (k.a, k.b)).collect();
    if !ss.is_empty() {
        report.verdict = MinimalityVerdict::NotMinimal { ss_intervals: ss };
        return Ok(report);
    }
    if !closeness.iter().all(Closeness::is_certified) {
        report.verdict = MinimalityVerdict::Unknown { reason: "ε-closeness refuted".into() };
        return Ok(report);
    }
    let evidence = minimality_evidence(rp, &inv, delta, budget, tol, seed)?;
    report.verdict = MinimalityVerdict::MinimalCertified { evidence };
    Ok(report)
}

/// Coverage walks and per-bin witnesses for a reduced pair.
pub fn minimality_evidence(rp: &MapPair, inv: &Inventory, delta: f64, budget: usize, tol: &Tolerances, seed: u64) -> Result<MinimalityEvidence> {
    let grid = BinGrid::new(0.0, 1.0, delta);
    let walks = |inverse: bool| -> Vec<Coverage> {
        let w = Walker::new(rp, inverse);
        (0..COVERAGE_SEEDS)
            .into_par_iter()
            .map(|s| {
                let sd = seed.wrapping_mul(0x9e37_79b9).wrapping_add(2 * s + inverse as u64);
                let x = (s as f64 + 0.5) / COVERAGE_SEEDS as f64;
                coverage(&w, x, &grid, budget, sd, None)
            })
            .collect()
    };
    let forward = walks(false);
    let backward = walks(true);
    let inv_pair = rp.inverse();
    let inv_inventory = Inventory::compute(&inv_pair, tol)?;
    let (_, attractors) = bin_witnesses(rp, inv, false, &grid, budget, tol, seed);
    let (_, repellers) = bin_witnesses(rp, &inv_inventory, true, &grid, budget, tol, seed.wrapping_add(1));
    Ok(MinimalityEvidence { delta, budget, forward, backward, attractors, repellers })
}

/// Hyperbolic attractors of the walker's generators with their basins
/// as lift intervals.
fn anchors(inv: &Inventory, tol: &Tolerances) -> Vec<(FixedPointRecord, f64, f64)> {
    let mut out = Vec::new();
    for g in [Generator::F0, Generator::F1] {
        let own = inv.of(g);
        let k = own.len();
        for (i, r) in own.iter().enumerate() {
            if r.stability != Stability::Attracting || r.derivative.abs() >= 1.0 - tol.margin {
                continue;
            }
            let lo = if i == 0 { own[k - 1].location - 1.0 } else { own[i - 1].location };
            let hi = if i + 1 == k { own[0].location + 1.0 } else { own[i + 1].location };
            out.push((r.clone(), lo, hi));
        }
    }
    out
}

/// Witnesses for every bin of `grid`. With `inverse` the walker runs
/// under `Phi^-1`, `inv` must be the inventory of the inverse pair and
/// the witnesses are expanding words of `Phi` (repelling periodic
/// points); otherwise they are contracting words (attracting points).
pub fn bin_witnesses(pair: &MapPair, inv: &Inventory, inverse: bool, grid: &BinGrid, budget: usize, tol: &Tolerances, seed: u64) -> (Vec<Option<PeriodicWitness>>, WitnessCensus) {
    let walker = Walker::new(pair, inverse);
    let sign = if inverse { -1 } else { 1 };
    let w = grid.width();
    let anchors = anchors(inv, tol);
    // Lifted bin inside the basin of each anchor, when it fits.
    let lifted: Vec<Vec<Option<f64>>> = (0..grid.count)
        .map(|b| {
            let lo = grid.lo + b as f64 * w;
            anchors
                .iter()
                .map(|(_, blo, bhi)| {
                    let l = blo + (lo - blo).rem_euclid(1.0);
                    (l > *blo && l + w < *bhi).then_some(l)
                })
                .collect()
        })
        .collect();
    let mid = |y: f64| -> Option<usize> {
        let b = grid.index(y)?;
        let off = (y - grid.lo) / w - b as f64;
        (off > 0.25 && off < 0.75).then_some(b)
    };
    // One random walk per anchor, recording when each bin's middle half
    // is first hit, until every bin of the anchor's basin was hit.
    let walks: Vec<(Vec<Generator>, Vec<Option<usize>>)> = anchors
        .par_iter()
        .enumerate()
        .map(|(ai, (rec, _, _))| {
            let mut first_hit: Vec<Option<usize>> = vec![None; grid.count];
            let mut remaining = lifted.iter().filter(|l| l[ai].is_some()).count();
            let p = rec.location.rem_euclid(1.0);
            if let Some(b) = mid(p) {
                if lifted[b][ai].is_some() {
                    first_hit[b] = Some(0);
                    remaining -= 1;
                }
            }
            let mut letters = Vec::new();
            let mut rng = stream_rng(seed, 0x6269_6e00 + ai as u64);
            if remaining > 0 {
                walker.run(p, budget, Strategy::Random, &mut rng, |i, y, g| {
                    letters.push(g);
                    if let Some(b) = mid(y) {
                        if first_hit[b].is_none() {
                            first_hit[b] = Some(i + 1);
                            if lifted[b][ai].is_some() {
                                remaining -= 1;
                            }
                        }
                    }
                    remaining > 0
                });
            }
            (letters, first_hit)
        })
        .collect();
    // Per bin, the anchor with the shortest prefix.
    let out: Vec<Option<PeriodicWitness>> = (0..grid.count)
        .into_par_iter()
        .map(|b| {
            let (ai, t, l) = (0..anchors.len())
                .filter_map(|ai| Some((ai, walks[ai].1[b]?, lifted[b][ai]?)))
                .min_by_key(|c| c.1)?;
            let u = walker.as_word(&walks[ai].0[..t]);
            let rec = &anchors[ai].0;
            // The middle three quarters of the bin: its edges may sit on
            // fixed points of the other direction.
            bin_witness(pair, rec.map_tag, sign, rec.derivative, &u, (l + w / 8.0, l + w - w / 8.0))
        })
        .collect();
    let missing: Vec<usize> = (0..grid.count).filter(|&b| out[b].is_none()).collect();
    let census = WitnessCensus {
        bins: grid.count,
        witnessed: grid.count - missing.len(),
        missing,
        weakest_bound: if inverse {
            out.iter().flatten().map(|w| w.derivative_bound).fold(f64::INFINITY, f64::min)
        } else {
            out.iter().flatten().map(|w| w.derivative_bound).fold(0.0, f64::max)
        },
        longest_word: out.iter().flatten().map(|w| w.word.len()).max().unwrap_or(0),
    };
    (out, census)
}
