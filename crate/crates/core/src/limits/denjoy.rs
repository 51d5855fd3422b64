//! Exceptional minimal sets inside ss intervals.
//!
//! Close to rotations, the closure of an orbit in an ss interval is the
//! whole interval. The check follows one mixed walk from the midpoint and
//! records the visited cells of a fine grid; the largest empty gap is
//! reported at checkpoints `budget / 2^j`. A Cantor-like limit set shows
//! up as a gap that stays large and stable while coverage at every
//! resolution stays below one.

use serde::{Deserialize, Serialize};

use super::orbit::{stream_rng, Strategy, Walker};
use crate::config::{Budgets, Tolerances};
use crate::cycles::reduce_pair;
use crate::error::Result;
use crate::intervals::{enumerate_with_inventory, Inventory, StarKind};
use crate::maps::distortion::closeness_certificate;
use crate::maps::MapPair;

/// Cells of the occupancy grid.
pub const CELLS: usize = 1 << 20;
/// Checkpoints per walk.
pub const CHECKPOINTS: u32 = 8;
/// Gap above which a Cantor set is suspected.
pub const GAP_THRESHOLD: f64 = 1e-3;
/// Fewer visited cells than this means a finite orbit.
pub const FINITE_ORBIT_CELLS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrbitClosure {
    FiniteOrbit,
    NonemptyInterior,
    CantorSuspected,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapCheckpoint {
    pub steps: usize,
    /// Longest unvisited stretch, in lift units.
    pub largest_gap: f64,
    pub cells_visited: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenjoyInterval {
    pub a: f64,
    pub b: f64,
    pub checkpoints: Vec<GapCheckpoint>,
    /// `(delta, fraction of delta-bins visited)`.
    pub coverage: Vec<(f64, f64)>,
    pub closure: OrbitClosure,
}

impl DenjoyInterval {
    /// Largest gap never increases along the checkpoints.
    pub fn gap_monotone(&self) -> bool {
        self.checkpoints.windows(2).all(|w| w[1].largest_gap <= w[0].largest_gap)
    }

    pub fn final_gap(&self) -> f64 {
        self.checkpoints.last().map_or(f64::INFINITY, |c| c.largest_gap)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenjoyReport {
    pub budget: usize,
    /// Both maps certified close to rotations: the theorem applies and
    /// `CantorSuspected` would contradict it.
    pub in_scope: bool,
    pub epsilon: f64,
    pub intervals: Vec<DenjoyInterval>,
}

impl DenjoyReport {
    pub fn cantor_suspected(&self) -> bool {
        self.intervals.iter().any(|i| i.closure == OrbitClosure::CantorSuspected)
    }
}

fn largest_gap(seen: &[bool], cell: f64) -> f64 {
    let mut best = 0usize;
    let mut run = 0usize;
    for &s in seen {
        if s {
            run = 0;
        } else {
            run += 1;
            best = best.max(run);
        }
    }
    best as f64 * cell
}

fn coverage_at(seen: &[bool], len: f64, delta: f64) -> f64 {
    let bins = (len / delta).ceil().max(1.0) as usize;
    let mut hit = vec![false; bins];
    for (i, &s) in seen.iter().enumerate() {
        if s {
            let b = ((i as f64 + 0.5) / seen.len() as f64 * bins as f64) as usize;
            hit[b.min(bins - 1)] = true;
        }
    }
    hit.iter().filter(|h| **h).count() as f64 / bins as f64
}

/// Walk from the midpoint of `[a, b]` and record gap checkpoints.
pub fn orbit_closure(pair: &MapPair, a: f64, b: f64, budget: usize, deltas: &[f64], seed: u64) -> DenjoyInterval {
    let walker = Walker::new(pair, false);
    let circle = pair.is_circle();
    let len = b - a;
    let cell = len / CELLS as f64;
    let mut seen = vec![false; CELLS];
    let mut marks: Vec<usize> = (0..CHECKPOINTS).rev().map(|j| (budget >> j).max(1)).collect();
    marks.dedup();
    let mut checkpoints = Vec::with_capacity(marks.len());
    let mut visited = 0usize;
    let mut next = 0usize;
    let mut rng = stream_rng(seed, 0x64656e6a);
    let record = |steps: usize, seen: &[bool], visited: usize, out: &mut Vec<GapCheckpoint>| {
        out.push(GapCheckpoint { steps, largest_gap: largest_gap(seen, cell), cells_visited: visited });
    };
    walker.run(0.5 * (a + b), budget, Strategy::Mixed, &mut rng, |i, y, _| {
        let z = if circle { a + (y - a).rem_euclid(1.0) } else { y };
        if z >= a && z <= b {
            let c = (((z - a) / cell) as usize).min(CELLS - 1);
            if !seen[c] {
                seen[c] = true;
                visited += 1;
            }
        }
        while next < marks.len() && i + 1 == marks[next] {
            record(i + 1, &seen, visited, &mut checkpoints);
            next += 1;
        }
        true
    });
    let coverage: Vec<(f64, f64)> = deltas.iter().map(|&d| (d, coverage_at(&seen, len, d))).collect();
    let last3: Vec<f64> = checkpoints.iter().rev().take(3).map(|c| c.largest_gap).collect();
    let stable = last3.len() == 3 && last3.iter().all(|g| (g - last3[0]).abs() <= 0.01 * last3[0]);
    let closure = if visited < FINITE_ORBIT_CELLS {
        OrbitClosure::FiniteOrbit
    } else if last3.first().is_some_and(|&g| g > GAP_THRESHOLD) && stable && coverage.iter().all(|c| c.1 < 1.0) {
        OrbitClosure::CantorSuspected
    } else {
        OrbitClosure::NonemptyInterior
    };
    DenjoyInterval { a, b, checkpoints, coverage, closure }
}

/// Run the closure check on every ss interval of the (reduced) pair.
pub fn denjoy_check(pair: &MapPair, epsilon: f64, budget: usize, budgets: &Budgets, tol: &Tolerances, seed: u64) -> Result<DenjoyReport> {
    let reduction = reduce_pair(pair, budgets, tol)?;
    let rp = &reduction.pair;
    let inv = Inventory::compute(rp, tol)?;
    let stars = enumerate_with_inventory(rp, &inv, tol)?;
    let in_scope = pair.is_circle()
        && reduction.has_periodic_points()
        && closeness_certificate(&pair.f0, epsilon).is_certified()
        && closeness_certificate(&pair.f1, epsilon).is_certified();
    let intervals = stars
        .iter()
        .filter(|k| k.kind == StarKind::Ss)
        .enumerate()
        .map(|(i, k)| orbit_closure(rp, k.a, k.b, budget, &tol.deltas, seed.wrapping_add(i as u64)))
        .collect();
    Ok(DenjoyReport { budget, in_scope, epsilon, intervals })
}
