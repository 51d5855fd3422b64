//! Attractor order, cycles and the combinatorial order certificate.
//!
//! `s ≺ t` when `s` lies in the basin of `t`. Basins of one generator are
//! pairwise disjoint, so each attractor lies in at most one basin of the
//! other generator: the relation is a functional graph whose loops are
//! the cycles. Walking it from any attractor ends in a loop.

use serde::{Deserialize, Serialize};

use crate::config::{Budgets, Tolerances};
use crate::error::{Error, Result};
use crate::intervals::{basin_of, Basin, Inventory};
use crate::maps::fixed::FixedPointRecord;
use crate::maps::rotation::{rotation_number, RotationNumber, RotationVerdict};
use crate::maps::{CircleMap, Generator, MapPair};

/// `Phi^n = (f0^{n0} - p0, f1^{n1} - p1)` chosen so both reduced maps have
/// fixed points when the rotation numbers are rational.
#[derive(Debug, Clone)]
pub struct Reduction {
    pub pair: MapPair,
    pub powers: [u32; 2],
    pub shifts: [i64; 2],
    /// `None` on the line.
    pub rotation: [Option<RotationNumber>; 2],
}

impl Reduction {
    pub fn identity(pair: &MapPair) -> Self {
        Self { pair: pair.clone(), powers: [1, 1], shifts: [0, 0], rotation: [None, None] }
    }

    /// Whether both reduced generators have periodic points.
    pub fn has_periodic_points(&self) -> bool {
        self.rotation.iter().all(|r| match r {
            None => true,
            Some(r) => matches!(r.verdict, RotationVerdict::Rational { .. }),
        })
    }
}

fn reduce_map(map: &CircleMap, budgets: &Budgets, tol: &Tolerances) -> Result<(CircleMap, u32, i64, RotationNumber)> {
    let rn = rotation_number(map, budgets.rotation_iterations, tol, budgets.max_denominator)?;
    Ok(match rn.verdict {
        RotationVerdict::Rational { p, q } => {
            let m = if q == 1 && p == 0 { map.clone() } else { map.pow(q as i32).shifted(p) };
            (m, q, p, rn)
        }
        RotationVerdict::IrrationalSuspected => (map.clone(), 1, 0, rn),
    })
}

/// Replace each circle generator with rational rotation number `p/q` by
/// `f^q - p`. Line pairs are returned unchanged.
pub fn reduce_pair(pair: &MapPair, budgets: &Budgets, tol: &Tolerances) -> Result<Reduction> {
    if !pair.is_circle() {
        return Ok(Reduction::identity(pair));
    }
    let (m0, q0, p0, r0) = reduce_map(&pair.f0, budgets, tol)?;
    let (m1, q1, p1, r1) = reduce_map(&pair.f1, budgets, tol)?;
    Ok(Reduction { pair: MapPair::new(m0, m1)?, powers: [q0, q1], shifts: [p0, p1], rotation: [Some(r0), Some(r1)] })
}

/// `si ≺ sj`: `si` lies in the basin of `sj` (for `sj`'s generator).
pub fn precedes(si: &FixedPointRecord, sj: &FixedPointRecord, inventory: &Inventory, circle: bool) -> bool {
    match basin_of(sj, inventory.of(sj.map_tag), circle) {
        Some(b) => b.contains(si.location, circle),
        None => false,
    }
}

/// The four-point inequality `s_k < f_{k+1}^{-1}(s_k) < s_{k+1} < s_k^+`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderEntry {
    pub k: usize,
    pub s_k: f64,
    pub preimage: f64,
    pub s_next: f64,
    pub s_k_plus: f64,
    /// Smallest of the three consecutive differences.
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderCertificate {
    pub entries: Vec<OrderEntry>,
    /// Inequalities were checked after reflecting `x -> -x`.
    pub mirrored: bool,
}

/// A loop `s_0 ≺ ... ` of attractors with alternating owners.
///
/// Lifts satisfy `s_{k+1} ∈ B(s_k)`; `attractors` has `length + 1`
/// entries with `s_n = s_0 + displacement`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cycle {
    pub attractors: Vec<f64>,
    pub owners: Vec<Generator>,
    pub length: usize,
    /// `+1` when the loop winds once to the right, `-1` to the left, `0`
    /// when it folds back (an ss pair).
    pub displacement: i64,
    /// Steps `s_k -> s_{k+1}` move left (the reflected combinatorics).
    pub mirrored: bool,
    pub order_certificate: Option<OrderCertificate>,
    /// Right neighbour (or left, when mirrored) of each `s_k` among the
    /// fixed points of its own generator.
    pub neighbours: Vec<f64>,
}

impl Cycle {
    /// Length-2 loops that fold back are exactly ss intervals.
    pub fn is_ss_pair(&self) -> bool {
        self.length == 2 && self.displacement == 0
    }

    /// Reflect `x -> -x`; steps that moved left now move right.
    pub fn reflected(&self) -> Cycle {
        Cycle {
            attractors: self.attractors.iter().map(|x| -x).collect(),
            owners: self.owners.clone(),
            length: self.length,
            displacement: -self.displacement,
            mirrored: !self.mirrored,
            order_certificate: None,
            neighbours: self.neighbours.iter().map(|x| -x).collect(),
        }
    }
}

fn basins(inv: &Inventory, circle: bool) -> Vec<Basin> {
    inv.f0
        .iter()
        .chain(inv.f1.iter())
        .filter_map(|r| basin_of(r, inv.of(r.map_tag), circle))
        .collect()
}

/// Find a cycle of the (already reduced) pair. Returns `None` when a
/// generator has no fixed points.
pub fn find_cycle(pair: &MapPair, inventory: &Inventory) -> Result<Option<Cycle>> {
    if inventory.f0.is_empty() || inventory.f1.is_empty() {
        return Ok(None);
    }
    let circle = pair.is_circle();
    let all = basins(inventory, circle);
    let start = match all.iter().filter(|b| b.attractor.map_tag == Generator::F0).min_by(|x, y| {
        x.attractor.location.total_cmp(&y.attractor.location)
    }) {
        Some(b) => b.attractor.clone(),
        None => return Ok(None),
    };
    // succ(s) = the attractor of the other generator whose basin holds s.
    let succ = |s: &FixedPointRecord| -> Result<FixedPointRecord> {
        all.iter()
            .find(|b| b.attractor.map_tag != s.map_tag && b.contains(s.location, circle))
            .map(|b| b.attractor.clone())
            .ok_or(Error::NoCoveringBasins { location: s.location })
    };
    let mut walk = vec![start];
    loop {
        let next = succ(walk.last().unwrap())?;
        if let Some(pos) = walk.iter().position(|r| r.location == next.location && r.map_tag == next.map_tag) {
            walk.drain(..pos);
            break;
        }
        walk.push(next);
        if walk.len() > all.len() + 1 {
            return Err(Error::NoCoveringBasins { location: walk.last().unwrap().location });
        }
    }
    // walk[i] ∈ B(walk[i+1]); the cycle order s_{k+1} ∈ B(s_k) is the
    // reverse. Start at the leftmost f0 attractor of the loop.
    walk.reverse();
    let i0 = walk
        .iter()
        .enumerate()
        .filter(|(_, r)| r.map_tag == Generator::F0)
        .min_by(|x, y| x.1.location.total_cmp(&y.1.location))
        .map(|(i, _)| i)
        .unwrap_or(0);
    walk.rotate_left(i0);
    let n = walk.len();

    let mut lifts = vec![walk[0].location];
    let mut owners = vec![walk[0].map_tag];
    let mut neighbours = Vec::with_capacity(n);
    let mut rights = 0;
    for k in 0..n {
        let sk = &walk[k];
        let next = &walk[(k + 1) % n];
        let b = basin_of(sk, inventory.of(sk.map_tag), circle).expect("cycle points attract");
        let cur = *lifts.last().unwrap();
        let shift = cur - sk.location;
        let off = if circle { (next.location - sk.location).rem_euclid(1.0) } else { next.location - sk.location };
        let right_hit = b.right.is_some_and(|(_, hi)| sk.location + off < hi);
        let (lift, nb) = if right_hit {
            rights += 1;
            (cur + off, b.right.unwrap().1 + shift)
        } else {
            let back = if circle { off - 1.0 } else { off };
            (cur + back, b.left.map(|(lo, _)| lo + shift).unwrap_or(f64::NEG_INFINITY))
        };
        lifts.push(lift);
        owners.push(next.map_tag);
        neighbours.push(nb);
    }
    owners.pop();
    let displacement = (lifts[n] - lifts[0]).round() as i64;
    Ok(Some(Cycle {
        attractors: lifts,
        owners,
        length: n,
        displacement,
        mirrored: rights == 0,
        order_certificate: None,
        neighbours,
    }))
}

/// Check `s_k < f_{k+1}^{-1}(s_k) < s_{k+1} < s_k^+` for every `k`; the
/// mirrored case is checked after reflecting.
pub fn verify_cycle_order(cycle: &Cycle, pair: &MapPair, tol: &Tolerances) -> Result<OrderCertificate> {
    let (cyc, p) = if cycle.mirrored { (cycle.reflected(), pair.reflect()) } else { (cycle.clone(), pair.clone()) };
    let n = cyc.length;
    let mut entries = Vec::with_capacity(n);
    for k in 0..n {
        let sk = cyc.attractors[k];
        let snext = cyc.attractors[k + 1];
        let plus = cyc.neighbours[k];
        let owner_next = cyc.owners[(k + 1) % n];
        let pre = p.get(owner_next).inverse().lift(sk);
        let checks = [
            (pre - sk, "s_k < f_{k+1}^{-1}(s_k)"),
            (snext - pre, "f_{k+1}^{-1}(s_k) < s_{k+1}"),
            (plus - snext, "s_{k+1} < s_k^+"),
        ];
        for (d, what) in checks {
            if !(d > tol.point) {
                return Err(Error::OrderViolation { k, inequality: format!("{what} (difference {d:e})") });
            }
        }
        let margin = checks.iter().map(|c| c.0).fold(f64::INFINITY, f64::min);
        entries.push(OrderEntry { k, s_k: sk, preimage: pre, s_next: snext, s_k_plus: plus, margin });
    }
    Ok(OrderCertificate { entries, mirrored: cycle.mirrored })
}
