//! The return map of a cycle `s_0 < s_1 < ... < s_n = s_0 + 1`.
//!
//! `f_k` denotes the owner of `s_k`; owners alternate, so `f_{k+2} = f_k`.
//! The stage-`k` domain is `A_k = (s_k, f_{k+1}^-1(s_k)]` and
//! `A = A_0`, `A_n = A + 1`.
//!
//! The induction keeps, for every pending piece, a map `h` from stage-`k`
//! coordinates back to `A` and the right end `c` of `h^-1(piece)`, an
//! interval `(s_k, c] ⊂ A_k`. Stage `k` splits `(s_k, c]` by the orbit
//! `t_i = f_k^i(s_{k+1})`, which decreases to `s_k`: with `j` the first
//! index such that `t_j < c`,
//!
//! ```text
//! J_0 = (t_j, c],    J_l = (t_{j+l}, t_{j+l-1}]  (l >= 1),
//! ```
//!
//! and `f_k^-(j+l)` maps `J_l` into `A_{k+1}` (onto it when `l >= 1`).
//! After `n` stages `h^-1` followed by the translation by `-1` is the
//! return branch.

use super::local::build_local_return_map;
use super::{AtlasKind, Discontinuity, OrbitExpr, Piece, ReturnMapAtlas};
use crate::config::{Budgets, Tolerances};
use crate::cycles::Cycle;
use crate::error::{Error, Result};
use crate::intervals::{classify_interval, project, Chart, Inventory};
use crate::maps::{Generator, MapPair, Word};

const ORBIT_CAP: usize = 1_000_000;

/// A cycle in the chart where it winds to the right.
#[derive(Debug, Clone)]
pub struct CycleFrame {
    pub chart: Chart,
    pub pair: MapPair,
    /// Lifts `s_0, ..., s_n`.
    pub s: Vec<f64>,
    pub owners: Vec<Generator>,
    /// `f_{k+1}^-1(s_k)` for `k = 0..n`.
    pub right: Vec<f64>,
    pub shift: f64,
}

impl CycleFrame {
    pub fn new(pair: &MapPair, cycle: &Cycle, tol: &Tolerances) -> Result<Self> {
        let (cyc, chart) = if cycle.mirrored {
            (cycle.reflected(), Chart { inverted: false, reflected: true, swapped: false })
        } else {
            (cycle.clone(), Chart::default())
        };
        let cp = chart.pair(pair);
        let n = cyc.length;
        if cyc.displacement <= 0 {
            return Err(Error::InvalidMap(format!(
                "cycle of length {n} does not wind around the circle (displacement {})",
                cyc.displacement
            )));
        }
        let mut right = Vec::with_capacity(n);
        for k in 0..n {
            let next = cyc.owners[(k + 1) % n];
            right.push(cp.get(next).invert_lift(cyc.attractors[k], tol.inversion.max(1e-12 * cyc.attractors[k].abs()))?);
        }
        Ok(Self {
            chart,
            pair: cp,
            s: cyc.attractors.clone(),
            owners: cyc.owners.clone(),
            right,
            shift: -(cyc.displacement as f64),
        })
    }

    pub fn len(&self) -> usize {
        self.owners.len()
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.s[0], self.right[0])
    }

    pub fn in_domain(&self, x: f64) -> bool {
        x > self.s[0] && x <= self.right[0]
    }
}

/// The stagewise walk: at stage `k` apply `f_k^-1` until the point passes
/// `s_{k+1}`. Returns `R(x)` and the stage exponents, or `None` when a
/// stage exceeds `max_steps`.
pub fn stagewise_return(frame: &CycleFrame, x: f64, max_steps: usize) -> Option<(f64, Vec<u32>)> {
    let mut y = x;
    let mut exps = Vec::with_capacity(frame.len());
    for k in 0..frame.len() {
        let inv = frame.pair.get(frame.owners[k]).inverse();
        let mut m = 0u32;
        while y <= frame.s[k + 1] {
            if m as usize >= max_steps {
                return None;
            }
            y = inv.lift(y);
            m += 1;
        }
        exps.push(m);
    }
    Some((y + frame.shift, exps))
}

/// Return word `h^-1` for given stage exponents.
pub fn stage_word(owners: &[Generator], exps: &[u32]) -> Word {
    let mut w = Word::empty();
    for (g, &m) in owners.iter().zip(exps) {
        w.push(*g, -(m as i32));
    }
    w
}

struct Node {
    stage: usize,
    lo: f64,
    hi: f64,
    hi_expr: Option<OrbitExpr>,
    /// Right end of `h^-1(piece)` in stage coordinates.
    c: f64,
    /// Stage coordinates -> `A`, application order.
    h: Word,
    indices: Vec<u32>,
}

/// Build the atlas of a cycle. Length-2 loops that fold back are ss
/// intervals and use the local construction.
pub fn build_global_return_map(
    pair: &MapPair,
    inventory: &Inventory,
    cycle: &Cycle,
    budgets: &Budgets,
    depth: usize,
    tol: &Tolerances,
) -> Result<ReturnMapAtlas> {
    assert!(depth > 0, "depth must be positive");
    if cycle.is_ss_pair() {
        let (x, y) = (cycle.attractors[0], cycle.attractors[1]);
        let (lo, hi) = if x < y { (x, y) } else { (y, x) };
        let a = project(lo, pair.is_circle());
        let b = a + (hi - lo);
        return match classify_interval(pair, inventory, a, b, tol)? {
            Some(k) => build_local_return_map(pair, &k, depth, tol),
            None => Err(Error::OrderViolation { k: 0, inequality: "two-point loop is not an ss interval".into() }),
        };
    }
    let fr = CycleFrame::new(pair, cycle, tol)?;
    let n = fr.len();
    let slack = tol.point;

    let mut pieces = Vec::new();
    let mut tail = 0.0;
    let mut stack = vec![Node {
        stage: 0,
        lo: fr.s[0],
        hi: fr.right[0],
        hi_expr: None,
        c: fr.right[0],
        h: Word::empty(),
        indices: Vec::new(),
    }];
    while let Some(node) = stack.pop() {
        if node.stage == n {
            if pieces.len() >= budgets.piece_budget {
                tail += node.hi - node.lo;
                continue;
            }
            let lo_expr = None;
            pieces.push(Piece {
                lo: node.lo,
                hi: node.hi,
                indices: node.indices,
                word: node.h.inverse(),
                lo_expr,
                hi_expr: node.hi_expr,
            });
            continue;
        }
        if pieces.len() >= budgets.piece_budget {
            tail += node.hi - node.lo;
            continue;
        }
        let k = node.stage;
        let (sk, snext) = (fr.s[k], fr.s[k + 1]);
        if !(node.c > sk - slack && node.c <= fr.right[k] + slack) {
            return Err(Error::StageOrderViolation { stage: k, c: node.c, lower: sk, upper: fr.right[k] });
        }
        let fk = fr.pair.get(fr.owners[k]);
        // t_0 = s_{k+1}; find the first t_j < c.
        let mut t = vec![snext];
        while *t.last().unwrap() >= node.c {
            if t.len() > ORBIT_CAP {
                return Err(Error::BudgetExhausted { budget: ORBIT_CAP });
            }
            let next = fk.lift(*t.last().unwrap());
            t.push(next);
        }
        let j = t.len() - 1;
        let base = format!("s{}", k + 1);
        let mut children = Vec::with_capacity(depth);
        let mut hi = node.hi;
        let mut hi_expr = node.hi_expr.clone();
        for l in 0..depth {
            let m = j + l;
            let mut lead = Word::empty();
            lead.push(fr.owners[k], m as i32);
            let h = lead.then(&node.h);
            let lo = h.apply(&fr.pair, snext);
            let lo_expr = OrbitExpr { base: base.clone(), base_point: snext, word: h.clone(), value: lo };
            let c_next = if l == 0 { fk.pow(-(j as i32)).lift(node.c) } else { fk.inverse().lift(snext) };
            let mut indices = node.indices.clone();
            indices.push(l as u32);
            children.push(Node { stage: k + 1, lo, hi, hi_expr, c: c_next, h, indices });
            hi = lo;
            hi_expr = Some(lo_expr);
        }
        tail += hi - node.lo;
        // Left endpoints of the children are recorded on the pieces at the
        // end of the induction; the deepest child sits on top of the stack
        // last so pieces are emitted left of their parent's tail first.
        for ch in children.into_iter().rev() {
            stack.push(ch);
        }
    }

    // Attach left-endpoint expressions: a piece's lo is the orbit point
    // h(f_k^{m}(s_{k+1})) of its last stage; recompute it from the word.
    for p in &mut pieces {
        let k = n - 1;
        let h = p.word.inverse();
        let snext = fr.s[k + 1];
        // h maps stage-n coordinates to A, and h(s_n) is the piece's lo.
        p.lo_expr = Some(OrbitExpr { base: format!("s{}", k + 1), base_point: snext, word: h.clone(), value: h.apply(&fr.pair, snext) });
    }
    pieces.sort_by(|p, q| p.lo.total_cmp(&q.lo));

    let (d0, d1) = fr.domain();
    let mut discontinuities: Vec<Discontinuity> = Vec::new();
    for p in &pieces {
        for ex in [&p.lo_expr, &p.hi_expr].into_iter().flatten() {
            let x = ex.value;
            if x > d0 + tol.point && x < d1 - tol.point && !discontinuities.iter().any(|d| (d.point - x).abs() <= tol.point) {
                discontinuities.push(Discontinuity { point: x, expression: ex.clone() });
            }
        }
    }
    discontinuities.sort_by(|p, q| p.point.total_cmp(&q.point));

    Ok(ReturnMapAtlas {
        kind: AtlasKind::Global { cycle: fr.s.clone(), owners: fr.owners.clone() },
        chart: fr.chart,
        domain: fr.domain(),
        pieces,
        discontinuities,
        depth,
        tail_mass: tail,
        shift: fr.shift,
    })
}
