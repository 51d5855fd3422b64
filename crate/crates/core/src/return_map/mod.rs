//! Piecewise first-return maps on a fundamental domain `A`.
//!
//! Two constructions share the [`ReturnMapAtlas`] representation:
//!
//! * the local map of a star interval `[a, b]` (module [`local`]) on
//!   `A = (g1(a), g0^-1 g1(a)]`, and
//! * the global map of a cycle `s_0 < s_1 < ... < s_n = s_0 + 1`
//!   (module [`global`]) on `A = (s_0, g1^-1(s_0)]`.
//!
//! Both are computed in a standard chart (see [`Chart`]) where the chart
//! generators are `g0`, `g1`; coordinates and words in an atlas refer to
//! that chart. The partitions are countable; an atlas is truncated at a
//! per-index depth and reports the length of the unresolved part of `A`
//! as `tail_mass`.

pub mod expansion;
pub mod global;
pub mod local;

use serde::{Deserialize, Serialize};

use crate::intervals::{Chart, StarKind};
use crate::maps::{Generator, Letter, MapPair, Word};

/// A point given as a word applied to a reference point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitExpr {
    /// Name of the reference point (`"a"`, `"s0"`, `"s1"`, ...).
    pub base: String,
    /// Chart coordinate of the reference point.
    pub base_point: f64,
    pub word: Word,
    /// The value the construction used for this point.
    pub value: f64,
}

impl OrbitExpr {
    /// Re-evaluate the expression on the chart pair.
    pub fn evaluate(&self, chart_pair: &MapPair) -> f64 {
        self.word.apply(chart_pair, self.base_point)
    }
}

/// One branch of the return map: on `(lo, hi]` the map is `word`
/// followed by the translation `shift`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Piece {
    pub lo: f64,
    pub hi: f64,
    /// Multi-index: `[m, n]` locally, `[i_1, ..., i_n]` for a cycle.
    pub indices: Vec<u32>,
    /// Return branch, in chart generators and application order.
    pub word: Word,
    pub lo_expr: Option<OrbitExpr>,
    pub hi_expr: Option<OrbitExpr>,
}

impl Piece {
    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        x > self.lo && x <= self.hi
    }
}

/// A discontinuity of the return map with the orbit expression that
/// produces it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Discontinuity {
    pub point: f64,
    pub expression: OrbitExpr,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum AtlasKind {
    Local { interval_kind: StarKind, a: f64, b: f64 },
    Global { cycle: Vec<f64>, owners: Vec<Generator> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReturnMapAtlas {
    pub kind: AtlasKind,
    pub chart: Chart,
    /// `A = (domain.0, domain.1]` in chart coordinates.
    pub domain: (f64, f64),
    /// Pieces sorted by left endpoint.
    pub pieces: Vec<Piece>,
    pub discontinuities: Vec<Discontinuity>,
    pub depth: usize,
    /// Length of `A` not covered by pieces.
    pub tail_mass: f64,
    /// Integer translation applied after each branch word (the cycle
    /// winds once around the circle).
    pub shift: f64,
}

impl ReturnMapAtlas {
    /// The generating pair seen in the atlas chart.
    pub fn chart_pair(&self, pair: &MapPair) -> MapPair {
        self.chart.pair(pair)
    }

    pub fn domain_len(&self) -> f64 {
        self.domain.1 - self.domain.0
    }

    /// Index of the piece containing `x`.
    pub fn locate(&self, x: f64) -> Option<usize> {
        let i = self.pieces.partition_point(|p| p.lo < x);
        // Candidates: the piece just before the partition point.
        if i == 0 {
            return None;
        }
        let p = &self.pieces[i - 1];
        p.contains(x).then_some(i - 1)
    }

    /// `R(x)` replayed from the atlas, `None` in the tail.
    pub fn apply(&self, chart_pair: &MapPair, x: f64) -> Option<f64> {
        let i = self.locate(x)?;
        Some(self.pieces[i].word.apply(chart_pair, x) + self.shift)
    }

    /// `R(x)` and `DR(x)` replayed from the atlas.
    pub fn apply_with_deriv(&self, chart_pair: &MapPair, x: f64) -> Option<(f64, f64)> {
        let i = self.locate(x)?;
        let (y, d) = self.pieces[i].word.apply_with_deriv(chart_pair, x);
        Some((y + self.shift, d))
    }

    /// Total length covered by pieces.
    pub fn covered(&self) -> f64 {
        self.pieces.iter().map(Piece::len).sum()
    }

    /// A piece word rewritten in the original generators.
    pub fn original_word(&self, w: &Word) -> Word {
        let sign = if self.chart.inverted { -1 } else { 1 };
        Word(
            w.0.iter()
                .map(|l| Letter { map: self.chart.original(l.map), exponent: sign * l.exponent })
                .collect(),
        )
    }
}

/// `D(y) = |g0(y) - y|` for the chart `g0`.
pub fn displacement_d(chart_pair: &MapPair, y: f64) -> f64 {
    (chart_pair.f0.lift(y) - y).abs()
}
