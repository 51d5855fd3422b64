//! Orbit sampling under random, greedy and return-map-guided words.
//!
//! A walk applies generators of `Phi` (or of `Phi^-1`) one at a time. Its
//! letters come in segments: with probability 1/2 a block of uniformly
//! random letters, with probability 1/4 a run of one generator (an
//! attraction walk towards that generator's attractors; run lengths are
//! log-uniform so that weakly contracting generators still reach their
//! attractors at every scale), and with
//! probability 1/4 one of the supplied guide words (typically the
//! inverses of return-map branches). Without guide words the last kind
//! falls back to random letters.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::maps::{wrap, CircleMap, Generator, MapPair, Word};

/// On the line a point beyond this bound has escaped to infinity.
pub const ESCAPE_BOUND: f64 = 1e6;
/// Letters per random segment.
const RANDOM_SEGMENT: usize = 64;
/// Longest attraction run.
const GREEDY_MAX: f64 = 256.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Random,
    Greedy,
    ReturnMap,
    /// The 50/25/25 mix of the three.
    Mixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Escape {
    PlusInfinity,
    MinusInfinity,
}

/// Either `Phi` or `Phi^-1`, with the maps used for single steps.
#[derive(Debug, Clone)]
pub struct Walker {
    maps: [CircleMap; 2],
    circle: bool,
    guides: Vec<Word>,
    inverse: bool,
}

impl Walker {
    pub fn new(pair: &MapPair, inverse: bool) -> Self {
        let p = if inverse { pair.inverse() } else { pair.clone() };
        Self { maps: [p.f0, p.f1], circle: pair.is_circle(), guides: Vec::new(), inverse }
    }

    /// Words (in the generators of this walker's system) used by the
    /// return-map strategy.
    pub fn with_guides(mut self, guides: Vec<Word>) -> Self {
        self.guides = guides.into_iter().filter(|w| !w.is_empty()).collect();
        self
    }

    pub fn is_inverse(&self) -> bool {
        self.inverse
    }

    pub fn is_circle(&self) -> bool {
        self.circle
    }

    /// One generator of this system (`Phi^-1` letters are inverses).
    pub fn map(&self, g: Generator) -> &CircleMap {
        &self.maps[g.index()]
    }

    /// Apply one letter; points are kept in `[0, 1)` on the circle.
    pub fn step(&self, g: Generator, x: f64) -> f64 {
        let y = self.maps[g.index()].lift(x);
        if self.circle {
            wrap(y)
        } else {
            y
        }
    }

    /// Word in the original generators equivalent to `letters` of this
    /// system.
    pub fn as_word(&self, letters: &[Generator]) -> Word {
        let mut w = Word::empty();
        let e = if self.inverse { -1 } else { 1 };
        for &g in letters {
            w.push(g, e);
        }
        w
    }

    /// Run `steps` letters from `x`, calling `visit(step_index, point,
    /// letter)` after each; stops early when `visit` returns `false` or
    /// the point escapes (line only).
    pub fn run<V>(&self, x: f64, steps: usize, strategy: Strategy, rng: &mut ChaCha8Rng, mut visit: V) -> WalkEnd
    where
        V: FnMut(usize, f64, Generator) -> bool,
    {
        let mut y = if self.circle { wrap(x) } else { x };
        let mut done = 0usize;
        let mut buf: Vec<Generator> = Vec::with_capacity(RANDOM_SEGMENT);
        while done < steps {
            buf.clear();
            self.segment(strategy, rng, &mut buf);
            for &g in &buf {
                y = self.step(g, y);
                if !self.circle && y.abs() > ESCAPE_BOUND {
                    let e = if y > 0.0 { Escape::PlusInfinity } else { Escape::MinusInfinity };
                    return WalkEnd { steps: done + 1, point: y, escaped: Some(e), stopped: false };
                }
                if !visit(done, y, g) {
                    return WalkEnd { steps: done + 1, point: y, escaped: None, stopped: true };
                }
                done += 1;
                if done >= steps {
                    break;
                }
            }
        }
        WalkEnd { steps: done, point: y, escaped: None, stopped: false }
    }

    fn segment(&self, strategy: Strategy, rng: &mut ChaCha8Rng, out: &mut Vec<Generator>) {
        let kind = match strategy {
            Strategy::Mixed => {
                let u: f64 = rng.random();
                if u < 0.5 {
                    Strategy::Random
                } else if u < 0.75 {
                    Strategy::Greedy
                } else {
                    Strategy::ReturnMap
                }
            }
            s => s,
        };
        match kind {
            Strategy::Greedy => {
                let g = if rng.random::<bool>() { Generator::F0 } else { Generator::F1 };
                // Log-uniform run length on [1, GREEDY_MAX].
                let u: f64 = rng.random();
                let len = GREEDY_MAX.powf(u) as usize;
                out.extend(std::iter::repeat_n(g, len.max(1)));
            }
            Strategy::ReturnMap if !self.guides.is_empty() => {
                let w = &self.guides[rng.random_range(0..self.guides.len())];
                for l in &w.0 {
                    // Guide letters are expressed in this system's generators.
                    for _ in 0..l.exponent.unsigned_abs() {
                        out.push(l.map);
                    }
                }
            }
            _ => {
                for _ in 0..RANDOM_SEGMENT {
                    out.push(if rng.random::<bool>() { Generator::F0 } else { Generator::F1 });
                }
            }
        }
    }
}

/// How a walk ended.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WalkEnd {
    pub steps: usize,
    pub point: f64,
    pub escaped: Option<Escape>,
    /// The visitor asked to stop.
    pub stopped: bool,
}

/// Deterministic RNG for stream `stream` of a seed.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

/// Bins of width `delta` over `[lo, hi)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BinGrid {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

impl BinGrid {
    pub fn new(lo: f64, hi: f64, delta: f64) -> Self {
        let count = ((hi - lo) / delta).ceil().max(1.0) as usize;
        Self { lo, hi, count }
    }

    pub fn width(&self) -> f64 {
        (self.hi - self.lo) / self.count as f64
    }

    pub fn index(&self, x: f64) -> Option<usize> {
        if !(x >= self.lo && x < self.hi) {
            return None;
        }
        Some((((x - self.lo) / self.width()) as usize).min(self.count - 1))
    }

    pub fn center(&self, i: usize) -> f64 {
        self.lo + (i as f64 + 0.5) * self.width()
    }
}

/// Approximation of an ω-limit set: the bins visited during the second
/// half of walks under each strategy, merged into clusters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OmegaLimit {
    pub delta: f64,
    /// Maximal runs of visited bins as closed intervals.
    pub clusters: Vec<(f64, f64)>,
    /// Visited bin indices.
    pub bins: Vec<usize>,
    /// Walks that left every bounded region.
    pub escapes: Vec<Escape>,
}

impl OmegaLimit {
    pub fn contains_bin(&self, i: usize) -> bool {
        self.bins.binary_search(&i).is_ok()
    }
}

/// ω-limit of `x` for `Phi` (or `Phi^-1` when the walker is inverted).
/// The phase window is `[0, 1)` on the circle and `window` on the line.
pub fn omega_limit(walker: &Walker, x: f64, budget: usize, delta: f64, window: (f64, f64), seed: u64) -> OmegaLimit {
    let grid = if walker.is_circle() { BinGrid::new(0.0, 1.0, delta) } else { BinGrid::new(window.0, window.1, delta) };
    let mut seen = vec![false; grid.count];
    let mut escapes = Vec::new();
    let per = (budget / 3).max(1);
    for (k, s) in [Strategy::Random, Strategy::Greedy, Strategy::ReturnMap].into_iter().enumerate() {
        let mut rng = stream_rng(seed, k as u64);
        let end = walker.run(x, per, s, &mut rng, |i, y, _| {
            if i >= per / 2 {
                if let Some(b) = grid.index(y) {
                    seen[b] = true;
                }
            }
            true
        });
        if let Some(e) = end.escaped {
            if !escapes.contains(&e) {
                escapes.push(e);
            }
        }
    }
    let bins: Vec<usize> = (0..grid.count).filter(|&i| seen[i]).collect();
    let mut clusters: Vec<(f64, f64)> = Vec::new();
    let w = grid.width();
    for &i in &bins {
        let (a, b) = (grid.lo + i as f64 * w, grid.lo + (i + 1) as f64 * w);
        match clusters.last_mut() {
            Some(last) if (last.1 - a).abs() < 0.5 * w => last.1 = b,
            _ => clusters.push((a, b)),
        }
    }
    OmegaLimit { delta, clusters, bins, escapes }
}

/// Coverage of a bin grid by one walk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coverage {
    pub seed: u64,
    pub bins: usize,
    pub covered: usize,
    /// Step at which the last bin was first hit, when all were.
    pub steps_to_full: Option<usize>,
    pub steps: usize,
}

impl Coverage {
    pub fn is_full(&self) -> bool {
        self.covered == self.bins
    }
}

/// Walk from `x` until every bin of `grid` was hit or `budget` steps.
/// `counts`, when given, accumulates the visit histogram over the full
/// budget (the walk then does not stop early).
pub fn coverage(walker: &Walker, x: f64, grid: &BinGrid, budget: usize, seed: u64, mut counts: Option<&mut Vec<u64>>) -> Coverage {
    let mut rng = stream_rng(seed, 0);
    let mut seen = vec![false; grid.count];
    let mut covered = 0;
    let mut full_at = None;
    let keep_going = counts.is_some();
    let end = walker.run(x, budget, Strategy::Mixed, &mut rng, |i, y, _| {
        if let Some(b) = grid.index(y) {
            if let Some(c) = counts.as_deref_mut() {
                c[b] += 1;
            }
            if !seen[b] {
                seen[b] = true;
                covered += 1;
                if covered == grid.count {
                    full_at = Some(i + 1);
                    return keep_going;
                }
            }
        }
        true
    });
    Coverage { seed, bins: grid.count, covered, steps_to_full: full_at, steps: end.steps }
}

/// A word of `Phi` (or of `Phi^-1`) taking `x` into the open interval
/// `target`, found by a walk mixing attraction runs and random letters.
pub fn reach_interval(walker: &Walker, x: f64, target: (f64, f64), budget: usize, seed: u64) -> Result<Word> {
    let inside = |y: f64| {
        if walker.is_circle() {
            let z = target.0 + (y - target.0).rem_euclid(1.0);
            z > target.0 && z < target.1
        } else {
            y > target.0 && y < target.1
        }
    };
    if inside(x) {
        return Ok(Word::empty());
    }
    let mut rng = stream_rng(seed, 0x7265_6163);
    let mut letters = Vec::new();
    let end = walker.run(x, budget, Strategy::Mixed, &mut rng, |_, y, g| {
        letters.push(g);
        !inside(y)
    });
    if end.stopped {
        Ok(walker.as_word(&letters))
    } else {
        Err(Error::BudgetExhausted { budget })
    }
}
