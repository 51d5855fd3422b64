//! Composition words over `{f0^±1, f1^±1}` in run-length form.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::{Generator, MapPair};

/// A block `g^exp` of a word.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Letter {
    pub map: Generator,
    pub exponent: i32,
}

/// A composition of generator powers, stored in application order: the
/// first letter acts first. `Word[g^a, h^b]` is the map `h^b ∘ g^a`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Word(pub Vec<Letter>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Append `g^exp` (applied after everything already present), merging
    /// with the last block when it uses the same generator.
    pub fn push(&mut self, map: Generator, exponent: i32) {
        if exponent == 0 {
            return;
        }
        if let Some(last) = self.0.last_mut() {
            if last.map == map {
                last.exponent += exponent;
                if last.exponent == 0 {
                    self.0.pop();
                }
                return;
            }
        }
        self.0.push(Letter { map, exponent });
    }

    /// `other ∘ self`.
    pub fn then(&self, other: &Word) -> Word {
        let mut w = self.clone();
        for l in &other.0 {
            w.push(l.map, l.exponent);
        }
        w
    }

    /// The inverse word.
    pub fn inverse(&self) -> Word {
        Word(self.0.iter().rev().map(|l| Letter { map: l.map, exponent: -l.exponent }).collect())
    }

    /// Total number of generator applications.
    pub fn len(&self) -> u64 {
        self.0.iter().map(|l| l.exponent.unsigned_abs() as u64).sum()
    }

    /// Apply on the lift.
    pub fn apply(&self, pair: &MapPair, x: f64) -> f64 {
        self.0.iter().fold(x, |y, l| pair.apply(l.map, l.exponent, y))
    }

    /// Image and derivative by the chain rule.
    pub fn apply_with_deriv(&self, pair: &MapPair, x: f64) -> (f64, f64) {
        let inv = [pair.f0.inverse(), pair.f1.inverse()];
        let mut y = x;
        let mut d = 1.0;
        for l in &self.0 {
            let m = if l.exponent > 0 { pair.get(l.map) } else { &inv[l.map.index()] };
            for _ in 0..l.exponent.unsigned_abs() {
                let (v, dv) = m.value_and_deriv(y);
                d *= dv;
                y = v;
            }
        }
        (y, d)
    }
}

impl fmt::Display for Word {
    /// Composition notation, e.g. `f0^-2 ∘ f1^-1`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("id");
        }
        let parts: Vec<String> = self.0.iter().rev().map(|l| format!("{}^{}", l.map, l.exponent)).collect();
        f.write_str(&parts.join(" ∘ "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::{CircleMap, MapFamily};

    #[test]
    fn push_merges_and_cancels() {
        let mut w = Word::empty();
        w.push(Generator::F0, 2);
        w.push(Generator::F0, -1);
        w.push(Generator::F1, 3);
        w.push(Generator::F1, -3);
        assert_eq!(w.0, vec![Letter { map: Generator::F0, exponent: 1 }]);
    }

    #[test]
    fn word_and_inverse_round_trip() {
        let pair = MapPair::new(
            CircleMap::new(MapFamily::perturbed(0.1, 0.3, 0.0)).unwrap(),
            CircleMap::new(MapFamily::perturbed(-0.2, 0.2, 0.4)).unwrap(),
        )
        .unwrap();
        let mut w = Word::empty();
        w.push(Generator::F1, -2);
        w.push(Generator::F0, 3);
        let x = 0.42;
        let y = w.apply(&pair, x);
        assert!((w.inverse().apply(&pair, y) - x).abs() < 1e-13);
        let (y2, d) = w.apply_with_deriv(&pair, x);
        assert!((y - y2).abs() < 1e-15);
        let h = 1e-6;
        let nd = (w.apply(&pair, x + h) - w.apply(&pair, x - h)) / (2.0 * h);
        assert!((d - nd).abs() < 1e-7);
        assert_eq!(w.to_string(), "f0^3 ∘ f1^-2");
    }
}
