//! Numerical tolerances and work budgets shared by every analysis stage.

use serde::{Deserialize, Serialize};

/// Tolerances used throughout the pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// A point `x` is fixed by `g` when `|g(x) - x| <= point`.
    pub point: f64,
    /// Target residual of monotone inversion.
    pub inversion: f64,
    /// `|Df^q - 1|` below this triggers one-sided stability analysis.
    pub margin: f64,
    /// Clustering resolutions for orbit-density statistics.
    pub deltas: Vec<f64>,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            point: 1e-10,
            inversion: 1e-12,
            margin: 1e-6,
            deltas: vec![1e-2, 1e-3, 1e-4],
        }
    }
}

/// Work budgets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Budgets {
    /// Total composition steps for orbit sampling.
    pub orbit_steps: usize,
    /// Per-index truncation depth of return-map partitions.
    pub atlas_depth: usize,
    /// Upper bound on the number of pieces of a global atlas.
    pub piece_budget: usize,
    /// Iterations used for rotation-number estimates.
    pub rotation_iterations: usize,
    /// Largest denominator tried by the rationality test.
    pub max_denominator: u32,
}

impl Default for Budgets {
    fn default() -> Self {
        Self {
            orbit_steps: 1_000_000,
            atlas_depth: 12,
            piece_budget: 20_000,
            rotation_iterations: 4_000,
            max_denominator: 12,
        }
    }
}
