//! Analysis of iterated function systems generated by two circle (or
//! real-line) diffeomorphisms close to rotations.

pub mod config;
pub mod error;
pub mod cycles;
pub mod intervals;
pub mod limits;
pub mod maps;
pub mod pipeline;
pub mod plot;
pub mod report;
pub mod return_map;
pub mod scenario;

pub use config::{Budgets, Tolerances};
pub use error::{Error, Result};
