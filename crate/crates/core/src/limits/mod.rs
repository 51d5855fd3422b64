//! Limit sets of the semigroup action: orbit sampling, contraction
//! witnesses, the spectral decomposition, minimality and exceptional
//! minimal sets.

pub mod decomposition;
pub mod denjoy;
pub mod minimality;
pub mod orbit;
pub mod witness;
