//! Lattices from codes over orders in division algebras.
//!
//! The crate builds orders in catalogued Q-division algebras, reduces them
//! modulo split primes, lifts codes over matrix rings back to lattices and
//! measures their packing densities with exact arithmetic.

pub mod algebra;
pub mod aminima;
pub mod catalog;
pub mod codes;
pub mod error;
pub mod exact;
pub mod export;
pub mod ff;
pub mod lattice;
pub mod primes;
pub mod residue;
pub mod search;
pub mod special;

pub use error::{Error, Result};
