//! Sector calculus, a/b-invariants, thin-morphism scans and exact point
//! counting for stacky Batyrev–Manin and Malle heuristics.

pub mod cli;
pub mod config;
pub mod counting;
pub mod error;
pub mod fit;
pub mod galois;
pub mod group;
pub mod perm;
pub mod invariants;
pub mod sector;
pub mod stackspec;
pub mod thin;

pub use error::{Error, Result};

/// Exact rationals used for ages, raising values and invariants.
pub type Q = num_rational::Ratio<i64>;
