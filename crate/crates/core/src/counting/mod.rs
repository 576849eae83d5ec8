//! Exact point counting: heights, enumerators, sieve oracles and series.

pub mod heights;
pub mod mu;
pub mod series;
pub mod sieve;
pub mod wps;

use serde::{Deserialize, Serialize};

/// Enumeration limits; exceeding one is an error, never a silent truncation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Budget {
    /// Largest sieve the enumerators may allocate.
    pub max_prime: u64,
    /// Largest number of enumeration steps (profiles plus outer tuples).
    pub max_work: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_prime: 50_000_000,
            max_work: 20_000_000_000,
        }
    }
}
