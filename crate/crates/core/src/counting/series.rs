//! Counting series `(B, N(B))` and their CSV / JSON forms.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountSeries {
    pub family: String,
    pub raising: String,
    /// `(B, N(B))`, increasing in `B`.
    pub samples: Vec<(u64, u64)>,
}

impl CountSeries {
    pub fn is_monotone(&self) -> bool {
        self.samples
            .windows(2)
            .all(|w| w[0].0 < w[1].0 && w[0].1 <= w[1].1)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("B,N\n");
        for (b, n) in &self.samples {
            out.push_str(&format!("{b},{n}\n"));
        }
        out
    }

    /// Reads `B,N` rows; a header line is optional.
    pub fn from_csv(text: &str) -> Result<Vec<(f64, f64)>> {
        let mut rows = Vec::new();
        for (k, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || (k == 0 && line.starts_with(|c: char| c.is_alphabetic())) {
                continue;
            }
            let bad = || Error::InvalidArgument(format!("line {}: expected 'B,N'", k + 1));
            let (b, n) = line.split_once(',').ok_or_else(bad)?;
            let b: f64 = b.trim().parse().map_err(|_| bad())?;
            let n: f64 = n.trim().parse().map_err(|_| bad())?;
            rows.push((b, n));
        }
        Ok(rows)
    }

    pub fn sidecar_json(&self) -> serde_json::Value {
        serde_json::json!({
            "family": self.family,
            "raising": self.raising,
            "samples": self.samples.len(),
        })
    }
}

/// `count` values `start·ratio^k`, rounded to integers and deduplicated.
pub fn geometric_samples(start: u64, ratio: f64, count: usize) -> Vec<u64> {
    let mut out: Vec<u64> = (0..count)
        .map(|k| (start as f64 * ratio.powi(k as i32)).round() as u64)
        .collect();
    out.dedup();
    out
}

/// Geometric samples from `lo` to `hi` inclusive, `count ≥ 2` points.
pub fn geometric_range(lo: u64, hi: u64, count: usize) -> Vec<u64> {
    let count = count.max(2);
    let ratio = (hi as f64 / lo as f64).powf(1.0 / (count - 1) as f64);
    let mut out: Vec<u64> = (0..count)
        .map(|k| (lo as f64 * ratio.powi(k as i32)).round() as u64)
        .collect();
    *out.last_mut().expect("nonempty") = hi;
    out.dedup();
    out
}

/// Sorted, deduplicated copy of the requested bounds.
pub(crate) fn normalized_samples(samples: &[u64]) -> Vec<u64> {
    let mut s = samples.to_vec();
    s.sort_unstable();
    s.dedup();
    s
}
