//! Optional TOML configuration for budgets, group bounds and worker count.
//!
//! ```toml
//! order_bound = 10000
//! subgroup_bound = 360
//! workers = 1
//!
//! [budget]
//! max_prime = 50000000
//! max_work = 20000000000
//! ```

use serde::Deserialize;

use crate::counting::Budget;
use crate::error::{Error, Result};
use crate::group::{DEFAULT_ORDER_BOUND, DEFAULT_SUBGROUP_BOUND};

#[derive(Clone, Debug, PartialEq, Eq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub order_bound: usize,
    pub subgroup_bound: usize,
    /// Rayon worker threads; `None` uses the rayon default.
    pub workers: Option<usize>,
    pub budget: Budget,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            order_bound: DEFAULT_ORDER_BOUND,
            subgroup_bound: DEFAULT_SUBGROUP_BOUND,
            workers: None,
            budget: Budget::default(),
        }
    }
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Config = toml::from_str(text).map_err(|e| Error::InvalidArgument(format!("config: {e}")))?;
        if cfg.workers == Some(0) {
            return Err(Error::InvalidArgument("config: workers must be at least 1".into()));
        }
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }
}
