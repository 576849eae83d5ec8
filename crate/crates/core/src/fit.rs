//! Least-squares fit of `log N = log C + α·log B + β·log log B`.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FitMode {
    Free,
    FixedAlpha,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FitResult {
    pub alpha: f64,
    pub log_exponent: f64,
    pub constant: f64,
    /// Root mean square of the residuals in `log N`.
    pub residual: f64,
    pub mode: FitMode,
}

/// Fits `(B, N)` samples. With `fix_alpha`, only `C` and `β` are fitted.
pub fn fit_exponents(samples: &[(f64, f64)], fix_alpha: Option<f64>) -> Result<FitResult> {
    if samples.len() < 4 {
        return Err(Error::Fit(format!("need at least 4 samples, got {}", samples.len())));
    }
    let e2 = std::f64::consts::E.powi(2);
    for &(b, n) in samples {
        if !(b >= e2) {
            return Err(Error::Fit(format!("sample B = {b} is below e^2")));
        }
        if !(n > 0.0) {
            return Err(Error::Fit(format!("count at B = {b} is not positive")));
        }
    }
    let m = samples.len();
    let cols = if fix_alpha.is_some() { 2 } else { 3 };
    let mut a = DMatrix::<f64>::zeros(m, cols);
    let mut y = DVector::<f64>::zeros(m);
    for (k, &(b, n)) in samples.iter().enumerate() {
        let lb = b.ln();
        a[(k, 0)] = 1.0;
        match fix_alpha {
            Some(alpha) => {
                a[(k, 1)] = lb.ln();
                y[k] = n.ln() - alpha * lb;
            }
            None => {
                a[(k, 1)] = lb;
                a[(k, 2)] = lb.ln();
                y[k] = n.ln();
            }
        }
    }
    let x = a
        .clone()
        .svd(true, true)
        .solve(&y, 1e-12)
        .map_err(|e| Error::Fit(e.to_string()))?;
    let r = &a * &x - &y;
    let residual = (r.norm_squared() / m as f64).sqrt();
    Ok(match fix_alpha {
        Some(alpha) => FitResult {
            alpha,
            log_exponent: x[1],
            constant: x[0].exp(),
            residual,
            mode: FitMode::FixedAlpha,
        },
        None => FitResult {
            alpha: x[1],
            log_exponent: x[2],
            constant: x[0].exp(),
            residual,
            mode: FitMode::Free,
        },
    })
}
