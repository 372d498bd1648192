use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Least-squares fit of `ln value = intercept + slope · ln round` over the
/// tail of a series. The slope is the empirical regret order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FittedOrder {
    pub slope: f64,
    pub intercept: f64,
    pub window_fraction: f64,
    pub n_points: usize,
    /// Standard error of the slope (0 when the residuals vanish).
    pub stderr: f64,
}

/// Fewest points accepted in the fitting window.
pub const MIN_FIT_POINTS: usize = 10;

/// Fit the order over the last `⌈window_fraction · n⌉` points.
pub fn fit_order(rounds: &[u64], values: &[f64], window_fraction: f64) -> Result<FittedOrder> {
    if rounds.len() != values.len() {
        return Err(Error::Fit(format!(
            "{} rounds but {} values",
            rounds.len(),
            values.len()
        )));
    }
    if !(window_fraction > 0.0 && window_fraction <= 1.0) {
        return Err(Error::Fit(format!(
            "window fraction must lie in (0, 1], got {window_fraction}"
        )));
    }
    let n = rounds.len();
    let window = ((window_fraction * n as f64).ceil() as usize).min(n);
    if window < MIN_FIT_POINTS {
        return Err(Error::Fit(format!(
            "window holds {window} points, need at least {MIN_FIT_POINTS}"
        )));
    }
    let start = n - window;
    let mut xs = Vec::with_capacity(window);
    let mut ys = Vec::with_capacity(window);
    for (&t, &v) in rounds[start..].iter().zip(&values[start..]) {
        if !(v > 0.0) || t == 0 {
            return Err(Error::Fit(format!("nonpositive value {v} at round {t}")));
        }
        xs.push((t as f64).ln());
        ys.push(v.ln());
    }
    let m = window as f64;
    let xbar = xs.iter().sum::<f64>() / m;
    let ybar = ys.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - xbar).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Fit("window contains a single distinct round".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - xbar) * (y - ybar)).sum();
    let slope = sxy / sxx;
    let intercept = ybar - slope * xbar;
    let sse: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let stderr = (sse / (m - 2.0) / sxx).sqrt();
    Ok(FittedOrder {
        slope,
        intercept,
        window_fraction,
        n_points: window,
        stderr,
    })
}
