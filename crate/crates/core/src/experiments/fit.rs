use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Least-squares line with the RMS of its residuals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fit {
    pub slope: f64,
    pub intercept: f64,
    pub residual: f64,
}

pub(crate) fn least_squares(xs: &[f64], ys: &[f64]) -> Result<Fit> {
    let n = xs.len();
    if n < 2 || n != ys.len() {
        return Err(Error::Degenerate(format!("need at least two points, got {n}")));
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if !(sxx > 0.0) {
        return Err(Error::Degenerate("abscissae are all equal".into()));
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = xs.iter().zip(ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    Ok(Fit {
        slope,
        intercept,
        residual: (ss / nf).sqrt(),
    })
}

/// Ordinary least squares of log(value) against log(ε).
pub fn fit_rate(pairs: &[(f64, f64)]) -> Result<Fit> {
    if let Some(&(e, v)) = pairs.iter().find(|(e, v)| !(*e > 0.0) || !(*v > 0.0)) {
        return Err(Error::validation("fit", format!("nonpositive point ({e}, {v})")));
    }
    let xs: Vec<f64> = pairs.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = pairs.iter().map(|p| p.1.ln()).collect();
    least_squares(&xs, &ys)
}
