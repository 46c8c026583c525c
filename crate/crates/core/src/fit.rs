//! Least-squares power-law fits in log-log coordinates.

use serde::Serialize;

use crate::error::{domain, Result};

/// Fit of `y = coeff * t^slope`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerLawFit {
    pub slope: f64,
    pub coeff: f64,
    /// Root-mean-square residual of `ln y`.
    pub rms_residual: f64,
}

fn logs(ts: &[f64], ys: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    if ts.len() != ys.len() || ts.len() < 2 {
        return Err(domain("points", ts.len() as f64, "need at least two (t, y) pairs"));
    }
    let mut lx = Vec::with_capacity(ts.len());
    let mut ly = Vec::with_capacity(ts.len());
    for (&t, &y) in ts.iter().zip(ys) {
        if !(t > 0.0 && y > 0.0 && y.is_finite()) {
            return Err(domain("y", y, "log-log fit needs positive finite data"));
        }
        lx.push(t.ln());
        ly.push(y.ln());
    }
    Ok((lx, ly))
}

fn rms(v: impl Iterator<Item = f64>, n: usize) -> f64 {
    (v.map(|r| r * r).sum::<f64>() / n as f64).sqrt()
}

/// Free-slope fit.
pub fn fit_power_law(ts: &[f64], ys: &[f64]) -> Result<PowerLawFit> {
    let (lx, ly) = logs(ts, ys)?;
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(domain("t", ts[0], "fit needs at least two distinct times"));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rms_residual = rms(
        lx.iter().zip(&ly).map(|(x, y)| y - intercept - slope * x),
        lx.len(),
    );
    Ok(PowerLawFit {
        slope,
        coeff: intercept.exp(),
        rms_residual,
    })
}

/// Fit with the exponent held at `slope`; only the coefficient is free.
pub fn fit_fixed_exponent(ts: &[f64], ys: &[f64], slope: f64) -> Result<PowerLawFit> {
    let (lx, ly) = logs(ts, ys)?;
    let n = lx.len();
    let intercept = lx.iter().zip(&ly).map(|(x, y)| y - slope * x).sum::<f64>() / n as f64;
    let rms_residual = rms(lx.iter().zip(&ly).map(|(x, y)| y - intercept - slope * x), n);
    Ok(PowerLawFit {
        slope,
        coeff: intercept.exp(),
        rms_residual,
    })
}

/// `n` points spaced evenly in `ln t` between `t_min` and `t_max`.
pub fn log_grid(t_min: f64, t_max: f64, n: usize) -> Vec<f64> {
    debug_assert!(t_min > 0.0 && n >= 2);
    let (a, b) = (t_min.ln(), t_max.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}
