use fracdecay::oracle::{volterra_evolution, BathGrid, DiscreteBath};
use fracdecay::resolvent::Resolvent;
use fracdecay::shorttime::{amplitude_series, rotating_amplitude_series};
use fracdecay::{cutoff, Complex64, Result};
use rayon::prelude::*;

use crate::config::{Route, RunConfig};

/// One route sampled on the requested times: amplitude and error estimate per point.
#[derive(Debug, Clone)]
pub struct RouteSamples {
    pub route: Route,
    pub amplitudes: Vec<Complex64>,
    pub probabilities: Vec<f64>,
    pub errors: Vec<f64>,
}

fn collect(route: Route, pairs: Result<Vec<(Complex64, f64)>>) -> Result<RouteSamples> {
    let (amplitudes, errors): (Vec<Complex64>, Vec<f64>) = pairs?.into_iter().unzip();
    Ok(RouteSamples {
        route,
        probabilities: amplitudes.iter().map(|a| a.norm_sqr()).collect(),
        amplitudes,
        errors,
    })
}

pub fn evaluate(route: Route, cfg: &RunConfig, times: &[f64]) -> Result<RouteSamples> {
    let p = cfg.params();
    let tol = cfg.tol;
    if route == Route::Series {
        // Probabilities from the rotating-frame sum skip the rounding of |e^(-i omega_s t)|.
        let rows: Vec<(Complex64, f64, f64)> = times
            .par_iter()
            .map(|&t| {
                let rot = rotating_amplitude_series(p, t, tol)?;
                let amp = amplitude_series(p, t, tol)?;
                Ok((amp.value, rot.value.norm_sqr(), rot.trunc_bound))
            })
            .collect::<Result<_>>()?;
        return Ok(RouteSamples {
            route,
            amplitudes: rows.iter().map(|r| r.0).collect(),
            probabilities: rows.iter().map(|r| r.1).collect(),
            errors: rows.iter().map(|r| r.2).collect(),
        });
    }
    let pairs = match route {
        Route::Series => unreachable!("handled above"),
        Route::Resolvent => {
            let r = Resolvent::new(p, tol)?;
            times.par_iter().map(|&t| r.amplitude(t)).collect()
        }
        Route::Asymptotic => {
            let r = Resolvent::new(p, tol)?;
            let poles = *r.poles();
            times
                .iter()
                .map(|&t| {
                    if t == 0.0 {
                        return Ok((Complex64::new(1.0, 0.0), 0.0));
                    }
                    let z0_term = poles.alpha0 * (-Complex64::i() * poles.z0.to_complex() * t).exp();
                    let amp = r.long_time_amplitude(t);
                    // Next tail order is down by 1/t; the decaying pole is dropped outright.
                    let mut err = (amp - z0_term).norm() / t;
                    if let (Some(z1), Some(a1)) = (poles.z1, poles.alpha1) {
                        err += (a1 * (-Complex64::i() * z1.to_complex() * t).exp()).norm();
                    }
                    Ok((amp, err))
                })
                .collect()
        }
        Route::Cutoff2 => {
            let c = cfg.cutoff.expect("validated");
            times
                .par_iter()
                .map(|&t| cutoff::cutoff_amplitude_series(p, &c, t, tol).map(|s| (s.amplitude, s.err_bound)))
                .collect()
        }
        Route::OracleGrid => {
            let c = cfg.cutoff.expect("validated");
            let grid = BathGrid::uniform(p.dim(), c.lambda(), cfg.oracle.n_modes)?;
            let bath = DiscreteBath::new(p, &grid)?;
            Ok(times
                .par_iter()
                .map(|&t| (bath.amplitude(t), bath.norm_defect(t)))
                .collect())
        }
        Route::OracleVolterra => {
            let t_max = times.iter().cloned().fold(0.0, f64::max);
            if t_max == 0.0 {
                Ok(vec![(Complex64::new(1.0, 0.0), 0.0); times.len()])
            } else {
                let curve = volterra_evolution(p, t_max, cfg.oracle.dt, cfg.cutoff)?;
                let grid = curve.times();
                let errs = curve.err_bounds();
                times
                    .iter()
                    .map(|&t| {
                        // Error of the nearest step at or after t.
                        let i = grid.partition_point(|&s| s < t).min(errs.len() - 1);
                        curve.amplitude_at(t).map(|a| (a, errs[i]))
                    })
                    .collect()
            }
        }
    };
    collect(route, pairs)
}

/// Largest amplitude difference between two routes over the shared samples.
pub fn max_abs_diff(a: &RouteSamples, b: &RouteSamples) -> f64 {
    a.amplitudes
        .iter()
        .zip(&b.amplitudes)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}
