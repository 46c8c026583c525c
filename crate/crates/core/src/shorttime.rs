//! The exact Dyson series for the survival amplitude, the bath memory kernel and
//! the short-time fractional law with its Zeno time.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::model::ModelParams;
use crate::specfun::{gamma_real, hyp1f1, ln_gamma, SeriesValue};

/// Cap on the order in `g^2` of the Dyson series.
pub const MAX_SERIES_ORDER: usize = 400;

/// Terms above this magnitude lose too many digits to cancellation.
pub const PEAK_TERM_LIMIT: f64 = 1e12;

/// Sampled survival amplitude produced by one route.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SurvivalCurve {
    times: Vec<f64>,
    amplitudes: Vec<Complex64>,
    probabilities: Vec<f64>,
    err_bounds: Vec<f64>,
    method_tag: String,
}

impl SurvivalCurve {
    /// `times` must be non-negative and non-decreasing. Probabilities are
    /// computed from the amplitudes.
    pub fn new(
        method_tag: impl Into<String>,
        times: Vec<f64>,
        amplitudes: Vec<Complex64>,
        err_bounds: Vec<f64>,
    ) -> Result<Self> {
        if amplitudes.len() != times.len() || err_bounds.len() != times.len() {
            return Err(domain(
                "amplitudes",
                amplitudes.len() as f64,
                "one amplitude and one error bound per time required",
            ));
        }
        check_times(&times)?;
        let probabilities = amplitudes.iter().map(|a| a.norm_sqr()).collect();
        Ok(Self {
            times,
            amplitudes,
            probabilities,
            err_bounds,
            method_tag: method_tag.into(),
        })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }
    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }
    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }
    pub fn err_bounds(&self) -> &[f64] {
        &self.err_bounds
    }
    pub fn method_tag(&self) -> &str {
        &self.method_tag
    }
    pub fn len(&self) -> usize {
        self.times.len()
    }
    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Amplitude at an arbitrary `t` inside the sampled range by cubic Lagrange
    /// interpolation on the four nearest samples.
    pub fn amplitude_at(&self, t: f64) -> Result<Complex64> {
        let n = self.times.len();
        if n == 0 || t < self.times[0] || t > self.times[n - 1] {
            return Err(domain("t", t, "outside the sampled range"));
        }
        if n < 4 {
            return Err(domain("t", t, "interpolation needs at least four samples"));
        }
        let i = self.times.partition_point(|&s| s <= t).saturating_sub(1);
        let start = i.saturating_sub(1).min(n - 4);
        let xs = &self.times[start..start + 4];
        let ys = &self.amplitudes[start..start + 4];
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..4 {
            let mut w = 1.0;
            for m in 0..4 {
                if m != j {
                    w *= (t - xs[m]) / (xs[j] - xs[m]);
                }
            }
            acc += ys[j] * w;
        }
        Ok(acc)
    }
}

pub(crate) fn check_times(times: &[f64]) -> Result<()> {
    for (i, &t) in times.iter().enumerate() {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(domain("t", t, "times must be finite and non-negative"));
        }
        if i > 0 && t < times[i - 1] {
            return Err(domain("t", t, "times must be sorted"));
        }
    }
    Ok(())
}

/// Coefficient `c` of the short-time law `p(t) ~ 1 - c t^(2 - nu)` and the
/// associated Zeno time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ZenoEstimate {
    pub coeff: f64,
    pub exponent: f64,
    pub tau_z: f64,
}

impl ZenoEstimate {
    pub fn from_coeff(coeff: f64, nu: f64) -> Result<Self> {
        if !(coeff > 0.0 && coeff.is_finite()) {
            return Err(domain("coeff", coeff, "must be finite and positive"));
        }
        if !(nu > 0.0 && nu < 1.0) {
            return Err(Error::Regime { nu });
        }
        let exponent = 2.0 - nu;
        Ok(Self {
            coeff,
            exponent,
            tau_z: coeff.powf(-1.0 / exponent),
        })
    }
}

/// Memory kernel `eta(dt) = g^2 e^(i omega_s dt) (s_d omega_0^-nu / n) e^(-i nu pi/2) Gamma(nu) dt^-nu`.
pub fn autocorrelation(p: &ModelParams, dt: f64) -> Result<Complex64> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(domain("dt", dt, "kernel is singular at dt = 0"));
    }
    let nu = p.nu();
    let mag = p.spectral_weight() * p.gamma_nu() * dt.powf(-nu);
    Ok(Complex64::from_polar(mag, p.omega_s() * dt - nu * PI / 2.0))
}

/// The exact amplitude as a power series in `g^2 t^(2 - nu)` whose coefficients
/// involve `1F1(l(1 - nu); l(2 - nu) + 1; i omega_s t)`.
///
/// Fails with [`Error::Overflow`] once the terms grow beyond
/// [`PEAK_TERM_LIMIT`], which happens roughly for `g^2 t^(2 - nu) > 30`. Use the
/// resolvent route there.
pub fn amplitude_series(p: &ModelParams, t: f64, tol: f64) -> Result<SeriesValue> {
    let mut s = rotating_amplitude_series(p, t, tol)?;
    if t > 0.0 {
        s.value *= Complex64::from_polar(1.0, -p.omega_s() * t);
    }
    Ok(s)
}

/// [`amplitude_series`] without the free phase, `e^(i omega_s t) c_S(t)`. Its
/// squared modulus is the survival probability without the rounding of the phase
/// factor, so it is exactly 1 for `g = 0`.
pub fn rotating_amplitude_series(p: &ModelParams, t: f64, tol: f64) -> Result<SeriesValue> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(domain("t", t, "time must be finite and non-negative"));
    }
    if !(tol > 0.0) {
        return Err(domain("tol", tol, "tolerance must be positive"));
    }
    if t == 0.0 {
        return Ok(SeriesValue {
            value: Complex64::new(1.0, 0.0),
            terms_used: 1,
            trunc_bound: 0.0,
        });
    }
    let nu = p.nu();
    let x_mag = p.spectral_weight() * PI / (nu * PI).sin() * t.powf(2.0 - nu);
    if x_mag == 0.0 {
        return Ok(SeriesValue {
            value: Complex64::new(1.0, 0.0),
            terms_used: 1,
            trunc_bound: 0.0,
        });
    }
    let ln_x = x_mag.ln();
    let x_arg = PI - nu * PI / 2.0;
    let z = Complex64::new(0.0, p.omega_s() * t);

    let mut sum = Complex64::new(1.0, 0.0);
    let mut small_run = 0;
    for l in 1..=MAX_SERIES_ORDER {
        let lf = l as f64;
        let b = lf * (2.0 - nu) + 1.0;
        let ln_mag = lf * ln_x - ln_gamma(b)?;
        if ln_mag > PEAK_TERM_LIMIT.ln() {
            return Err(Error::Overflow {
                what: "Dyson series",
                peak: ln_mag.exp(),
                limit: PEAK_TERM_LIMIT,
            });
        }
        let kummer = hyp1f1(lf * (1.0 - nu), b, z, tol / 10.0)?;
        let term = Complex64::from_polar(ln_mag.exp(), lf * x_arg) * kummer.value;
        sum += term;
        if term.norm() < tol * sum.norm().max(1.0) {
            small_run += 1;
            if small_run == 2 {
                return Ok(SeriesValue {
                    value: sum,
                    terms_used: l + 1,
                    trunc_bound: term.norm(),
                });
            }
        } else {
            small_run = 0;
        }
    }
    Err(Error::NonConvergence {
        what: "Dyson series",
        terms: MAX_SERIES_ORDER,
    })
}

/// `nu Gamma(nu) pi^(D/2) / (Gamma(D/2 + 1)(1 - nu)(2 - nu))`.
fn leading_constant(p: &ModelParams) -> f64 {
    let nu = p.nu();
    let half = p.dim() as f64 / 2.0;
    let gamma_half = gamma_real(half + 1.0).expect("D/2 + 1 is positive");
    nu * p.gamma_nu() * PI.powf(half) / (gamma_half * (1.0 - nu) * (2.0 - nu))
}

/// Complex coefficient `k` in `c_S(t) ~ e^(-i omega_s t)(1 - k t^(2 - nu))`.
pub fn short_time_coefficient(p: &ModelParams) -> Complex64 {
    let nu = p.nu();
    let mag = leading_constant(p) * p.g() * p.g() * p.omega_0().powf(-nu);
    Complex64::from_polar(mag, -nu * PI / 2.0)
}

pub fn short_time_amplitude(p: &ModelParams, t: f64) -> Complex64 {
    let phase = Complex64::from_polar(1.0, -p.omega_s() * t);
    if t == 0.0 {
        return phase;
    }
    phase * (1.0 - short_time_coefficient(p) * t.powf(2.0 - p.nu()))
}

/// `1 - c t^(2 - nu)` with `c = 2 Re k`, the first-order expansion of `|c_S|^2`.
pub fn short_time_probability(p: &ModelParams, t: f64) -> f64 {
    if t == 0.0 {
        return 1.0;
    }
    1.0 - probability_coefficient(p) * t.powf(2.0 - p.nu())
}

fn probability_coefficient(p: &ModelParams) -> f64 {
    2.0 * short_time_coefficient(p).re
}

pub fn zeno_time(p: &ModelParams) -> Result<ZenoEstimate> {
    if p.g() == 0.0 {
        return Err(Error::ZeroCoupling);
    }
    ZenoEstimate::from_coeff(probability_coefficient(p), p.nu())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn fig1() -> ModelParams {
        ModelParams::new(1.0, 1.0, 1.0, 1, 2.0).unwrap()
    }

    #[test]
    fn autocorrelation_values() {
        let p = ModelParams::new(0.0, 1.0, 1.0, 1, 2.0).unwrap();
        let eta = autocorrelation(&p, 1.0).unwrap();
        assert_relative_eq!(eta.re, 1.253_314_137_315_500_3, max_relative = 1e-14);
        assert_relative_eq!(eta.im, -1.253_314_137_315_500_3, max_relative = 1e-14);
        assert!(autocorrelation(&p, 0.0).is_err());
        let free = ModelParams::new(1.0, 1.0, 0.0, 1, 2.0).unwrap();
        assert_eq!(autocorrelation(&free, 0.3).unwrap(), Complex64::new(0.0, 0.0));

        let q = ModelParams::new(1.7, 1.0, 0.4, 1, 3.0).unwrap();
        let r = autocorrelation(&q, 0.8).unwrap() / autocorrelation(&q, 0.4).unwrap();
        let expect = Complex64::from_polar(2f64.powf(-q.nu()), 1.7 * 0.4);
        assert!((r - expect).norm() < 1e-14);
    }

    #[test]
    fn series_trivial_cases() {
        let p = fig1();
        assert_eq!(amplitude_series(&p, 0.0, 1e-12).unwrap().value, Complex64::new(1.0, 0.0));
        let free = ModelParams::new(1.0, 1.0, 0.0, 1, 2.0).unwrap();
        let v = amplitude_series(&free, 7.0, 1e-12).unwrap().value;
        assert!((v - Complex64::from_polar(1.0, -7.0)).norm() < 1e-15);
        assert_eq!(rotating_amplitude_series(&free, 7.0, 1e-12).unwrap().value.norm_sqr(), 1.0);
        let a = amplitude_series(&p, 0.3, 1e-12).unwrap().value;
        let r = rotating_amplitude_series(&p, 0.3, 1e-12).unwrap().value;
        assert!((a - r * Complex64::from_polar(1.0, -0.3)).norm() < 1e-16);
    }

    #[test]
    fn series_reports_overflow_at_large_times() {
        let err = amplitude_series(&fig1(), 40.0, 1e-12).unwrap_err();
        assert!(matches!(err, Error::Overflow { .. }));
    }

    #[test]
    fn leading_coefficient_for_the_reference_model() {
        let p = fig1();
        let c = probability_coefficient(&p);
        assert_relative_eq!(c, 4.0 * (2.0 * PI).sqrt() / 3.0, max_relative = 1e-14);
        let z = zeno_time(&p).unwrap();
        assert_eq!(z.exponent, 1.5);
        assert_relative_eq!(z.tau_z, 0.447_3, max_relative = 1e-3);
        assert_relative_eq!(z.coeff * z.tau_z.powf(z.exponent), 1.0, max_relative = 1e-15);
        assert!(matches!(
            zeno_time(&ModelParams::new(1.0, 1.0, 0.0, 1, 2.0).unwrap()),
            Err(Error::ZeroCoupling)
        ));
    }

    #[test]
    fn zeno_estimate_scaling() {
        assert_eq!(ZenoEstimate::from_coeff(1.0, 0.3).unwrap().tau_z, 1.0);
        let a = ZenoEstimate::from_coeff(2.0, 0.6).unwrap();
        let b = ZenoEstimate::from_coeff(2.0 * 5.0, 0.6).unwrap();
        assert_relative_eq!(b.tau_z / a.tau_z, 5f64.powf(-1.0 / 1.4), max_relative = 1e-14);
    }

    #[test]
    fn short_time_probability_is_first_order_modulus() {
        let p = fig1();
        for &t in &[1e-4, 1e-3, 1e-2] {
            let diff = short_time_amplitude(&p, t).norm_sqr() - short_time_probability(&p, t);
            let k = short_time_coefficient(&p).norm();
            assert!(diff.abs() <= k * k * t.powf(3.0) + 1e-15);
        }
    }

    #[test]
    fn series_matches_leading_law_at_small_t() {
        let p = fig1();
        for &t in &[1e-5, 1e-4, 1e-3] {
            let s = amplitude_series(&p, t, 1e-15).unwrap().value;
            let lead = short_time_amplitude(&p, t);
            // next correction is O(t^3) from the second Dyson order and O(t^2.5)
            // from omega_s
            assert!((s - lead).norm() < 10.0 * t.powf(2.5), "t={t}");
        }
    }

    #[test]
    fn curve_validation_and_interpolation() {
        let ts: Vec<f64> = (0..20).map(|i| i as f64 * 0.1).collect();
        let amps: Vec<Complex64> = ts.iter().map(|&t| Complex64::from_polar(1.0, -t)).collect();
        let c = SurvivalCurve::new("test", ts.clone(), amps, vec![0.0; 20]).unwrap();
        assert_eq!(c.probabilities()[0], 1.0);
        let at = c.amplitude_at(0.55).unwrap();
        assert!((at - Complex64::from_polar(1.0, -0.55)).norm() < 1e-5);
        assert!(c.amplitude_at(5.0).is_err());
        assert!(SurvivalCurve::new("x", vec![1.0, 0.5], vec![Complex64::new(1.0, 0.0); 2], vec![0.0; 2]).is_err());
    }
}
