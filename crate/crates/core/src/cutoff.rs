//! Second-order dynamics with a hard momentum cutoff `|k| <= lambda`.
//!
//! To second order in `g` the amplitude is `e^(-i omega_s t)(1 - g^2 s_d f(t))`
//! with
//!
//! ```text
//! f(t) = (lambda^D t^2 / n) sum_p i^p / ((p+1)(p+2))
//!        sum_{l<=p} (-x)^l y^(p-l) / (l! (p-l)! (nu + l)),    x = omega_0 lambda^n t, y = omega_s t.
//! ```
//!
//! For `x << 1` this is the quadratic (Zeno) law; for `x >> 1` and `y << 1` the
//! fractional `t^(2 - nu)` law emerges, which [`cutoff_decomposition`] exposes
//! through the incomplete gamma function.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;
use twofloat::TwoFloat;

use crate::error::{domain, Error, Result};
use crate::model::{CutoffParams, ModelParams};
use crate::specfun::{dd_div, gamma_real, upper_incomplete_gamma, SeriesValue, SERIES_TERM_CAP};

/// Largest term magnitude the `f64` double sum tolerates.
pub const PEAK_TERM_LIMIT: f64 = 1e14;

/// Unit roundoff of double-double arithmetic, 2^-104.
const DD_EPSILON: f64 = 4.93e-32;

/// Crossover variable below which the dynamics is tagged quadratic.
pub const QUADRATIC_BELOW: f64 = 0.1;
/// Crossover variable above which the dynamics is tagged fractional.
pub const FRACTIONAL_ABOVE: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Quadratic,
    Crossover,
    Fractional,
}

impl Regime {
    /// Classifies the crossover variable `omega_0 lambda^n t`. The thresholds are
    /// conventions, not sharp transitions.
    pub fn classify(ratio: f64) -> Self {
        if ratio < QUADRATIC_BELOW {
            Regime::Quadratic
        } else if ratio > FRACTIONAL_ABOVE {
            Regime::Fractional
        } else {
            Regime::Crossover
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CutoffSecondOrder {
    pub amplitude: Complex64,
    pub f_value: Complex64,
    pub regime: Regime,
    /// `omega_0 lambda^n t`.
    pub ratio: f64,
    /// Rounding estimate for `f_value` from the largest summed term.
    pub err_bound: f64,
    pub terms_used: usize,
}

fn check_time(t: f64, tol: f64) -> Result<()> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(domain("t", t, "time must be finite and non-negative"));
    }
    if !(tol > 0.0) {
        return Err(domain("tol", tol, "tolerance must be positive"));
    }
    Ok(())
}

/// Sums the double series for `f(t)`.
///
/// Rounding in the alternating sums grows like `e^(x + y)`, so evaluation stops
/// with [`Error::Overflow`] once a term exceeds [`PEAK_TERM_LIMIT`]; that happens
/// near `x + y = 35`.
pub fn cutoff_amplitude_series(
    p: &ModelParams,
    c: &CutoffParams,
    t: f64,
    tol: f64,
) -> Result<CutoffSecondOrder> {
    check_time(t, tol)?;
    let x = c.bandwidth(p) * t;
    let y = p.omega_s() * t;
    let nu = p.nu();
    let prefactor = c.lambda().powi(p.dim() as i32) * t * t / p.power();

    // xs[l] = (-x)^l / l!, ys[j] = y^j / j!
    let mut xs = vec![1.0];
    let mut ys = vec![1.0];
    let mut sum = Complex64::new(0.0, 0.0);
    let mut peak: f64 = 0.0;
    let mut small_run = 0;
    let mut i_pow = Complex64::new(1.0, 0.0);
    for order in 0..SERIES_TERM_CAP {
        if order > 0 {
            let k = order as f64;
            xs.push(xs[order - 1] * (-x) / k);
            ys.push(ys[order - 1] * y / k);
            i_pow *= Complex64::i();
        }
        let mut inner = 0.0;
        for l in 0..=order {
            let v = xs[l] * ys[order - l] / (nu + l as f64);
            peak = peak.max(v.abs());
            inner += v;
        }
        if peak > PEAK_TERM_LIMIT {
            return Err(Error::Overflow {
                what: "cutoff double series",
                peak,
                limit: PEAK_TERM_LIMIT,
            });
        }
        let of = order as f64;
        let term = i_pow * (inner / ((of + 1.0) * (of + 2.0)));
        sum += term;
        let past_peak = of > x + y;
        if past_peak && term.norm() <= tol * sum.norm() {
            small_run += 1;
            if small_run == 2 {
                let f_value = sum * prefactor;
                let err_bound = prefactor * (peak * f64::EPSILON * (order + 1) as f64 + term.norm());
                return Ok(CutoffSecondOrder {
                    amplitude: assemble(p, t, f_value),
                    f_value,
                    regime: Regime::classify(x),
                    ratio: x,
                    err_bound,
                    terms_used: order + 1,
                });
            }
        } else {
            small_run = 0;
        }
    }
    Err(Error::NonConvergence {
        what: "cutoff double series",
        terms: SERIES_TERM_CAP,
    })
}

fn assemble(p: &ModelParams, t: f64, f_value: Complex64) -> Complex64 {
    Complex64::from_polar(1.0, -p.omega_s() * t) * (1.0 - p.g() * p.g() * p.s_d() * f_value)
}

/// The `l = p` part of the double series, i.e. `f(t)` with `omega_s` dropped
/// from the bath phase:
/// `(lambda^D t^2 / n) sum_p (-i x)^p / (p! (nu + p)(p+1)(p+2))`.
///
/// The alternating sum cancels by a factor of about `e^x`, so it is
/// accumulated in double-double arithmetic; this keeps full `f64` accuracy up
/// to `x` of about 60.
pub fn restricted_series(p: &ModelParams, c: &CutoffParams, t: f64, tol: f64) -> Result<SeriesValue> {
    check_time(t, tol)?;
    let x = c.bandwidth(p) * t;
    let nu = p.nu();
    let prefactor = c.lambda().powi(p.dim() as i32) * t * t / p.power();

    let mut power = TwoFloat::from(1.0);
    let mut re = TwoFloat::from(0.0);
    let mut im = TwoFloat::from(0.0);
    let mut peak: f64 = 0.0;
    for order in 0..SERIES_TERM_CAP {
        let of = order as f64;
        if order > 0 {
            power = power * x / of;
        }
        // nu + p is formed in double-double; rounding it to f64 would leave a
        // per-term error that the cancellation amplifies.
        let term = dd_div(power, (TwoFloat::from(nu) + of) * ((of + 1.0) * (of + 2.0)));
        peak = peak.max(term.hi());
        // (-i)^p cycles through 1, -i, -1, i
        match order % 4 {
            0 => re += term,
            1 => im -= term,
            2 => re -= term,
            _ => im += term,
        }
        let magnitude = f64::from(re).hypot(f64::from(im));
        if of > x && term.hi() <= tol * magnitude {
            // Double-double rounding, about 2^-104 of the largest term.
            let rounding = peak * DD_EPSILON * of;
            if rounding > tol * magnitude {
                return Err(Error::Overflow {
                    what: "restricted cutoff series",
                    peak,
                    limit: tol * magnitude / (DD_EPSILON * of),
                });
            }
            return Ok(SeriesValue {
                value: Complex64::new(f64::from(re), f64::from(im)) * prefactor,
                terms_used: order + 1,
                trunc_bound: prefactor * term.hi() * x / (of + 1.0),
            });
        }
    }
    Err(Error::NonConvergence {
        what: "restricted cutoff series",
        terms: SERIES_TERM_CAP,
    })
}

/// Closed-form short-time limit `e^(-i omega_s t)(1 - g^2 s_d lambda^D t^2 / (2D))`.
pub fn cutoff_quadratic_limit(p: &ModelParams, c: &CutoffParams, t: f64) -> Complex64 {
    let d = p.dim() as f64;
    let f = c.lambda().powi(p.dim() as i32) * t * t / (2.0 * d);
    assemble(p, t, Complex64::new(f, 0.0))
}

/// Exact split of [`restricted_series`] into the cutoff-free fractional law,
/// its leading cutoff correction and two remainders.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CutoffDecomposition {
    /// `-i^(-nu) Gamma(nu - 1) omega_0^-nu t^(2-nu) / (n(2-nu))`, the `lambda -> infinity` value.
    pub fractional_leading: Complex64,
    /// `+i x^(nu-1) omega_0^-nu t^(2-nu) / (n(1-nu))`.
    pub cutoff_correction: Complex64,
    /// Non-oscillating `O(x^(nu-2))` part.
    pub smooth_remainder: Complex64,
    /// `e^(-ix) O(x^(nu-3))` part, from the incomplete gamma function.
    pub oscillatory_remainder: Complex64,
    pub smooth_remainder_bound: f64,
    /// Magnitude of the first term of the asymptotic expansion left in the
    /// oscillatory remainder.
    pub oscillatory_remainder_bound: f64,
    pub ratio: f64,
    /// Set when `ratio < 10`, where the labels stop reflecting magnitudes.
    pub regime_warning: bool,
}

impl CutoffDecomposition {
    pub fn sum(&self) -> Complex64 {
        self.fractional_leading
            + self.cutoff_correction
            + self.smooth_remainder
            + self.oscillatory_remainder
    }
}

pub fn cutoff_decomposition(
    p: &ModelParams,
    c: &CutoffParams,
    t: f64,
    tol: f64,
) -> Result<CutoffDecomposition> {
    check_time(t, tol)?;
    if t == 0.0 {
        return Err(domain("t", t, "decomposition needs t > 0"));
    }
    let nu = p.nu();
    let n = p.power();
    let x = c.bandwidth(p) * t;
    let s = p.omega_0().powf(-nu) * t.powf(2.0 - nu);
    let rot = Complex64::from_polar(1.0, -nu * PI / 2.0);
    let gamma_nm1 = gamma_real(nu - 1.0)?;

    let fractional_leading = -rot * gamma_nm1 * s / (n * (2.0 - nu));
    let cutoff_correction = Complex64::i() * x.powf(nu - 1.0) * s / (n * (1.0 - nu));
    let smooth = -s * x.powf(nu - 2.0) / (n * (2.0 - nu));
    let upper = upper_incomplete_gamma(nu - 1.0, Complex64::new(0.0, x), tol)?;
    let oscillatory = s
        * (rot * upper.value + x.powf(nu - 2.0) * Complex64::from_polar(1.0, -x))
        / (n * (2.0 - nu));
    Ok(CutoffDecomposition {
        fractional_leading,
        cutoff_correction,
        smooth_remainder: Complex64::new(smooth, 0.0),
        oscillatory_remainder: oscillatory,
        smooth_remainder_bound: smooth.abs(),
        oscillatory_remainder_bound: s * x.powf(nu - 3.0) / n,
        ratio: x,
        regime_warning: x < FRACTIONAL_ABOVE,
    })
}

/// `lambda -> infinity` coefficient of `t^(2-nu)` in `g^2 s_d f`, built from
/// `Gamma(nu - 1)`. Equals the short-time coefficient of the cutoff-free model.
pub fn fractional_limit_coefficient(p: &ModelParams) -> Complex64 {
    let nu = p.nu();
    let g = gamma_real(nu - 1.0).expect("nu - 1 lies in (-1, 0)");
    -Complex64::from_polar(1.0, -nu * PI / 2.0) * g * p.g() * p.g() * p.s_d() * p.omega_0().powf(-nu)
        / (p.power() * (2.0 - nu))
}
