//! Special functions: real gamma, the two-sheet complex power, Kummer's
//! confluent hypergeometric function and the upper incomplete gamma function
//! of complex argument.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use twofloat::TwoFloat;

use crate::error::{domain, Error, Result};

/// Hard cap on the number of terms any series in this module may sum.
pub const SERIES_TERM_CAP: usize = 10_000;

/// A truncated series together with its bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesValue {
    pub value: Complex64,
    pub terms_used: usize,
    /// Magnitude of the first term that was not summed.
    pub trunc_bound: f64,
}

/// A point of the two-sheet plane used by the resolvent, stored in polar form
/// with `-pi/2 <= theta < 3pi/2`.
///
/// The range covers the physical sheet (`-pi/2 <= theta < pi/2` in the notation
/// of the frequency axis) and its analytic continuation through the cut on the
/// negative imaginary axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SheetPoint {
    r: f64,
    theta: f64,
}

impl SheetPoint {
    pub const THETA_MIN: f64 = -PI / 2.0;
    pub const THETA_MAX: f64 = 3.0 * PI / 2.0;

    pub fn new(r: f64, theta: f64) -> Result<Self> {
        if !(r >= 0.0 && r.is_finite()) {
            return Err(domain("r", r, "modulus must be finite and non-negative"));
        }
        if !(Self::THETA_MIN..Self::THETA_MAX).contains(&theta) {
            return Err(domain("theta", theta, "angle must lie in [-pi/2, 3pi/2)"));
        }
        Ok(Self { r, theta })
    }

    /// Places a Cartesian point on the sheet. Points in the third quadrant get
    /// angles in `(pi, 3pi/2)` rather than `(-pi, -pi/2)`.
    pub fn from_complex(z: Complex64) -> Self {
        let r = z.norm();
        let mut theta = z.im.atan2(z.re);
        if theta < Self::THETA_MIN {
            theta += 2.0 * PI;
        }
        // atan2(-0.0, x < 0) gives -pi, which is moved to pi above; guard the
        // upper end against rounding.
        if theta >= Self::THETA_MAX {
            theta -= 2.0 * PI;
        }
        Self { r, theta }
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn to_complex(&self) -> Complex64 {
        Complex64::from_polar(self.r, self.theta)
    }
}

/// `Gamma(x)` for real `x`, with an error at the poles `0, -1, -2, ...`.
pub fn gamma_real(x: f64) -> Result<f64> {
    if x <= 0.0 && x == x.floor() {
        return Err(Error::GammaPole(x));
    }
    Ok(libm::tgamma(x))
}

/// `ln Gamma(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if x <= 0.0 || x.is_nan() {
        return Err(domain("x", x, "ln_gamma needs a positive argument"));
    }
    Ok(libm::lgamma_r(x).0)
}

/// `z^alpha` with the angle of `z` taken on the sheet, so that
/// `z^alpha = r^alpha e^(i alpha theta)`.
pub fn cpow_sheet(z: SheetPoint, alpha: f64) -> Result<Complex64> {
    if z.r == 0.0 {
        if alpha > 0.0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        return Err(Error::ZeroToNonPositivePower(alpha));
    }
    Ok(Complex64::from_polar(z.r.powf(alpha), alpha * z.theta))
}

fn check_tol(tol: f64) -> Result<()> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(domain("tol", tol, "tolerance must be positive"))
    }
}

fn is_nonpositive_integer(x: f64) -> bool {
    x <= 0.0 && x == x.floor()
}

/// Kummer's function `1F1(a; b; z)` from its power series.
///
/// Summation stops after three consecutive terms fall below `tol` relative to
/// the partial sum, provided the terms are already shrinking geometrically.
/// Terms and sum are carried in double-double, since for `Re z < 0` the terms
/// grow to about `e^|z|` times the result before cancelling.
pub fn hyp1f1(a: f64, b: f64, z: Complex64, tol: f64) -> Result<SeriesValue> {
    check_tol(tol)?;
    if is_nonpositive_integer(b) {
        return Err(domain("b", b, "1F1 is undefined for b = 0, -1, -2, ..."));
    }
    let mut term = DoubleComplex::one();
    let mut sum = DoubleComplex::one();
    let mut small_run = 0;
    for m in 0..SERIES_TERM_CAP {
        let mf = m as f64;
        let num = TwoFloat::from(a) + mf;
        let den = (TwoFloat::from(b) + mf) * (mf + 1.0);
        term = term.mul(z).scale(dd_div(num, den));
        if term.to_f64() == Complex64::new(0.0, 0.0) {
            // a is a non-positive integer and the series has terminated.
            return Ok(SeriesValue {
                value: sum.to_f64(),
                terms_used: m + 1,
                trunc_bound: 0.0,
            });
        }
        sum = sum.add(term);
        let value = sum.to_f64();
        if !value.is_finite() {
            return Err(Error::Overflow {
                what: "1F1 series",
                peak: f64::INFINITY,
                limit: f64::MAX,
            });
        }
        let next_ratio = z.norm() * ((a + mf + 1.0) / ((b + mf + 1.0) * (mf + 2.0))).abs();
        let size = term.to_f64().norm();
        if size <= tol * value.norm() && next_ratio < 1.0 {
            small_run += 1;
            if small_run == 3 {
                return Ok(SeriesValue {
                    value,
                    terms_used: m + 2,
                    trunc_bound: size * next_ratio,
                });
            }
        } else {
            small_run = 0;
        }
    }
    Err(Error::NonConvergence {
        what: "1F1 series",
        terms: SERIES_TERM_CAP,
    })
}

/// Radius below which [`upper_incomplete_gamma`] uses the power series.
pub fn incomplete_gamma_crossover(a: f64) -> f64 {
    f64::max(10.0, a.abs() + 5.0)
}

/// Upper incomplete gamma `Gamma(a, x)` for real `a` and complex `x` on the
/// principal branch `-pi < arg x <= pi`.
///
/// Uses the power series below [`incomplete_gamma_crossover`] and the Legendre
/// continued fraction above it. The continued fraction is also used inside the
/// crossover radius when `Re x > max(a + 1, 1)`: there `Gamma(a, x)` is
/// exponentially small and `Gamma(a) - gamma(a, x)` cancels badly.
pub fn upper_incomplete_gamma(a: f64, x: Complex64, tol: f64) -> Result<SeriesValue> {
    check_tol(tol)?;
    if is_nonpositive_integer(a) {
        return Err(domain(
            "a",
            a,
            "Gamma(a, x) series is singular for a = 0, -1, -2, ...",
        ));
    }
    if x.norm() == 0.0 {
        return if a > 0.0 {
            Ok(SeriesValue {
                value: Complex64::new(gamma_real(a)?, 0.0),
                terms_used: 0,
                trunc_bound: 0.0,
            })
        } else {
            Err(domain("x", 0.0, "Gamma(a, 0) diverges for a <= 0"))
        };
    }
    if x.norm() < incomplete_gamma_crossover(a) && x.re <= f64::max(a + 1.0, 1.0) {
        upper_gamma_series(a, x, tol)
    } else {
        upper_gamma_continued_fraction(a, x, tol)
    }
}

fn upper_gamma_series(a: f64, x: Complex64, tol: f64) -> Result<SeriesValue> {
    let gamma_a = gamma_real(a)?;
    let xa = x.powf(a);
    // x^a sum_q (-x)^q / (q! (q + a)). The terms grow to about e^|x| before
    // the sum settles near Gamma(a) / x^a, so both the running power and the
    // sum are carried in double-double.
    let mut power = DoubleComplex::one();
    let mut sum = DoubleComplex::one().scale(dd_div(TwoFloat::from(1.0), TwoFloat::from(a)));
    let mut small_run = 0;
    for q in 1..SERIES_TERM_CAP {
        let qf = q as f64;
        power = power.mul(-x).div(qf);
        let term = power.scale(dd_div(TwoFloat::from(1.0), TwoFloat::from(a) + qf));
        sum = sum.add(term);
        let decaying = x.norm() < qf + 1.0;
        // Judge smallness against the final value, which can be far smaller
        // than the partial sum once Gamma(a) is subtracted.
        let value = Complex64::new(gamma_a, 0.0) - xa * sum.to_f64();
        let scale = value.norm().max(f64::MIN_POSITIVE);
        if (term.to_f64() * xa).norm() <= tol * scale && decaying {
            small_run += 1;
            if small_run == 3 {
                let next = power.to_f64().norm() * x.norm() / (qf + 1.0) / (qf + 1.0 + a).abs();
                return Ok(SeriesValue {
                    value,
                    terms_used: q + 1,
                    trunc_bound: next * xa.norm(),
                });
            }
        } else {
            small_run = 0;
        }
    }
    Err(Error::NonConvergence {
        what: "incomplete gamma series",
        terms: SERIES_TERM_CAP,
    })
}

/// Double-double quotient. `TwoFloat / TwoFloat` in twofloat 0.8 is only
/// accurate to `f64` precision, so the quotient is refined by one correction step.
pub(crate) fn dd_div(n: TwoFloat, d: TwoFloat) -> TwoFloat {
    let q1 = n.hi() / d.hi();
    let r = n - d * q1;
    let q2 = r.hi() / d.hi();
    let r2 = r - d * q2;
    TwoFloat::from(q1) + q2 + r2.hi() / d.hi()
}

/// Complex number with double-double parts.
#[derive(Clone, Copy)]
struct DoubleComplex {
    re: TwoFloat,
    im: TwoFloat,
}

impl DoubleComplex {
    fn one() -> Self {
        Self {
            re: TwoFloat::from(1.0),
            im: TwoFloat::from(0.0),
        }
    }

    fn mul(self, z: Complex64) -> Self {
        Self {
            re: self.re * z.re - self.im * z.im,
            im: self.re * z.im + self.im * z.re,
        }
    }

    fn scale(self, s: TwoFloat) -> Self {
        Self {
            re: self.re * s,
            im: self.im * s,
        }
    }

    fn div(self, s: f64) -> Self {
        Self {
            re: self.re / s,
            im: self.im / s,
        }
    }

    fn add(self, o: Self) -> Self {
        Self {
            re: self.re + o.re,
            im: self.im + o.im,
        }
    }

    fn to_f64(self) -> Complex64 {
        Complex64::new(f64::from(self.re), f64::from(self.im))
    }
}

fn upper_gamma_continued_fraction(a: f64, x: Complex64, tol: f64) -> Result<SeriesValue> {
    const TINY: f64 = 1e-300;
    let eps = f64::max(tol, 4.0 * f64::EPSILON);
    let tiny = Complex64::new(TINY, 0.0);
    let mut b = x + 1.0 - a;
    let mut c = Complex64::new(1.0 / TINY, 0.0);
    let mut d = b.inv();
    let mut h = d;
    for k in 1..SERIES_TERM_CAP {
        let kf = k as f64;
        let an = -kf * (kf - a);
        b += 2.0;
        d = b + d * an;
        if d.norm() < TINY {
            d = tiny;
        }
        c = b + c.inv() * an;
        if c.norm() < TINY {
            c = tiny;
        }
        d = d.inv();
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).norm() < eps {
            let value = (-x).exp() * x.powf(a) * h;
            return Ok(SeriesValue {
                value,
                terms_used: k,
                trunc_bound: value.norm() * (delta - 1.0).norm(),
            });
        }
    }
    Err(Error::NonConvergence {
        what: "incomplete gamma continued fraction",
        terms: SERIES_TERM_CAP,
    })
}

/// Large-`|x|` asymptotic expansion of `Gamma(a, x)`,
/// `x^(a-1) e^(-x) sum_k (a-1)(a-2)...(a-k) / x^k`, truncated just before its
/// smallest term.
pub fn upper_incomplete_gamma_asymptotic(a: f64, x: Complex64) -> Result<SeriesValue> {
    if x.norm() == 0.0 {
        return Err(domain("x", 0.0, "asymptotic expansion needs x != 0"));
    }
    let prefactor = x.powf(a - 1.0) * (-x).exp();
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    for k in 1..SERIES_TERM_CAP {
        let next = term * (a - k as f64) / x;
        if next.norm() == 0.0 {
            return Ok(SeriesValue {
                value: prefactor * sum,
                terms_used: k,
                trunc_bound: 0.0,
            });
        }
        if next.norm() >= term.norm() {
            // `term` is the smallest; it has been summed, so report the next
            // one as omitted.
            return Ok(SeriesValue {
                value: prefactor * sum,
                terms_used: k,
                trunc_bound: (prefactor * next).norm(),
            });
        }
        sum += next;
        term = next;
    }
    Err(Error::NonConvergence {
        what: "incomplete gamma asymptotic expansion",
        terms: SERIES_TERM_CAP,
    })
}
