//! Exact amplitude from the resolvent.
//!
//! The amplitude is an inverse Laplace transform of `1/D(z)` with
//! `D(z) = z - omega_s + B e^(i(1-nu)pi) z^(nu-1)`. With the branch cut of
//! `z^(nu-1)` along the negative imaginary axis, the contour collapses onto
//! the residues of at most two simple poles (`z0` on the negative real axis and
//! possibly `z1` in the fourth quadrant) plus an integral along the cut. The cut
//! integral gives the `t^(nu-2)` tail; `z0` gives a non-decaying oscillation
//! about `|alpha0|^2`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::model::ModelParams;
use crate::quad;
use crate::specfun::{cpow_sheet, gamma_real, SheetPoint};

/// Upper end of the branch-cut integral in `u = |z| t`; `e^-40 < 5e-18`.
pub const CUT_U_MAX: f64 = 40.0;
/// Subdivision budget of the branch-cut quadrature.
pub const MAX_INTERVALS: usize = 2000;
/// `R(0^-)` is evaluated this far below the axis.
const THETA_TOP: f64 = -1e-9;

/// Existence of the fourth-quadrant pole.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PoleStatus {
    Exists,
    Absent,
    /// `omega_s` equals `R` at the end of the search window to within
    /// rounding; the pole sits on the cut and is left out.
    Boundary,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FourthQuadrantSearch {
    pub pole: Option<(SheetPoint, Complex64)>,
    pub status: PoleStatus,
    /// `(R(theta_min), R(0^-))`; the pole exists iff `omega_s` lies strictly between.
    pub bounds: (f64, f64),
    pub residual: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PoleReport {
    pub z0: SheetPoint,
    pub alpha0: Complex64,
    pub z1: Option<SheetPoint>,
    pub alpha1: Option<Complex64>,
    pub z1_exists: bool,
    pub z1_status: PoleStatus,
    pub existence_bounds: (f64, f64),
    pub residual0: f64,
    pub residual1: Option<f64>,
    pub dprime0: Complex64,
}

/// `D(z)` on the sheet.
pub fn denominator(p: &ModelParams, z: SheetPoint) -> Result<Complex64> {
    if z.r() == 0.0 {
        return Err(domain("r", 0.0, "D(z) is singular at the branch point z = 0"));
    }
    let nu = p.nu();
    let branch = Complex64::from_polar(p.b_const(), (1.0 - nu) * PI) * cpow_sheet(z, nu - 1.0)?;
    Ok(z.to_complex() - p.omega_s() + branch)
}

/// `D'(z) = 1 + (nu - 1) B e^(i(1-nu)pi) z^(nu-2)`.
pub fn denominator_derivative(p: &ModelParams, z: SheetPoint) -> Result<Complex64> {
    if z.r() == 0.0 {
        return Err(domain("r", 0.0, "D'(z) is singular at the branch point z = 0"));
    }
    let nu = p.nu();
    let branch = Complex64::from_polar(p.b_const(), (1.0 - nu) * PI) * cpow_sheet(z, nu - 2.0)?;
    Ok(1.0 + (nu - 1.0) * branch)
}

/// Real root `r0` of `h(r) = r + omega_s - B r^(nu-1)`; `z0 = -r0`.
///
/// `h` increases strictly from `-inf` to `+inf`, so a bracket always exists.
pub fn find_negative_axis_pole(p: &ModelParams, tol: f64) -> Result<(SheetPoint, Complex64)> {
    let b = p.b_const();
    if b <= 0.0 {
        return Err(Error::NoPole(b));
    }
    let nu = p.nu();
    let w = p.omega_s();
    let h = |r: f64| r + w - b * r.powf(nu - 1.0);
    let dh = |r: f64| 1.0 + (1.0 - nu) * b * r.powf(nu - 2.0);

    let start = f64::max(1.0, b);
    let (mut lo, mut hi) = (start, start);
    while h(lo) > 0.0 {
        lo *= 0.5;
    }
    while h(hi) < 0.0 {
        hi *= 2.0;
    }
    let rel = tol.clamp(f64::EPSILON, 1e-6);
    for _ in 0..400 {
        if hi / lo - 1.0 <= rel {
            break;
        }
        let mid = (lo * hi).sqrt();
        if h(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut r = (lo * hi).sqrt();
    for _ in 0..4 {
        let step = h(r) / dh(r);
        let next = r - step;
        if !(next > 0.0) {
            break;
        }
        r = next;
        if step.abs() <= 4.0 * f64::EPSILON * r {
            break;
        }
    }
    let z0 = SheetPoint::new(r, PI)?;
    let alpha = denominator_derivative(p, z0)?.inv();
    Ok((z0, alpha))
}

/// `r(theta)` from the imaginary part of `D = 0` and `R(theta)`, the value of
/// `omega_s` for which `D(r(theta) e^(i theta)) = 0`.
fn pole_curve(p: &ModelParams, theta: f64) -> (f64, f64) {
    let nu = p.nu();
    let phi = (1.0 - nu) * (PI - theta);
    let r = (-p.b_const() * phi.sin() / theta.sin()).powf(1.0 / (2.0 - nu));
    (r, r * (phi - theta).sin() / phi.sin())
}

/// Lower end of the angular window in which a fourth-quadrant zero can sit,
/// nudged inward where `R` diverges.
fn theta_window_start(nu: f64) -> f64 {
    let edge = f64::max(-PI / 2.0, -nu * PI / (1.0 - nu));
    let phi = (1.0 - nu) * (PI - edge);
    if edge > -PI / 2.0 || phi.sin() < 1e-12 {
        edge + 1e-9
    } else {
        edge
    }
}

/// Searches the fourth quadrant for the second pole by bisection on the
/// monotone `R(theta) = omega_s`.
pub fn find_fourth_quadrant_pole(p: &ModelParams, tol: f64) -> FourthQuadrantSearch {
    if p.b_const() <= 0.0 {
        return FourthQuadrantSearch {
            pole: None,
            status: PoleStatus::Absent,
            bounds: (f64::NAN, f64::NAN),
            residual: None,
        };
    }
    let w = p.omega_s();
    let mut lo = theta_window_start(p.nu());
    let mut hi = THETA_TOP;
    let r_lo = pole_curve(p, lo).1;
    let r_hi = pole_curve(p, hi).1;
    let bounds = (r_lo, r_hi);
    let slack = 1e-12 * w.max(1.0);
    let absent = |status| FourthQuadrantSearch {
        pole: None,
        status,
        bounds,
        residual: None,
    };
    if (r_lo - w).abs() <= slack || (r_hi - w).abs() <= slack {
        return absent(PoleStatus::Boundary);
    }
    if !(r_lo < w && w < r_hi) {
        return absent(PoleStatus::Absent);
    }
    let eps = tol.clamp(1e-16, 1e-6);
    for _ in 0..200 {
        if hi - lo <= eps * 1e-3 {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if pole_curve(p, mid).1 < w {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let theta = 0.5 * (lo + hi);
    let r = pole_curve(p, theta).0;
    let mut z = SheetPoint::new(r, theta).expect("theta lies in the fourth quadrant");
    // Newton polish in the plane; the root is simple and isolated.
    for _ in 0..6 {
        let (Ok(d), Ok(dd)) = (denominator(p, z), denominator_derivative(p, z)) else {
            break;
        };
        let next = SheetPoint::from_complex(z.to_complex() - d / dd);
        if !(next.theta() < 0.0 && next.theta() > -PI / 2.0) {
            break;
        }
        z = next;
    }
    let residual = denominator(p, z).map(|d| d.norm()).ok();
    let alpha = denominator_derivative(p, z).map(|d| d.inv()).ok();
    FourthQuadrantSearch {
        pole: alpha.map(|a| (z, a)),
        status: PoleStatus::Exists,
        bounds,
        residual,
    }
}

pub fn pole_report(p: &ModelParams, tol: f64) -> Result<PoleReport> {
    let (z0, alpha0) = find_negative_axis_pole(p, tol)?;
    let residual0 = denominator(p, z0)?.norm();
    let dprime0 = denominator_derivative(p, z0)?;
    let q = find_fourth_quadrant_pole(p, tol);
    Ok(PoleReport {
        z0,
        alpha0,
        z1: q.pole.map(|(z, _)| z),
        alpha1: q.pole.map(|(_, a)| a),
        z1_exists: q.pole.is_some(),
        z1_status: q.status,
        existence_bounds: q.bounds,
        residual0,
        residual1: q.residual,
        dprime0,
    })
}

/// Result of the numerical branch-cut integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BranchCutValue {
    pub value: Complex64,
    pub abs_err: f64,
    pub intervals: usize,
}

/// `(i/t) int_0^inf e^-u [1/D_a(u) - 1/D_b(u)] du`, where `D_a` and `D_b` are
/// `D` on the two edges of the cut at `z = -i u / t`.
///
/// Near `u = 0` the integrand vanishes like `u^(1-nu)`; the substitution
/// `u = w^(1/(1-nu))` makes it smooth there.
pub fn branch_cut_integral(p: &ModelParams, t: f64, tol: f64) -> Result<BranchCutValue> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(domain("t", t, "branch-cut integral needs t > 0"));
    }
    if !(tol > 0.0) {
        return Err(domain("tol", tol, "tolerance must be positive"));
    }
    let nu = p.nu();
    let w_s = p.omega_s();
    let b = p.b_const();
    let c_a = Complex64::from_polar(b, -(1.0 - nu) * PI / 2.0);
    let c_b = Complex64::from_polar(b, 1.5 * (1.0 - nu) * PI);
    let q = 1.0 / (1.0 - nu);
    let t_pow = t.powf(1.0 - nu);
    let integrand = |w: f64| {
        if w <= 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let u = w.powf(q);
        // (u/t)^(nu-1) = t^(1-nu) / w
        let s = t_pow / w;
        let base = Complex64::new(-w_s, -u / t);
        let d_a = base + c_a * s;
        let d_b = base + c_b * s;
        let jac = q * w.powf(q - 1.0);
        (c_b - c_a) * s / (d_a * d_b) * (-u).exp() * jac
    };
    let w_max = CUT_U_MAX.powf(1.0 - nu);
    // An absolute error of tol on the amplitude needs 2 pi t tol on the integral.
    let abs_tol = 2.0 * PI * t * tol * 0.1;
    let r = quad::integrate(integrand, 0.0, w_max, abs_tol, tol, MAX_INTERVALS)?;
    let scale = Complex64::new(0.0, 1.0 / t);
    Ok(BranchCutValue {
        value: scale * r.value,
        abs_err: r.abs_err / t,
        intervals: r.intervals,
    })
}

/// Leading large-`t` form of [`branch_cut_integral`],
/// `(i t^(nu-2) / B)[e^(i(1-nu)pi/2) - e^(-3i(1-nu)pi/2)] Gamma(2-nu)`.
pub fn asymptotic_branch_cut(p: &ModelParams, t: f64) -> Complex64 {
    let nu = p.nu();
    Complex64::i() * t.powf(nu - 2.0) / p.b_const() * cut_phase(nu) * gamma_2mnu(nu)
}

fn cut_phase(nu: f64) -> Complex64 {
    Complex64::from_polar(1.0, (1.0 - nu) * PI / 2.0)
        - Complex64::from_polar(1.0, -1.5 * (1.0 - nu) * PI)
}

fn gamma_2mnu(nu: f64) -> f64 {
    gamma_real(2.0 - nu).expect("2 - nu lies in (1, 2)")
}

/// Poles and residues, located once and reused for many times.
#[derive(Debug, Clone)]
pub struct Resolvent {
    params: ModelParams,
    tol: f64,
    report: PoleReport,
}

impl Resolvent {
    pub fn new(p: &ModelParams, tol: f64) -> Result<Self> {
        if !(tol > 0.0) {
            return Err(domain("tol", tol, "tolerance must be positive"));
        }
        Ok(Self {
            params: *p,
            tol,
            report: pole_report(p, tol)?,
        })
    }

    pub fn poles(&self) -> &PoleReport {
        &self.report
    }

    fn pole_terms(&self, t: f64) -> Complex64 {
        let r = &self.report;
        let mut sum = r.alpha0 * (-Complex64::i() * r.z0.to_complex() * t).exp();
        if let (Some(z1), Some(a1)) = (r.z1, r.alpha1) {
            sum += a1 * (-Complex64::i() * z1.to_complex() * t).exp();
        }
        sum
    }

    /// Amplitude and an error estimate from the cut quadrature. Exactly 1 at `t = 0`.
    pub fn amplitude(&self, t: f64) -> Result<(Complex64, f64)> {
        if t == 0.0 {
            return Ok((Complex64::new(1.0, 0.0), 0.0));
        }
        let cut = branch_cut_integral(&self.params, t, self.tol)?;
        let two_pi_i = Complex64::new(0.0, 2.0 * PI);
        Ok((
            self.pole_terms(t) - cut.value / two_pi_i,
            cut.abs_err / (2.0 * PI),
        ))
    }

    /// Pole `z0` plus the leading tail of the cut. Returns exactly 1 at `t = 0`,
    /// where the expansion itself diverges.
    pub fn long_time_amplitude(&self, t: f64) -> Complex64 {
        if t == 0.0 {
            return Complex64::new(1.0, 0.0);
        }
        let nu = self.params.nu();
        let r = &self.report;
        let tail = -gamma_2mnu(nu) / (2.0 * PI * self.params.b_const()) * cut_phase(nu) * t.powf(nu - 2.0);
        tail + r.alpha0 * (-Complex64::i() * r.z0.to_complex() * t).exp()
    }

    /// `|alpha0|^2` plus the cross term between the pole and the tail, to first
    /// order in `t^(nu-2)`. Exactly 1 at `t = 0`.
    pub fn long_time_probability(&self, t: f64) -> f64 {
        if t == 0.0 {
            return 1.0;
        }
        let nu = self.params.nu();
        let r = &self.report;
        let pole = r.alpha0 * (-Complex64::i() * r.z0.to_complex() * t).exp();
        let tail = -gamma_2mnu(nu) / (2.0 * PI * self.params.b_const()) * cut_phase(nu);
        r.alpha0.norm_sqr() + 2.0 * (pole.conj() * tail).re * t.powf(nu - 2.0)
    }
}

/// [`Resolvent::amplitude`] without the error estimate.
pub fn exact_amplitude(p: &ModelParams, t: f64, tol: f64) -> Result<Complex64> {
    Ok(Resolvent::new(p, tol)?.amplitude(t)?.0)
}

pub fn long_time_amplitude(p: &ModelParams, t: f64) -> Result<Complex64> {
    Ok(Resolvent::new(p, 1e-14)?.long_time_amplitude(t))
}

pub fn long_time_probability(p: &ModelParams, t: f64) -> Result<f64> {
    Ok(Resolvent::new(p, 1e-14)?.long_time_probability(t))
}

/// Minimum of `|D|` over polar grids in the two pole-free sectors
/// `0 <= theta < pi` and `pi < theta < 3pi/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SectorScan {
    pub min_abs_upper: f64,
    pub min_abs_lower: f64,
    /// `Im D > 0` at every upper-sector point and `< 0` at every lower-sector point.
    pub sign_definite: bool,
}

/// Scans `n_theta` angles per sector and `n_r` log-spaced radii spanning eight
/// decades around the natural scale `max(omega_s, B^(1/(2-nu)))`.
pub fn sector_scan(p: &ModelParams, n_theta: usize, n_r: usize) -> Result<SectorScan> {
    if n_theta == 0 || n_r < 2 {
        return Err(domain("n_theta", n_theta as f64, "grid too small"));
    }
    let scale = f64::max(p.omega_s(), p.b_const().powf(1.0 / (2.0 - p.nu())));
    let radii: Vec<f64> = (0..n_r)
        .map(|j| scale * 10f64.powf(-4.0 + 8.0 * j as f64 / (n_r - 1) as f64))
        .collect();
    let mut scan = SectorScan {
        min_abs_upper: f64::INFINITY,
        min_abs_lower: f64::INFINITY,
        sign_definite: true,
    };
    for i in 0..n_theta {
        let upper = PI * i as f64 / n_theta as f64;
        let lower = PI + 0.5 * PI * (i + 1) as f64 / (n_theta + 1) as f64;
        for &r in &radii {
            let du = denominator(p, SheetPoint::new(r, upper)?)?;
            let dl = denominator(p, SheetPoint::new(r, lower)?)?;
            scan.min_abs_upper = scan.min_abs_upper.min(du.norm());
            scan.min_abs_lower = scan.min_abs_lower.min(dl.norm());
            if !(du.im > 0.0 && dl.im < 0.0) {
                scan.sign_definite = false;
            }
        }
    }
    Ok(scan)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn fig3(nu: f64) -> ModelParams {
        ModelParams::from_decay_constants(1.0, 2.0, nu).unwrap()
    }

    #[test]
    fn denominator_examples() {
        let p = fig3(0.5);
        let d = denominator(&p, SheetPoint::new(1.0, PI).unwrap()).unwrap();
        assert!(d.norm() < 1e-15);
        let free = ModelParams::new(1.0, 1.0, 0.0, 1, 2.0).unwrap();
        let z = SheetPoint::new(2.0, 0.7).unwrap();
        assert!((denominator(&free, z).unwrap() - (z.to_complex() - 1.0)).norm() < 1e-15);
        let far = denominator(&p, SheetPoint::new(1e8, 0.0).unwrap()).unwrap();
        assert_relative_eq!(far.re, 1e8, max_relative = 1e-7);
        assert!(denominator(&p, SheetPoint::new(0.0, 0.0).unwrap()).is_err());
    }

    #[test]
    fn negative_axis_pole_closed_form() {
        for &nu in &[0.5, 2.0 / 3.0, 0.2, 0.9] {
            let p = fig3(nu);
            let (z0, alpha0) = find_negative_axis_pole(&p, 1e-14).unwrap();
            assert_eq!(z0.theta(), PI);
            assert!((z0.r() - 1.0).abs() < 1e-13, "nu={nu}: r={}", z0.r());
            assert!((alpha0 - 1.0 / (3.0 - 2.0 * nu)).norm() < 1e-13);
            assert!(denominator(&p, z0).unwrap().norm() < 1e-12);
        }
        assert!(matches!(
            find_negative_axis_pole(&ModelParams::new(1.0, 1.0, 0.0, 1, 2.0).unwrap(), 1e-12),
            Err(Error::NoPole(_))
        ));
    }

    #[test]
    fn negative_axis_pole_large_splitting() {
        let p = ModelParams::from_decay_constants(1e6, 2.0, 0.5).unwrap();
        let (z0, _) = find_negative_axis_pole(&p, 1e-14).unwrap();
        // B r^(nu-1) balances omega_s
        assert_relative_eq!(2.0 * z0.r().powf(-0.5), 1e6 + z0.r(), max_relative = 1e-12);
        assert!(z0.r() < 1e-11);
    }

    #[test]
    fn fourth_quadrant_pole_closed_form() {
        let p = fig3(0.5);
        let q = find_fourth_quadrant_pole(&p, 1e-14);
        assert_eq!(q.status, PoleStatus::Exists);
        let (z1, alpha1) = q.pole.unwrap();
        let expect = Complex64::new(1.5, -(7f64).sqrt() / 2.0);
        assert!((z1.to_complex() - expect).norm() < 1e-12);
        assert!(q.residual.unwrap() < 1e-12);
        let w = Complex64::new(7f64.sqrt() / 2.0, -0.5);
        let alpha = (1.0 - Complex64::i() / (w * w * w)).inv();
        assert!((alpha1 - alpha).norm() < 1e-12);
        assert!(q.bounds.0 < 1.0 && q.bounds.1 > 1.0);
    }

    #[test]
    fn fourth_quadrant_pole_absent_for_weak_coupling_and_large_splitting() {
        // Existence must follow the bracket test in every case.
        for &(w, b, nu) in &[(1.0, 2.0, 0.8), (5.0, 0.1, 0.5), (1.0, 0.28, 0.5), (1.0, 3.0, 0.25)] {
            let p = ModelParams::from_decay_constants(w, b, nu).unwrap();
            let q = find_fourth_quadrant_pole(&p, 1e-14);
            let between = q.bounds.0 < w && w < q.bounds.1;
            assert_eq!(q.pole.is_some(), between);
            if let Some((z, _)) = q.pole {
                assert!(z.to_complex().im < 0.0);
                assert!(q.residual.unwrap() < 1e-10);
            }
        }
    }

    #[test]
    fn asymptotic_cut_scaling() {
        let p = fig3(0.5);
        let a = asymptotic_branch_cut(&p, 3.0);
        let b = asymptotic_branch_cut(&p, 6.0);
        assert!((b / a - 2f64.powf(-1.5)).norm() < 1e-14);
        // e^(i pi/4) - e^(-3i pi/4) = 2 e^(i pi/4), so at t = 1 the value is
        // (i/2)(2 e^(i pi/4))(sqrt(pi)/2)
        let v = asymptotic_branch_cut(&p, 1.0);
        let expect = Complex64::i() / 2.0
            * Complex64::from_polar(2.0, PI / 4.0)
            * (PI.sqrt() / 2.0);
        assert!((v - expect).norm() < 1e-14);
    }

    #[test]
    fn branch_cut_approaches_asymptote() {
        let p = fig3(0.5);
        let num = branch_cut_integral(&p, 200.0, 1e-12).unwrap().value;
        let asym = asymptotic_branch_cut(&p, 200.0);
        let rel = (num / asym - 1.0).norm();
        assert!(rel < 10.0 / 200.0, "{rel}");
        let far = branch_cut_integral(&p, 500.0, 1e-12).unwrap().value;
        assert!((far / asymptotic_branch_cut(&p, 500.0) - 1.0).norm() < 0.02);
    }

    #[test]
    fn exact_amplitude_near_origin() {
        let p = fig3(0.5);
        let a = exact_amplitude(&p, 1e-3, 1e-12).unwrap();
        assert!((a - 1.0).norm() < 1e-3);
        assert_eq!(exact_amplitude(&p, 0.0, 1e-12).unwrap(), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn long_time_probability_is_first_order_modulus() {
        let s = Resolvent::new(&fig3(2.0 / 3.0), 1e-12).unwrap();
        for &t in &[30.0, 47.3, 100.0] {
            let a = s.long_time_amplitude(t).norm_sqr();
            let p = s.long_time_probability(t);
            let tail = gamma_2mnu(2.0 / 3.0) / (2.0 * PI * 2.0) * cut_phase(2.0 / 3.0).norm();
            assert!((a - p).abs() <= 1.0001 * tail * tail * t.powf(2.0 * (2.0 / 3.0 - 2.0)));
        }
    }

    #[test]
    fn sectors_are_pole_free() {
        let s = sector_scan(&fig3(0.5), 200, 100).unwrap();
        assert!(s.sign_definite);
        assert!(s.min_abs_upper > 1e-3 && s.min_abs_lower > 1e-3);
    }
}
