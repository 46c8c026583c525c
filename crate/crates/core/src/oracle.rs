//! Brute-force references.
//!
//! * [`DiscreteBath`]: the bath truncated at `|k| <= lambda`, discretized on a
//!   radial grid and diagonalized exactly (the Hamiltonian is an arrowhead
//!   matrix, so this costs `O(n^2)`).
//! * [`volterra_evolution`]: the closed integral equation for the amplitude,
//!   `c(t) = 1 - int_0^t [i omega_s + Q(t - s)] c(s) ds`, where `Q` is the
//!   running integral of the memory kernel `k(tau) = g^2 int d^Dk e^(-i omega_k tau)`.

use std::f64::consts::PI;
use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;
use num_complex::Complex64;
use serde::Serialize;

use crate::arrowhead::Arrowhead;
use crate::error::{domain, Error, Result};
use crate::model::{CutoffParams, ModelParams};
use crate::shorttime::{check_times, SurvivalCurve};
use crate::specfun::gamma_real;

pub const DEFAULT_MAX_MODES: usize = 20_000;

/// Volterra runs are rejected when `dt` times the fastest kernel rate exceeds this.
pub const MAX_STEP_PRODUCT: f64 = 0.1;

/// Radial grid `k_j = j lambda / (n - 1)` with weights
/// `w_j = s_d int k^(D-1) phi_j(k) dk`, where `phi_j` are the piecewise-linear
/// hat functions of the grid.
///
/// For `D = 1` these are the trapezoid weights; for any `D` they sum exactly to
/// the volume `s_d lambda^D / D` of the ball.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BathGrid {
    lambda: f64,
    dim: u32,
    k_points: Vec<f64>,
    weights: Vec<f64>,
}

impl BathGrid {
    pub fn uniform(dim: u32, lambda: f64, n_modes: usize) -> Result<Self> {
        if dim == 0 {
            return Err(domain("dim", 0.0, "must be a positive integer"));
        }
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(domain("lambda", lambda, "must be finite and positive"));
        }
        if n_modes < 2 {
            return Err(domain("n_modes", n_modes as f64, "need at least two modes"));
        }
        let dk = lambda / (n_modes - 1) as f64;
        let k_points: Vec<f64> = (0..n_modes).map(|j| j as f64 * dk).collect();
        // k^(D-1) times a linear function has degree D; this rule is exact for it.
        let rule = GaussLegendre::new(NonZeroUsize::new(dim as usize / 2 + 1).expect("nonzero"));
        let s_d = crate::model::sphere_area(dim);
        let power = |k: f64| k.powi(dim as i32 - 1);
        let mut weights = vec![0.0; n_modes];
        for cell in 0..n_modes - 1 {
            let (a, b) = (k_points[cell], k_points[cell + 1]);
            weights[cell] += s_d * rule.integrate(a, b, |k| power(k) * (b - k) / dk);
            weights[cell + 1] += s_d * rule.integrate(a, b, |k| power(k) * (k - a) / dk);
        }
        Ok(Self {
            lambda,
            dim,
            k_points,
            weights,
        })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }
    pub fn dim(&self) -> u32 {
        self.dim
    }
    pub fn n_modes(&self) -> usize {
        self.k_points.len()
    }
    pub fn k_points(&self) -> &[f64] {
        &self.k_points
    }
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// Eigendecomposition of the single-excitation Hamiltonian of a discretized bath.
#[derive(Debug, Clone)]
pub struct DiscreteBath {
    eig: Arrowhead,
}

impl DiscreteBath {
    pub fn new(p: &ModelParams, grid: &BathGrid) -> Result<Self> {
        Self::with_max_modes(p, grid, DEFAULT_MAX_MODES)
    }

    /// Diagonalizes the real symmetric arrowhead matrix with diagonal
    /// `(omega_s, omega_0 k_j^n)` and couplings `g sqrt(w_j)`.
    pub fn with_max_modes(p: &ModelParams, grid: &BathGrid, max_modes: usize) -> Result<Self> {
        let n = grid.n_modes();
        if n > max_modes {
            return Err(Error::Dimension {
                requested: n,
                max: max_modes,
            });
        }
        if grid.dim() != p.dim() {
            return Err(domain("dim", grid.dim() as f64, "grid dimension differs from the model"));
        }
        let energies: Vec<f64> = grid
            .k_points()
            .iter()
            .map(|&k| p.omega_0() * k.powf(p.power()))
            .collect();
        let couplings: Vec<f64> = grid.weights().iter().map(|&w| p.g() * w.sqrt()).collect();
        Ok(Self {
            eig: Arrowhead::new(p.omega_s(), &energies, &couplings),
        })
    }

    /// Emitter amplitude `<S| e^(-iHt) |S>`; exactly 1 at `t = 0`.
    pub fn amplitude(&self, t: f64) -> Complex64 {
        if t == 0.0 {
            return Complex64::new(1.0, 0.0);
        }
        self.eig.amplitude(t)
    }

    /// Full state `e^(-iHt)|S>`, emitter first, then the modes in grid order.
    pub fn state(&self, t: f64) -> Vec<Complex64> {
        self.eig.state(t)
    }

    /// `|1 - <psi(t)|psi(t)>|`, which measures rounding only.
    pub fn norm_defect(&self, t: f64) -> f64 {
        let total: f64 = self.state(t).iter().map(|c| c.norm_sqr()).sum();
        (total - 1.0).abs()
    }

    /// Samples the amplitude; error bounds are the norm defects.
    pub fn evolve(&self, times: &[f64]) -> Result<SurvivalCurve> {
        check_times(times)?;
        let amps = times.iter().map(|&t| self.amplitude(t)).collect();
        let errs = times.iter().map(|&t| self.norm_defect(t)).collect();
        SurvivalCurve::new("oracle_grid", times.to_vec(), amps, errs)
    }
}

pub fn discretized_evolution(p: &ModelParams, grid: &BathGrid, times: &[f64]) -> Result<SurvivalCurve> {
    DiscreteBath::new(p, grid)?.evolve(times)
}

/// `E_m(z) = sum_q z^q / (m + q + 1)!`, so that
/// `int_0^tau (tau - s)^m / m! e^(-i a s) ds = tau^(m+1) E_m(-i a tau)`.
fn e_m(m: usize, z: Complex64) -> Complex64 {
    if z.norm() < 2.0 {
        let mut fact = (1..=m + 1).map(|j| j as f64).product::<f64>();
        let mut power = Complex64::new(1.0, 0.0);
        let mut sum = power / fact;
        for q in 1..40 {
            power *= z;
            fact *= (m + q + 1) as f64;
            sum += power / fact;
        }
        sum
    } else {
        let mut taylor = Complex64::new(0.0, 0.0);
        let mut term = Complex64::new(1.0, 0.0);
        for j in 0..=m {
            if j > 0 {
                term *= z / j as f64;
            }
            taylor += term;
        }
        (z.exp() - taylor) / z.powu(m as u32 + 1)
    }
}

/// Moments `Q_m(tau) = int_0^tau (tau - s)^m / m! k(s) ds` for m = 1, 2.
enum Kernel {
    /// `k(s) = amp s^-nu`.
    Continuum { amp: Complex64, nu: f64 },
    /// `k(s) = g^2 s_d int_0^lambda kappa^(D-1) e^(-i omega_0 kappa^n s) d kappa`,
    /// with the `kappa` integral on fixed Gauss-Legendre nodes.
    Cutoff {
        coupling: f64,
        nodes: Vec<(f64, f64)>,
    },
}

impl Kernel {
    fn moment(&self, m: usize, tau: f64) -> Complex64 {
        if tau == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        match self {
            Kernel::Continuum { amp, nu } => {
                let mf = m as f64;
                let g = gamma_real(1.0 - nu).unwrap() / gamma_real(mf + 2.0 - nu).unwrap();
                amp * tau.powf(mf + 1.0 - nu) * g
            }
            Kernel::Cutoff { coupling, nodes } => {
                let s: Complex64 = nodes
                    .iter()
                    .map(|&(measure, freq)| measure * e_m(m, Complex64::new(0.0, -freq * tau)))
                    .sum();
                coupling * tau.powi(m as i32 + 1) * s
            }
        }
    }
}

fn cutoff_nodes(p: &ModelParams, c: &CutoffParams, t_max: f64) -> Vec<(f64, f64)> {
    const ORDER: usize = 24;
    let phase = c.bandwidth(p) * t_max;
    let panels = 4 + (phase / 3.0).ceil() as usize;
    let rule = GaussLegendre::new(NonZeroUsize::new(ORDER).unwrap());
    let width = c.lambda() / panels as f64;
    let mut out = Vec::with_capacity(panels * ORDER);
    for k in 0..panels {
        let a = k as f64 * width;
        for &(x, w) in rule.as_node_weight_pairs() {
            let kappa = a + 0.5 * width * (x + 1.0);
            let measure = 0.5 * width * w * kappa.powi(p.dim() as i32 - 1);
            out.push((measure, p.omega_0() * kappa.powf(p.power())));
        }
    }
    out
}

/// Solution of the Volterra equation on a uniform grid, before resampling.
#[derive(Debug, Clone)]
struct VolterraGrid {
    step: f64,
    values: Vec<Complex64>,
}

fn solve_volterra(p: &ModelParams, kernel: &Kernel, steps: usize, step: f64) -> VolterraGrid {
    let w = p.omega_s();
    let i = Complex64::i();
    // F1(tau) = int_0^tau L and F2(tau) = int_0^tau (tau - s) L(s) ds with
    // L = i omega_s + Q_0.
    let f1 = |tau: f64| i * w * tau + kernel.moment(1, tau);
    let f2: Vec<Complex64> = (0..=steps + 1)
        .map(|j| {
            let tau = j as f64 * step;
            i * w * tau * tau / 2.0 + kernel.moment(2, tau)
        })
        .collect();
    // Product trapezoid weights: integrating L exactly against the hat basis.
    let mut weights = vec![Complex64::new(0.0, 0.0); steps + 1];
    weights[0] = f2[1] / step;
    for m in 1..=steps {
        weights[m] = (f2[m + 1] - 2.0 * f2[m] + f2[m - 1]) / step;
    }
    let mut y = vec![Complex64::new(1.0, 0.0); steps + 1];
    let diag = 1.0 + weights[0];
    for n in 1..=steps {
        let tn = n as f64 * step;
        let end = f1(tn) - (f2[n] - f2[n - 1]) / step;
        let mut acc = Complex64::new(1.0, 0.0) - end * y[0];
        for j in 1..n {
            acc -= weights[n - j] * y[j];
        }
        y[n] = acc / diag;
    }
    VolterraGrid { step, values: y }
}

/// Fastest rate in the kernel and the free evolution.
fn kernel_scale(p: &ModelParams, amp: Complex64, cutoff: Option<&CutoffParams>) -> f64 {
    let mut scale = p.omega_s().max(amp.norm().powf(1.0 / (2.0 - p.nu())));
    if let Some(c) = cutoff {
        scale = scale.max(c.bandwidth(p));
    }
    scale
}

/// Solves the memory-kernel equation on `[0, t_max]` with step at most `dt`
/// (the step is shrunk so an even number of steps fits exactly).
///
/// Without a cutoff the kernel is the continuum power law; with one it is the
/// truncated `k` integral. Error bounds come from a second solve at twice the
/// step, `|c_h - c_2h| / 3`.
pub fn volterra_evolution(
    p: &ModelParams,
    t_max: f64,
    dt: f64,
    lambda: Option<CutoffParams>,
) -> Result<SurvivalCurve> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(domain("dt", dt, "step must be finite and positive"));
    }
    if !(t_max > 0.0 && t_max.is_finite()) {
        return Err(domain("t_max", t_max, "must be finite and positive"));
    }
    let nu = p.nu();
    let amp = Complex64::from_polar(p.spectral_weight() * p.gamma_nu(), -nu * PI / 2.0);
    let scale = kernel_scale(p, amp, lambda.as_ref());
    if dt * scale > MAX_STEP_PRODUCT {
        return Err(Error::StepSize {
            dt,
            product: dt * scale,
        });
    }
    let half_steps = (t_max / (2.0 * dt)).ceil().max(1.0) as usize;
    let steps = 2 * half_steps;
    let step = t_max / steps as f64;
    let kernel = match lambda {
        None => Kernel::Continuum { amp, nu },
        Some(c) => Kernel::Cutoff {
            coupling: p.g() * p.g() * p.s_d(),
            nodes: cutoff_nodes(p, &c, t_max),
        },
    };
    let fine = solve_volterra(p, &kernel, steps, step);
    let coarse = solve_volterra(p, &kernel, half_steps, 2.0 * step);
    let mut errs = vec![0.0; steps + 1];
    for j in 0..=half_steps {
        errs[2 * j] = (fine.values[2 * j] - coarse.values[j]).norm() / 3.0;
    }
    for j in (1..steps).step_by(2) {
        errs[j] = errs[j - 1].max(errs[j + 1]);
    }
    let times = (0..=steps).map(|j| j as f64 * fine.step).collect();
    let tag = if lambda.is_some() {
        "oracle_volterra_cutoff"
    } else {
        "oracle_volterra"
    };
    SurvivalCurve::new(tag, times, fine.values, errs)
}
