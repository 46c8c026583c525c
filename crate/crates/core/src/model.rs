//! Physical parameters of the emitter and its bath.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::specfun::gamma_real;

/// Validated model parameters together with the derived constants.
///
/// * `nu = dim / power`, always in `(0, 1)`;
/// * `s_d = 2 pi^(D/2) / Gamma(D/2)`, the area of the unit sphere in `D` dimensions;
/// * `b_const = g^2 (s_d omega_0^(-nu) / n) pi / sin((1 - nu) pi)`, the strength of the
///   non-analytic term of the self-energy.
///
/// Deserializing accepts either the five inputs alone or the full record; in the
/// latter case the derived fields must agree with the recomputed ones.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams")]
pub struct ModelParams {
    omega_s: f64,
    omega_0: f64,
    g: f64,
    dim: u32,
    power: f64,
    nu: f64,
    s_d: f64,
    b_const: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParams {
    omega_s: f64,
    omega_0: f64,
    g: f64,
    dim: u32,
    power: f64,
    nu: Option<f64>,
    s_d: Option<f64>,
    b_const: Option<f64>,
}

impl TryFrom<RawParams> for ModelParams {
    type Error = Error;

    fn try_from(raw: RawParams) -> Result<Self> {
        let p = ModelParams::new(raw.omega_s, raw.omega_0, raw.g, raw.dim, raw.power)?;
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * b.abs().max(1.0);
        for (name, given, derived) in [
            ("nu", raw.nu, p.nu),
            ("s_d", raw.s_d, p.s_d),
            ("b_const", raw.b_const, p.b_const),
        ] {
            if let Some(v) = given {
                if !close(v, derived) {
                    return Err(domain(name, v, "inconsistent with the other parameters"));
                }
            }
        }
        Ok(p)
    }
}

/// Area of the unit sphere in `dim` dimensions.
pub fn sphere_area(dim: u32) -> f64 {
    let half = dim as f64 / 2.0;
    2.0 * PI.powf(half) / libm::tgamma(half)
}

impl ModelParams {
    /// Validates the inputs and computes the derived constants.
    ///
    /// `omega_s = 0` is accepted; the splitting only needs to be non-negative.
    pub fn new(omega_s: f64, omega_0: f64, g: f64, dim: u32, power: f64) -> Result<Self> {
        if !(omega_s >= 0.0 && omega_s.is_finite()) {
            return Err(domain("omega_s", omega_s, "must be finite and non-negative"));
        }
        if !(omega_0 > 0.0 && omega_0.is_finite()) {
            return Err(domain("omega_0", omega_0, "must be finite and positive"));
        }
        if !(g >= 0.0 && g.is_finite()) {
            return Err(domain("g", g, "must be finite and non-negative"));
        }
        if dim == 0 {
            return Err(domain("dim", 0.0, "must be a positive integer"));
        }
        if !(power > 0.0 && power.is_finite()) {
            return Err(domain("power", power, "must be finite and positive"));
        }
        let nu = dim as f64 / power;
        if !(nu > 0.0 && nu < 1.0) {
            return Err(Error::Regime { nu });
        }
        let s_d = sphere_area(dim);
        let b_const = g * g * (s_d * omega_0.powf(-nu) / power) * PI / ((1.0 - nu) * PI).sin();
        Ok(Self {
            omega_s,
            omega_0,
            g,
            dim,
            power,
            nu,
            s_d,
            b_const,
        })
    }

    /// Builds the one-dimensional model (`omega_0 = 1`, `n = 1/nu`) whose
    /// self-energy has strength `b_const`.
    pub fn from_decay_constants(omega_s: f64, b_const: f64, nu: f64) -> Result<Self> {
        if !(nu > 0.0 && nu < 1.0) {
            return Err(Error::Regime { nu });
        }
        if !(b_const >= 0.0 && b_const.is_finite()) {
            return Err(domain("b_const", b_const, "must be finite and non-negative"));
        }
        let power = 1.0 / nu;
        let s_d = sphere_area(1);
        let g = (b_const * power * ((1.0 - nu) * PI).sin() / (s_d * PI)).sqrt();
        let mut p = Self::new(omega_s, 1.0, g, 1, power)?;
        // Keep the requested constant exactly rather than its round trip via g.
        p.b_const = b_const;
        Ok(p)
    }

    pub fn omega_s(&self) -> f64 {
        self.omega_s
    }
    pub fn omega_0(&self) -> f64 {
        self.omega_0
    }
    pub fn g(&self) -> f64 {
        self.g
    }
    pub fn dim(&self) -> u32 {
        self.dim
    }
    pub fn power(&self) -> f64 {
        self.power
    }
    pub fn nu(&self) -> f64 {
        self.nu
    }
    pub fn s_d(&self) -> f64 {
        self.s_d
    }
    pub fn b_const(&self) -> f64 {
        self.b_const
    }

    /// Coupling weight of the continuum, `g^2 s_d omega_0^(-nu) / n`.
    pub fn spectral_weight(&self) -> f64 {
        self.g * self.g * self.s_d * self.omega_0.powf(-self.nu) / self.power
    }

    /// `Gamma(nu)`; finite because `0 < nu < 1`.
    pub(crate) fn gamma_nu(&self) -> f64 {
        gamma_real(self.nu).expect("nu lies in (0, 1)")
    }
}

/// Hard momentum cutoff `|k| <= lambda`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawCutoff")]
pub struct CutoffParams {
    lambda: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCutoff {
    lambda: f64,
}

impl TryFrom<RawCutoff> for CutoffParams {
    type Error = Error;
    fn try_from(raw: RawCutoff) -> Result<Self> {
        CutoffParams::new(raw.lambda)
    }
}

impl CutoffParams {
    pub fn new(lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(domain("lambda", lambda, "must be finite and positive"));
        }
        Ok(Self { lambda })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Bath bandwidth at the cutoff, `omega_0 lambda^n`.
    pub fn bandwidth(&self, p: &ModelParams) -> f64 {
        p.omega_0() * self.lambda.powf(p.power())
    }

    /// `omega_0 lambda^n / omega_s`. Large values put the dynamics in the fractional
    /// regime, small values in the quadratic one.
    pub fn ratio(&self, p: &ModelParams) -> f64 {
        self.bandwidth(p) / p.omega_s()
    }
}
