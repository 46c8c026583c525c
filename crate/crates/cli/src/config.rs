use std::fmt;
use std::str::FromStr;

use fracdecay::{CutoffParams, ModelParams};
use serde::{Deserialize, Deserializer, Serialize};

/// Default number of bath modes for the discretized oracle.
pub const DEFAULT_MODES: usize = 1000;
/// Default Volterra step.
pub const DEFAULT_DT: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    Series,
    Resolvent,
    Asymptotic,
    Cutoff2,
    OracleGrid,
    OracleVolterra,
}

impl Route {
    pub const ALL: [Route; 6] = [
        Route::Series,
        Route::Resolvent,
        Route::Asymptotic,
        Route::Cutoff2,
        Route::OracleGrid,
        Route::OracleVolterra,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Route::Series => "series",
            Route::Resolvent => "resolvent",
            Route::Asymptotic => "asymptotic",
            Route::Cutoff2 => "cutoff2",
            Route::OracleGrid => "oracle_grid",
            Route::OracleVolterra => "oracle_volterra",
        }
    }
}

impl fmt::Display for Route {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Route {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Route::ALL
            .into_iter()
            .find(|r| r.name() == s.trim())
            .ok_or_else(|| {
                let names: Vec<_> = Route::ALL.iter().map(|r| r.name()).collect();
                format!("unknown route `{s}` (expected one of {})", names.join(", "))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGrid {
    pub t_min: f64,
    pub t_max: f64,
    pub n_points: usize,
    #[serde(default = "linear")]
    pub spacing: Spacing,
}

fn linear() -> Spacing {
    Spacing::Linear
}

impl TimeGrid {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.t_min >= 0.0 && self.t_min.is_finite()) {
            return Err(format!("time_grid.t_min = {} must be finite and >= 0", self.t_min));
        }
        if !(self.t_max > self.t_min && self.t_max.is_finite()) {
            return Err(format!("time_grid.t_max = {} must exceed t_min", self.t_max));
        }
        if self.n_points < 2 {
            return Err("time_grid.n_points must be at least 2".into());
        }
        if self.spacing == Spacing::Log && self.t_min <= 0.0 {
            return Err("log spacing needs time_grid.t_min > 0".into());
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<f64> {
        let n = self.n_points;
        let mut out: Vec<f64> = match self.spacing {
            Spacing::Linear => (0..n)
                .map(|i| self.t_min + (self.t_max - self.t_min) * i as f64 / (n - 1) as f64)
                .collect(),
            Spacing::Log => fracdecay::fit::log_grid(self.t_min, self.t_max, n),
        };
        // Pin the ends so rounding never pushes a sample outside the range.
        out[0] = self.t_min;
        out[n - 1] = self.t_max;
        out
    }
}

/// Either the physical inputs, or `(omega_s, b_const, nu)` for the
/// one-dimensional model with that self-energy strength.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(transparent)]
pub struct ParamsSpec(pub ModelParams);

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DecayForm {
    omega_s: f64,
    b_const: f64,
    nu: f64,
}

impl<'de> Deserialize<'de> for ParamsSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let value = serde_json::Value::deserialize(d)?;
        let has_g = value.get("g").is_some();
        if has_g {
            let p: ModelParams = serde_json::from_value(value).map_err(D::Error::custom)?;
            Ok(ParamsSpec(p))
        } else {
            let f: DecayForm = serde_json::from_value(value).map_err(D::Error::custom)?;
            ModelParams::from_decay_constants(f.omega_s, f.b_const, f.nu)
                .map(ParamsSpec)
                .map_err(D::Error::custom)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSettings {
    #[serde(default = "default_modes")]
    pub n_modes: usize,
    #[serde(default = "default_dt")]
    pub dt: f64,
}

fn default_modes() -> usize {
    DEFAULT_MODES
}
fn default_dt() -> f64 {
    DEFAULT_DT
}

impl Default for OracleSettings {
    fn default() -> Self {
        Self {
            n_modes: DEFAULT_MODES,
            dt: DEFAULT_DT,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub params: ParamsSpec,
    #[serde(default)]
    pub cutoff: Option<CutoffParams>,
    #[serde(default)]
    pub time_grid: Option<TimeGrid>,
    #[serde(default = "default_routes")]
    pub routes: Vec<Route>,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default)]
    pub output_path: Option<String>,
    #[serde(default)]
    pub oracle: OracleSettings,
}

fn default_routes() -> Vec<Route> {
    vec![Route::Series]
}
fn default_tol() -> f64 {
    1e-10
}

impl RunConfig {
    pub fn params(&self) -> &ModelParams {
        &self.params.0
    }

    pub fn validate(&self) -> Result<(), String> {
        if let Some(g) = &self.time_grid {
            g.validate()?;
        }
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return Err(format!("tol = {} must lie in (0, 1)", self.tol));
        }
        if self.routes.is_empty() {
            return Err("at least one route is required".into());
        }
        let needs_cutoff = self
            .routes
            .iter()
            .any(|r| matches!(r, Route::Cutoff2 | Route::OracleGrid));
        if needs_cutoff && self.cutoff.is_none() {
            return Err("routes cutoff2 and oracle_grid need a `cutoff` section".into());
        }
        if self.oracle.n_modes < 2 {
            return Err("oracle.n_modes must be at least 2".into());
        }
        if !(self.oracle.dt > 0.0) {
            return Err("oracle.dt must be positive".into());
        }
        Ok(())
    }
}

pub fn parse_routes(list: &str) -> Result<Vec<Route>, String> {
    let mut routes = Vec::new();
    for name in list.split(',').filter(|s| !s.trim().is_empty()) {
        let r: Route = name.parse()?;
        if !routes.contains(&r) {
            routes.push(r);
        }
    }
    Ok(routes)
}
