//! Survival amplitude of a two-level emitter coupled to a bath with dispersion
//! `omega_0 |k|^n` in `D` dimensions, in the regime `0 < D/n < 1`.
//!
//! The crate offers several independent routes to the same quantity:
//!
//! * [`shorttime`]: the exact second-order series in the coupling and its
//!   leading fractional power law `1 - p ~ t^(2 - D/n)`.
//! * [`cutoff`]: the same expansion with a hard momentum cutoff, showing the
//!   crossover back to the quadratic (Zeno) law.
//! * [`resolvent`]: the exact amplitude from the two poles of the resolvent and
//!   the branch-cut integral, plus the long-time `t^(D/n - 2)` tail.
//! * [`oracle`]: brute-force references, a discretized bath diagonalized
//!   exactly and a Volterra integral equation for the continuum.

mod arrowhead;
pub mod cutoff;
mod error;
pub mod fit;
pub mod model;
pub mod oracle;
mod quad;
pub mod resolvent;
pub mod shorttime;
pub mod specfun;

pub use error::{Error, Result};
pub use model::{CutoffParams, ModelParams};
pub use num_complex::Complex64;
pub use shorttime::SurvivalCurve;
pub use specfun::{SeriesValue, SheetPoint};
