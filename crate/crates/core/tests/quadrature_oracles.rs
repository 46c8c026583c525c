//! Special functions checked against direct numerical integration.

use std::num::NonZeroUsize;

use fracdecay::specfun::{gamma_real, hyp1f1, upper_incomplete_gamma};
use fracdecay::Complex64;
use gauss_quad::GaussLegendre;

fn rule(n: usize) -> Vec<(f64, f64)> {
    GaussLegendre::new(NonZeroUsize::new(n).unwrap()).as_node_weight_pairs().to_vec()
}

/// Integral of `f` over `[a, b]` with `panels` equal Gauss-Legendre panels.
fn integrate(f: impl Fn(f64) -> Complex64, a: f64, b: f64, panels: usize) -> Complex64 {
    let nodes = rule(30);
    let h = (b - a) / panels as f64;
    let mut sum = Complex64::new(0.0, 0.0);
    for k in 0..panels {
        let mid = a + h * (k as f64 + 0.5);
        for &(x, w) in &nodes {
            sum += f(mid + 0.5 * h * x) * (0.5 * h * w);
        }
    }
    sum
}

#[test]
fn hyp1f1_matches_euler_integral() {
    // 1F1(a, b, z) = Gamma(b) / (Gamma(a) Gamma(b - a)) * int_0^1 e^(zu) u^(a-1) (1-u)^(b-a-1) du,
    // with u = s^2 to remove the endpoint singularity for a = 1/2.
    let (a, b) = (0.5, 2.5);
    for &z in &[Complex64::new(1.0, 0.0), Complex64::new(0.0, 4.0), Complex64::new(-2.0, 1.0)] {
        let integral = integrate(|s| 2.0 * (z * s * s).exp() * (1.0 - s * s), 0.0, 1.0, 4);
        let norm = gamma_real(b).unwrap() / (gamma_real(a).unwrap() * gamma_real(b - a).unwrap());
        let expected = integral * norm;
        let got = hyp1f1(a, b, z, 1e-16).unwrap().value;
        assert!((got - expected).norm() < 1e-10 * expected.norm(), "z={z}: {got} vs {expected}");
    }
}

#[test]
fn incomplete_gamma_matches_ray_integral() {
    // Gamma(a, x) = int_0^inf (x + s)^(a-1) e^-(x+s) ds along the horizontal ray from x.
    for &(a, x) in &[
        (-0.5, Complex64::new(0.0, 3.0)),
        (-0.5, Complex64::new(0.0, 12.0)),
        (0.3, Complex64::new(1.0, -2.0)),
    ] {
        let f = |s: f64| {
            let xi = x + s;
            xi.powf(a - 1.0) * (-xi).exp()
        };
        let expected = integrate(f, 0.0, 60.0, 120);
        let got = upper_incomplete_gamma(a, x, 1e-15).unwrap().value;
        assert!((got - expected).norm() < 1e-8 * expected.norm(), "a={a}, x={x}: {got} vs {expected}");
    }
}
