//! Eigendecomposition of the real symmetric arrowhead matrix
//! `[[alpha, z^T], [z, diag(d)]]` in `O(n^2)` time and `O(n)` memory.
//!
//! Eigenvalues are roots of the secular equation
//! `f(x) = x - alpha - sum_k z_k^2 / (x - d_k)`, one in each gap of the sorted
//! `d`, one below and one above. Each root is stored as an offset from its
//! nearest pole so that `x - d_k` keeps full relative accuracy. The couplings
//! are then replaced by the ones for which the computed roots are exact
//! (Gu and Eisenstat), which makes the eigenvectors orthogonal to rounding.

use num_complex::Complex64;

/// Couplings below this fraction of the matrix scale are decoupled.
const DEFLATION: f64 = 8.0 * f64::EPSILON;
const MAX_ITERATIONS: usize = 200;

#[derive(Debug, Clone)]
pub(crate) struct Arrowhead {
    /// Sorted poles that stay coupled.
    poles: Vec<f64>,
    /// Corrected couplings of those poles.
    z_hat: Vec<f64>,
    /// Original position of each coupled pole.
    index: Vec<usize>,
    /// Eigenvalue `i` is `poles[anchor[i]] + offset[i]`, or `alpha` when nothing couples.
    anchor: Vec<usize>,
    offset: Vec<f64>,
    /// Squared emitter component of eigenvector `i`.
    weight: Vec<f64>,
    alpha: f64,
    dim: usize,
}

impl Arrowhead {
    /// `d` must have distinct entries wherever `z` is non-negligible.
    pub(crate) fn new(alpha: f64, d: &[f64], z: &[f64]) -> Self {
        assert_eq!(d.len(), z.len());
        let z_norm = z.iter().map(|v| v * v).sum::<f64>().sqrt();
        let scale = d.iter().fold(alpha.abs().max(z_norm), |m, v| m.max(v.abs()));
        let mut order: Vec<usize> = (0..d.len())
            .filter(|&k| z[k].abs() > DEFLATION * scale)
            .collect();
        order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
        let poles: Vec<f64> = order.iter().map(|&k| d[k]).collect();
        let zs: Vec<f64> = order.iter().map(|&k| z[k]).collect();
        assert!(
            poles.windows(2).all(|w| w[0] < w[1]),
            "coupled diagonal entries must be distinct"
        );

        let mut out = Self {
            poles,
            z_hat: Vec::new(),
            index: order,
            anchor: Vec::new(),
            offset: Vec::new(),
            weight: Vec::new(),
            alpha,
            dim: d.len() + 1,
        };
        let m = out.poles.len();
        if m == 0 {
            out.anchor.push(usize::MAX);
            out.offset.push(0.0);
            out.weight.push(1.0);
            return out;
        }
        let zz: Vec<f64> = zs.iter().map(|v| v * v).collect();
        let lower = alpha.min(out.poles[0]) - z_norm - 1.0;
        let upper = alpha.max(out.poles[m - 1]) + z_norm + 1.0;
        for i in 0..=m {
            let (a, lo, hi) = if i == 0 {
                (0, lower - out.poles[0], 0.0)
            } else if i == m {
                (m - 1, 0.0, upper - out.poles[m - 1])
            } else {
                let gap = out.poles[i] - out.poles[i - 1];
                let (f, _) = secular(&out.poles, &zz, alpha, i - 1, 0.5 * gap);
                if f > 0.0 {
                    (i - 1, 0.0, 0.5 * gap)
                } else {
                    (i, -0.5 * gap, 0.0)
                }
            };
            out.anchor.push(a);
            out.offset.push(solve(&out.poles, &zz, alpha, a, lo, hi));
        }
        out.z_hat = (0..m)
            .map(|j| out.corrected_coupling(j).copysign(zs[j]))
            .collect();
        out.weight = (0..=m)
            .map(|i| {
                let s: f64 = (0..m)
                    .map(|k| {
                        let u = out.z_hat[k] / out.gap(i, k);
                        u * u
                    })
                    .sum();
                1.0 / (1.0 + s)
            })
            .collect();
        out
    }

    /// `lambda_i - d_k` without cancellation.
    fn gap(&self, i: usize, k: usize) -> f64 {
        (self.poles[self.anchor[i]] - self.poles[k]) + self.offset[i]
    }

    /// `|z_j|` for which the computed roots are exact, from
    /// `z_j^2 = -prod_i (d_j - lambda_i) / prod_(k != j) (d_j - d_k)`,
    /// grouped into ratios near one.
    fn corrected_coupling(&self, j: usize) -> f64 {
        let m = self.poles.len();
        let mut prod = -self.gap(j, j) * self.gap(m, j);
        let mut exp2 = 0i32;
        for k in 0..m {
            if k != j {
                prod *= self.gap(k, j) / (self.poles[k] - self.poles[j]);
                if !(1e-200..=1e200).contains(&prod.abs()) {
                    let e = prod.abs().log2().round() as i32;
                    prod /= 2f64.powi(e);
                    exp2 += e;
                }
            }
        }
        (prod.abs().sqrt()) * 2f64.powf(exp2 as f64 / 2.0)
    }

    /// Eigenvalues of the coupled block; decoupled diagonal entries are left out.
    #[cfg(test)]
    pub(crate) fn eigenvalues(&self) -> Vec<f64> {
        (0..self.weight.len()).map(|i| self.eigenvalue(i)).collect()
    }

    fn eigenvalue(&self, i: usize) -> f64 {
        if self.poles.is_empty() {
            self.alpha
        } else {
            self.poles[self.anchor[i]] + self.offset[i]
        }
    }

    fn phases(&self, t: f64) -> Vec<Complex64> {
        (0..self.weight.len())
            .map(|i| self.weight[i] * Complex64::from_polar(1.0, -self.eigenvalue(i) * t))
            .collect()
    }

    /// `<e_0| e^(-iAt) |e_0>`.
    pub(crate) fn amplitude(&self, t: f64) -> Complex64 {
        self.phases(t).into_iter().sum()
    }

    /// `e^(-iAt)|e_0>`: component 0 first, then the diagonal entries in input order.
    pub(crate) fn state(&self, t: f64) -> Vec<Complex64> {
        let ph = self.phases(t);
        let mut out = vec![Complex64::new(0.0, 0.0); self.dim];
        out[0] = ph.iter().sum();
        for (k, &orig) in self.index.iter().enumerate() {
            let s: Complex64 = ph.iter().enumerate().map(|(i, &c)| c / self.gap(i, k)).sum();
            out[orig + 1] = s * self.z_hat[k];
        }
        out
    }
}

/// `f` and `f'` at `x = d_a + mu`.
fn secular(d: &[f64], zz: &[f64], alpha: f64, a: usize, mu: f64) -> (f64, f64) {
    let mut f = (d[a] - alpha) + mu;
    let mut df = 1.0;
    for (k, (&dk, &w)) in d.iter().zip(zz).enumerate() {
        let del = if k == a { mu } else { (d[a] - dk) + mu };
        let q = w / del;
        f -= q;
        df += q / del;
    }
    (f, df)
}

/// Root of `f(d_a + mu)` for `mu` in `(lo, hi)`, where `f` increases from
/// negative to positive. Newton on `mu f(mu)`, which is smooth at the anchor
/// pole, with bisection whenever a step leaves the bracket.
fn solve(d: &[f64], zz: &[f64], alpha: f64, a: usize, mut lo: f64, mut hi: f64) -> f64 {
    let mut mu = 0.5 * (lo + hi);
    for _ in 0..MAX_ITERATIONS {
        let (f, df) = secular(d, zz, alpha, a, mu);
        if f == 0.0 {
            return mu;
        }
        if f > 0.0 {
            hi = mu;
        } else {
            lo = mu;
        }
        let g = mu * f;
        let dg = f + mu * df;
        let mut next = mu - g / dg;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        let width = hi - lo;
        if (next - mu).abs() <= 2.0 * f64::EPSILON * next.abs() || width <= 2.0 * f64::EPSILON * lo.abs().max(hi.abs())
        {
            return next;
        }
        mu = next;
    }
    mu
}
