//! Riemann curvature of a metric field by nested finite differences.
//!
//! Christoffel symbols are built from five-point centered derivatives of the
//! metric, and the Riemann tensor from five-point derivatives of the
//! Christoffel symbols, so the engine is fourth-order accurate in the step.

use nalgebra::DMatrix;

use crate::config::GeometryConfig;
use crate::error::{Error, Result};

/// `R^a_{bcd}` stored densely, index order `(a, b, c, d)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RiemannTensor {
    dim: usize,
    data: Vec<f64>,
}

impl RiemannTensor {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, a: usize, b: usize, c: usize, d: usize) -> f64 {
        let n = self.dim;
        self.data[((a * n + b) * n + c) * n + d]
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Sectional curvature of the coordinate plane `(i, j)`:
    /// `R_{ijij} / (g_ii g_jj - g_ij^2)` with `R_{abcd} = g_ae R^e_{bcd}`.
    pub fn sectional(&self, g: &DMatrix<f64>, i: usize, j: usize) -> f64 {
        let lowered: f64 = (0..self.dim).map(|e| g[(i, e)] * self.get(e, j, i, j)).sum();
        lowered / (g[(i, i)] * g[(j, j)] - g[(i, j)] * g[(i, j)])
    }
}

type Christoffel = Vec<f64>;

fn idx3(n: usize, a: usize, b: usize, c: usize) -> usize {
    (a * n + b) * n + c
}

const STENCIL: [(f64, f64); 4] = [
    (-2.0, 1.0 / 12.0),
    (-1.0, -8.0 / 12.0),
    (1.0, 8.0 / 12.0),
    (2.0, -1.0 / 12.0),
];

fn derivative<T, F>(x: &[f64], k: usize, h: f64, mut eval: F, zero: T, add: impl Fn(&mut T, &T, f64)) -> Result<T>
where
    F: FnMut(&[f64]) -> Result<T>,
{
    let mut probe = x.to_vec();
    let mut acc = zero;
    for (offset, weight) in STENCIL {
        probe[k] = x[k] + offset * h;
        let v = eval(&probe)?;
        add(&mut acc, &v, weight / h);
    }
    Ok(acc)
}

fn checked_metric<F>(field: &F, x: &[f64]) -> Result<DMatrix<f64>>
where
    F: Fn(&[f64]) -> Result<DMatrix<f64>>,
{
    let g = field(x)?;
    if g.nrows() != x.len() || g.ncols() != x.len() {
        return Err(Error::Dimension {
            expected: x.len(),
            found: g.nrows(),
        });
    }
    if g.clone().cholesky().is_none() {
        return Err(Error::SingularMetric(format!("metric not positive definite at {x:?}")));
    }
    Ok(g)
}

fn christoffel<F>(field: &F, x: &[f64], steps: &[f64]) -> Result<Christoffel>
where
    F: Fn(&[f64]) -> Result<DMatrix<f64>>,
{
    let n = x.len();
    let g = checked_metric(field, x)?;
    let g_inv = g
        .try_inverse()
        .ok_or_else(|| Error::SingularMetric(format!("metric not invertible at {x:?}")))?;
    let mut dg = Vec::with_capacity(n);
    for (k, &step) in steps.iter().enumerate().take(n) {
        dg.push(derivative(
            x,
            k,
            step,
            |p| checked_metric(field, p),
            DMatrix::zeros(n, n),
            |acc, v, w| *acc += v * w,
        )?);
    }
    let mut gamma = vec![0.0; n * n * n];
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                let mut s = 0.0;
                for d in 0..n {
                    s += g_inv[(a, d)] * (dg[b][(d, c)] + dg[c][(d, b)] - dg[d][(b, c)]);
                }
                gamma[idx3(n, a, b, c)] = 0.5 * s;
            }
        }
    }
    Ok(gamma)
}

/// Riemann tensor of `field` at `center` with per-coordinate steps.
pub fn riemann_tensor<F>(field: &F, center: &[f64], steps: &[f64]) -> Result<RiemannTensor>
where
    F: Fn(&[f64]) -> Result<DMatrix<f64>>,
{
    let n = center.len();
    if steps.len() != n {
        return Err(Error::Dimension {
            expected: n,
            found: steps.len(),
        });
    }
    let gamma = christoffel(field, center, steps)?;
    let mut d_gamma = Vec::with_capacity(n);
    for k in 0..n {
        d_gamma.push(derivative(
            center,
            k,
            steps[k],
            |p| christoffel(field, p, steps),
            vec![0.0; n * n * n],
            |acc, v, w| acc.iter_mut().zip(v).for_each(|(a, b)| *a += w * b),
        )?);
    }

    let mut data = vec![0.0; n * n * n * n];
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    let mut r = d_gamma[c][idx3(n, a, d, b)] - d_gamma[d][idx3(n, a, c, b)];
                    for e in 0..n {
                        r += gamma[idx3(n, a, c, e)] * gamma[idx3(n, e, d, b)]
                            - gamma[idx3(n, a, d, e)] * gamma[idx3(n, e, c, b)];
                    }
                    data[((a * n + b) * n + c) * n + d] = r;
                }
            }
        }
    }
    Ok(RiemannTensor { dim: n, data })
}

/// Max-norm of the Riemann tensor at `center`, steps `cfg.curvature_step * max(1, |x_k|)`.
pub fn riemann_curvature<F>(field: &F, center: &[f64], cfg: &GeometryConfig) -> Result<f64>
where
    F: Fn(&[f64]) -> Result<DMatrix<f64>>,
{
    let steps: Vec<f64> = center.iter().map(|x| cfg.curvature_step * x.abs().max(1.0)).collect();
    riemann_curvature_with_steps(field, center, &steps)
}

pub fn riemann_curvature_with_steps<F>(field: &F, center: &[f64], steps: &[f64]) -> Result<f64>
where
    F: Fn(&[f64]) -> Result<DMatrix<f64>>,
{
    Ok(riemann_tensor(field, center, steps)?.max_abs())
}

/// Steps for a `(P, S)` chart: relative to `P^i` for the probability
/// coordinates (the metric varies on the scale of `P^i`), and
/// `cfg.curvature_step * max(1, |S^i|)` for the phases.
pub fn phase_chart_steps(z: &[f64], cfg: &GeometryConfig) -> Vec<f64> {
    let n = z.len() / 2;
    z.iter()
        .enumerate()
        .map(|(k, v)| {
            if k < n {
                cfg.curvature_step * v.abs()
            } else {
                cfg.curvature_step * v.abs().max(1.0)
            }
        })
        .collect()
}

/// The flat extended metric `diag(alpha / (2 P), 2 P / alpha)` as a field over
/// the unconstrained `(P, S)` chart.
pub fn flat_metric_field(cfg: &GeometryConfig) -> impl Fn(&[f64]) -> Result<DMatrix<f64>> + Send + Sync {
    let (alpha, floor) = (cfg.alpha, cfg.boundary_floor);
    move |z: &[f64]| {
        let n = z.len() / 2;
        let mut g = DMatrix::zeros(2 * n, 2 * n);
        for i in 0..n {
            let p = z[i];
            if p < floor {
                return Err(Error::Boundary {
                    index: i,
                    value: p,
                    floor,
                });
            }
            g[(i, i)] = alpha / (2.0 * p);
            g[(n + i, n + i)] = 2.0 * p / alpha;
        }
        Ok(g)
    }
}

/// Round 2-sphere of the given radius in `(theta, phi)`; its sectional
/// curvature is `1 / radius^2` everywhere.
pub fn round_sphere(radius: f64) -> impl Fn(&[f64]) -> Result<DMatrix<f64>> + Send + Sync {
    move |x: &[f64]| {
        let s = x[0].sin();
        Ok(DMatrix::from_row_slice(
            2,
            2,
            &[radius * radius, 0.0, 0.0, radius * radius * s * s],
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn euclidean_metric_is_flat() {
        let cfg = GeometryConfig::default();
        let field = |_: &[f64]| {
            Ok(DMatrix::from_row_slice(
                3,
                3,
                &[2.0, 0.3, 0.0, 0.3, 1.0, 0.1, 0.0, 0.1, 4.0],
            ))
        };
        assert!(riemann_curvature(&field, &[0.1, -2.0, 3.0], &cfg).unwrap() < 1e-10);
    }

    #[test]
    fn sphere_fixture_has_curvature_inverse_r_squared() {
        let cfg = GeometryConfig::default();
        for radius in [0.5, 1.0, 3.0] {
            let field = round_sphere(radius);
            let center = [1.1, 0.4];
            let steps = [cfg.curvature_step; 2];
            let tensor = riemann_tensor(&field, &center, &steps).unwrap();
            let g = field(&center).unwrap();
            let k = tensor.sectional(&g, 0, 1);
            assert!((k - 1.0 / (radius * radius)).abs() < 1e-4, "radius {radius}: {k}");
        }
    }

    #[test]
    fn flat_field_rejects_boundary_and_indefinite_metrics() {
        let cfg = GeometryConfig::default();
        let field = flat_metric_field(&cfg);
        let z = [2e-9, 1.0 - 2e-9, 0.0, 0.0];
        assert!(riemann_tensor(&field, &z, &phase_chart_steps(&z, &cfg)).is_ok());
        // At the floor itself the stencil leaves the interior.
        let z = [1e-9, 1.0 - 1e-9, 0.0, 0.0];
        assert!(matches!(
            riemann_tensor(&field, &z, &phase_chart_steps(&z, &cfg)),
            Err(Error::Boundary { .. })
        ));

        let indefinite = |_: &[f64]| Ok(DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]));
        assert!(matches!(
            riemann_curvature(&indefinite, &[0.0, 0.0], &cfg),
            Err(Error::SingularMetric(_))
        ));
    }

    #[test]
    fn flat_extended_metric_has_zero_curvature() {
        let cfg = GeometryConfig::default();
        let field = flat_metric_field(&cfg);
        for z in [[0.3, 0.7, 0.1, -0.5], [0.05, 0.95, 2.0, 1.0]] {
            let r = riemann_curvature_with_steps(&field, &z, &phase_chart_steps(&z, &cfg)).unwrap();
            assert!(r < 1e-5, "{r}");
        }
    }
}
