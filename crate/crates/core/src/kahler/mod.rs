//! Kähler extension of the information metric to the full `(P, S)` phase space.
//!
//! A triple `(Omega, g, J)` is Kähler when
//!
//! ```text
//! Omega = g J,      J^T g J = g,      J J = -1
//! ```
//!
//! With `Omega` fixed to the canonical symplectic form and the `P`-block of `g`
//! fixed to the information metric `G`, the solutions form the family
//!
//! ```text
//! g = [[G, A^T], [A, (1 + A^2) G^-1]]
//! J = [[A, (1 + A^2) G^-1], [-G, -G A G^-1]]
//! ```
//!
//! parameterized by any `A` with `G A G^-1 = A^T`. Requiring the metric to be
//! spherically symmetric in the canonical `(x, y)` chart removes all `dP dS`
//! cross terms and hence forces `A = 0`, the flat triple.

mod curvature;

use std::sync::Arc;

use nalgebra::{ComplexField, DMatrix, Scalar};
use num_complex::Complex64;

use crate::config::GeometryConfig;
use crate::error::{Error, Result};
use crate::sampling;
use crate::simplex::{information_metric, ProbabilityVector};
use crate::symplectic::{symplectic_form, PhasePoint};

pub use curvature::{
    flat_metric_field, phase_chart_steps, riemann_curvature, riemann_curvature_with_steps, riemann_tensor,
    round_sphere, RiemannTensor,
};

pub const ADMISSIBILITY_TOLERANCE: f64 = 1e-10;

/// The free block `A` of the Kähler family.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtensionMatrix(pub DMatrix<f64>);

impl ExtensionMatrix {
    pub fn zeros(n: usize) -> Self {
        Self(DMatrix::zeros(n, n))
    }

    /// `max |G A G^-1 - A^T|` with `G` the information metric at `p`.
    pub fn admissibility_residual(&self, p: &ProbabilityVector, cfg: &GeometryConfig) -> Result<f64> {
        let g = information_metric(p, cfg)?;
        let n = g.nrows();
        if self.0.shape() != (n, n) {
            return Err(Error::Dimension {
                expected: n,
                found: self.0.nrows(),
            });
        }
        let g_inv = inverse_diagonal(&g);
        Ok(max_abs(&(&g * &self.0 * g_inv - self.0.transpose())))
    }
}

/// Metric, symplectic form and complex structure at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct KahlerTriple<T: Scalar = f64> {
    pub omega: DMatrix<T>,
    pub g: DMatrix<T>,
    pub j: DMatrix<T>,
}

/// Max-norm residuals of the three Kähler conditions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KahlerResiduals {
    /// `|Omega - g J|`
    pub compatibility: f64,
    /// `|J^T g J - g|`
    pub hermiticity: f64,
    /// `|J J + 1|`
    pub complex_structure: f64,
}

impl KahlerResiduals {
    pub fn max(&self) -> f64 {
        self.compatibility.max(self.hermiticity).max(self.complex_structure)
    }
}

/// Spherically symmetric line element `f(r) |dz|^2 + g(r) (z . dz)^2` in the
/// canonical chart, `r` the radius.
#[derive(Clone)]
pub struct SphericalMetricSpec {
    pub f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    pub g_rad: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl SphericalMetricSpec {
    pub fn new(
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        g_rad: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            f: Arc::new(f),
            g_rad: Arc::new(g_rad),
        }
    }

    /// `f = 1`, `g = 0`: the Euclidean metric of the canonical chart.
    pub fn euclidean() -> Self {
        Self::new(|_| 1.0, |_| 0.0)
    }
}

impl std::fmt::Debug for SphericalMetricSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("SphericalMetricSpec")
    }
}

pub(crate) fn max_abs<T: ComplexField<RealField = f64>>(m: &DMatrix<T>) -> f64 {
    m.iter().map(|z| z.clone().modulus()).fold(0.0, f64::max)
}

fn inverse_diagonal(g: &DMatrix<f64>) -> DMatrix<f64> {
    DMatrix::from_diagonal(&g.diagonal().map(|v| 1.0 / v))
}

fn block(n: usize, tl: &DMatrix<f64>, tr: &DMatrix<f64>, bl: &DMatrix<f64>, br: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(2 * n, 2 * n);
    out.view_mut((0, 0), (n, n)).copy_from(tl);
    out.view_mut((0, n), (n, n)).copy_from(tr);
    out.view_mut((n, 0), (n, n)).copy_from(bl);
    out.view_mut((n, n), (n, n)).copy_from(br);
    out
}

/// The Kähler triple generated by an admissible `A` at `p`.
pub fn build_kahler_family(p: &ProbabilityVector, a: &ExtensionMatrix, cfg: &GeometryConfig) -> Result<KahlerTriple> {
    let residual = a.admissibility_residual(p, cfg)?;
    if residual > ADMISSIBILITY_TOLERANCE {
        return Err(Error::Admissibility(residual));
    }
    assemble_family(p, a, cfg)
}

/// Assembles the family blocks without the admissibility check.
pub fn assemble_family(p: &ProbabilityVector, a: &ExtensionMatrix, cfg: &GeometryConfig) -> Result<KahlerTriple> {
    let g_info = information_metric(p, cfg)?;
    let n = g_info.nrows();
    let g_inv = inverse_diagonal(&g_info);
    let a = &a.0;
    let lower_right = (DMatrix::identity(n, n) + a * a) * &g_inv;
    let g = block(n, &g_info, &a.transpose(), a, &lower_right);
    let j = block(n, a, &lower_right, &(-&g_info), &(-(&g_info * a * &g_inv)));
    Ok(KahlerTriple {
        omega: symplectic_form(n),
        g,
        j,
    })
}

/// `A = G^{-1/2} S G^{1/2}` with `S` a random symmetric matrix rescaled to
/// spectral radius `scale`. Admissible by construction.
pub fn random_admissible_extension(
    p: &ProbabilityVector,
    cfg: &GeometryConfig,
    seed: u64,
    scale: f64,
) -> Result<ExtensionMatrix> {
    let g = information_metric(p, cfg)?;
    let n = g.nrows();
    let mut rng = sampling::seeded(seed);
    let s = sampling::random_real_symmetric(n, &mut rng);
    let radius = s.clone().symmetric_eigenvalues().amax();
    let s = if radius > 0.0 { s * (scale / radius) } else { s * 0.0 };
    conjugate_extension(p, &s, cfg)
}

/// `A = G^{-1/2} S G^{1/2}` for a given symmetric `S`.
pub fn conjugate_extension(p: &ProbabilityVector, s: &DMatrix<f64>, cfg: &GeometryConfig) -> Result<ExtensionMatrix> {
    let g = information_metric(p, cfg)?;
    let root = g.diagonal().map(f64::sqrt);
    let n = g.nrows();
    Ok(ExtensionMatrix(DMatrix::from_fn(n, n, |i, j| {
        s[(i, j)] * root[j] / root[i]
    })))
}

pub fn kahler_residuals<T: ComplexField<RealField = f64>>(t: &KahlerTriple<T>) -> Result<KahlerResiduals> {
    let dim = t.omega.nrows();
    for m in [&t.omega, &t.g, &t.j] {
        if m.nrows() != dim || m.ncols() != dim {
            return Err(Error::Dimension {
                expected: dim,
                found: if m.nrows() != dim { m.nrows() } else { m.ncols() },
            });
        }
    }
    let gj = &t.g * &t.j;
    let compatibility = max_abs(&(&t.omega - gj));
    let hermiticity = max_abs(&(t.j.transpose() * &t.g * &t.j - &t.g));
    let complex_structure = max_abs(&(&t.j * &t.j + DMatrix::<T>::identity(dim, dim)));
    Ok(KahlerResiduals {
        compatibility,
        hermiticity,
        complex_structure,
    })
}

/// The `A = 0` triple: `g = diag(G, G^-1)`, `J = [[0, G^-1], [-G, 0]]`.
pub fn flat_triple(p: &ProbabilityVector, cfg: &GeometryConfig) -> Result<KahlerTriple> {
    let g_info = information_metric(p, cfg)?;
    let n = g_info.nrows();
    let g_inv = inverse_diagonal(&g_info);
    let zero = DMatrix::zeros(n, n);
    Ok(KahlerTriple {
        omega: symplectic_form(n),
        g: block(n, &g_info, &zero, &zero, &g_inv),
        j: block(n, &zero, &g_inv, &(-&g_info), &zero),
    })
}

/// Max-norm of the off-diagonal `dP dS` block of a `2n x 2n` metric.
pub fn mixed_block_norm(g: &DMatrix<f64>) -> f64 {
    let n = g.nrows() / 2;
    max_abs(&g.view((0, n), (n, n)).into_owned()).max(max_abs(&g.view((n, 0), (n, n)).into_owned()))
}

/// A spherically symmetric canonical-chart metric written in `(P, S)`:
///
/// ```text
/// f(r) sum_i [alpha / (2 P^i) dP^i^2 + 2 P^i / alpha dS^i^2] + g(r) (alpha sum_i dP^i)^2
/// ```
///
/// Returns the matrix and the max-norm of its `dP dS` block (always zero).
pub fn spherical_line_element(
    spec: &SphericalMetricSpec,
    pt: &PhasePoint,
    cfg: &GeometryConfig,
) -> Result<(DMatrix<f64>, f64)> {
    pt.p.require_interior(cfg.boundary_floor)?;
    let n = pt.dim();
    let r = (2.0 * cfg.alpha * pt.p.as_slice().iter().sum::<f64>()).sqrt();
    let (f, g_rad) = ((spec.f)(r), (spec.g_rad)(r));
    if !(f > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "spherical metric needs f(r) > 0, got f({r}) = {f}"
        )));
    }
    let mut m = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        let p = pt.p.as_slice()[i];
        for j in 0..n {
            m[(i, j)] = g_rad * cfg.alpha * cfg.alpha;
        }
        m[(i, i)] += f * cfg.alpha / (2.0 * p);
        m[(n + i, n + i)] = f * 2.0 * p / cfg.alpha;
    }
    let mixed = mixed_block_norm(&m);
    Ok((m, mixed))
}

/// The flat tensors in the `(psi, conj psi)` chart (all `psi` components first):
/// `Omega = [[0, i alpha], [-i alpha, 0]]`, `g = [[0, alpha], [alpha, 0]]`,
/// `J = diag(-i, i)`.
pub fn complex_coordinate_triple(cfg: &GeometryConfig, n: usize) -> KahlerTriple<Complex64> {
    let zero = Complex64::new(0.0, 0.0);
    let mut omega = DMatrix::from_element(2 * n, 2 * n, zero);
    let mut g = DMatrix::from_element(2 * n, 2 * n, zero);
    let mut j = DMatrix::from_element(2 * n, 2 * n, zero);
    for k in 0..n {
        omega[(k, n + k)] = Complex64::new(0.0, cfg.alpha);
        omega[(n + k, k)] = Complex64::new(0.0, -cfg.alpha);
        g[(k, n + k)] = Complex64::new(cfg.alpha, 0.0);
        g[(n + k, k)] = Complex64::new(cfg.alpha, 0.0);
        j[(k, k)] = Complex64::new(0.0, -1.0);
        j[(n + k, n + k)] = Complex64::new(0.0, 1.0);
    }
    KahlerTriple { omega, g, j }
}

/// Result of pulling the complex-chart tensors back to `(P, S)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PullbackCheck {
    /// Max-norm deviation from the flat triple over all three tensors.
    pub deviation: f64,
    /// Ratio of the largest to smallest Jacobian column norm.
    pub jacobian_condition: f64,
    pub conditioning_warning: bool,
}

pub const CONDITIONING_WARNING_THRESHOLD: f64 = 1e6;

/// Jacobian of `(P, S) -> (psi, conj psi)` at `pt`, rows in the `(psi, conj psi)` order.
pub fn madelung_jacobian(pt: &PhasePoint, cfg: &GeometryConfig) -> DMatrix<Complex64> {
    let n = pt.dim();
    let psi = crate::quantum::madelung(pt, cfg);
    let mut jac = DMatrix::from_element(2 * n, 2 * n, Complex64::new(0.0, 0.0));
    let i_over_alpha = Complex64::new(0.0, 1.0 / cfg.alpha);
    for k in 0..n {
        let z = psi.as_slice()[k];
        let p = pt.p.as_slice()[k];
        jac[(k, k)] = z / (2.0 * p);
        jac[(k, n + k)] = z * i_over_alpha;
        jac[(n + k, k)] = z.conj() / (2.0 * p);
        jac[(n + k, n + k)] = -(z.conj() * i_over_alpha);
    }
    jac
}

/// Pulls the complex-chart triple back through the Madelung map and compares
/// it with [`flat_triple`]. Covariant tensors transform as `Jac^T T Jac`, the
/// complex structure as `Jac^-1 J Jac`.
pub fn pullback_check(pt: &PhasePoint, cfg: &GeometryConfig) -> Result<PullbackCheck> {
    let flat = flat_triple(&pt.p, cfg)?;
    let n = pt.dim();
    let jac = madelung_jacobian(pt, cfg);
    let jac_inv = jac
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::SingularMetric("Madelung Jacobian is singular".into()))?;
    let complex = complex_coordinate_triple(cfg, n);
    let omega = jac.transpose() * &complex.omega * &jac;
    let g = jac.transpose() * &complex.g * &jac;
    let j = &jac_inv * &complex.j * &jac;

    let lift = |m: &DMatrix<f64>| m.map(|v| Complex64::new(v, 0.0));
    let deviation = max_abs(&(omega - lift(&flat.omega)))
        .max(max_abs(&(g - lift(&flat.g))))
        .max(max_abs(&(j - lift(&flat.j))));

    let column_norms: Vec<f64> = (0..2 * n).map(|c| jac.column(c).norm()).collect();
    let largest = column_norms.iter().copied().fold(0.0, f64::max);
    let smallest = column_norms.iter().copied().fold(f64::INFINITY, f64::min);
    let jacobian_condition = largest / smallest;
    Ok(PullbackCheck {
        deviation,
        jacobian_condition,
        conditioning_warning: jacobian_condition > CONDITIONING_WARNING_THRESHOLD,
    })
}

/// `max_i` of the smallest eigenvalue of `g`, used to report positive-definiteness.
pub fn min_eigenvalue(g: &DMatrix<f64>) -> f64 {
    g.clone().symmetric_eigenvalues().min()
}

/// `det J` of a real triple.
pub fn complex_structure_determinant(t: &KahlerTriple) -> f64 {
    t.j.clone().determinant()
}
