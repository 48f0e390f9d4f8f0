//! Phase space of probabilities in motion.
//!
//! Points carry the probabilities `P^i` together with their conjugate
//! coordinates `S^i`. Observables are scalar functions of the flat coordinate
//! vector `z = (P^1..P^n, S^1..S^n)`; they must be evaluable slightly off the
//! simplex because brackets are taken with the `P^i` treated as independent.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::config::GeometryConfig;
use crate::error::{Error, Result};
use crate::simplex::ProbabilityVector;

/// A point `(P, S)` of the 2n-dimensional phase space.
#[derive(Debug, Clone, PartialEq)]
pub struct PhasePoint {
    pub p: ProbabilityVector,
    pub s: Vec<f64>,
}

impl PhasePoint {
    pub fn new(p: ProbabilityVector, s: Vec<f64>) -> Result<Self> {
        if s.len() != p.len() {
            return Err(Error::Dimension {
                expected: p.len(),
                found: s.len(),
            });
        }
        if s.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig("phase coordinates must be finite".into()));
        }
        Ok(Self { p, s })
    }

    pub fn at_rest(p: ProbabilityVector) -> Self {
        let n = p.len();
        Self { p, s: vec![0.0; n] }
    }

    pub fn dim(&self) -> usize {
        self.p.len()
    }

    /// `(P^1..P^n, S^1..S^n)`.
    pub fn coordinates(&self) -> Vec<f64> {
        self.p.as_slice().iter().chain(&self.s).copied().collect()
    }

    /// The same point with every phase shifted by `c`.
    pub fn shifted(&self, c: f64) -> Self {
        Self {
            p: self.p.clone(),
            s: self.s.iter().map(|v| v + c).collect(),
        }
    }
}

type ScalarFn = dyn Fn(&[f64]) -> f64 + Send + Sync;
type GradientFn = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;

/// A scalar function on phase space, optionally with its analytic gradient.
#[derive(Clone)]
pub struct ObservableFunction {
    eval: Arc<ScalarFn>,
    gradient: Option<Arc<GradientFn>>,
}

impl std::fmt::Debug for ObservableFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ObservableFunction")
            .field("analytic_gradient", &self.gradient.is_some())
            .finish()
    }
}

impl ObservableFunction {
    pub fn new(eval: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            eval: Arc::new(eval),
            gradient: None,
        }
    }

    pub fn with_gradient(mut self, gradient: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static) -> Self {
        self.gradient = Some(Arc::new(gradient));
        self
    }

    /// Drops the analytic gradient so brackets fall back to finite differences.
    pub fn numeric(&self) -> Self {
        Self {
            eval: self.eval.clone(),
            gradient: None,
        }
    }

    pub fn has_gradient(&self) -> bool {
        self.gradient.is_some()
    }

    pub fn eval(&self, z: &[f64]) -> f64 {
        (self.eval)(z)
    }

    pub fn eval_at(&self, pt: &PhasePoint) -> f64 {
        self.eval(&pt.coordinates())
    }

    /// Pointwise product.
    pub fn product(&self, other: &Self) -> Self {
        let (a, b) = (self.eval.clone(), other.eval.clone());
        Self::new(move |z| a(z) * b(z))
    }

    /// The coordinate function `P^i`.
    pub fn probability(n: usize, i: usize) -> Self {
        Self::coordinate(2 * n, i)
    }

    /// The coordinate function `S^i`.
    pub fn phase(n: usize, i: usize) -> Self {
        Self::coordinate(2 * n, n + i)
    }

    fn coordinate(dim: usize, k: usize) -> Self {
        Self::new(move |z| z[k]).with_gradient(move |_| {
            let mut g = vec![0.0; dim];
            g[k] = 1.0;
            g
        })
    }

    /// Gradient `(dF/dP, dF/dS)` at `z`: analytic when available, otherwise
    /// centered differences with step `cfg.fd_step * max(1, |z_k|)`.
    pub fn gradient(&self, z: &[f64], cfg: &GeometryConfig) -> Result<Vec<f64>> {
        let n = z.len() / 2;
        if let Some((index, &value)) = z[..n].iter().enumerate().find(|(_, &v)| v < cfg.boundary_floor) {
            return Err(Error::Boundary {
                index,
                value,
                floor: cfg.boundary_floor,
            });
        }
        if let Some(g) = &self.gradient {
            return Ok(g(z));
        }
        if let Some((index, &value)) = z[..n].iter().enumerate().find(|(_, &v)| v <= cfg.step_for(v)) {
            return Err(Error::Boundary {
                index,
                value,
                floor: cfg.step_for(value),
            });
        }
        let mut probe = z.to_vec();
        Ok((0..z.len())
            .map(|k| {
                let h = cfg.step_for(z[k]);
                probe[k] = z[k] + h;
                let up = self.eval(&probe);
                probe[k] = z[k] - h;
                let down = self.eval(&probe);
                probe[k] = z[k];
                (up - down) / (2.0 * h)
            })
            .collect())
    }
}

/// A complex observable `re + i im`.
#[derive(Debug, Clone)]
pub struct ComplexObservable {
    pub re: ObservableFunction,
    pub im: ObservableFunction,
}

impl ComplexObservable {
    pub fn conj(&self) -> Self {
        let im = self.im.clone();
        let mut conj_im = ObservableFunction::new({
            let im = im.clone();
            move |z| -im.eval(z)
        });
        if let Some(g) = im.gradient.clone() {
            conj_im = conj_im.with_gradient(move |z| g(z).into_iter().map(|v| -v).collect());
        }
        Self {
            re: self.re.clone(),
            im: conj_im,
        }
    }
}

/// `[[0, I], [-I, 0]]`.
pub fn symplectic_form(n: usize) -> DMatrix<f64> {
    let mut omega = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        omega[(i, n + i)] = 1.0;
        omega[(n + i, i)] = -1.0;
    }
    omega
}

/// `sum_i (dF/dP^i dG/dS^i - dF/dS^i dG/dP^i)` from precomputed gradients.
pub fn bracket_from_gradients(gf: &[f64], gg: &[f64]) -> f64 {
    let n = gf.len() / 2;
    (0..n).map(|i| gf[i] * gg[n + i] - gf[n + i] * gg[i]).sum()
}

pub fn poisson_bracket(
    f: &ObservableFunction,
    g: &ObservableFunction,
    pt: &PhasePoint,
    cfg: &GeometryConfig,
) -> Result<f64> {
    let z = pt.coordinates();
    poisson_bracket_at(f, g, &z, cfg)
}

/// Bracket at a raw coordinate vector `z = (P, S)`.
pub fn poisson_bracket_at(
    f: &ObservableFunction,
    g: &ObservableFunction,
    z: &[f64],
    cfg: &GeometryConfig,
) -> Result<f64> {
    let gf = f.gradient(z, cfg)?;
    let gg = g.gradient(z, cfg)?;
    Ok(bracket_from_gradients(&gf, &gg))
}

/// The bracket written as `grad F^T Omega grad G`.
pub fn poisson_bracket_geometric(
    f: &ObservableFunction,
    g: &ObservableFunction,
    pt: &PhasePoint,
    cfg: &GeometryConfig,
) -> Result<f64> {
    let z = pt.coordinates();
    let gf = DVector::from_vec(f.gradient(&z, cfg)?);
    let gg = DVector::from_vec(g.gradient(&z, cfg)?);
    Ok(gf.dot(&(symplectic_form(pt.dim()) * gg)))
}

/// Bilinear extension of the bracket to complex observables.
pub fn complex_poisson_bracket(
    f: &ComplexObservable,
    g: &ComplexObservable,
    pt: &PhasePoint,
    cfg: &GeometryConfig,
) -> Result<Complex64> {
    let z = pt.coordinates();
    let (fr, fi) = (f.re.gradient(&z, cfg)?, f.im.gradient(&z, cfg)?);
    let (gr, gi) = (g.re.gradient(&z, cfg)?, g.im.gradient(&z, cfg)?);
    let re = bracket_from_gradients(&fr, &gr) - bracket_from_gradients(&fi, &gi);
    let im = bracket_from_gradients(&fr, &gi) + bracket_from_gradients(&fi, &gr);
    Ok(Complex64::new(re, im))
}

/// Outcome of testing an observable against the two admissibility conditions:
/// invariance under a global phase shift and vanishing phase derivative on the
/// boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaugeCheckReport {
    /// `max |A(P, S + c) - A(P, S)|` over points and shifts.
    pub shift_violation: f64,
    /// `max |dA/dS^i|` with `P^i` pushed to the boundary floor.
    pub boundary_derivative: f64,
    pub tolerance: f64,
}

impl GaugeCheckReport {
    pub fn shift_invariant(&self) -> bool {
        self.shift_violation < self.tolerance
    }

    pub fn boundary_regular(&self) -> bool {
        self.boundary_derivative < self.tolerance
    }

    pub fn passed(&self) -> bool {
        self.shift_invariant() && self.boundary_regular()
    }
}

pub const GAUGE_TOLERANCE: f64 = 1e-8;

pub fn observable_gauge_check(
    a: &ObservableFunction,
    points: &[PhasePoint],
    shifts: &[f64],
    cfg: &GeometryConfig,
) -> GaugeCheckReport {
    let mut shift_violation: f64 = 0.0;
    let mut boundary_derivative: f64 = 0.0;
    for pt in points {
        let base = a.eval_at(pt);
        for &c in shifts {
            shift_violation = shift_violation.max((a.eval_at(&pt.shifted(c)) - base).abs());
        }

        let n = pt.dim();
        for i in 0..n {
            let mut z = pt.coordinates();
            let rest = 1.0 - z[i];
            for (k, v) in z[..n].iter_mut().enumerate() {
                *v = if k == i {
                    cfg.boundary_floor
                } else if rest > 0.0 {
                    *v * (1.0 - cfg.boundary_floor) / rest
                } else {
                    (1.0 - cfg.boundary_floor) / (n - 1) as f64
                };
            }
            let derivative = match &a.gradient {
                Some(g) => g(&z)[n + i],
                None => {
                    let s = z[n + i];
                    let h = cfg.step_for(s);
                    z[n + i] = s + h;
                    let up = a.eval(&z);
                    z[n + i] = s - h;
                    let down = a.eval(&z);
                    (up - down) / (2.0 * h)
                }
            };
            boundary_derivative = boundary_derivative.max(derivative.abs());
        }
    }
    GaugeCheckReport {
        shift_violation,
        boundary_derivative,
        tolerance: GAUGE_TOLERANCE,
    }
}

/// Canonical coordinates `x + i y = sqrt(2 alpha P) exp(i S / alpha)` in which the
/// normalization constraint is the sphere `sum (x^2 + y^2) = 2 alpha`.
#[derive(Debug, Clone, PartialEq)]
pub struct RealPhaseCoordinates {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl RealPhaseCoordinates {
    pub fn radius_squared(&self) -> f64 {
        self.x.iter().chain(&self.y).map(|v| v * v).sum()
    }

    /// Inverse of [`to_xy`] with phases taken on the principal branch
    /// `S / alpha` in `(-pi, pi]`.
    pub fn to_phase_point(&self, cfg: &GeometryConfig) -> Result<PhasePoint> {
        let (p, s) = self.raw_phase(cfg);
        PhasePoint::new(ProbabilityVector::new(p)?, s)
    }

    /// `(P, S)` without checking normalization.
    pub fn raw_phase(&self, cfg: &GeometryConfig) -> (Vec<f64>, Vec<f64>) {
        self.x
            .iter()
            .zip(&self.y)
            .map(|(&x, &y)| {
                let p = (x * x + y * y) / (2.0 * cfg.alpha);
                let s = if p == 0.0 { 0.0 } else { cfg.alpha * y.atan2(x) };
                (p, s)
            })
            .unzip()
    }
}

pub fn to_xy(pt: &PhasePoint, cfg: &GeometryConfig) -> RealPhaseCoordinates {
    let (x, y) =
        pt.p.as_slice()
            .iter()
            .zip(&pt.s)
            .map(|(&p, &s)| {
                let r = (2.0 * cfg.alpha * p).sqrt();
                let (sin, cos) = (s / cfg.alpha).sin_cos();
                (r * cos, r * sin)
            })
            .unzip();
    RealPhaseCoordinates { x, y }
}

pub fn from_xy(xy: &RealPhaseCoordinates, cfg: &GeometryConfig) -> Result<PhasePoint> {
    xy.to_phase_point(cfg)
}

/// The coordinate functions `x^i` and `y^i` as observables on `(P, S)`.
/// With `analytic` set they carry closed-form gradients.
pub fn xy_observables(
    n: usize,
    cfg: &GeometryConfig,
    analytic: bool,
) -> (Vec<ObservableFunction>, Vec<ObservableFunction>) {
    let alpha = cfg.alpha;
    let make = |i: usize, use_sin: bool| {
        let f = ObservableFunction::new(move |z| {
            let r = (2.0 * alpha * z[i]).sqrt();
            let (sin, cos) = (z[n + i] / alpha).sin_cos();
            r * if use_sin { sin } else { cos }
        });
        if !analytic {
            return f;
        }
        f.with_gradient(move |z| {
            let p = z[i];
            let (sin, cos) = (z[n + i] / alpha).sin_cos();
            let dr = (alpha / (2.0 * p)).sqrt();
            let r_over_alpha = (2.0 * alpha * p).sqrt() / alpha;
            let mut g = vec![0.0; 2 * n];
            if use_sin {
                g[i] = dr * sin;
                g[n + i] = r_over_alpha * cos;
            } else {
                g[i] = dr * cos;
                g[n + i] = -r_over_alpha * sin;
            }
            g
        })
    };
    let xs = (0..n).map(|i| make(i, false)).collect();
    let ys = (0..n).map(|i| make(i, true)).collect();
    (xs, ys)
}

/// `max |{x^i, y^j} - delta_ij|, |{x^i, x^j}|, |{y^i, y^j}|` for arbitrary
/// candidate coordinate functions.
pub fn canonical_residuals_with(
    xs: &[ObservableFunction],
    ys: &[ObservableFunction],
    points: &[PhasePoint],
    cfg: &GeometryConfig,
) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for pt in points {
        let z = pt.coordinates();
        let gx = xs.iter().map(|f| f.gradient(&z, cfg)).collect::<Result<Vec<_>>>()?;
        let gy = ys.iter().map(|f| f.gradient(&z, cfg)).collect::<Result<Vec<_>>>()?;
        for i in 0..gx.len() {
            for j in 0..gy.len() {
                let delta = if i == j { 1.0 } else { 0.0 };
                worst = worst
                    .max((bracket_from_gradients(&gx[i], &gy[j]) - delta).abs())
                    .max(bracket_from_gradients(&gx[i], &gx[j]).abs())
                    .max(bracket_from_gradients(&gy[i], &gy[j]).abs());
            }
        }
    }
    Ok(worst)
}

/// Canonicity residual of the `(x, y)` chart using finite-difference brackets.
pub fn canonical_residuals(points: &[PhasePoint], cfg: &GeometryConfig) -> Result<f64> {
    let Some(first) = points.first() else { return Ok(0.0) };
    let (xs, ys) = xy_observables(first.dim(), cfg, false);
    canonical_residuals_with(&xs, &ys, points, cfg)
}

/// Canonicity residual of the `(x, y)` chart using closed-form gradients.
pub fn canonical_residuals_analytic(points: &[PhasePoint], cfg: &GeometryConfig) -> Result<f64> {
    let Some(first) = points.first() else { return Ok(0.0) };
    let (xs, ys) = xy_observables(first.dim(), cfg, true);
    canonical_residuals_with(&xs, &ys, points, cfg)
}
