//! Information geometry of the discrete probability simplex.
//!
//! The information metric `G_ij = alpha / (2 P^i) delta_ij` is singular on the
//! boundary of the simplex, so every differential operation here rejects
//! components below [`GeometryConfig::boundary_floor`]. The closed-form
//! statistical distance is regular everywhere and accepts boundary points.
//!
//! Under `X^i = sqrt(P^i)` the simplex maps to the positive orthant of the unit
//! sphere and the metric becomes `2 alpha` times the round metric, so the
//! statistical distance is `sqrt(2 alpha)` times a great-circle angle.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::GeometryConfig;
use crate::error::{Error, Result};
use crate::quadrature;

const SUM_TOLERANCE: f64 = 1e-12;

/// A point of the probability simplex.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityVector {
    p: Vec<f64>,
}

impl ProbabilityVector {
    pub fn new(p: Vec<f64>) -> Result<Self> {
        if p.is_empty() {
            return Err(Error::InvalidProbability("empty vector".into()));
        }
        if let Some((i, v)) = p.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::InvalidProbability(format!(
                "component {i} = {v} is negative or not finite"
            )));
        }
        let sum: f64 = p.iter().sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::InvalidProbability(format!("components sum to {sum}")));
        }
        Ok(Self { p })
    }

    /// Rescales non-negative weights onto the simplex.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        let sum: f64 = weights.iter().sum();
        if !(sum > 0.0 && sum.is_finite()) {
            return Err(Error::InvalidProbability(format!("weights sum to {sum}")));
        }
        Self::new(weights.into_iter().map(|w| w / sum).collect())
    }

    pub fn uniform(n: usize) -> Self {
        Self {
            p: vec![1.0 / n as f64; n],
        }
    }

    /// The vertex `e_k`.
    pub fn basis(n: usize, k: usize) -> Self {
        let mut p = vec![0.0; n];
        p[k] = 1.0;
        Self { p }
    }

    /// The vertex `e_k` moved inside the simplex so every component is at least `floor`.
    pub fn nudged_basis(n: usize, k: usize, floor: f64) -> Self {
        let mut p = vec![floor; n];
        p[k] = 1.0 - floor * (n - 1) as f64;
        Self { p }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.p
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.p
    }

    pub fn min_component(&self) -> f64 {
        self.p.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Fails with [`Error::Boundary`] on the first component below `floor`.
    pub fn require_interior(&self, floor: f64) -> Result<()> {
        match self.p.iter().enumerate().find(|(_, &v)| v < floor) {
            Some((index, &value)) => Err(Error::Boundary { index, value, floor }),
            None => Ok(()),
        }
    }
}

/// Square-root coordinates `X^i = sqrt(P^i)`: a point on the unit sphere.
#[derive(Debug, Clone, PartialEq)]
pub struct SqrtCoordinates {
    x: Vec<f64>,
}

impl SqrtCoordinates {
    pub fn new(x: Vec<f64>) -> Result<Self> {
        if x.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::InvalidProbability(
                "square-root coordinates must be non-negative".into(),
            ));
        }
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::InvalidProbability(format!(
                "square-root coordinates have norm {norm}"
            )));
        }
        Ok(Self { x })
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.x
    }

    /// Inverse of [`sqrt_embedding`].
    pub fn to_probability(&self) -> ProbabilityVector {
        ProbabilityVector {
            p: self.x.iter().map(|v| v * v).collect(),
        }
    }
}

/// A sampled curve `t -> P(t)` on `[0, 1]`.
#[derive(Debug, Clone)]
pub struct SimplexPath {
    samples: Vec<ProbabilityVector>,
    grid: Vec<f64>,
}

impl SimplexPath {
    pub fn new(samples: Vec<ProbabilityVector>, grid: Vec<f64>) -> Result<Self> {
        quadrature::validate_unit_grid(&grid, samples.len())?;
        let n = samples[0].len();
        if let Some(bad) = samples.iter().find(|s| s.len() != n) {
            return Err(Error::Dimension {
                expected: n,
                found: bad.len(),
            });
        }
        Ok(Self { samples, grid })
    }

    /// Samples `curve` on `grid`.
    pub fn from_fn(grid: Vec<f64>, curve: impl Fn(f64) -> Result<ProbabilityVector>) -> Result<Self> {
        let samples = grid.iter().map(|&t| curve(t)).collect::<Result<Vec<_>>>()?;
        Self::new(samples, grid)
    }

    pub fn samples(&self) -> &[ProbabilityVector] {
        &self.samples
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }
}

/// `diag(alpha / (2 P^i))`.
pub fn information_metric(p: &ProbabilityVector, cfg: &GeometryConfig) -> Result<DMatrix<f64>> {
    p.require_interior(cfg.boundary_floor)?;
    let diag: Vec<f64> = p.as_slice().iter().map(|&pi| cfg.alpha / (2.0 * pi)).collect();
    Ok(DMatrix::from_diagonal(&nalgebra::DVector::from_vec(diag)))
}

pub fn sqrt_embedding(p: &ProbabilityVector) -> SqrtCoordinates {
    SqrtCoordinates {
        x: p.as_slice().iter().map(|v| v.sqrt()).collect(),
    }
}

/// Length of a sampled curve under the information metric.
///
/// Velocities come from second-order centered differences on the path grid and
/// the speed `sqrt(G_ij dP^i dP^j)` is integrated with the trapezoidal rule.
pub fn curve_length(path: &SimplexPath, cfg: &GeometryConfig) -> Result<f64> {
    for s in &path.samples {
        s.require_interior(cfg.boundary_floor)?;
    }
    let values: Vec<Vec<f64>> = path.samples.iter().map(|s| s.p.clone()).collect();
    let velocities = quadrature::centered_velocities(&path.grid, &values);
    let speed: Vec<f64> = path
        .samples
        .iter()
        .zip(&velocities)
        .map(|(s, v)| {
            let q: f64 = s.p.iter().zip(v).map(|(pi, vi)| vi * vi / pi).sum();
            (0.5 * cfg.alpha * q).sqrt()
        })
        .collect();
    Ok(quadrature::trapezoid(&path.grid, &speed))
}

/// `sqrt(2 alpha) * arccos(sum_i sqrt(P_A^i P_B^i))`, the Bhattacharyya angle scaled
/// by the metric constant.
///
/// The angle is evaluated as `2 asin(|X_A - X_B| / 2)` on the square-root
/// embedding, which equals the arccos form but keeps full precision for
/// nearby points.
pub fn statistical_distance(a: &ProbabilityVector, b: &ProbabilityVector, cfg: &GeometryConfig) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Dimension {
            expected: a.len(),
            found: b.len(),
        });
    }
    let chord =
        a.p.iter()
            .zip(&b.p)
            .map(|(x, y)| (x.sqrt() - y.sqrt()).powi(2))
            .sum::<f64>()
            .sqrt();
    Ok(cfg.sphere_scale() * 2.0 * (0.5 * chord).clamp(0.0, 1.0).asin())
}

/// Settings of the brute-force geodesic search.
#[derive(Debug, Clone, Copy)]
pub struct GeodesicOracle {
    pub segments: usize,
    pub iterations: usize,
    pub seed: u64,
}

/// Result of a geodesic search.
#[derive(Debug, Clone)]
pub struct OracleOutcome {
    pub length: f64,
    pub iterations: usize,
    pub initial_length: f64,
    pub waypoints: Vec<Vec<f64>>,
}

const SEGMENT_QUADRATURE_ORDER: usize = 12;
const MAX_HALVINGS: usize = 60;
const INITIAL_JITTER: f64 = 1e-3;

/// Per-segment quadrature in the variable `v`, with `s = (1 - cos(pi v)) / 2`.
/// The substitution absorbs the `1/sqrt(P)` behavior of the metric when a
/// segment starts or ends next to the boundary.
struct SegmentRule {
    s: Vec<f64>,
    ds: Vec<f64>,
}

impl SegmentRule {
    fn new() -> Self {
        use std::f64::consts::PI;
        let (x, w) = quadrature::gauss_legendre(SEGMENT_QUADRATURE_ORDER);
        let (mut s, mut ds) = (Vec::new(), Vec::new());
        for (xi, wi) in x.iter().zip(&w) {
            let v = 0.5 * (xi + 1.0);
            s.push(0.5 * (1.0 - (PI * v).cos()));
            ds.push(0.5 * wi * 0.5 * PI * (PI * v).sin());
        }
        Self { s, ds }
    }

    /// Metric length of the straight segment `from -> to` and its gradient
    /// with respect to both endpoints (accumulated into `grad_from`, `grad_to`).
    fn segment(&self, from: &[f64], to: &[f64], alpha: f64, grad: Option<(&mut [f64], &mut [f64])>) -> f64 {
        let n = from.len();
        let mut length = 0.0;
        let mut gf = vec![0.0; n];
        let mut gt = vec![0.0; n];
        for (&s, &ds) in self.s.iter().zip(&self.ds) {
            let mut q = 0.0;
            for i in 0..n {
                let d = to[i] - from[i];
                let p = from[i] + s * d;
                q += d * d / p;
            }
            let speed = (0.5 * alpha * q).sqrt();
            length += speed * ds;
            if speed > 0.0 {
                let scale = ds * 0.5 * alpha / (2.0 * speed);
                for i in 0..n {
                    let d = to[i] - from[i];
                    let p = from[i] + s * d;
                    let r = d / p;
                    gt[i] += scale * (2.0 * r - r * r * s);
                    gf[i] += scale * (-2.0 * r - r * r * (1.0 - s));
                }
            }
        }
        if let Some((g_from, g_to)) = grad {
            for i in 0..n {
                g_from[i] += gf[i];
                g_to[i] += gt[i];
            }
        }
        length
    }

    fn polyline(&self, points: &[Vec<f64>], alpha: f64, grad: Option<&mut [Vec<f64>]>) -> f64 {
        match grad {
            None => points.windows(2).map(|w| self.segment(&w[0], &w[1], alpha, None)).sum(),
            Some(grad) => {
                for g in grad.iter_mut() {
                    g.iter_mut().for_each(|v| *v = 0.0);
                }
                let mut total = 0.0;
                for k in 0..points.len() - 1 {
                    let (head, tail) = grad.split_at_mut(k + 1);
                    total += self.segment(&points[k], &points[k + 1], alpha, Some((&mut head[k], &mut tail[0])));
                }
                total
            }
        }
    }
}

fn project_to_simplex(p: &mut [f64], floor: f64) {
    for v in p.iter_mut() {
        *v = v.max(floor);
    }
    let sum: f64 = p.iter().sum();
    p.iter_mut().for_each(|v| *v /= sum);
}

impl GeodesicOracle {
    pub fn new(segments: usize, iterations: usize, seed: u64) -> Result<Self> {
        if segments < 4 {
            return Err(Error::InvalidConfig(format!(
                "oracle needs at least 4 segments, got {segments}"
            )));
        }
        Ok(Self {
            segments,
            iterations,
            seed,
        })
    }

    /// Minimizes the metric length of a piecewise-linear path between the
    /// endpoints over its interior waypoints.
    ///
    /// Each segment is measured with the exact length functional (quadrature
    /// along the straight segment), so every iterate is the length of an actual
    /// curve and bounds the geodesic distance from above. Steps follow the
    /// metric gradient restricted to the simplex tangent space, are projected
    /// back by clip-and-renormalize and accepted only if the length decreases
    /// (backtracking).
    pub fn run(&self, a: &ProbabilityVector, b: &ProbabilityVector, cfg: &GeometryConfig) -> Result<OracleOutcome> {
        if a.len() != b.len() {
            return Err(Error::Dimension {
                expected: a.len(),
                found: b.len(),
            });
        }
        a.require_interior(cfg.boundary_floor)?;
        b.require_interior(cfg.boundary_floor)?;
        let n = a.len();
        let m = self.segments + 1;
        let rule = SegmentRule::new();
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);

        let mut points: Vec<Vec<f64>> = (0..m)
            .map(|k| {
                let t = k as f64 / self.segments as f64;
                a.p.iter().zip(&b.p).map(|(x, y)| (1.0 - t) * x + t * y).collect()
            })
            .collect();
        if a != b {
            for p in points[1..m - 1].iter_mut() {
                for v in p.iter_mut() {
                    *v *= 1.0 + INITIAL_JITTER * (rng.random::<f64>() - 0.5);
                }
                project_to_simplex(p, cfg.boundary_floor);
            }
        }

        let mut grad = vec![vec![0.0; n]; m];
        let mut length = rule.polyline(&points, cfg.alpha, Some(&mut grad));
        let initial_length = length;
        if !length.is_finite() {
            return Err(Error::Convergence { iterations: 0, length });
        }
        if length == 0.0 {
            return Ok(OracleOutcome {
                length,
                iterations: 0,
                initial_length,
                waypoints: points,
            });
        }

        let mut step = 1.0;
        let mut iterations = 0;
        let mut candidate = points.clone();
        let mut candidate_grad = grad.clone();
        while iterations < self.iterations {
            // Riemannian gradient on the simplex: G^{-1} (grad - <P, grad>).
            let direction: Vec<Vec<f64>> = points
                .iter()
                .zip(&grad)
                .map(|(p, g)| {
                    let mean: f64 = p.iter().zip(g).map(|(pi, gi)| pi * gi).sum();
                    p.iter()
                        .zip(g)
                        .map(|(pi, gi)| 2.0 * pi / cfg.alpha * (gi - mean))
                        .collect()
                })
                .collect();

            let mut accepted = None;
            for _ in 0..MAX_HALVINGS {
                for k in 1..m - 1 {
                    for i in 0..n {
                        candidate[k][i] = points[k][i] - step * direction[k][i];
                    }
                    project_to_simplex(&mut candidate[k], cfg.boundary_floor);
                }
                let trial = rule.polyline(&candidate, cfg.alpha, Some(&mut candidate_grad));
                if trial.is_nan() {
                    return Err(Error::Convergence { iterations, length });
                }
                if trial < length {
                    accepted = Some(trial);
                    break;
                }
                step *= 0.5;
            }
            let Some(trial) = accepted else { break };
            if !(trial < length) {
                return Err(Error::Convergence { iterations, length });
            }
            let decrease = length - trial;
            std::mem::swap(&mut points, &mut candidate);
            std::mem::swap(&mut grad, &mut candidate_grad);
            length = trial;
            iterations += 1;
            step *= 2.0;
            if decrease <= 1e-15 * length {
                break;
            }
        }
        Ok(OracleOutcome {
            length,
            iterations,
            initial_length,
            waypoints: points,
        })
    }
}

/// Brute-force statistical distance: the minimized length of a discretized path.
pub fn geodesic_distance_oracle(
    a: &ProbabilityVector,
    b: &ProbabilityVector,
    cfg: &GeometryConfig,
    segments: usize,
    iterations: usize,
    seed: u64,
) -> Result<f64> {
    Ok(GeodesicOracle::new(segments, iterations, seed)?.run(a, b, cfg)?.length)
}
