//! Quadratic ensemble Hamiltonians and their flows.
//!
//! ```text
//! H = E(t) + sum_jk M_jk conj(psi_j) psi_k + N_jk psi_j psi_k + conj(N_jk) conj(psi_j) conj(psi_k)
//! ```
//!
//! with `M` Hermitian and `N` symmetric. The bracket on `(P, S)` gives
//! `{psi_j, conj psi_k} = -(i / alpha) delta_jk`, so the flow is
//! `d psi / dt = -(i / alpha) dH / d conj(psi) = -(i / alpha) (M psi + 2 conj(N) conj(psi))`.
//! Only `N = 0` keeps `H` invariant under a global phase and the flow unitary.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::config::GeometryConfig;
use crate::error::{Error, Result};
use crate::kahler::max_abs;
use crate::quantum::{dirac_product_direct, WaveVector};
use crate::symplectic::{to_xy, ObservableFunction, PhasePoint, RealPhaseCoordinates};

pub type CMatrix = DMatrix<Complex64>;

const STRUCTURE_TOLERANCE: f64 = 1e-14;
pub const HERMITIAN_TOLERANCE: f64 = 1e-12;
pub const MIDPOINT_TOLERANCE: f64 = 1e-13;
pub const MIDPOINT_MAX_ITERATIONS: usize = 50;

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

/// `max |M - M^H|`.
pub fn hermitian_defect(m: &CMatrix) -> f64 {
    max_abs(&(m - m.adjoint()))
}

/// The data `(E, M, N)` of a quadratic Hamiltonian.
#[derive(Clone)]
pub struct QuadraticHamiltonian {
    energy: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    m: CMatrix,
    nmat: CMatrix,
}

impl std::fmt::Debug for QuadraticHamiltonian {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("QuadraticHamiltonian")
            .field("m", &self.m)
            .field("nmat", &self.nmat)
            .finish()
    }
}

impl QuadraticHamiltonian {
    pub fn new(m: CMatrix, nmat: CMatrix) -> Result<Self> {
        let n = m.nrows();
        if m.ncols() != n {
            return Err(Error::Dimension {
                expected: n,
                found: m.ncols(),
            });
        }
        if nmat.shape() != (n, n) {
            return Err(Error::Dimension {
                expected: n,
                found: nmat.nrows(),
            });
        }
        let defect = hermitian_defect(&m);
        if defect > STRUCTURE_TOLERANCE {
            return Err(Error::Hermitian(defect));
        }
        let asym = max_abs(&(&nmat - nmat.transpose()));
        if asym > STRUCTURE_TOLERANCE {
            return Err(Error::Symmetric(asym));
        }
        Ok(Self {
            energy: Arc::new(|_| 0.0),
            m,
            nmat,
        })
    }

    /// `N = 0`.
    pub fn hermitian(m: CMatrix) -> Result<Self> {
        let n = m.nrows();
        Self::new(m, CMatrix::from_element(n, n, zero()))
    }

    pub fn with_energy(mut self, energy: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.energy = Arc::new(energy);
        self
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn m(&self) -> &CMatrix {
        &self.m
    }

    pub fn nmat(&self) -> &CMatrix {
        &self.nmat
    }

    pub fn energy(&self, t: f64) -> f64 {
        (self.energy)(t)
    }

    /// `dH / d conj(psi) = M psi + 2 conj(N) conj(psi)`.
    pub fn conjugate_gradient(&self, psi: &[Complex64]) -> Vec<Complex64> {
        let n = self.dim();
        (0..n)
            .map(|j| {
                (0..n)
                    .map(|k| self.m[(j, k)] * psi[k] + 2.0 * self.nmat[(j, k)].conj() * psi[k].conj())
                    .sum()
            })
            .collect()
    }

    /// `Q = sum N_jk psi_j psi_k`.
    pub fn pairing(&self, psi: &[Complex64]) -> Complex64 {
        let n = self.dim();
        let mut q = zero();
        for j in 0..n {
            for k in 0..n {
                q += self.nmat[(j, k)] * psi[j] * psi[k];
            }
        }
        q
    }
}

pub fn hamiltonian_value(h: &QuadraticHamiltonian, psi: &WaveVector, t: f64) -> Result<f64> {
    let n = h.dim();
    if psi.len() != n {
        return Err(Error::Dimension {
            expected: n,
            found: psi.len(),
        });
    }
    let v = psi.as_slice();
    let mut hermitian_part = zero();
    for j in 0..n {
        for k in 0..n {
            hermitian_part += h.m[(j, k)] * v[j].conj() * v[k];
        }
    }
    let q = h.pairing(v);
    let total = hermitian_part + q + q.conj();
    Ok(h.energy(t) + total.re)
}

/// `max_chi |H(psi e^{i chi}) - H(psi)|`.
pub fn gauge_variance(h: &QuadraticHamiltonian, psi: &WaveVector, chis: &[f64], t: f64) -> Result<f64> {
    let base = hamiltonian_value(h, psi, t)?;
    let mut worst: f64 = 0.0;
    for &chi in chis {
        worst = worst.max((hamiltonian_value(h, &psi.phase_shifted(chi), t)? - base).abs());
    }
    Ok(worst)
}

/// Phase angles at which a nonzero pairing `Q` always shows up: `chi = pi/2`
/// probes `Re Q`, `chi = pi/4` probes `Re Q + Im Q`.
pub const GAUGE_PROBE_ANGLES: [f64; 4] = [
    std::f64::consts::FRAC_PI_8,
    std::f64::consts::FRAC_PI_4,
    std::f64::consts::FRAC_PI_2,
    3.0 * std::f64::consts::FRAC_PI_4,
];

/// States on which the pairings determine a symmetric `N` completely:
/// `e_j`, `(e_j + e_k) / sqrt 2` and `(e_j + i e_k) / sqrt 2`.
pub fn gauge_spanning_states(n: usize) -> Vec<WaveVector> {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let mut states = Vec::new();
    for j in 0..n {
        states.push(WaveVector::basis(n, j));
        for k in j + 1..n {
            for phase in [Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)] {
                let mut v = vec![zero(); n];
                v[j] = Complex64::new(r, 0.0);
                v[k] = phase * r;
                states.push(WaveVector::new(v));
            }
        }
    }
    states
}

/// Largest gauge variance over `states` and `chis`.
pub fn max_gauge_variance(h: &QuadraticHamiltonian, states: &[WaveVector], chis: &[f64], t: f64) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for s in states {
        worst = worst.max(gauge_variance(h, s, chis, t)?);
    }
    Ok(worst)
}

fn check_hermitian(m: &CMatrix) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::Dimension {
            expected: m.nrows(),
            found: m.ncols(),
        });
    }
    let defect = hermitian_defect(m);
    if defect > HERMITIAN_TOLERANCE {
        return Err(Error::Hermitian(defect));
    }
    Ok(())
}

/// `U = exp(-i M t / alpha)` through the eigendecomposition of `M`.
pub fn propagator(m: &CMatrix, t: f64, cfg: &GeometryConfig) -> Result<CMatrix> {
    check_hermitian(m)?;
    let eig = m.clone().symmetric_eigen();
    let v = &eig.eigenvectors;
    let phases = CMatrix::from_diagonal(
        &eig.eigenvalues
            .map(|lambda| Complex64::from_polar(1.0, -lambda * t / cfg.alpha)),
    );
    Ok(v * phases * v.adjoint())
}

/// `psi(t) = exp(-i M t / alpha) psi0`.
pub fn evolve_exact(m: &CMatrix, psi0: &WaveVector, t: f64, cfg: &GeometryConfig) -> Result<WaveVector> {
    if psi0.len() != m.nrows() {
        return Err(Error::Dimension {
            expected: m.nrows(),
            found: psi0.len(),
        });
    }
    let u = propagator(m, t, cfg)?;
    Ok(WaveVector::from_dvector(&(u * psi0.to_dvector())))
}

/// `max |U^H U - 1|` for `U = exp(-i M t / alpha)`.
pub fn unitarity_check(m: &CMatrix, t: f64, cfg: &GeometryConfig) -> Result<f64> {
    let u = propagator(m, t, cfg)?;
    Ok(unitarity_defect(&u))
}

pub fn unitarity_defect(u: &CMatrix) -> f64 {
    let n = u.nrows();
    max_abs(&(u.adjoint() * u - CMatrix::identity(n, n)))
}

/// General matrix exponential by scaling and squaring of a truncated Taylor
/// series. Works for any square matrix, Hermitian or not.
pub fn matrix_exp_series(a: &CMatrix) -> CMatrix {
    let n = a.nrows();
    let norm = (0..n)
        .map(|j| a.column(j).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as i32
    } else {
        0
    };
    let scaled = a.map(|z| z / 2f64.powi(squarings));
    let mut term = CMatrix::identity(n, n);
    let mut sum = CMatrix::identity(n, n);
    for k in 1..=24 {
        term = &term * &scaled / Complex64::new(k as f64, 0.0);
        sum += &term;
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

/// `max |U^H U - 1|` for `U = exp(-i M t / alpha)` computed by the series route
/// without any Hermitian check. For non-Hermitian `M` the defect grows with `t`.
pub fn unitarity_residual_unchecked(m: &CMatrix, t: f64, cfg: &GeometryConfig) -> f64 {
    let generator = m.map(|z| z * Complex64::new(0.0, -t / cfg.alpha));
    unitarity_defect(&matrix_exp_series(&generator))
}

/// Sampled evolution. `reference`, when present, is a second state carried by
/// the same flow.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<WaveVector>,
    pub reference: Option<Vec<WaveVector>>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<&WaveVector> {
        self.states.last()
    }

    /// `(P, S)` of state `k`, with `S` on the principal branch and no
    /// normalization check.
    pub fn raw_phase(&self, k: usize, cfg: &GeometryConfig) -> (Vec<f64>, Vec<f64>) {
        let psi = &self.states[k];
        let p = psi.probabilities();
        let s = psi
            .as_slice()
            .iter()
            .map(|z| if z.norm() == 0.0 { 0.0 } else { cfg.alpha * z.arg() })
            .collect();
        (p, s)
    }

    /// Phase-point view; fails if a state has left the normalized sphere.
    pub fn phase_points(&self, cfg: &GeometryConfig) -> Result<Vec<PhasePoint>> {
        self.states
            .iter()
            .map(|psi| crate::quantum::inverse_madelung(psi, cfg))
            .collect()
    }
}

/// Exact evolution sampled at `t_k = k dt`, `k = 0..=steps`.
pub fn evolve_exact_trajectory(
    m: &CMatrix,
    psi0: &WaveVector,
    reference: Option<&WaveVector>,
    dt: f64,
    steps: usize,
    cfg: &GeometryConfig,
) -> Result<Trajectory> {
    if psi0.len() != m.nrows() {
        return Err(Error::Dimension {
            expected: m.nrows(),
            found: psi0.len(),
        });
    }
    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    let mut refs = reference.map(|_| Vec::with_capacity(steps + 1));
    for k in 0..=steps {
        let t = k as f64 * dt;
        let u = propagator(m, t, cfg)?;
        times.push(t);
        states.push(WaveVector::from_dvector(&(&u * psi0.to_dvector())));
        if let (Some(r0), Some(refs)) = (reference, refs.as_mut()) {
            refs.push(WaveVector::from_dvector(&(&u * r0.to_dvector())));
        }
    }
    Ok(Trajectory {
        times,
        states,
        reference: refs,
    })
}

/// Gradient `(dH/dx, dH/dy)` in the canonical chart `x + i y = sqrt(2 alpha) psi`.
pub fn hamiltonian_xy_gradient(
    h: &QuadraticHamiltonian,
    xy: &RealPhaseCoordinates,
    cfg: &GeometryConfig,
) -> (Vec<f64>, Vec<f64>) {
    let scale = 1.0 / cfg.sphere_scale();
    let psi: Vec<Complex64> =
        xy.x.iter()
            .zip(&xy.y)
            .map(|(&x, &y)| Complex64::new(x, y) * scale)
            .collect();
    let w = h.conjugate_gradient(&psi);
    let dx = w.iter().map(|w| 2.0 * w.re * scale).collect();
    let dy = w.iter().map(|w| 2.0 * w.im * scale).collect();
    (dx, dy)
}

/// Hamilton's equations `dx/dt = dH/dy`, `dy/dt = -dH/dx` stacked as `(x, y)`.
fn xy_velocity(h: &QuadraticHamiltonian, u: &[f64], cfg: &GeometryConfig) -> Vec<f64> {
    let n = u.len() / 2;
    let xy = RealPhaseCoordinates {
        x: u[..n].to_vec(),
        y: u[n..].to_vec(),
    };
    let (dx, dy) = hamiltonian_xy_gradient(h, &xy, cfg);
    dy.into_iter().chain(dx.into_iter().map(|v| -v)).collect()
}

/// One implicit midpoint step `u1 = u0 + dt f((u0 + u1) / 2)`, solved by fixed-point iteration.
fn midpoint_step(h: &QuadraticHamiltonian, u0: &[f64], dt: f64, step: usize, cfg: &GeometryConfig) -> Result<Vec<f64>> {
    let f0 = xy_velocity(h, u0, cfg);
    let mut u1: Vec<f64> = u0.iter().zip(&f0).map(|(u, f)| u + dt * f).collect();
    let scale = u0.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let mut increment = f64::INFINITY;
    for _ in 0..MIDPOINT_MAX_ITERATIONS {
        let mid: Vec<f64> = u0.iter().zip(&u1).map(|(a, b)| 0.5 * (a + b)).collect();
        let f = xy_velocity(h, &mid, cfg);
        let next: Vec<f64> = u0.iter().zip(&f).map(|(u, f)| u + dt * f).collect();
        increment = next.iter().zip(&u1).fold(0.0, |m, (a, b)| m.max((a - b).abs()));
        u1 = next;
        if increment <= MIDPOINT_TOLERANCE * scale {
            return Ok(u1);
        }
    }
    if increment.is_finite() && increment <= MIDPOINT_TOLERANCE * scale {
        Ok(u1)
    } else {
        Err(Error::Nonconvergence { step, increment })
    }
}

fn xy_to_wave(u: &[f64], cfg: &GeometryConfig) -> WaveVector {
    let n = u.len() / 2;
    let scale = 1.0 / cfg.sphere_scale();
    WaveVector::from_parts(
        &u[..n].iter().map(|v| v * scale).collect::<Vec<_>>(),
        &u[n..].iter().map(|v| v * scale).collect::<Vec<_>>(),
    )
}

fn wave_to_xy(psi: &WaveVector, cfg: &GeometryConfig) -> Vec<f64> {
    psi.realified().into_iter().map(|v| v * cfg.sphere_scale()).collect()
}

/// Integrates the flow of `h` from `pt0` with the implicit midpoint rule in the
/// canonical `(x, y)` chart, which stays regular where some `P^i` vanish.
pub fn evolve_symplectic(
    h: &QuadraticHamiltonian,
    pt0: &PhasePoint,
    dt: f64,
    steps: usize,
    cfg: &GeometryConfig,
) -> Result<Trajectory> {
    evolve_symplectic_with_reference(h, pt0, None, dt, steps, cfg)
}

pub fn evolve_symplectic_with_reference(
    h: &QuadraticHamiltonian,
    pt0: &PhasePoint,
    reference: Option<&WaveVector>,
    dt: f64,
    steps: usize,
    cfg: &GeometryConfig,
) -> Result<Trajectory> {
    if pt0.dim() != h.dim() {
        return Err(Error::Dimension {
            expected: h.dim(),
            found: pt0.dim(),
        });
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidConfig(format!("time step must be positive, got {dt}")));
    }
    let xy = to_xy(pt0, cfg);
    let mut u: Vec<f64> = xy.x.iter().chain(&xy.y).copied().collect();
    let mut r = reference.map(|psi| wave_to_xy(psi, cfg));

    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    let mut refs = r.as_ref().map(|_| Vec::with_capacity(steps + 1));
    times.push(0.0);
    states.push(xy_to_wave(&u, cfg));
    if let (Some(r), Some(refs)) = (&r, refs.as_mut()) {
        refs.push(xy_to_wave(r, cfg));
    }
    for k in 1..=steps {
        u = midpoint_step(h, &u, dt, k, cfg)?;
        times.push(k as f64 * dt);
        states.push(xy_to_wave(&u, cfg));
        if let (Some(rv), Some(refs)) = (r.as_mut(), refs.as_mut()) {
            *rv = midpoint_step(h, rv, dt, k, cfg)?;
            refs.push(xy_to_wave(rv, cfg));
        }
    }
    Ok(Trajectory {
        times,
        states,
        reference: refs,
    })
}

/// Drift of the quantities a unitary flow must conserve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConservationReport {
    /// `max |sum |psi|^2 - 1|`
    pub norm_drift: f64,
    /// `max |H(psi(t)) - H(psi(0))|`, with `E` frozen at `t = 0`.
    pub energy_drift: f64,
    /// `max |<ref(t)|psi(t)> - <ref(0)|psi(0)>|` when a reference state was carried.
    pub dirac_drift: Option<f64>,
}

impl ConservationReport {
    pub const DEFAULT_TOLERANCE: f64 = 1e-9;

    pub fn passes(&self, tolerance: f64) -> bool {
        self.norm_drift < tolerance && self.energy_drift < tolerance && self.dirac_drift.is_none_or(|d| d < tolerance)
    }
}

pub fn conservation_report(traj: &Trajectory, h: &QuadraticHamiltonian) -> Result<ConservationReport> {
    let Some(first) = traj.states.first() else {
        return Err(Error::InvalidConfig("empty trajectory".into()));
    };
    let e0 = hamiltonian_value(h, first, 0.0)?;
    let mut norm_drift: f64 = 0.0;
    let mut energy_drift: f64 = 0.0;
    for psi in &traj.states {
        norm_drift = norm_drift.max((psi.norm_sqr() - 1.0).abs());
        energy_drift = energy_drift.max((hamiltonian_value(h, psi, 0.0)? - e0).abs());
    }
    let dirac_drift = match &traj.reference {
        Some(refs) => {
            let d0 = dirac_product_direct(&refs[0], first)?;
            let mut worst: f64 = 0.0;
            for (r, psi) in refs.iter().zip(&traj.states) {
                worst = worst.max((dirac_product_direct(r, psi)? - d0).norm());
            }
            Some(worst)
        }
        None => None,
    };
    Ok(ConservationReport {
        norm_drift,
        energy_drift,
        dirac_drift,
    })
}

/// `H` as a real observable on the unconstrained `(P, S)` chart at time `t`.
pub fn hamiltonian_observable(h: &QuadraticHamiltonian, cfg: &GeometryConfig, t: f64) -> ObservableFunction {
    let (h, alpha) = (h.clone(), cfg.alpha);
    ObservableFunction::new(move |z| {
        let n = z.len() / 2;
        let psi: Vec<Complex64> = (0..n)
            .map(|i| Complex64::from_polar(z[i].sqrt(), z[n + i] / alpha))
            .collect();
        hamiltonian_value(&h, &WaveVector::new(psi), t).unwrap_or(f64::NAN)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{madelung, wave_component_observable};
    use crate::sampling;
    use crate::simplex::ProbabilityVector;
    use crate::symplectic::complex_poisson_bracket;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn cfg(alpha: f64, n: usize) -> GeometryConfig {
        GeometryConfig::new(alpha, n).unwrap()
    }

    fn identity(n: usize) -> CMatrix {
        CMatrix::identity(n, n)
    }

    fn exchange() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)])
    }

    fn zeros(n: usize) -> CMatrix {
        CMatrix::from_element(n, n, c(0.0, 0.0))
    }

    #[test]
    fn construction_validates_structure() {
        let mut m = identity(2);
        m[(0, 1)] = c(0.0, 1.0);
        assert!(matches!(QuadraticHamiltonian::hermitian(m), Err(Error::Hermitian(_))));
        let mut n = zeros(2);
        n[(0, 1)] = c(1.0, 0.0);
        assert!(matches!(
            QuadraticHamiltonian::new(identity(2), n),
            Err(Error::Symmetric(_))
        ));
        assert!(QuadraticHamiltonian::new(identity(2), zeros(3)).is_err());
    }

    #[test]
    fn hamiltonian_value_examples() {
        let psi = sampling::random_wave(3, &mut sampling::seeded(1));
        let h = QuadraticHamiltonian::hermitian(identity(3)).unwrap();
        assert!((hamiltonian_value(&h, &psi, 0.0).unwrap() - 1.0).abs() < 1e-14);

        let h = QuadraticHamiltonian::new(zeros(2), identity(2)).unwrap();
        assert_eq!(hamiltonian_value(&h, &WaveVector::basis(2, 0), 0.0).unwrap(), 2.0);

        let h = QuadraticHamiltonian::hermitian(zeros(2)).unwrap().with_energy(|t| t);
        assert_eq!(hamiltonian_value(&h, &WaveVector::basis(2, 1), 2.5).unwrap(), 2.5);
        assert!(hamiltonian_value(&h, &WaveVector::basis(3, 1), 0.0).is_err());
    }

    #[test]
    fn gauge_variance_examples() {
        let mut rng = sampling::seeded(2);
        let m = sampling::random_hermitian(4, &mut rng);
        let h = QuadraticHamiltonian::hermitian(m)
            .unwrap()
            .with_energy(|t| 3.0 * t.sin());
        let psi = sampling::random_wave(4, &mut rng);
        assert!(gauge_variance(&h, &psi, &[0.1, 1.0, 2.5, -4.0], 0.7).unwrap() < 1e-13);

        let h = QuadraticHamiltonian::new(zeros(2), identity(2)).unwrap();
        let v = gauge_variance(&h, &WaveVector::basis(2, 0), &[PI / 4.0], 0.0).unwrap();
        assert!((v - 2.0).abs() < 1e-15);
    }

    #[test]
    fn exact_evolution_examples() {
        let g = cfg(0.5, 2);
        let psi0 = sampling::random_wave(2, &mut sampling::seeded(3));
        assert_eq!(evolve_exact(&zeros(2), &psi0, 1.3, &g).unwrap(), psi0);

        let t = 0.9;
        let out = evolve_exact(&identity(2), &psi0, t, &g).unwrap();
        let expected = psi0.phase_shifted(-t / g.alpha);
        for (a, b) in out.as_slice().iter().zip(expected.as_slice()) {
            assert!((a - b).norm() < 1e-14);
        }

        let out = evolve_exact(&exchange(), &WaveVector::basis(2, 0), PI * g.alpha / 2.0, &g).unwrap();
        assert!((out.as_slice()[0]).norm() < 1e-15);
        assert!((out.as_slice()[1] - c(0.0, -1.0)).norm() < 1e-15);

        let mut bad = identity(2);
        bad[(1, 0)] = c(0.5, 0.0);
        assert!(matches!(evolve_exact(&bad, &psi0, 1.0, &g), Err(Error::Hermitian(_))));
    }

    #[test]
    fn eigen_and_series_propagators_agree() {
        let g = cfg(0.7, 5);
        let m = sampling::random_hermitian(5, &mut sampling::seeded(4));
        let t = 2.3;
        let eigen = propagator(&m, t, &g).unwrap();
        let series = matrix_exp_series(&m.map(|z| z * c(0.0, -t / g.alpha)));
        assert!(max_abs(&(eigen - series)) < 1e-11);
    }

    #[test]
    fn unitarity_examples() {
        let g = cfg(0.5, 3);
        assert_eq!(unitarity_check(&zeros(3), 5.0, &g).unwrap(), 0.0);
        let m = sampling::random_hermitian(8, &mut sampling::seeded(5));
        assert!(unitarity_check(&m, 3.0, &g).unwrap() < 1e-12);

        let mut bad = identity(2);
        bad[(0, 1)] = c(0.4, 0.0);
        assert!(unitarity_check(&bad, 1.0, &g).is_err());
        let short = unitarity_residual_unchecked(&bad, 0.1, &g);
        let long = unitarity_residual_unchecked(&bad, 1.0, &g);
        assert!(short > 1e-3 && long > short, "{short} {long}");
    }

    #[test]
    fn global_phase_flow_in_canonical_chart() {
        let g = cfg(0.5, 3);
        let h = QuadraticHamiltonian::hermitian(identity(3)).unwrap();
        let pt0 = PhasePoint::at_rest(ProbabilityVector::new(vec![0.2, 0.3, 0.5]).unwrap());
        let (dt, steps) = (1e-4, 100);
        let traj = evolve_symplectic(&h, &pt0, dt, steps, &g).unwrap();
        for k in 0..=steps {
            let (p, s) = traj.raw_phase(k, &g);
            for (a, b) in p.iter().zip(pt0.p.as_slice()) {
                assert!((a - b).abs() < 1e-10);
            }
            for si in s {
                assert!((si + traj.times[k]).abs() < 1e-10, "k={k}: {si}");
            }
        }
    }

    #[test]
    fn canonical_gradient_matches_finite_differences() {
        let g = cfg(0.8, 3);
        let mut rng = sampling::seeded(6);
        let h = QuadraticHamiltonian::new(
            sampling::random_hermitian(3, &mut rng),
            sampling::random_complex_symmetric(3, &mut rng),
        )
        .unwrap();
        let psi = sampling::random_wave(3, &mut rng);
        let scale = g.sphere_scale();
        let x: Vec<f64> = psi.as_slice().iter().map(|z| z.re * scale).collect();
        let y: Vec<f64> = psi.as_slice().iter().map(|z| z.im * scale).collect();
        let (dx, dy) = hamiltonian_xy_gradient(
            &h,
            &RealPhaseCoordinates {
                x: x.clone(),
                y: y.clone(),
            },
            &g,
        );
        let value = |x: &[f64], y: &[f64]| {
            let psi = WaveVector::from_parts(
                &x.iter().map(|v| v / scale).collect::<Vec<_>>(),
                &y.iter().map(|v| v / scale).collect::<Vec<_>>(),
            );
            hamiltonian_value(&h, &psi, 0.0).unwrap()
        };
        let step = 1e-6;
        for k in 0..3 {
            let (mut xp, mut xm) = (x.clone(), x.clone());
            xp[k] += step;
            xm[k] -= step;
            assert!(((value(&xp, &y) - value(&xm, &y)) / (2.0 * step) - dx[k]).abs() < 1e-7);
            let (mut yp, mut ym) = (y.clone(), y.clone());
            yp[k] += step;
            ym[k] -= step;
            assert!(((value(&x, &yp) - value(&x, &ym)) / (2.0 * step) - dy[k]).abs() < 1e-7);
        }
    }

    #[test]
    fn bracket_with_hamiltonian_generates_schrodinger_flow() {
        let g = cfg(0.5, 3);
        let mut rng = sampling::seeded(7);
        let m = sampling::random_hermitian(3, &mut rng);
        let h = QuadraticHamiltonian::hermitian(m.clone()).unwrap();
        let observable = hamiltonian_observable(&h, &g, 0.0);
        let hc = crate::symplectic::ComplexObservable {
            re: observable,
            im: ObservableFunction::new(|_| 0.0),
        };
        for _ in 0..5 {
            let p = sampling::random_interior_probability(3, 0.05, &mut rng);
            let pt = PhasePoint::new(p, sampling::random_phases(3, 1.0, &mut rng)).unwrap();
            let psi = madelung(&pt, &g).to_dvector();
            let expected = (&m * &psi).map(|z| z * c(0.0, -1.0 / g.alpha));
            for j in 0..3 {
                let psi_j = wave_component_observable(3, j, &g, true);
                let got = complex_poisson_bracket(&psi_j, &hc, &pt, &g).unwrap();
                assert!((got - expected[j]).norm() < 1e-6, "{got} vs {}", expected[j]);
            }
        }
    }

    #[test]
    fn trajectory_phase_views() {
        let g = cfg(0.5, 2);
        let h = QuadraticHamiltonian::hermitian(exchange()).unwrap();
        let pt0 = PhasePoint::at_rest(ProbabilityVector::basis(2, 0));
        let traj = evolve_symplectic(&h, &pt0, 1e-3, 10, &g).unwrap();
        assert_eq!(traj.len(), 11);
        assert_eq!(traj.phase_points(&g).unwrap().len(), 11);
        let report = conservation_report(&traj, &h).unwrap();
        assert!(report.passes(1e-12), "{report:?}");
        assert!(evolve_symplectic(&h, &pt0, 0.0, 10, &g).is_err());
    }
}
