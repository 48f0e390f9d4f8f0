//! Complex (wave-function) coordinates `psi^i = sqrt(P^i) exp(i S^i / alpha)`.

use nalgebra::DVector;
use num_complex::Complex64;

use crate::config::GeometryConfig;
use crate::error::{Error, Result};
use crate::kahler;
use crate::quadrature;
use crate::simplex::ProbabilityVector;
use crate::symplectic::{ComplexObservable, ObservableFunction, PhasePoint};

const NORM_TOLERANCE: f64 = 1e-12;

/// `n` complex amplitudes. Normalization is checked only by the operations
/// that need it, so unnormalized vectors (e.g. from non-unitary flows) can be
/// represented.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveVector {
    psi: Vec<Complex64>,
}

impl WaveVector {
    pub fn new(psi: Vec<Complex64>) -> Self {
        Self { psi }
    }

    pub fn from_parts(re: &[f64], im: &[f64]) -> Self {
        Self {
            psi: re.iter().zip(im).map(|(&a, &b)| Complex64::new(a, b)).collect(),
        }
    }

    pub fn basis(n: usize, k: usize) -> Self {
        let mut psi = vec![Complex64::new(0.0, 0.0); n];
        psi[k] = Complex64::new(1.0, 0.0);
        Self { psi }
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.psi
    }

    pub fn len(&self) -> usize {
        self.psi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.psi.is_empty()
    }

    pub fn to_dvector(&self) -> DVector<Complex64> {
        DVector::from_column_slice(&self.psi)
    }

    pub fn from_dvector(v: &DVector<Complex64>) -> Self {
        Self {
            psi: v.iter().copied().collect(),
        }
    }

    /// `sum_i |psi^i|^2`.
    pub fn norm_sqr(&self) -> f64 {
        self.psi.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn require_normalized(&self) -> Result<()> {
        let norm = self.norm_sqr();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::InvalidProbability(format!(
                "wave vector has squared norm {norm}"
            )));
        }
        Ok(())
    }

    /// `psi e^{i chi}`.
    pub fn phase_shifted(&self, chi: f64) -> Self {
        let u = Complex64::from_polar(1.0, chi);
        Self {
            psi: self.psi.iter().map(|z| z * u).collect(),
        }
    }

    /// `|psi^i|^2` without normalization checks.
    pub fn probabilities(&self) -> Vec<f64> {
        self.psi.iter().map(|z| z.norm_sqr()).collect()
    }

    /// Real and imaginary parts stacked as `(Re psi, Im psi)`.
    pub fn realified(&self) -> Vec<f64> {
        self.psi
            .iter()
            .map(|z| z.re)
            .chain(self.psi.iter().map(|z| z.im))
            .collect()
    }
}

/// A sampled curve `t -> psi(t)` on `[0, 1]`.
#[derive(Debug, Clone)]
pub struct WavePath {
    samples: Vec<WaveVector>,
    grid: Vec<f64>,
}

impl WavePath {
    pub fn new(samples: Vec<WaveVector>, grid: Vec<f64>) -> Result<Self> {
        quadrature::validate_unit_grid(&grid, samples.len())?;
        let n = samples[0].len();
        for s in &samples {
            if s.len() != n {
                return Err(Error::Dimension {
                    expected: n,
                    found: s.len(),
                });
            }
            s.require_normalized()?;
        }
        Ok(Self { samples, grid })
    }

    pub fn from_fn(grid: Vec<f64>, curve: impl Fn(f64) -> WaveVector) -> Result<Self> {
        let samples = grid.iter().map(|&t| curve(t)).collect();
        Self::new(samples, grid)
    }

    pub fn samples(&self) -> &[WaveVector] {
        &self.samples
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }
}

pub fn madelung(pt: &PhasePoint, cfg: &GeometryConfig) -> WaveVector {
    WaveVector {
        psi: pt
            .p
            .as_slice()
            .iter()
            .zip(&pt.s)
            .map(|(&p, &s)| Complex64::from_polar(p.sqrt(), s / cfg.alpha))
            .collect(),
    }
}

/// `P^i = |psi^i|^2`, `S^i = alpha arg(psi^i)` with `arg` in `(-pi, pi]`;
/// vanishing amplitudes get `S^i = 0`.
pub fn inverse_madelung(psi: &WaveVector, cfg: &GeometryConfig) -> Result<PhasePoint> {
    psi.require_normalized()?;
    let s = psi
        .psi
        .iter()
        .map(|z| {
            if *z == Complex64::new(0.0, 0.0) {
                0.0
            } else {
                cfg.alpha * z.arg()
            }
        })
        .collect();
    PhasePoint::new(ProbabilityVector::new(psi.probabilities())?, s)
}

/// `sum_i conj(phi^i) varphi^i`.
pub fn dirac_product(phi: &WaveVector, varphi: &WaveVector, cfg: &GeometryConfig) -> Result<Complex64> {
    let direct = dirac_product_direct(phi, varphi)?;
    if cfg!(debug_assertions) {
        let via_kahler = dirac_product_kahler(phi, varphi, cfg)?;
        let scale = 1.0f64.max((phi.norm_sqr() * varphi.norm_sqr()).sqrt());
        debug_assert!(
            (direct - via_kahler).norm() <= 1e-14 * scale,
            "Dirac product routes disagree: {direct} vs {via_kahler}"
        );
    }
    Ok(direct)
}

pub fn dirac_product_direct(phi: &WaveVector, varphi: &WaveVector) -> Result<Complex64> {
    if phi.len() != varphi.len() {
        return Err(Error::Dimension {
            expected: phi.len(),
            found: varphi.len(),
        });
    }
    Ok(phi.psi.iter().zip(&varphi.psi).map(|(a, b)| a.conj() * b).sum())
}

/// `(1/2) (phi, conj phi)^T [g + i Omega] (varphi, conj varphi)` with the constant
/// flat tensors of the `(psi, conj psi)` chart, `alpha` scaled out.
pub fn dirac_product_kahler(phi: &WaveVector, varphi: &WaveVector, cfg: &GeometryConfig) -> Result<Complex64> {
    let n = phi.len();
    if varphi.len() != n {
        return Err(Error::Dimension {
            expected: n,
            found: varphi.len(),
        });
    }
    let triple = kahler::complex_coordinate_triple(cfg, n);
    let i = Complex64::new(0.0, 1.0);
    let form = (&triple.g + triple.omega.map(|w| i * w)).map(|w| w / cfg.alpha);
    let stack = |v: &WaveVector| -> DVector<Complex64> {
        DVector::from_iterator(2 * n, v.psi.iter().copied().chain(v.psi.iter().map(|z| z.conj())))
    };
    let (left, right) = (stack(phi), stack(varphi));
    Ok((left.transpose() * form * right)[(0, 0)] * 0.5)
}

/// Length `int sqrt(2 alpha) |d psi / dt| dt` of a sampled wave-function path.
pub fn complex_curve_length(path: &WavePath, cfg: &GeometryConfig) -> Result<f64> {
    let values: Vec<Vec<f64>> = path.samples.iter().map(WaveVector::realified).collect();
    let velocities = quadrature::centered_velocities(&path.grid, &values);
    let speed: Vec<f64> = velocities
        .iter()
        .map(|v| cfg.sphere_scale() * v.iter().map(|c| c * c).sum::<f64>().sqrt())
        .collect();
    Ok(quadrature::trapezoid(&path.grid, &speed))
}

/// `sqrt(2 alpha) arccos |<psi_A|psi_B>|`, a distance between rays.
///
/// Evaluated as `2 asin(|psi_B - e^{i phi} psi_A| / 2)` with `phi` the phase of
/// the overlap; identical to the arccos form for normalized states and exact
/// at zero distance.
pub fn quantum_statistical_distance(a: &WaveVector, b: &WaveVector, cfg: &GeometryConfig) -> Result<f64> {
    let overlap = dirac_product_direct(a, b)?;
    let align = if overlap.norm() > 0.0 {
        overlap / overlap.norm()
    } else {
        Complex64::new(1.0, 0.0)
    };
    let chord = a
        .psi
        .iter()
        .zip(&b.psi)
        .map(|(x, y)| (y - align * x).norm_sqr())
        .sum::<f64>()
        .sqrt();
    Ok(cfg.sphere_scale() * 2.0 * (0.5 * chord).clamp(0.0, 1.0).asin())
}

/// `psi^j` as a complex observable on `(P, S)`.
pub fn wave_component_observable(n: usize, j: usize, cfg: &GeometryConfig, analytic: bool) -> ComplexObservable {
    let alpha = cfg.alpha;
    let make = |use_sin: bool| {
        let f = ObservableFunction::new(move |z| {
            let (sin, cos) = (z[n + j] / alpha).sin_cos();
            z[j].sqrt() * if use_sin { sin } else { cos }
        });
        if !analytic {
            return f;
        }
        f.with_gradient(move |z| {
            let root = z[j].sqrt();
            let (sin, cos) = (z[n + j] / alpha).sin_cos();
            let mut g = vec![0.0; 2 * n];
            if use_sin {
                g[j] = sin / (2.0 * root);
                g[n + j] = root * cos / alpha;
            } else {
                g[j] = cos / (2.0 * root);
                g[n + j] = -root * sin / alpha;
            }
            g
        })
    };
    ComplexObservable {
        re: make(false),
        im: make(true),
    }
}
