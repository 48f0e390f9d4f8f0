use crate::error::{Error, Result};

pub const DEFAULT_ALPHA: f64 = 0.5;
pub const DEFAULT_BOUNDARY_FLOOR: f64 = 1e-9;
pub const DEFAULT_FD_STEP: f64 = 1e-6;
pub const DEFAULT_CURVATURE_STEP: f64 = 1e-4;

/// Numerical and geometric constants shared by every operation.
///
/// `alpha` is the scale of the information metric `alpha / (2 P^i)`; it also
/// sets the phase unit of the conjugate coordinates (`psi = sqrt(P) e^{i S / alpha}`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometryConfig {
    pub alpha: f64,
    pub n: usize,
    /// Smallest probability accepted by the differential (metric-based) operations.
    pub boundary_floor: f64,
    /// Base step of first-order centered differences.
    pub fd_step: f64,
    /// Step of the nested differences used by the curvature engine.
    pub curvature_step: f64,
}

impl GeometryConfig {
    pub fn new(alpha: f64, n: usize) -> Result<Self> {
        Self {
            alpha,
            n,
            boundary_floor: DEFAULT_BOUNDARY_FLOOR,
            fd_step: DEFAULT_FD_STEP,
            curvature_step: DEFAULT_CURVATURE_STEP,
        }
        .validated()
    }

    pub fn with_boundary_floor(mut self, floor: f64) -> Result<Self> {
        self.boundary_floor = floor;
        self.validated()
    }

    pub fn with_fd_step(mut self, step: f64) -> Result<Self> {
        self.fd_step = step;
        self.validated()
    }

    pub fn with_curvature_step(mut self, step: f64) -> Result<Self> {
        self.curvature_step = step;
        self.validated()
    }

    /// Same constants for a different number of states.
    pub fn with_n(mut self, n: usize) -> Result<Self> {
        self.n = n;
        self.validated()
    }

    pub fn validated(self) -> Result<Self> {
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "alpha must be positive, got {}",
                self.alpha
            )));
        }
        if self.n < 2 {
            return Err(Error::InvalidConfig(format!("n must be at least 2, got {}", self.n)));
        }
        if !(self.boundary_floor > 0.0 && self.boundary_floor < 1.0 / self.n as f64) {
            return Err(Error::InvalidConfig(format!(
                "boundary_floor must lie in (0, 1/n), got {}",
                self.boundary_floor
            )));
        }
        if !(self.fd_step > 0.0 && self.fd_step.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "fd_step must be positive, got {}",
                self.fd_step
            )));
        }
        if !(self.curvature_step > 0.0 && self.curvature_step.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "curvature_step must be positive, got {}",
                self.curvature_step
            )));
        }
        Ok(self)
    }

    /// `sqrt(2 alpha)`, the radius factor relating the information metric to the unit sphere.
    pub fn sphere_scale(&self) -> f64 {
        (2.0 * self.alpha).sqrt()
    }

    /// Centered-difference step for a coordinate of magnitude `value`.
    pub fn step_for(&self, value: f64) -> f64 {
        self.fd_step * value.abs().max(1.0)
    }
}

impl Default for GeometryConfig {
    fn default() -> Self {
        Self {
            alpha: DEFAULT_ALPHA,
            n: 2,
            boundary_floor: DEFAULT_BOUNDARY_FLOOR,
            fd_step: DEFAULT_FD_STEP,
            curvature_step: DEFAULT_CURVATURE_STEP,
        }
    }
}
