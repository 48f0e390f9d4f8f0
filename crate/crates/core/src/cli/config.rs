//! JSON run configuration.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::CliError;
use crate::quantum::WaveVector;
use crate::simplex::ProbabilityVector;

pub const MIN_DIM: usize = 2;
pub const MAX_DIM: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Distance,
    KahlerCheck,
    Evolve,
    Oracle,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Command::Distance => "distance",
            Command::KahlerCheck => "kahler-check",
            Command::Evolve => "evolve",
            Command::Oracle => "oracle",
        }
    }
}

/// Complex number as `[re, im]`.
pub type ComplexPair = [f64; 2];
/// Complex matrix as rows of `[re, im]` pairs.
pub type ComplexRows = Vec<Vec<ComplexPair>>;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default)]
    pub out: Option<String>,
    #[serde(default)]
    pub distance: DistanceConfig,
    #[serde(default, alias = "kahler-check")]
    pub kahler_check: KahlerCheckConfig,
    #[serde(default)]
    pub evolve: EvolveConfig,
    #[serde(default)]
    pub oracle: OracleConfig,
}

fn default_alpha() -> f64 {
    crate::config::DEFAULT_ALPHA
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbabilityPair {
    #[serde(default)]
    pub id: Option<String>,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WavePair {
    #[serde(default)]
    pub id: Option<String>,
    pub a: Vec<ComplexPair>,
    pub b: Vec<ComplexPair>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DistanceConfig {
    pub n: usize,
    /// Random interior pairs drawn in addition to the listed ones.
    pub random_pairs: usize,
    pub pairs: Vec<ProbabilityPair>,
    pub wave_pairs: Vec<WavePair>,
    pub tolerance: f64,
}

impl Default for DistanceConfig {
    fn default() -> Self {
        Self {
            n: 3,
            random_pairs: 5,
            pairs: Vec::new(),
            wave_pairs: Vec::new(),
            tolerance: 1e-12,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KahlerCheckConfig {
    pub sizes: Vec<usize>,
    pub samples_per_size: usize,
    /// Spectral radius of the sampled symmetric seed of `A`.
    pub extension_scale: f64,
    /// Lower bound on sampled probabilities.
    pub probability_floor: f64,
    pub tolerance: f64,
    pub admissibility_tolerance: f64,
    pub curvature_sizes: Vec<usize>,
    pub curvature_points: usize,
    pub curvature_tolerance: f64,
    pub sphere_tolerance: f64,
    /// Smallest mixed-block norm expected from a nonzero `A`.
    pub mixed_block_threshold: f64,
    /// Test mode: flip the sign of the lower-left block of every `J`.
    pub inject_j_fault: bool,
}

impl Default for KahlerCheckConfig {
    fn default() -> Self {
        Self {
            sizes: vec![2, 4, 8, 16],
            samples_per_size: 25,
            extension_scale: 0.5,
            probability_floor: 1e-3,
            tolerance: 1e-10,
            admissibility_tolerance: 1e-12,
            curvature_sizes: vec![2, 3],
            curvature_points: 10,
            curvature_tolerance: 1e-5,
            sphere_tolerance: 1e-4,
            mixed_block_threshold: 1e-3,
            inject_j_fault: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EvolveMethod {
    Exact,
    Symplectic,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvolveConfig {
    pub m: Option<ComplexRows>,
    pub nmat: Option<ComplexRows>,
    /// Constant energy offset.
    pub energy: f64,
    pub psi0: Option<Vec<ComplexPair>>,
    /// Second state carried by the same flow.
    pub reference: Option<Vec<ComplexPair>>,
    pub method: EvolveMethod,
    pub t_final: f64,
    pub steps: usize,
    pub tolerance: f64,
}

impl Default for EvolveConfig {
    fn default() -> Self {
        Self {
            m: None,
            nmat: None,
            energy: 0.0,
            psi0: None,
            reference: None,
            method: EvolveMethod::Symplectic,
            t_final: 1.0,
            steps: 1000,
            tolerance: 1e-9,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleConfig {
    pub n: usize,
    pub pairs: usize,
    pub segments: usize,
    pub iterations: usize,
    pub probability_floor: f64,
    /// Also run the nudged antipodal basis pair and an identical pair.
    pub include_fixtures: bool,
    pub gap_lower: f64,
    pub gap_upper: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            n: 3,
            pairs: 10,
            segments: 64,
            iterations: 4000,
            probability_floor: 1e-3,
            include_fixtures: true,
            gap_lower: -1e-3,
            gap_upper: 5e-2,
        }
    }
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn positive(name: &str, v: f64) -> Result<(), CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be positive, got {v}")))
    }
}

fn dim_in_range(name: &str, n: usize) -> Result<(), CliError> {
    if (MIN_DIM..=MAX_DIM).contains(&n) {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be in {MIN_DIM}..={MAX_DIM}, got {n}")))
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| invalid(format!("bad config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        positive("alpha", self.alpha)?;
        match self.command {
            Command::Distance => {
                let d = &self.distance;
                dim_in_range("distance.n", d.n)?;
                positive("distance.tolerance", d.tolerance)?;
            }
            Command::KahlerCheck => {
                let k = &self.kahler_check;
                for &n in k.sizes.iter().chain(&k.curvature_sizes) {
                    dim_in_range("kahler_check sizes", n)?;
                }
                for (name, v) in [
                    ("extension_scale", k.extension_scale),
                    ("probability_floor", k.probability_floor),
                    ("tolerance", k.tolerance),
                    ("admissibility_tolerance", k.admissibility_tolerance),
                    ("curvature_tolerance", k.curvature_tolerance),
                    ("sphere_tolerance", k.sphere_tolerance),
                    ("mixed_block_threshold", k.mixed_block_threshold),
                ] {
                    positive(&format!("kahler_check.{name}"), v)?;
                }
            }
            Command::Evolve => {
                let e = &self.evolve;
                positive("evolve.t_final", e.t_final)?;
                positive("evolve.tolerance", e.tolerance)?;
                if e.steps == 0 {
                    return Err(invalid("evolve.steps must be at least 1"));
                }
                if e.m.is_none() {
                    return Err(invalid("evolve.m is required"));
                }
            }
            Command::Oracle => {
                let o = &self.oracle;
                dim_in_range("oracle.n", o.n)?;
                positive("oracle.probability_floor", o.probability_floor)?;
                if o.segments < 4 {
                    return Err(invalid("oracle.segments must be at least 4"));
                }
                if !(o.gap_lower < o.gap_upper) {
                    return Err(invalid("oracle.gap_lower must be below oracle.gap_upper"));
                }
            }
        }
        Ok(())
    }
}

pub fn complex_matrix(name: &str, rows: &ComplexRows) -> Result<DMatrix<Complex64>, CliError> {
    let n = rows.len();
    dim_in_range(name, n)?;
    if let Some(bad) = rows.iter().find(|r| r.len() != n) {
        return Err(invalid(format!(
            "{name} must be square: row of length {} in a {n}-row matrix",
            bad.len()
        )));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| {
        Complex64::new(rows[i][j][0], rows[i][j][1])
    }))
}

pub fn wave_vector(name: &str, v: &[ComplexPair]) -> Result<WaveVector, CliError> {
    dim_in_range(name, v.len())?;
    Ok(WaveVector::new(v.iter().map(|z| Complex64::new(z[0], z[1])).collect()))
}

pub fn probability_vector(name: &str, v: &[f64]) -> Result<ProbabilityVector, CliError> {
    dim_in_range(name, v.len())?;
    ProbabilityVector::new(v.to_vec()).map_err(|e| invalid(format!("{name}: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_configs_take_defaults() {
        let cfg = RunConfig::from_json(r#"{"command": "kahler-check"}"#).unwrap();
        assert_eq!(cfg.command, Command::KahlerCheck);
        assert_eq!(cfg.alpha, 0.5);
        assert_eq!(cfg.kahler_check.sizes, vec![2, 4, 8, 16]);
        let cfg = RunConfig::from_json(r#"{"command": "oracle", "seed": 9, "oracle": {"n": 5}}"#).unwrap();
        assert_eq!(cfg.seed, Some(9));
        assert_eq!(cfg.oracle.n, 5);
        assert_eq!(cfg.oracle.segments, 64);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        for text in [
            r#"{"command": "teleport"}"#,
            r#"{"command": "distance", "alpha": -1}"#,
            r#"{"command": "distance", "distance": {"n": 65}}"#,
            r#"{"command": "evolve"}"#,
            r#"{"command": "oracle", "oracle": {"gap_lower": 1, "gap_upper": 0}}"#,
            r#"{"command": "distance", "bogus": 1}"#,
            "not json",
        ] {
            assert!(RunConfig::from_json(text).is_err(), "{text}");
        }
    }

    #[test]
    fn matrices_parse_from_pairs() {
        let rows = vec![vec![[0.0, 0.0], [1.0, 2.0]], vec![[1.0, -2.0], [3.0, 0.0]]];
        let m = complex_matrix("m", &rows).unwrap();
        assert_eq!(m[(0, 1)], Complex64::new(1.0, 2.0));
        assert!(complex_matrix("m", &vec![vec![[0.0, 0.0], [1.0, 0.0]], vec![[1.0, 0.0]]]).is_err());
    }
}
