//! Run configuration: one JSON document describing a problem instance and
//! the solver, certificate and oracle settings.

use std::path::Path;
use std::sync::Arc;

use hammerstein::kernel::{Kernel, Regime};
use hammerstein::problem::{AssumptionReport, Envelope, Forcing, Nonlinearity, ProblemInstance, SourceSpec, WeightField};
use hammerstein::solver::Start;
use hammerstein::space::{DiscreteMeasureSpace, GridFunction, TimeGrid};
use hammerstein::certificate::EpsilonChoice;
use hammerstein::Error;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed config: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub space: SpaceConfig,
    pub kernel: KernelConfig,
    pub nonlinearity: NonlinearityConfig,
    pub weight: WeightConfig,
    pub source: SourceConfig,
    pub time: TimeConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub certificate: CertificateConfig,
    #[serde(default)]
    pub oracle: OracleConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum SpaceConfig {
    Finite { weights: Vec<f64> },
    Box { dim: usize, points: usize, #[serde(default = "one")] length: f64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Matrix {
    Nested(Vec<Vec<f64>>),
    /// Row-major, side inferred from the length.
    Flat(Vec<f64>),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum KernelConfig {
    Matrix {
        generator: Matrix,
        #[serde(default)]
        damping: f64,
    },
    NeumannBox {
        diffusivity: f64,
        #[serde(default = "default_cutoff")]
        cutoff: usize,
        #[serde(default)]
        damping: f64,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum NonlinearityConfig {
    Power { alpha: f64 },
    Saturating { gamma: f64, alpha: f64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PerPoint {
    Scalar(f64),
    Array(Vec<f64>),
}

impl PerPoint {
    fn to_vec(&self, points: usize) -> Vec<f64> {
        match self {
            PerPoint::Scalar(v) => vec![*v; points],
            PerPoint::Array(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum WeightConfig {
    /// `p₂ = a·r·e^{-rt}`, `p₁ = c·r·e^{-rt}`; `a = 1` is the normalized case.
    Mixture {
        rate: f64,
        ratio: f64,
        lambda0: PerPoint,
        #[serde(default = "one")]
        amplitude: f64,
    },
    Constant { value: f64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FieldData {
    Scalar(f64),
    /// `values[point][node]`.
    Table(Vec<Vec<f64>>),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum SourceConfig {
    Constant { value: f64 },
    Tabulated { values: Vec<Vec<f64>> },
    Duhamel { u0: PerPoint, f: FieldData },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    #[serde(rename = "T")]
    pub horizon: f64,
    pub nt: usize,
    /// Window for `β₀`; defaults to `T`.
    #[serde(rename = "T0", default)]
    pub t0: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StartConfig {
    Upper,
    Lower,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub tol: f64,
    pub max_iter: usize,
    pub start: StartConfig,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { tol: 1e-10, max_iter: 500, start: StartConfig::Upper }
    }
}

impl SolverConfig {
    pub fn start(&self) -> Start {
        match self.start {
            StartConfig::Upper => Start::Upper,
            StartConfig::Lower => Start::Lower,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EpsilonConfig {
    Auto(AutoTag),
    Value(f64),
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AutoTag {
    Auto,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CertificateConfig {
    pub enabled: bool,
    pub epsilon: EpsilonConfig,
    /// Rows of the bound table.
    pub terms: usize,
}

impl Default for CertificateConfig {
    fn default() -> Self {
        Self { enabled: false, epsilon: EpsilonConfig::Auto(AutoTag::Auto), terms: 31 }
    }
}

impl CertificateConfig {
    pub fn epsilon(&self) -> EpsilonChoice {
        match self.epsilon {
            EpsilonConfig::Auto(_) => EpsilonChoice::Auto,
            EpsilonConfig::Value(e) => EpsilonChoice::Fixed(e),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OracleConfig {
    /// Sup-norm agreement required between solver and reference.
    pub tolerance: f64,
    /// RK4 steps per grid step.
    pub substeps: usize,
    /// Grid refinement for the brute-force Volterra reference.
    pub refinement: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self { tolerance: 1e-3, substeps: 16, refinement: 4 }
    }
}

fn one() -> f64 {
    1.0
}

fn default_cutoff() -> usize {
    64
}

pub fn load(path: &Path) -> Result<Config, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
    Ok(serde_json::from_str(&text)?)
}

/// A built instance, or the checker verdict when the kernel itself is
/// rejected at construction.
pub enum Built {
    Problem(Box<ProblemInstance>),
    Rejected(AssumptionReport),
}

fn bad(e: Error) -> ConfigError {
    ConfigError::Invalid(e.to_string())
}

impl Config {
    pub fn space(&self) -> Result<Arc<DiscreteMeasureSpace>, ConfigError> {
        let space = match &self.space {
            SpaceConfig::Finite { weights } => DiscreteMeasureSpace::finite(weights),
            SpaceConfig::Box { dim, points, length } => DiscreteMeasureSpace::unit_box(*dim, *points, *length),
        };
        space.map(Arc::new).map_err(bad)
    }

    pub fn generator(&self) -> Result<Option<DMatrix<f64>>, ConfigError> {
        let KernelConfig::Matrix { generator, .. } = &self.kernel else {
            return Ok(None);
        };
        let m = match generator {
            Matrix::Nested(rows) => {
                let n = rows.len();
                if rows.iter().any(|r| r.len() != n) {
                    return Err(ConfigError::Invalid(format!("generator must be square, got {n} ragged rows")));
                }
                DMatrix::from_row_iterator(n, n, rows.iter().flatten().copied())
            }
            Matrix::Flat(v) => {
                let n = (v.len() as f64).sqrt().round() as usize;
                if n * n != v.len() {
                    return Err(ConfigError::Invalid(format!("flat generator of length {} is not square", v.len())));
                }
                DMatrix::from_row_slice(n, n, v)
            }
        };
        Ok(Some(m))
    }

    fn damping(&self) -> f64 {
        match self.kernel {
            KernelConfig::Matrix { damping, .. } | KernelConfig::NeumannBox { damping, .. } => damping,
        }
    }

    pub fn grid(&self) -> Result<TimeGrid, ConfigError> {
        TimeGrid::new(self.time.horizon, self.time.nt).map_err(bad)
    }

    pub fn t0(&self) -> f64 {
        self.time.t0.unwrap_or(self.time.horizon)
    }

    pub fn build(&self) -> Result<Built, ConfigError> {
        let space = self.space()?;
        let points = space.len();
        let damping = self.damping();
        if !(damping >= 0.0 && damping.is_finite()) {
            return Err(ConfigError::Invalid(format!("damping {damping} must be finite and non-negative")));
        }
        let kernel = match &self.kernel {
            KernelConfig::Matrix { .. } => {
                let q = self.generator()?.expect("matrix kernel");
                match Kernel::matrix_semigroup(space, q) {
                    Ok(k) => k,
                    Err(e @ Error::InvalidGenerator { .. }) => {
                        let regime = if damping > 0.0 { Regime::Substochastic } else { Regime::Stochastic };
                        return Ok(Built::Rejected(AssumptionReport::generator_rejected(regime, &e)));
                    }
                    Err(e) => return Err(bad(e)),
                }
            }
            KernelConfig::NeumannBox { diffusivity, cutoff, .. } => {
                Kernel::neumann_box(space, *diffusivity, *cutoff).map_err(bad)?
            }
        };
        let kernel = if damping > 0.0 { kernel.damp(damping).map_err(bad)? } else { kernel };

        let nonlinearity = match self.nonlinearity {
            NonlinearityConfig::Power { alpha } => Nonlinearity::power(alpha),
            NonlinearityConfig::Saturating { gamma, alpha } => Nonlinearity::saturating(gamma, alpha),
        }
        .map_err(bad)?;

        let weight = match &self.weight {
            WeightConfig::Mixture { rate, ratio, lambda0, amplitude } => {
                let lambda0 = lambda0.to_vec(points);
                if *amplitude == 1.0 {
                    WeightField::canonical_mixture(*rate, *ratio, lambda0)
                } else {
                    Envelope::exponential(ratio * rate, *rate)
                        .and_then(|p1| Ok((p1, Envelope::exponential(amplitude * rate, *rate)?)))
                        .and_then(|(p1, p2)| WeightField::mixture(p1, p2, lambda0))
                }
            }
            WeightConfig::Constant { value } => WeightField::constant(*value),
        }
        .map_err(bad)?;

        let source = match &self.source {
            SourceConfig::Constant { value } => SourceSpec::Constant(*value),
            SourceConfig::Tabulated { values } => SourceSpec::Tabulated(GridFunction::from_rows(values).map_err(bad)?),
            SourceConfig::Duhamel { u0, f } => SourceSpec::Duhamel {
                u0: u0.to_vec(points),
                forcing: match f {
                    FieldData::Scalar(v) => Forcing::Constant(*v),
                    FieldData::Table(rows) => Forcing::Tabulated(GridFunction::from_rows(rows).map_err(bad)?),
                },
            },
        };

        let problem = ProblemInstance::new(kernel, self.grid()?, nonlinearity, weight, source, self.t0()).map_err(bad)?;
        Ok(Built::Problem(Box::new(problem)))
    }
}
