//! Scenario documents: one JSON file fully determines a run.
//!
//! ```json
//! {
//!   "case": "infinite-finite",
//!   "factor1": { "kind": "continuous", "r": 2, "grid": 512,
//!                "model": { "type": "bspline", "order": 1,
//!                           "systems": [ { "order": 1 }, { "order": 1, "offset": 1 } ] } },
//!   "factor2": { "kind": "periodic", "period": 4, "rbar": 2,
//!                "model": { "type": "circular_delta" },
//!                "systems": { "type": "random", "count": 2 } },
//!   "signal": { "type": "random", "support": [-6, 6] },
//!   "tolerance": 1e-6,
//!   "seed": 7
//! }
//! ```
//!
//! Every random quantity draws from its own ChaCha stream of `seed`, so
//! changing one part of a scenario does not perturb the others.

pub mod bspline;
pub mod emit;
pub mod generators;

use num_complex::Complex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::continuous::{ContinuousScheme, FreeSymbol, DEFAULT_GRID};
use crate::error::Error as CoreError;
use crate::linalg::ComplexMatrix;
use crate::periodic::{FiniteUnitaryModel, PeriodicScheme, PeriodicSequence};
use crate::random::{random_gaussian_integers, random_matrix, random_vector, rng, SeededRng};
use crate::sequence::{IndexRange, Sequence};
use crate::tensor::{Case, Factor, FactorOptions, TensorCoefficients, TensorScheme};

pub const DEFAULT_TOLERANCE: f64 = 1e-9;
pub const DEFAULT_REL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("invalid scenario: {0}")]
    Validation(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub case: Case,
    pub factor1: FactorSpec,
    pub factor2: FactorSpec,
    #[serde(default)]
    pub free_u: FreeUSpec,
    #[serde(default)]
    pub signal: SignalSpec,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default = "default_rel_tol")]
    pub rel_tol: f64,
    #[serde(default)]
    pub seed: u64,
}

fn default_tolerance() -> f64 {
    DEFAULT_TOLERANCE
}

fn default_rel_tol() -> f64 {
    DEFAULT_REL_TOL
}

fn default_grid() -> usize {
    DEFAULT_GRID
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FactorSpec {
    /// Finite factor `ℓ²_N` sampled at period `rbar`.
    Periodic { period: usize, rbar: usize, model: PeriodicModel, systems: SystemsSpec },
    /// Infinite factor sampled at period `r`, analysed on a grid of `grid` points.
    Continuous {
        r: usize,
        #[serde(default = "default_grid")]
        grid: usize,
        /// Number of dual-symbol coefficients kept (default: `grid`).
        #[serde(default, skip_serializing_if = "Option::is_none")]
        keep: Option<usize>,
        model: ContinuousModel,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum PeriodicModel {
    /// Circular shift on `ℂ^N` with generator `e_0`.
    CircularDelta,
    /// Explicit unitary with its generator.
    Explicit { matrix: Vec<Vec<Complex<f64>>>, generator: Vec<Complex<f64>> },
    /// Seeded random unitary on `ℂ^dim` with a generator of period `N`.
    RandomUnitary { dim: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum SystemsSpec {
    Explicit {
        vectors: Vec<Vec<Complex<f64>>>,
    },
    /// `count` seeded vectors; `integer` draws Gaussian integers in `[-3, 3]`.
    Random {
        count: usize,
        #[serde(default)]
        integer: bool,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ContinuousModel {
    /// Generator `B_order`, systems `B_{order_j}(· - offset_j)`.
    Bspline { order: usize, systems: Vec<BsplineSystem> },
    /// Cross-covariances `k ↦ ⟨U^k a, h_j⟩` given directly.
    ExplicitCrosscov { crosscov: Vec<Sequence<f64>> },
    /// Seeded random cross-covariances on `-degree..=degree`.
    RandomTrig {
        count: usize,
        degree: usize,
        #[serde(default)]
        integer: bool,
    },
    /// Seeded symbols with constant `G*G` (exactly invertible duals).
    ExactCase { count: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BsplineSystem {
    pub order: usize,
    #[serde(default)]
    pub offset: i64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FreeUSpec {
    #[serde(default)]
    pub factor1: FreeChoice,
    #[serde(default)]
    pub factor2: FreeChoice,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum FreeChoice {
    #[default]
    Zero,
    /// Seeded random matrix of the required shape.
    Random,
    Explicit {
        matrix: Vec<Vec<Complex<f64>>>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum SignalSpec {
    /// Seeded coefficients; `support` is the inclusive index range used on
    /// every infinite axis.
    Random {
        #[serde(default = "default_support")]
        support: [i64; 2],
        #[serde(default)]
        integer: bool,
    },
    /// Row-major coefficients starting at `origin` (periodic axes start at 0).
    Explicit { origin: [i64; 2], values: Vec<Vec<Complex<f64>>> },
}

fn default_support() -> [i64; 2] {
    [-4, 4]
}

impl Default for SignalSpec {
    fn default() -> Self {
        Self::Random { support: default_support(), integer: false }
    }
}

/// A scenario turned into library objects.
#[derive(Debug, Clone)]
pub struct Built {
    pub scheme: TensorScheme<f64>,
    pub options: [FactorOptions<f64>; 2],
    pub signal: TensorCoefficients<f64>,
}

/// Stream numbers for the seeded generators.
#[derive(Clone, Copy)]
enum Stream {
    Model(usize),
    Systems(usize),
    FreeU(usize),
    Signal,
}

impl Stream {
    fn id(self) -> u64 {
        match self {
            Self::Model(i) => 1 + 10 * i as u64,
            Self::Systems(i) => 2 + 10 * i as u64,
            Self::FreeU(i) => 3 + 10 * i as u64,
            Self::Signal => 100,
        }
    }
}

fn invalid(message: impl Into<String>) -> ScenarioError {
    ScenarioError::Validation(message.into())
}

fn in_factor(index: usize) -> impl Fn(CoreError) -> ScenarioError {
    move |e| invalid(format!("factor{index}: {}", core_message(&e)))
}

fn core_message(e: &CoreError) -> String {
    match e {
        CoreError::InvalidScheme(msg) | CoreError::CaseMismatch(msg) | CoreError::ShapeMismatch(msg) => msg.clone(),
        other => other.to_string(),
    }
}

/// Parses and validates a scenario document.
pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let scenario: Scenario = serde_json::from_str(text).map_err(|e| ScenarioError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    scenario.validate()?;
    Ok(scenario)
}

/// Serializes a scenario back to its document form.
pub fn serialize_scenario(scenario: &Scenario) -> String {
    serde_json::to_string_pretty(scenario).expect("scenario serializes")
}

impl Scenario {
    /// Checks every precondition by assembling the schemes.
    pub fn validate(&self) -> Result<(), ScenarioError> {
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return Err(invalid("tolerance must be a positive number"));
        }
        if !(self.rel_tol > 0.0 && self.rel_tol < 1.0) {
            return Err(invalid("rel_tol must lie in (0, 1)"));
        }
        self.build().map(|_| ())
    }

    fn stream(&self, stream: Stream) -> SeededRng {
        let mut g = rng(self.seed);
        g.set_stream(stream.id());
        g
    }

    pub fn build(&self) -> Result<Built, ScenarioError> {
        let factor1 = self.build_factor(1, &self.factor1)?;
        let factor2 = self.build_factor(2, &self.factor2)?;
        let options = [
            self.factor_options(1, &self.factor1, &factor1, &self.free_u.factor1)?,
            self.factor_options(2, &self.factor2, &factor2, &self.free_u.factor2)?,
        ];
        let scheme = TensorScheme::new(self.case, factor1, factor2).map_err(|e| invalid(core_message(&e)))?;
        let signal = self.build_signal(&scheme)?;
        Ok(Built { scheme, options, signal })
    }

    fn build_factor(&self, index: usize, spec: &FactorSpec) -> Result<Factor<f64>, ScenarioError> {
        let err = in_factor(index);
        match spec {
            FactorSpec::Periodic { period, rbar, model, systems } => {
                let (n, rbar) = (*period, *rbar);
                if n == 0 || rbar == 0 {
                    return Err(invalid(format!("factor{index}: N and rbar must be positive")));
                }
                if n % rbar != 0 {
                    return Err(invalid(format!("factor{index}: rbar must divide N (rbar = {rbar}, N = {n})")));
                }
                let (w, b) = match model {
                    PeriodicModel::CircularDelta => {
                        (FiniteUnitaryModel::circular_shift(n), PeriodicSequence::basis(n, 0).values().to_vec())
                    }
                    PeriodicModel::Explicit { matrix, generator } => {
                        let m = ComplexMatrix::from_rows(matrix).map_err(&err)?;
                        (FiniteUnitaryModel::explicit(m).map_err(&err)?, generator.clone())
                    }
                    PeriodicModel::RandomUnitary { dim } => {
                        if *dim < n {
                            return Err(invalid(format!(
                                "factor{index}: random unitary needs dim >= N (dim = {dim}, N = {n})"
                            )));
                        }
                        generators::random_unitary_model(&mut self.stream(Stream::Model(index)), *dim, n)
                    }
                };
                let d = w.dim();
                let vectors = match systems {
                    SystemsSpec::Explicit { vectors } => vectors.clone(),
                    SystemsSpec::Random { count, integer } => {
                        let mut g = self.stream(Stream::Systems(index));
                        (0..*count)
                            .map(|_| {
                                if *integer {
                                    random_gaussian_integers(&mut g, d, 3)
                                } else {
                                    random_vector(&mut g, d)
                                }
                            })
                            .collect()
                    }
                };
                let scheme = PeriodicScheme::new(w, b, n, rbar, vectors).map_err(&err)?;
                Ok(Factor::Periodic(scheme.with_rank_tol(self.rel_tol)))
            }
            FactorSpec::Continuous { r, grid, keep, model } => {
                if *r == 0 {
                    return Err(invalid(format!("factor{index}: r must be positive")));
                }
                if grid % r != 0 {
                    return Err(invalid(format!("factor{index}: r must divide the grid size L (r = {r}, L = {grid})")));
                }
                if keep.is_some_and(|k| k == 0 || k > *grid) {
                    return Err(invalid(format!("factor{index}: keep must lie in 1..=L")));
                }
                let crosscov = match model {
                    ContinuousModel::Bspline { order, systems } => {
                        if systems.is_empty() {
                            return Err(invalid(format!("factor{index}: at least one B-spline system is required")));
                        }
                        systems
                            .iter()
                            .map(|sys| bspline::bspline_crosscov(*order, sys.order).map(|c| c.shifted(sys.offset)))
                            .collect::<Result<Vec<_>, _>>()
                            .map_err(&err)?
                    }
                    ContinuousModel::ExplicitCrosscov { crosscov } => crosscov.clone(),
                    ContinuousModel::RandomTrig { count, degree, integer } => {
                        let mut g = self.stream(Stream::Model(index));
                        if *integer {
                            (0..*count)
                                .map(|_| {
                                    Sequence::new(
                                        -(*degree as i64),
                                        random_gaussian_integers(&mut g, 2 * degree + 1, 3),
                                    )
                                })
                                .collect()
                        } else {
                            generators::random_trig_crosscov(&mut g, *count, *degree)
                        }
                    }
                    ContinuousModel::ExactCase { count } => {
                        if *count < *r {
                            return Err(invalid(format!("factor{index}: need s >= r systems (s = {count}, r = {r})")));
                        }
                        generators::exact_case_crosscov(&mut self.stream(Stream::Model(index)), *r, *count)
                    }
                };
                Ok(Factor::Continuous(ContinuousScheme::from_crosscov(*r, &crosscov, *grid).map_err(&err)?))
            }
        }
    }

    fn factor_options(
        &self,
        index: usize,
        spec: &FactorSpec,
        factor: &Factor<f64>,
        choice: &FreeChoice,
    ) -> Result<FactorOptions<f64>, ScenarioError> {
        let shape = match factor {
            Factor::Periodic(p) => (p.n(), p.channels() * p.ell()),
            Factor::Continuous(c) => (c.r(), c.channels()),
        };
        let free_u = match choice {
            FreeChoice::Zero => FreeSymbol::Zero,
            FreeChoice::Random => {
                FreeSymbol::Constant(random_matrix(&mut self.stream(Stream::FreeU(index)), shape.0, shape.1))
            }
            FreeChoice::Explicit { matrix } => {
                let m = ComplexMatrix::from_rows(matrix).map_err(in_factor(index))?;
                if (m.rows(), m.cols()) != shape {
                    return Err(invalid(format!(
                        "free_u.factor{index} must be {} x {} (got {} x {})",
                        shape.0,
                        shape.1,
                        m.rows(),
                        m.cols()
                    )));
                }
                FreeSymbol::Constant(m)
            }
        };
        let keep = match spec {
            FactorSpec::Continuous { keep, .. } => *keep,
            FactorSpec::Periodic { .. } => None,
        };
        Ok(FactorOptions { free_u, keep, force: false })
    }

    fn build_signal(&self, scheme: &TensorScheme<f64>) -> Result<TensorCoefficients<f64>, ScenarioError> {
        match &self.signal {
            SignalSpec::Random { support, integer } => {
                if support[1] < support[0] {
                    return Err(invalid("signal support must satisfy lo <= hi"));
                }
                let range = IndexRange::inclusive(support[0], support[1]);
                let axes = scheme.coefficient_axes([range, range]);
                let count = axes[0].range.len * axes[1].range.len;
                let mut g = self.stream(Stream::Signal);
                let values =
                    if *integer { random_gaussian_integers(&mut g, count, 4) } else { random_vector(&mut g, count) };
                Ok(TensorCoefficients { axes, values })
            }
            SignalSpec::Explicit { origin, values } => {
                let rows = values.len();
                let cols = values.first().map_or(0, Vec::len);
                if values.iter().any(|row| row.len() != cols) {
                    return Err(invalid("signal rows must all have the same length"));
                }
                let axes =
                    scheme.coefficient_axes([IndexRange::new(origin[0], rows), IndexRange::new(origin[1], cols)]);
                for (i, axis) in axes.iter().enumerate() {
                    if axis.period.is_some() && (origin[i] != 0 || axis.range.len != [rows, cols][i]) {
                        return Err(invalid(format!(
                            "signal axis {} is periodic: it must start at 0 and have length {}",
                            i + 1,
                            axis.range.len
                        )));
                    }
                }
                Ok(TensorCoefficients { axes, values: values.iter().flatten().copied().collect() })
            }
        }
    }
}
