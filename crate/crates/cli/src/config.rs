//! Experiment configuration files.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use hypocauchy::cauchy::{AreaMeasure, Grid, ScalarFunction};
use hypocauchy::polyalg::{BivariatePolynomial, FactoredPolynomial};
use hypocauchy::quad::{BaseRule, QuadratureSpec};
use hypocauchy::structures::{Chart, ComplexPolynomial, FirstIntegral, Point, Region};
use hypocauchy::Complex64;

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Charset,
    LojEstimate,
    KernelNorm,
    Scaling,
    Solve,
    CauchyCheck,
    Similarity,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Charset => "charset",
            ExperimentKind::LojEstimate => "loj-estimate",
            ExperimentKind::KernelNorm => "kernel-norm",
            ExperimentKind::Scaling => "scaling",
            ExperimentKind::Solve => "solve",
            ExperimentKind::CauchyCheck => "cauchy-check",
            ExperimentKind::Similarity => "similarity",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chart: Option<ChartConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub region: Option<RegionConfig>,
    #[serde(default)]
    pub quadrature: QuadratureConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub charset: Option<CharsetParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub loj: Option<LojParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel_norm: Option<KernelNormParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scaling: Option<ScalingParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solve: Option<SolveParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cauchy_check: Option<CauchyCheckParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub similarity: Option<SimilarityParams>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ChartConfig {
    Elliptic,
    ArcNormal { k: u32 },
    CircleNormal { k: u32 },
    PointNormal { psi: PolynomialConfig },
    PolynomialIntegral { p: PolynomialConfig },
}

/// Either a named preset or integer terms `[i, j, c]` for `c x^i y^j`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolynomialConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub terms: Option<Vec<(u32, u32, i64)>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactorConfig {
    pub terms: Vec<(u32, u32, i64)>,
    #[serde(default = "one")]
    pub power: u32,
}

fn one() -> u32 {
    1
}

pub const STRATIFICATION_PRESET: &str = "stratification_example";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RegionConfig {
    Rectangle { x: [f64; 2], y: [f64; 2] },
    Disc { center: [f64; 2], radius: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadratureConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_depth: u32,
    pub exclusion_radius_floor: f64,
    pub max_cells: usize,
    pub magnitude_tol: f64,
    pub base_rule: String,
    pub tail_extrapolation: bool,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        let s = QuadratureSpec::default();
        Self {
            rel_tol: s.rel_tol,
            abs_tol: s.abs_tol,
            max_depth: s.max_depth,
            exclusion_radius_floor: s.exclusion_radius_floor,
            max_cells: s.max_cells,
            magnitude_tol: s.magnitude_tol,
            base_rule: "kronrod5".into(),
            tail_extrapolation: s.tail_extrapolation,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub x: [f64; 2],
    pub y: [f64; 2],
    pub nx: usize,
    pub ny: usize,
}

/// Scalar test functions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FunctionConfig {
    Constant {
        re: f64,
        #[serde(default)]
        im: f64,
    },
    AbsPower {
        axis: AxisName,
        #[serde(default)]
        center: f64,
        exponent: f64,
    },
    CosSin,
    /// Terms `[i, j, re, im]`.
    Polynomial { terms: Vec<(u32, u32, f64, f64)> },
    Bump { center: [f64; 2], radius: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisName {
    X,
    Y,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CharsetParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub factors: Option<Vec<FactorConfig>>,
    /// Stated vanishing orders per curve family or curve, compared with the derived ones.
    #[serde(default)]
    pub stated_orders: BTreeMap<String, u32>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LojParams {
    pub point: [f64; 2],
    pub rho: f64,
    pub samples: usize,
    /// Random pairs for the sharp inequality check on power charts.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inequality_samples: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelNormParams {
    pub q: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<[f64; 2]>>,
    #[serde(default = "coarse_floor")]
    pub coarse_floor: f64,
    #[serde(default = "fine_floor")]
    pub fine_floor: f64,
}

fn coarse_floor() -> f64 {
    1e-4
}

fn fine_floor() -> f64 {
    1e-7
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalingParams {
    pub tau: f64,
    pub q: f64,
    pub rho: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveParams {
    pub f: FunctionConfig,
    pub grid: GridConfig,
    #[serde(default = "band")]
    pub band: f64,
    #[serde(default = "fd_step")]
    pub fd_step: f64,
    #[serde(default = "yes")]
    pub residuals: bool,
    /// Fixed normalization `[re, im]`; calibrated when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normalization: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
}

fn band() -> f64 {
    0.1
}

fn fd_step() -> f64 {
    1e-3
}

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TestFieldConfig {
    /// `H(Z)` with complex coefficients `[re, im]` in increasing degree.
    Holomorphic { coeffs: Vec<[f64; 2]> },
    /// `Σ c x^i y^j` with terms `[i, j, re, im]`.
    Polynomial { terms: Vec<(u32, u32, f64, f64)> },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasureName {
    Lebesgue,
    WedgeLiteral,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CauchyCheckParams {
    pub w: TestFieldConfig,
    pub n_points: usize,
    #[serde(default = "band")]
    pub margin: f64,
    #[serde(default = "lebesgue")]
    pub measure: MeasureName,
}

fn lebesgue() -> MeasureName {
    MeasureName::Lebesgue
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimilarityParams {
    /// Coefficients of `H` as `[re, im]` in increasing degree.
    pub h: Vec<[f64; 2]>,
    pub a: FunctionConfig,
    pub b: FunctionConfig,
    pub grid: GridConfig,
    #[serde(default = "max_iter")]
    pub max_iter: usize,
    #[serde(default = "iteration_tol")]
    pub tol: f64,
    #[serde(default = "band")]
    pub band: f64,
    #[serde(default = "fd_step")]
    pub fd_step: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normalization: Option<[f64; 2]>,
    #[serde(default = "yes")]
    pub round_trip: bool,
}

fn max_iter() -> usize {
    30
}

fn iteration_tol() -> f64 {
    1e-6
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Names of parameter blocks that are present.
    fn blocks(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if self.charset.is_some() {
            out.push("charset");
        }
        if self.loj.is_some() {
            out.push("loj");
        }
        if self.kernel_norm.is_some() {
            out.push("kernel_norm");
        }
        if self.scaling.is_some() {
            out.push("scaling");
        }
        if self.solve.is_some() {
            out.push("solve");
        }
        if self.cauchy_check.is_some() {
            out.push("cauchy_check");
        }
        if self.similarity.is_some() {
            out.push("similarity");
        }
        out
    }

    pub fn block_name(&self) -> &'static str {
        match self.experiment {
            ExperimentKind::Charset => "charset",
            ExperimentKind::LojEstimate => "loj",
            ExperimentKind::KernelNorm => "kernel_norm",
            ExperimentKind::Scaling => "scaling",
            ExperimentKind::Solve => "solve",
            ExperimentKind::CauchyCheck => "cauchy_check",
            ExperimentKind::Similarity => "similarity",
        }
    }

    /// Structural checks: exactly the matching parameter block is present.
    pub fn check_blocks(&self) -> Result<(), CliError> {
        let want = self.block_name();
        let blocks = self.blocks();
        if !blocks.contains(&want) {
            return Err(CliError::Config(format!("missing [{want}] block for experiment {}", self.experiment.name())));
        }
        if let Some(other) = blocks.iter().find(|b| **b != want) {
            return Err(CliError::Config(format!("[{other}] block does not belong to experiment {}", self.experiment.name())));
        }
        Ok(())
    }

    pub fn region(&self) -> Result<Region, CliError> {
        match &self.region {
            None => Err(CliError::Config("missing [region]".into())),
            Some(r) => r.build(),
        }
    }

    pub fn first_integral(&self) -> Result<FirstIntegral, CliError> {
        let region = self.region()?;
        match &self.chart {
            None => Err(CliError::Config("missing [chart]".into())),
            Some(c) => c.build(region),
        }
    }

    pub fn spec(&self) -> Result<QuadratureSpec, CliError> {
        self.quadrature.build()
    }
}

impl RegionConfig {
    pub fn build(&self) -> Result<Region, CliError> {
        let r = match self {
            RegionConfig::Rectangle { x, y } => Region::rectangle(x[0], x[1], y[0], y[1]),
            RegionConfig::Disc { center, radius } => Region::disc(Point::new(center[0], center[1]), *radius),
        };
        r.map_err(invalid)
    }
}

impl PolynomialConfig {
    pub fn build(&self) -> Result<BivariatePolynomial, CliError> {
        match (&self.preset, &self.terms) {
            (Some(name), None) => Ok(preset(name)?.expand()),
            (None, Some(terms)) => Ok(BivariatePolynomial::from_integer_terms(terms)),
            _ => Err(CliError::Config("a polynomial needs exactly one of `preset` or `terms`".into())),
        }
    }
}

fn preset(name: &str) -> Result<FactoredPolynomial, CliError> {
    if name == STRATIFICATION_PRESET {
        Ok(FactoredPolynomial::stratification_example())
    } else {
        Err(CliError::Config(format!("unknown polynomial preset `{name}`")))
    }
}

impl ChartConfig {
    pub fn build(&self, region: Region) -> Result<FirstIntegral, CliError> {
        let chart = match self {
            ChartConfig::Elliptic => Chart::Elliptic,
            ChartConfig::ArcNormal { k } => Chart::ArcNormal { k: *k },
            ChartConfig::CircleNormal { k } => Chart::CircleNormal { k: *k },
            ChartConfig::PointNormal { psi } => Chart::PointNormal { psi: psi.build()? },
            ChartConfig::PolynomialIntegral { p } => Chart::PolynomialIntegral { p: p.build()? },
        };
        FirstIntegral::new(chart, region).map_err(invalid)
    }
}

impl CharsetParams {
    pub fn build(&self) -> Result<FactoredPolynomial, CliError> {
        match (&self.preset, &self.factors) {
            (Some(name), None) => preset(name),
            (None, Some(fs)) if !fs.is_empty() => Ok(FactoredPolynomial::new(
                fs.iter().map(|f| (BivariatePolynomial::from_integer_terms(&f.terms), f.power)).collect(),
            )),
            _ => Err(CliError::Config("[charset] needs exactly one of `preset` or a non-empty `factors`".into())),
        }
    }
}

impl QuadratureConfig {
    pub fn build(&self) -> Result<QuadratureSpec, CliError> {
        let base_rule = match self.base_rule.as_str() {
            "kronrod5" => BaseRule::Kronrod5,
            "kronrod7" => BaseRule::Kronrod7,
            other => return Err(CliError::Config(format!("unknown base_rule `{other}`"))),
        };
        let spec = QuadratureSpec {
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            max_depth: self.max_depth,
            exclusion_radius_floor: self.exclusion_radius_floor,
            max_cells: self.max_cells,
            magnitude_tol: self.magnitude_tol,
            base_rule,
            tail_extrapolation: self.tail_extrapolation,
            ..QuadratureSpec::default()
        };
        spec.validate().map_err(invalid)?;
        Ok(spec)
    }
}

impl GridConfig {
    pub fn build(&self) -> Result<Grid, CliError> {
        Grid::new((self.x[0], self.x[1]), (self.y[0], self.y[1]), self.nx, self.ny).map_err(invalid)
    }
}

impl FunctionConfig {
    pub fn build(&self) -> Result<ScalarFunction, CliError> {
        let f = match self {
            FunctionConfig::Constant { re, im } => ScalarFunction::Constant(Complex64::new(*re, *im)),
            FunctionConfig::AbsPower { axis, center, exponent } => {
                if !exponent.is_finite() {
                    return Err(CliError::Config("exponent must be finite".into()));
                }
                ScalarFunction::AbsPower { axis: if *axis == AxisName::X { 0 } else { 1 }, center: *center, exponent: *exponent }
            }
            FunctionConfig::CosSin => ScalarFunction::CosSin,
            FunctionConfig::Polynomial { terms } => {
                ScalarFunction::Polynomial(terms.iter().map(|(i, j, re, im)| (*i, *j, Complex64::new(*re, *im))).collect())
            }
            FunctionConfig::Bump { center, radius } => {
                if !(*radius > 0.0) {
                    return Err(CliError::Config("bump radius must be positive".into()));
                }
                ScalarFunction::Bump { center: Point::new(center[0], center[1]), radius: *radius }
            }
        };
        Ok(f)
    }
}

impl MeasureName {
    pub fn build(self) -> AreaMeasure {
        match self {
            MeasureName::Lebesgue => AreaMeasure::Lebesgue,
            MeasureName::WedgeLiteral => AreaMeasure::WedgeLiteral,
        }
    }
}

pub fn complex_polynomial(coeffs: &[[f64; 2]]) -> Result<ComplexPolynomial, CliError> {
    if coeffs.is_empty() {
        return Err(CliError::Config("polynomial coefficients are empty".into()));
    }
    Ok(ComplexPolynomial::new(coeffs.iter().map(|c| Complex64::new(c[0], c[1])).collect()))
}

fn invalid(e: hypocauchy::Error) -> CliError {
    CliError::Config(e.to_string())
}
