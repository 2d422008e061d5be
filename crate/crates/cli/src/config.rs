//! Experiment configuration, version 1.
//!
//! ```json
//! {
//!   "version": 1,
//!   "seed": 7,
//!   "space": {"builder": "grid", "dim": 1, "n_per_side": 8},
//!   "fields": {"f": {"kind": "random"}},
//!   "checks": [{"id": "thm2", "field": "f", "params": {"s": 0.5, "p": 1.5, "q": 1.5}}]
//! }
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use metric_lab::verify::{FunctionalParams, SharpnessConfig};
use metric_lab::{
    CenterSelection, FieldDistribution, FunctionalCase, HedbergParams, NormSpec, PoincareParams, PointwiseParams,
    Theorem, WeightMode,
};
use serde::{Deserialize, Serialize};

use crate::error::{config, CliResult};
use crate::expr::Expr;

pub const CONFIG_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub version: u32,
    #[serde(default)]
    pub seed: Option<u64>,
    pub space: SpaceSpec,
    #[serde(default)]
    pub certificate: CertificateSpec,
    #[serde(default)]
    pub kernel: Option<KernelSpec>,
    #[serde(default)]
    pub fields: BTreeMap<String, FieldSpec>,
    #[serde(default)]
    pub checks: Vec<CheckSpec>,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default)]
    pub tolerance: ToleranceSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "builder", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SpaceSpec {
    Grid {
        dim: usize,
        n_per_side: usize,
        #[serde(default = "cell_volume")]
        weights: WeightMode,
    },
    Cantor {
        level: usize,
        #[serde(default = "one")]
        dim: usize,
    },
    /// A space document on disk; relative paths resolve against the config file.
    File { path: PathBuf },
}

fn cell_volume() -> WeightMode {
    WeightMode::CellVolume
}

fn one() -> usize {
    1
}

impl SpaceSpec {
    /// Coordinate dimension when known without loading anything.
    pub fn dim(&self) -> Option<usize> {
        match self {
            SpaceSpec::Grid { dim, .. } | SpaceSpec::Cantor { dim, .. } => Some(*dim),
            SpaceSpec::File { .. } => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertificateSpec {
    #[serde(default)]
    pub r_min: Option<f64>,
    #[serde(default)]
    pub r_max: Option<f64>,
    #[serde(default = "interior")]
    pub centers: CenterSelection,
}

fn interior() -> CenterSelection {
    CenterSelection::Interior
}

impl Default for CertificateSpec {
    fn default() -> Self {
        CertificateSpec {
            r_min: None,
            r_max: None,
            centers: CenterSelection::Interior,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PatternKind {
    SignFirstCoordinate,
    RandomPm1,
    Custom,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelSpec {
    pub pattern: PatternKind,
    /// Defaults to the nominal dimension of the space.
    #[serde(default)]
    pub nu: Option<f64>,
    #[serde(default = "yes")]
    pub project: bool,
    #[serde(default)]
    pub seed: Option<u64>,
    /// Row-major `N × N` sign table for the custom pattern.
    #[serde(default)]
    pub table: Option<Vec<f64>>,
}

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FieldSpec {
    Random {
        #[serde(default)]
        distribution: FieldDistribution,
        #[serde(default)]
        seed: Option<u64>,
    },
    Expr {
        expr: String,
    },
    /// `.json` field document or a `point_id,value` `.csv`.
    File {
        path: PathBuf,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "id", rename_all = "snake_case", deny_unknown_fields)]
pub enum CheckSpec {
    Thm1 {
        field: String,
        #[serde(default)]
        gradient: Option<String>,
        #[serde(default)]
        params: PointwiseParams,
    },
    Thm2 {
        field: String,
        #[serde(default)]
        params: PointwiseParams,
    },
    Thm3 {
        field: String,
        #[serde(default)]
        gradient: Option<String>,
        #[serde(default)]
        params: PointwiseParams,
    },
    HedbergSplit {
        field: String,
        params: HedbergParams,
    },
    Functional {
        field: String,
        #[serde(default)]
        gradient: Option<String>,
        case: FunctionalCase,
        params: FunctionalParams,
    },
    MaximalBound {
        norm: NormSpec,
        trials: usize,
        #[serde(default)]
        distribution: FieldDistribution,
        #[serde(default)]
        seed: Option<u64>,
    },
    Poincare {
        field: String,
        #[serde(default)]
        gradient: Option<String>,
        params: PoincareParams,
        /// `[center, radius]` pairs; defaults to every center at a quarter of the diameter.
        #[serde(default)]
        balls: Option<Vec<(usize, f64)>>,
    },
    Sharpness {
        target: SharpnessConfig,
        iterations: usize,
        #[serde(default)]
        seed: Option<u64>,
    },
}

impl CheckSpec {
    pub fn id(&self) -> &'static str {
        match self {
            CheckSpec::Thm1 { .. } => "thm1",
            CheckSpec::Thm2 { .. } => "thm2",
            CheckSpec::Thm3 { .. } => "thm3",
            CheckSpec::HedbergSplit { .. } => "hedberg_split",
            CheckSpec::Functional { case, .. } => case.id().as_str(),
            CheckSpec::MaximalBound { .. } => "maximal_bound",
            CheckSpec::Poincare { .. } => "poincare",
            CheckSpec::Sharpness { .. } => "sharpness",
        }
    }

    pub fn needs_kernel(&self) -> bool {
        match self {
            CheckSpec::Thm1 { .. } | CheckSpec::Thm3 { .. } | CheckSpec::Functional { .. } => true,
            CheckSpec::Sharpness { target, .. } => target.which != Theorem::Thm2,
            _ => false,
        }
    }

    fn field_refs(&self) -> Vec<(&'static str, &str)> {
        let mut refs = Vec::new();
        match self {
            CheckSpec::Thm1 { field, gradient, .. }
            | CheckSpec::Thm3 { field, gradient, .. }
            | CheckSpec::Functional { field, gradient, .. }
            | CheckSpec::Poincare { field, gradient, .. } => {
                refs.push(("field", field.as_str()));
                if let Some(g) = gradient {
                    refs.push(("gradient", g.as_str()));
                }
            }
            CheckSpec::Thm2 { field, .. } | CheckSpec::HedbergSplit { field, .. } => refs.push(("field", field.as_str())),
            CheckSpec::MaximalBound { .. } | CheckSpec::Sharpness { .. } => {}
        }
        refs
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
}

fn default_dir() -> PathBuf {
    PathBuf::from("metric-lab-out")
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec { dir: default_dir() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceSpec {
    #[serde(default = "unit")]
    pub scale: f64,
}

fn unit() -> f64 {
    1.0
}

impl Default for ToleranceSpec {
    fn default() -> Self {
        ToleranceSpec { scale: 1.0 }
    }
}

/// Parses config text; errors name the line, column and field path.
pub fn parse_config(text: &str, origin: &Path) -> CliResult<ExperimentConfig> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        config(format!(
            "{}: line {} column {}: at `{}`: {}",
            origin.display(),
            inner.line(),
            inner.column(),
            path,
            strip_position(&inner.to_string())
        ))
    })
}

fn strip_position(msg: &str) -> &str {
    msg.rfind(" at line ").map_or(msg, |i| &msg[..i])
}

fn morrey(at: &str, p: f64, q: f64) -> CliResult<()> {
    if p > 1.0 && p <= q && q.is_finite() {
        Ok(())
    } else {
        Err(config(format!(
            "{at}: Morrey exponents need 1 < p ≤ q < ∞, got p = {p}, q = {q}"
        )))
    }
}

fn core(at: &str) -> impl Fn(metric_lab::Error) -> crate::error::CliError + '_ {
    move |e| config(format!("{at}: {e}"))
}

fn norm_spec(at: &str, spec: &NormSpec) -> CliResult<()> {
    if let NormSpec::Morrey { p, q } = spec {
        morrey(at, *p, *q)?;
    }
    spec.validate().map_err(core(at))
}

impl ExperimentConfig {
    /// Every check that does not depend on the fitted dimension.
    pub fn validate(&self) -> CliResult<()> {
        if self.version != CONFIG_VERSION {
            return Err(config(format!(
                "version: unsupported config version {}, expected {CONFIG_VERSION}",
                self.version
            )));
        }
        if !(self.tolerance.scale > 0.0 && self.tolerance.scale.is_finite()) {
            return Err(config(format!(
                "tolerance.scale: must be positive, got {}",
                self.tolerance.scale
            )));
        }
        match &self.space {
            SpaceSpec::Grid { dim, n_per_side, .. } => {
                if !(1..=3).contains(dim) || *n_per_side < 2 {
                    return Err(config(format!(
                        "space: grid needs dim in 1..=3 and n_per_side ≥ 2, got dim = {dim}, n_per_side = {n_per_side}"
                    )));
                }
            }
            SpaceSpec::Cantor { level, dim } => {
                if !(1..=2).contains(dim) || *level == 0 {
                    return Err(config(format!(
                        "space: cantor needs dim in 1..=2 and level ≥ 1, got dim = {dim}, level = {level}"
                    )));
                }
            }
            SpaceSpec::File { .. } => {}
        }
        let cert = &self.certificate;
        for (name, r) in [("r_min", cert.r_min), ("r_max", cert.r_max)] {
            if let Some(r) = r {
                if !(r > 0.0 && r.is_finite()) {
                    return Err(config(format!("certificate.{name}: must be positive, got {r}")));
                }
            }
        }
        if let (Some(lo), Some(hi)) = (cert.r_min, cert.r_max) {
            if lo >= hi {
                return Err(config(format!("certificate: need r_min < r_max, got [{lo}, {hi}]")));
            }
        }
        if let Some(k) = &self.kernel {
            if let Some(nu) = k.nu {
                if !(nu > 0.0 && nu.is_finite()) {
                    return Err(config(format!("kernel.nu: must be positive, got {nu}")));
                }
            }
            match k.pattern {
                PatternKind::RandomPm1 if k.seed.is_none() && self.seed.is_none() => {
                    return Err(config("kernel.seed: random-pm1 needs a kernel seed or a global seed"));
                }
                PatternKind::Custom if k.table.is_none() => {
                    return Err(config("kernel.table: the custom pattern needs a sign table"));
                }
                _ => {}
            }
        }
        for (name, spec) in &self.fields {
            let at = format!("fields.{name}");
            if name.is_empty() {
                return Err(config("fields: field names must be non-empty"));
            }
            match spec {
                FieldSpec::Random { distribution, seed } => {
                    distribution.validate().map_err(core(&at))?;
                    if seed.is_none() && self.seed.is_none() {
                        return Err(config(format!("{at}.seed: random field needs a seed or a global seed")));
                    }
                }
                FieldSpec::Expr { expr } => {
                    let e = Expr::parse(expr).map_err(|e| config(format!("{at}.expr: {e}")))?;
                    if let (Some(k), Some(dim)) = (e.max_coord(), self.space.dim()) {
                        if k >= dim {
                            return Err(config(format!(
                                "{at}.expr: coordinate x{k} does not exist in dimension {dim}"
                            )));
                        }
                    }
                }
                FieldSpec::File { .. } => {}
            }
        }
        for (i, check) in self.checks.iter().enumerate() {
            self.validate_check(&format!("checks[{i}]"), check)?;
        }
        Ok(())
    }

    fn validate_check(&self, at: &str, check: &CheckSpec) -> CliResult<()> {
        for (role, name) in check.field_refs() {
            if !self.fields.contains_key(name) {
                return Err(config(format!("{at}.{role}: unknown field `{name}`")));
            }
        }
        if check.needs_kernel() && self.kernel.is_none() {
            return Err(config(format!("{at}: {} needs a kernel", check.id())));
        }
        let params_at = format!("{at}.params");
        match check {
            CheckSpec::Thm1 { .. } => {}
            CheckSpec::Thm2 { params, .. } => {
                morrey(&params_at, params.p, params.q)?;
                if params.s.is_none_or(|s| !(s > 0.0)) {
                    return Err(config(format!("{params_at}.s: thm2 needs a positive Riesz order s")));
                }
            }
            CheckSpec::Thm3 { params, .. } => morrey(&params_at, params.p, params.q)?,
            CheckSpec::HedbergSplit { params, .. } => {
                morrey(&params_at, params.p, params.q)?;
                if !(params.s > 0.0) {
                    return Err(config(format!("{params_at}.s: must be positive, got {}", params.s)));
                }
                if params.points.is_empty() && self.seed.is_none() {
                    return Err(config(format!(
                        "{params_at}.points: sampled points need a global seed when none are listed"
                    )));
                }
            }
            CheckSpec::Functional { case, params, .. } => {
                morrey(&params_at, params.p, params.q)?;
                let case_at = format!("{at}.case");
                match case {
                    FunctionalCase::Morrey { p1, q1 } => morrey(&case_at, *p1, *q1)?,
                    FunctionalCase::Orlicz { phi } => phi.validate().map_err(core(&case_at))?,
                    FunctionalCase::Varexp { exponent } => {
                        norm_spec(&case_at, &NormSpec::Varexp { exponent: exponent.clone() })?
                    }
                    _ => {}
                }
            }
            CheckSpec::MaximalBound { norm, trials, distribution, seed } => {
                norm_spec(&format!("{at}.norm"), norm)?;
                distribution.validate().map_err(core(&format!("{at}.distribution")))?;
                if *trials == 0 {
                    return Err(config(format!("{at}.trials: need at least one trial")));
                }
                if seed.is_none() && self.seed.is_none() {
                    return Err(config(format!("{at}.seed: needs a seed or a global seed")));
                }
            }
            CheckSpec::Poincare { params, balls, .. } => {
                params.validate().map_err(core(&params_at))?;
                if let Some(balls) = balls {
                    if balls.iter().any(|&(_, r)| !(r > 0.0 && r.is_finite())) {
                        return Err(config(format!("{at}.balls: radii must be positive")));
                    }
                }
            }
            CheckSpec::Sharpness { target, iterations, seed } => {
                let t = &target.params;
                if target.which != Theorem::Thm1 {
                    morrey(&format!("{at}.target.params"), t.p, t.q)?;
                }
                target.start.validate().map_err(core(&format!("{at}.target.start")))?;
                if *iterations == 0 {
                    return Err(config(format!("{at}.iterations: need at least one iteration")));
                }
                if seed.is_none() && self.seed.is_none() {
                    return Err(config(format!("{at}.seed: needs a seed or a global seed")));
                }
            }
        }
        Ok(())
    }
}
