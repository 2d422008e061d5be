use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use metric_lab::ahlfors::{default_window, log_radii, select_centers};
use metric_lab::random::derive_seed;
use metric_lab::verify::{plan_functional, poincare_report, validate_pointwise, SharpnessResult};
use metric_lab::{
    build_rough_kernel, certify_ahlfors, check_doubling, check_functional, check_hedberg_split,
    check_pointwise_theorem, estimate_poincare_constant, graph_upper_gradient, maximal_boundedness,
    sharpness_search, theorem1_condition, verify_kernel, AhlforsCertificate, AngularPattern, CenterSelection,
    CheckContext, InequalityReport, KernelAudit, PoincareEstimate, RoughKernelMatrix, ScalarField, Space,
    SpaceDocument, Theorem,
};
use rayon::prelude::*;

use crate::bundle::{write_bundle, CertificateSummary, Entry, EntryKind, KernelSummary, Manifest, SharpnessRecord};
use crate::config::{parse_config, CheckSpec, ExperimentConfig, FieldSpec, KernelSpec, PatternKind, SpaceSpec};
use crate::error::{config, CliError, CliResult};
use crate::expr::Expr;

/// Command-line overrides applied on top of the config file.
#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub seed: Option<u64>,
    pub tolerance_scale: Option<f64>,
    pub cache_dir: Option<PathBuf>,
    /// Replaces `output.dir`.
    pub output: Option<PathBuf>,
}

#[derive(Clone, Debug)]
pub enum Outcome {
    Report(InequalityReport),
    Sharpness(SharpnessRecord),
}

impl Outcome {
    pub fn passed(&self) -> bool {
        match self {
            Outcome::Report(r) => r.passed,
            Outcome::Sharpness(_) => true,
        }
    }
}

#[derive(Debug)]
pub struct RunSummary {
    pub bundle: PathBuf,
    pub manifest: Manifest,
    pub outcomes: Vec<Outcome>,
}

impl RunSummary {
    /// `Err(Violations)` naming each failed report and its offending points.
    pub fn verdict(&self) -> CliResult<()> {
        let mut lines = Vec::new();
        for (entry, outcome) in self.manifest.entries.iter().zip(&self.outcomes) {
            if let Outcome::Report(r) = outcome {
                if !r.passed {
                    lines.push(failure_line(&entry.file, r));
                }
            }
        }
        if lines.is_empty() {
            Ok(())
        } else {
            Err(CliError::Violations(lines.join("\n")))
        }
    }
}

const MAX_LISTED_POINTS: usize = 20;

fn failure_line(file: &str, r: &InequalityReport) -> String {
    let mut line = format!(
        "{file}: {} [{}] failed: constant {:e}, {} violations",
        r.inequality_id.as_str(),
        r.label,
        r.empirical_constant,
        r.violations
    );
    if let Some(t) = r.threshold {
        line.push_str(&format!(", threshold {t}"));
    }
    if !r.violation_points.is_empty() {
        let ids: Vec<String> = r.violation_points.iter().take(MAX_LISTED_POINTS).map(|p| p.to_string()).collect();
        line.push_str(&format!(", points {}", ids.join(" ")));
        if r.violation_points.len() > MAX_LISTED_POINTS {
            line.push_str(" ...");
        }
    }
    line
}

pub fn load_config(path: &Path) -> CliResult<ExperimentConfig> {
    let text = fs::read_to_string(path).map_err(CliError::io(path))?;
    parse_config(&text, path)
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    use sha2::{Digest, Sha256};
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Reads a space document, using the distance cache when a directory is given.
pub fn load_space_document(path: &Path, cache_dir: Option<&Path>) -> CliResult<Space> {
    let text = fs::read_to_string(path).map_err(CliError::io(path))?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    let doc: SpaceDocument = serde_path_to_error::deserialize(de).map_err(|e| {
        let at = e.path().to_string();
        let inner = e.into_inner();
        config(format!(
            "{}: line {} column {}: at `{at}`: {inner}",
            path.display(),
            inner.line(),
            inner.column()
        ))
    })?;
    Ok(doc.into_space_cached(cache_dir)?)
}

fn build_space(spec: &SpaceSpec, base: &Path, cache_dir: Option<&Path>) -> CliResult<(Space, String)> {
    Ok(match spec {
        SpaceSpec::Grid { dim, n_per_side, weights } => (
            Space::grid(*dim, *n_per_side, *weights)?,
            format!("grid(dim={dim}, n={n_per_side}, weights={})", weight_name(*weights)),
        ),
        SpaceSpec::Cantor { level, dim } => (Space::cantor(*level, *dim)?, format!("cantor(level={level}, dim={dim})")),
        SpaceSpec::File { path } => {
            let full = resolve(base, path);
            (load_space_document(&full, cache_dir)?, format!("file({})", path.display()))
        }
    })
}

fn weight_name(w: metric_lab::WeightMode) -> String {
    serde_json::to_value(w).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default()
}

/// Dimension the builder was designed for; `None` for loaded spaces.
fn nominal_dim(spec: &SpaceSpec) -> Option<f64> {
    match spec {
        SpaceSpec::Grid { dim, .. } => Some(*dim as f64),
        SpaceSpec::Cantor { dim, .. } => Some(*dim as f64 * 2f64.ln() / 3f64.ln()),
        SpaceSpec::File { .. } => None,
    }
}

/// Certifies on the configured window. Without an explicit window, the
/// default one is used unless it holds fewer than two radii, in which case
/// `[h, diam/2]` over all centers is used instead.
pub fn certify(
    space: &Space,
    r_min: Option<f64>,
    r_max: Option<f64>,
    centers: CenterSelection,
) -> CliResult<(AhlforsCertificate, bool)> {
    let (dlo, dhi) = default_window(space);
    let explicit = r_min.is_some() || r_max.is_some();
    let (lo, hi) = (r_min.unwrap_or(dlo), r_max.unwrap_or(dhi));
    if !explicit && log_radii(lo, hi).len() < 2 {
        let (lo, hi) = (space.min_spacing(), space.diameter() / 2.0);
        let cert = certify_ahlfors(space, lo, hi, &select_centers(space, CenterSelection::All, hi))?;
        return Ok((cert, true));
    }
    let cert = certify_ahlfors(space, lo, hi, &select_centers(space, centers, hi))?;
    Ok((cert, false))
}

fn build_kernel(spec: &KernelSpec, space: &Space, nu: f64, global_seed: Option<u64>) -> CliResult<RoughKernelMatrix> {
    let pattern = match spec.pattern {
        PatternKind::SignFirstCoordinate => AngularPattern::SignFirstCoordinate,
        PatternKind::RandomPm1 => AngularPattern::RandomPm1 {
            seed: spec.seed.or(global_seed).ok_or_else(|| config("kernel.seed: missing"))?,
        },
        PatternKind::Custom => AngularPattern::Custom {
            table: spec.table.clone().unwrap_or_default(),
        },
    };
    build_rough_kernel(space, nu, pattern, spec.project).map_err(|e| config(format!("kernel: {e}")))
}

fn load_field_file(space: &Space, path: &Path) -> CliResult<ScalarField> {
    let text = fs::read_to_string(path).map_err(CliError::io(path))?;
    let is_csv = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    let field = if is_csv {
        ScalarField::from_csv(space, &text)
    } else {
        ScalarField::from_json(space, &text)
    };
    field.map_err(|e| config(format!("{}: {e}", path.display())))
}

fn build_fields(cfg: &ExperimentConfig, space: &Space, base: &Path) -> CliResult<BTreeMap<String, ScalarField>> {
    let mut out = BTreeMap::new();
    for (index, (name, spec)) in cfg.fields.iter().enumerate() {
        let at = format!("fields.{name}");
        let field = match spec {
            FieldSpec::Random { distribution, seed } => {
                let seed = match (seed, cfg.seed) {
                    (Some(s), _) => *s,
                    (None, Some(g)) => derive_seed(g, index as u64),
                    (None, None) => return Err(config(format!("{at}.seed: missing"))),
                };
                distribution.sample(space, seed)?
            }
            FieldSpec::Expr { expr } => {
                let e = Expr::parse(expr).map_err(|e| config(format!("{at}.expr: {e}")))?;
                let dim = space
                    .dim()
                    .ok_or_else(|| config(format!("{at}.expr: the space has no coordinates")))?;
                if let Some(k) = e.max_coord().filter(|&k| k >= dim) {
                    return Err(config(format!("{at}.expr: coordinate x{k} does not exist in dimension {dim}")));
                }
                let f = ScalarField::from_coords(space, |x| e.eval(x))?;
                if let Some(i) = f.values().iter().position(|v| !v.is_finite()) {
                    return Err(config(format!("{at}.expr: formula is not finite at point {i}")));
                }
                f
            }
            FieldSpec::File { path } => load_field_file(space, &resolve(base, path))?,
        };
        out.insert(name.clone(), field);
    }
    Ok(out)
}

/// Checks every exponent constraint that involves the fitted `ν̂`.
fn validate_against_nu(cfg: &ExperimentConfig, nu: f64) -> CliResult<()> {
    for (i, check) in cfg.checks.iter().enumerate() {
        let at = format!("checks[{i}]");
        let wrap = |e: metric_lab::Error| config(format!("{at}: {e} (fitted ν̂ = {nu})"));
        match check {
            CheckSpec::Thm1 { params, .. } => validate_pointwise(Theorem::Thm1, params, nu).map_err(wrap)?,
            CheckSpec::Thm2 { params, .. } => validate_pointwise(Theorem::Thm2, params, nu).map_err(wrap)?,
            CheckSpec::Thm3 { params, .. } => validate_pointwise(Theorem::Thm3, params, nu).map_err(wrap)?,
            CheckSpec::HedbergSplit { params, .. } => {
                if !(params.s < nu / params.q) {
                    return Err(config(format!(
                        "{at}: split needs 0 < s < ν/q, got s = {}, ν/q = {}",
                        params.s,
                        nu / params.q
                    )));
                }
            }
            CheckSpec::Functional { case, params, .. } => {
                plan_functional(case, params, nu).map_err(wrap)?;
            }
            CheckSpec::Sharpness { target, .. } => validate_pointwise(target.which, &target.params, nu).map_err(wrap)?,
            CheckSpec::MaximalBound { .. } | CheckSpec::Poincare { .. } => {}
        }
    }
    Ok(())
}

struct Prepared<'a> {
    cfg: &'a ExperimentConfig,
    space: &'a Space,
    fields: &'a BTreeMap<String, ScalarField>,
    kernel: Option<&'a RoughKernelMatrix>,
}

impl Prepared<'_> {
    fn field(&self, name: &str) -> &ScalarField {
        &self.fields[name]
    }

    fn gradient(&self, f: &str, g: &Option<String>) -> CliResult<ScalarField> {
        match g {
            Some(name) => Ok(self.field(name).clone()),
            None => Ok(graph_upper_gradient(self.space, self.field(f))?.g),
        }
    }

    fn seed_for(&self, own: Option<u64>, index: usize) -> u64 {
        own.unwrap_or_else(|| derive_seed(self.cfg.seed.unwrap_or(0), 1000 + index as u64))
    }

    fn poincare(&self, check: &CheckSpec) -> CliResult<(InequalityReport, PoincareEstimate)> {
        let CheckSpec::Poincare { field, gradient, params, balls } = check else {
            unreachable!("only poincare checks are estimated here");
        };
        let f = self.field(field).clone();
        let g = self.gradient(field, gradient)?;
        let balls = match balls {
            Some(b) => b.clone(),
            None => {
                let r = self.space.diameter() / 4.0;
                (0..self.space.len()).map(|c| (c, r)).collect()
            }
        };
        if let Some(&(c, _)) = balls.iter().find(|&&(c, _)| c >= self.space.len()) {
            return Err(config(format!("poincare ball center {c} is out of range")));
        }
        let est = estimate_poincare_constant(self.space, params, &[(f, g)], &balls)?;
        Ok((poincare_report(params, &est, self.cfg.seed), est))
    }

    fn run(&self, ctx: &CheckContext<'_>, index: usize, check: &CheckSpec) -> CliResult<Outcome> {
        let kernel = || self.kernel.ok_or_else(|| config(format!("checks[{index}]: needs a kernel")));
        let report = match check {
            CheckSpec::Thm1 { field, gradient, params } | CheckSpec::Thm3 { field, gradient, params } => {
                let which = if matches!(check, CheckSpec::Thm1 { .. }) { Theorem::Thm1 } else { Theorem::Thm3 };
                let g = self.gradient(field, gradient)?;
                check_pointwise_theorem(ctx, Some(kernel()?), self.field(field), Some(&g), which, params)?
            }
            CheckSpec::Thm2 { field, params } => {
                check_pointwise_theorem(ctx, self.kernel, self.field(field), None, Theorem::Thm2, params)?
            }
            CheckSpec::HedbergSplit { field, params } => check_hedberg_split(ctx, self.field(field), params)?.0,
            CheckSpec::Functional { field, gradient, case, params } => {
                let g = self.gradient(field, gradient)?;
                check_functional(ctx, kernel()?, self.field(field), &g, case, params)?
            }
            CheckSpec::MaximalBound { norm, trials, distribution, seed } => {
                maximal_boundedness(self.space, norm, *trials, self.seed_for(*seed, index), distribution)?
            }
            CheckSpec::Poincare { .. } => self.poincare(check)?.0,
            CheckSpec::Sharpness { target, iterations, seed } => {
                let seed = self.seed_for(*seed, index);
                let result: SharpnessResult = sharpness_search(ctx, self.kernel, target, *iterations, seed)?;
                return Ok(Outcome::Sharpness(SharpnessRecord {
                    target: *target,
                    iterations: *iterations,
                    seed,
                    result,
                }));
            }
        };
        Ok(Outcome::Report(report))
    }
}

/// Parses, validates, computes and writes the bundle. Nothing is written
/// unless every check completed.
pub fn run_experiment(config_path: &Path, opts: &RunOptions) -> CliResult<RunSummary> {
    let mut cfg = load_config(config_path)?;
    if let Some(seed) = opts.seed {
        cfg.seed = Some(seed);
    }
    if let Some(scale) = opts.tolerance_scale {
        cfg.tolerance.scale = scale;
    }
    cfg.validate()?;
    let base = config_path.parent().map(Path::to_path_buf).unwrap_or_default();
    let bundle = match &opts.output {
        Some(dir) => dir.clone(),
        None => resolve(&base, &cfg.output.dir),
    };
    // the output location does not affect any result
    let mut hashed = cfg.clone();
    hashed.output = Default::default();
    let config_hash = sha256_hex(&serde_json::to_vec(&hashed).map_err(metric_lab::Error::from)?);

    let cache = opts.cache_dir.as_deref();
    let (space, description) = build_space(&cfg.space, &base, cache)?;
    let fields = build_fields(&cfg, &space, &base)?;
    let (cert, fallback) = certify(&space, cfg.certificate.r_min, cfg.certificate.r_max, cfg.certificate.centers)
        .map_err(|e| config(format!("certificate: {e}")))?;
    validate_against_nu(&cfg, cert.nu_hat)?;

    let kernel_nu = cfg
        .kernel
        .as_ref()
        .and_then(|k| k.nu)
        .or_else(|| nominal_dim(&cfg.space))
        .unwrap_or(cert.nu_hat);
    let kernel = match &cfg.kernel {
        Some(spec) => Some(build_kernel(spec, &space, kernel_nu, cfg.seed)?),
        None => None,
    };
    let audit: Option<KernelAudit> = kernel.as_ref().map(|k| verify_kernel(&space, k)).transpose()?;
    let doubling = check_doubling(&space, &cert)?;

    let prepared = Prepared {
        cfg: &cfg,
        space: &space,
        fields: &fields,
        kernel: kernel.as_ref(),
    };
    let mut ctx = CheckContext::new(&space, &cert);
    ctx.tolerance_scale = cfg.tolerance.scale;
    ctx.seed = cfg.seed;

    let mut outcomes: Vec<Option<Outcome>> = vec![None; cfg.checks.len()];
    let mut first_estimate = None;
    for (i, check) in cfg.checks.iter().enumerate() {
        if matches!(check, CheckSpec::Poincare { .. }) {
            let (report, est) = prepared.poincare(check)?;
            outcomes[i] = Some(Outcome::Report(report));
            first_estimate.get_or_insert(est);
        }
    }
    ctx.poincare = first_estimate.as_ref();
    let rest: Vec<(usize, Outcome)> = cfg
        .checks
        .par_iter()
        .enumerate()
        .filter(|(i, _)| outcomes[*i].is_none())
        .map(|(i, check)| prepared.run(&ctx, i, check).map(|o| (i, o)))
        .collect::<CliResult<_>>()?;
    for (i, o) in rest {
        outcomes[i] = Some(o);
    }
    let outcomes: Vec<Outcome> = outcomes.into_iter().map(|o| o.expect("every check ran")).collect();

    let entries = cfg
        .checks
        .iter()
        .zip(&outcomes)
        .enumerate()
        .map(|(i, (check, outcome))| {
            let (kind, label) = match outcome {
                Outcome::Report(r) => (EntryKind::Report, r.label.clone()),
                Outcome::Sharpness(s) => (EntryKind::Sharpness, s.target.which.id().as_str().to_string()),
            };
            Entry {
                file: format!("reports/{i:02}-{}.json", check.id()),
                kind,
                inequality_id: check.id().to_string(),
                label,
                passed: outcome.passed(),
            }
        })
        .collect();
    let cond = theorem1_condition(&cert);
    let manifest = Manifest {
        schema_version: metric_lab::verify::SCHEMA_VERSION,
        tool: format!("metric-lab {}", env!("CARGO_PKG_VERSION")),
        config_hash,
        seed: cfg.seed,
        tolerance_scale: cfg.tolerance.scale,
        space: description,
        points: space.len(),
        certificate: CertificateSummary::from(&cert),
        window_fallback: fallback,
        condition: cond,
        doubling,
        kernel: audit.map(|a| KernelSummary {
            nu: kernel_nu,
            pattern: cfg.kernel.as_ref().map(|k| k.pattern).expect("kernel spec"),
            project: cfg.kernel.as_ref().is_some_and(|k| k.project),
            audit: a,
        }),
        entries,
    };
    write_bundle(&bundle, &manifest, &outcomes)?;
    Ok(RunSummary { bundle, manifest, outcomes })
}

/// Certificate, condition and doubling report of a space document, as JSON.
pub fn certify_document(
    path: &Path,
    cache_dir: Option<&Path>,
    r_min: Option<f64>,
    r_max: Option<f64>,
    centers: CenterSelection,
) -> CliResult<serde_json::Value> {
    let space = load_space_document(path, cache_dir)?;
    let (cert, fallback) = certify(&space, r_min, r_max, centers)?;
    let doubling = check_doubling(&space, &cert)?;
    Ok(serde_json::json!({
        "points": space.len(),
        "certificate": CertificateSummary::from(&cert),
        "window_fallback": fallback,
        "soundness_violations": cert.soundness_violations(&space),
        "condition": theorem1_condition(&cert),
        "doubling": doubling,
    }))
}
