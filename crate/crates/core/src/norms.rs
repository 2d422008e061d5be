//! Lebesgue, Lorentz, Morrey, Orlicz and variable-exponent norms of fields on
//! a discrete measure, plus Δ₂/∇₂ and log-Hölder diagnostics.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{invalid, Error, Result};
use crate::field::ScalarField;
use crate::space::Space;
use crate::sum::pairwise_sum_by;

/// Second Lorentz index: finite `m ≥ 1` or `∞`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LorentzIndex {
    Finite(f64),
    Infinite,
}

impl LorentzIndex {
    pub fn scaled(self, rho: f64) -> LorentzIndex {
        match self {
            LorentzIndex::Finite(m) => LorentzIndex::Finite(rho * m),
            LorentzIndex::Infinite => LorentzIndex::Infinite,
        }
    }
}

impl fmt::Display for LorentzIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LorentzIndex::Finite(m) => write!(f, "{m}"),
            LorentzIndex::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for LorentzIndex {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            LorentzIndex::Finite(m) => s.serialize_f64(*m),
            LorentzIndex::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for LorentzIndex {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(m) => Ok(LorentzIndex::Finite(m)),
            Raw::Text(t) if t == "inf" || t == "infinity" => Ok(LorentzIndex::Infinite),
            Raw::Text(t) => Err(serde::de::Error::custom(format!(
                "expected a number or \"inf\", got {t:?}"
            ))),
        }
    }
}

/// Shape of a Young function before rescaling.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum YoungShape {
    /// `t^p`
    Power { p: f64 },
    /// `t^p·log(e + t)`
    PowerLog { p: f64 },
    /// `t^p` up to `cap`, `+∞` beyond.
    Capped { p: f64, cap: f64 },
}

/// `Φ_ρ(t) = Φ(t^ρ)`; `rho = 1` is the plain Young function.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct YoungFunction {
    #[serde(flatten)]
    pub shape: YoungShape,
    #[serde(default = "one", skip_serializing_if = "is_one")]
    pub rho: f64,
}

fn one() -> f64 {
    1.0
}

fn is_one(v: &f64) -> bool {
    *v == 1.0
}

impl YoungFunction {
    pub fn power(p: f64) -> YoungFunction {
        YoungShape::Power { p }.into()
    }

    pub fn power_log(p: f64) -> YoungFunction {
        YoungShape::PowerLog { p }.into()
    }

    pub fn rescaled(self, rho: f64) -> YoungFunction {
        YoungFunction {
            shape: self.shape,
            rho: self.rho * rho,
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        let t = if self.rho == 1.0 { t } else { t.powf(self.rho) };
        match self.shape {
            YoungShape::Power { p } => t.powf(p),
            YoungShape::PowerLog { p } => t.powf(p) * (std::f64::consts::E + t).ln(),
            YoungShape::Capped { p, cap } => {
                if t <= cap {
                    t.powf(p)
                } else {
                    f64::INFINITY
                }
            }
        }
    }

    /// Checks `Φ(0) = 0`, monotonicity, convexity and growth on a log grid.
    pub fn validate(&self) -> Result<()> {
        let (p, cap) = match self.shape {
            YoungShape::Power { p } | YoungShape::PowerLog { p } => (p, None),
            YoungShape::Capped { p, cap } => (p, Some(cap)),
        };
        if !(p > 0.0 && p.is_finite() && self.rho > 0.0 && self.rho.is_finite()) {
            return Err(invalid("Young function exponents must be positive and finite"));
        }
        if let Some(cap) = cap {
            if !(cap > 0.0) {
                return Err(invalid("Young function cap must be positive"));
            }
        }
        if self.eval(0.0) != 0.0 {
            return Err(invalid("Young function must vanish at 0"));
        }
        let grid = log_grid(1e-6, 1e6, 241);
        let mut prev = 0.0;
        for w in grid.windows(2) {
            let (a, b) = (w[0], w[1]);
            let (fa, fb) = (self.eval(a), self.eval(b));
            if fa < prev {
                return Err(invalid("Young function must be nondecreasing"));
            }
            prev = fa;
            if fa.is_finite() && fb.is_finite() {
                let mid = self.eval(0.5 * (a + b));
                if mid > 0.5 * (fa + fb) * (1.0 + 1e-12) {
                    return Err(invalid(format!("Young function is not convex near t = {a:.3e}")));
                }
            }
        }
        if self.eval(1e6).is_finite() && self.eval(1e6) < 1e3 {
            return Err(invalid("Young function must grow without bound"));
        }
        Ok(())
    }
}

impl From<YoungShape> for YoungFunction {
    fn from(shape: YoungShape) -> Self {
        YoungFunction { shape, rho: 1.0 }
    }
}

/// A norm together with its parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum NormSpec {
    Lebesgue { p: f64 },
    Lorentz { r: f64, m: LorentzIndex },
    Morrey { p: f64, q: f64 },
    Orlicz { phi: YoungFunction },
    Varexp { exponent: Vec<f64> },
}

impl NormSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            NormSpec::Lebesgue { p } => check_lebesgue(*p),
            NormSpec::Lorentz { r, m } => check_lorentz(*r, *m),
            NormSpec::Morrey { p, q } => check_morrey(*p, *q),
            NormSpec::Orlicz { phi } => phi.validate(),
            NormSpec::Varexp { exponent } => exponent_range(exponent).map(|_| ()),
        }
    }

    pub fn norm(&self, space: &Space, f: &ScalarField) -> Result<f64> {
        match self {
            NormSpec::Lebesgue { p } => lebesgue_norm(space, f, *p),
            NormSpec::Lorentz { r, m } => lorentz_norm(space, f, *r, *m),
            NormSpec::Morrey { p, q } => morrey_norm(space, f, *p, *q),
            NormSpec::Orlicz { phi } => orlicz_luxemburg_norm(space, f, phi),
            NormSpec::Varexp { exponent } => {
                let p = ScalarField::new(space, exponent.clone())?;
                varexp_luxemburg_norm(space, f, &p)
            }
        }
    }

    /// The space `E^{ρ·}` in which `‖|f|^ρ‖_E = ‖f‖_{E^{ρ·}}^ρ`.
    pub fn rescaled(&self, rho: f64) -> NormSpec {
        match self {
            NormSpec::Lebesgue { p } => NormSpec::Lebesgue { p: rho * p },
            NormSpec::Lorentz { r, m } => NormSpec::Lorentz {
                r: rho * r,
                m: m.scaled(rho),
            },
            NormSpec::Morrey { p, q } => NormSpec::Morrey {
                p: rho * p,
                q: rho * q,
            },
            NormSpec::Orlicz { phi } => NormSpec::Orlicz {
                phi: phi.rescaled(rho),
            },
            NormSpec::Varexp { exponent } => NormSpec::Varexp {
                exponent: exponent.iter().map(|p| rho * p).collect(),
            },
        }
    }

    pub fn name(&self) -> String {
        match self {
            NormSpec::Lebesgue { p } => format!("L^{p}"),
            NormSpec::Lorentz { r, m } => format!("L^({r},{m})"),
            NormSpec::Morrey { p, q } => format!("M^({p},{q})"),
            NormSpec::Orlicz { phi } => format!("L^Phi({})", serde_json::to_string(phi).unwrap_or_default()),
            NormSpec::Varexp { exponent } => match exponent_range(exponent) {
                Ok((lo, hi)) => format!("L^p(.) with p in [{lo}, {hi}]"),
                Err(_) => "L^p(.)".into(),
            },
        }
    }
}

fn check_lebesgue(p: f64) -> Result<()> {
    if p >= 1.0 && p.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("Lebesgue exponent needs 1 ≤ p < ∞, got {p}")))
    }
}

fn check_lorentz(r: f64, m: LorentzIndex) -> Result<()> {
    if !(r >= 1.0 && r.is_finite()) {
        return Err(invalid(format!("Lorentz index needs 1 ≤ r < ∞, got {r}")));
    }
    if let LorentzIndex::Finite(m) = m {
        if !(m >= 1.0 && m.is_finite()) {
            return Err(invalid(format!("Lorentz index needs m ≥ 1, got {m}")));
        }
    }
    Ok(())
}

fn check_morrey(p: f64, q: f64) -> Result<()> {
    if p >= 1.0 && p <= q && q.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("Morrey exponents need 1 ≤ p ≤ q < ∞, got p = {p}, q = {q}")))
    }
}

/// `(p⁻, p⁺)` of a variable exponent, which must satisfy `1 < p⁻ ≤ p⁺ < ∞`.
pub fn exponent_range(p: &[f64]) -> Result<(f64, f64)> {
    let lo = p.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = p.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if p.is_empty() || !(lo > 1.0) || !hi.is_finite() {
        return Err(invalid(format!("variable exponent needs 1 < p⁻ ≤ p⁺ < ∞, got [{lo}, {hi}]")));
    }
    Ok((lo, hi))
}

pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
}

/// `(∫ |f|^p dμ)^{1/p}`.
pub fn lebesgue_norm(space: &Space, f: &ScalarField, p: f64) -> Result<f64> {
    f.check_space(space)?;
    check_lebesgue(p)?;
    let top = f.max_abs();
    if top == 0.0 {
        return Ok(0.0);
    }
    let v = f.values();
    let s = pairwise_sum_by(v.len(), &|i| (v[i].abs() / top).powf(p) * space.weight(i));
    Ok(top * s.powf(1.0 / p))
}

/// Distinct positive levels of `|f|` with the mass strictly above each previous level:
/// returns `(α_1 < … < α_k, T_0 ≥ … ≥ T_{k-1})` where `T_j = μ{|f| > α_j}`, `α_0 = 0`.
fn distribution_steps(space: &Space, f: &ScalarField) -> (Vec<f64>, Vec<f64>) {
    let mut pts: Vec<(f64, f64)> = f
        .values()
        .iter()
        .zip(space.weights())
        .filter(|(v, _)| **v != 0.0)
        .map(|(v, w)| (v.abs(), *w))
        .collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut levels: Vec<f64> = Vec::new();
    let mut level_mass: Vec<f64> = Vec::new();
    for (a, w) in pts {
        if levels.last() == Some(&a) {
            *level_mass.last_mut().unwrap() += w;
        } else {
            levels.push(a);
            level_mass.push(w);
        }
    }
    let mut tails = vec![0.0; levels.len()];
    let mut acc = 0.0;
    for j in (0..levels.len()).rev() {
        acc += level_mass[j];
        tails[j] = acc;
    }
    (levels, tails)
}

/// `r^{1/m} (∫_0^∞ (α μ{|f|>α}^{1/r})^m dα/α)^{1/m}`, or `sup_α α μ{|f|>α}^{1/r}`
/// for `m = ∞`, evaluated in closed form on the step distribution function.
pub fn lorentz_norm(space: &Space, f: &ScalarField, r: f64, m: LorentzIndex) -> Result<f64> {
    f.check_space(space)?;
    check_lorentz(r, m)?;
    let top = f.max_abs();
    if top == 0.0 {
        return Ok(0.0);
    }
    let (levels, tails) = distribution_steps(space, f);
    match m {
        LorentzIndex::Infinite => Ok(levels
            .iter()
            .zip(&tails)
            .map(|(a, t)| a * t.powf(1.0 / r))
            .fold(0.0, f64::max)),
        LorentzIndex::Finite(m) => {
            // on [α_j, α_{j+1}) the distribution is T_j; ∫ α^{m-1} dα = (α_{j+1}^m − α_j^m)/m
            let scaled: Vec<f64> = levels.iter().map(|a| (a / top).powf(m)).collect();
            let s = pairwise_sum_by(levels.len(), &|j| {
                let below = if j == 0 { 0.0 } else { scaled[j - 1] };
                tails[j].powf(m / r) * (scaled[j] - below)
            });
            Ok(top * (r * s / m).powf(1.0 / m))
        }
    }
}

/// `sup_{x,r} (μ(B)^{p/q−1} ∫_B |f|^p dμ)^{1/p}` over realizable point-centered balls.
pub fn morrey_norm(space: &Space, f: &ScalarField, p: f64, q: f64) -> Result<f64> {
    f.check_space(space)?;
    check_morrey(p, q)?;
    let top = f.max_abs();
    if top == 0.0 {
        return Ok(0.0);
    }
    let powered: Vec<f64> = f.values().iter().map(|v| (v.abs() / top).powf(p)).collect();
    let e = p / q - 1.0;
    let best = (0..space.len())
        .map(|c| {
            let sh = space.shells(c);
            let mut integral = 0.0;
            let mut best: f64 = 0.0;
            for k in 0..sh.len() {
                for &y in sh.members(k) {
                    integral += powered[y as usize] * space.weight(y as usize);
                }
                best = best.max(sh.mass_through(k).powf(e) * integral);
            }
            best
        })
        .fold(0.0, f64::max);
    Ok(top * best.powf(1.0 / p))
}

const BRACKET_STEPS: usize = 2200;

/// Smallest `λ > 0` with `modular(λ) ≤ 1` for a modular that is nonincreasing in `λ`.
fn luxemburg(start: f64, modular: impl Fn(f64) -> f64) -> Result<f64> {
    let (mut lo, mut hi);
    if modular(start) <= 1.0 {
        hi = start;
        lo = start * 0.5;
        let mut steps = 0;
        while modular(lo) <= 1.0 {
            hi = lo;
            lo *= 0.5;
            steps += 1;
            if steps > BRACKET_STEPS || lo == 0.0 {
                return Ok(0.0);
            }
        }
    } else {
        lo = start;
        hi = start * 2.0;
        let mut steps = 0;
        while !(modular(hi) <= 1.0) {
            lo = hi;
            hi *= 2.0;
            steps += 1;
            if steps > BRACKET_STEPS || !hi.is_finite() {
                return Err(Error::UnboundedNorm("modular exceeds 1 for every λ".into()));
            }
        }
    }
    while hi - lo >= 1e-12 * hi {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if modular(mid) <= 1.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// `∫ Φ(|f|/λ) dμ`.
pub fn orlicz_modular(space: &Space, f: &ScalarField, phi: &YoungFunction, lambda: f64) -> f64 {
    let v = f.values();
    pairwise_sum_by(v.len(), &|i| {
        let t = v[i].abs() / lambda;
        if t == 0.0 {
            0.0
        } else {
            phi.eval(t) * space.weight(i)
        }
    })
}

/// `inf{λ > 0 : ∫ Φ(|f|/λ) dμ ≤ 1}`.
pub fn orlicz_luxemburg_norm(space: &Space, f: &ScalarField, phi: &YoungFunction) -> Result<f64> {
    f.check_space(space)?;
    phi.validate()?;
    let top = f.max_abs();
    if top == 0.0 {
        return Ok(0.0);
    }
    let l1: f64 = f.values().iter().zip(space.weights()).map(|(v, w)| v.abs() * w).sum();
    luxemburg(l1 + top, |lambda| orlicz_modular(space, f, phi, lambda))
}

/// `∫ (|f|/λ)^{p(x)} dμ`.
pub fn varexp_modular(space: &Space, f: &ScalarField, p: &ScalarField, lambda: f64) -> f64 {
    let (v, e) = (f.values(), p.values());
    pairwise_sum_by(v.len(), &|i| (v[i].abs() / lambda).powf(e[i]) * space.weight(i))
}

/// Luxemburg norm of the variable-exponent modular.
pub fn varexp_luxemburg_norm(space: &Space, f: &ScalarField, p: &ScalarField) -> Result<f64> {
    f.check_space(space)?;
    p.check_space(space)?;
    exponent_range(p.values())?;
    let top = f.max_abs();
    if top == 0.0 {
        return Ok(0.0);
    }
    let l1: f64 = f.values().iter().zip(space.weights()).map(|(v, w)| v.abs() * w).sum();
    luxemburg(l1 + top, |lambda| varexp_modular(space, f, p, lambda))
}

/// Reported log-Hölder moduli of a variable exponent.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogHolderDiagnostics {
    /// `max |r(x) − r(y)|·(−log d(x,y))` over pairs with `d < 1/2`.
    pub lh0: f64,
    /// `max |r(x) − r_∞|·log(e + d(x, x₀))`.
    pub lh_inf: f64,
    pub r_inf: f64,
    pub base_point: usize,
}

pub fn log_holder_diagnostics(space: &Space, r: &ScalarField, base_point: usize) -> Result<LogHolderDiagnostics> {
    r.check_space(space)?;
    if base_point >= space.len() {
        return Err(invalid("base point out of range"));
    }
    let v = r.values();
    let r_inf = v.iter().sum::<f64>() / v.len() as f64;
    let mut lh0: f64 = 0.0;
    for x in 0..space.len() {
        for y in x + 1..space.len() {
            let d = space.dist(x, y);
            if d < 0.5 {
                lh0 = lh0.max((v[x] - v[y]).abs() * -d.ln());
            }
        }
    }
    let lh_inf = (0..space.len())
        .map(|x| (v[x] - r_inf).abs() * (std::f64::consts::E + space.dist(x, base_point)).ln())
        .fold(0.0, f64::max);
    Ok(LogHolderDiagnostics {
        lh0,
        lh_inf,
        r_inf,
        base_point,
    })
}

fn diagnostic_grid() -> Vec<f64> {
    log_grid(1e-6, 1e6, 241)
}

/// `max Φ(2t)/Φ(t)` over the sample grid; finite values indicate Δ₂.
pub fn delta2_diagnostic(phi: &YoungFunction) -> f64 {
    diagnostic_grid()
        .into_iter()
        .map(|t| phi.eval(2.0 * t) / phi.eval(t))
        .fold(0.0, |m, v| if v.is_nan() { f64::INFINITY } else { m.max(v) })
}

/// `max 2C·Φ(t)/Φ(Ct)` over the sample grid; a value ≤ 1 certifies ∇₂ with this `C`.
pub fn nabla2_diagnostic(phi: &YoungFunction, c: f64) -> f64 {
    diagnostic_grid()
        .into_iter()
        .map(|t| 2.0 * c * phi.eval(t) / phi.eval(c * t))
        .fold(0.0, |m, v| if v.is_nan() { f64::INFINITY } else { m.max(v) })
}

/// Best ∇₂ diagnostic over `C = 2, 4, …, 2^20`, with the `C` achieving it.
pub fn nabla2_search(phi: &YoungFunction) -> (f64, f64) {
    (1..=20)
        .map(|k| {
            let c = f64::powi(2.0, k);
            (c, nabla2_diagnostic(phi, c))
        })
        .fold((2.0, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best })
}
