//! Empirical Ahlfors regularity: fitted exponent and extremal mass constants
//! over a window of radii, plus the doubling bound they imply.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::space::Space;

/// Log-spaced radii per decade used when fitting the exponent.
pub const RADII_PER_DECADE: usize = 12;

/// Fitted `ν̂` with constants `ĉ₁ ≤ ĉ₂` such that
/// `ĉ₁·r^ν̂ ≤ μ(B(x,r)) ≤ ĉ₂·r^ν̂` on every sampled `(x, r)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AhlforsCertificate {
    pub nu_hat: f64,
    pub c1_hat: f64,
    pub c2_hat: f64,
    pub r_min: f64,
    pub r_max: f64,
    pub sample_count: usize,
    /// Radii of the regression grid.
    pub radii: Vec<f64>,
    /// Every radius at which the extremal constants were taken
    /// (the regression grid plus its doublings that stay in range).
    pub extremal_radii: Vec<f64>,
    pub centers: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CenterSelection {
    /// Centers at least `r_max` away from the bounding box.
    Interior,
    All,
}

/// Default certification window: three times the minimal spacing up to a
/// quarter of the diameter.
pub fn default_window(space: &Space) -> (f64, f64) {
    (3.0 * space.min_spacing(), space.diameter() / 4.0)
}

pub fn select_centers(space: &Space, selection: CenterSelection, r_max: f64) -> Vec<usize> {
    match selection {
        CenterSelection::All => (0..space.len()).collect(),
        CenterSelection::Interior => {
            let c = space.interior_centers(r_max);
            if c.is_empty() {
                (0..space.len()).collect()
            } else {
                c
            }
        }
    }
}

/// Log-spaced radii from `r_min` to `r_max` inclusive, at least
/// [`RADII_PER_DECADE`] per decade. Empty when the window is empty.
pub fn log_radii(r_min: f64, r_max: f64) -> Vec<f64> {
    if !(r_max >= r_min) {
        return Vec::new();
    }
    let decades = (r_max / r_min).log10();
    let steps = (RADII_PER_DECADE as f64 * decades - 1e-9).ceil().max(0.0) as usize;
    if steps == 0 {
        return vec![r_min];
    }
    (0..=steps)
        .map(|k| {
            if k == steps {
                r_max
            } else {
                r_min * (r_max / r_min).powf(k as f64 / steps as f64)
            }
        })
        .collect()
}

pub fn certify_ahlfors(
    space: &Space,
    r_min: f64,
    r_max: f64,
    centers: &[usize],
) -> Result<AhlforsCertificate> {
    if !(r_min > 0.0 && r_min.is_finite() && r_max.is_finite()) {
        return Err(invalid(format!("radius window [{r_min}, {r_max}] must be positive and finite")));
    }
    if centers.is_empty() {
        return Err(invalid("center set is empty"));
    }
    if let Some(&c) = centers.iter().find(|&&c| c >= space.len()) {
        return Err(invalid(format!("center {c} is not a point of the space")));
    }
    let radii = log_radii(r_min, r_max);
    if radii.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "window [{r_min}, {r_max}] contains fewer than 2 sample radii"
        )));
    }

    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    let mut count = 0usize;
    for &x in centers {
        for &r in &radii {
            let lx = r.ln();
            let ly = space.ball_mass(x, r).ln();
            sx += lx;
            sy += ly;
            sxx += lx * lx;
            sxy += lx * ly;
            count += 1;
        }
    }
    let m = count as f64;
    let nu_hat = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    if !(nu_hat > 0.0 && nu_hat.is_finite()) {
        return Err(Error::InsufficientData(format!(
            "fitted exponent {nu_hat} is not positive; window is below the point spacing"
        )));
    }

    let mut extremal_radii = radii.clone();
    extremal_radii.extend(radii.iter().map(|r| 2.0 * r).filter(|&r| r <= r_max * (1.0 + 1e-12)));
    extremal_radii.sort_by(f64::total_cmp);

    let mut c1 = f64::INFINITY;
    let mut c2: f64 = 0.0;
    for &x in centers {
        for &r in &extremal_radii {
            let ratio = space.ball_mass(x, r) / r.powf(nu_hat);
            c1 = c1.min(ratio);
            c2 = c2.max(ratio);
        }
    }
    Ok(AhlforsCertificate {
        nu_hat,
        c1_hat: c1,
        c2_hat: c2,
        r_min,
        r_max,
        sample_count: centers.len() * extremal_radii.len(),
        radii,
        extremal_radii,
        centers: centers.to_vec(),
    })
}

impl AhlforsCertificate {
    /// `2^(1-ν̂)·ĉ₂/ĉ₁`.
    pub fn condition_value(&self) -> f64 {
        2f64.powf(1.0 - self.nu_hat) * self.c2_hat / self.c1_hat
    }

    /// Re-checks `ĉ₁ ≤ μ(B)/r^ν̂ ≤ ĉ₂` on every recorded sample; returns the
    /// number of samples outside the band.
    pub fn soundness_violations(&self, space: &Space) -> usize {
        let mut bad = 0;
        for &x in &self.centers {
            for &r in &self.extremal_radii {
                let ratio = space.ball_mass(x, r) / r.powf(self.nu_hat);
                if ratio < self.c1_hat || ratio > self.c2_hat {
                    bad += 1;
                }
            }
        }
        bad
    }
}

/// Outcome of the constant condition `2^(1-ν)·c₂/c₁ < 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionStatus {
    pub holds: bool,
    pub value: f64,
}

pub fn theorem1_condition(cert: &AhlforsCertificate) -> ConditionStatus {
    condition_from_parts(cert.nu_hat, cert.c2_hat / cert.c1_hat)
}

pub fn condition_from_parts(nu: f64, ratio: f64) -> ConditionStatus {
    let value = 2f64.powf(1.0 - nu) * ratio;
    ConditionStatus {
        holds: value < 1.0,
        value,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DoublingReport {
    /// `ĉ₂·2^ν̂/ĉ₁`.
    pub d_theory: f64,
    /// Largest observed `μ(B(x,2r))/μ(B(x,r))`.
    pub d_empirical: f64,
    pub pairs: usize,
}

pub const DOUBLING_TOL: f64 = 1e-12;

/// Compares observed doubling ratios against the bound implied by the certificate.
pub fn check_doubling(space: &Space, cert: &AhlforsCertificate) -> Result<DoublingReport> {
    let d_theory = cert.c2_hat * 2f64.powf(cert.nu_hat) / cert.c1_hat;
    let mut d_emp: f64 = 0.0;
    let mut pairs = 0;
    for &x in &cert.centers {
        for &r in &cert.radii {
            if 2.0 * r > cert.r_max * (1.0 + 1e-12) {
                continue;
            }
            let ratio = space.ball_mass(x, 2.0 * r) / space.ball_mass(x, r);
            d_emp = d_emp.max(ratio);
            pairs += 1;
        }
    }
    if pairs > 0 && d_emp > d_theory * (1.0 + DOUBLING_TOL) {
        return Err(Error::Consistency(format!(
            "observed doubling ratio {d_emp} exceeds the certified bound {d_theory}"
        )));
    }
    Ok(DoublingReport {
        d_theory,
        d_empirical: d_emp,
        pairs,
    })
}
