//! Rough kernels: size-bounded, no smoothness, exactly null on every
//! distance shell.

use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::space::Space;

/// Sign pattern `ω(x, y)` of the raw kernel `ω(x,y)/d(x,y)^ν`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum AngularPattern {
    /// Sign of the first coordinate of `y - x`; ties count as `+1`.
    SignFirstCoordinate,
    /// Independent `±1` per ordered pair, reproducible from `seed`.
    RandomPm1 { seed: u64 },
    /// Explicit row-major `N × N` table (diagonal ignored).
    Custom { table: Vec<f64> },
}

impl AngularPattern {
    pub fn name(&self) -> &'static str {
        match self {
            AngularPattern::SignFirstCoordinate => "sign-first-coordinate",
            AngularPattern::RandomPm1 { .. } => "random-pm1",
            AngularPattern::Custom { .. } => "custom",
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            AngularPattern::RandomPm1 { seed } => Some(*seed),
            _ => None,
        }
    }
}

/// Off-diagonal kernel values `K(x, y)` on a space, with their certificates.
#[derive(Clone, Debug)]
pub struct RoughKernelMatrix {
    n: usize,
    space_id: u64,
    values: Vec<f64>,
    pub size_constant: f64,
    pub shell_null_residual: f64,
    pub nu_used: f64,
    pub pattern: AngularPattern,
    pub projected: bool,
}

impl RoughKernelMatrix {
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn space_id(&self) -> u64 {
        self.space_id
    }

    /// `K(x, y)` for `x ≠ y`.
    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        debug_assert_ne!(x, y);
        self.values[x * self.n + y]
    }

    pub fn row(&self, x: usize) -> &[f64] {
        &self.values[x * self.n..(x + 1) * self.n]
    }

    /// `max |K(x,y)|·μ(y)` over off-diagonal pairs; the natural scale for residuals.
    pub fn scale(&self, space: &Space) -> f64 {
        let mut m: f64 = 0.0;
        for x in 0..self.n {
            for y in 0..self.n {
                if x != y {
                    m = m.max(self.get(x, y).abs() * space.weight(y));
                }
            }
        }
        m
    }

    pub fn check_space(&self, space: &Space) -> Result<()> {
        if self.space_id == space.id() {
            Ok(())
        } else {
            Err(crate::error::Error::SpaceMismatch)
        }
    }

    /// Replaces every shell of every row by its weighted-mean-free version.
    pub fn project(&mut self, space: &Space) {
        let n = self.n;
        self.values
            .par_chunks_mut(n)
            .enumerate()
            .for_each(|(x, row)| project_row(space, x, row));
        self.projected = true;
        self.refresh_certificates(space);
    }

    fn refresh_certificates(&mut self, space: &Space) {
        self.size_constant = size_constant(space, self, self.nu_used);
        self.shell_null_residual = null_residual(space, self);
    }

    /// Writes the matrix (row-major little-endian `f64`, NaN on the diagonal)
    /// and a JSON sidecar next to it.
    pub fn export(&self, matrix_path: &Path, sidecar_path: &Path) -> Result<()> {
        let mut buf = Vec::with_capacity(self.values.len() * 8);
        for x in 0..self.n {
            for y in 0..self.n {
                let v = if x == y { f64::NAN } else { self.get(x, y) };
                buf.extend_from_slice(&v.to_le_bytes());
            }
        }
        fs::write(matrix_path, buf)?;
        let sidecar = KernelSidecar {
            nu: self.nu_used,
            size_constant: self.size_constant,
            null_residual: self.shell_null_residual,
            pattern: self.pattern.name().to_string(),
            seed: self.pattern.seed(),
        };
        fs::write(sidecar_path, serde_json::to_string_pretty(&sidecar)?)?;
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelSidecar {
    pub nu: f64,
    pub size_constant: f64,
    pub null_residual: f64,
    pub pattern: String,
    pub seed: Option<u64>,
}

fn project_row(space: &Space, x: usize, row: &mut [f64]) {
    let shells = space.shells(x);
    for k in 1..shells.len() {
        let members = shells.members(k);
        let mut num = 0.0;
        let mut den = 0.0;
        for &y in members {
            num += row[y as usize] * space.weight(y as usize);
            den += space.weight(y as usize);
        }
        let mean = num / den;
        for &y in members {
            row[y as usize] -= mean;
        }
    }
}

fn size_constant(space: &Space, k: &RoughKernelMatrix, nu: f64) -> f64 {
    let n = k.n;
    let mut c: f64 = 0.0;
    for x in 0..n {
        for y in 0..n {
            if x != y {
                c = c.max(k.get(x, y).abs() * space.dist(x, y).powf(nu));
            }
        }
    }
    c
}

/// Per-row shell sums `Σ_{y ∈ shell} K(x,y) μ(y)`, outermost index = shell.
fn shell_sums(space: &Space, k: &RoughKernelMatrix, x: usize) -> Vec<f64> {
    let shells = space.shells(x);
    (1..shells.len())
        .map(|s| {
            shells
                .members(s)
                .iter()
                .map(|&y| k.get(x, y as usize) * space.weight(y as usize))
                .sum()
        })
        .collect()
}

fn null_residual(space: &Space, k: &RoughKernelMatrix) -> f64 {
    (0..k.n)
        .into_par_iter()
        .map(|x| shell_sums(space, k, x).iter().fold(0.0f64, |m, s| m.max(s.abs())))
        .reduce(|| 0.0, f64::max)
}

/// Builds `K₀(x,y) = ω(x,y)/d(x,y)^ν` and, when `project` is set, removes the
/// weighted mean of each distance shell so every annulus integrates to zero.
pub fn build_rough_kernel(
    space: &Space,
    nu: f64,
    pattern: AngularPattern,
    project: bool,
) -> Result<RoughKernelMatrix> {
    if !(nu > 0.0 && nu.is_finite()) {
        return Err(invalid(format!("kernel exponent must be positive, got {nu}")));
    }
    let n = space.len();
    if n < 2 {
        return Err(invalid("a kernel needs at least two points"));
    }
    match &pattern {
        AngularPattern::SignFirstCoordinate if space.dim().is_none() => {
            return Err(invalid("sign-first-coordinate pattern needs point coordinates"))
        }
        AngularPattern::Custom { table } if table.len() != n * n => {
            return Err(invalid(format!("custom pattern table has {} entries, expected {}", table.len(), n * n)))
        }
        _ => {}
    }
    let mut values = vec![0.0; n * n];
    values.par_chunks_mut(n).enumerate().for_each(|(x, row)| {
        let mut rng = match &pattern {
            AngularPattern::RandomPm1 { seed } => {
                let mut r = ChaCha8Rng::seed_from_u64(*seed);
                r.set_stream(x as u64);
                Some(r)
            }
            _ => None,
        };
        for (y, slot) in row.iter_mut().enumerate() {
            let omega = match &pattern {
                AngularPattern::SignFirstCoordinate => {
                    let a = space.coords(x).expect("checked")[0];
                    let b = space.coords(y).expect("checked")[0];
                    if b - a < 0.0 {
                        -1.0
                    } else {
                        1.0
                    }
                }
                AngularPattern::RandomPm1 { .. } => {
                    let bit = rng.as_mut().expect("seeded").random::<bool>();
                    if bit {
                        1.0
                    } else {
                        -1.0
                    }
                }
                AngularPattern::Custom { table } => table[x * n + y],
            };
            *slot = if x == y { 0.0 } else { omega / space.dist(x, y).powf(nu) };
        }
    });
    let mut k = RoughKernelMatrix {
        n,
        space_id: space.id(),
        values,
        size_constant: 0.0,
        shell_null_residual: 0.0,
        nu_used: nu,
        pattern,
        projected: false,
    };
    if project {
        k.project(space);
    } else {
        k.refresh_certificates(space);
    }
    Ok(k)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelAudit {
    /// Largest `|Σ_{shell} K μ|` over centers and shells.
    pub null_residual: f64,
    /// Largest `|Σ_{a<d<b} K μ|` over centers and shell-midpoint pairs `a < b`.
    pub annulus_residual: f64,
    /// Largest `|K|·d^ν`.
    pub size_constant: f64,
    /// Largest number of shells seen from one center.
    pub max_shell_count: usize,
}

/// Recomputes the null and size certificates of a kernel from scratch.
pub fn verify_kernel(space: &Space, kernel: &RoughKernelMatrix) -> Result<KernelAudit> {
    kernel.check_space(space)?;
    let per_row: Vec<(f64, f64, usize)> = (0..kernel.n)
        .into_par_iter()
        .map(|x| {
            let sums = shell_sums(space, kernel, x);
            let null = sums.iter().fold(0.0f64, |m, s| m.max(s.abs()));
            // annuli between shell midpoints are contiguous runs of shells:
            // the largest |run sum| is the spread of the prefix sums
            let (mut lo, mut hi, mut acc) = (0.0f64, 0.0f64, 0.0);
            for s in &sums {
                acc += s;
                lo = lo.min(acc);
                hi = hi.max(acc);
            }
            (null, hi - lo, sums.len())
        })
        .collect();
    Ok(KernelAudit {
        null_residual: per_row.iter().fold(0.0, |m, r| m.max(r.0)),
        annulus_residual: per_row.iter().fold(0.0, |m, r| m.max(r.1)),
        size_constant: size_constant(space, kernel, kernel.nu_used),
        max_shell_count: per_row.iter().map(|r| r.2).max().unwrap_or(0),
    })
}
