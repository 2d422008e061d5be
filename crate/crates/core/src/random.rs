//! Seeded random fields.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::field::ScalarField;
use crate::space::Space;

/// How the values of a random field are drawn.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FieldDistribution {
    /// Independent values, uniform on `[lo, hi)`.
    Uniform { lo: f64, hi: f64 },
    /// `10^u` with `u` uniform on `[lo, hi)`: positive and spread over decades.
    LogUniform { lo: f64, hi: f64 },
    /// A sum of Gaussian bumps in `[0,1]^dim` evaluated at the point coordinates,
    /// so refinements of a grid sample one continuum function.
    Bumps { count: usize },
}

impl Default for FieldDistribution {
    fn default() -> Self {
        FieldDistribution::Uniform { lo: 0.0, hi: 1.0 }
    }
}

impl FieldDistribution {
    pub fn validate(&self) -> Result<()> {
        match *self {
            FieldDistribution::Uniform { lo, hi } | FieldDistribution::LogUniform { lo, hi } => {
                if lo.is_finite() && hi.is_finite() && lo < hi {
                    Ok(())
                } else {
                    Err(invalid(format!("random field range needs lo < hi, got [{lo}, {hi})")))
                }
            }
            FieldDistribution::Bumps { count } => {
                if count >= 1 {
                    Ok(())
                } else {
                    Err(invalid("bump field needs at least one bump"))
                }
            }
        }
    }

    pub fn sample(&self, space: &Space, seed: u64) -> Result<ScalarField> {
        self.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        match *self {
            FieldDistribution::Uniform { lo, hi } => {
                ScalarField::new(space, (0..space.len()).map(|_| rng.random_range(lo..hi)).collect())
            }
            FieldDistribution::LogUniform { lo, hi } => ScalarField::new(
                space,
                (0..space.len()).map(|_| 10f64.powf(rng.random_range(lo..hi))).collect(),
            ),
            FieldDistribution::Bumps { count } => {
                let dim = space
                    .dim()
                    .ok_or_else(|| invalid("bump fields need point coordinates"))?;
                let bumps: Vec<(Vec<f64>, f64, f64)> = (0..count)
                    .map(|_| {
                        let center: Vec<f64> = (0..dim).map(|_| rng.random_range(0.0..1.0)).collect();
                        let amp = rng.random_range(0.2..1.0);
                        let width = rng.random_range(0.05..0.3);
                        (center, amp, width)
                    })
                    .collect();
                ScalarField::from_coords(space, |x| {
                    bumps
                        .iter()
                        .map(|(c, a, w)| {
                            let d2: f64 = c.iter().zip(x).map(|(ci, xi)| (ci - xi).powi(2)).sum();
                            a * (-d2 / (2.0 * w * w)).exp()
                        })
                        .sum()
                })
            }
        }
    }
}

/// Derives the seed of the `index`-th item from a base seed.
pub fn derive_seed(base: u64, index: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(base);
    rng.set_stream(index.wrapping_add(1));
    rng.random()
}
