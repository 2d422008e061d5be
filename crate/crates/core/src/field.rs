//! Real-valued functions on the points of a [`Space`].

use std::fmt::Write as _;

use crate::error::{invalid, Error, Result};
use crate::space::Space;

/// Values indexed by point id, tied to the space they were built on.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    values: Vec<f64>,
    space_id: u64,
}

impl ScalarField {
    pub fn new(space: &Space, values: Vec<f64>) -> Result<ScalarField> {
        if values.len() != space.len() {
            return Err(invalid(format!(
                "field has {} values but the space has {} points",
                values.len(),
                space.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(invalid(format!("field value at point {i} is not finite")));
        }
        Ok(ScalarField {
            values,
            space_id: space.id(),
        })
    }

    pub fn constant(space: &Space, c: f64) -> ScalarField {
        ScalarField {
            values: vec![c; space.len()],
            space_id: space.id(),
        }
    }

    pub fn indicator(space: &Space, point: usize) -> ScalarField {
        let mut values = vec![0.0; space.len()];
        values[point] = 1.0;
        ScalarField {
            values,
            space_id: space.id(),
        }
    }

    /// Evaluates `f` at the coordinates of every point.
    pub fn from_coords(space: &Space, f: impl Fn(&[f64]) -> f64) -> Result<ScalarField> {
        let values = (0..space.len())
            .map(|i| {
                space
                    .coords(i)
                    .map(&f)
                    .ok_or_else(|| invalid("space has no coordinates"))
            })
            .collect::<Result<Vec<_>>>()?;
        ScalarField::new(space, values)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn space_id(&self) -> u64 {
        self.space_id
    }

    pub fn check_space(&self, space: &Space) -> Result<()> {
        if self.space_id == space.id() && self.values.len() == space.len() {
            Ok(())
        } else {
            Err(Error::SpaceMismatch)
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> ScalarField {
        ScalarField {
            values: self.values.iter().map(|&v| f(v)).collect(),
            space_id: self.space_id,
        }
    }

    pub fn zip_with(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> Result<ScalarField> {
        if self.space_id != other.space_id {
            return Err(Error::SpaceMismatch);
        }
        Ok(ScalarField {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
            space_id: self.space_id,
        })
    }

    pub fn scale(&self, c: f64) -> ScalarField {
        self.map(|v| c * v)
    }

    pub fn abs(&self) -> ScalarField {
        self.map(f64::abs)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.values).expect("finite floats serialize")
    }

    pub fn from_json(space: &Space, json: &str) -> Result<ScalarField> {
        let values: Vec<f64> = serde_json::from_str(json)?;
        ScalarField::new(space, values)
    }

    /// Two-column CSV `point_id,value`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("point_id,value\n");
        for (i, v) in self.values.iter().enumerate() {
            let _ = writeln!(out, "{i},{v}");
        }
        out
    }

    /// Reads a `point_id,value` CSV; every point must appear exactly once.
    pub fn from_csv(space: &Space, text: &str) -> Result<ScalarField> {
        let mut values = vec![f64::NAN; space.len()];
        let mut seen = vec![false; space.len()];
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || (lineno == 0 && line.starts_with("point_id")) {
                continue;
            }
            let (id, v) = line
                .split_once(',')
                .ok_or_else(|| invalid(format!("line {}: expected `point_id,value`", lineno + 1)))?;
            let id: usize = id
                .trim()
                .parse()
                .map_err(|_| invalid(format!("line {}: bad point id", lineno + 1)))?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| invalid(format!("line {}: bad value", lineno + 1)))?;
            if id >= space.len() || seen[id] {
                return Err(invalid(format!("line {}: point id {id} out of range or repeated", lineno + 1)));
            }
            seen[id] = true;
            values[id] = v;
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(invalid(format!("point {missing} has no value")));
        }
        ScalarField::new(space, values)
    }
}
