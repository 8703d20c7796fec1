use serde::{Deserialize, Serialize};

use super::SpacetimeMesh;
use crate::error::{Error, Result};

/// Nodal values of a scalar field, indexed by node id.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscreteField {
    values: Vec<f64>,
}

impl DiscreteField {
    pub fn new(mesh: &SpacetimeMesh, values: Vec<f64>) -> Result<Self> {
        if values.len() != mesh.num_nodes() {
            return Err(Error::FieldSize {
                expected: mesh.num_nodes(),
                found: values.len(),
            });
        }
        Ok(Self { values })
    }

    pub fn constant(mesh: &SpacetimeMesh, value: f64) -> Self {
        Self {
            values: vec![value; mesh.num_nodes()],
        }
    }

    /// Samples `f(t, x)` at the mesh's reference coordinates.
    pub fn sample(mesh: &SpacetimeMesh, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let (coords, _) = mesh.reference_frame()?;
        Ok(Self {
            values: coords.iter().map(|&[t, x]| f(t, x)).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, node: usize) -> f64 {
        self.values[node]
    }

    pub fn set(&mut self, node: usize, value: f64) {
        self.values[node] = value;
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn slice_values(&self, mesh: &SpacetimeMesh, k: usize) -> Vec<f64> {
        mesh.slices()[k].iter().map(|&n| self.values[n]).collect()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}
