use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest ambient dimension supported by the dense blade representation.
pub const MAX_DIM: usize = 6;

/// Diagonal metric `diag(signs)` on an `n`-dimensional real vector space.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<i32>", into = "Vec<i32>")]
pub struct MetricSignature {
    signs: Vec<i8>,
}

impl MetricSignature {
    pub fn new(signs: &[i32]) -> Result<Self> {
        check_dim(signs.len())?;
        let signs = signs
            .iter()
            .map(|&s| match s {
                1 => Ok(1i8),
                -1 => Ok(-1i8),
                other => Err(Error::InvalidSign(other)),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { signs })
    }

    pub fn euclidean(dim: usize) -> Result<Self> {
        Self::new(&vec![1; dim])
    }

    /// One negative sign in the leading (time) slot, `(-, +, ..., +)`.
    pub fn lorentzian(dim: usize) -> Result<Self> {
        let mut signs = vec![1; dim];
        if let Some(first) = signs.first_mut() {
            *first = -1;
        }
        Self::new(&signs)
    }

    pub fn dim(&self) -> usize {
        self.signs.len()
    }

    pub fn signs(&self) -> impl Iterator<Item = i32> + '_ {
        self.signs.iter().map(|&s| s as i32)
    }

    pub fn sign(&self, axis: usize) -> f64 {
        self.signs[axis] as f64
    }

    /// Product of the signs over the axes set in `mask`.
    pub fn blade_sign(&self, mask: u8) -> f64 {
        let negatives = self
            .signs
            .iter()
            .enumerate()
            .filter(|&(i, &s)| s < 0 && mask & (1 << i) != 0)
            .count();
        if negatives % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    /// Sign of the metric determinant.
    pub fn det_sign(&self) -> f64 {
        self.blade_sign(((1u16 << self.dim()) - 1) as u8)
    }

    /// Number of negative entries.
    pub fn index(&self) -> usize {
        self.signs.iter().filter(|&&s| s < 0).count()
    }

    /// Inner product of two coordinate vectors.
    pub fn dot(&self, a: &[f64], b: &[f64]) -> f64 {
        self.signs
            .iter()
            .zip(a.iter().zip(b))
            .map(|(&s, (x, y))| s as f64 * x * y)
            .sum()
    }

    /// The scalar `s` with `**w = s w` for every grade-`k` form.
    pub fn double_hodge_sign(&self, grade: usize) -> f64 {
        let n = self.dim();
        let parity = if (grade * (n - grade)).is_multiple_of(2) { 1.0 } else { -1.0 };
        self.det_sign() * parity
    }
}

impl TryFrom<Vec<i32>> for MetricSignature {
    type Error = Error;

    fn try_from(signs: Vec<i32>) -> Result<Self> {
        Self::new(&signs)
    }
}

impl From<MetricSignature> for Vec<i32> {
    fn from(g: MetricSignature) -> Self {
        g.signs().collect()
    }
}

pub(crate) fn check_dim(dim: usize) -> Result<()> {
    if (1..=MAX_DIM).contains(&dim) {
        Ok(())
    } else {
        Err(Error::UnsupportedDimension(dim))
    }
}
