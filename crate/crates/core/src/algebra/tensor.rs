use std::fmt;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use super::metric::{check_dim, MAX_DIM};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variance {
    Vector,
    Covector,
}

impl Variance {
    pub fn dual(self) -> Self {
        match self {
            Variance::Vector => Variance::Covector,
            Variance::Covector => Variance::Vector,
        }
    }
}

struct BladeTable {
    /// `masks[n][k]`: k-subsets of `0..n` as bitmasks, lexicographic in sorted order.
    masks: Vec<Vec<Vec<u8>>>,
    /// `position[n][mask]`: index of `mask` within `masks[n][popcount(mask)]`.
    position: Vec<Vec<usize>>,
}

fn table() -> &'static BladeTable {
    static TABLE: OnceLock<BladeTable> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut masks = vec![Vec::new()];
        let mut position = vec![Vec::new()];
        for n in 1..=MAX_DIM {
            let mut by_grade = vec![Vec::new(); n + 1];
            let mut current = Vec::new();
            for k in 0..=n {
                push_combinations(n, k, 0, &mut current, &mut by_grade[k]);
            }
            let mut pos = vec![usize::MAX; 1 << n];
            for grade in &by_grade {
                for (i, &m) in grade.iter().enumerate() {
                    pos[m as usize] = i;
                }
            }
            masks.push(by_grade);
            position.push(pos);
        }
        BladeTable { masks, position }
    })
}

fn push_combinations(n: usize, k: usize, start: usize, current: &mut Vec<usize>, out: &mut Vec<u8>) {
    if current.len() == k {
        out.push(current.iter().fold(0u8, |m, &i| m | (1 << i)));
        return;
    }
    for i in start..n {
        current.push(i);
        push_combinations(n, k, i + 1, current, out);
        current.pop();
    }
}

/// Basis blades of grade `k` in dimension `n`, in coefficient order.
pub fn blades(n: usize, k: usize) -> &'static [u8] {
    &table().masks[n][k]
}

pub(crate) fn blade_index(n: usize, mask: u8) -> usize {
    table().position[n][mask as usize]
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

pub(crate) fn mask_of(indices: &[usize]) -> u8 {
    indices.iter().fold(0u8, |m, &i| m | (1 << i))
}

pub(crate) fn indices_of(mask: u8) -> impl Iterator<Item = usize> {
    (0..8).filter(move |i| mask & (1 << i) != 0)
}

/// Sign of the shuffle that sorts the concatenation `a ++ b` of two disjoint
/// sorted index sets.
pub(crate) fn merge_sign(a: u8, b: u8) -> f64 {
    let mut inversions = 0u32;
    for j in indices_of(b) {
        inversions += (a >> (j + 1)).count_ones();
    }
    if inversions.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Dense alternating tensor of fixed grade over an `n`-dimensional space.
///
/// Coefficient `i` multiplies the basis blade `blades(n, k)[i]`, i.e. the wedge
/// of the basis elements with those indices in increasing order.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct KTensor {
    dim: usize,
    grade: usize,
    variance: Variance,
    coeffs: Vec<f64>,
}

impl KTensor {
    pub fn zeros(dim: usize, grade: usize, variance: Variance) -> Result<Self> {
        check_dim(dim)?;
        if grade > dim {
            return Err(Error::GradeOverflow { grade, dim });
        }
        Ok(Self {
            dim,
            grade,
            variance,
            coeffs: vec![0.0; binomial(dim, grade)],
        })
    }

    pub fn from_coeffs(dim: usize, grade: usize, variance: Variance, coeffs: Vec<f64>) -> Result<Self> {
        let mut t = Self::zeros(dim, grade, variance)?;
        if coeffs.len() != t.coeffs.len() {
            return Err(Error::CoefficientCount {
                dim,
                grade,
                expected: t.coeffs.len(),
                found: coeffs.len(),
            });
        }
        t.coeffs = coeffs;
        Ok(t)
    }

    pub fn scalar(dim: usize, value: f64, variance: Variance) -> Result<Self> {
        Self::from_coeffs(dim, 0, variance, vec![value])
    }

    pub fn vector(components: &[f64]) -> Result<Self> {
        Self::from_coeffs(components.len(), 1, Variance::Vector, components.to_vec())
    }

    pub fn covector(components: &[f64]) -> Result<Self> {
        Self::from_coeffs(components.len(), 1, Variance::Covector, components.to_vec())
    }

    /// Unit blade `e_{i0} ∧ e_{i1} ∧ ...` for the given (not necessarily sorted) indices.
    pub fn basis(dim: usize, indices: &[usize], variance: Variance) -> Result<Self> {
        let mut t = Self::zeros(dim, indices.len(), variance)?;
        if indices.iter().any(|&i| i >= dim) {
            return Err(Error::GradeOverflow {
                grade: indices.len(),
                dim,
            });
        }
        let mask = mask_of(indices);
        if mask.count_ones() as usize != indices.len() {
            return Ok(t);
        }
        let mut sorted = indices.to_vec();
        let sign = crate::simplex::permutation_parity_of(&mut sorted);
        t.coeffs[blade_index(dim, mask)] = sign;
        Ok(t)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn grade(&self) -> usize {
        self.grade
    }

    pub fn variance(&self) -> Variance {
        self.variance
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn blades(&self) -> &'static [u8] {
        blades(self.dim, self.grade)
    }

    /// Coefficient on the blade with the given sorted indices.
    pub fn coeff(&self, sorted_indices: &[usize]) -> f64 {
        let mask = mask_of(sorted_indices);
        if sorted_indices.len() != self.grade || mask.count_ones() as usize != self.grade {
            return 0.0;
        }
        self.coeffs[blade_index(self.dim, mask)]
    }

    pub(crate) fn add_by_mask(&mut self, mask: u8, value: f64) {
        self.coeffs[blade_index(self.dim, mask)] += value;
    }

    /// The single coefficient of a grade-0 or grade-n tensor.
    pub fn top(&self) -> f64 {
        debug_assert_eq!(self.coeffs.len(), 1);
        self.coeffs[0]
    }

    pub fn scale(mut self, factor: f64) -> Self {
        self.coeffs.iter_mut().for_each(|c| *c *= factor);
        self
    }

    pub fn with_variance(mut self, variance: Variance) -> Self {
        self.variance = variance;
        self
    }

    fn check_same_space(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        if self.grade != other.grade {
            return Err(Error::GradeMismatch {
                expected: self.grade,
                found: other.grade,
            });
        }
        if self.variance != other.variance {
            return Err(Error::VarianceMismatch {
                left: self.variance,
                right: other.variance,
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_space(other)?;
        let mut out = self.clone();
        out.coeffs.iter_mut().zip(&other.coeffs).for_each(|(a, b)| *a += b);
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.clone().scale(-1.0))
    }

    pub fn norm_inf(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    /// `max_i |self_i - other_i|`; tensors must share dimension, grade and variance.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        Ok(self.sub(other)?.norm_inf())
    }

    /// Natural pairing of a covector with a vector of equal grade (no metric).
    pub fn pair(&self, other: &Self) -> Result<f64> {
        if self.variance == other.variance {
            return Err(Error::VarianceMismatch {
                left: self.variance,
                right: other.variance,
            });
        }
        let other = other.clone().with_variance(self.variance);
        self.check_same_space(&other)?;
        Ok(self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a * b).sum())
    }
}

impl fmt::Debug for KTensor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = match self.variance {
            Variance::Vector => "e",
            Variance::Covector => "e^",
        };
        write!(f, "KTensor[n={}, k={}](", self.dim, self.grade)?;
        let mut first = true;
        for (&mask, &c) in self.blades().iter().zip(&self.coeffs) {
            if c == 0.0 {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let idx: Vec<String> = indices_of(mask).map(|i| i.to_string()).collect();
            if idx.is_empty() {
                write!(f, "{c}")?;
            } else {
                write!(f, "{c}·{prefix}{}", idx.join("∧"))?;
            }
        }
        if first {
            write!(f, "0")?;
        }
        write!(f, ")")
    }
}
