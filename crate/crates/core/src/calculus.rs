//! Pointwise differential forms: finite-difference exterior derivative and
//! codifferential, and integration over simplex faces.

use crate::algebra::{hodge, wedge, KTensor, MetricSignature, Variance};
use crate::error::{Error, Result};
use crate::simplex::{factorial, Simplex, Subsimplex};

/// A covector-valued field of fixed grade on `R^n`.
pub trait FormField {
    fn dim(&self) -> usize;
    fn grade(&self) -> usize;
    fn eval(&self, x: &[f64]) -> Result<KTensor>;
}

impl<T: FormField + ?Sized> FormField for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn grade(&self) -> usize {
        (**self).grade()
    }
    fn eval(&self, x: &[f64]) -> Result<KTensor> {
        (**self).eval(x)
    }
}

/// A [`FormField`] backed by a closure.
pub struct FnField<F> {
    dim: usize,
    grade: usize,
    f: F,
}

impl<F> FnField<F>
where
    F: Fn(&[f64]) -> Result<KTensor>,
{
    pub fn new(dim: usize, grade: usize, f: F) -> Self {
        Self { dim, grade, f }
    }
}

impl<F> FormField for FnField<F>
where
    F: Fn(&[f64]) -> Result<KTensor>,
{
    fn dim(&self) -> usize {
        self.dim
    }
    fn grade(&self) -> usize {
        self.grade
    }
    fn eval(&self, x: &[f64]) -> Result<KTensor> {
        (self.f)(x)
    }
}

/// Pointwise Hodge dual `x ↦ ⋆F(x)` of another field.
pub struct HodgeField<F> {
    inner: F,
    metric: MetricSignature,
}

impl<F: FormField> HodgeField<F> {
    pub fn new(inner: F, metric: MetricSignature) -> Self {
        Self { inner, metric }
    }
}

impl<F: FormField> FormField for HodgeField<F> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn grade(&self) -> usize {
        self.inner.dim() - self.inner.grade()
    }
    fn eval(&self, x: &[f64]) -> Result<KTensor> {
        hodge(&self.inner.eval(x)?, &self.metric)
    }
}

/// `dF(x)` by central differences: `Σ_a e^a ∧ (F(x + h e_a) - F(x - h e_a)) / 2h`.
pub fn exterior_derivative_fd(field: &impl FormField, x: &[f64], h: f64) -> Result<KTensor> {
    if !(h > 0.0) {
        return Err(Error::InvalidStep(h));
    }
    let n = field.dim();
    if x.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: x.len(),
        });
    }
    let mut out = KTensor::zeros(n, field.grade() + 1, Variance::Covector)?;
    let mut probe = x.to_vec();
    for a in 0..n {
        probe[a] = x[a] + h;
        let plus = field.eval(&probe)?;
        probe[a] = x[a] - h;
        let minus = field.eval(&probe)?;
        probe[a] = x[a];
        let partial = plus.sub(&minus)?.scale(0.5 / h);
        let mut axis = vec![0.0; n];
        axis[a] = 1.0;
        out = out.add(&wedge(&KTensor::covector(&axis)?, &partial)?)?;
    }
    Ok(out)
}

/// `δF = s (-1)^{nk+n+1} ⋆ d ⋆ F` with `s` the metric determinant sign.
pub fn codifferential_fd(field: &impl FormField, x: &[f64], h: f64, metric: &MetricSignature) -> Result<KTensor> {
    let k = field.grade();
    if k == 0 {
        return Err(Error::GradeMismatch { expected: 1, found: 0 });
    }
    let n = field.dim();
    let dual = HodgeField::new(field, metric.clone());
    let d = exterior_derivative_fd(&dual, x, h)?;
    let sign = if (n * k + n + 1).is_multiple_of(2) { 1.0 } else { -1.0 };
    Ok(hodge(&d, metric)?.scale(sign * metric.det_sign()))
}

/// Degree-2 rule on the reference `j`-simplex as (barycentric point, weight);
/// weights sum to the reference volume `1/j!`.
pub fn simplex_quadrature(j: usize) -> Vec<(Vec<f64>, f64)> {
    if j == 0 {
        return vec![(vec![1.0], 1.0)];
    }
    let m = j as f64;
    let b = (m + 2.0 - (m + 2.0).sqrt()) / ((m + 1.0) * (m + 2.0));
    let a = 1.0 - m * b;
    let w = 1.0 / ((m + 1.0) * factorial(j));
    (0..=j)
        .map(|i| {
            let mut p = vec![b; j + 1];
            p[i] = a;
            (p, w)
        })
        .collect()
}

/// `∫_face F`: pulls `F` back along the affine parametrization of the ordered
/// face of an embedded simplex and integrates with [`simplex_quadrature`].
pub fn integrate_over_subsimplex(field: &impl FormField, simplex: &Simplex, face: &Subsimplex) -> Result<f64> {
    let (vertices, _) = simplex.embedded_parts()?;
    let j = face.dim();
    if field.grade() != j {
        return Err(Error::GradeMismatch {
            expected: j,
            found: field.grade(),
        });
    }
    if face.indices().iter().any(|&i| i > simplex.dim()) {
        return Err(Error::InvalidSubsimplex(format!("{:?}", face.indices())));
    }
    let n = simplex.dim();
    let corners: Vec<&Vec<f64>> = face.indices().iter().map(|&i| &vertices[i]).collect();
    let tangents = corners[1..]
        .iter()
        .map(|p| KTensor::vector(&p.iter().zip(corners[0]).map(|(a, b)| a - b).collect::<Vec<_>>()))
        .collect::<Result<Vec<_>>>()?;
    let frame = crate::algebra::wedge_all(n, Variance::Vector, &tangents)?;
    // weights already carry the reference volume 1/j!
    let mut total = 0.0;
    for (bary, weight) in simplex_quadrature(j) {
        let x: Vec<f64> = (0..n)
            .map(|a| corners.iter().zip(&bary).map(|(p, l)| l * p[a]).sum())
            .collect();
        total += weight * field.eval(&x)?.pair(&frame)?;
    }
    Ok(total)
}
