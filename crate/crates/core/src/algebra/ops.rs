//! Products, musical isomorphisms, contraction, inner product and Hodge star
//! on [`KTensor`]s over a diagonal metric.

use super::metric::MetricSignature;
use super::tensor::{blades, indices_of, merge_sign, KTensor, Variance};
use crate::error::{Error, Result};

fn check_dim(t: &KTensor, g: &MetricSignature) -> Result<()> {
    if t.dim() != g.dim() {
        return Err(Error::DimensionMismatch {
            expected: g.dim(),
            found: t.dim(),
        });
    }
    Ok(())
}

/// Exterior product of two tensors of the same variance.
pub fn wedge(a: &KTensor, b: &KTensor) -> Result<KTensor> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    if a.variance() != b.variance() {
        return Err(Error::VarianceMismatch {
            left: a.variance(),
            right: b.variance(),
        });
    }
    let n = a.dim();
    let grade = a.grade() + b.grade();
    if grade > n {
        return Err(Error::GradeOverflow { grade, dim: n });
    }
    let mut out = KTensor::zeros(n, grade, a.variance())?;
    for (&ma, &ca) in a.blades().iter().zip(a.coeffs()) {
        if ca == 0.0 {
            continue;
        }
        for (&mb, &cb) in b.blades().iter().zip(b.coeffs()) {
            if cb == 0.0 || ma & mb != 0 {
                continue;
            }
            out.add_by_mask(ma | mb, merge_sign(ma, mb) * ca * cb);
        }
    }
    Ok(out)
}

/// Wedge of a sequence of tensors, left to right; the empty product is the scalar 1.
pub fn wedge_all<'a, I>(dim: usize, variance: Variance, factors: I) -> Result<KTensor>
where
    I: IntoIterator<Item = &'a KTensor>,
{
    factors
        .into_iter()
        .try_fold(KTensor::scalar(dim, 1.0, variance)?, |acc, f| wedge(&acc, f))
}

fn apply_blade_signs(t: &KTensor, g: &MetricSignature) -> KTensor {
    let mut out = t.clone();
    for (c, &m) in out.coeffs_mut().iter_mut().zip(t.blades()) {
        *c *= g.blade_sign(m);
    }
    out
}

/// Index lowering. Input must be a vector-valued tensor.
pub fn flat(v: &KTensor, g: &MetricSignature) -> Result<KTensor> {
    check_dim(v, g)?;
    if v.variance() != Variance::Vector {
        return Err(Error::VarianceMismatch {
            left: Variance::Vector,
            right: v.variance(),
        });
    }
    Ok(apply_blade_signs(v, g).with_variance(Variance::Covector))
}

/// Index raising, the inverse of [`flat`].
pub fn sharp(w: &KTensor, g: &MetricSignature) -> Result<KTensor> {
    check_dim(w, g)?;
    if w.variance() != Variance::Covector {
        return Err(Error::VarianceMismatch {
            left: Variance::Covector,
            right: w.variance(),
        });
    }
    Ok(apply_blade_signs(w, g).with_variance(Variance::Vector))
}

/// Interior product `i_λ v` of a grade-1 tensor into a tensor of the opposite
/// variance, inserting into the first slot:
/// `i_λ(v1 ∧ v2) = (i_λ v1) ∧ v2 + (-1)^{k1} v1 ∧ (i_λ v2)`.
pub fn contract(lambda: &KTensor, v: &KTensor) -> Result<KTensor> {
    if lambda.grade() != 1 {
        return Err(Error::GradeMismatch {
            expected: 1,
            found: lambda.grade(),
        });
    }
    if lambda.dim() != v.dim() {
        return Err(Error::DimensionMismatch {
            expected: lambda.dim(),
            found: v.dim(),
        });
    }
    if lambda.variance() == v.variance() {
        return Err(Error::VarianceMismatch {
            left: lambda.variance(),
            right: v.variance(),
        });
    }
    if v.grade() == 0 {
        return Err(Error::ContractScalar);
    }
    let n = v.dim();
    let mut out = KTensor::zeros(n, v.grade() - 1, v.variance())?;
    for (&m, &c) in v.blades().iter().zip(v.coeffs()) {
        if c == 0.0 {
            continue;
        }
        for (pos, axis) in indices_of(m).enumerate() {
            let sign = if pos % 2 == 0 { 1.0 } else { -1.0 };
            out.add_by_mask(m & !(1 << axis), sign * lambda.coeffs()[axis] * c);
        }
    }
    Ok(out)
}

/// Extended metric inner product of two tensors of equal grade and variance.
///
/// On basis blades this is the product of the metric signs over the shared
/// index set (the inverse metric for covectors has the same diagonal).
pub fn inner(a: &KTensor, b: &KTensor, g: &MetricSignature) -> Result<f64> {
    check_dim(a, g)?;
    if a.grade() != b.grade() {
        return Err(Error::GradeMismatch {
            expected: a.grade(),
            found: b.grade(),
        });
    }
    if a.variance() != b.variance() {
        return Err(Error::VarianceMismatch {
            left: a.variance(),
            right: b.variance(),
        });
    }
    Ok(a
        .blades()
        .iter()
        .zip(a.coeffs().iter().zip(b.coeffs()))
        .map(|(&m, (x, y))| g.blade_sign(m) * x * y)
        .sum())
}

/// Hodge star fixed by `u ∧ ⋆w = ⟨u, w⟩ Vol` with `Vol = e^0 ∧ ... ∧ e^{n-1}`.
pub fn hodge(w: &KTensor, g: &MetricSignature) -> Result<KTensor> {
    star_with(w, g, merge_sign)
}

/// Hodge star with the contraction inserted on the right, fixed by
/// `⋆w ∧ u = ⟨w, u⟩ Vol`. Differs from [`hodge`] by `(-1)^{k(n-k)}`.
pub fn hodge_right(w: &KTensor, g: &MetricSignature) -> Result<KTensor> {
    star_with(w, g, |m, c| merge_sign(c, m))
}

fn star_with(w: &KTensor, g: &MetricSignature, orient: impl Fn(u8, u8) -> f64) -> Result<KTensor> {
    check_dim(w, g)?;
    let n = w.dim();
    let full = ((1u16 << n) - 1) as u8;
    let mut out = KTensor::zeros(n, n - w.grade(), w.variance())?;
    for (&m, &c) in w.blades().iter().zip(w.coeffs()) {
        let comp = full & !m;
        out.add_by_mask(comp, c * g.blade_sign(m) * orient(m, comp));
    }
    Ok(out)
}

/// The standard volume element of the coordinate space.
#[derive(Clone, Debug, PartialEq)]
pub struct VolumeElement {
    pub form: KTensor,
    /// `⟨Vol, Vol⟩`, equal to the metric determinant sign.
    pub self_inner: f64,
}

impl VolumeElement {
    pub fn new(g: &MetricSignature) -> Result<Self> {
        let n = g.dim();
        let form = KTensor::from_coeffs(n, n, Variance::Covector, vec![1.0])?;
        let self_inner = inner(&form, &form, g)?;
        Ok(Self { form, self_inner })
    }
}

/// All basis blades of one grade as unit tensors.
pub fn basis_tensors(dim: usize, grade: usize, variance: Variance) -> Result<Vec<KTensor>> {
    blades(dim, grade)
        .iter()
        .map(|&m| KTensor::basis(dim, &indices_of(m).collect::<Vec<_>>(), variance))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(signs: &[i32]) -> MetricSignature {
        MetricSignature::new(signs).unwrap()
    }

    fn cov(c: &[f64]) -> KTensor {
        KTensor::covector(c).unwrap()
    }

    fn vecr(c: &[f64]) -> KTensor {
        KTensor::vector(c).unwrap()
    }

    #[test]
    fn wedge_examples() {
        let e0 = vecr(&[1.0, 0.0]);
        let e1 = vecr(&[0.0, 1.0]);
        assert_eq!(wedge(&e0, &e1).unwrap().coeffs(), &[1.0]);
        assert_eq!(wedge(&e1, &e0).unwrap().coeffs(), &[-1.0]);
        let a = vecr(&[2.0, 1.0]);
        assert_eq!(wedge(&a, &e1).unwrap().coeffs(), &[2.0]);
    }

    #[test]
    fn wedge_errors() {
        let e0 = vecr(&[1.0, 0.0]);
        let blade = wedge(&e0, &vecr(&[0.0, 1.0])).unwrap();
        assert!(matches!(wedge(&blade, &e0), Err(Error::GradeOverflow { grade: 3, dim: 2 })));
        assert!(matches!(
            wedge(&e0, &cov(&[1.0, 0.0])),
            Err(Error::VarianceMismatch { .. })
        ));
    }

    #[test]
    fn flat_and_sharp_examples() {
        let lor = g(&[-1, 1]);
        let euc = g(&[1, 1]);
        assert_eq!(flat(&vecr(&[3.0, 4.0]), &euc).unwrap().coeffs(), &[3.0, 4.0]);
        assert_eq!(flat(&vecr(&[3.0, 4.0]), &lor).unwrap().coeffs(), &[-3.0, 4.0]);
        let blade = KTensor::from_coeffs(2, 2, Variance::Vector, vec![5.0]).unwrap();
        assert_eq!(flat(&blade, &lor).unwrap().coeffs(), &[-5.0]);
        // dx♯ with x the second (spatial) axis
        assert_eq!(sharp(&cov(&[0.0, 1.0]), &lor).unwrap().coeffs(), &[0.0, 1.0]);
        assert_eq!(sharp(&cov(&[1.0, 0.0]), &lor).unwrap().coeffs(), &[-1.0, 0.0]);
    }

    #[test]
    fn contraction_examples() {
        let e01 = KTensor::basis(2, &[0, 1], Variance::Vector).unwrap();
        let r = contract(&cov(&[1.0, 0.0]), &e01).unwrap();
        assert_eq!(r.coeffs(), &[0.0, 1.0]);
        let r = contract(&cov(&[0.0, 1.0]), &e01).unwrap();
        assert_eq!(r.coeffs(), &[-1.0, 0.0]);
        let s = KTensor::scalar(2, 1.0, Variance::Vector).unwrap();
        assert!(matches!(contract(&cov(&[1.0, 0.0]), &s), Err(Error::ContractScalar)));
        assert!(contract(&vecr(&[1.0, 0.0]), &e01).is_err());
    }

    #[test]
    fn inner_examples() {
        let dxdy = KTensor::basis(2, &[0, 1], Variance::Covector).unwrap();
        assert_eq!(inner(&dxdy, &dxdy, &g(&[1, 1])).unwrap(), 1.0);
        assert_eq!(inner(&dxdy, &dxdy, &g(&[-1, 1])).unwrap(), -1.0);
        assert!(matches!(
            inner(&dxdy, &cov(&[1.0, 0.0]), &g(&[1, 1])),
            Err(Error::GradeMismatch { .. })
        ));
    }

    #[test]
    fn hodge_examples() {
        let euc = g(&[1, 1]);
        let lor = g(&[-1, 1]);
        assert_eq!(hodge(&cov(&[1.0, 0.0]), &euc).unwrap().coeffs(), &[0.0, 1.0]);
        assert_eq!(hodge(&cov(&[0.0, 1.0]), &euc).unwrap().coeffs(), &[-1.0, 0.0]);
        assert_eq!(hodge(&cov(&[1.0, 0.0]), &lor).unwrap().coeffs(), &[0.0, -1.0]);
        assert_eq!(hodge(&cov(&[0.0, 1.0]), &lor).unwrap().coeffs(), &[-1.0, 0.0]);
        for gs in [euc, lor, g(&[1, -1, -1, -1])] {
            let n = gs.dim();
            let one = KTensor::scalar(n, 1.0, Variance::Covector).unwrap();
            let vol = VolumeElement::new(&gs).unwrap();
            assert_eq!(hodge(&one, &gs).unwrap(), vol.form);
            assert_eq!(hodge(&vol.form, &gs).unwrap().top(), gs.det_sign());
            assert_eq!(vol.self_inner, gs.det_sign());
        }
    }

    #[test]
    fn right_hodge_differs_by_grade_parity() {
        let euc = g(&[1, 1]);
        let dx = cov(&[1.0, 0.0]);
        assert_eq!(hodge_right(&dx, &euc).unwrap().coeffs(), &[0.0, -1.0]);
        let gs = g(&[-1, 1, 1]);
        let w = KTensor::from_coeffs(3, 1, Variance::Covector, vec![1.0, 2.0, 3.0]).unwrap();
        assert_eq!(hodge_right(&w, &gs).unwrap(), hodge(&w, &gs).unwrap());
    }
}
