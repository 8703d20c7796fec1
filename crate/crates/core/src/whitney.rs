//! Whitney `j`-forms on an embedded simplex, evaluated through three
//! equivalent routes:
//!
//! * barycentric: `j! Σ_i (-1)^i λ_i dλ_0 ∧ … ∧ \hat{dλ_i} ∧ … ∧ dλ_j`;
//! * covector: `sgn(ρ∪τ)/⋆vol(σ) · j!/n! · ⋆_R ⋀_{k∈τ} (v_k - x)^♭`;
//! * vector: `sgn(ρ∪τ) · j!/n! · ⟨Vol(σ), U ∧ V_τ⟩ / ⟨Vol(σ), Vol(σ)⟩`.
//!
//! `⋆_R` is [`hodge_right`], the star with the contraction inserted on the
//! right. With the left-inserting [`hodge`](crate::algebra::hodge) the
//! covector route is off by `(-1)^{j(n-j)}`, and the vector route likewise
//! needs `U` to the left of `V_τ`.

use crate::algebra::{flat, hodge_right, inner, wedge, wedge_all, KTensor, MetricSignature, Variance};
use crate::calculus::FormField;
use crate::error::{Error, Result};
use crate::simplex::{factorial, Simplex, Subsimplex};

/// The Whitney form over the ordered face `rho` of an embedded simplex.
#[derive(Clone, Debug)]
pub struct WhitneyForm<'a> {
    simplex: &'a Simplex,
    rho: Subsimplex,
    tau: Vec<usize>,
}

impl<'a> WhitneyForm<'a> {
    /// Uses the increasing-index complement for `τ`.
    pub fn new(simplex: &'a Simplex, rho: &[usize]) -> Result<Self> {
        let rho = Subsimplex::new(rho, simplex.dim())?;
        let tau = rho.complement(simplex.dim());
        Self::build(simplex, rho, tau)
    }

    /// Uses an explicit ordering of the complement; the sign bookkeeping
    /// compensates so the form does not depend on it.
    pub fn with_complement_order(simplex: &'a Simplex, rho: &[usize], tau: &[usize]) -> Result<Self> {
        let rho = Subsimplex::new(rho, simplex.dim())?;
        let mut expected = rho.complement(simplex.dim());
        let mut given = tau.to_vec();
        expected.sort_unstable();
        given.sort_unstable();
        if expected != given {
            return Err(Error::InvalidSubsimplex(format!(
                "{tau:?} is not the complement of {:?}",
                rho.indices()
            )));
        }
        Self::build(simplex, rho, tau.to_vec())
    }

    fn build(simplex: &'a Simplex, rho: Subsimplex, tau: Vec<usize>) -> Result<Self> {
        simplex.embedded_parts()?;
        Ok(Self { simplex, rho, tau })
    }

    pub fn simplex(&self) -> &Simplex {
        self.simplex
    }

    pub fn rho(&self) -> &Subsimplex {
        &self.rho
    }

    pub fn tau(&self) -> &[usize] {
        &self.tau
    }

    pub fn grade(&self) -> usize {
        self.rho.dim()
    }

    fn n(&self) -> usize {
        self.simplex.dim()
    }

    fn metric(&self) -> &MetricSignature {
        self.simplex.signature().expect("checked at construction")
    }

    fn vertex(&self, i: usize) -> &[f64] {
        &self.simplex.vertices().expect("checked at construction")[i]
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                found: x.len(),
            });
        }
        Ok(())
    }

    /// `sgn(ρ∪τ)`.
    pub fn ordering_sign(&self) -> f64 {
        self.rho
            .ordering_sign(&self.tau, self.n())
            .expect("validated at construction")
    }

    /// `sgn(ρ∪τ)/⋆vol(σ) · j!/n!`.
    pub fn prefactor(&self) -> f64 {
        self.ordering_sign() / self.simplex.star_vol() * factorial(self.grade()) / factorial(self.n())
    }

    fn complement_flats(&self, x: &[f64]) -> Result<Vec<KTensor>> {
        self.tau
            .iter()
            .map(|&k| {
                let d: Vec<f64> = self.vertex(k).iter().zip(x).map(|(v, p)| v - p).collect();
                flat(&KTensor::vector(&d)?, self.metric())
            })
            .collect()
    }

    pub fn eval_barycentric(&self, x: &[f64]) -> Result<KTensor> {
        self.check_point(x)?;
        let lambda = self.simplex.barycentric(x)?;
        let dl = self.simplex.d_lambda()?;
        let n = self.n();
        let j = self.grade();
        let verts = self.rho.indices();
        let mut out = KTensor::zeros(n, j, Variance::Covector)?;
        for i in 0..=j {
            let factors: Vec<&KTensor> = verts
                .iter()
                .enumerate()
                .filter(|&(m, _)| m != i)
                .map(|(_, &v)| &dl[v])
                .collect();
            let term = wedge_all(n, Variance::Covector, factors)?;
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            out = out.add(&term.scale(sign * lambda[verts[i]]))?;
        }
        Ok(out.scale(factorial(j)))
    }

    pub fn eval_covector(&self, x: &[f64]) -> Result<KTensor> {
        self.check_point(x)?;
        let flats = self.complement_flats(x)?;
        let volume = wedge_all(self.n(), Variance::Covector, &flats)?;
        Ok(hodge_right(&volume, self.metric())?.scale(self.prefactor()))
    }

    /// Evaluates the form on the `j`-vector `u`.
    pub fn eval_vector(&self, x: &[f64], u: &KTensor) -> Result<f64> {
        self.check_point(x)?;
        if u.variance() != Variance::Vector {
            return Err(Error::VarianceMismatch {
                left: Variance::Vector,
                right: u.variance(),
            });
        }
        if u.grade() != self.grade() {
            return Err(Error::GradeMismatch {
                expected: self.grade(),
                found: u.grade(),
            });
        }
        let n = self.n();
        let g = self.metric();
        let diff = |a: &[f64], b: &[f64]| KTensor::vector(&a.iter().zip(b).map(|(p, q)| p - q).collect::<Vec<_>>());
        let edges = (1..=n)
            .map(|i| diff(self.vertex(i), self.vertex(0)))
            .collect::<Result<Vec<_>>>()?;
        let vol = wedge_all(n, Variance::Vector, &edges)?.scale(1.0 / factorial(n));
        let spans = self
            .tau
            .iter()
            .map(|&k| diff(self.vertex(k), x))
            .collect::<Result<Vec<_>>>()?;
        let v_tau = wedge_all(n, Variance::Vector, &spans)?;
        let numerator = inner(&vol, &wedge(u, &v_tau)?, g)?;
        let denominator = inner(&vol, &vol, g)?;
        Ok(self.ordering_sign() * factorial(self.grade()) / factorial(n) * numerator / denominator)
    }

    /// Closed form `⋆w = s · sgn/⋆vol · j!/n! · ⋀_{m∈τ} (v_m - x)^♭`, where
    /// `s = ⋆∘⋆_R` is the metric determinant sign.
    pub fn hodge_dual(&self, x: &[f64]) -> Result<KTensor> {
        self.check_point(x)?;
        let flats = self.complement_flats(x)?;
        let volume = wedge_all(self.n(), Variance::Covector, &flats)?;
        Ok(volume.scale(self.metric().det_sign() * self.prefactor()))
    }

    /// The complement wedge split into its constant and `x`-linear parts.
    pub fn wedge_expansion(&self) -> Result<WedgeExpansion> {
        let n = self.n();
        let g = self.metric();
        let flats = self
            .tau
            .iter()
            .map(|&k| flat(&KTensor::vector(self.vertex(k))?, g))
            .collect::<Result<Vec<_>>>()?;
        let constant = wedge_all(n, Variance::Covector, &flats)?;
        let mut terms = Vec::with_capacity(self.tau.len());
        let mut linear = if self.tau.is_empty() {
            None
        } else {
            Some(KTensor::zeros(n, self.tau.len() - 1, Variance::Covector)?)
        };
        for (pos, &k) in self.tau.iter().enumerate() {
            // moving x^♭ from slot `pos` to the front takes `pos` transpositions
            let sign = if pos % 2 == 0 { 1.0 } else { -1.0 };
            let rest: Vec<&KTensor> = flats
                .iter()
                .enumerate()
                .filter(|&(p, _)| p != pos)
                .map(|(_, f)| f)
                .collect();
            let part = wedge_all(n, Variance::Covector, rest)?;
            if let Some(acc) = linear.as_mut() {
                *acc = acc.add(&part.scale(sign))?;
            }
            terms.push(ExpansionTerm {
                sign,
                omitted: k,
                vertices: self.tau.iter().copied().filter(|&v| v != k).collect(),
            });
        }
        Ok(WedgeExpansion {
            metric: g.clone(),
            prefactor: self.prefactor(),
            constant,
            linear,
            terms,
        })
    }

    pub fn wedge_expansion_eval(&self, x: &[f64]) -> Result<KTensor> {
        self.check_point(x)?;
        self.wedge_expansion()?.eval(x)
    }
}

/// One summand `(-1)^{α_k} ⋀_{l≠k} v_l^♭` of the linear part.
#[derive(Clone, Debug, PartialEq)]
pub struct ExpansionTerm {
    pub sign: f64,
    pub omitted: usize,
    pub vertices: Vec<usize>,
}

/// `prefactor · ⋆_R( ⋀ v_k^♭ - x^♭ ∧ Σ_k (-1)^{α_k} ⋀_{l≠k} v_l^♭ )`.
#[derive(Clone, Debug)]
pub struct WedgeExpansion {
    metric: MetricSignature,
    prefactor: f64,
    pub constant: KTensor,
    pub linear: Option<KTensor>,
    pub terms: Vec<ExpansionTerm>,
}

impl WedgeExpansion {
    pub fn eval(&self, x: &[f64]) -> Result<KTensor> {
        let mut volume = self.constant.clone();
        if let Some(linear) = &self.linear {
            let xf = flat(&KTensor::vector(x)?, &self.metric)?;
            volume = volume.sub(&wedge(&xf, linear)?)?;
        }
        Ok(hodge_right(&volume, &self.metric)?.scale(self.prefactor))
    }
}

/// Which evaluation route a [`WhitneyField`] uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Route {
    Barycentric,
    Covector,
    Expansion,
}

/// A Whitney form viewed as a [`FormField`] through one route.
pub struct WhitneyField<'a> {
    pub form: WhitneyForm<'a>,
    pub route: Route,
}

impl<'a> WhitneyField<'a> {
    pub fn new(form: WhitneyForm<'a>, route: Route) -> Self {
        Self { form, route }
    }
}

impl FormField for WhitneyField<'_> {
    fn dim(&self) -> usize {
        self.form.n()
    }
    fn grade(&self) -> usize {
        self.form.grade()
    }
    fn eval(&self, x: &[f64]) -> Result<KTensor> {
        match self.route {
            Route::Barycentric => self.form.eval_barycentric(x),
            Route::Covector => self.form.eval_covector(x),
            Route::Expansion => self.form.wedge_expansion_eval(x),
        }
    }
}

/// Smallest `|λ_l(x)|` accepted by [`decomposition_check`].
pub const DECOMPOSITION_MIN_LAMBDA: f64 = 1e-12;

/// Residual `‖(l+1)(w_{[0..l]} ∧ w_{[l,l+1]}) / w_{[l]} - w_{[0..l+1]}‖∞` at `x`.
pub fn decomposition_check(simplex: &Simplex, l: usize, x: &[f64], route: Route) -> Result<f64> {
    if l + 1 > simplex.dim() {
        return Err(Error::GradeOverflow {
            grade: l + 1,
            dim: simplex.dim(),
        });
    }
    let eval = |verts: Vec<usize>| -> Result<KTensor> {
        WhitneyField::new(WhitneyForm::new(simplex, &verts)?, route).eval(x)
    };
    let pivot = eval(vec![l])?.top();
    if pivot.abs() < DECOMPOSITION_MIN_LAMBDA {
        return Err(Error::SkippedPoint(format!("w_[v{l}](x) = {pivot:e}")));
    }
    let head = eval((0..=l).collect())?;
    let edge = eval(vec![l, l + 1])?;
    let lhs = wedge(&head, &edge)?.scale((l + 1) as f64 / pivot);
    let rhs = eval((0..=l + 1).collect())?;
    lhs.max_abs_diff(&rhs)
}
