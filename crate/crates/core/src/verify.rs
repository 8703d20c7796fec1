//! Randomized property suites over Whitney forms and the exterior algebra.
//!
//! Every suite draws its simplices and points from a seeded ChaCha stream per
//! `(seed, dimension, signature, trial)`, so results do not depend on thread
//! count or scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{
    basis_tensors, binomial, contract, flat, hodge, inner, sharp, wedge, KTensor, MetricSignature, Variance,
    VolumeElement,
};
use crate::calculus::{codifferential_fd, exterior_derivative_fd, integrate_over_subsimplex, HodgeField};
use crate::error::{Error, Result};
use crate::simplex::{Simplex, Subsimplex};
use crate::whitney::{decomposition_check, Route, WhitneyField, WhitneyForm};

pub mod tol {
    /// Agreement between evaluation routes of the same Whitney form.
    pub const REPRESENTATION: f64 = 1e-9;
    /// `∫_ρ w_ρ = 1`, `∫_ρ' w_ρ = 0`.
    pub const NORMALIZATION: f64 = 1e-10;
    /// Pointwise `|d⋆w|` and `|δw|` with central differences.
    pub const CLOSEDNESS: f64 = 1e-6;
    pub const FD_STEP: f64 = 1e-5;
    /// Covector outputs across signatures at fixed coordinates.
    pub const METRIC_INDEPENDENCE: f64 = 1e-10;
    pub const DECOMPOSITION: f64 = 1e-9;
    /// Points with `λ_l(x)` below this are skipped: the identity divides by it.
    pub const DECOMPOSITION_MIN_PIVOT: f64 = 1e-3;
    /// Vanishing on the complement span.
    pub const VANISHING: f64 = 1e-10;
    /// Algebraic identities on random tensors.
    pub const ALGEBRA: f64 = 1e-12;
    /// Random simplices with `|det G|` below this are redrawn.
    pub const MIN_GRAM_DET: f64 = 1e-3;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SignatureKind {
    /// All `+1`.
    Euclidean,
    /// One `-1`, in the first slot.
    Lorentzian,
}

impl SignatureKind {
    pub fn metric(self, dim: usize) -> Result<MetricSignature> {
        match self {
            SignatureKind::Euclidean => MetricSignature::euclidean(dim),
            SignatureKind::Lorentzian => MetricSignature::lorentzian(dim),
        }
    }

    fn tag(self) -> u64 {
        match self {
            SignatureKind::Euclidean => 0,
            SignatureKind::Lorentzian => 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub dims: Vec<usize>,
    pub signatures: Vec<SignatureKind>,
    pub trials: usize,
    pub points: usize,
    pub seed: u64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            dims: vec![2, 3, 4],
            signatures: vec![SignatureKind::Euclidean, SignatureKind::Lorentzian],
            trials: 100,
            points: 20,
            seed: 42,
        }
    }
}

impl SuiteConfig {
    fn configurations(&self) -> Vec<(usize, SignatureKind)> {
        self.dims
            .iter()
            .flat_map(|&n| self.signatures.iter().map(move |&s| (n, s)))
            .collect()
    }

    fn rng(&self, suite: u64, n: usize, sig: SignatureKind, trial: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(suite << 40 | (n as u64) << 32 | sig.tag() << 24 | trial as u64);
        rng
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub name: String,
    pub max_residual: f64,
    pub tolerance: f64,
    pub checks: usize,
    pub skipped: usize,
    pub passed: bool,
}

#[derive(Default, Clone, Copy)]
struct Tally {
    max: f64,
    checks: usize,
    skipped: usize,
}

impl Tally {
    fn record(&mut self, residual: f64) {
        // NaN must fail the suite rather than vanish in `max`
        self.max = if residual.is_nan() { f64::NAN } else { self.max.max(residual) };
        self.checks += 1;
    }

    fn merge(self, other: Tally) -> Tally {
        let max = if self.max.is_nan() || other.max.is_nan() {
            f64::NAN
        } else {
            self.max.max(other.max)
        };
        Tally {
            max,
            checks: self.checks + other.checks,
            skipped: self.skipped + other.skipped,
        }
    }

    fn report(self, name: &str, tolerance: f64) -> SuiteReport {
        SuiteReport {
            name: name.to_string(),
            max_residual: self.max,
            tolerance,
            checks: self.checks,
            skipped: self.skipped,
            passed: self.max < tolerance && self.checks > 0,
        }
    }
}

fn run_trials<F>(cfg: &SuiteConfig, suite: u64, body: F) -> Result<Tally>
where
    F: Fn(usize, SignatureKind, &mut ChaCha8Rng, &mut Tally) -> Result<()> + Sync,
{
    if cfg.trials == 0 {
        return Err(Error::InvalidSpec("trials must be positive".into()));
    }
    let jobs: Vec<(usize, SignatureKind, usize)> = cfg
        .configurations()
        .into_iter()
        .flat_map(|(n, s)| (0..cfg.trials).map(move |t| (n, s, t)))
        .collect();
    jobs.par_iter()
        .map(|&(n, s, t)| {
            let mut rng = cfg.rng(suite, n, s, t);
            let mut tally = Tally::default();
            body(n, s, &mut rng, &mut tally)?;
            Ok(tally)
        })
        .try_reduce(Tally::default, |a, b| Ok(a.merge(b)))
}

/// Vertices i.i.d. uniform in `[-1, 1]^n`, redrawn while `|det G| < MIN_GRAM_DET`.
pub fn random_simplex(rng: &mut impl Rng, metric: &MetricSignature) -> Simplex {
    let n = metric.dim();
    loop {
        let vertices: Vec<Vec<f64>> = (0..=n)
            .map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        if let Ok(s) = Simplex::embedded(vertices, metric.clone()) {
            if s.gram().det().abs() >= tol::MIN_GRAM_DET {
                return s;
            }
        }
    }
}

/// A point drawn uniformly from the interior of an embedded simplex.
pub fn random_interior_point(rng: &mut impl Rng, simplex: &Simplex) -> Vec<f64> {
    let weights: Vec<f64> = (0..=simplex.dim())
        .map(|_| -(1.0 - rng.random::<f64>()).ln())
        .collect();
    let total: f64 = weights.iter().sum();
    let lambda: Vec<f64> = weights.iter().map(|w| w / total).collect();
    simplex.point(&lambda).expect("embedded simplex")
}

pub fn random_tensor(rng: &mut impl Rng, dim: usize, grade: usize, variance: Variance) -> KTensor {
    let coeffs = (0..binomial(dim, grade)).map(|_| rng.random_range(-1.0..1.0)).collect();
    KTensor::from_coeffs(dim, grade, variance, coeffs).expect("valid shape")
}

fn random_vector(rng: &mut impl Rng, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect()
}

/// Wedge of `grade` random vectors (a decomposable `grade`-vector).
fn random_blade(rng: &mut impl Rng, dim: usize, grade: usize) -> Result<KTensor> {
    (0..grade).try_fold(KTensor::scalar(dim, 1.0, Variance::Vector)?, |acc, _| {
        wedge(&acc, &KTensor::vector(&random_vector(rng, dim))?)
    })
}

/// Every face of an `n`-simplex as a shuffled vertex list, grouped by dimension.
fn shuffled_faces(rng: &mut impl Rng, n: usize) -> Vec<Vec<usize>> {
    let mut faces = Vec::new();
    for mask in 1u32..(1 << (n + 1)) {
        let mut verts: Vec<usize> = (0..=n).filter(|i| mask & (1 << i) != 0).collect();
        for i in (1..verts.len()).rev() {
            let j = rng.random_range(0..=i);
            verts.swap(i, j);
        }
        faces.push(verts);
    }
    faces
}

fn sorted_faces(n: usize, j: usize) -> Vec<Vec<usize>> {
    (0u32..(1 << (n + 1)))
        .filter(|m| m.count_ones() as usize == j + 1)
        .map(|m| (0..=n).filter(|i| m & (1 << i) != 0).collect())
        .collect()
}

/// Barycentric, covector and vector routes agree on random simplices, faces,
/// interior points and `j`-vectors.
pub fn tri_representation(cfg: &SuiteConfig) -> Result<SuiteReport> {
    tri_representation_with(cfg, |w, x| w.eval_covector(x))
}

/// [`tri_representation`] with a caller-supplied covector route.
pub fn tri_representation_with<F>(cfg: &SuiteConfig, covector: F) -> Result<SuiteReport>
where
    F: Fn(&WhitneyForm<'_>, &[f64]) -> Result<KTensor> + Sync,
{
    let tally = run_trials(cfg, 1, |n, sig, rng, tally| {
        let metric = sig.metric(n)?;
        let simplex = random_simplex(rng, &metric);
        let faces = shuffled_faces(rng, n);
        for _ in 0..cfg.points {
            let x = random_interior_point(rng, &simplex);
            for face in &faces {
                let w = WhitneyForm::new(&simplex, face)?;
                let bary = w.eval_barycentric(&x)?;
                let cov = covector(&w, &x)?;
                tally.record(bary.max_abs_diff(&cov)?);
                let u = random_blade(rng, n, w.grade())?;
                let via_vector = w.eval_vector(&x, &u)?;
                tally.record((via_vector - cov.pair(&u)?).abs());
            }
        }
        Ok(())
    })?;
    Ok(tally.report("tri-representation", tol::REPRESENTATION))
}

/// The expanded two-term covector formula matches the compact one.
pub fn wedge_expansion(cfg: &SuiteConfig) -> Result<SuiteReport> {
    let tally = run_trials(cfg, 2, |n, sig, rng, tally| {
        let simplex = random_simplex(rng, &sig.metric(n)?);
        let faces = shuffled_faces(rng, n);
        for _ in 0..cfg.points {
            let x = random_interior_point(rng, &simplex);
            for face in &faces {
                let w = WhitneyForm::new(&simplex, face)?;
                tally.record(w.wedge_expansion_eval(&x)?.max_abs_diff(&w.eval_covector(&x)?)?);
            }
        }
        Ok(())
    })?;
    Ok(tally.report("wedge-expansion", tol::REPRESENTATION))
}

/// `∫_ρ' w_ρ = δ_{ρρ'}` over all faces of each dimension.
pub fn normalization(cfg: &SuiteConfig) -> Result<SuiteReport> {
    let tally = run_trials(cfg, 3, |n, sig, rng, tally| {
        let simplex = random_simplex(rng, &sig.metric(n)?);
        for j in 0..=n {
            let faces = sorted_faces(n, j);
            for rho in &faces {
                let field = WhitneyField::new(WhitneyForm::new(&simplex, rho)?, Route::Covector);
                for other in &faces {
                    let face = Subsimplex::new(other, n)?;
                    let expected = if other == rho { 1.0 } else { 0.0 };
                    tally.record((integrate_over_subsimplex(&field, &simplex, &face)? - expected).abs());
                }
            }
        }
        Ok(())
    })?;
    Ok(tally.report("normalization", tol::NORMALIZATION))
}

/// `d(⋆w) = 0` and `δw = 0` pointwise by central differences.
pub fn closedness(cfg: &SuiteConfig) -> Result<SuiteReport> {
    let tally = run_trials(cfg, 4, |n, sig, rng, tally| {
        let metric = sig.metric(n)?;
        let simplex = random_simplex(rng, &metric);
        let faces = shuffled_faces(rng, n);
        for _ in 0..cfg.points {
            let x = random_interior_point(rng, &simplex);
            for face in &faces {
                // for 0-forms both statements are vacuous
                if face.len() == 1 {
                    continue;
                }
                for route in [Route::Covector, Route::Barycentric] {
                    let field = WhitneyField::new(WhitneyForm::new(&simplex, face)?, route);
                    let dual = HodgeField::new(&field, metric.clone());
                    tally.record(exterior_derivative_fd(&dual, &x, tol::FD_STEP)?.norm_inf());
                    tally.record(codifferential_fd(&field, &x, tol::FD_STEP, &metric)?.norm_inf());
                }
            }
        }
        Ok(())
    })?;
    Ok(tally.report("closedness", tol::CLOSEDNESS))
}

/// `(l+1) w_{[0..l]} ∧ w_{[l,l+1]} / w_{[l]} = w_{[0..l+1]}` through both the
/// barycentric and covector routes.
pub fn decomposition(cfg: &SuiteConfig) -> Result<SuiteReport> {
    let tally = run_trials(cfg, 5, |n, sig, rng, tally| {
        let simplex = random_simplex(rng, &sig.metric(n)?);
        for _ in 0..cfg.points {
            let x = random_interior_point(rng, &simplex);
            let lambda = simplex.barycentric(&x)?;
            for l in 0..n {
                if lambda[l] < tol::DECOMPOSITION_MIN_PIVOT {
                    tally.skipped += 2;
                    continue;
                }
                for route in [Route::Barycentric, Route::Covector] {
                    match decomposition_check(&simplex, l, &x, route) {
                        Ok(r) => tally.record(r),
                        Err(Error::SkippedPoint(_)) => tally.skipped += 1,
                        Err(e) => return Err(e),
                    }
                }
            }
        }
        Ok(())
    })?;
    Ok(tally.report("decomposition", tol::DECOMPOSITION))
}

/// Covector outputs coincide across signatures at fixed vertex coordinates.
pub fn metric_independence(cfg: &SuiteConfig) -> Result<SuiteReport> {
    let tally = run_trials(cfg, 6, |n, _sig, rng, tally| {
        let euclid = random_simplex(rng, &MetricSignature::euclidean(n)?);
        let vertices = euclid.vertices().expect("embedded").to_vec();
        let others: Vec<Simplex> = [MetricSignature::lorentzian(n)?, alternate_signature(n)?]
            .into_iter()
            .map(|g| Simplex::embedded(vertices.clone(), g))
            .collect::<Result<_>>()?;
        let faces = shuffled_faces(rng, n);
        for _ in 0..cfg.points {
            let x = random_interior_point(rng, &euclid);
            for face in &faces {
                let base = WhitneyForm::new(&euclid, face)?.eval_covector(&x)?;
                for other in &others {
                    let w = WhitneyForm::new(other, face)?.eval_covector(&x)?;
                    tally.record(base.max_abs_diff(&w)?);
                }
            }
        }
        Ok(())
    })?;
    Ok(tally.report("metric-independence", tol::METRIC_INDEPENDENCE))
}

/// `(+, -, -, ...)`: the opposite sign convention for spacetime.
fn alternate_signature(n: usize) -> Result<MetricSignature> {
    let signs: Vec<i32> = (0..n).map(|i| if i == 0 { 1 } else { -1 }).collect();
    MetricSignature::new(&signs)
}

/// Exterior-algebra identities: wedge antisymmetry, the Hodge defining
/// identity, `⋆⋆`, the contraction identity `i_{v♯}u = (⋆⋆)⋆(⋆u ∧ v)` and the
/// extended inner product `⟨v1∧v2, v3⟩ = ⟨v2, i_{v1♭} v3⟩`.
pub fn hodge_identities(cfg: &SuiteConfig) -> Result<SuiteReport> {
    let tally = run_trials(cfg, 7, |n, sig, rng, tally| {
        let g = sig.metric(n)?;
        let vol = VolumeElement::new(&g)?;
        for j in 0..=n {
            for k in 0..=n - j {
                let a = random_tensor(rng, n, j, Variance::Covector);
                let b = random_tensor(rng, n, k, Variance::Covector);
                let parity = if (j * k) % 2 == 0 { 1.0 } else { -1.0 };
                tally.record(wedge(&a, &b)?.max_abs_diff(&wedge(&b, &a)?.scale(parity))?);
            }
        }
        for k in 0..=n {
            let u = random_tensor(rng, n, k, Variance::Covector);
            let w = random_tensor(rng, n, k, Variance::Covector);
            let lhs = wedge(&u, &hodge(&w, &g)?)?;
            let rhs = vol.form.clone().scale(inner(&u, &w, &g)?);
            tally.record(lhs.max_abs_diff(&rhs)?);

            let twice = hodge(&hodge(&w, &g)?, &g)?;
            tally.record(twice.max_abs_diff(&w.clone().scale(g.double_hodge_sign(k)))?);

            if k >= 1 {
                let v = random_tensor(rng, n, 1, Variance::Covector);
                let lhs = contract(&sharp(&v, &g)?, &u)?;
                let rhs = hodge(&wedge(&hodge(&u, &g)?, &v)?, &g)?.scale(g.double_hodge_sign(k));
                tally.record(lhs.max_abs_diff(&rhs)?);

                let v1 = KTensor::vector(&random_vector(rng, n))?;
                let v2 = random_tensor(rng, n, k - 1, Variance::Vector);
                let v3 = random_tensor(rng, n, k, Variance::Vector);
                let lhs = inner(&wedge(&v1, &v2)?, &v3, &g)?;
                let rhs = inner(&v2, &contract(&flat(&v1, &g)?, &v3)?, &g)?;
                tally.record((lhs - rhs).abs());
            }
        }
        // the Hodge star is pinned down blade by blade
        for k in 0..=n {
            for e in basis_tensors(n, k, Variance::Covector)? {
                let s = hodge(&e, &g)?;
                let lhs = wedge(&e, &s)?;
                tally.record(lhs.max_abs_diff(&vol.form.clone().scale(inner(&e, &e, &g)?))?);
            }
        }
        Ok(())
    })?;
    Ok(tally.report("hodge-identities", tol::ALGEBRA))
}

/// Whitney forms vanish at affine combinations of the complement vertices.
pub fn vanishing(cfg: &SuiteConfig) -> Result<SuiteReport> {
    let tally = run_trials(cfg, 8, |n, sig, rng, tally| {
        let simplex = random_simplex(rng, &sig.metric(n)?);
        for face in shuffled_faces(rng, n) {
            let w = WhitneyForm::new(&simplex, &face)?;
            if w.tau().is_empty() {
                continue;
            }
            let weights: Vec<f64> = w.tau().iter().map(|_| rng.random_range(-1.0..2.0)).collect();
            let total: f64 = weights.iter().sum();
            if total.abs() < 0.1 {
                tally.skipped += 1;
                continue;
            }
            let mut lambda = vec![0.0; n + 1];
            for (&k, wt) in w.tau().iter().zip(&weights) {
                lambda[k] = wt / total;
            }
            let x = simplex.point(&lambda)?;
            tally.record(w.eval_covector(&x)?.norm_inf());
            tally.record(w.eval_barycentric(&x)?.norm_inf());
        }
        Ok(())
    })?;
    Ok(tally.report("vanishing", tol::VANISHING))
}

/// `Σ_k w_[v_k](x) = 1`.
pub fn partition_of_unity(cfg: &SuiteConfig) -> Result<SuiteReport> {
    let tally = run_trials(cfg, 9, |n, sig, rng, tally| {
        let simplex = random_simplex(rng, &sig.metric(n)?);
        for _ in 0..cfg.points {
            let x = random_interior_point(rng, &simplex);
            let sum: f64 = (0..=n)
                .map(|k| WhitneyForm::new(&simplex, &[k])?.eval_covector(&x).map(|t| t.top()))
                .sum::<Result<f64>>()?;
            tally.record((sum - 1.0).abs());
        }
        Ok(())
    })?;
    Ok(tally.report("partition-of-unity", tol::VANISHING))
}

/// All suites in a fixed order.
pub fn run_all(cfg: &SuiteConfig) -> Result<Vec<SuiteReport>> {
    Ok(vec![
        tri_representation(cfg)?,
        wedge_expansion(cfg)?,
        normalization(cfg)?,
        closedness(cfg)?,
        decomposition(cfg)?,
        metric_independence(cfg)?,
        hodge_identities(cfg)?,
        vanishing(cfg)?,
        partition_of_unity(cfg)?,
    ])
}
