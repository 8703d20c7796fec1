//! Variational discretization of the 1+1 wave equation on a spacetime mesh:
//! Whitney 0-form stiffness per triangle, the discrete action, its
//! Euler-Lagrange residuals and a slice-by-slice solver.

mod diagnostics;

use nalgebra::{DMatrix, DVector, Matrix3, SVD};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::{DiscreteField, MeshSpec, SpacetimeMesh};

pub use diagnostics::{diagnostics, exact_solution, mode_one, write_diagnostics_csv, Diagnostics};

/// `S[a, b] = ⟨dλ_a, dλ_b⟩ |⋆vol(T)|` for one triangle.
#[derive(Clone, Debug, PartialEq)]
pub struct ElementMatrix {
    pub triangle: usize,
    pub s: Matrix3<f64>,
}

/// Where the per-triangle geometry comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ElementSource {
    /// Squared edge lengths only.
    Abstract,
    /// The mesh's reference `(t, x)` coordinates.
    Embedded,
}

pub fn element_matrix(mesh: &SpacetimeMesh, triangle: usize) -> Result<ElementMatrix> {
    element_matrix_from(mesh, triangle, ElementSource::Abstract)
}

pub fn element_matrix_from(mesh: &SpacetimeMesh, triangle: usize, source: ElementSource) -> Result<ElementMatrix> {
    let simplex = match source {
        ElementSource::Abstract => mesh.triangle_simplex(triangle)?,
        ElementSource::Embedded => mesh.embedded_triangle(triangle)?,
    };
    let table = simplex.d_lambda_table();
    let scale = simplex.star_vol().abs();
    Ok(ElementMatrix {
        triangle,
        s: Matrix3::from_fn(|a, b| table[(a, b)] * scale),
    })
}

/// Element matrices of every triangle, in triangle order.
pub fn element_matrices(mesh: &SpacetimeMesh, source: ElementSource) -> Result<Vec<ElementMatrix>> {
    (0..mesh.triangles().len())
        .into_par_iter()
        .map(|t| element_matrix_from(mesh, t, source))
        .collect()
}

/// Assembled discrete action on a fixed mesh.
pub struct WaveOperator<'m> {
    mesh: &'m SpacetimeMesh,
    elements: Vec<ElementMatrix>,
    /// `(element, local vertex)` pairs per node, in triangle order.
    incident: Vec<Vec<(usize, usize)>>,
}

impl<'m> WaveOperator<'m> {
    pub fn new(mesh: &'m SpacetimeMesh) -> Result<Self> {
        Self::with_source(mesh, ElementSource::Abstract)
    }

    pub fn with_source(mesh: &'m SpacetimeMesh, source: ElementSource) -> Result<Self> {
        let elements = element_matrices(mesh, source)?;
        let mut incident = vec![Vec::new(); mesh.num_nodes()];
        for (t, tri) in mesh.triangles().iter().enumerate() {
            for (a, &n) in tri.iter().enumerate() {
                incident[n].push((t, a));
            }
        }
        Ok(Self {
            mesh,
            elements,
            incident,
        })
    }

    pub fn mesh(&self) -> &SpacetimeMesh {
        self.mesh
    }

    pub fn elements(&self) -> &[ElementMatrix] {
        &self.elements
    }

    fn check(&self, f: &DiscreteField) -> Result<()> {
        if f.len() != self.mesh.num_nodes() {
            return Err(Error::FieldSize {
                expected: self.mesh.num_nodes(),
                found: f.len(),
            });
        }
        Ok(())
    }

    /// `Σ_T f_T · S_T f_T`.
    pub fn action(&self, f: &DiscreteField) -> Result<f64> {
        self.check(f)?;
        let tris = self.mesh.triangles();
        Ok(self
            .elements
            .iter()
            .map(|e| {
                let tri = tris[e.triangle];
                let local = nalgebra::Vector3::from_fn(|a, _| f.get(tri[a]));
                local.dot(&(e.s * local))
            })
            .sum())
    }

    /// `∂S/∂f_node` at any node, boundary or not.
    pub fn gradient_at(&self, f: &DiscreteField, node: usize) -> f64 {
        let tris = self.mesh.triangles();
        self.incident[node]
            .iter()
            .map(|&(t, a)| {
                let tri = tris[self.elements[t].triangle];
                (0..3).map(|b| 2.0 * self.elements[t].s[(a, b)] * f.get(tri[b])).sum::<f64>()
            })
            .sum()
    }

    /// Discrete Euler-Lagrange residual at a node of slices `1..=M-2`.
    pub fn residual(&self, f: &DiscreteField, node: usize) -> Result<f64> {
        self.check(f)?;
        let (slice, _) = self
            .mesh
            .location(node)
            .ok_or_else(|| Error::InvalidMesh(format!("node {node} belongs to no slice")))?;
        if slice == 0 || slice + 1 >= self.mesh.num_slices() {
            return Err(Error::BoundaryNode { node, slice });
        }
        Ok(self.gradient_at(f, node))
    }

    /// Max |residual| over all interior nodes.
    pub fn max_residual(&self, f: &DiscreteField) -> Result<f64> {
        self.check(f)?;
        Ok(interior_nodes(self.mesh).fold(0.0, |m, n| m.max(self.gradient_at(f, n).abs())))
    }

    /// Rows: residuals at slice-`k` nodes. Columns: slice-`k+1` values.
    /// The right-hand side collects contributions from known slices.
    fn slice_system(&self, f: &DiscreteField, k: usize) -> Result<(DMatrix<f64>, DVector<f64>)> {
        let mesh = self.mesh;
        let rows = &mesh.slices()[k];
        let width = mesh.slices()[k + 1].len();
        let mut a = DMatrix::zeros(rows.len(), width);
        let mut rhs = DVector::zeros(rows.len());
        let tris = mesh.triangles();
        for (r, &node) in rows.iter().enumerate() {
            for &(t, la) in &self.incident[node] {
                let tri = tris[self.elements[t].triangle];
                for (lb, &other) in tri.iter().enumerate() {
                    let coef = 2.0 * self.elements[t].s[(la, lb)];
                    match mesh.location(other) {
                        Some((s, pos)) if s == k + 1 => a[(r, pos)] += coef,
                        Some((s, _)) if s + 1 == k || s == k => rhs[r] -= coef * f.get(other),
                        _ => {
                            return Err(Error::InvalidMesh(format!(
                                "triangle {} reaches beyond slices {}..={}",
                                self.elements[t].triangle,
                                k.saturating_sub(1),
                                k + 1
                            )))
                        }
                    }
                }
            }
        }
        Ok((a, rhs))
    }

    /// Marches from two initial slices: stationarity at slice `k` fixes slice `k+1`.
    pub fn march(&self, first: &[f64], second: &[f64], policy: SlicePolicy) -> Result<DiscreteField> {
        let mesh = self.mesh;
        let mut f = DiscreteField::constant(mesh, 0.0);
        for (k, values) in [first, second].into_iter().enumerate() {
            let slice = &mesh.slices()[k];
            if values.len() != slice.len() {
                return Err(Error::FieldSize {
                    expected: slice.len(),
                    found: values.len(),
                });
            }
            for (&n, &v) in slice.iter().zip(values) {
                f.set(n, v);
            }
        }
        let mut cache = SolverCache::default();
        for k in 1..mesh.num_slices() - 1 {
            let (a, rhs) = self.slice_system(&f, k)?;
            let next = cache.solve(a, &rhs, k, policy)?;
            for (&n, &v) in mesh.slices()[k + 1].iter().zip(next.iter()) {
                f.set(n, v);
            }
        }
        Ok(f)
    }

    /// Solves all interior stationarity conditions at once for slices `2..M`.
    pub fn global_solve(&self, first: &[f64], second: &[f64]) -> Result<DiscreteField> {
        let mesh = self.mesh;
        let m = mesh.num_slices();
        let known = |node: usize| mesh.location(node).map(|(s, _)| s < 2).unwrap_or(false);
        let mut f = DiscreteField::constant(mesh, 0.0);
        for (k, values) in [first, second].into_iter().enumerate() {
            for (&n, &v) in mesh.slices()[k].iter().zip(values) {
                f.set(n, v);
            }
        }
        let unknowns: Vec<usize> = mesh.slices()[2..].iter().flatten().copied().collect();
        let mut column = vec![usize::MAX; mesh.num_nodes()];
        for (c, &n) in unknowns.iter().enumerate() {
            column[n] = c;
        }
        let rows: Vec<usize> = mesh.slices()[1..m - 1].iter().flatten().copied().collect();
        let mut a = DMatrix::zeros(rows.len(), unknowns.len());
        let mut rhs = DVector::zeros(rows.len());
        let tris = mesh.triangles();
        for (r, &node) in rows.iter().enumerate() {
            for &(t, la) in &self.incident[node] {
                let tri = tris[self.elements[t].triangle];
                for (lb, &other) in tri.iter().enumerate() {
                    let coef = 2.0 * self.elements[t].s[(la, lb)];
                    if known(other) {
                        rhs[r] -= coef * f.get(other);
                    } else {
                        a[(r, column[other])] += coef;
                    }
                }
            }
        }
        let x = solve_dense(a, &rhs, 0, SlicePolicy::MinimumNorm)?;
        for (&n, &v) in unknowns.iter().zip(x.iter()) {
            f.set(n, v);
        }
        Ok(f)
    }
}

/// Nodes on slices `1..=M-2`, slice by slice.
pub fn interior_nodes(mesh: &SpacetimeMesh) -> impl Iterator<Item = usize> + '_ {
    let m = mesh.num_slices();
    mesh.slices()[1..m.saturating_sub(1).max(1)].iter().flatten().copied()
}

/// Handling of rank-deficient slice systems.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SlicePolicy {
    /// Any numerically singular slice system is an error.
    Strict,
    /// Consistent rank-deficient systems take the minimum-norm solution.
    #[default]
    MinimumNorm,
}

/// Singular values below this fraction of the largest count as zero.
pub const RANK_TOL: f64 = 1e-10;
/// Relative residual above which a least-squares solution is rejected.
pub const CONSISTENCY_TOL: f64 = 1e-8;

#[derive(Default)]
struct SolverCache {
    entries: Vec<(DMatrix<f64>, SVD<f64, nalgebra::Dyn, nalgebra::Dyn>)>,
}

impl SolverCache {
    fn solve(&mut self, a: DMatrix<f64>, rhs: &DVector<f64>, slice: usize, policy: SlicePolicy) -> Result<DVector<f64>> {
        let hit = self.entries.iter().position(|(m, _)| *m == a);
        let idx = match hit {
            Some(i) => i,
            None => {
                if self.entries.len() == 4 {
                    self.entries.remove(0);
                }
                let svd = SVD::new(a.clone(), true, true);
                self.entries.push((a.clone(), svd));
                self.entries.len() - 1
            }
        };
        let (matrix, svd) = &self.entries[idx];
        svd_solve(matrix, svd, rhs, slice, policy)
    }
}

fn solve_dense(a: DMatrix<f64>, rhs: &DVector<f64>, slice: usize, policy: SlicePolicy) -> Result<DVector<f64>> {
    let svd = SVD::new(a.clone(), true, true);
    svd_solve(&a, &svd, rhs, slice, policy)
}

fn svd_solve(
    a: &DMatrix<f64>,
    svd: &SVD<f64, nalgebra::Dyn, nalgebra::Dyn>,
    rhs: &DVector<f64>,
    slice: usize,
    policy: SlicePolicy,
) -> Result<DVector<f64>> {
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    let singular = !(smax > 0.0) || smin <= RANK_TOL * smax;
    let x = svd
        .solve(rhs, RANK_TOL * smax)
        .map_err(|_| Error::Solver {
            slice,
            condition,
            residual: f64::NAN,
        })?;
    let residual = (a * &x - rhs).amax();
    if singular && policy == SlicePolicy::Strict {
        return Err(Error::Solver {
            slice,
            condition,
            residual,
        });
    }
    if !(residual <= CONSISTENCY_TOL * (1.0 + rhs.amax())) {
        return Err(Error::Solver {
            slice,
            condition,
            residual,
        });
    }
    if singular {
        log::debug!("slice {slice}: rank-deficient system (condition {condition:e}), minimum-norm solution");
    }
    Ok(x)
}

pub fn discrete_action(f: &DiscreteField, mesh: &SpacetimeMesh) -> Result<f64> {
    WaveOperator::new(mesh)?.action(f)
}

pub fn el_residual(f: &DiscreteField, node: usize, mesh: &SpacetimeMesh) -> Result<f64> {
    WaveOperator::new(mesh)?.residual(f, node)
}

pub fn march(mesh: &SpacetimeMesh, first: &[f64], second: &[f64]) -> Result<DiscreteField> {
    WaveOperator::new(mesh)?.march(first, second, SlicePolicy::default())
}

/// Slices 0 and 1 of the travelling-wave reference solution.
pub fn initial_slices(mesh: &SpacetimeMesh) -> Result<(Vec<f64>, Vec<f64>)> {
    let exact = exact_field(mesh)?;
    Ok((exact.slice_values(mesh, 0), exact.slice_values(mesh, 1)))
}

pub fn exact_field(mesh: &SpacetimeMesh) -> Result<DiscreteField> {
    let l = mesh
        .circumference()
        .ok_or_else(|| Error::InvalidMesh("mesh carries no circumference".into()))?;
    DiscreteField::sample(mesh, |t, x| exact_solution(x, t, l))
}

/// A marched travelling wave together with its mesh and diagnostics.
#[derive(Clone, Debug)]
pub struct WaveRun {
    pub mesh: SpacetimeMesh,
    pub field: DiscreteField,
    pub diagnostics: Diagnostics,
}

/// Builds the mesh, starts from two exact slices and marches to the last slice.
pub fn simulate(spec: &MeshSpec, source: ElementSource, policy: SlicePolicy) -> Result<WaveRun> {
    let mesh = SpacetimeMesh::build(spec)?;
    let (first, second) = initial_slices(&mesh)?;
    let field = WaveOperator::with_source(&mesh, source)?.march(&first, &second, policy)?;
    let diagnostics = diagnostics(&field, &mesh)?;
    Ok(WaveRun {
        mesh,
        field,
        diagnostics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_cylinder_mesh, build_lightcone_mesh, MeshSpec, MeshStyle};
    use approx::assert_abs_diff_eq;

    fn regular(n: usize, m: usize, dx: f64, dt: f64) -> SpacetimeMesh {
        build_cylinder_mesh(&MeshSpec {
            nodes_per_slice: n,
            num_slices: m,
            dx,
            dt,
            style: MeshStyle::Regular,
        })
        .unwrap()
    }

    fn lightcone(n: usize, m: usize) -> SpacetimeMesh {
        build_lightcone_mesh(&MeshSpec {
            nodes_per_slice: n,
            num_slices: m,
            dx: 1.0,
            dt: 1.0,
            style: MeshStyle::Lightcone,
        })
        .unwrap()
    }

    #[test]
    fn right_triangle_element() {
        let mesh = regular(4, 3, 1.0, 0.5);
        let e = element_matrix(&mesh, 0).unwrap();
        // vertex (1,0) of triangle 0 is the right angle
        assert_abs_diff_eq!(e.s[(1, 1)], -0.75, epsilon = 1e-14);
        for a in 0..3 {
            assert_abs_diff_eq!(e.s.row(a).sum(), 0.0, epsilon = 1e-14);
            for b in 0..3 {
                assert_abs_diff_eq!(e.s[(a, b)], e.s[(b, a)], epsilon = 1e-15);
            }
        }
        let embedded = element_matrix_from(&mesh, 0, ElementSource::Embedded).unwrap();
        assert!((embedded.s - e.s).abs().max() < 1e-12);
    }

    #[test]
    fn lightcone_element() {
        let mesh = lightcone(4, 3);
        // triangle 0: apex below, null edges to both upper nodes
        let e = element_matrix(&mesh, 0).unwrap();
        assert_abs_diff_eq!(e.s[(0, 0)], -1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(e.s[(0, 1)], 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(e.s[(1, 2)], -0.5, epsilon = 1e-14);
    }

    #[test]
    fn action_examples() {
        let mesh = regular(4, 3, 1.0, 0.5);
        let op = WaveOperator::new(&mesh).unwrap();
        let c = DiscreteField::constant(&mesh, 2.5);
        assert_abs_diff_eq!(op.action(&c).unwrap(), 0.0, epsilon = 1e-13);
        // f = t: each triangle contributes ⟨dt, dt⟩ vol = -dx dt / 2
        let t = DiscreteField::sample(&mesh, |t, _| t).unwrap();
        let per = -0.25;
        assert_abs_diff_eq!(op.action(&t).unwrap(), per * 16.0, epsilon = 1e-13);
        let single = &op.elements()[0];
        let tri = mesh.triangles()[0];
        let local = nalgebra::Vector3::from_fn(|a, _| t.get(tri[a]));
        assert_abs_diff_eq!(local.dot(&(single.s * local)), per, epsilon = 1e-14);
        let scaled = DiscreteField::new(&mesh, t.values().iter().map(|v| 3.0 * v).collect()).unwrap();
        assert_abs_diff_eq!(op.action(&scaled).unwrap(), 9.0 * op.action(&t).unwrap(), epsilon = 1e-12);
    }

    #[test]
    fn boundary_nodes_rejected() {
        let mesh = regular(4, 3, 1.0, 0.5);
        let f = DiscreteField::constant(&mesh, 1.0);
        assert!(matches!(el_residual(&f, 0, &mesh), Err(Error::BoundaryNode { slice: 0, .. })));
        assert!(matches!(el_residual(&f, 9, &mesh), Err(Error::BoundaryNode { slice: 2, .. })));
        assert_abs_diff_eq!(el_residual(&f, 5, &mesh).unwrap(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn courant_one_stencil_is_leapfrog() {
        let (n, m) = (7, 5);
        let mesh = regular(n, m, 1.0, 1.0);
        let op = WaveOperator::new(&mesh).unwrap();
        let f = DiscreteField::sample(&mesh, |t, x| (0.3 * t + 0.2).sin() * (0.7 * x).cos() + 0.1 * t * x).unwrap();
        let at = |i: usize, k: usize| f.get(k * n + i % n);
        for k in 1..m - 1 {
            for i in 0..n {
                let leapfrog = at(i, k + 1) + at(i, k - 1) - at(i + 1, k) - at(i + n - 1, k);
                let r = op.residual(&f, k * n + i).unwrap();
                assert_abs_diff_eq!(r, 2.0 * leapfrog, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn constant_data_stays_constant() {
        let mesh = regular(8, 6, 1.0, 0.8);
        let f = march(&mesh, &[1.5; 8], &[1.5; 8]).unwrap();
        assert!(f.values().iter().all(|&v| (v - 1.5).abs() < 1e-13));
    }

    #[test]
    fn courant_one_march_is_exact() {
        let mesh = regular(16, 40, 1.0, 1.0);
        let (a, b) = initial_slices(&mesh).unwrap();
        let f = march(&mesh, &a, &b).unwrap();
        assert!(f.max_abs_diff(&exact_field(&mesh).unwrap()) < 1e-10);
    }

    #[test]
    fn lightcone_march_is_exact() {
        let mesh = lightcone(10, 30);
        let (a, b) = initial_slices(&mesh).unwrap();
        let f = march(&mesh, &a, &b).unwrap();
        assert!(f.max_abs_diff(&exact_field(&mesh).unwrap()) < 1e-10);
        let strict = WaveOperator::new(&mesh).unwrap().march(&a, &b, SlicePolicy::Strict);
        assert!(matches!(strict, Err(Error::Solver { slice: 1, .. })));
    }

    #[test]
    fn inconsistent_system_is_reported() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let consistent = solve_dense(a.clone(), &DVector::from_vec(vec![2.0, 2.0]), 3, SlicePolicy::MinimumNorm).unwrap();
        assert_abs_diff_eq!(consistent[0], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(consistent[1], 1.0, epsilon = 1e-14);
        match solve_dense(a.clone(), &DVector::from_vec(vec![1.0, 0.0]), 3, SlicePolicy::MinimumNorm) {
            Err(Error::Solver { slice, residual, condition }) => {
                assert_eq!(slice, 3);
                assert!(residual > CONSISTENCY_TOL);
                assert!(condition > 1e10);
            }
            other => panic!("expected solver error, got {other:?}"),
        }
        assert!(solve_dense(a, &DVector::from_vec(vec![2.0, 2.0]), 3, SlicePolicy::Strict).is_err());
    }

    #[test]
    fn global_solve_matches_march() {
        let mesh = regular(6, 6, 1.0, 0.8);
        let op = WaveOperator::new(&mesh).unwrap();
        let (a, b) = initial_slices(&mesh).unwrap();
        let marched = op.march(&a, &b, SlicePolicy::Strict).unwrap();
        let global = op.global_solve(&a, &b).unwrap();
        assert!(marched.max_abs_diff(&global) < 1e-9);
    }
}
