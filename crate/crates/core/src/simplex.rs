//! Oriented simplices carrying metric data, either as embedded vertex
//! coordinates or as abstract signed squared edge lengths.
//!
//! Squared lengths are signed: with signature `(-, +)` a timelike edge has a
//! negative squared length and a null edge has zero.

use nalgebra::DMatrix;

use crate::algebra::{flat, wedge_all, KTensor, MetricSignature, Variance, MAX_DIM};
use crate::error::{Error, Result};

/// Relative threshold for `|det G| / max|G_ij|^n` below which a simplex is degenerate.
pub const DEGENERACY_TOL: f64 = 1e-12;

pub(crate) fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

/// Sorts `seq` in place and returns the parity (`±1`) of the sorting permutation.
pub fn permutation_parity_of(seq: &mut [usize]) -> f64 {
    let mut swaps = 0usize;
    for i in 0..seq.len() {
        for j in 0..seq.len() - 1 - i {
            if seq[j] > seq[j + 1] {
                seq.swap(j, j + 1);
                swaps += 1;
            }
        }
    }
    if swaps.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Sign of `order` as a permutation of `0..order.len()`.
pub fn perm_sign(order: &[usize]) -> Result<f64> {
    let mut seen = vec![false; order.len()];
    for &i in order {
        if i >= order.len() || seen[i] {
            return Err(Error::InvalidSubsimplex(format!(
                "{order:?} is not a permutation of 0..{}",
                order.len()
            )));
        }
        seen[i] = true;
    }
    Ok(permutation_parity_of(&mut order.to_vec()))
}

/// An ordered list of local vertex indices of an `n`-simplex.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Subsimplex {
    indices: Vec<usize>,
}

impl Subsimplex {
    /// `n` is the dimension of the parent simplex, so valid indices are `0..=n`.
    pub fn new(indices: &[usize], n: usize) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::InvalidSubsimplex("empty vertex list".into()));
        }
        let mut seen = vec![false; n + 1];
        for &i in indices {
            if i > n {
                return Err(Error::InvalidSubsimplex(format!("index {i} exceeds {n}")));
            }
            if seen[i] {
                return Err(Error::InvalidSubsimplex(format!("duplicate index {i}")));
            }
            seen[i] = true;
        }
        Ok(Self {
            indices: indices.to_vec(),
        })
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    /// Dimension `j` of the face (one less than its vertex count).
    pub fn dim(&self) -> usize {
        self.indices.len() - 1
    }

    /// Remaining vertices of the parent `n`-simplex in increasing order.
    pub fn complement(&self, n: usize) -> Vec<usize> {
        (0..=n).filter(|i| !self.indices.contains(i)).collect()
    }

    /// Sign of `self ++ tau` as a permutation of the parent's vertex order.
    pub fn ordering_sign(&self, tau: &[usize], n: usize) -> Result<f64> {
        let order: Vec<usize> = self.indices.iter().chain(tau).copied().collect();
        if order.len() != n + 1 {
            return Err(Error::InvalidSubsimplex(format!(
                "{:?} with complement {tau:?} does not cover {} vertices",
                self.indices,
                n + 1
            )));
        }
        perm_sign(&order)
    }

    /// [`Self::ordering_sign`] with the increasing complement.
    pub fn perm_sign(&self, n: usize) -> Result<f64> {
        self.ordering_sign(&self.complement(n), n)
    }
}

/// Symmetric table of signed squared edge lengths over `n + 1` vertices.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeLengths {
    sq: Vec<Vec<f64>>,
}

impl EdgeLengths {
    pub fn from_matrix(sq: Vec<Vec<f64>>) -> Result<Self> {
        let m = sq.len();
        if !(2..=MAX_DIM + 1).contains(&m) {
            return Err(Error::UnsupportedDimension(m.saturating_sub(1)));
        }
        for (i, row) in sq.iter().enumerate() {
            if row.len() != m {
                return Err(Error::InvalidEdgeData(format!("row {i} has length {}", row.len())));
            }
            if row[i] != 0.0 {
                return Err(Error::InvalidEdgeData(format!("nonzero diagonal at {i}")));
            }
            for j in 0..i {
                if row[j] != sq[j][i] {
                    return Err(Error::InvalidEdgeData(format!("asymmetric entry ({i}, {j})")));
                }
                if !row[j].is_finite() {
                    return Err(Error::InvalidEdgeData(format!("non-finite entry ({i}, {j})")));
                }
            }
        }
        Ok(Self { sq })
    }

    /// Builds the table from `(i, j, sq_len)` triples; every pair must appear exactly once.
    pub fn from_pairs(num_vertices: usize, pairs: &[(usize, usize, f64)]) -> Result<Self> {
        let mut sq = vec![vec![f64::NAN; num_vertices]; num_vertices];
        for (i, row) in sq.iter_mut().enumerate() {
            row[i] = 0.0;
        }
        for &(i, j, l) in pairs {
            if i >= num_vertices || j >= num_vertices || i == j {
                return Err(Error::InvalidEdgeData(format!("bad edge ({i}, {j})")));
            }
            if !sq[i][j].is_nan() {
                return Err(Error::InvalidEdgeData(format!("duplicate edge ({i}, {j})")));
            }
            sq[i][j] = l;
            sq[j][i] = l;
        }
        for (i, row) in sq.iter().enumerate() {
            if let Some(j) = row.iter().position(|v| v.is_nan()) {
                return Err(Error::InvalidEdgeData(format!("missing edge ({i}, {j})")));
            }
        }
        Self::from_matrix(sq)
    }

    pub fn num_vertices(&self) -> usize {
        self.sq.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.sq[i][j]
    }
}

/// Gram matrix `G_ij = ⟨v_i - v_0, v_j - v_0⟩` of the edge vectors at vertex 0.
#[derive(Clone, Debug, PartialEq)]
pub struct GramMatrix {
    entries: DMatrix<f64>,
    inverse: DMatrix<f64>,
    det: f64,
}

impl GramMatrix {
    fn new(entries: DMatrix<f64>) -> Result<Self> {
        let n = entries.nrows();
        let det = entries.determinant();
        let scale = entries.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let threshold = DEGENERACY_TOL * scale.powi(n as i32);
        if !(det.abs() >= threshold) || scale == 0.0 {
            return Err(Error::DegenerateSimplex { det, threshold });
        }
        let inverse = entries
            .clone()
            .try_inverse()
            .ok_or(Error::DegenerateSimplex { det, threshold })?;
        Ok(Self { entries, inverse, det })
    }

    /// Polarization: `G_ij = (ℓ²_0i + ℓ²_0j - ℓ²_ij) / 2`.
    pub fn from_edge_lengths(edges: &EdgeLengths) -> Result<Self> {
        let n = edges.num_vertices() - 1;
        let entries = DMatrix::from_fn(n, n, |a, b| {
            let (i, j) = (a + 1, b + 1);
            0.5 * (edges.get(0, i) + edges.get(0, j) - edges.get(i, j))
        });
        Self::new(entries)
    }

    pub fn from_vertices(vertices: &[Vec<f64>], g: &MetricSignature) -> Result<Self> {
        let n = vertices.len() - 1;
        let edge = |i: usize| -> Vec<f64> {
            vertices[i].iter().zip(&vertices[0]).map(|(a, b)| a - b).collect()
        };
        let edges: Vec<Vec<f64>> = (1..=n).map(edge).collect();
        Self::new(DMatrix::from_fn(n, n, |a, b| g.dot(&edges[a], &edges[b])))
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn inverse(&self) -> &DMatrix<f64> {
        &self.inverse
    }

    pub fn det(&self) -> f64 {
        self.det
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Geometry {
    Embedded {
        vertices: Vec<Vec<f64>>,
        signature: MetricSignature,
        /// `(E^T)^{-1}` with the rows of `E` the edge vectors; row `i` holds `dμ_{i+1}`.
        dual_edges: DMatrix<f64>,
        edge_det: f64,
    },
    Abstract,
}

/// The simplex's volume form (embedded mode only) and the scalar `⋆vol(σ)`.
#[derive(Clone, Debug, PartialEq)]
pub struct VolumeForm {
    pub form: Option<KTensor>,
    pub star_vol: f64,
}

/// An oriented `n`-simplex `[v_0, ..., v_n]` with metric information.
#[derive(Clone, Debug, PartialEq)]
pub struct Simplex {
    dim: usize,
    geometry: Geometry,
    edges: EdgeLengths,
    gram: GramMatrix,
}

impl Simplex {
    pub fn embedded(vertices: Vec<Vec<f64>>, signature: MetricSignature) -> Result<Self> {
        let n = signature.dim();
        if vertices.len() != n + 1 {
            return Err(Error::DimensionMismatch {
                expected: n + 1,
                found: vertices.len(),
            });
        }
        if let Some(v) = vertices.iter().find(|v| v.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: v.len(),
            });
        }
        let gram = GramMatrix::from_vertices(&vertices, &signature)?;
        let sq = (0..=n)
            .map(|i| {
                (0..=n)
                    .map(|j| {
                        let d: Vec<f64> = vertices[i].iter().zip(&vertices[j]).map(|(a, b)| a - b).collect();
                        if i == j {
                            0.0
                        } else {
                            signature.dot(&d, &d)
                        }
                    })
                    .collect()
            })
            .collect();
        let edges = EdgeLengths::from_matrix(sq)?;
        let e = DMatrix::from_fn(n, n, |i, a| vertices[i + 1][a] - vertices[0][a]);
        let edge_det = e.determinant();
        let dual_edges = e.transpose().try_inverse().ok_or(Error::DegenerateSimplex {
            det: gram.det,
            threshold: 0.0,
        })?;
        Ok(Self {
            dim: n,
            geometry: Geometry::Embedded {
                vertices,
                signature,
                dual_edges,
                edge_det,
            },
            edges,
            gram,
        })
    }

    pub fn from_edge_lengths(edges: EdgeLengths) -> Result<Self> {
        let gram = GramMatrix::from_edge_lengths(&edges)?;
        Ok(Self {
            dim: edges.num_vertices() - 1,
            geometry: Geometry::Abstract,
            edges,
            gram,
        })
    }

    /// The coordinate-free twin of an embedded simplex, built from its squared edge lengths.
    pub fn abstract_twin(&self) -> Result<Self> {
        Self::from_edge_lengths(self.edges.clone())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_embedded(&self) -> bool {
        matches!(self.geometry, Geometry::Embedded { .. })
    }

    pub fn vertices(&self) -> Option<&[Vec<f64>]> {
        match &self.geometry {
            Geometry::Embedded { vertices, .. } => Some(vertices),
            Geometry::Abstract => None,
        }
    }

    pub fn signature(&self) -> Option<&MetricSignature> {
        match &self.geometry {
            Geometry::Embedded { signature, .. } => Some(signature),
            Geometry::Abstract => None,
        }
    }

    pub(crate) fn embedded_parts(&self) -> Result<(&[Vec<f64>], &MetricSignature)> {
        match &self.geometry {
            Geometry::Embedded { vertices, signature, .. } => Ok((vertices, signature)),
            Geometry::Abstract => Err(Error::NotEmbedded),
        }
    }

    pub fn edge_lengths(&self) -> &EdgeLengths {
        &self.edges
    }

    pub fn gram(&self) -> &GramMatrix {
        &self.gram
    }

    /// `⋆vol(σ)`: the signed volume `det(E)/n!` when embedded; abstract simplices
    /// take their vertex order as positive and return `sqrt|det G| / n!`.
    pub fn star_vol(&self) -> f64 {
        match &self.geometry {
            Geometry::Embedded { edge_det, .. } => edge_det / factorial(self.dim),
            Geometry::Abstract => self.gram.det.abs().sqrt() / factorial(self.dim),
        }
    }

    pub fn volume_form(&self) -> Result<VolumeForm> {
        let form = match &self.geometry {
            Geometry::Embedded { vertices, signature, .. } => {
                let flats = (1..=self.dim)
                    .map(|i| {
                        let d: Vec<f64> = vertices[i].iter().zip(&vertices[0]).map(|(a, b)| a - b).collect();
                        flat(&KTensor::vector(&d)?, signature)
                    })
                    .collect::<Result<Vec<_>>>()?;
                let w = wedge_all(self.dim, Variance::Covector, &flats)?;
                Some(w.scale(1.0 / factorial(self.dim)))
            }
            Geometry::Abstract => None,
        };
        Ok(VolumeForm {
            form,
            star_vol: self.star_vol(),
        })
    }

    /// Barycentric coordinates of `x`; they sum to one and are affine in `x`.
    pub fn barycentric(&self, x: &[f64]) -> Result<Vec<f64>> {
        let Geometry::Embedded { vertices, dual_edges, .. } = &self.geometry else {
            return Err(Error::NotEmbedded);
        };
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: x.len(),
            });
        }
        let rel: Vec<f64> = x.iter().zip(&vertices[0]).map(|(a, b)| a - b).collect();
        let mu: Vec<f64> = (0..self.dim)
            .map(|i| (0..self.dim).map(|a| dual_edges[(i, a)] * rel[a]).sum())
            .collect();
        let mut lambda = Vec::with_capacity(self.dim + 1);
        lambda.push(1.0 - mu.iter().sum::<f64>());
        lambda.extend(mu);
        Ok(lambda)
    }

    /// The point with the given barycentric coordinates.
    pub fn point(&self, lambda: &[f64]) -> Result<Vec<f64>> {
        let (vertices, _) = self.embedded_parts()?;
        Ok((0..self.dim)
            .map(|a| vertices.iter().zip(lambda).map(|(v, l)| l * v[a]).sum())
            .collect())
    }

    /// Differentials `dλ_0, ..., dλ_n` as covectors in ambient coordinates.
    pub fn d_lambda(&self) -> Result<Vec<KTensor>> {
        let Geometry::Embedded { dual_edges, .. } = &self.geometry else {
            return Err(Error::NotEmbedded);
        };
        let n = self.dim;
        let rows: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|a| dual_edges[(i, a)]).collect()).collect();
        let first: Vec<f64> = (0..n).map(|a| -rows.iter().map(|r| r[a]).sum::<f64>()).collect();
        std::iter::once(first)
            .chain(rows)
            .map(|c| KTensor::covector(&c))
            .collect()
    }

    /// Table `⟨dλ_a, dλ_b⟩` from the inverse Gram matrix; needs no coordinates.
    pub fn d_lambda_table(&self) -> DMatrix<f64> {
        let inv = &self.gram.inverse;
        let n = self.dim;
        DMatrix::from_fn(n + 1, n + 1, |a, b| match (a, b) {
            (0, 0) => inv.sum(),
            (0, b) => -inv.column(b - 1).sum(),
            (a, 0) => -inv.row(a - 1).sum(),
            (a, b) => inv[(a - 1, b - 1)],
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::inner;
    use approx::assert_abs_diff_eq;

    fn unit_triangle() -> Simplex {
        Simplex::embedded(
            vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]],
            MetricSignature::euclidean(2).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn gram_from_lengths_examples() {
        let e = EdgeLengths::from_pairs(3, &[(0, 1, 1.0), (0, 2, 1.0), (1, 2, 2.0)]).unwrap();
        let g = GramMatrix::from_edge_lengths(&e).unwrap();
        assert_eq!(g.entries().as_slice(), &[1.0, 0.0, 0.0, 1.0]);

        let e = EdgeLengths::from_pairs(3, &[(0, 1, 0.0), (0, 2, 0.0), (1, 2, 4.0)]).unwrap();
        let g = GramMatrix::from_edge_lengths(&e).unwrap();
        assert_eq!(g.entries().as_slice(), &[0.0, -2.0, -2.0, 0.0]);
        assert_abs_diff_eq!(g.det(), -4.0, epsilon = 1e-14);

        let e = EdgeLengths::from_pairs(3, &[(0, 1, 1.0), (0, 2, 4.0), (1, 2, 1.0)]).unwrap();
        assert!(matches!(
            GramMatrix::from_edge_lengths(&e),
            Err(Error::DegenerateSimplex { .. })
        ));
    }

    #[test]
    fn light_cone_triangle_matches_embedding() {
        // metric -dt² + dx², coordinates (t, x)
        let s = Simplex::embedded(
            vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![1.0, -1.0]],
            MetricSignature::lorentzian(2).unwrap(),
        )
        .unwrap();
        assert_eq!(s.edge_lengths().get(0, 1), 0.0);
        assert_eq!(s.edge_lengths().get(1, 2), 4.0);
        assert_eq!(s.gram().entries().as_slice(), &[0.0, -2.0, -2.0, 0.0]);
        let twin = s.abstract_twin().unwrap();
        assert_abs_diff_eq!(twin.star_vol(), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(s.star_vol().abs(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn edge_length_validation() {
        assert!(matches!(
            EdgeLengths::from_pairs(3, &[(0, 1, 1.0), (0, 2, 1.0)]),
            Err(Error::InvalidEdgeData(_))
        ));
        assert!(EdgeLengths::from_matrix(vec![vec![0.0, 1.0], vec![2.0, 0.0]]).is_err());
        assert!(EdgeLengths::from_matrix(vec![vec![1.0, 1.0], vec![1.0, 0.0]]).is_err());
    }

    #[test]
    fn volume_form_examples() {
        let t = unit_triangle();
        let v = t.volume_form().unwrap();
        assert_eq!(v.form.unwrap().coeffs(), &[0.5]);
        assert_eq!(v.star_vol, 0.5);

        let seg = Simplex::from_edge_lengths(EdgeLengths::from_pairs(2, &[(0, 1, 9.0)]).unwrap()).unwrap();
        assert_abs_diff_eq!(seg.star_vol(), 3.0, epsilon = 1e-15);
        let seg = Simplex::embedded(vec![vec![0.0], vec![2.5]], MetricSignature::euclidean(1).unwrap()).unwrap();
        assert_eq!(seg.star_vol(), 2.5);
        assert!(seg.abstract_twin().unwrap().volume_form().unwrap().form.is_none());
    }

    #[test]
    fn barycentric_examples() {
        let t = unit_triangle();
        assert_eq!(t.barycentric(&[0.25, 0.25]).unwrap(), vec![0.5, 0.25, 0.25]);
        for k in 0..3 {
            let v = t.vertices().unwrap()[k].clone();
            let l = t.barycentric(&v).unwrap();
            for (i, li) in l.iter().enumerate() {
                assert_abs_diff_eq!(*li, if i == k { 1.0 } else { 0.0 }, epsilon = 1e-15);
            }
        }
        let c = t.barycentric(&[1.0 / 3.0, 1.0 / 3.0]).unwrap();
        c.iter().for_each(|l| assert_abs_diff_eq!(*l, 1.0 / 3.0, epsilon = 1e-15));
        assert!(matches!(t.abstract_twin().unwrap().barycentric(&[0.0, 0.0]), Err(Error::NotEmbedded)));
    }

    #[test]
    fn d_lambda_examples() {
        let dl = unit_triangle().d_lambda().unwrap();
        assert_eq!(dl[0].coeffs(), &[-1.0, -1.0]);
        assert_eq!(dl[1].coeffs(), &[1.0, 0.0]);
        assert_eq!(dl[2].coeffs(), &[0.0, 1.0]);

        // right triangle with Δx = 1, Δt = 1/2 at the right-angle vertex A, coordinates (t, x)
        let s = Simplex::embedded(
            vec![vec![0.0, 0.0], vec![0.0, 1.0], vec![0.5, 0.0]],
            MetricSignature::lorentzian(2).unwrap(),
        )
        .unwrap();
        let g = s.signature().unwrap().clone();
        let dl = s.d_lambda().unwrap();
        assert_abs_diff_eq!(inner(&dl[0], &dl[0], &g).unwrap(), -3.0, epsilon = 1e-14);
        let table = s.abstract_twin().unwrap().d_lambda_table();
        assert_abs_diff_eq!(table[(0, 0)], -3.0, epsilon = 1e-14);
    }

    #[test]
    fn perm_sign_examples() {
        let rho = Subsimplex::new(&[1, 0, 4], 4).unwrap();
        assert_eq!(rho.complement(4), vec![2, 3]);
        assert_eq!(rho.perm_sign(4).unwrap(), -1.0);
        let rho = Subsimplex::new(&[2, 1, 3], 3).unwrap();
        assert_eq!(rho.perm_sign(3).unwrap(), 1.0);
        let rho = Subsimplex::new(&[3, 1], 4).unwrap();
        assert_eq!(rho.ordering_sign(&[4, 2, 0], 4).unwrap(), -1.0);
        assert_eq!(perm_sign(&[0, 1, 2, 3]).unwrap(), 1.0);
        assert!(Subsimplex::new(&[1, 1], 3).is_err());
        assert!(Subsimplex::new(&[4], 3).is_err());
        assert!(perm_sign(&[0, 0, 1]).is_err());
    }
}
