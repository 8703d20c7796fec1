//! Abstract simplicial meshes of a 1+1 spacetime cylinder carrying signed
//! squared edge lengths, in the `(t, x)` signature `(-, +)`.

mod field;
mod io;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::algebra::MetricSignature;
use crate::error::{Error, Result};
use crate::simplex::{EdgeLengths, Simplex};

pub use field::DiscreteField;
pub use io::{export_csv, export_ply, read_csv, read_mesh_json, read_ply, write_mesh_json, FieldRow, PlyData};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MeshStyle {
    Regular,
    Lightcone,
}

impl fmt::Display for MeshStyle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MeshStyle::Regular => "regular",
            MeshStyle::Lightcone => "lightcone",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshSpec {
    pub nodes_per_slice: usize,
    pub num_slices: usize,
    pub dx: f64,
    pub dt: f64,
    pub style: MeshStyle,
}

impl MeshSpec {
    pub fn validate(&self) -> Result<()> {
        if self.nodes_per_slice < 3 {
            return Err(Error::InvalidSpec(format!("nodes_per_slice = {} < 3", self.nodes_per_slice)));
        }
        if self.num_slices < 3 {
            return Err(Error::InvalidSpec(format!("num_slices = {} < 3", self.num_slices)));
        }
        if !(self.dx > 0.0 && self.dx.is_finite()) {
            return Err(Error::InvalidSpec(format!("dx = {} must be positive", self.dx)));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidSpec(format!("dt = {} must be positive", self.dt)));
        }
        if self.style == MeshStyle::Lightcone {
            if (self.dt - self.dx).abs() > 1e-12 * self.dx {
                return Err(Error::InvalidSpec(format!(
                    "lightcone style needs dt = dx (got dt = {}, dx = {})",
                    self.dt, self.dx
                )));
            }
            if !self.nodes_per_slice.is_multiple_of(2) {
                return Err(Error::InvalidSpec(format!(
                    "lightcone style needs an even node count (got {})",
                    self.nodes_per_slice
                )));
            }
        }
        Ok(())
    }

    /// Spatial period of the cylinder.
    pub fn circumference(&self) -> f64 {
        match self.style {
            MeshStyle::Regular => self.nodes_per_slice as f64 * self.dx,
            MeshStyle::Lightcone => 2.0 * self.nodes_per_slice as f64 * self.dx,
        }
    }

    /// Smallest slice count whose last slice reaches `periods` temporal periods.
    pub fn slices_for_periods(&self, periods: f64) -> usize {
        let steps = periods * self.circumference() / self.dt;
        // tolerate round-off just above an integer step count
        let whole = (steps - 1e-9).ceil().max(2.0);
        whole as usize + 1
    }
}

pub fn edge_key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpacetimeMesh {
    nodes_per_slice: usize,
    triangles: Vec<[usize; 3]>,
    edges: BTreeMap<(usize, usize), f64>,
    slices: Vec<Vec<usize>>,
    /// Reference `(t, x)` per node, used for initial data, diagnostics and export only.
    coordinates: Option<Vec<[f64; 2]>>,
    circumference: Option<f64>,
    location: Vec<Option<(usize, usize)>>,
}

impl SpacetimeMesh {
    /// Assembles a mesh from raw parts; only index ranges are checked here,
    /// everything else is left to [`SpacetimeMesh::validate`].
    pub fn from_parts(
        nodes_per_slice: usize,
        slices: Vec<Vec<usize>>,
        triangles: Vec<[usize; 3]>,
        edges: BTreeMap<(usize, usize), f64>,
        coordinates: Option<Vec<[f64; 2]>>,
        circumference: Option<f64>,
    ) -> Result<Self> {
        let num_nodes: usize = slices.iter().map(Vec::len).sum();
        let in_range = |n: usize| n < num_nodes;
        if let Some(bad) = slices.iter().flatten().find(|&&n| !in_range(n)) {
            return Err(Error::InvalidMesh(format!("slice node {bad} out of range")));
        }
        if let Some(t) = triangles.iter().find(|t| t.iter().any(|&n| !in_range(n))) {
            return Err(Error::InvalidMesh(format!("triangle {t:?} references a missing node")));
        }
        if let Some(((a, b), _)) = edges.iter().find(|((a, b), _)| !in_range(*a) || !in_range(*b) || a >= b) {
            return Err(Error::InvalidMesh(format!("edge ({a}, {b}) is not a valid node pair")));
        }
        if let Some(c) = &coordinates {
            if c.len() != num_nodes {
                return Err(Error::InvalidMesh(format!(
                    "{} coordinates for {num_nodes} nodes",
                    c.len()
                )));
            }
        }
        let mut location = vec![None; num_nodes];
        for (k, slice) in slices.iter().enumerate() {
            for (i, &n) in slice.iter().enumerate() {
                location[n].get_or_insert((k, i));
            }
        }
        Ok(Self {
            nodes_per_slice,
            triangles,
            edges,
            slices,
            coordinates,
            circumference,
            location,
        })
    }

    pub fn build(spec: &MeshSpec) -> Result<Self> {
        match spec.style {
            MeshStyle::Regular => build_cylinder_mesh(spec),
            MeshStyle::Lightcone => build_lightcone_mesh(spec),
        }
    }

    pub fn signature(&self) -> MetricSignature {
        MetricSignature::lorentzian(2).expect("two dimensions")
    }

    pub fn num_nodes(&self) -> usize {
        self.location.len()
    }

    pub fn nodes_per_slice(&self) -> usize {
        self.nodes_per_slice
    }

    pub fn num_slices(&self) -> usize {
        self.slices.len()
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn slices(&self) -> &[Vec<usize>] {
        &self.slices
    }

    pub fn edges(&self) -> &BTreeMap<(usize, usize), f64> {
        &self.edges
    }

    pub fn edge_sq_length(&self, a: usize, b: usize) -> Option<f64> {
        self.edges.get(&edge_key(a, b)).copied()
    }

    /// `(slice, position)` of a node.
    pub fn location(&self, node: usize) -> Option<(usize, usize)> {
        self.location.get(node).copied().flatten()
    }

    pub fn coordinates(&self) -> Option<&[[f64; 2]]> {
        self.coordinates.as_deref()
    }

    pub fn circumference(&self) -> Option<f64> {
        self.circumference
    }

    pub(crate) fn reference_frame(&self) -> Result<(&[[f64; 2]], f64)> {
        match (&self.coordinates, self.circumference) {
            (Some(c), Some(l)) => Ok((c, l)),
            _ => Err(Error::InvalidMesh("mesh carries no reference coordinates".into())),
        }
    }

    /// Returns the mesh with one squared edge length replaced (or inserted).
    pub fn with_edge_sq_length(mut self, a: usize, b: usize, sq_len: f64) -> Self {
        self.edges.insert(edge_key(a, b), sq_len);
        self
    }

    pub fn without_edge(mut self, a: usize, b: usize) -> Self {
        self.edges.remove(&edge_key(a, b));
        self
    }

    /// The triangle as a coordinate-free simplex built from its squared edge lengths.
    pub fn triangle_simplex(&self, t: usize) -> Result<Simplex> {
        let [a, b, c] = self.triangles[t];
        let len = |p: usize, q: usize| {
            self.edge_sq_length(p, q)
                .ok_or_else(|| Error::InvalidMesh(format!("triangle {t} lacks edge ({p}, {q})")))
        };
        let edges = EdgeLengths::from_pairs(3, &[(0, 1, len(a, b)?), (0, 2, len(a, c)?), (1, 2, len(b, c)?)])?;
        Simplex::from_edge_lengths(edges)
    }

    /// The triangle embedded in `(t, x)` coordinates, with `x` unwrapped
    /// across the periodic seam relative to the first vertex.
    pub fn embedded_triangle(&self, t: usize) -> Result<Simplex> {
        let (coords, l) = self.reference_frame()?;
        let tri = self.triangles[t];
        let x0 = coords[tri[0]][1];
        let vertices = tri
            .iter()
            .map(|&n| {
                let [tn, xn] = coords[n];
                let dx = xn - x0 - l * ((xn - x0) / l).round();
                vec![tn, x0 + dx]
            })
            .collect();
        Simplex::embedded(vertices, self.signature())
    }

    /// Node id one spatial position further along the same slice.
    pub fn shifted(&self, node: usize, by: usize) -> Option<usize> {
        let (k, i) = self.location(node)?;
        let slice = &self.slices[k];
        Some(slice[(i + by) % slice.len()])
    }

    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();

        let mut counts = vec![0usize; self.num_nodes()];
        for n in self.slices.iter().flatten() {
            counts[*n] += 1;
        }
        for (node, &count) in counts.iter().enumerate() {
            if count != 1 {
                violations.push(Violation::SliceMembership { node, count });
            }
        }
        for (slice, nodes) in self.slices.iter().enumerate() {
            if nodes.len() != self.nodes_per_slice {
                violations.push(Violation::SliceSize {
                    slice,
                    found: nodes.len(),
                    expected: self.nodes_per_slice,
                });
            }
        }

        for (t, tri) in self.triangles.iter().enumerate() {
            let [a, b, c] = *tri;
            if a == b || b == c || a == c {
                violations.push(Violation::RepeatedVertex { triangle: t });
                continue;
            }
            let mut complete = true;
            for (p, q) in [(a, b), (a, c), (b, c)] {
                if self.edge_sq_length(p, q).is_none() {
                    violations.push(Violation::MissingEdge { triangle: t, a: p, b: q });
                    complete = false;
                }
            }
            let layers: BTreeSet<usize> = tri.iter().filter_map(|&n| self.location(n).map(|l| l.0)).collect();
            let spread = layers.iter().next_back().zip(layers.iter().next()).map(|(hi, lo)| hi - lo);
            if spread != Some(1) {
                violations.push(Violation::NonAdjacentSlices { triangle: t });
            }
            if !complete {
                continue;
            }
            match self.triangle_simplex(t) {
                Ok(s) if s.gram().det() < 0.0 => {}
                Ok(s) => violations.push(Violation::NotLorentzian {
                    triangle: t,
                    det: s.gram().det(),
                }),
                Err(Error::DegenerateSimplex { det, .. }) => {
                    violations.push(Violation::DegenerateTriangle { triangle: t, det })
                }
                Err(e) => {
                    log::debug!("triangle {t}: {e}");
                    violations.push(Violation::DegenerateTriangle { triangle: t, det: f64::NAN })
                }
            }
        }

        // edges inside a slice must be spacelike
        for (&(a, b), &sq) in &self.edges {
            let same_slice = matches!((self.location(a), self.location(b)), (Some(p), Some(q)) if p.0 == q.0);
            if same_slice && !(sq > 0.0) {
                violations.push(Violation::DegenerateEdge { a, b, sq_len: sq });
            }
        }

        if violations.is_empty() {
            if let Some(v) = self.shift_violation() {
                violations.push(v);
            }
        }
        ValidationReport { violations }
    }

    fn shift_violation(&self) -> Option<Violation> {
        let canon = |t: &[usize; 3]| {
            let mut s = *t;
            s.sort_unstable();
            s
        };
        let original: BTreeSet<[usize; 3]> = self.triangles.iter().map(canon).collect();
        for tri in &self.triangles {
            let moved = tri.map(|n| self.shifted(n, 1).expect("validated slices"));
            if !original.contains(&canon(&moved)) {
                return Some(Violation::ShiftAsymmetry(format!("triangle {tri:?} has no shifted image")));
            }
        }
        for (&(a, b), &sq) in &self.edges {
            let (sa, sb) = (self.shifted(a, 1)?, self.shifted(b, 1)?);
            match self.edge_sq_length(sa, sb) {
                Some(v) if (v - sq).abs() <= 1e-12 * (1.0 + sq.abs()) => {}
                _ => return Some(Violation::ShiftAsymmetry(format!("edge ({a}, {b}) changes under the shift"))),
            }
        }
        None
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    SliceMembership { node: usize, count: usize },
    SliceSize { slice: usize, found: usize, expected: usize },
    RepeatedVertex { triangle: usize },
    MissingEdge { triangle: usize, a: usize, b: usize },
    NonAdjacentSlices { triangle: usize },
    DegenerateTriangle { triangle: usize, det: f64 },
    NotLorentzian { triangle: usize, det: f64 },
    /// A slice edge whose squared length is not positive.
    DegenerateEdge { a: usize, b: usize, sq_len: f64 },
    ShiftAsymmetry(String),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::SliceMembership { node, count } => write!(f, "node {node} lies in {count} slices"),
            Violation::SliceSize { slice, found, expected } => {
                write!(f, "slice {slice} has {found} nodes, expected {expected}")
            }
            Violation::RepeatedVertex { triangle } => write!(f, "triangle {triangle} repeats a vertex"),
            Violation::MissingEdge { triangle, a, b } => write!(f, "triangle {triangle} lacks edge ({a}, {b})"),
            Violation::NonAdjacentSlices { triangle } => {
                write!(f, "triangle {triangle} does not join two adjacent slices")
            }
            Violation::DegenerateTriangle { triangle, det } => {
                write!(f, "triangle {triangle} is degenerate (det G = {det:e})")
            }
            Violation::NotLorentzian { triangle, det } => {
                write!(f, "triangle {triangle} is not Lorentzian (det G = {det:e})")
            }
            Violation::DegenerateEdge { a, b, sq_len } => {
                write!(f, "slice edge ({a}, {b}) is degenerate (squared length {sq_len})")
            }
            Violation::ShiftAsymmetry(msg) => write!(f, "not shift-periodic: {msg}"),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Uniform quad split of an `N × M` grid on the cylinder, all diagonals parallel.
pub fn build_cylinder_mesh(spec: &MeshSpec) -> Result<SpacetimeMesh> {
    spec.validate()?;
    if spec.style != MeshStyle::Regular {
        return Err(Error::InvalidSpec("build_cylinder_mesh needs the regular style".into()));
    }
    if (spec.dt - spec.dx).abs() <= 1e-12 * spec.dx {
        log::warn!("dt = dx on the regular mesh: diagonal edges are lightlike");
    }
    let (n, m) = (spec.nodes_per_slice, spec.num_slices);
    let id = |i: usize, k: usize| k * n + i % n;
    let (dx2, dt2) = (spec.dx * spec.dx, spec.dt * spec.dt);

    let mut edges = BTreeMap::new();
    let mut triangles = Vec::with_capacity(2 * n * (m - 1));
    for k in 0..m {
        for i in 0..n {
            edges.insert(edge_key(id(i, k), id(i + 1, k)), dx2);
            if k + 1 < m {
                edges.insert(edge_key(id(i, k), id(i, k + 1)), -dt2);
                edges.insert(edge_key(id(i, k), id(i + 1, k + 1)), dx2 - dt2);
                triangles.push([id(i, k), id(i + 1, k), id(i + 1, k + 1)]);
                triangles.push([id(i, k), id(i + 1, k + 1), id(i, k + 1)]);
            }
        }
    }
    let slices = (0..m).map(|k| (0..n).map(|i| id(i, k)).collect()).collect();
    let coordinates = (0..m)
        .flat_map(|k| (0..n).map(move |i| [k as f64 * spec.dt, i as f64 * spec.dx]))
        .collect();
    SpacetimeMesh::from_parts(n, slices, triangles, edges, Some(coordinates), Some(spec.circumference()))
}

/// Diamond lattice with null diagonals: slice `k` holds nodes at
/// `x = (2j + k mod 2) dx`, neighbouring slices are joined by lightlike edges
/// and each diamond is cut by a horizontal chord of squared length `(2 dx)²`.
pub fn build_lightcone_mesh(spec: &MeshSpec) -> Result<SpacetimeMesh> {
    spec.validate()?;
    if spec.style != MeshStyle::Lightcone {
        return Err(Error::InvalidSpec("build_lightcone_mesh needs the lightcone style".into()));
    }
    let (n, m) = (spec.nodes_per_slice, spec.num_slices);
    let id = |j: usize, k: usize| k * n + j % n;
    let chord = 4.0 * spec.dx * spec.dx;

    let mut edges = BTreeMap::new();
    let mut triangles = Vec::with_capacity(2 * n * (m - 1));
    for k in 0..m {
        for j in 0..n {
            edges.insert(edge_key(id(j, k), id(j + 1, k)), chord);
        }
        if k + 1 == m {
            break;
        }
        // positions on slice k+1 at x - dx and x + dx of node j on slice k
        let (left_shift, right_shift) = if k % 2 == 0 { (n - 1, 0) } else { (0, 1) };
        for j in 0..n {
            let below = id(j, k);
            let (ul, ur) = (id(j + left_shift, k + 1), id(j + right_shift, k + 1));
            edges.insert(edge_key(below, ul), 0.0);
            edges.insert(edge_key(below, ur), 0.0);
            triangles.push([below, ur, ul]);
            triangles.push([below, id(j + 1, k), ur]);
        }
    }
    let slices = (0..m).map(|k| (0..n).map(|j| id(j, k)).collect()).collect();
    let coordinates = (0..m)
        .flat_map(|k| (0..n).map(move |j| [k as f64 * spec.dt, (2 * j + k % 2) as f64 * spec.dx]))
        .collect();
    SpacetimeMesh::from_parts(n, slices, triangles, edges, Some(coordinates), Some(spec.circumference()))
}
