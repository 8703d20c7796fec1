//! Mesh JSON, field CSV and cylindrical PLY.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{edge_key, DiscreteField, SpacetimeMesh};
use crate::error::{Error, Result};
use crate::wave::exact_solution;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MeshJson {
    signature: Vec<i32>,
    nodes_per_slice: usize,
    num_slices: usize,
    edges: Vec<(usize, usize, f64)>,
    triangles: Vec<[usize; 3]>,
    slices: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    coordinates: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    circumference: Option<f64>,
}

pub fn write_mesh_json(mesh: &SpacetimeMesh, path: &Path) -> Result<()> {
    let doc = MeshJson {
        signature: mesh.signature().signs().collect(),
        nodes_per_slice: mesh.nodes_per_slice(),
        num_slices: mesh.num_slices(),
        edges: mesh.edges().iter().map(|(&(a, b), &l)| (a, b, l)).collect(),
        triangles: mesh.triangles().to_vec(),
        slices: mesh.slices().to_vec(),
        coordinates: mesh.coordinates().map(<[_]>::to_vec),
        circumference: mesh.circumference(),
    };
    let mut out = BufWriter::new(File::create(path)?);
    serde_json::to_writer(&mut out, &doc)?;
    out.flush()?;
    Ok(())
}

pub fn read_mesh_json(path: &Path) -> Result<SpacetimeMesh> {
    let doc: MeshJson = serde_json::from_reader(BufReader::new(File::open(path)?))?;
    if doc.signature != [-1, 1] {
        return Err(Error::InvalidMesh(format!(
            "signature {:?} is not supported, expected [-1, 1]",
            doc.signature
        )));
    }
    if doc.slices.len() != doc.num_slices {
        return Err(Error::InvalidMesh(format!(
            "num_slices = {} but {} slices listed",
            doc.num_slices,
            doc.slices.len()
        )));
    }
    let mut edges = BTreeMap::new();
    for (a, b, l) in doc.edges {
        if a == b || edges.insert(edge_key(a, b), l).is_some() {
            return Err(Error::InvalidMesh(format!("bad or duplicate edge ({a}, {b})")));
        }
    }
    SpacetimeMesh::from_parts(
        doc.nodes_per_slice,
        doc.slices,
        doc.triangles,
        edges,
        doc.coordinates,
        doc.circumference,
    )
}

/// One row of the field CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldRow {
    pub slice_index: usize,
    pub node_index: usize,
    pub t: f64,
    pub x: f64,
    pub value: f64,
    pub exact_value: f64,
    pub abs_error: f64,
}

/// Writes one row per node, slice by slice, against the travelling-wave reference.
pub fn export_csv(field: &DiscreteField, mesh: &SpacetimeMesh, path: &Path) -> Result<()> {
    check_field(field, mesh)?;
    let (coords, l) = mesh.reference_frame()?;
    let mut writer = csv::Writer::from_path(path)?;
    for (k, slice) in mesh.slices().iter().enumerate() {
        for (i, &node) in slice.iter().enumerate() {
            let [t, x] = coords[node];
            let value = field.get(node);
            let exact_value = exact_solution(x, t, l);
            writer.serialize(FieldRow {
                slice_index: k,
                node_index: i,
                t,
                x,
                value,
                exact_value,
                abs_error: (value - exact_value).abs(),
            })?;
        }
    }
    writer.flush()?;
    Ok(())
}

/// Reloads a field written by [`export_csv`] onto the same mesh.
pub fn read_csv(path: &Path, mesh: &SpacetimeMesh) -> Result<DiscreteField> {
    let mut reader = csv::Reader::from_path(path)?;
    let mut values = vec![None; mesh.num_nodes()];
    let mut rows = 0;
    for row in reader.deserialize() {
        let row: FieldRow = row?;
        rows += 1;
        let node = mesh
            .slices()
            .get(row.slice_index)
            .and_then(|s| s.get(row.node_index))
            .copied()
            .ok_or_else(|| {
                Error::Parse(format!(
                    "row for slice {} node {} is outside the mesh",
                    row.slice_index, row.node_index
                ))
            })?;
        values[node] = Some(row.value);
    }
    if rows != mesh.num_nodes() {
        return Err(Error::FieldSize {
            expected: mesh.num_nodes(),
            found: rows,
        });
    }
    let values = values
        .into_iter()
        .enumerate()
        .map(|(n, v)| v.ok_or_else(|| Error::Parse(format!("no value for node {n}"))))
        .collect::<Result<Vec<_>>>()?;
    DiscreteField::new(mesh, values)
}

fn check_field(field: &DiscreteField, mesh: &SpacetimeMesh) -> Result<()> {
    if field.len() != mesh.num_nodes() {
        return Err(Error::FieldSize {
            expected: mesh.num_nodes(),
            found: field.len(),
        });
    }
    Ok(())
}

/// Writes the mesh wrapped on a cylinder of circumference `L` around the time
/// axis: `(r cos θ, r sin θ, t)` with `θ = 2πx/L` and `r = L/2π + radial_scale·value`.
/// The field value is also stored as the `quality` vertex property.
pub fn export_ply(mesh: &SpacetimeMesh, field: Option<&DiscreteField>, path: &Path, radial_scale: f64) -> Result<()> {
    if let Some(f) = field {
        check_field(f, mesh)?;
    }
    let positions: Vec<[f64; 2]> = match mesh.reference_frame() {
        Ok((coords, _)) => coords.to_vec(),
        Err(_) => (0..mesh.num_nodes())
            .map(|n| {
                let (k, i) = mesh.location(n).unwrap_or((0, 0));
                [k as f64, i as f64]
            })
            .collect(),
    };
    let l = mesh.circumference().unwrap_or(mesh.nodes_per_slice() as f64);
    let radius = l / TAU;

    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "ply")?;
    writeln!(out, "format ascii 1.0")?;
    writeln!(out, "comment spacetime cylinder, signature (-,+), axis = time")?;
    writeln!(out, "element vertex {}", mesh.num_nodes())?;
    for p in ["x", "y", "z", "quality"] {
        writeln!(out, "property double {p}")?;
    }
    writeln!(out, "element face {}", mesh.triangles().len())?;
    writeln!(out, "property list uchar int vertex_indices")?;
    writeln!(out, "end_header")?;
    for (n, &[t, x]) in positions.iter().enumerate() {
        let value = field.map_or(0.0, |f| f.get(n));
        let r = radius + radial_scale * value;
        let theta = TAU * x / l;
        writeln!(out, "{} {} {} {}", r * theta.cos(), r * theta.sin(), t, value)?;
    }
    for [a, b, c] in mesh.triangles() {
        writeln!(out, "3 {a} {b} {c}")?;
    }
    out.flush()?;
    Ok(())
}

/// Contents of an ASCII PLY file: vertex properties by name and face index lists.
#[derive(Clone, Debug, PartialEq)]
pub struct PlyData {
    pub properties: Vec<String>,
    pub vertices: Vec<Vec<f64>>,
    pub faces: Vec<Vec<usize>>,
}

/// Reads ASCII PLY files with one vertex element of scalar properties and one
/// face element with a single list property.
pub fn read_ply(path: &Path) -> Result<PlyData> {
    let reader = BufReader::new(File::open(path)?);
    let mut lines = reader.lines();
    let mut next = || -> Result<String> {
        lines
            .next()
            .transpose()?
            .ok_or_else(|| Error::Parse("unexpected end of PLY file".into()))
    };
    if next()?.trim() != "ply" {
        return Err(Error::Parse("missing ply magic".into()));
    }
    let mut properties = Vec::new();
    let (mut num_vertices, mut num_faces) = (None, None);
    let mut current = "";
    loop {
        let line = next()?;
        let words: Vec<&str> = line.split_whitespace().collect();
        match words.as_slice() {
            ["format", "ascii", "1.0"] => {}
            ["format", ..] => return Err(Error::Parse(format!("unsupported format: {line}"))),
            ["comment", ..] | [] => {}
            ["element", "vertex", n] => {
                num_vertices = Some(parse_usize(n)?);
                current = "vertex";
            }
            ["element", "face", n] => {
                num_faces = Some(parse_usize(n)?);
                current = "face";
            }
            ["property", "list", ..] if current == "face" => {}
            ["property", _, name] if current == "vertex" => properties.push(name.to_string()),
            ["end_header"] => break,
            _ => return Err(Error::Parse(format!("unexpected header line: {line}"))),
        }
    }
    let (num_vertices, num_faces) = match (num_vertices, num_faces) {
        (Some(v), Some(f)) => (v, f),
        _ => return Err(Error::Parse("header lacks vertex or face element".into())),
    };
    let mut vertices = Vec::with_capacity(num_vertices);
    for _ in 0..num_vertices {
        let line = next()?;
        let row = line
            .split_whitespace()
            .map(|w| w.parse::<f64>().map_err(|e| Error::Parse(format!("{w}: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        if row.len() != properties.len() {
            return Err(Error::Parse(format!("vertex row has {} values: {line}", row.len())));
        }
        vertices.push(row);
    }
    let mut faces = Vec::with_capacity(num_faces);
    for _ in 0..num_faces {
        let line = next()?;
        let mut words = line.split_whitespace().map(parse_usize);
        let count = words.next().ok_or_else(|| Error::Parse("empty face row".into()))??;
        let face = words.collect::<Result<Vec<_>>>()?;
        if face.len() != count || face.iter().any(|&i| i >= num_vertices) {
            return Err(Error::Parse(format!("bad face row: {line}")));
        }
        faces.push(face);
    }
    Ok(PlyData {
        properties,
        vertices,
        faces,
    })
}

fn parse_usize(word: &str) -> Result<usize> {
    word.parse().map_err(|e| Error::Parse(format!("{word}: {e}")))
}
