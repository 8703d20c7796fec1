use std::f64::consts::{PI, TAU};
use std::path::Path;

use serde::Serialize;

use crate::error::Result;
use crate::mesh::{DiscreteField, SpacetimeMesh};

/// Right-moving unit-speed wave `sin(2π(x - t)/L)` on a circle of length `L`.
pub fn exact_solution(x: f64, t: f64, circumference: f64) -> f64 {
    (TAU * (x - t) / circumference).sin()
}

/// `(2/N) Σ_j f_j e^{-2πi x_j / L}` as `(re, im)`.
pub fn mode_one(values: &[f64], xs: &[f64], circumference: f64) -> (f64, f64) {
    let scale = 2.0 / values.len() as f64;
    let (re, im) = values.iter().zip(xs).fold((0.0, 0.0), |(re, im), (&f, &x)| {
        let theta = TAU * x / circumference;
        (re + f * theta.cos(), im - f * theta.sin())
    });
    (scale * re, scale * im)
}

/// Per-slice error and spatial mode-1 statistics.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Diagnostics {
    pub t: Vec<f64>,
    /// Root mean square of the nodal error on each slice.
    pub l2_error: Vec<f64>,
    pub mode1_amp: Vec<f64>,
    /// Unwrapped argument of the mode-1 coefficient.
    pub mode1_phase: Vec<f64>,
    pub exact_phase: Vec<f64>,
    /// Max nodal error over the whole field.
    pub max_abs_error: f64,
}

impl Diagnostics {
    pub fn final_l2_error(&self) -> f64 {
        *self.l2_error.last().expect("at least one slice")
    }

    /// `max_k |A_k / A_0 - 1|`.
    pub fn amplitude_drift(&self) -> f64 {
        let a0 = self.mode1_amp[0];
        self.mode1_amp.iter().fold(0.0, |m, a| m.max((a / a0 - 1.0).abs()))
    }

    /// `max_k |φ_k - φ_k^exact|` in radians.
    pub fn phase_error(&self) -> f64 {
        self.mode1_phase
            .iter()
            .zip(&self.exact_phase)
            .fold(0.0, |m, (p, e)| m.max((p - e).abs()))
    }
}

fn unwrap(phases: impl IntoIterator<Item = f64>) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::new();
    for p in phases {
        let next = match out.last() {
            Some(&prev) => prev + wrap(p - prev),
            None => p,
        };
        out.push(next);
    }
    out
}

fn wrap(a: f64) -> f64 {
    let r = (a + PI).rem_euclid(TAU) - PI;
    if r == -PI {
        PI
    } else {
        r
    }
}

pub fn diagnostics(f: &DiscreteField, mesh: &SpacetimeMesh) -> Result<Diagnostics> {
    let (coords, l) = mesh.reference_frame()?;
    let mut t = Vec::new();
    let mut l2_error = Vec::new();
    let mut amp = Vec::new();
    let mut phase = Vec::new();
    let mut exact_phase = Vec::new();
    let mut max_abs_error: f64 = 0.0;
    for slice in mesh.slices() {
        let xs: Vec<f64> = slice.iter().map(|&n| coords[n][1]).collect();
        let values: Vec<f64> = slice.iter().map(|&n| f.get(n)).collect();
        let exact: Vec<f64> = slice
            .iter()
            .map(|&n| exact_solution(coords[n][1], coords[n][0], l))
            .collect();
        let sq: f64 = values.iter().zip(&exact).map(|(v, e)| (v - e).powi(2)).sum();
        max_abs_error = values
            .iter()
            .zip(&exact)
            .fold(max_abs_error, |m, (v, e)| m.max((v - e).abs()));
        t.push(coords[slice[0]][0]);
        l2_error.push((sq / slice.len() as f64).sqrt());
        let (re, im) = mode_one(&values, &xs, l);
        amp.push(re.hypot(im));
        phase.push(im.atan2(re));
        let (re, im) = mode_one(&exact, &xs, l);
        exact_phase.push(im.atan2(re));
    }
    Ok(Diagnostics {
        t,
        l2_error,
        mode1_amp: amp,
        mode1_phase: unwrap(phase),
        exact_phase: unwrap(exact_phase),
        max_abs_error,
    })
}

#[derive(Serialize)]
struct DiagnosticsRow {
    slice: usize,
    t: f64,
    l2_error: f64,
    mode1_amp: f64,
    mode1_phase: f64,
}

pub fn write_diagnostics_csv(d: &Diagnostics, path: &Path) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    for (slice, t) in d.t.iter().enumerate() {
        writer.serialize(DiagnosticsRow {
            slice,
            t: *t,
            l2_error: d.l2_error[slice],
            mode1_amp: d.mode1_amp[slice],
            mode1_phase: d.mode1_phase[slice],
        })?;
    }
    writer.flush()?;
    Ok(())
}
