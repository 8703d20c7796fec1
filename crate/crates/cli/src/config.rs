//! Run configuration: optional JSON file merged under command-line flags.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use whitney_core::algebra::MAX_DIM;
use whitney_core::mesh::{MeshSpec, MeshStyle};
use whitney_core::verify::{SignatureKind, SuiteConfig};

use crate::CliError;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub command: Option<String>,
    pub dims: Option<Vec<usize>>,
    pub signatures: Option<Vec<SignatureKind>>,
    pub seed: Option<u64>,
    pub trials: Option<usize>,
    pub points: Option<usize>,
    pub mesh: Option<FileMesh>,
    pub periods: Option<f64>,
    pub out: Option<PathBuf>,
    pub radial_scale: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileMesh {
    pub nodes_per_slice: Option<usize>,
    pub num_slices: Option<usize>,
    pub dx: Option<f64>,
    pub dt: Option<f64>,
    pub style: Option<MeshStyle>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>, command: &str) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let cfg: FileConfig =
            serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        if let Some(c) = &cfg.command {
            if c != command {
                return Err(CliError::Config(format!(
                    "config file is for `{c}`, not `{command}`"
                )));
            }
        }
        Ok(cfg)
    }
}

pub fn suite_config(
    file: &FileConfig,
    dims: Option<Vec<usize>>,
    signatures: Option<Vec<SignatureKind>>,
    seed: Option<u64>,
    trials: Option<usize>,
    points: Option<usize>,
) -> Result<SuiteConfig, CliError> {
    let defaults = SuiteConfig::default();
    let cfg = SuiteConfig {
        dims: dims.or_else(|| file.dims.clone()).unwrap_or(defaults.dims),
        signatures: signatures
            .or_else(|| file.signatures.clone())
            .unwrap_or(defaults.signatures),
        seed: seed.or(file.seed).unwrap_or(defaults.seed),
        trials: trials.or(file.trials).unwrap_or(defaults.trials),
        points: points.or(file.points).unwrap_or(defaults.points),
    };
    if cfg.trials == 0 {
        return Err(CliError::Config("trials must be at least 1".into()));
    }
    if cfg.points == 0 {
        return Err(CliError::Config("points must be at least 1".into()));
    }
    if cfg.dims.is_empty() || cfg.signatures.is_empty() {
        return Err(CliError::Config("dims and signatures must be non-empty".into()));
    }
    if let Some(&d) = cfg.dims.iter().find(|&&d| !(1..=MAX_DIM).contains(&d)) {
        return Err(CliError::Config(format!("dimension {d} outside 1..={MAX_DIM}")));
    }
    Ok(cfg)
}

pub struct MeshFlags {
    pub style: Option<MeshStyle>,
    pub nodes: Option<usize>,
    pub slices: Option<usize>,
    pub dx: Option<f64>,
    pub dt: Option<f64>,
    pub periods: Option<f64>,
}

/// Resolves the mesh: `dt` defaults to `0.8 dx` (regular) or `dx` (lightcone)
/// and the slice count to whatever reaches `periods` temporal periods.
pub fn mesh_spec(file: &FileConfig, flags: MeshFlags) -> Result<MeshSpec, CliError> {
    let fm = file.mesh.as_ref();
    let style = flags
        .style
        .or(fm.and_then(|m| m.style))
        .unwrap_or(MeshStyle::Regular);
    let dx = flags.dx.or(fm.and_then(|m| m.dx)).unwrap_or(1.0);
    let dt = flags.dt.or(fm.and_then(|m| m.dt)).unwrap_or(match style {
        MeshStyle::Regular => 0.8 * dx,
        MeshStyle::Lightcone => dx,
    });
    let mut spec = MeshSpec {
        nodes_per_slice: flags.nodes.or(fm.and_then(|m| m.nodes_per_slice)).unwrap_or(30),
        num_slices: 3,
        dx,
        dt,
        style,
    };
    let periods = flags.periods.or(file.periods);
    spec.num_slices = match (flags.slices, periods) {
        (Some(m), _) => m,
        (None, Some(p)) => slices_for(&spec, p)?,
        (None, None) => match fm.and_then(|m| m.num_slices) {
            Some(m) => m,
            None => slices_for(&spec, 2.0)?,
        },
    };
    spec.validate().map_err(|e| CliError::Config(e.to_string()))?;
    Ok(spec)
}

fn slices_for(spec: &MeshSpec, periods: f64) -> Result<usize, CliError> {
    if !(periods > 0.0 && periods.is_finite()) {
        return Err(CliError::Config(format!("periods = {periods} must be positive")));
    }
    if !(spec.dt > 0.0 && spec.dx > 0.0) {
        return Err(CliError::Config("dx and dt must be positive".into()));
    }
    Ok(spec.slices_for_periods(periods))
}
