//! `whitney`: property suites, wave runs and PLY export.

mod config;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use whitney_core::mesh::{
    export_csv, export_ply, read_csv, read_mesh_json, write_mesh_json, DiscreteField, MeshStyle,
};
use whitney_core::verify::{self, SignatureKind};
use whitney_core::wave::{simulate, write_diagnostics_csv, ElementSource, SlicePolicy};

use config::{FileConfig, MeshFlags};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("solver error: {0}")]
    Solver(whitney_core::Error),
    #[error("{0}")]
    Core(#[from] whitney_core::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Verification(_) => 1,
            CliError::Solver(_) => 3,
            _ => 2,
        }
    }
}

#[derive(Parser)]
#[command(name = "whitney", version, about = "Whitney form property suites and a spacetime wave integrator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the randomized property suites.
    Verify(VerifyArgs),
    /// March a travelling wave and write field, diagnostics and mesh files.
    Wave(WaveArgs),
    /// Write a PLY file from a mesh JSON and a field CSV.
    ExportPly(ExportArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum SignatureArg {
    Lorentz,
    Euclid,
    Both,
}

impl SignatureArg {
    fn kinds(self) -> Vec<SignatureKind> {
        match self {
            SignatureArg::Lorentz => vec![SignatureKind::Lorentzian],
            SignatureArg::Euclid => vec![SignatureKind::Euclidean],
            SignatureArg::Both => vec![SignatureKind::Euclidean, SignatureKind::Lorentzian],
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum StyleArg {
    Regular,
    Lightcone,
}

impl From<StyleArg> for MeshStyle {
    fn from(s: StyleArg) -> Self {
        match s {
            StyleArg::Regular => MeshStyle::Regular,
            StyleArg::Lightcone => MeshStyle::Lightcone,
        }
    }
}

#[derive(Args)]
struct VerifyArgs {
    /// Simplex dimensions, comma separated.
    #[arg(long, value_delimiter = ',')]
    dims: Option<Vec<usize>>,
    #[arg(long, value_enum)]
    signature: Option<SignatureArg>,
    #[arg(long)]
    seed: Option<u64>,
    /// Random simplices per dimension and signature.
    #[arg(long)]
    trials: Option<usize>,
    /// Random points per simplex.
    #[arg(long)]
    points: Option<usize>,
    /// JSON config file; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct WaveArgs {
    #[arg(long, value_enum)]
    style: Option<StyleArg>,
    /// Nodes per spacelike slice.
    #[arg(long)]
    nodes: Option<usize>,
    /// Number of slices, including the two initial ones.
    #[arg(long, conflicts_with = "periods")]
    slices: Option<usize>,
    #[arg(long)]
    dx: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    /// Temporal periods of the travelling wave to cover (default 2).
    #[arg(long)]
    periods: Option<f64>,
    /// Output directory (default ./out/).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Radial displacement per unit field value in the PLY output.
    #[arg(long)]
    radial_scale: Option<f64>,
    /// Treat rank-deficient slice systems as errors.
    #[arg(long)]
    strict: bool,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct ExportArgs {
    /// Mesh JSON.
    #[arg(long)]
    mesh: PathBuf,
    /// Field CSV as written by `wave`.
    #[arg(long)]
    field: PathBuf,
    /// Output `.ply` file or directory (default ./out/).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    radial_scale: Option<f64>,
}

fn init_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("WHITNEY_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Config(format!("WHITNEY_THREADS = {raw:?} is not a positive integer")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Config(e.to_string()))
}

fn cmd_verify(args: VerifyArgs) -> Result<(), CliError> {
    let file = FileConfig::load(args.config.as_deref(), "verify")?;
    let cfg = config::suite_config(
        &file,
        args.dims,
        args.signature.map(SignatureArg::kinds),
        args.seed,
        args.trials,
        args.points,
    )?;
    println!(
        "dims {:?}, signatures {:?}, {} trials x {} points, seed {}",
        cfg.dims, cfg.signatures, cfg.trials, cfg.points, cfg.seed
    );
    let reports = verify::run_all(&cfg)?;
    let mut failed = Vec::new();
    for r in &reports {
        let tag = if r.passed { "pass" } else { "FAIL" };
        println!(
            "{tag} {:<22} max residual {:.3e} (tolerance {:.0e}, {} checks, {} skipped)",
            r.name, r.max_residual, r.tolerance, r.checks, r.skipped
        );
        if !r.passed {
            failed.push(r.name.clone());
        }
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Verification(failed.join(", ")))
    }
}

fn cmd_wave(args: WaveArgs) -> Result<(), CliError> {
    let file = FileConfig::load(args.config.as_deref(), "wave")?;
    let spec = config::mesh_spec(
        &file,
        MeshFlags {
            style: args.style.map(Into::into),
            nodes: args.nodes,
            slices: args.slices,
            dx: args.dx,
            dt: args.dt,
            periods: args.periods,
        },
    )?;
    let out = args.out.or(file.out).unwrap_or_else(|| PathBuf::from("out"));
    let radial_scale = args.radial_scale.or(file.radial_scale).unwrap_or(1.0);
    let policy = if args.strict {
        SlicePolicy::Strict
    } else {
        SlicePolicy::MinimumNorm
    };
    println!(
        "{} mesh: {} nodes/slice, {} slices, dx = {}, dt = {}",
        spec.style, spec.nodes_per_slice, spec.num_slices, spec.dx, spec.dt
    );
    let run = simulate(&spec, ElementSource::Abstract, policy).map_err(|e| match e {
        e @ whitney_core::Error::Solver { .. } => CliError::Solver(e),
        e @ whitney_core::Error::InvalidSpec(_) => CliError::Config(e.to_string()),
        e => CliError::Core(e),
    })?;
    let d = &run.diagnostics;
    println!("final-slice L2 error: {:.6e}", d.final_l2_error());
    println!("max nodal error:      {:.6e}", d.max_abs_error);
    println!("mode-1 amplitude drift: {:.6e}", d.amplitude_drift());
    println!("mode-1 phase error:     {:.6e} rad", d.phase_error());

    fs::create_dir_all(&out)?;
    let paths = [
        out.join("field.csv"),
        out.join("diagnostics.csv"),
        out.join("mesh.json"),
        out.join("field.ply"),
    ];
    export_csv(&run.field, &run.mesh, &paths[0])?;
    write_diagnostics_csv(d, &paths[1])?;
    write_mesh_json(&run.mesh, &paths[2])?;
    export_ply(&run.mesh, Some(&run.field), &paths[3], radial_scale)?;
    for p in &paths {
        println!("wrote {}", p.display());
    }
    Ok(())
}

fn cmd_export_ply(args: ExportArgs) -> Result<(), CliError> {
    let mesh = read_mesh_json(&args.mesh)?;
    let field: DiscreteField = read_csv(&args.field, &mesh)?;
    let out = args.out.unwrap_or_else(|| PathBuf::from("out"));
    let path = if out.extension().is_some_and(|e| e == "ply") {
        if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
            fs::create_dir_all(parent)?;
        }
        out
    } else {
        fs::create_dir_all(&out)?;
        out.join("field.ply")
    };
    export_ply(&mesh, Some(&field), Path::new(&path), args.radial_scale.unwrap_or(1.0))?;
    println!("wrote {} ({} vertices)", path.display(), mesh.num_nodes());
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = init_threads().and_then(|()| match cli.command {
        Command::Verify(a) => cmd_verify(a),
        Command::Wave(a) => cmd_wave(a),
        Command::ExportPly(a) => cmd_export_ply(a),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
