//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use whitney_core::algebra::MetricSignature;
use whitney_core::mesh::{build_cylinder_mesh, DiscreteField, MeshSpec, MeshStyle};
use whitney_core::simplex::{perm_sign, Simplex};
use whitney_core::verify::{self, SuiteConfig, SuiteReport};
use whitney_core::wave::{
    element_matrix_from, initial_slices, interior_nodes, simulate, ElementSource, SlicePolicy, WaveOperator,
};
use whitney_core::whitney::WhitneyForm;

struct Outcome {
    passed: bool,
    detail: String,
}

type Criterion = (&'static str, fn() -> Outcome);

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn suite(report: SuiteReport, elapsed: Duration, limit: Option<Duration>) -> Outcome {
    let in_time = limit.is_none_or(|l| elapsed < l);
    let budget = limit.map_or(String::new(), |l| format!(" (limit {:.0} s)", l.as_secs_f64()));
    outcome(
        report.passed && in_time,
        format!(
            "{}: max residual {:.3e} < {:.0e} over {} checks, {} skipped, {:.2} s{budget}",
            report.name,
            report.max_residual,
            report.tolerance,
            report.checks,
            report.skipped,
            elapsed.as_secs_f64()
        ),
    )
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let value = f();
    (value, start.elapsed())
}

fn regular_spec(n: usize, dt_over_dx: f64, periods: f64) -> MeshSpec {
    let mut spec = MeshSpec {
        nodes_per_slice: n,
        num_slices: 3,
        dx: 1.0,
        dt: dt_over_dx,
        style: MeshStyle::Regular,
    };
    spec.num_slices = spec.slices_for_periods(periods);
    spec
}

fn tri_representation() -> Outcome {
    let cfg = SuiteConfig::default();
    let (report, elapsed) = timed(|| verify::tri_representation(&cfg).unwrap());
    suite(report, elapsed, Some(Duration::from_secs(30)))
}

fn sign_values() -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;
    let mut check = |label: &str, got: f64, want: f64| {
        let good = (got - want).abs() < 1e-12 * want.abs().max(1.0);
        ok &= good;
        notes.push(format!("{label} = {got:+}"));
    };
    check("sgn(2,1,3,0)", perm_sign(&[2, 1, 3, 0]).unwrap(), 1.0);
    check("sgn(1,0,4,2,3)", perm_sign(&[1, 0, 4, 2, 3]).unwrap(), -1.0);

    let unit = |n: usize| -> Simplex {
        let mut vertices = vec![vec![0.0; n]];
        for i in 0..n {
            let mut v = vec![0.0; n];
            v[i] = 1.0;
            vertices.push(v);
        }
        Simplex::embedded(vertices, MetricSignature::lorentzian(n).unwrap()).unwrap()
    };
    let s3 = unit(3);
    let w = WhitneyForm::with_complement_order(&s3, &[2, 1, 3], &[0]).unwrap();
    check("3 ⋆vol · coeff[v2,v1,v3]", 3.0 * w.prefactor() * s3.star_vol(), 1.0);
    let s4 = unit(4);
    let w = WhitneyForm::with_complement_order(&s4, &[1, 0, 4], &[2, 3]).unwrap();
    check("12 ⋆vol · coeff[v1,v0,v4]", 12.0 * w.prefactor() * s4.star_vol(), -1.0);
    let w = WhitneyForm::with_complement_order(&s4, &[3, 1], &[4, 2, 0]).unwrap();
    check("24 ⋆vol · coeff[v3,v1]", 24.0 * w.prefactor() * s4.star_vol(), -1.0);

    // the explicit complement order must not change the form itself
    let x = [0.1, 0.2, 0.15, 0.3];
    let sorted = WhitneyForm::new(&s4, &[3, 1]).unwrap().eval_covector(&x).unwrap();
    let listed = WhitneyForm::with_complement_order(&s4, &[3, 1], &[4, 2, 0])
        .unwrap()
        .eval_covector(&x)
        .unwrap();
    let bary = WhitneyForm::new(&s4, &[3, 1]).unwrap().eval_barycentric(&x).unwrap();
    let drift = sorted.max_abs_diff(&listed).unwrap().max(sorted.max_abs_diff(&bary).unwrap());
    ok &= drift < 1e-12;
    notes.push(format!("order-independence {drift:.1e}"));
    outcome(ok, notes.join(", "))
}

fn normalization() -> Outcome {
    let cfg = SuiteConfig {
        trials: 50,
        ..SuiteConfig::default()
    };
    let (report, elapsed) = timed(|| verify::normalization(&cfg).unwrap());
    suite(report, elapsed, None)
}

fn closedness() -> Outcome {
    let cfg = SuiteConfig {
        trials: 50,
        points: 20,
        ..SuiteConfig::default()
    };
    let (report, elapsed) = timed(|| verify::closedness(&cfg).unwrap());
    suite(report, elapsed, None)
}

fn metric_independence() -> Outcome {
    let cfg = SuiteConfig::default();
    let (report, elapsed) = timed(|| verify::metric_independence(&cfg).unwrap());
    suite(report, elapsed, None)
}

fn lightcone_exactness() -> Outcome {
    let mut spec = MeshSpec {
        nodes_per_slice: 40,
        num_slices: 3,
        dx: 1.0,
        dt: 1.0,
        style: MeshStyle::Lightcone,
    };
    spec.num_slices = spec.slices_for_periods(2.0);
    let (run, elapsed) = timed(|| simulate(&spec, ElementSource::Abstract, SlicePolicy::MinimumNorm).unwrap());
    let err = run.diagnostics.max_abs_error;
    outcome(
        err < 1e-10 && elapsed < Duration::from_secs(5),
        format!(
            "lightcone N=40, {} slices: max nodal error {err:.3e} < 1e-10, {:.2} s (limit 5 s)",
            spec.num_slices,
            elapsed.as_secs_f64()
        ),
    )
}

fn convergence() -> Outcome {
    let coarse = simulate(&regular_spec(30, 0.8, 2.0), ElementSource::Abstract, SlicePolicy::MinimumNorm).unwrap();
    let fine = simulate(&regular_spec(80, 0.8, 2.0), ElementSource::Abstract, SlicePolicy::MinimumNorm).unwrap();
    let (e30, e80) = (coarse.diagnostics.final_l2_error(), fine.diagnostics.final_l2_error());
    outcome(
        e80 < 0.5 * e30,
        format!("final L2 error N=30 {e30:.3e}, N=80 {e80:.3e}, ratio {:.3} < 0.5", e80 / e30),
    )
}

fn dispersion_without_dissipation() -> Outcome {
    let run = simulate(&regular_spec(30, 0.8, 2.0), ElementSource::Abstract, SlicePolicy::MinimumNorm).unwrap();
    let drift = run.diagnostics.amplitude_drift();
    let phase = run.diagnostics.phase_error();
    outcome(
        drift < 0.02 && phase >= 5.0 * drift,
        format!(
            "mode-1 amplitude drift {drift:.3e} < 2e-2, phase error {phase:.3e} rad = {:.1}x drift (need >= 5x)",
            phase / drift
        ),
    )
}

fn coordinate_free_equivalence() -> Outcome {
    let spec = regular_spec(30, 0.8, 1.0);
    let mesh = build_cylinder_mesh(&spec).unwrap();
    let mut element_gap: f64 = 0.0;
    for t in 0..mesh.triangles().len() {
        let a = element_matrix_from(&mesh, t, ElementSource::Abstract).unwrap().s;
        let e = element_matrix_from(&mesh, t, ElementSource::Embedded).unwrap().s;
        element_gap = element_gap.max((a - e).abs().max());
    }
    let (first, second) = initial_slices(&mesh).unwrap();
    let solve = |source| {
        WaveOperator::with_source(&mesh, source)
            .unwrap()
            .march(&first, &second, SlicePolicy::MinimumNorm)
            .unwrap()
    };
    let field_gap = solve(ElementSource::Abstract).max_abs_diff(&solve(ElementSource::Embedded));
    outcome(
        element_gap < 1e-9 && field_gap < 1e-9,
        format!(
            "{} elements: max |S_abstract - S_embedded| {element_gap:.3e}, solution gap {field_gap:.3e} (< 1e-9)",
            mesh.triangles().len()
        ),
    )
}

fn variational_gradient() -> Outcome {
    let mut spec = regular_spec(30, 0.8, 1.0);
    spec.num_slices = 20;
    let mesh = build_cylinder_mesh(&spec).unwrap();
    let op = WaveOperator::new(&mesh).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let field =
        DiscreteField::new(&mesh, (0..mesh.num_nodes()).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap();
    let interior: Vec<usize> = interior_nodes(&mesh).collect();
    let h = 1e-6;
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let node = interior[rng.random_range(0..interior.len())];
        let mut plus = field.clone();
        plus.set(node, field.get(node) + h);
        let mut minus = field.clone();
        minus.set(node, field.get(node) - h);
        let fd = (op.action(&plus).unwrap() - op.action(&minus).unwrap()) / (2.0 * h);
        let r = op.residual(&field, node).unwrap();
        worst = worst.max((fd - r).abs() / r.abs());
    }
    outcome(
        worst < 1e-6,
        format!("100 interior nodes: max relative gap {worst:.3e} < 1e-6"),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("tri-representation equivalence", tri_representation),
        ("sign values", sign_values),
        ("normalization", normalization),
        ("closedness and coclosedness", closedness),
        ("metric independence", metric_independence),
        ("light-cone exactness", lightcone_exactness),
        ("regular-mesh convergence", convergence),
        ("dispersion without dissipation", dispersion_without_dissipation),
        ("coordinate-free equivalence", coordinate_free_equivalence),
        ("variational gradient", variational_gradient),
    ];
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let result = std::panic::catch_unwind(run).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        if !result.passed {
            failures += 1;
        }
        let tag = if result.passed { "PASS" } else { "FAIL" };
        println!("{tag} criterion {:>2} {name}: {}", i + 1, result.detail);
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
