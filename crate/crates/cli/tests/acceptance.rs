//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Run with `cargo test -p degrd-cli --test acceptance`.

use std::fs;
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::Instant;

use degrd_core::experiments::{
    conservation_study, exit_alternative_study, flat_heat_difference, flux_decay_study, kernel_residual_study,
    truncation_study, ConservationCase, FluxStudyParams, StudyReport,
};
use degrd_core::fields::norms::{bc_components, bc_norm, weighted_lp_norm};
use degrd_core::models::builtin_logistic;
use degrd_core::operators::assemble_as;
use degrd_core::solver::{lipschitz_probe, run, ExitStatus, ProbeNorm, SolverConfig};
use degrd_core::{DomainSpec, Field, Mesh, WeightProfile};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn report_outcome(report: StudyReport) -> Outcome {
    let failed: Vec<String> = report
        .measurements
        .iter()
        .filter(|m| !m.pass)
        .map(|m| format!("{} = {:e} ({:?})", m.name, m.value, m.bound))
        .collect();
    if failed.is_empty() {
        Ok(format!("{} measurements within bounds", report.measurements.len()))
    } else {
        Err(failed.join("; "))
    }
}

fn interval(s: f64, n_collar: usize, n_interior: usize, tau_max: f64) -> Mesh {
    let d = DomainSpec::interval(2.0, 0.5).unwrap();
    Mesh::build(&d, &WeightProfile::new(0.5, s).unwrap(), n_collar, n_interior, tau_max).unwrap()
}

fn disk(s: f64, n_theta: usize, n_collar: usize, n_interior: usize) -> Mesh {
    let d = DomainSpec::disk(1.0, 0.3, n_theta).unwrap();
    Mesh::build(&d, &WeightProfile::new(0.3, s).unwrap(), n_collar, n_interior, 1.5).unwrap()
}

fn random_field(rng: &mut ChaCha8Rng, mesh: &Mesh, lo: f64, hi: f64) -> Field {
    let values = (0..mesh.n_cells()).map(|_| rng.gen_range(lo..hi)).collect();
    Field::from_values(mesh, 1, values).unwrap()
}

fn kernel_residuals() -> Outcome {
    let (report, residuals) = kernel_residual_study(&[1.0, 1.5, 2.0], &[64, 128, 256]).map_err(|e| e.to_string())?;
    let worst = residuals
        .iter()
        .flat_map(|r| r.kernel.iter())
        .fold(0.0_f64, |m, v| m.max(*v));
    let pass = report.pass;
    let detail = report_outcome(report);
    match detail {
        Ok(d) if pass => Ok(format!("{d}, worst kernel residual {worst:.2e}")),
        Ok(d) | Err(d) => Err(d),
    }
}

fn matrix_structure() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut meshes = Vec::new();
    for s in [1.0, 1.5, 2.0, 3.0] {
        meshes.push(interval(s, 64, 32, 4.0));
        meshes.push(disk(s, 24, 12, 10));
    }
    let flat = DomainSpec::interval(2.0, 0.5).unwrap();
    meshes.push(Mesh::build(&flat, &WeightProfile::flat(0.5).unwrap(), 16, 32, 0.5).unwrap());
    let (mut row, mut sym, mut min_energy) = (0.0_f64, 0.0_f64, f64::INFINITY);
    let mut signs = true;
    let mut operators = 0;
    for mesh in &meshes {
        for constant in [true, false] {
            let a: Vec<f64> = (0..mesh.n_cells())
                .map(|_| if constant { 1.0 } else { rng.gen_range(0.05..20.0) })
                .collect();
            let op = assemble_as(&a, mesh).map_err(|e| e.to_string())?;
            let st = op.structure();
            row = row.max(st.row_sum);
            sym = sym.max(st.symmetry);
            signs &= st.sign_pattern;
            for _ in 0..100 {
                let u: Vec<f64> = (0..mesh.n_cells()).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let energy = op.energy(&u).map_err(|e| e.to_string())?;
                let scale: f64 = u.iter().zip(&op.volumes).map(|(x, v)| x * x * v).sum::<f64>() * st_scale(&op);
                min_energy = min_energy.min(energy / scale);
            }
            operators += 1;
        }
    }
    check(
        row < 1e-12 && sym < 1e-12 && signs && min_energy >= -1e-12,
        format!("{operators} operators: row sum {row:.1e}, symmetry {sym:.1e}, min relative energy {min_energy:.1e}"),
    )
}

/// Largest diagonal entry, the natural scale of the energy.
fn st_scale(op: &degrd_core::OperatorMatrix) -> f64 {
    (0..op.n()).map(|i| op.matrix.get(i, i)).fold(0.0, f64::max)
}

fn conservation() -> Outcome {
    let report = conservation_study(&ConservationCase::ALL, &[(1.0, 1e-3), (1.0, 1e-2)], 1e-10).map_err(|e| e.to_string())?;
    let max_steps = report
        .measurements
        .iter()
        .filter(|m| m.name.starts_with("steps_"))
        .fold(0.0_f64, |m, x| m.max(x.value));
    let drift = report
        .measurements
        .iter()
        .filter(|m| m.name.starts_with("drift_"))
        .fold(0.0_f64, |m, x| m.max(x.value));
    let pass = report.pass && max_steps >= 1000.0;
    let detail = report_outcome(report)?;
    check(pass, format!("{detail}, max drift {drift:.1e} over {max_steps} steps"))
}

fn classical_reduction() -> Outcome {
    let diff = flat_heat_difference(32, 0.5, 1e-3).map_err(|e| e.to_string())?;
    check(diff < 1e-8, format!("max difference {diff:.2e} on 128 cells"))
}

fn flux_decay() -> Outcome {
    let report = flux_decay_study(&[1.0, 2.0], &FluxStudyParams::default()).map_err(|e| e.to_string())?;
    let value = |n: &str| report.measurement(n).map(|m| m.value).unwrap_or(f64::NAN);
    let slopes = (value("run_slope_s1"), value("run_slope_s2"));
    let tangential = (value("tangential_ratio_min"), value("tangential_ratio_max"));
    let pass = report.pass && slopes.1 > slopes.0;
    let detail = report_outcome(report)?;
    check(
        pass,
        format!(
            "{detail}, slopes {:.2} / {:.2}, tangential ratios [{:.3}, {:.3}]",
            slopes.0, slopes.1, tangential.0, tangential.1
        ),
    )
}

fn equilibria() -> Outcome {
    let mesh = interval(1.0, 32, 32, 2.0);
    let logistic = builtin_logistic(1.0, 1.0, 1.0).map_err(|e| e.to_string())?;
    let cfg = SolverConfig {
        dt_max: 0.1,
        ..SolverConfig::fixed(20.0, 0.01)
    };
    let out = run(&Field::constant(&mesh, &[0.5]), &logistic, &mesh, &cfg, usize::MAX).map_err(|e| e.to_string())?;
    let distance = out.final_state.u.values().iter().fold(0.0_f64, |m, v| m.max((v - 1.0).abs()));

    let growth = builtin_logistic(1.0, 1.0, 0.0).map_err(|e| e.to_string())?;
    let c = 0.2;
    let out2 = run(&Field::constant(&mesh, &[c]), &growth, &mesh, &SolverConfig::fixed(1.0, 1e-3), usize::MAX)
        .map_err(|e| e.to_string())?;
    let exact = c * 1.0_f64.exp();
    let rel = out2.final_state.u.values().iter().fold(0.0_f64, |m, v| m.max((v - exact).abs() / exact));
    check(
        matches!(out.exit, ExitStatus::CompletedBudget { .. }) && distance < 1e-3 && rel < 0.01,
        format!("distance to capacity {distance:.1e} at t=20, growth relative error {rel:.2e} at t=1"),
    )
}

fn exit_alternatives() -> Outcome {
    let report = exit_alternative_study().map_err(|e| e.to_string())?;
    let err = report
        .measurement("decay_exit_time_relative_error")
        .map(|m| m.value)
        .unwrap_or(f64::NAN);
    let pass = report.pass;
    let detail = report_outcome(report)?;
    check(pass, format!("{detail}, decay exit time error {:.1}%", 100.0 * err))
}

fn lipschitz() -> Outcome {
    let mesh = interval(1.0, 32, 32, 2.0);
    let cfg = SolverConfig::fixed(1.0, 0.01);
    let logistic = builtin_logistic(1.0, 1.0, 1.0).map_err(|e| e.to_string())?;
    let u0 = Field::constant(&mesh, &[0.5]);
    let v0 = Field::from_fn(&mesh, 1, |c, m, _| 0.5 + 1e-3 * (-4.0 * (m.cells[c].position[0] - 1.0).powi(2)).exp());
    let logistic_ratio =
        lipschitz_probe(&u0, &v0, 1.0, &logistic, &mesh, &cfg, ProbeNorm::Sobolev).map_err(|e| e.to_string())?;

    let heat = builtin_logistic(1.0, 0.0, 0.0).map_err(|e| e.to_string())?;
    let a = Field::from_fn(&mesh, 1, |c, m, _| 0.5 + (-10.0 * (m.cells[c].position[0] - 1.0).powi(2)).exp());
    let b = Field::from_fn(&mesh, 1, |c, _, _| 0.5 + 0.1 * ((c * 7 % 11) as f64));
    let heat_ratio = lipschitz_probe(&a, &b, 1.0, &heat, &mesh, &cfg, ProbeNorm::Sobolev).map_err(|e| e.to_string())?;
    check(
        logistic_ratio <= 3.0 && heat_ratio <= 1.0 + 1e-8,
        format!("logistic ratio {logistic_ratio:.4}, pure diffusion ratio {heat_ratio:.12}"),
    )
}

fn norm_module() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let meshes = [interval(1.0, 32, 16, 2.0), interval(2.0, 32, 16, 3.0), disk(1.5, 16, 8, 6)];
    let mut exact = 0;
    let mut weighted_below = 0;
    for k in 0..100 {
        let mesh = &meshes[k % meshes.len()];
        let u = random_field(&mut rng, mesh, -10.0, 10.0);
        let sup = u.values().iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        if bc_norm(&u, mesh, 0).map_err(|e| e.to_string())? == sup {
            exact += 1;
        }
        let v = random_field(&mut rng, mesh, -10.0, 10.0);
        let c = bc_components(&v, mesh, &mesh.weight).map_err(|e| e.to_string())?;
        let unweighted = c.sup + c.collar_normal_unweighted + c.tangential_interior;
        if bc_norm(&v, mesh, 1).map_err(|e| e.to_string())? <= unweighted {
            weighted_below += 1;
        }
    }
    let mut masses = Vec::new();
    for tau_max in [1.0, 2.0, 4.0, 8.0] {
        let mesh = interval(1.0, (16.0 * tau_max) as usize, 16, tau_max);
        masses.push(weighted_lp_norm(&Field::constant(&mesh, &[1.0]), &mesh, 4.0).map_err(|e| e.to_string())?);
    }
    let increasing = masses.windows(2).all(|w| w[1] > w[0]);
    check(
        exact == 100 && weighted_below == 100 && increasing,
        format!(
            "bc0 exact {exact}/100, bc1s <= bc1 {weighted_below}/100, L_4 of 1: {}",
            masses.iter().map(|m| format!("{m:.4}")).collect::<Vec<_>>().join(" < ")
        ),
    )
}

fn truncation() -> Outcome {
    let report = truncation_study(&[2.0, 4.0, 8.0], 16.0, 2.0, 0.01, 1e-4).map_err(|e| e.to_string())?;
    let diffs: Vec<String> = report
        .measurements
        .iter()
        .filter(|m| m.name.starts_with("difference_"))
        .map(|m| format!("{:.1e}", m.value))
        .collect();
    let pass = report.pass;
    let detail = report_outcome(report)?;
    check(pass, format!("{detail}, differences {}", diffs.join(" > ")))
}

fn collect_files(dir: &Path, out: &mut Vec<(String, Vec<u8>)>, root: &Path) {
    let mut entries: Vec<_> = fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
    entries.sort();
    for path in entries {
        if path.is_dir() {
            collect_files(&path, out, root);
        } else {
            let rel = path.strip_prefix(root).unwrap().display().to_string();
            out.push((rel, fs::read(&path).unwrap()));
        }
    }
}

fn determinism() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let config = tmp.path().join("run.toml");
    let text = "[domain]\nkind = \"disk\"\nextent = 1.0\ncollar_depth = 0.3\n\
                [weight]\ns = 1.5\n[mesh]\nn_collar = 8\nn_interior = 8\ntau_max = 1.5\nboundary_resolution = 16\n\
                [model]\nbuiltin = \"two_population\"\na0 = 1.0\na1 = -1.0\nb0 = 0.5\nb1 = -1.0\n\
                [initial]\nkind = \"bump\"\nvalues = [0.5, 0.8]\n\
                [solver]\nt_final = 0.5\ndt_init = 0.01\ndt_max = 0.05\n[output]\nsnapshot_stride = 5\n";
    fs::write(&config, text).map_err(|e| e.to_string())?;
    let mut trees = Vec::new();
    for name in ["first", "second"] {
        let dir = tmp.path().join(name);
        let status = Command::new(env!("CARGO_BIN_EXE_degrd"))
            .args(["run", config.to_str().unwrap()])
            .env("DEGRD_OUTPUT_DIR", &dir)
            .output()
            .map_err(|e| e.to_string())?;
        if status.status.code() != Some(0) {
            return Err(format!("run exited with {:?}", status.status.code()));
        }
        let mut files = Vec::new();
        collect_files(&dir, &mut files, &dir);
        trees.push(files);
    }
    let bytes: usize = trees[0].iter().map(|(_, b)| b.len()).sum();
    check(
        trees[0] == trees[1] && !trees[0].is_empty(),
        format!("{} files, {bytes} bytes identical", trees[0].len()),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("operator kernel residuals", kernel_residuals),
        ("matrix structure", matrix_structure),
        ("conservation", conservation),
        ("classical reduction", classical_reduction),
        ("flux decay", flux_decay),
        ("equilibria and ODE oracles", equilibria),
        ("exit alternatives", exit_alternatives),
        ("semiflow Lipschitz probe", lipschitz),
        ("norm module", norm_module),
        ("truncation robustness", truncation),
        ("determinism", determinism),
    ];
    let mut failures = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = f();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name} ({secs:.1} s): {detail}", k + 1),
            Err(detail) => {
                failures += 1;
                println!("FAIL {:>2} {name} ({secs:.1} s): {detail}", k + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
