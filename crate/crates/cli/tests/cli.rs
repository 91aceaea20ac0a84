use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_degrd");

fn degrd(args: &[&str], out: &Path) -> Output {
    Command::new(BIN)
        .args(args)
        .env("DEGRD_OUTPUT_DIR", out)
        .output()
        .expect("spawn degrd")
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

const LOGISTIC: &str = r#"
[model]
builtin = "logistic"
[initial]
kind = "bump"
values = [0.3]
amplitude = 0.4
[solver]
t_final = 0.5
dt_init = 0.01
[output]
snapshot_stride = 7
"#;

fn manifest(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

#[test]
fn logistic_demo_completes_with_manifest_and_snapshots() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "run.toml", LOGISTIC);
    let out = tmp.path().join("out");
    let o = degrd(&["run", &cfg], &out);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let m = manifest(&out);
    assert_eq!(m["exit"]["status"], "completed_budget");
    assert_eq!(m["exit_code"], 0);
    assert_eq!(m["detector_order"][0], "budget");
    let steps = m["steps"].as_array().unwrap().len() - 1;
    assert_eq!(steps, 50);
    let snaps = fs::read_dir(out.join("snapshots")).unwrap().count();
    assert_eq!(snaps, steps / 7 + 1);
    assert_eq!(m["snapshots"].as_array().unwrap().len(), snaps);
    assert_eq!(m["snapshots"][1]["step"], 7);
}

#[test]
fn snapshot_rows_follow_the_schema() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "run.toml", LOGISTIC);
    let out = tmp.path().join("out");
    degrd(&["run", &cfg], &out);
    let text = fs::read_to_string(out.join("snapshots/snapshot_00000.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "cell,region,q,tau,y,x1,u1,flux_u1");
    for line in lines {
        let cols: Vec<&str> = line.split(',').collect();
        assert_eq!(cols.len(), 8);
        match cols[1] {
            "S" => assert!(cols[4].parse::<f64>().unwrap() > 0.0 && !cols[7].is_empty()),
            "U" => assert!(cols[2].is_empty() && cols[4].is_empty() && cols[7].is_empty()),
            other => panic!("region {other}"),
        }
    }
}

#[test]
fn initial_snapshot_round_trips_as_initial_data() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "run.toml", LOGISTIC);
    let first = tmp.path().join("first");
    degrd(&["run", &cfg], &first);
    let snap0 = first.join("snapshots/snapshot_00000.csv");
    let from_csv = format!(
        "[initial]\nkind = \"csv\"\npath = {:?}\n[solver]\nt_final = 0.05\n",
        snap0.to_str().unwrap()
    );
    let cfg2 = write_config(tmp.path(), "csv.toml", &from_csv);
    let second = tmp.path().join("second");
    let o = degrd(&["run", &cfg2], &second);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(
        fs::read(&snap0).unwrap(),
        fs::read(second.join("snapshots/snapshot_00000.csv")).unwrap()
    );
}

#[test]
fn exit_codes_distinguish_outcomes() {
    let tmp = tempfile::tempdir().unwrap();
    let decay = "[model]\nlambda = -0.5\na = 0.0\n[initial]\nvalues = [0.1]\n[solver]\nt_final = 50.0\ndelta_x = 1e-3\n[output]\nformats = [\"json\"]\n";
    let growth = "[model]\nbuiltin = \"porous_media\"\ngrowth = 5.0\n[initial]\nvalues = [1.0]\n[solver]\nt_final = 10.0\nnorm_max = 1e4\n[output]\nformats = [\"json\"]\n";
    let collapse = "[model]\nbuiltin = \"logistic\"\nx_upper = [0.6]\n[initial]\nvalues = [0.5]\n[solver]\nt_final = 5.0\ndt_init = 0.5\ndt_min = 0.1\ndt_max = 0.5\n[output]\nformats = [\"json\"]\n";
    for (name, text, code, status) in [
        ("decay", decay, 10, "state_boundary_approach"),
        ("growth", growth, 11, "norm_divergence"),
        ("collapse", collapse, 12, "step_collapse"),
    ] {
        let cfg = write_config(tmp.path(), &format!("{name}.toml"), text);
        let out = tmp.path().join(name);
        let o = degrd(&["run", &cfg], &out);
        assert_eq!(o.status.code(), Some(code), "{name}: {}", String::from_utf8_lossy(&o.stderr));
        assert_eq!(manifest(&out)["exit"]["status"], status);
        assert!(!out.join("snapshots").exists());
    }
}

#[test]
fn failures_land_in_the_manifest_with_a_class() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "bad.toml", "[initial]\nvalues = [-0.5]\n");
    let out = tmp.path().join("out");
    let o = degrd(&["run", &cfg], &out);
    assert_eq!(o.status.code(), Some(5));
    let m = manifest(&out);
    assert_eq!(m["error"]["class"], "inadmissible_initial_data");
    assert_eq!(m["exit_code"], 5);

    let cfg = write_config(tmp.path(), "missing.toml", "[initial]\nkind = \"csv\"\npath = \"/nonexistent/u.csv\"\n");
    let o = degrd(&["run", &cfg], &out);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(manifest(&out)["error"]["class"], "io");
}

#[test]
fn config_errors_exit_with_code_two_and_list_every_problem() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "bad.toml", "[weight]\ns = 0.5\n[solver]\np = 3.0\n");
    let o = degrd(&["validate", &cfg], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("1 <= s") && err.contains("p > m + 2"), "{err}");

    let cfg = write_config(tmp.path(), "typo.toml", "[solver]\ntfinal = 1.0\n");
    let o = degrd(&["run", &cfg], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("tfinal"));

    let o = degrd(&["run", "/nonexistent/config.toml"], tmp.path());
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn validate_prints_the_filled_config() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "run.toml", LOGISTIC);
    let o = degrd(&["validate", &cfg], tmp.path());
    assert_eq!(o.status.code(), Some(0));
    let echoed = String::from_utf8(o.stdout).unwrap();
    assert!(echoed.contains("collar_depth = "));
    let reparsed = degrd_cli::parse_config(&echoed).unwrap();
    assert_eq!(reparsed, degrd_cli::parse_config(LOGISTIC).unwrap());
}

#[test]
fn studies_write_reports_and_report_verdicts() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "study.toml", "[study]\nn_collar = [16]\nt_final = 0.2\n");
    let out = tmp.path().join("out");
    let o = degrd(&["study", "classical_reduction", &cfg], &out);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    assert!(out.join("classical_reduction/report.json").exists());
    assert!(String::from_utf8_lossy(&o.stdout).starts_with("PASS max_difference"));

    let strict = write_config(tmp.path(), "strict.toml", "[study]\nt_final = 0.2\ndt = 0.1\ntolerance = 1e-30\n");
    let o = degrd(&["study", "conservation", &strict], &out);
    assert_eq!(o.status.code(), Some(4));

    let o = degrd(&["study", "no_such_study", &cfg], &out);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn norms_verb_reads_snapshots() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "run.toml", LOGISTIC);
    let out = tmp.path().join("out");
    degrd(&["run", &cfg], &out);
    let o = degrd(&["norms", out.join("snapshots/snapshot_00000.csv").to_str().unwrap(), &cfg], &out);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let bc0 = v["combined"]["bc0"].as_f64().unwrap();
    assert!((bc0 - 0.7).abs() < 1e-3, "{bc0}");
}

#[test]
fn identical_runs_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "run.toml", LOGISTIC);
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    degrd(&["run", &cfg], &a);
    degrd(&["run", &cfg], &b);
    assert_eq!(fs::read(a.join("manifest.json")).unwrap(), fs::read(b.join("manifest.json")).unwrap());
    for entry in fs::read_dir(a.join("snapshots")).unwrap() {
        let name = entry.unwrap().file_name();
        assert_eq!(
            fs::read(a.join("snapshots").join(&name)).unwrap(),
            fs::read(b.join("snapshots").join(&name)).unwrap()
        );
    }
}
