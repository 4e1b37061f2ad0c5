use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;
use weighted_moser::fixtures::{bump, weights, Fixture};
use weighted_moser::io::{read_grid, read_radial_profile};

fn repo_fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn wmoser(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wmoser"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn json(path: PathBuf) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn is_empty(dir: &Path) -> bool {
    fs::read_dir(dir).unwrap().next().is_none()
}

const X1: [&str; 6] = ["-d", "2", "--active", "1", "-A", "1"];
const X1X2: [&str; 6] = ["-d", "2", "--active", "1,2", "-A", "1,1"];

#[test]
fn constants_match_closed_forms() {
    // C_D = int over the half disc of x_1 = 2/3, int over the quarter disc of x_1 x_2 = 1/8,
    // and P_w = D C_D with D = 3 and 4
    for (flags, c_d, p_w) in [(X1, 2.0 / 3.0, 2.0), (X1X2, 0.125, 0.5)] {
        let dir = TempDir::new().unwrap();
        let mut args = vec!["constants", "--budget", "100000"];
        args.extend(flags);
        let o = wmoser(dir.path(), &args);
        assert!(o.status.success(), "{}", stderr(&o));
        let v = json(dir.path().join("constants_run.json"));
        assert!((v["C_D"].as_f64().unwrap() - c_d).abs() < 1e-6);
        assert!((v["P_w"].as_f64().unwrap() - p_w).abs() < 1e-4 * p_w);
    }
}

#[test]
fn weight_file_and_flags_agree() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    let w = repo_fixture("x1x2.json");
    let mut args = vec!["constants", "--budget", "20000"];
    args.extend(X1X2);
    assert!(wmoser(a.path(), &args).status.success());
    let o = wmoser(b.path(), &["constants", "--budget", "20000", "--weight", w.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(
        fs::read(a.path().join("constants_run.json")).unwrap(),
        fs::read(b.path().join("constants_run.json")).unwrap()
    );
}

#[test]
fn negative_exponent_exits_2() {
    let dir = TempDir::new().unwrap();
    let o = wmoser(dir.path(), &["constants", "-d", "2", "--active", "1", "-A", "-1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("exponents must be positive"));
    assert!(is_empty(dir.path()));
}

#[test]
fn missing_output_directory_exits_2() {
    let dir = TempDir::new().unwrap();
    let o = wmoser(&dir.path().join("nope"), &["optimize", "-N", "64"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn shipped_fixtures_match_generator() {
    for (name, spec) in weights() {
        for fx in Fixture::ALL {
            let f = read_grid(&repo_fixture(&format!("fixture_{name}-{}.json", fx.name()))).unwrap();
            let g = fx.sample(&spec, 64).unwrap();
            assert_eq!(f.shape(), g.shape());
            let gap = f.values().iter().zip(g.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(gap < 1e-12, "{name}/{}: {gap}", fx.name());
        }
    }
}

#[test]
fn radial_bump_is_a_fixed_point() {
    let dir = TempDir::new().unwrap();
    let input = repo_fixture("fixture_x1-radial-bump.json");
    let mut args = vec!["rearrange", "--input", input.to_str().unwrap()];
    args.extend(X1);
    let o = wmoser(dir.path(), &args);
    assert!(o.status.success(), "{}", stderr(&o));
    let u = read_radial_profile(&dir.path().join("rearrange_run.csv")).unwrap();
    for (r, v) in u.rows() {
        let exact = bump(&[r, 0.0], &[0.0, 0.0], 1.0);
        assert!((v - exact).abs() < 1e-2, "r = {r}: {v} vs {exact}");
    }
    assert!((u.support_radius() - 1.0).abs() < 5e-3);
}

#[test]
fn two_bump_report_shows_strict_polya_szego() {
    let dir = TempDir::new().unwrap();
    let input = repo_fixture("fixture_x1x2-two-bump.json");
    let w = repo_fixture("x1x2.json");
    let o = wmoser(
        dir.path(),
        &["rearrange", "--input", input.to_str().unwrap(), "--weight", w.to_str().unwrap(), "--label", "tb"],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let v = json(dir.path().join("rearrange_tb.json"));
    let reports = v["polya_szego"].as_array().unwrap();
    assert_eq!(reports.len(), 3);
    for r in reports {
        assert!(r["lhs"].as_f64().unwrap() < r["rhs"].as_f64().unwrap());
    }
    assert!(dir.path().join("rearrange_tb.csv").is_file());
}

#[test]
fn zero_input_exits_2_without_output() {
    let dir = TempDir::new().unwrap();
    let data = TempDir::new().unwrap();
    fs::write(data.path().join("z.csv"), "0\n".repeat(64)).unwrap();
    fs::write(
        data.path().join("z.json"),
        r#"{"lower": [0, -1], "upper": [1, 1], "shape": [8, 8], "spacing": [0.14285714285714285, 0.2857142857142857], "encoding": "csv", "data": "z.csv"}"#,
    )
    .unwrap();
    let input = data.path().join("z.json");
    let mut args = vec!["rearrange", "--input", input.to_str().unwrap()];
    args.extend(X1);
    let o = wmoser(dir.path(), &args);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("zero function"));
    assert!(is_empty(dir.path()));
}

#[test]
fn malformed_input_exits_2() {
    let dir = TempDir::new().unwrap();
    let data = TempDir::new().unwrap();
    fs::write(data.path().join("bad.json"), "{\"lower\": [0]}").unwrap();
    let input = data.path().join("bad.json");
    let mut args = vec!["rearrange", "--input", input.to_str().unwrap()];
    args.extend(X1);
    let o = wmoser(dir.path(), &args);
    assert_eq!(o.status.code(), Some(2));
    assert!(is_empty(dir.path()));
}

#[test]
fn reduce_round_trip_from_rearrange() {
    let dir = TempDir::new().unwrap();
    let input = repo_fixture("fixture_x1-shifted-bump.json");
    let mut args = vec!["rearrange", "--input", input.to_str().unwrap()];
    args.extend(X1);
    assert!(wmoser(dir.path(), &args).status.success());
    let profile = dir.path().join("rearrange_run.csv");
    let mut args = vec!["reduce", "--profile", profile.to_str().unwrap(), "--beta", "0.5"];
    args.extend(X1);
    let o = wmoser(dir.path(), &args);
    assert!(o.status.success(), "{}", stderr(&o));
    let v = json(dir.path().join("reduce_run.json"));
    assert!(v["energy_residual"].as_f64().unwrap() < 1e-3);
    assert!(v["exp_residual"].as_f64().unwrap() < 1e-3);
    assert!(fs::read_to_string(dir.path().join("reduce_run.csv")).unwrap().starts_with("t,phi\n"));
}

#[test]
fn optimize_beats_the_family_scan() {
    let dir = TempDir::new().unwrap();
    let o = wmoser(dir.path(), &["optimize"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v = json(dir.path().join("optimize_run.json"));
    assert!(v["value"].as_f64().unwrap() > v["baseline"]["value"].as_f64().unwrap());
    assert!(v["constraint_residual"].as_f64().unwrap() <= 1e-6);
    assert_eq!(v["converged"], Value::Bool(true));
}

#[test]
fn q_of_one_exits_2() {
    let dir = TempDir::new().unwrap();
    let o = wmoser(dir.path(), &["optimize", "-q", "1.0"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("q must exceed 1"));
    assert!(is_empty(dir.path()));
}

#[test]
fn schedule_gives_one_history_entry_per_level() {
    let dir = TempDir::new().unwrap();
    let o = wmoser(dir.path(), &["optimize", "--schedule", "128,256,512"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v = json(dir.path().join("optimize_run.json"));
    let history = v["history"].as_array().unwrap();
    assert_eq!(history.len(), 3);
    assert_eq!(history[2][0].as_u64(), Some(512));
    assert!(v["extrapolated"].as_f64().is_some());

    let o = wmoser(dir.path(), &["optimize", "--schedule", "256,128", "--label", "bad"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!dir.path().join("optimize_bad.json").exists());
}

#[test]
fn iteration_cap_reports_partial_result() {
    let dir = TempDir::new().unwrap();
    let o = wmoser(dir.path(), &["optimize", "-q", "1.5", "--max-iterations", "3"]);
    assert_eq!(o.status.code(), Some(1));
    let v = json(dir.path().join("optimize_run.json"));
    assert_eq!(v["converged"], Value::Bool(false));
    assert!(v["error"].as_str().unwrap().contains("did not converge"));
}

#[test]
fn identical_runs_are_byte_identical() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    let input = repo_fixture("fixture_x1-two-bump.json");
    let runs: Vec<Vec<&str>> = vec![
        [&["constants", "--budget", "20000", "--seed", "7"][..], &X1[..]].concat(),
        [&["rearrange", "--input", input.to_str().unwrap()][..], &X1[..]].concat(),
        vec!["optimize", "-q", "3", "-N", "64"],
    ];
    for args in &runs {
        assert!(wmoser(a.path(), args).status.success());
        assert!(wmoser(b.path(), args).status.success());
    }
    let mut names: Vec<_> = fs::read_dir(a.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert_eq!(names.len(), 5);
    for name in names {
        assert_eq!(
            fs::read(a.path().join(&name)).unwrap(),
            fs::read(b.path().join(&name)).unwrap(),
            "{name:?}"
        );
    }
}

#[test]
fn verify_pipeline_on_a_fixture() {
    let dir = TempDir::new().unwrap();
    let mut args = vec!["verify", "--fixture", "two-bump", "--nodes", "64", "--extremal-nodes", "512"];
    args.extend(X1);
    let o = wmoser(dir.path(), &args);
    assert!(o.status.success(), "{}", stderr(&o));
    let v = json(dir.path().join("verify_run.json"));
    assert_eq!(v["bounded_by_supremum"], Value::Bool(true));
    assert!(v["polya_szego"]["lhs"].as_f64().unwrap() < 1.0);
    assert!(v["identities"]["exp_residual"].as_f64().unwrap() < 1e-3);
    for suffix in ["_profile.csv", "_phi.csv"] {
        assert!(dir.path().join(format!("verify_run{suffix}")).is_file());
    }
}

#[test]
fn help_names_the_symbols() {
    let dir = TempDir::new().unwrap();
    let help = |sub: &str| {
        let o = wmoser(dir.path(), &[sub, "--help"]);
        String::from_utf8_lossy(&o.stdout).into_owned()
    };
    let optimize = help("optimize");
    for flag in ["-q", "--beta", "-T", "-N"] {
        assert!(optimize.contains(flag), "optimize --help lacks {flag}");
    }
    let constants = help("constants");
    for flag in ["-d", "-A", "--active"] {
        assert!(constants.contains(flag), "constants --help lacks {flag}");
    }
}
