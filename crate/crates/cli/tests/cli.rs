use std::path::Path;
use std::process::{Command, Output};

use insulation_core::spectra::disk_robin_oracle;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_insulation")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).expect("valid json")
}

/// Data rows of a CSV file: comment lines and the header dropped.
fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines().filter(|l| !l.starts_with('#')).skip(1).map(|l| l.split(',').map(String::from).collect()).collect()
}

#[test]
fn zero_mass_is_plain_robin() {
    let o = run(&["solve", "--beta", "1", "--mass", "0", "--mesh-h", "0.05"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&o);
    let lambda = v["lambda_m"].as_f64().unwrap();
    assert_eq!(v["start"], "bare");
    assert!((lambda - v["lambda_robin"].as_f64().unwrap()).abs() < 1e-10 * lambda);
    let exact = disk_robin_oracle(1.0, 1.0).unwrap().lambda;
    assert!((lambda - exact).abs() / exact < 1e-2);
}

#[test]
fn solve_writes_json_and_profile() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = run(&["solve", "--beta", "1", "--mass", "1", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    for key in ["beta", "m", "lambda_m", "c_u", "radiality", "iterations", "mesh_h", "domain", "schema_version", "config"] {
        assert!(!v[key].is_null(), "missing {key}");
    }
    let lambda = v["lambda_m"].as_f64().unwrap();
    assert!(lambda > 0.0 && lambda < v["lambda_robin"].as_f64().unwrap());
    assert_eq!(v["audit"]["violations"], 0);
    assert_eq!(std::fs::read(out.join("result.json")).unwrap(), o.stdout);

    let csv = std::fs::read_to_string(out.join("boundary.csv")).unwrap();
    assert!(csv.starts_with("# schema_version=1\n"));
    assert!(!csv.contains('\r'));
    assert!(csv.lines().any(|l| l == "arclength,h,trace_u"));
    let data = rows(&csv);
    assert!(data.len() > 10);
    let arclength: Vec<f64> = data.iter().map(|r| r[0].parse().unwrap()).collect();
    assert!(arclength.windows(2).all(|w| w[1] > w[0]));
    assert!(data.iter().all(|r| r[1].parse::<f64>().unwrap() >= 0.0));
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("run.conf");
    std::fs::write(&conf, "# run\nbeta = 2\nmass = 0.5\nmesh_h = 0.2\n").unwrap();
    let o = run(&["solve", "--config", conf.to_str().unwrap(), "--mass", "0.25"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["beta"], 2.0);
    assert_eq!(v["m"], 0.25);
    assert_eq!(v["config"]["mesh_h"], "0.2");
}

#[test]
fn config_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.conf");
    std::fs::write(&bad, "beta = 1\nthis line is not a setting\n").unwrap();
    let o = run(&["solve", "--config", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));

    let missing = dir.path().join("nope.conf");
    assert_eq!(run(&["solve", "--config", missing.to_str().unwrap()]).status.code(), Some(1));
    assert_eq!(run(&["solve", "--beta", "-1"]).status.code(), Some(1));
    assert_eq!(run(&["solve", "--domain", "sphere:1"]).status.code(), Some(1));
    assert_eq!(run(&["solve", "--beta", "1,2"]).status.code(), Some(1));
    assert_eq!(run(&["gamma", "--domain", "rect:1:1"]).status.code(), Some(1));
}

#[test]
fn usage_errors() {
    let o = run(&["frobnicate"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
    assert_eq!(run(&[]).status.code(), Some(1));
    assert_eq!(run(&["solve", "--no-such-flag"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn non_convergence_exits_two_with_output() {
    let o = run(&["solve", "--beta", "8", "--mass", "1", "--max-iter", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(json(&o)["converged"], false);
}

#[test]
fn single_point_sweep_matches_solve() {
    let args = ["--beta", "1.5", "--mass", "0.7", "--mesh-h", "0.15"];
    let solve = json(&run(&[&["solve"], &args[..]].concat()));
    let sweep = run(&[&["sweep"], &args[..]].concat());
    assert_eq!(sweep.status.code(), Some(0));
    let data = rows(&stdout(&sweep));
    assert_eq!(data.len(), 1);
    assert_eq!(data[0][2].parse::<f64>().unwrap(), solve["lambda_m"].as_f64().unwrap());
    assert_eq!(data[0][4], "true");
}

#[test]
fn sweep_is_independent_of_worker_count() {
    let args = ["sweep", "--beta", "1,6", "--mass", "0.2,1,4", "--mesh-h", "0.2"];
    let one = run(&[&args[..], &["--jobs", "1"]].concat());
    let three = run(&[&args[..], &["--jobs", "3"]].concat());
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(one.stdout, three.stdout);
    let text = stdout(&one);
    assert!(text.lines().any(|l| l == "beta,m,lambda_m,radiality,is_radial"));
    let data = rows(&text);
    let grid: Vec<(f64, f64)> = data.iter().map(|r| (r[0].parse().unwrap(), r[1].parse().unwrap())).collect();
    assert_eq!(grid, vec![(1.0, 0.2), (1.0, 1.0), (1.0, 4.0), (6.0, 0.2), (6.0, 1.0), (6.0, 4.0)]);
    // 17 significant digits
    assert!(data.iter().all(|r| r[2].split('e').next().unwrap().len() == 18));
}

#[test]
fn reference_table() {
    let o = run(&["reference", "--mesh-h", "0.1"]);
    assert_eq!(o.status.code(), Some(0));
    let data = rows(&stdout(&o));
    let names: Vec<&str> = data.iter().map(|r| r[0].as_str()).collect();
    assert_eq!(names, ["lambda_D", "lambda_N", "lambda_R", "beta_star"]);
    assert!(data.iter().all(|r| r[3].parse::<f64>().unwrap() < 1e-2));

    let o = run(&["reference", "--domain", "rect:2:1", "--mesh-h", "0.2"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(rows(&stdout(&o)).iter().all(|r| r[2].is_empty() && r[3].is_empty()));
}

#[test]
fn gamma_table() {
    let o = run(&["gamma", "--eps", "0.1,0.05,0.025"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.lines().any(|l| l.starts_with("# limit=")));
    let gaps: Vec<f64> = rows(&text).iter().map(|r| r[2].parse().unwrap()).collect();
    assert_eq!(gaps.len(), 3);
    assert!(gaps.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn mesh_info_and_export() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["mesh-info", "--domain", "polygon:5:1", "--mesh-h", "0.2", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let data = rows(&stdout(&o));
    let get = |k: &str| data.iter().find(|r| r[0] == k).unwrap()[1].clone();
    let mesh = insulation_core::mesh::TriMesh::<f64>::from_text(
        &std::fs::read_to_string(Path::new(dir.path()).join("mesh.txt")).unwrap(),
    )
    .unwrap();
    assert_eq!(get("NV"), mesh.num_vertices().to_string());
    assert_eq!(get("NT"), mesh.num_triangles().to_string());
    assert_eq!(get("NB"), mesh.num_boundary().to_string());
    let area: f64 = get("area").parse().unwrap();
    let exact = 2.5 * (2.0 * std::f64::consts::PI / 5.0).sin();
    assert!((area - exact).abs() < 1e-12);
}
