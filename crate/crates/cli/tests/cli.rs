use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_povmround"));
    c.env_remove("POVMROUND_TOL_OVERRIDES");
    c
}

fn put(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn gen(dir: &TempDir, name: &str, spec: &str, seed: u64) -> PathBuf {
    let spec_path = put(dir, &format!("{name}.spec.json"), spec);
    let out = dir.path().join(format!("{name}.json"));
    let o = run(&["gen", "--in", s(&spec_path), "--out", s(&out), "--seed", &seed.to_string()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    out
}

fn report(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap()
}

#[test]
fn linfty2_orthogonalize_report() {
    let dir = TempDir::new().unwrap();
    let inst = gen(&dir, "l", r#"{"kind": "linfty2_family", "c": 0.1}"#, 0);
    let o = run(&["orthogonalize", "--in", s(&inst)]);
    assert_eq!(o.status.code(), Some(0));
    let r = report(&o);
    assert_eq!(r["command"], "orthogonalize");
    assert!((r["result"]["defect"].as_f64().unwrap() - 0.05).abs() < 1e-12);
    assert!((r["result"]["error"].as_f64().unwrap() - 0.05).abs() < 1e-10);
    assert_eq!(r["passed"], true);
    let digest = r["input_digest"].as_str().unwrap();
    assert!(digest.starts_with("sha256:") && digest.len() == 7 + 64);
}

#[test]
fn gen_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let spec = r#"{"kind": "random_povm_near_pvm", "dims": [3, 2], "n": 3, "delta": 0.1}"#;
    let a = std::fs::read(gen(&dir, "a", spec, 7)).unwrap();
    let b = std::fs::read(gen(&dir, "b", spec, 7)).unwrap();
    assert_eq!(a, b);
    let c = std::fs::read(gen(&dir, "c", spec, 8)).unwrap();
    assert_ne!(a, c);
    assert_eq!(povmround_cli::commands::digest(&a), povmround_cli::commands::digest(&b));
}

#[test]
fn every_command_passes_on_generated_instances() {
    let dir = TempDir::new().unwrap();
    let povm = gen(&dir, "p", r#"{"kind": "random_povm_near_pvm", "dims": [2, 3], "n": 3, "delta": 0.2}"#, 3);
    let pair = gen(&dir, "r", r#"{"kind": "rotated_pvm_pair", "theta": 0.2, "dims": [4], "n": 3, "m": 2, "perturbed": true}"#, 5);
    let fam = gen(&dir, "f", r#"{"kind": "random_functionals", "dims": [2, 2], "n": 3, "diagonal": false}"#, 1);
    for (cmd, inst) in [
        ("orthogonalize", &povm),
        ("orthogonalize-sym", &povm),
        ("verify", &povm),
        ("repair", &pair),
        ("fourier", &pair),
        ("verify", &pair),
        ("majorant", &fam),
    ] {
        let o = run(&[cmd, "--in", s(inst)]);
        assert_eq!(o.status.code(), Some(0), "{cmd}: {}", String::from_utf8_lossy(&o.stderr));
        assert_eq!(report(&o)["passed"], true);
    }
}

fn with_solution(dir: &TempDir, fam: &Path, tamper: impl Fn(&mut Value)) -> PathBuf {
    let o = run(&["majorant", "--in", s(fam)]);
    assert_eq!(o.status.code(), Some(0));
    let mut sol = report(&o)["result"]["solution"].clone();
    tamper(&mut sol);
    let mut inst: Value = serde_json::from_slice(&std::fs::read(fam).unwrap()).unwrap();
    inst["majorant_solution"] = sol;
    put(dir, "with_solution.json", &serde_json::to_string(&inst).unwrap())
}

#[test]
fn verify_accepts_solution_and_names_tampering() {
    let dir = TempDir::new().unwrap();
    let fam = gen(&dir, "f", r#"{"kind": "random_functionals", "dims": [3], "n": 2, "diagonal": false}"#, 4);
    let good = with_solution(&dir, &fam, |_| {});
    assert_eq!(run(&["verify", "--in", s(&good)]).status.code(), Some(0));

    let bad = with_solution(&dir, &fam, |sol| {
        for block in sol["z"].as_array_mut().unwrap() {
            for row in block.as_array_mut().unwrap() {
                for z in row.as_array_mut().unwrap() {
                    z[0] = (z[0].as_f64().unwrap() * 0.5).into();
                    z[1] = (z[1].as_f64().unwrap() * 0.5).into();
                }
            }
        }
    });
    let o = run(&["verify", "--in", s(&bad)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("`feasibility`"));
    let failed: Vec<String> = report(&o)["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["pass"] == false)
        .map(|c| c["name"].as_str().unwrap().to_string())
        .collect();
    assert!(failed.contains(&"feasibility".to_string()), "{failed:?}");
}

#[test]
fn parse_errors_exit_two_with_location() {
    let dir = TempDir::new().unwrap();
    let truncated = put(&dir, "t.json", "{\n  \"version\": \"povmround-instance/1\",\n");
    let o = run(&["orthogonalize", "--in", s(&truncated)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));

    let bad_shape = put(
        &dir,
        "s.json",
        r#"{"version": "povmround-instance/1", "dims": [2], "povm": [[[[[1, 0], [0, 0]], [[0, 0]]]]]}"#,
    );
    let o = run(&["verify", "--in", s(&bad_shape)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("povm[0][0][1]"));

    let missing = run(&["orthogonalize", "--in", s(&dir.path().join("nope.json"))]);
    assert_eq!(missing.status.code(), Some(2));
    let unknown_key = run(&["verify", "--in", s(&truncated), "--tol", "nonsense=1"]);
    assert_eq!(unknown_key.status.code(), Some(2));
    assert_eq!(run(&["frobnicate", "--in", "x"]).status.code(), Some(2));
}

#[test]
fn violations_exit_one() {
    let dir = TempDir::new().unwrap();
    let fam = gen(&dir, "f", r#"{"kind": "random_functionals", "dims": [2], "n": 2, "diagonal": false}"#, 2);
    // a single Newton step cannot reach the target mu
    let o = run(&["majorant", "--in", s(&fam), "--tol", "max_iters=1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("solver_converged"));
}

#[test]
fn flags_take_precedence_over_environment() {
    let dir = TempDir::new().unwrap();
    let inst = gen(&dir, "p", r#"{"kind": "random_povm_near_pvm", "dims": [3], "n": 2, "delta": 0.1}"#, 1);
    let env = |v: &str, extra: &[&str]| {
        let mut args = vec!["orthogonalize", "--in", s(&inst)];
        args.extend_from_slice(extra);
        bin().env("POVMROUND_TOL_OVERRIDES", v).args(&args).output().unwrap()
    };
    let o = env("cert_tol=1e-7,psd_tol=1e-8", &[]);
    assert_eq!(o.status.code(), Some(0));
    let tol = &report(&o)["tolerances"];
    assert_eq!(tol["cert_tol"], 1e-7);
    assert_eq!(tol["psd_tol"], 1e-8);
    let o = env("cert_tol=1e-7", &["--tol", "cert_tol=2e-9", "--seed", "11"]);
    let tol = &report(&o)["tolerances"];
    assert_eq!(tol["cert_tol"], 2e-9);
    assert_eq!(tol["seed"], 11);
}

#[test]
fn sweep_writes_csv_in_seed_order() {
    let dir = TempDir::new().unwrap();
    let cfg = put(&dir, "sweep.json", r#"{"count": 12, "max_total_dim": 6}"#);
    let csv_path = dir.path().join("rows.csv");
    let o = run(&["sweep", "--in", s(&cfg), "--seed", "40", "--csv", s(&csv_path)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(&o);
    assert_eq!(r["result"]["count"], 12);

    let mut rdr = csv::Reader::from_path(&csv_path).unwrap();
    let header: Vec<String> = rdr.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(header, ["seed", "dims", "n", "defect", "error", "ratio", "bound_9eps_margin", "runtime_ms"]);
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    let seeds: Vec<u64> = rows.iter().map(|r| r[0].parse().unwrap()).collect();
    assert_eq!(seeds, (40..52).collect::<Vec<_>>());
    for row in &rows {
        let (defect, error): (f64, f64) = (row[3].parse().unwrap(), row[4].parse().unwrap());
        assert!(error <= 9.0 * defect + 1e-7);
    }

    // same inputs, same numbers (timings aside)
    let again = report(&run(&["sweep", "--in", s(&cfg), "--seed", "40"]));
    let strip = |v: &Value| {
        v["result"]["rows"]
            .as_array()
            .unwrap()
            .iter()
            .map(|r| (r["seed"].clone(), r["defect"].clone(), r["error"].clone()))
            .collect::<Vec<_>>()
    };
    assert_eq!(strip(&r), strip(&again));
}
