use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use collider_core::fixtures::{self, AGE, HYPERTENSION, PROTEINURIA, SBP, SODIUM};
use collider_core::{fit_ols, run_mc, McSummary, Scenario};
use collider_lab::io::{read_csv, FitReport};

fn asset(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join(rel)
}

fn collider(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_collider"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn sodium_sem() -> String {
    asset("fixtures/box3.sem").display().to_string()
}

#[test]
fn generate_sodium_dataset() {
    let text = stdout(&collider(&[
        "generate",
        "--spec",
        &sodium_sem(),
        "-n",
        "1000",
        "--seed",
        "777",
    ]));
    let mut lines = text.lines();
    let provenance = lines.next().unwrap();
    assert!(
        provenance.starts_with("# collider-lab ") && provenance.contains("seed=777"),
        "{provenance}"
    );
    assert_eq!(
        lines.next().unwrap(),
        "Age_years,Sodium_gr,sbp_in_mmHg,Proteinuria_in_mg,hypertension"
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 1000);
    assert!(rows.iter().all(|r| r.split(',').count() == 5));
    assert_eq!(
        read_csv(&text).unwrap(),
        fixtures::sodium().generate(1000, 777).unwrap()
    );
}

#[test]
fn generate_is_byte_identical_across_runs_and_threads() {
    let confounder = asset("fixtures/box1.sem").display().to_string();
    let a = collider(&["generate", "--spec", &confounder, "-n", "5", "--seed", "1"]);
    let b = collider(&["generate", "--spec", &confounder, "-n", "5", "--seed", "1"]);
    assert_eq!(stdout(&a), stdout(&b));
    let one = collider(&["--threads", "1", "generate", "--spec", &sodium_sem(), "-n", "5000"]);
    let four = collider(&["--threads", "4", "generate", "--spec", &sodium_sem(), "-n", "5000"]);
    assert_eq!(stdout(&one), stdout(&four));
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        vec!["generate", "--spec", "x.sem", "-n", "0"],
        vec!["generate", "--spec", "x.sem", "-n", "10", "--bogus"],
        vec!["sweep", "--beta1", "5:1", "--alpha", "1"],
        vec!["frobnicate"],
    ] {
        assert_eq!(collider(&args).status.code(), Some(2), "{args:?}");
    }
    let missing = collider(&["generate", "--spec", "/nonexistent.sem", "-n", "3"]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn spec_errors_name_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("bad.sem");
    std::fs::write(
        &spec,
        "[[assign]]\nname = \"A\"\n\n[[assign]]\nname = \"B\"\nparents = [{ var = \"C\", coef = 1 }]\n",
    )
    .unwrap();
    let o = collider(&["generate", "--spec", spec.to_str().unwrap(), "-n", "3"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("bad.sem:6: unknown variable C"), "{}", stderr(&o));
}

fn generated(dir: &Path, n: &str, seed: &str) -> PathBuf {
    let path = dir.join("data.csv");
    let o = collider(&[
        "generate",
        "--spec",
        &sodium_sem(),
        "-n",
        n,
        "--seed",
        seed,
        "-o",
        path.to_str().unwrap(),
    ]);
    stdout(&o);
    path
}

fn fit_report(data: &Path, outcome: &str, regressors: &str, family: &str) -> serde_json::Value {
    let o = collider(&[
        "fit",
        "--data",
        data.to_str().unwrap(),
        "--outcome",
        outcome,
        "--regressors",
        regressors,
        "--family",
        family,
    ]);
    serde_json::from_str(&stdout(&o)).unwrap()
}

#[test]
fn fit_reports() {
    let dir = tempfile::tempdir().unwrap();
    let data = generated(dir.path(), "1000", "777");
    let collider_fit = fit_report(&data, SBP, &format!("{SODIUM},{AGE},{PROTEINURIA}"), "gaussian");
    assert_eq!(collider_fit["provenance"]["seed"], 777);
    let terms = collider_fit["terms"].as_array().unwrap();
    let sodium = terms.iter().find(|t| t["name"] == SODIUM).unwrap();
    assert!(sodium["coef"].as_f64().unwrap() < 0.0);

    let crude = fit_report(&data, SBP, SODIUM, "gaussian");
    let sodium = &crude["terms"][1];
    let (coef, se) = (sodium["coef"].as_f64().unwrap(), sodium["se"].as_f64().unwrap());
    let population = fixtures::sodium()
        .population_ols(SBP, &[SODIUM])
        .unwrap()
        .coef(SODIUM)
        .unwrap();
    assert!((population - 3.6288).abs() < 1e-4);
    assert!((coef - population).abs() < 3.0 * se, "{coef} ± {se}");

    let logistic = fit_report(&data, HYPERTENSION, &format!("{SODIUM},{AGE}"), "logistic");
    assert_eq!(logistic["family"], "binomial");
    assert!(logistic["terms"][1]["or"].as_f64().unwrap() > 1.0);
    assert_eq!(logistic["terms"][1]["ci"].as_array().unwrap().len(), 2);
    assert_eq!(logistic["converged"], true);
}

#[test]
fn fit_round_trip_matches_in_process_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let data = generated(dir.path(), "2000", "31");
    let mut report = fit_report(&data, SBP, &format!("{SODIUM},{AGE},{PROTEINURIA}"), "gaussian");
    report.as_object_mut().unwrap().remove("provenance");
    let from_cli: FitReport = serde_json::from_value(report).unwrap();
    let in_process = fit_ols(
        &fixtures::sodium().generate(2000, 31).unwrap(),
        SBP,
        &[SODIUM, AGE, PROTEINURIA],
    )
    .unwrap();
    assert_eq!(from_cli, FitReport::from(&in_process));
}

#[test]
fn model_failures_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let data = generated(dir.path(), "200", "5");
    let d = data.to_str().unwrap();
    let unknown = collider(&["fit", "--data", d, "--outcome", SBP, "--regressors", "Potassium"]);
    assert_eq!(unknown.status.code(), Some(3));
    assert!(stderr(&unknown).contains("Potassium"));

    let collinear = collider(&[
        "fit",
        "--data",
        d,
        "--outcome",
        SBP,
        "--regressors",
        &format!("{SODIUM},{SODIUM}"),
    ]);
    assert_eq!(collinear.status.code(), Some(3));
    assert!(stderr(&collinear).contains("RankDeficient"));

    let separated = dir.path().join("sep.csv");
    std::fs::write(&separated, "x,y\n1,0\n2,0\n3,0\n4,1\n5,1\n6,1\n").unwrap();
    let o = collider(&[
        "fit",
        "--data",
        separated.to_str().unwrap(),
        "--outcome",
        "y",
        "--regressors",
        "x",
        "--family",
        "logistic",
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("Separation"));
}

#[test]
fn mc_report_matches_library_and_ignores_threads() {
    let args = ["mc", "-n", "500", "-R", "20", "--seed", "4"];
    let one = stdout(&collider(&[&["--threads", "1"][..], &args[..]].concat()));
    let three = stdout(&collider(&[&["--threads", "3"][..], &args[..]].concat()));
    assert_eq!(one, three);
    let mut v: serde_json::Value = serde_json::from_str(&one).unwrap();
    assert_eq!(v["provenance"]["seed"], 4);
    v.as_object_mut().unwrap().remove("provenance");
    let got: McSummary = serde_json::from_value(v).unwrap();
    let sc = Scenario {
        n: 500,
        replicates: 20,
        seed: 4,
        ..Scenario::reference()
    };
    assert_eq!(got, run_mc(&sc).unwrap());
}

#[test]
fn sweep_table_layout() {
    let text = stdout(&collider(&[
        "sweep",
        "--beta1",
        "1:5",
        "--alpha",
        "0.5:5:0.5",
        "-n",
        "1000",
    ]));
    let lines: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(lines[0], "beta1,alpha,estimate,analytic,abs_bias");
    assert_eq!(lines.len(), 51);
    assert!(lines[1].starts_with("1,0.5,"));
    assert!(lines[50].starts_with("5,5,"));
}

#[test]
fn dag_check_prints_opened_path() {
    let dag_file = asset("figures/fig3.dag.json").display().to_string();
    let text = stdout(&collider(&[
        "dag-check",
        &dag_file,
        "--exposure",
        "SOD",
        "--outcome",
        "SBP",
        "--adjust",
        "AGE,PRO",
    ]));
    assert!(text.contains("verdict=invalid"));
    assert!(text.contains("SOD → PRO ← SBP,non-causal,opened"));
    assert!(text.contains("SOD ← AGE → SBP,back-door,blocked"));
    let ok = stdout(&collider(&[
        "dag-check",
        &dag_file,
        "--exposure",
        "SOD",
        "--outcome",
        "SBP",
        "--adjust",
        "AGE",
        "--format",
        "json",
    ]));
    let v: serde_json::Value = serde_json::from_str(&ok).unwrap();
    assert_eq!(v["valid"], true);
    let bad = collider(&[
        "dag-check",
        &dag_file,
        "--exposure",
        "SOD",
        "--outcome",
        "SBP",
        "--adjust",
        "XYZ",
    ]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn describe_spec_and_data() {
    let text = stdout(&collider(&[
        "describe",
        "--spec",
        &sodium_sem(),
        "-n",
        "20000",
        "--seed",
        "3",
    ]));
    let age = text.lines().find(|l| l.starts_with("Age_years,")).unwrap();
    let median: f64 = age.split(',').nth(3).unwrap().parse().unwrap();
    assert!((median - 65.0).abs() < 0.2);
    let dir = tempfile::tempdir().unwrap();
    let data = generated(dir.path(), "300", "8");
    let json = stdout(&collider(&[
        "describe",
        "--data",
        data.to_str().unwrap(),
        "--format",
        "json",
    ]));
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(v["provenance"]["seed"], 8);
}
