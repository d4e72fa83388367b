use std::path::PathBuf;
use std::process::{Command, Output};

use expofit::cli::RunReport;
use expofit::dataset::fixtures;
use expofit::fit::{self, FitConfig};
use expofit::gof::{self, GofConfig};
use expofit::inequality::gini;
use expofit::ModelKind;

fn data(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "data", name].iter().collect();
    p.to_string_lossy().into_owned()
}

fn expofit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_expofit"))
        .args(args)
        .env_remove("EXPOFIT_THREADS")
        .output()
        .expect("binary runs")
}

fn report(out: &Output) -> RunReport {
    RunReport::from_json(std::str::from_utf8(&out.stdout).unwrap()).expect("valid report JSON")
}

#[test]
fn fit_us_exp1() {
    let out = expofit(&["fit", "--input", &data("us_2012.csv"), "--model", "exp1"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r.dataset_name, "us_2012");
    assert_eq!(r.model_kind, "exp1");
    assert!((r.fit.sigma / 38065.8 - 1.0).abs() < 0.005);
    assert_eq!(r.fit.theta, 0.0);
    assert!(r.fit.converged);
    assert!(r.gof.is_none() && r.inequality.is_none());

    // numbers agree with the library exactly
    let lib = fit::fit(&fixtures::us_2012(), &FitConfig::new(ModelKind::OneParam)).unwrap();
    assert_eq!(r.fit.sigma, lib.model.sigma());
    assert_eq!(r.fit.sse, lib.sse);
    assert_eq!(r.fit.iterations, lib.iterations);
}

#[test]
fn fit_uk_exp2() {
    let out = expofit(&["fit", "--input", &data("uk_2011_12.csv"), "--model", "exp2"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert!((r.fit.sigma / 17506.5 - 1.0).abs() < 0.01);
    assert!((r.fit.theta / 8260.56 - 1.0).abs() < 0.01);
}

#[test]
fn usage_errors_exit_1() {
    let out = expofit(&["fit", "--model", "exp1"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(out.stdout.is_empty());
    assert!(!out.stderr.is_empty());

    let us = data("us_2012.csv");
    for args in [
        vec!["gof", "--input", &us, "--model", "exp1", "--replicates", "0"],
        vec!["plotdata", "--input", &us, "--model", "exp1", "--curve", "nosuch"],
        vec!["fit", "--input", &us, "--model", "exp3"],
        vec!["fit", "--input", &us, "--model", "exp1", "--seed", "-1"],
        vec!["gof", "--input", &us, "--model", "exp1", "--significance", "2"],
        vec!["frobnicate"],
    ] {
        assert_eq!(expofit(&args).status.code(), Some(1), "{args:?}");
    }
}

#[test]
fn data_errors_exit_2() {
    let out = expofit(&["report", "--input", "/nonexistent/nope.csv", "--model", "exp1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "x,F\n100,0.5\n50,0.7\n60,0.8\n").unwrap();
    let out = expofit(&["fit", "--input", bad.to_str().unwrap(), "--model", "exp1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("row 2"));

    let flat = dir.path().join("flat.csv");
    std::fs::write(&flat, "x,F\n4,0.2\n4,0.5\n4,0.8\n").unwrap();
    let out = expofit(&["fit", "--input", flat.to_str().unwrap(), "--model", "exp2"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn gof_decisions_match_support_column() {
    let uk = expofit(&["gof", "--input", &data("uk_2011_12.csv"), "--model", "exp1", "--replicates", "2000", "--seed", "1"]);
    assert_eq!(uk.status.code(), Some(0));
    let g = report(&uk).gof.unwrap();
    assert!(g.reject);
    assert_eq!(g.replicates, 2000);
    assert_eq!(g.seed, 1);

    let us = expofit(&["gof", "--input", &data("us_2012.csv"), "--model", "exp1", "--replicates", "2000", "--seed", "1"]);
    let g = report(&us).gof.unwrap();
    assert!(!g.reject);
    assert_eq!(g.p_value, g.exceed_count as f64 / 2000.0);
}

#[test]
fn gof_matches_library_and_is_reproducible() {
    let args = ["gof", "--input", &data("us_2012.csv"), "--model", "exp2", "--replicates", "300", "--seed", "8"];
    let a = expofit(&args);
    let b = expofit(&args);
    let strip = |o: &Output| {
        String::from_utf8_lossy(&o.stdout)
            .lines()
            .filter(|l| !l.contains("\"timestamp\""))
            .collect::<Vec<_>>()
            .join("\n")
    };
    assert_eq!(strip(&a), strip(&b));

    let lib = gof::bootstrap_test(
        &fixtures::us_2012(),
        ModelKind::TwoParam,
        &FitConfig::new(ModelKind::TwoParam),
        &GofConfig { replicates: 300, seed: 8, significance: 0.05 },
    )
    .unwrap();
    let g = report(&a).gof.unwrap();
    assert_eq!(g.ks, lib.ks_empirical);
    assert_eq!(g.exceed_count, lib.exceed_count);
}

#[test]
fn thread_cap_does_not_change_output() {
    let args = ["gof", "--input", &data("uk_2011_12.csv"), "--model", "exp2", "--replicates", "200", "--seed", "3"];
    let run = |threads: Option<&str>| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_expofit"));
        cmd.args(args);
        match threads {
            Some(t) => cmd.env("EXPOFIT_THREADS", t),
            None => cmd.env_remove("EXPOFIT_THREADS"),
        };
        report(&cmd.output().unwrap()).gof.unwrap()
    };
    let base = run(None);
    assert_eq!(run(Some("1")), base);
    assert_eq!(run(Some("3")), base);
    assert_eq!(run(Some("garbage")), base);
}

#[test]
fn report_sections() {
    let out = expofit(&["report", "--input", &data("uk_2011_12.csv"), "--model", "exp2", "--seed", "7", "--replicates", "200"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    let ineq = r.inequality.unwrap();
    let expected = gini(&expofit::ExpModel::two_param(r.fit.sigma, r.fit.theta).unwrap());
    assert_eq!(ineq.gini, expected);
    assert!((ineq.gini - 0.33971).abs() < 2e-3);
    assert_eq!(ineq.lorenz.first().unwrap().l, 0.0);
    assert_eq!(ineq.lorenz.last().unwrap().l, 1.0);
    assert!(r.gof.is_some());
    assert!(!r.tool_version.is_empty() && !r.timestamp.is_empty());

    let text = String::from_utf8(out.stdout).unwrap();
    for key in ["dataset_name", "model_kind", "\"fit\"", "\"gof\"", "\"inequality\"", "\"lorenz\"", "\"L\"", "p_value", "exceed_count"] {
        assert!(text.contains(key), "missing {key}");
    }

    let us = expofit(&["report", "--input", &data("us_2012.csv"), "--model", "exp1", "--replicates", "50"]);
    assert_eq!(report(&us).inequality.unwrap().gini, 0.5);
}

#[test]
fn plotdata_cdf_and_lorenz() {
    let out = expofit(&["plotdata", "--input", &data("us_2012.csv"), "--model", "exp1", "--curve", "cdf"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "x,F_model,F_empirical");
    assert_eq!(lines.len() - 1, 200 + 43);

    let out = expofit(&["plotdata", "--curve", "lorenz", "--input", &data("uk_2011_12.csv"), "--model", "exp2"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "p,L");
    assert_eq!(lines[1], "0,0");
    assert_eq!(*lines.last().unwrap(), "1,1");
}

#[test]
fn output_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let dest = dir.path().join("fit.json");
    let out = expofit(&["fit", "--input", &data("us_2012.csv"), "--model", "exp1", "--output", dest.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let r = RunReport::from_json(&std::fs::read_to_string(dest).unwrap()).unwrap();
    assert_eq!(r.model_kind, "exp1");
}
