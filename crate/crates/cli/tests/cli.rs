use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn netgof(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_netgof"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn karate() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/karate.txt")
}

fn json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn generate_writes_edges_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let edges = dir.path().join("g.txt");
    let e = edges.to_str().unwrap();
    let out = netgof(&[
        "generate",
        "--model",
        "sbm_planted",
        "--n",
        "120",
        "--param",
        "k=2",
        "--seed",
        "4",
        "--out",
        e,
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let first = fs::read_to_string(&edges).unwrap();
    let sidecar: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("g.json")).unwrap()).unwrap();
    assert_eq!(sidecar["n"], 120);
    assert_eq!(sidecar["truth"]["family"], "sbm");
    assert_eq!(
        sidecar["edges"].as_u64().unwrap() as usize,
        first.lines().filter(|l| !l.starts_with('#')).count()
    );

    netgof(&[
        "generate",
        "--model",
        "sbm_planted",
        "--n",
        "120",
        "--param",
        "k=2",
        "--seed",
        "4",
        "--out",
        e,
    ]);
    assert_eq!(fs::read_to_string(&edges).unwrap(), first);
}

#[test]
fn test_reports_statistic_and_decision() {
    let k = karate();
    let out = json(&netgof(&[
        "test",
        "--input",
        k.to_str().unwrap(),
        "--model",
        "er",
        "--alpha",
        "0.05",
        "--seed",
        "7",
    ]));
    let t = out["statistic"].as_f64().unwrap();
    let p = out["p_value"].as_f64().unwrap();
    assert!((p - 0.2625).abs() < 1e-3, "{p}");
    assert!((p - erfc_approx(t.abs())).abs() < 1e-6);
    assert_eq!(out["decision"], "accept");
    assert!(out["diagnostics"]["warnings"].is_array());
}

// `erfc(t/√2)` to about 1e-7, from a Chebyshev-fitted exponential.
fn erfc_approx(t: f64) -> f64 {
    let x = t / std::f64::consts::SQRT_2;
    let z = 1.0 / (1.0 + 0.5 * x);
    let poly = -x * x - 1.26551223
        + z * (1.00002368
            + z * (0.37409196
                + z * (0.09678418
                    + z * (-0.18628806
                        + z * (0.27886807
                            + z * (-1.13520398
                                + z * (1.48851587 + z * (-0.82215223 + z * 0.17087277))))))));
    (z * poly.exp()).clamp(0.0, 2.0)
}

#[test]
fn test_text_format_and_model_shorthand() {
    let k = karate();
    let out = netgof(&[
        "test",
        "--input",
        k.to_str().unwrap(),
        "--model",
        "dcsbm:2",
        "--format",
        "text",
    ]);
    assert!(out.status.success());
    let line = String::from_utf8(out.stdout).unwrap();
    assert!(line.starts_with("dcsbm(k=2): T = "), "{line}");
}

#[test]
fn fit_prints_parameters() {
    let k = karate();
    let out = json(&netgof(&[
        "fit",
        "--input",
        k.to_str().unwrap(),
        "--model",
        "sbm",
        "--k",
        "2",
    ]));
    assert_eq!(out["params"]["family"], "sbm");
    assert_eq!(out["params"]["labels"].as_array().unwrap().len(), 34);
}

#[test]
fn select_k_returns_trace() {
    let k = karate();
    let out = json(&netgof(&[
        "select-k",
        "--input",
        k.to_str().unwrap(),
        "--kmax",
        "4",
        "--alpha",
        "0.001",
    ]));
    let trace = out["trace"].as_array().unwrap();
    assert!(!trace.is_empty() && trace.len() <= 4);
    assert_eq!(out["k_max"], 4);
    match out["k_hat"].as_u64() {
        Some(k) => assert_eq!(trace.last().unwrap()["decision"], "accept", "k_hat = {k}"),
        None => assert!(out["k_hat"].is_null()),
    }
}

#[test]
fn missing_input_exits_3() {
    let out = netgof(&["test", "--input", "/nonexistent/graph.txt", "--model", "er"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn bad_arguments_exit_2() {
    let k = karate();
    let out = netgof(&["test", "--input", k.to_str().unwrap(), "--model", "sbm"]);
    assert_eq!(out.status.code(), Some(2));
    let out = netgof(&[
        "test",
        "--input",
        k.to_str().unwrap(),
        "--model",
        "er",
        "--alpha",
        "1.5",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bad_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.txt");
    fs::write(&cfg, "truth = er\nn = 50\nreps = 0\n").unwrap();
    let out = netgof(&[
        "simulate",
        "--experiment",
        "null",
        "--config",
        cfg.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));

    fs::write(
        &cfg,
        "experiment = size\ntruth = er\nn = 50\ncandidates = er\n",
    )
    .unwrap();
    let out = netgof(&[
        "simulate",
        "--experiment",
        "power",
        "--config",
        cfg.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn real_with_missing_dataset_exits_3_but_writes_table() {
    let dir = tempfile::tempdir().unwrap();
    let data = karate().parent().unwrap().to_path_buf();
    let cfg = dir.path().join("real.txt");
    fs::write(
        &cfg,
        format!(
            "experiment = real\ndatasets = karate, football\ncandidates = er, dcsbm\ndata_dir = {}\n",
            data.display()
        ),
    )
    .unwrap();
    let table = dir.path().join("real.csv");
    let out = netgof(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        table.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));
    let csv = fs::read_to_string(&table).unwrap();
    assert_eq!(csv.lines().count(), 3, "{csv}");
    assert!(csv.contains("karate,dcsbm:2,"));
}

#[test]
fn simulate_output_is_independent_of_workers() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("size.txt");
    fs::write(
        &cfg,
        "truth = sbm_planted\nn = 90\nk = 3\nrho = 0.05, 0.1\ncandidates = er, sbm:3\n",
    )
    .unwrap();
    let cfg = cfg.to_str().unwrap();
    for ext in ["csv", "json"] {
        let mut outputs = Vec::new();
        for jobs in ["1", "8"] {
            let path = dir.path().join(format!("size-{jobs}.{ext}"));
            let out = netgof(&[
                "simulate",
                "--experiment",
                "size",
                "--config",
                cfg,
                "--seed",
                "11",
                "--reps",
                "12",
                "--jobs",
                jobs,
                "--out",
                path.to_str().unwrap(),
            ]);
            assert!(
                out.status.success(),
                "{}",
                String::from_utf8_lossy(&out.stderr)
            );
            outputs.push(fs::read(&path).unwrap());
        }
        assert_eq!(
            outputs[0], outputs[1],
            "{ext} differs between 1 and 8 workers"
        );
    }
}

#[test]
fn null_writes_points_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("null.txt");
    fs::write(
        &cfg,
        "experiment = null\ntruth = er\nn = 60\np = 0.1\nreps = 15\n",
    )
    .unwrap();
    let table = dir.path().join("null.csv");
    let out = netgof(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        table.to_str().unwrap(),
        "--jobs",
        "2",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let points = fs::read_to_string(dir.path().join("null.points.csv")).unwrap();
    assert_eq!(points.lines().count(), 16);
    assert!(fs::read_to_string(&table).unwrap().contains(",ks,"));
}

#[test]
fn simulate_prints_csv_without_out() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("power.txt");
    fs::write(
        &cfg,
        "experiment = power\ntruth = sbm_planted\nn = 80\ncandidates = er\nreps = 5\n",
    )
    .unwrap();
    let out = netgof(&["simulate", "--config", cfg.to_str().unwrap(), "--jobs", "1"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("truth,n,"), "{text}");
}
