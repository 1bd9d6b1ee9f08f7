use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn ssta(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ssta"))
        .arg("--out-dir")
        .arg(out)
        .args(args)
        .output()
        .unwrap()
}

fn data(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "data", name]
        .iter()
        .collect();
    p.to_string_lossy().into_owned()
}

fn read_csv(path: &Path) -> (String, Vec<Vec<f64>>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().to_string();
    let rows = lines
        .map(|l| l.split(',').map(|t| t.parse().unwrap()).collect())
        .collect();
    (header, rows)
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn dist_gumbel_grid() {
    let dir = tempfile::tempdir().unwrap();
    let o = ssta(
        dir.path(),
        &[
            "dist", "gumbel", "--n", "100", "--z-min", "-1", "--z-max", "6", "--steps", "700",
        ],
    );
    assert!(o.status.success());
    let (header, rows) = read_csv(&dir.path().join("dist_gumbel.csv"));
    assert_eq!(header, "z,cdf,pdf");
    assert_eq!(rows.len(), 701);
    assert_eq!(rows[0][0], -1.0);
    assert_eq!(rows[700][0], 6.0);
    let p = ssta_core::GumbelParams::for_count(100).unwrap();
    for r in &rows {
        assert_eq!(r[1], p.cdf(r[0]));
        assert_eq!(r[2], p.pdf(r[0]));
    }
    let side = json(&dir.path().join("dist_gumbel.json"));
    assert_eq!(side["n"], 100);
    assert!(side["validity"].is_null());
    let manifest = json(&dir.path().join("dist_gumbel_manifest.json"));
    assert_eq!(manifest["command"], "dist");
    assert_eq!(manifest["parameters"]["n"], 100);
    assert!(manifest["timestamp"].is_string());
}

#[test]
fn first_order_with_zero_rho_equals_gumbel() {
    let dir = tempfile::tempdir().unwrap();
    assert!(ssta(dir.path(), &["dist", "gumbel", "--n", "100"])
        .status
        .success());
    assert!(
        ssta(dir.path(), &["dist", "first", "--n", "100", "--rho", "0"])
            .status
            .success()
    );
    let (_, g) = read_csv(&dir.path().join("dist_gumbel.csv"));
    let (_, f) = read_csv(&dir.path().join("dist_first.csv"));
    assert_eq!(g, f);
}

#[test]
fn dist_from_eps_file() {
    let dir = tempfile::tempdir().unwrap();
    let eps = dir.path().join("eps.txt");
    // the same AR(1) matrix written as a correlation matrix
    std::fs::write(&eps, "# rho = 0.5\n1, 0.5, 0.25\n0.5 1 0.5\n0.25,0.5,1\n").unwrap();
    let o = ssta(
        dir.path(),
        &["dist", "second", "--eps-file", eps.to_str().unwrap()],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let side = json(&dir.path().join("dist_second.json"));
    assert_eq!(side["n"], 3);
    assert_eq!(side["correlation_sum"], 2.5);
    assert!(!ssta(
        dir.path(),
        &[
            "dist",
            "second",
            "--n",
            "4",
            "--eps-file",
            eps.to_str().unwrap()
        ]
    )
    .status
    .success());
}

#[test]
fn dist_validation_errors_name_the_flag() {
    let dir = tempfile::tempdir().unwrap();
    for (args, flag) in [
        (
            vec!["dist", "second", "--n", "100", "--rho", "1.5"],
            "--rho",
        ),
        (vec!["dist", "gumbel", "--n", "1"], "--n"),
        (
            vec![
                "dist", "gumbel", "--n", "10", "--z-min", "3", "--z-max", "1",
            ],
            "--z-min",
        ),
        (vec!["dist", "gumbel"], "--n"),
    ] {
        let o = ssta(dir.path(), &args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(
            String::from_utf8_lossy(&o.stderr).contains(flag),
            "{args:?}"
        );
    }
}

#[test]
fn mc_single_and_rerun_identical() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let args = [
        "mc", "--n", "100", "--rho", "0.35", "--reps", "2000", "--seed", "42",
    ];
    assert!(ssta(&a, &args).status.success());
    assert!(ssta(&b, &args).status.success());
    for f in ["mc_samples.csv", "mc_stats.json"] {
        assert_eq!(
            std::fs::read(a.join(f)).unwrap(),
            std::fs::read(b.join(f)).unwrap()
        );
    }
    let (header, rows) = read_csv(&a.join("mc_samples.csv"));
    assert_eq!(header, "sample");
    assert_eq!(rows.len(), 2000);
    let stats = json(&a.join("mc_stats.json"));
    let counts: u64 = stats["histogram"]["counts"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c.as_u64().unwrap())
        .sum();
    assert_eq!(counts, 2000);
}

#[test]
fn mc_single_variable_is_standard_normal() {
    let dir = tempfile::tempdir().unwrap();
    let o = ssta(
        dir.path(),
        &[
            "mc", "--n", "1", "--rho", "0.5", "--reps", "10000", "--seed", "3",
        ],
    );
    assert!(o.status.success());
    let s = json(&dir.path().join("mc_stats.json"));
    let (mean, std, se) = (
        s["mean"].as_f64().unwrap(),
        s["std"].as_f64().unwrap(),
        s["std_error"].as_f64().unwrap(),
    );
    assert!(mean.abs() < 3.0 * se);
    // std error of the sample std is about sigma / sqrt(2 reps)
    assert!((std - 1.0).abs() < 3.0 / (2.0f64 * 10_000.0).sqrt());
}

#[test]
fn mc_sweep_and_errors() {
    let dir = tempfile::tempdir().unwrap();
    let o = ssta(
        dir.path(),
        &[
            "mc",
            "--n",
            "50",
            "--rho-sweep",
            "0.1:0.9:0.2",
            "--reps",
            "500",
            "--workers",
            "3",
        ],
    );
    assert!(o.status.success());
    let (header, rows) = read_csv(&dir.path().join("mc_sweep.csv"));
    assert_eq!(
        header,
        "rho,mean,std,std_error,first_order_mean,gumbel_mean"
    );
    let rhos: Vec<f64> = rows.iter().map(|r| r[0]).collect();
    assert_eq!(rhos, vec![0.1, 0.3, 0.5, 0.7, 0.9]);
    assert!(rows.windows(2).all(|w| w[1][4] < w[0][4]));

    assert_eq!(
        ssta(dir.path(), &["mc", "--n", "10", "--rho", "-0.1"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        ssta(dir.path(), &["mc", "--n", "10", "--rho-sweep", "0:2:1"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        ssta(dir.path(), &["mc", "--n", "10", "--reps", "0"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn graph_cov_reproduces_shared_node_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let o = ssta(dir.path(), &["graph", "cov", &data("shared_node.txt")]);
    assert!(o.status.success());
    let (header, rows) = read_csv(&dir.path().join("shared_node_cov.csv"));
    assert_eq!(header, "path,0,1,2,3");
    assert!((rows[0][2] - 3.0 / (2.0 * 6f64.sqrt())).abs() < 1e-15);
    assert!((rows[1][3] - 4.0 / 30f64.sqrt()).abs() < 1e-15);
    assert_eq!(rows[0][4], 0.25);
}

#[test]
fn graph_paths_on_diamond() {
    let dir = tempfile::tempdir().unwrap();
    let o = ssta(dir.path(), &["graph", "paths", &data("diamond.txt")]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(dir.path().join("diamond_paths.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "path,length,mean,std,nodes");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].ends_with("s a t"));
}

#[test]
fn graph_analyze_cascade() {
    let dir = tempfile::tempdir().unwrap();
    let o = ssta(
        dir.path(),
        &[
            "graph",
            "analyze",
            &data("cascade64.txt"),
            "--order",
            "complete",
            "--reps",
            "2000",
            "--workers",
            "4",
        ],
    );
    assert!(o.status.success());
    let r = json(&dir.path().join("cascade64_analysis.json"));
    assert_eq!(r["path_count"], 64);
    assert_eq!(r["order"], "complete");
    assert!(r["monte_carlo"]["mean"].as_f64().unwrap() > 12.0);
    assert!(r["mean_gap"].is_number());
}

#[test]
fn graph_input_errors() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.txt");
    std::fs::write(&bad, "a b 1\n").unwrap();
    assert_eq!(
        ssta(dir.path(), &["graph", "paths", bad.to_str().unwrap()])
            .status
            .code(),
        Some(3)
    );
    std::fs::write(&bad, "a b 1 1\nb a 1 1\n").unwrap();
    assert_eq!(
        ssta(dir.path(), &["graph", "cov", bad.to_str().unwrap()])
            .status
            .code(),
        Some(3)
    );
    let o = ssta(
        dir.path(),
        &["graph", "paths", &data("cascade64.txt"), "--cap", "10"],
    );
    assert_eq!(o.status.code(), Some(4));
    let missing = dir.path().join("missing.txt");
    assert_eq!(
        ssta(dir.path(), &["graph", "paths", missing.to_str().unwrap()])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn json_graph_input() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("g.json");
    std::fs::write(
        &g,
        r#"{"edges":[{"from":"s","to":"t","mu":1.0,"sigma":0.1},{"from":"s","to":"u","mu":1.0,"sigma":0.1}]}"#,
    )
    .unwrap();
    let o = ssta(dir.path(), &["graph", "paths", g.to_str().unwrap()]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(dir.path().join("g_paths.csv")).unwrap();
    // two sinks joined by a virtual sink
    assert_eq!(text.lines().count(), 3);
    assert!(text.contains("s t __sink__"));
}

#[test]
fn noniid_baseline_and_validation() {
    let dir = tempfile::tempdir().unwrap();
    let o = ssta(
        dir.path(),
        &[
            "noniid",
            "--n-grid",
            "10,100",
            "--reps",
            "5000",
            "--seed",
            "9",
            "--workers",
            "2",
        ],
    );
    assert!(o.status.success());
    let (header, rows) = read_csv(&dir.path().join("noniid.csv"));
    assert_eq!(header, "n,mean,std,std_error");
    for r in rows {
        let exact = ssta_core::gumbel::iid_max_moments(r[0] as usize);
        assert!((r[1] - exact.mean).abs() < 3.0 * r[3]);
    }
    let o = ssta(
        dir.path(),
        &["noniid", "--delta-sigma", "0.9", "--sigma", "0.5"],
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--delta-sigma"));
}

#[test]
fn out_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("env_out");
    let o = Command::new(env!("CARGO_BIN_EXE_ssta"))
        .env("SSTA_OUT_DIR", &target)
        .args(["dist", "gumbel", "--n", "10", "--steps", "10"])
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(target.join("dist_gumbel.csv").exists());
}
