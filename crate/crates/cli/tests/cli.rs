use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_christoffel")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = run(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn synth(dir: &Path, example: &str, count: usize, seed: u64) -> PathBuf {
    let out = dir.join(format!("{example}-{count}-{seed}"));
    ok(&[
        "synth",
        "--example",
        example,
        "--count",
        &count.to_string(),
        "--seed",
        &seed.to_string(),
        "--output",
        p(&out),
    ]);
    out
}

/// Concatenates the trajectory columns of two tables with the same row labels.
fn join_columns(a: &Path, b: &Path, out: &Path) {
    let (a, b) = (fs::read_to_string(a).unwrap(), fs::read_to_string(b).unwrap());
    let joined: String =
        a.lines().zip(b.lines()).map(|(x, y)| format!("{x},{}\n", y.split_once(',').unwrap().1)).collect();
    fs::write(out, joined).unwrap();
}

/// `id -> cd` from a score report.
fn cd_column(report: &str) -> Vec<(String, f64)> {
    report
        .lines()
        .skip(1)
        .map(|l| {
            let cells: Vec<&str> = l.split(',').collect();
            (cells[0].to_owned(), cells[1].parse().unwrap())
        })
        .collect()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn fit_reports_dimension_and_spectrum() {
    let dir = TempDir::new().unwrap();
    let data = synth(dir.path(), "example1", 1000, 1);
    let model = dir.path().join("model.txt");
    let out = ok(&["fit", "--input", p(&data.join("dataset_coef.csv")), "--output", p(&model)]);
    let text = stdout(&out);
    assert!(text.contains("m = 70"), "{text}");
    assert!(text.contains("N = 1000"));
    assert!(text.contains("min_eigenvalue = ") && text.contains("max_eigenvalue = "));
    // defaults are announced in the run header
    let header = stderr(&out);
    assert!(header.contains("epsilon=auto") && header.contains("quantile 0.999"), "{header}");
    let info = stdout(&ok(&["info", "--model", p(&model)]));
    assert!(info.contains("input_kind = coef") && info.contains("threshold = quantile 0.999"));
}

#[test]
fn training_set_mean_cd_is_the_dimension() {
    let dir = TempDir::new().unwrap();
    let data = synth(dir.path(), "example1", 1000, 2);
    let model = dir.path().join("model.txt");
    ok(&["fit", "--input", p(&data.join("dataset_coef.csv")), "--output", p(&model), "--epsilon", "0"]);
    let out = ok(&["score", "--model", p(&model), "--input", p(&data.join("dataset_coef.csv"))]);
    let cds = cd_column(&stdout(&out));
    assert_eq!(cds.len(), 1000);
    let mean = cds.iter().map(|(_, cd)| cd).sum::<f64>() / 1000.0;
    assert!(rel(mean, 70.0) < 1e-8, "{mean}");
    assert!(stderr(&out).contains("probes=1000"));
}

#[test]
fn input_errors_exit_2() {
    let dir = TempDir::new().unwrap();
    let empty = dir.path().join("empty.csv");
    fs::write(&empty, "").unwrap();
    let model = dir.path().join("m.txt");
    let out = run(&["fit", "--input", p(&empty), "--output", p(&model)]);
    assert_eq!(code(&out), 2);
    assert!(!model.exists());

    let header_only = dir.path().join("header.csv");
    fs::write(&header_only, "t\n").unwrap();
    assert_eq!(code(&run(&["fit", "--input", p(&header_only), "--output", p(&model)])), 2);

    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "t,a,b\n0,1,2\n0.5,1,oops\n").unwrap();
    let out = run(&["fit", "--input", p(&bad), "--output", p(&model)]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("line 3"), "{}", stderr(&out));

    let missing = dir.path().join("missing.csv");
    assert_eq!(code(&run(&["fit", "--input", p(&missing), "--output", p(&model)])), 2);
    assert_eq!(code(&run(&["fit", "--input", p(&bad)])), 2);
    assert_eq!(code(&run(&["fit", "--input", p(&bad), "--output", p(&model), "--epsilon", "-1"])), 2);

    let corrupt = dir.path().join("corrupt.txt");
    fs::write(&corrupt, "christoffel-model\nformat_version: 1\n").unwrap();
    assert_eq!(code(&run(&["info", "--model", p(&corrupt)])), 2);
}

#[test]
fn singular_moment_matrix_exits_3() {
    let dir = TempDir::new().unwrap();
    let same = dir.path().join("same.csv");
    fs::write(&same, "coef,a,b,c\n1,0.5,0.5,0.5\n2,1,1,1\n").unwrap();
    let model = dir.path().join("m.txt");
    let out = run(&[
        "fit",
        "--input",
        p(&same),
        "--output",
        p(&model),
        "--degree-d",
        "1",
        "--degree-n",
        "2",
        "--epsilon",
        "0",
    ]);
    assert_eq!(code(&out), 3, "{}", stderr(&out));
    let out = run(&[
        "fit",
        "--input",
        p(&same),
        "--output",
        p(&model),
        "--degree-d",
        "1",
        "--degree-n",
        "2",
        "--epsilon",
        "0.1",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
}

#[test]
fn model_probe_mismatch_exits_4() {
    let dir = TempDir::new().unwrap();
    let data = synth(dir.path(), "example1", 200, 3);
    let model = dir.path().join("m.txt");
    ok(&["fit", "--input", p(&data.join("dataset_coef.csv")), "--output", p(&model)]);

    let short = dir.path().join("short.csv");
    fs::write(&short, "coef,x\n1,0.1\n2,0.3\n").unwrap();
    assert_eq!(code(&run(&["score", "--model", p(&model), "--input", p(&short)])), 4);

    let probes = data.join("outlier_samples.csv");
    assert_eq!(code(&run(&["score", "--model", p(&model), "--input", p(&probes), "--domain", "0:1"])), 4);
    let late = dir.path().join("late.csv");
    fs::write(&late, "t,x\n0,1\n2,1\n").unwrap();
    assert_eq!(code(&run(&["score", "--model", p(&model), "--input", p(&late)])), 4);
    assert_eq!(code(&run(&["update", "--model", p(&model), "--input", p(&short), "--output", p(&model)])), 4);
}

#[test]
fn zero_probes_give_an_empty_report() {
    let dir = TempDir::new().unwrap();
    let data = synth(dir.path(), "example1", 100, 4);
    let model = dir.path().join("m.txt");
    ok(&["fit", "--input", p(&data.join("dataset_coef.csv")), "--output", p(&model), "--degree-d", "2"]);
    let none = dir.path().join("none.csv");
    fs::write(&none, "coef\n").unwrap();
    let hist = dir.path().join("hist.csv");
    let out = ok(&["score", "--model", p(&model), "--input", p(&none), "--histogram-out", p(&hist)]);
    assert_eq!(stdout(&out), "id,cd,christoffel,threshold,verdict,baseline_l2\n");
    assert!(stderr(&out).contains("probes=0"));
    assert_eq!(fs::read_to_string(&hist).unwrap(), "bin_lo,bin_hi,count\n");
}

#[test]
fn histogram_counts_every_probe() {
    let dir = TempDir::new().unwrap();
    let data = synth(dir.path(), "example1", 300, 5);
    let model = dir.path().join("m.txt");
    ok(&["fit", "--input", p(&data.join("dataset_samples.csv")), "--output", p(&model), "--degree-d", "3"]);
    let hist = dir.path().join("hist.csv");
    let report = dir.path().join("report.csv");
    ok(&[
        "score",
        "--model",
        p(&model),
        "--input",
        p(&data.join("dataset_samples.csv")),
        "--output",
        p(&report),
        "--histogram-out",
        p(&hist),
        "--bins",
        "7",
    ]);
    let rows: Vec<String> = fs::read_to_string(&hist).unwrap().lines().skip(1).map(str::to_owned).collect();
    assert_eq!(rows.len(), 7);
    let total: usize = rows.iter().map(|r| r.rsplit(',').next().unwrap().parse::<usize>().unwrap()).sum();
    assert_eq!(total, 300);
    assert_eq!(fs::read_to_string(&report).unwrap().lines().count(), 301);
}

#[test]
fn threshold_selection() {
    let dir = TempDir::new().unwrap();
    let data = synth(dir.path(), "example1", 500, 6);
    let model = dir.path().join("m.txt");
    let coef = data.join("dataset_coef.csv");
    ok(&["fit", "--input", p(&coef), "--output", p(&model), "--degree-d", "2"]);
    let outlier = data.join("outlier_coef.csv");

    let tau = |out: &Output| stdout(out).lines().nth(1).unwrap().split(',').nth(3).unwrap().parse::<f64>().unwrap();
    let multiple = ok(&["score", "--model", p(&model), "--input", p(&outlier), "--threshold-multiple", "3"]);
    assert_eq!(tau(&multiple), 45.0);
    let calibrated = ok(&[
        "score",
        "--model",
        p(&model),
        "--input",
        p(&outlier),
        "--calibration",
        p(&coef),
        "--threshold-quantile",
        "0.5",
    ]);
    let stored = ok(&["score", "--model", p(&model), "--input", p(&outlier)]);
    assert!(tau(&calibrated) < tau(&stored));
    assert!(stdout(&stored).contains(",outlier,"));
    assert_eq!(code(&run(&["score", "--model", p(&model), "--input", p(&outlier), "--threshold-quantile", "0.9"])), 2);
    assert_eq!(code(&run(&["score", "--model", p(&model), "--input", p(&outlier), "--threshold-multiple", "0.5"])), 2);
}

#[test]
fn runs_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let mut artifacts = Vec::new();
    for (round, flags) in [vec!["--deterministic"], vec!["--deterministic"], vec![]].iter().enumerate() {
        let base = dir.path().join(format!("run{round}"));
        let arg = |extra: &[&str]| -> Vec<String> {
            flags.iter().map(|s| s.to_string()).chain(extra.iter().map(|s| s.to_string())).collect()
        };
        let data = base.join("data");
        let model = base.join("model.txt");
        let report = base.join("report.csv");
        let hist = base.join("hist.csv");
        let run_ok = |v: Vec<String>| ok(&v.iter().map(String::as_str).collect::<Vec<_>>());
        run_ok(arg(&["synth", "--count", "400", "--seed", "9", "--output", p(&data), "--overlay"]));
        run_ok(arg(&["fit", "--input", p(&data.join("dataset_samples.csv")), "--output", p(&model)]));
        run_ok(arg(&[
            "score",
            "--model",
            p(&model),
            "--input",
            p(&data.join("dataset_coef.csv")),
            "--output",
            p(&report),
            "--histogram-out",
            p(&hist),
            "--dataset",
            p(&data.join("dataset_coef.csv")),
        ]));
        let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(&data)
            .unwrap()
            .map(|e| e.unwrap().path())
            .chain([model, report, hist])
            .map(|f| (f.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&f).unwrap()))
            .collect();
        files.sort();
        artifacts.push(files);
    }
    assert_eq!(artifacts[0].len(), 10);
    assert_eq!(artifacts[0], artifacts[1]);
    assert_eq!(artifacts[0], artifacts[2]);
}

#[test]
fn update_matches_refit_on_the_union() {
    let dir = TempDir::new().unwrap();
    let a = synth(dir.path(), "example1", 300, 10);
    let b = synth(dir.path(), "example1", 40, 11);
    let probes = synth(dir.path(), "example1", 100, 12).join("dataset_coef.csv");
    let union = dir.path().join("union.csv");
    join_columns(&a.join("dataset_coef.csv"), &b.join("dataset_coef.csv"), &union);

    let fit_args = ["--degree-d", "3", "--epsilon", "0"];
    let (base, updated, refit) = (dir.path().join("base"), dir.path().join("updated"), dir.path().join("refit"));
    ok(&[&["fit", "--input", p(&a.join("dataset_coef.csv")), "--output", p(&base)][..], &fit_args].concat());
    ok(&[&["fit", "--input", p(&union), "--output", p(&refit)][..], &fit_args].concat());
    let out = ok(&["update", "--model", p(&base), "--input", p(&b.join("dataset_coef.csv")), "--output", p(&updated)]);
    assert!(stdout(&out).contains("N = 300 -> 340"));

    let score = |model: &Path| {
        cd_column(&stdout(&ok(&["score", "--model", p(model), "--input", p(&probes), "--threshold-multiple", "1"])))
    };
    let (u, r) = (score(&updated), score(&refit));
    assert_eq!(u.len(), 100);
    for ((id_u, cd_u), (id_r, cd_r)) in u.iter().zip(&r) {
        assert_eq!(id_u, id_r);
        assert!(rel(*cd_u, *cd_r) < 1e-8, "{id_u}: {cd_u} vs {cd_r}");
    }
}

#[test]
fn update_then_downdate_round_trips() {
    let dir = TempDir::new().unwrap();
    let a = synth(dir.path(), "example1", 300, 13);
    let b = synth(dir.path(), "example1", 25, 14);
    let probes = synth(dir.path(), "example1", 100, 15).join("dataset_coef.csv");
    let (base, up, back) = (dir.path().join("base"), dir.path().join("up"), dir.path().join("back"));
    ok(&["fit", "--input", p(&a.join("dataset_coef.csv")), "--output", p(&base), "--degree-d", "3"]);
    ok(&["update", "--model", p(&base), "--input", p(&b.join("dataset_samples.csv")), "--output", p(&up)]);
    let out = ok(&["downdate", "--model", p(&up), "--input", p(&b.join("dataset_samples.csv")), "--output", p(&back)]);
    assert!(stdout(&out).contains("N = 325 -> 300"));
    let score = |model: &Path| {
        cd_column(&stdout(&ok(&["score", "--model", p(model), "--input", p(&probes), "--threshold-multiple", "1"])))
    };
    for ((_, x), (_, y)) in score(&base).iter().zip(&score(&back)) {
        assert!(rel(*x, *y) < 1e-8, "{x} vs {y}");
    }
}

#[test]
fn empty_update_is_the_identity() {
    let dir = TempDir::new().unwrap();
    let data = synth(dir.path(), "example1", 150, 16);
    let (model, same) = (dir.path().join("m.txt"), dir.path().join("same.txt"));
    ok(&["fit", "--input", p(&data.join("dataset_coef.csv")), "--output", p(&model), "--degree-d", "2"]);
    let none = dir.path().join("none.csv");
    fs::write(&none, "coef\n").unwrap();
    ok(&["update", "--model", p(&model), "--input", p(&none), "--output", p(&same)]);
    assert_eq!(fs::read(&model).unwrap(), fs::read(&same).unwrap());
}

#[test]
fn downdate_below_one_trajectory_fails() {
    let dir = TempDir::new().unwrap();
    let one = dir.path().join("one.csv");
    fs::write(&one, "coef,a\n1,0.5\n").unwrap();
    let model = dir.path().join("m.txt");
    ok(&["fit", "--input", p(&one), "--output", p(&model), "--degree-d", "1", "--degree-n", "1", "--epsilon", "0.1"]);
    assert_eq!(code(&run(&["downdate", "--model", p(&model), "--input", p(&one), "--output", p(&model)])), 2);
}

#[test]
fn synth_writes_both_layouts() {
    let dir = TempDir::new().unwrap();
    let data = synth(dir.path(), "example1", 1000, 17);
    let coef = fs::read_to_string(data.join("dataset_coef.csv")).unwrap();
    let header: Vec<&str> = coef.lines().next().unwrap().split(',').collect();
    assert_eq!(header.len(), 1001);
    assert_eq!((header[0], header[1], header[1000]), ("coef", "g1", "g1000"));
    assert_eq!(coef.lines().count(), 1 + 8);
    let samples = fs::read_to_string(data.join("dataset_samples.csv")).unwrap();
    assert_eq!(samples.lines().count(), 1 + 33);
    assert!(samples.lines().all(|l| l.split(',').count() == 1001));
    for stem in ["outlier", "nominal"] {
        assert!(data.join(format!("{stem}_coef.csv")).exists());
        assert!(data.join(format!("{stem}_samples.csv")).exists());
    }
}

#[test]
fn synth_example2_outlier_has_fifth_coefficient() {
    let dir = TempDir::new().unwrap();
    let data = synth(dir.path(), "example2", 50, 18);
    let outlier = fs::read_to_string(data.join("outlier_coef.csv")).unwrap();
    let fifth: f64 = outlier.lines().nth(5).unwrap().split(',').nth(1).unwrap().parse().unwrap();
    assert_eq!(outlier.lines().nth(5).unwrap().split(',').next(), Some("5"));
    assert_eq!(fifth, 0.1);
    let inliers = fs::read_to_string(data.join("dataset_coef.csv")).unwrap();
    assert!(inliers.lines().nth(5).unwrap().split(',').skip(1).all(|c| c.parse::<f64>().unwrap() == 0.0));
}

#[test]
fn synth_overlay_has_201_times() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("o");
    ok(&["synth", "--count", "10", "--output", p(&out), "--overlay"]);
    let overlay = fs::read_to_string(out.join("overlay.csv")).unwrap();
    assert_eq!(overlay.lines().count(), 202);
    assert!(overlay.starts_with("t,nominal,outlier,g1,"));
}

#[test]
fn baseline_scores() {
    let dir = TempDir::new().unwrap();
    let data = synth(dir.path(), "example1", 1000, 168);
    let dataset = data.join("dataset_coef.csv");
    let member = dir.path().join("member.csv");
    let coef = fs::read_to_string(&dataset).unwrap();
    let first_column: String =
        coef.lines().map(|l| l.split(',').take(2).collect::<Vec<_>>().join(",") + "\n").collect();
    fs::write(&member, first_column).unwrap();

    let row = |out: &Output| stdout(out).lines().nth(1).unwrap().split(',').map(str::to_owned).collect::<Vec<_>>();
    let out = ok(&["baseline", "--dataset", p(&dataset), "--input", p(&member)]);
    assert_eq!(stdout(&out).lines().next(), Some("id,cd,baseline_l2,naive_fraction"));
    assert_eq!(row(&out)[2].parse::<f64>().unwrap(), 0.0);

    let outlier = data.join("outlier_coef.csv");
    let zero = ok(&["baseline", "--dataset", p(&dataset), "--input", p(&outlier), "--naive-delta", "0"]);
    assert_eq!(row(&zero)[3].parse::<f64>().unwrap(), 0.0);

    // this draw's graph stays inside the inlier point cloud, yet its CD value
    // is far above the calibrated threshold
    let out = ok(&["baseline", "--dataset", p(&dataset), "--input", p(&outlier), "--epsilon", "0"]);
    assert!(row(&out)[3].parse::<f64>().unwrap() < 0.05);
    let model = dir.path().join("m.txt");
    ok(&["fit", "--input", p(&dataset), "--output", p(&model), "--epsilon", "0"]);
    let verdict = ok(&["score", "--model", p(&model), "--input", p(&outlier)]);
    assert!(stdout(&verdict).contains(",outlier,"));

    let mismatched =
        ok(&["fit", "--input", p(&data.join("dataset_samples.csv")), "--output", p(&model), "--domain", "-2:2"]);
    assert!(mismatched.status.success());
    assert_eq!(code(&run(&["baseline", "--dataset", p(&dataset), "--input", p(&outlier), "--model", p(&model)])), 4);
}
