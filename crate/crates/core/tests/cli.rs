use std::path::Path;
use std::process::{Command, Output};

fn mbfr(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mbfr"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("run mbfr")
}

fn ok(out: &Output) -> String {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn generate(dir: &Path, n: &str, seed: &str) {
    ok(&mbfr(
        &[
            "generate",
            "butterfly",
            "--n",
            n,
            "--seed",
            seed,
            "--out",
            "b.csv",
        ],
        dir,
    ));
}

#[test]
fn generate_writes_a_loadable_nine_column_csv() {
    let dir = tempfile::tempdir().unwrap();
    ok(&mbfr(
        &[
            "generate",
            "butterfly",
            "--n",
            "500",
            "--noise",
            "0.25",
            "--seed",
            "7",
            "--out",
            "b.csv",
        ],
        dir.path(),
    ));
    let d = mbfr::Dataset::load_csv(dir.path().join("b.csv"), "Y").unwrap();
    assert_eq!(d.n_cols(), 9);
    assert_eq!(d.n_rows(), 500);
    let again = mbfr(
        &[
            "generate",
            "butterfly",
            "--n",
            "500",
            "--noise",
            "0.25",
            "--seed",
            "7",
        ],
        dir.path(),
    );
    assert_eq!(
        ok(&again).as_bytes(),
        std::fs::read(dir.path().join("b.csv")).unwrap()
    );
    let f = ok(&mbfr(&["generate", "friedman", "--n", "50"], dir.path()));
    assert!(f.starts_with("X1,X2,X3,X4,X5,I6,I7,I8,I9,I10,Y\n"));
}

#[test]
fn select_writes_identical_reports_on_rerun() {
    let dir = tempfile::tempdir().unwrap();
    generate(dir.path(), "3000", "1");
    let args = [
        "select", "--input", "b.csv", "--target", "Y", "--scales", "5..20", "--out", "run1",
        "--quiet",
    ];
    assert_eq!(ok(&mbfr(&args, dir.path())), "");
    let mut again = args;
    again[8] = "run2";
    ok(&mbfr(&again, dir.path()));
    for f in ["trace.json", "trace.csv", "profile.svg"] {
        let a = std::fs::read(dir.path().join("run1").join(f)).unwrap();
        let b = std::fs::read(dir.path().join("run2").join(f)).unwrap();
        assert!(!a.is_empty());
        assert_eq!(a, b, "{f}");
    }
    let trace: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("run1/trace.json")).unwrap())
            .unwrap();
    assert_eq!(trace["steps"].as_array().unwrap().len(), 8);
}

#[test]
fn json_output_of_the_analysis_commands() {
    let dir = tempfile::tempdir().unwrap();
    generate(dir.path(), "3000", "2");
    let est: serde_json::Value = serde_json::from_str(&ok(&mbfr(
        &[
            "estimate-id",
            "--input",
            "b.csv",
            "--columns",
            "X1,X2",
            "--scales",
            "1,2,4,8",
            "--json",
        ],
        dir.path(),
    )))
    .unwrap();
    assert_eq!(est["m"], 2);
    assert!((est["intrinsic_dim"].as_f64().unwrap() - 2.0).abs() < 0.1);

    let dr: serde_json::Value = serde_json::from_str(&ok(&mbfr(
        &[
            "dr",
            "--input",
            "b.csv",
            "--features",
            "X1,X2",
            "--scales",
            "5..20",
            "--json",
        ],
        dir.path(),
    )))
    .unwrap();
    assert!(dr["dr"].as_f64().unwrap() > 0.8);

    let cls: serde_json::Value = serde_json::from_str(&ok(&mbfr(
        &[
            "classify",
            "--input",
            "b.csv",
            "--selected",
            "X1,X2",
            "--scales",
            "5..20",
            "--json",
        ],
        dir.path(),
    )))
    .unwrap();
    assert_eq!(cls.as_array().unwrap().len(), 6);

    let sc: serde_json::Value = serde_json::from_str(&ok(&mbfr(
        &[
            "choose-scales",
            "--input",
            "b.csv",
            "--out",
            "diag",
            "--json",
        ],
        dir.path(),
    )))
    .unwrap();
    assert!(sc["scales"].as_array().unwrap().len() >= 2);
    assert!(dir.path().join("diag/scales.svg").exists());
}

#[test]
fn montecarlo_and_evaluate_write_their_files() {
    let dir = tempfile::tempdir().unwrap();
    ok(&mbfr(
        &[
            "montecarlo",
            "butterfly",
            "--n",
            "2000",
            "--sims",
            "2",
            "--steps",
            "2",
            "--out",
            "mc",
            "--quiet",
        ],
        dir.path(),
    ));
    let runs = std::fs::read_to_string(dir.path().join("mc/runs.csv")).unwrap();
    assert_eq!(runs.lines().count(), 3);
    assert!(dir.path().join("mc/summary.json").exists());

    generate(dir.path(), "400", "3");
    let args = [
        "evaluate",
        "--input",
        "b.csv",
        "--features",
        "X1,X2",
        "--features",
        "I6",
        "--splits",
        "2",
        "--folds",
        "3",
        "--retrains",
        "3",
        "--max-hidden",
        "30",
        "--out",
        "ev",
    ];
    let text = ok(&mbfr(&args, dir.path()));
    assert!(text.starts_with("dataset,subset,n_features,mean_re,sd_re\nb,X1+X2,2,"));
    let csv = std::fs::read_to_string(dir.path().join("ev/evaluation.csv")).unwrap();
    assert_eq!(csv, text);
    assert_eq!(ok(&mbfr(&args, dir.path())), text);
}

#[test]
fn failures_map_to_exit_codes_with_one_line_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    generate(dir.path(), "200", "4");
    std::fs::write(dir.path().join("bad.csv"), "a,b\n1,x\n2,3\n").unwrap();
    let cases: [(&[&str], i32); 6] = [
        (&["select", "--bogus"], 1),
        (&["estimate-id", "--input", "b.csv", "--scales", "4,2"], 1),
        (&["select", "--input", "missing.csv"], 2),
        (&["select", "--input", "bad.csv"], 2),
        (&["select", "--input", "b.csv", "--target", "Z"], 2),
        (
            &["estimate-id", "--input", "b.csv", "--scales", "5000,6000"],
            3,
        ),
    ];
    for (args, code) in cases {
        let out = mbfr(args, dir.path());
        assert_eq!(out.status.code(), Some(code), "{args:?}");
        let err = String::from_utf8(out.stderr).unwrap();
        assert_eq!(err.lines().count(), 1, "{err}");
        assert!(err.starts_with("mbfr: error["), "{err}");
    }
}

#[test]
fn run_returns_exit_codes_in_process() {
    assert_eq!(mbfr::cli::run(["mbfr", "--help"]), 0);
    assert_eq!(mbfr::cli::run(["mbfr", "frobnicate"]), 1);
}
