use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_hhl-depth"));
    c.env_remove("HHL_DEPTH_CONFIG");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn ok(args: &[&str]) {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// generate -> depth -> featurize in `dir`, returning the feature CSV path.
fn front_half(dir: &Path, sizes: &str) -> PathBuf {
    let corpus = dir.join("corpus.jsonl");
    let depths = dir.join("depths.jsonl");
    let data = dir.join("data.csv");
    ok(&["generate", "--seed", "7", "--sizes", sizes, "--per-config", "6", "--out", s(&corpus)]);
    ok(&["depth", "--jobs", "2", "--in", s(&corpus), "--out", s(&depths)]);
    ok(&["featurize", "--variant", "d1", "--cutoff", "quantile:0.476", "--in", s(&depths), "--out", s(&data)]);
    data
}

#[test]
fn front_half_is_byte_identical_across_runs() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    front_half(a.path(), "2,4");
    front_half(b.path(), "2,4");
    for f in ["corpus.jsonl", "depths.jsonl", "data.csv"] {
        assert_eq!(
            std::fs::read(a.path().join(f)).unwrap(),
            std::fs::read(b.path().join(f)).unwrap(),
            "{f} differs"
        );
    }
    let header = std::fs::read_to_string(a.path().join("data.csv")).unwrap();
    assert!(header.lines().next().unwrap().ends_with("cond_kappa,label,depth,id"));
}

#[test]
fn raw_variant_on_larger_matrices_is_a_data_error() {
    let d = tempfile::tempdir().unwrap();
    let corpus = d.path().join("c.jsonl");
    let depths = d.path().join("d.jsonl");
    ok(&["generate", "--sizes", "8", "--per-config", "1", "--out", s(&corpus)]);
    ok(&["depth", "--in", s(&corpus), "--out", s(&depths)]);
    let out = run(&["featurize", "--variant", "d4", "--in", s(&depths), "--out", s(&d.path().join("x.csv"))]);
    assert_eq!(out.status.code(), Some(2));
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("4x4") && msg.contains("8x8"), "{msg}");
}

#[test]
fn train_evaluate_and_curve() {
    let d = tempfile::tempdir().unwrap();
    let corpus = d.path().join("corpus.jsonl");
    let depths = d.path().join("depths.jsonl");
    ok(&["generate", "--sizes", "2,4", "--per-config", "60", "--out", s(&corpus)]);
    ok(&["depth", "--in", s(&corpus), "--out", s(&depths)]);
    let (tr, te) = (d.path().join("train.csv"), d.path().join("test.csv"));
    ok(&[
        "featurize", "--variant", "d2", "--in", s(&depths), "--out", s(&d.path().join("all.csv")),
        "--train-out", s(&tr), "--test-out", s(&te),
    ]);
    let model = d.path().join("m.json");
    ok(&["--set", "max_epochs=10", "train", "--in", s(&tr), "--model", s(&model), "--tune-threshold"]);
    let report = d.path().join("r.csv");
    ok(&["evaluate", "--model", s(&model), "--in", s(&te), "--out", s(&report), "--name", "d2"]);
    let text = std::fs::read_to_string(&report).unwrap();
    let row = text.lines().nth(1).unwrap();
    assert!(row.starts_with("d2,Test,"), "{row}");
    let curve = d.path().join("curve.csv");
    ok(&["--set", "max_epochs=3", "curve", "--folds", "3", "--in", s(&tr), "--out", s(&curve)]);
    assert_eq!(std::fs::read_to_string(&curve).unwrap().lines().count(), 11);

    // a model trained on other features is rejected
    let out = run(&["evaluate", "--model", s(&model), "--in", s(&d.path().join("all.csv")), "--out", s(&report)]);
    assert!(out.status.success());
    std::fs::write(d.path().join("bad.json"), "{\"schema_version\": 1").unwrap();
    let out = run(&["evaluate", "--model", s(&d.path().join("bad.json")), "--in", s(&te), "--out", s(&report)]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn config_precedence_and_validation() {
    let d = tempfile::tempdir().unwrap();
    let cfg = d.path().join("p.cfg");
    std::fs::write(&cfg, "# desk run\nsizes = 2\nper_config = 3\nseed = 1\n").unwrap();
    let count = |out: &Path| std::fs::read_to_string(out).unwrap().lines().count();

    let a = d.path().join("a.jsonl");
    ok(&["--config", s(&cfg), "generate", "--out", s(&a)]);
    assert_eq!(count(&a), 6);
    let b = d.path().join("b.jsonl");
    ok(&["--config", s(&cfg), "--set", "per_config=4", "generate", "--out", s(&b)]);
    assert_eq!(count(&b), 8);
    let c = d.path().join("c.jsonl");
    ok(&["--config", s(&cfg), "--set", "per_config=4", "generate", "--per-config", "5", "--out", s(&c)]);
    assert_eq!(count(&c), 10);

    // the environment variable supplies the default config path
    let e = d.path().join("e.jsonl");
    let out = bin().env("HHL_DEPTH_CONFIG", &cfg).args(["generate", "--out", s(&e)]).output().unwrap();
    assert!(out.status.success());
    assert_eq!(std::fs::read(&e).unwrap(), std::fs::read(&a).unwrap());

    std::fs::write(&cfg, "sizes = 2\ncolour = blue\n").unwrap();
    let out = run(&["--config", s(&cfg), "generate", "--out", s(&e)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("colour"));
    assert_eq!(run(&["generate"]).status.code(), Some(1));
    assert_eq!(run(&["--set", "sizes=3", "generate", "--out", s(&e)]).status.code(), Some(1));
    assert_eq!(run(&["--jobs", "0", "generate", "--out", s(&e)]).status.code(), Some(1));
}

#[test]
fn help_documents_every_flag() {
    for (cmd, flags) in [
        ("generate", &["--out", "--seed", "--sizes", "--per-config"][..]),
        ("depth", &["--in", "--out", "--jobs"]),
        ("featurize", &["--in", "--out", "--variant", "--cutoff", "--train-out", "--test-out"]),
        ("train", &["--in", "--model", "--tune-threshold", "--seed"]),
        ("evaluate", &["--model", "--in", "--out", "--name", "--split"]),
        ("iris", &["--iris", "--pool", "--count", "--match", "--out-dir"]),
        ("curve", &["--in", "--out", "--folds"]),
    ] {
        let out = run(&[cmd, "--help"]);
        assert_eq!(out.status.code(), Some(0));
        let text = String::from_utf8_lossy(&out.stdout);
        for f in flags.iter().chain(&["--config", "--set"]) {
            assert!(text.contains(f), "{cmd} --help lacks {f}");
        }
    }
}

#[test]
fn inputs_are_not_modified() {
    let d = tempfile::tempdir().unwrap();
    let data = front_half(d.path(), "2");
    let depths = d.path().join("depths.jsonl");
    let before = (std::fs::read(&depths).unwrap(), std::fs::read(&data).unwrap());
    ok(&["featurize", "--in", s(&depths), "--out", s(&d.path().join("again.csv"))]);
    ok(&["--set", "max_epochs=2", "train", "--in", s(&data), "--model", s(&d.path().join("m.json"))]);
    assert_eq!(before, (std::fs::read(&depths).unwrap(), std::fs::read(&data).unwrap()));
    assert_eq!(std::fs::read(d.path().join("again.csv")).unwrap(), before.1);
}

#[test]
fn iris_case_study_writes_all_outputs() {
    let d = tempfile::tempdir().unwrap();
    let corpus = d.path().join("corpus.jsonl");
    let depths = d.path().join("depths.jsonl");
    ok(&["generate", "--sizes", "2,4,8,16", "--per-config", "8", "--out", s(&corpus)]);
    ok(&["depth", "--in", s(&corpus), "--out", s(&depths)]);
    let out_dir = d.path().join("iris");
    ok(&[
        "--set", "max_epochs=5", "iris", "--pool", s(&depths),
        "--count", "60", "--match", "--out-dir", s(&out_dir),
    ]);
    let report = std::fs::read_to_string(out_dir.join("report.csv")).unwrap();
    let splits: Vec<&str> = report.lines().skip(1).map(|l| l.split(',').nth(1).unwrap()).collect();
    assert_eq!(splits, ["Validation", "Test (iris)", "Validation", "Test (iris)"]);
    let hist = std::fs::read_to_string(out_dir.join("histogram.csv")).unwrap();
    assert_eq!(hist.lines().count(), 1 + 4 * 5);
    assert_eq!(std::fs::read_to_string(out_dir.join("iris.jsonl")).unwrap().lines().count(), 60);
    assert_eq!(std::fs::read_to_string(out_dir.join("selected.jsonl")).unwrap().lines().count(), 60);
}
