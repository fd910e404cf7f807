use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use benchpipe::bench::{read_results, write_results};
use benchpipe::chemio::parse_extxyz;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_benchpipe"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).env_remove("BENCHPIPE_CACHE").output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn bundled_meta() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/data/synthetic_meta.json")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn benchmark(dir: &Path, models: &str, name: &str) -> PathBuf {
    let out = dir.join(name);
    let o = run(&["run", "--meta", s(&bundled_meta()), "--models", models, "--mode", "benchmark", "--seed", "3", "--output", s(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    out
}

#[test]
fn csv_to_xyz_to_meta() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("act.csv");
    std::fs::write(&csv, "id,f1,f2,activity\na,0.1,1.0,5.5\nb,0.2,2.0,6.5\nc,0.3,3.0,7.25\n").unwrap();
    let xyz = dir.path().join("act.xyz");
    let o = run(&["input", "--from_csv", s(&csv), "--output", s(&xyz)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let structures = parse_extxyz(&std::fs::read_to_string(&xyz).unwrap()).unwrap();
    assert_eq!(structures.len(), 3);
    assert_eq!(structures[2].number("activity"), Some(7.25));

    let meta = dir.path().join("meta.json");
    assert_eq!(code(&run(&["meta", "--extxyz", s(&xyz), "--meta", s(&meta)])), 0);
    let first = std::fs::read(&meta).unwrap();
    assert_eq!(code(&run(&["meta", "--extxyz", s(&xyz), "--meta", s(&meta)])), 0);
    assert_eq!(first, std::fs::read(&meta).unwrap());
    let text = String::from_utf8(first).unwrap();
    assert!(text.contains(r#""source_path": "act.xyz""#), "{text}");
    assert!(text.contains(r#""activity""#));
    let d = benchpipe::chemio::Dataset::load(&meta).unwrap();
    assert_eq!(d.meta.features, vec!["feature.f1", "feature.f2"]);
}

#[test]
fn input_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("t.csv");
    std::fs::write(&csv, "id,f1,y\na,1,2\n").unwrap();
    let out = dir.path().join("t.xyz");
    assert_eq!(code(&run(&["input", "--from-csv", s(&csv), "--output", s(&out), "--map", "feature=f1,target=energy"])), 2);
    std::fs::write(&csv, "").unwrap();
    assert_eq!(code(&run(&["input", "--from-csv", s(&csv), "--output", s(&out)])), 2);
    assert_eq!(code(&run(&["input", "--from-csv", s(&dir.path().join("missing.csv")), "--output", s(&out)])), 2);
    assert_eq!(code(&run(&["input", "--bogus"])), 2);
}

#[test]
fn run_plot_analyze() {
    let dir = tempfile::tempdir().unwrap();
    let results = benchmark(dir.path(), "cm.*", "a.jsonl.gz");
    let again = benchmark(dir.path(), "cm.*", "b.jsonl.gz");
    assert_eq!(std::fs::read(&results).unwrap(), std::fs::read(&again).unwrap());
    let records = read_results(&results).unwrap();
    assert!(records.iter().any(|r| r.is_ok()));
    let models: std::collections::BTreeSet<_> = records.iter().map(|r| r.model.clone()).collect();
    assert_eq!(models.len(), 3);

    let svg = dir.path().join("lc.svg");
    assert_eq!(code(&run(&["plot", "--input", s(&results), "--output", s(&svg)])), 0);
    let text = std::fs::read_to_string(&svg).unwrap();
    assert_eq!(text.matches("<polyline").count(), 3);
    let csv = std::fs::read_to_string(dir.path().join("lc.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 3 * 3);

    let kernel = dir.path().join("k.csv");
    assert_eq!(code(&run(&["analyze", "--input", s(&results), "--mode", "model-kernel", "--output", s(&kernel)])), 0);
    let k = std::fs::read_to_string(&kernel).unwrap();
    assert_eq!(k.lines().count(), 4);
    assert!(k.starts_with("label,cm_sorted_krr,cm_sorted_rr,cm_spectral_krr\n"));

    let map = dir.path().join("map.csv");
    assert_eq!(code(&run(&["analyze", "--input", s(&results), "--mode", "kpca", "--output", s(&map)])), 0);
    let m = std::fs::read_to_string(&map).unwrap();
    assert!(m.starts_with("label,pc1,pc2,rmse\n"), "{m}");
}

#[test]
fn empty_conditions_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.gz");
    assert_eq!(code(&run(&["run", "--meta", s(&bundled_meta()), "--models", "^$", "--output", s(&out)])), 3);

    let results = benchmark(dir.path(), "cm_sorted_rr", "one.gz");
    let o = dir.path().join("x.csv");
    assert_eq!(code(&run(&["analyze", "--input", s(&results), "--mode", "kpca", "--output", s(&o)])), 3);

    let empty = dir.path().join("empty.gz");
    write_results(&[], &empty).unwrap();
    assert_eq!(code(&run(&["plot", "--input", s(&empty), "--output", s(&dir.path().join("p.svg"))])), 3);
}

#[test]
fn run_input_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.gz");
    assert_eq!(code(&run(&["run", "--meta", s(&bundled_meta()), "--models", "(", "--output", s(&out)])), 2);
    let missing = dir.path().join("nope.json");
    assert_eq!(code(&run(&["run", "--meta", s(&missing), "--models", "cm.*", "--output", s(&out)])), 2);
    assert_eq!(code(&run(&["run", "--meta", s(&bundled_meta()), "--mode", "train", "--output", s(&out)])), 2);
}

#[test]
fn cache_env_is_honoured() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("cache");
    let out = dir.path().join("r.gz");
    let o = bin()
        .args(["run", "--meta", s(&bundled_meta()), "--models", "cm_sorted_rr", "--output", s(&out), "--jobs", "2"])
        .env("BENCHPIPE_CACHE", &cache)
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(std::fs::read_dir(&cache).unwrap().count() > 0);
}
