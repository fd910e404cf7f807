use std::sync::Arc;

use benchpipe::bench::{
    assemble_learning_curves, read_results, run_benchmark, write_results, BenchConfig, ModelLibrary, Status,
};
use benchpipe::chemio::Task;
use benchpipe::synth::example_dataset;

#[test]
fn full_library_on_example_data() {
    let d = Arc::new(example_dataset());
    let lib = ModelLibrary::standard();
    let models = lib.select(".*").unwrap();
    let run = run_benchmark(&models, d.clone(), &BenchConfig::default()).unwrap();

    let skipped: Vec<_> = run.skipped.iter().map(|s| s.model.as_str()).collect();
    assert_eq!(skipped, vec!["feat_rr", "feat_krr"]);
    let ran = models.len() - skipped.len();
    assert_eq!(run.records.len(), ran * 6);
    for r in &run.records {
        assert_eq!(r.status, Status::Ok, "{}: {:?}", r.model, r.error);
        assert_eq!(r.pred.len() + r.n_train, d.len());
        assert!(r.metric("rmse").unwrap() >= r.metric("mae").unwrap());
    }
    let sorted = run
        .records
        .windows(2)
        .all(|w| (&w[0].model, &w[0].split) < (&w[1].model, &w[1].split));
    assert!(sorted);

    let curves = assemble_learning_curves(&run.records);
    assert_eq!(curves.len(), ran);
    assert!(curves.iter().all(|c| c.points.len() == 3));
}

#[test]
fn results_are_reproducible() {
    let d = Arc::new(example_dataset());
    let lib = ModelLibrary::standard();
    let models = lib.select("^cm_").unwrap();
    let dir = tempfile::tempdir().unwrap();
    let write = |name: &str| {
        let run = run_benchmark(&models, d.clone(), &BenchConfig::default()).unwrap();
        let path = dir.path().join(name);
        write_results(&run.records, &path).unwrap();
        assert_eq!(read_results(&path).unwrap(), run.records);
        std::fs::read(path).unwrap()
    };
    assert_eq!(write("a.gz"), write("b.gz"));
}

#[test]
fn seed_changes_splits() {
    let d = Arc::new(example_dataset());
    let a = BenchConfig::default().resolve_splits(&d).unwrap();
    let b = BenchConfig {
        seed: Some(99),
        ..Default::default()
    }
    .resolve_splits(&d)
    .unwrap();
    assert_eq!(a.len(), b.len());
    assert_ne!(a, b);
}

#[test]
fn classification_records_carry_auc() {
    let mut d = example_dataset();
    let median = {
        let mut y = d.target_values("energy").unwrap().to_vec();
        y.sort_by(f64::total_cmp);
        y[y.len() / 2]
    };
    for s in &mut d.structures {
        let e = s.number("energy").unwrap();
        s.properties
            .insert("energy".into(), benchpipe::chemio::Property::Number(if e > median { 1.0 } else { 0.0 }));
    }
    d.meta.task = Task::Classification;
    let lib = ModelLibrary::standard();
    let run = run_benchmark(&lib.select("cm_sorted_krr").unwrap(), Arc::new(d), &BenchConfig::default()).unwrap();
    for r in &run.records {
        let auc = r.metric("roc_auc").unwrap();
        assert!((0.0..=1.0).contains(&auc));
    }
}
