use std::sync::Arc;

use benchpipe::chemio::{csv_to_dataset, ColumnMap, Dataset, Element, Property, Structure};
use benchpipe::pipeline::{
    build_pipeline, Binding, fit, map, precompute, DiskCache, NodeSpec, PipelineSpec, Split, Stream, View,
};
use benchpipe::regress::{kernel_dot, krr_fit};
use benchpipe::synth::example_dataset;
use benchpipe::Error;
use ndarray::{Array2, Axis};
use serde_json::json;

fn linear_table(n: usize) -> Arc<Dataset> {
    let mut csv = String::from("id,f1,f2,f3,y\n");
    for i in 0..n {
        let (a, b, c) = ((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos(), (i % 7) as f64 / 7.0);
        let y = 2.0 * a - b + 0.5 * c + 1.0;
        csv.push_str(&format!("{i},{a},{b},{c},{y}\n"));
    }
    let headers: Vec<String> = ["id", "f1", "f2", "f3", "y"].iter().map(|s| s.to_string()).collect();
    Arc::new(csv_to_dataset(&csv, &ColumnMap::infer(&headers)).unwrap())
}

fn features_ridge() -> PipelineSpec {
    PipelineSpec {
        nodes: vec![
            NodeSpec::new("input", "input"),
            NodeSpec::new("features", "features").input("dataset", "input.dataset"),
            NodeSpec::new("ridge", "ridge")
                .input("X", "features.X")
                .input("y", "input.y")
                .input("sizes", "input.sizes")
                .param("lambda", 1e-10),
        ],
        output: "ridge.yhat".into(),
    }
}

fn halves(n: usize) -> Split {
    Split::new((0..n).step_by(2).collect(), (1..n).step_by(2).collect(), "halves")
}

#[test]
fn ridge_recovers_linear_features() {
    let d = linear_table(40);
    let pipeline = build_pipeline(&features_ridge()).unwrap();
    let stream = Stream::new(d.clone());
    let split = halves(40);
    let fitted = fit(&pipeline, &stream, &View::train(&split.train), &Binding::new()).unwrap();
    let pred = map(&pipeline, &fitted, &stream, &View::test(&split.test, &split.train)).unwrap();
    let y = d.target_values("y").unwrap();
    for (p, &i) in pred.iter().zip(&split.test) {
        assert!((p - y[i]).abs() < 1e-6, "{p} vs {}", y[i]);
    }
    let again = map(&pipeline, &fitted, &stream, &View::test(&split.test, &split.train)).unwrap();
    assert_eq!(
        pred.iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
        again.iter().map(|v| v.to_bits()).collect::<Vec<_>>()
    );
}

#[test]
fn kernel_columns_follow_training_rows() {
    let d = Arc::new(example_dataset());
    let spec = PipelineSpec {
        nodes: vec![
            NodeSpec::new("input", "input"),
            NodeSpec::new("cm", "coulomb").input("dataset", "input.dataset"),
            NodeSpec::new("kernel", "kernel").input("X", "cm.X").param("nu", 2),
            NodeSpec::new("krr", "krr")
                .input("K", "kernel.K")
                .input("y", "input.y")
                .input("sizes", "input.sizes")
                .param("lambda", 1e-3)
                .param("scaling", "intensive"),
        ],
        output: "krr.yhat".into(),
    };
    let pipeline = build_pipeline(&spec).unwrap();
    let stream = Stream::new(d.clone());
    precompute(&pipeline, &stream, None).unwrap();
    let train: Vec<usize> = (0..d.len()).filter(|i| i % 3 != 0).collect();
    let test: Vec<usize> = (0..d.len()).filter(|i| i % 3 == 0).collect();
    let fitted = fit(&pipeline, &stream, &View::train(&train), &Binding::new()).unwrap();
    let pred = map(&pipeline, &fitted, &stream, &View::test(&test, &train)).unwrap();

    // independent path: descriptor rows, explicit kernels, direct solve
    let config = benchpipe::descriptors::CoulombConfig {
        max_atoms: d.structures.iter().map(|s| s.len()).max().unwrap(),
        reduction: benchpipe::descriptors::CoulombReduction::SortedL2,
    };
    let rows: Vec<_> = d
        .structures
        .iter()
        .map(|s| benchpipe::descriptors::coulomb_descriptor::<f64>(s, &config).unwrap())
        .collect();
    let x = Array2::from_shape_fn((rows.len(), rows[0].len()), |(i, j)| rows[i][j]);
    let xtr = x.select(Axis(0), &train);
    let xte = x.select(Axis(0), &test);
    let y = d.target_values("energy").unwrap().select(Axis(0), &train);
    let model = krr_fit(kernel_dot(xtr.view(), xtr.view(), 2).unwrap().view(), y.view(), 1e-3).unwrap();
    let want = model.predict(kernel_dot(xte.view(), xtr.view(), 2).unwrap().view()).unwrap();
    for (a, b) in pred.iter().zip(want.iter()) {
        assert!((a - b).abs() <= 1e-9 * (1.0 + b.abs()), "{a} vs {b}");
    }
}

#[test]
fn warm_cache_skips_descriptors() {
    let dir = tempfile::tempdir().unwrap();
    let d = Arc::new(example_dataset());
    let spec = PipelineSpec {
        nodes: vec![
            NodeSpec::new("input", "input"),
            NodeSpec::new("soap", "soap").input("dataset", "input.dataset").param("heuristic", "minimal"),
            NodeSpec::new("pool", "pool").input("atoms", "soap.atoms"),
            NodeSpec::new("ridge", "ridge")
                .input("X", "pool.X")
                .input("y", "input.y")
                .input("sizes", "input.sizes")
                .space("lambda", [1e-3, 1.0]),
        ],
        output: "ridge.yhat".into(),
    };
    let pipeline = build_pipeline(&spec).unwrap();
    let cache = DiskCache::open(dir.path()).unwrap();

    let cold = Stream::new(d.clone());
    let report = precompute(&pipeline, &cold, Some(&cache)).unwrap();
    assert_eq!(cold.counters().descriptor_evaluations(), d.len());
    assert!(report.persisted > 0);

    let warm = Stream::new(d.clone());
    let report = precompute(&pipeline, &warm, Some(&cache)).unwrap();
    assert_eq!(warm.counters().descriptor_evaluations(), 0);
    assert!(report.computed.is_empty(), "{report:?}");

    let split = halves(d.len());
    let binding: Binding = [("ridge.lambda".to_string(), json!(1.0))].into_iter().collect();
    let run = |s: &Stream| {
        let f = fit(&pipeline, s, &View::train(&split.train), &binding).unwrap();
        map(&pipeline, &f, s, &View::test(&split.test, &split.train)).unwrap()
    };
    assert_eq!(run(&cold), run(&warm));
    assert_eq!(warm.counters().descriptor_evaluations(), 0);
}

#[test]
fn failure_names_transform_and_sample() {
    let h = Element::from_symbol("H").unwrap();
    let structures = vec![
        Structure::molecule(vec![h, h], vec![[0.0; 3], [0.74, 0.0, 0.0]]).unwrap(),
        Structure::molecule(vec![h, h, h], vec![[0.0; 3], [0.9, 0.0, 0.0], [0.0, 0.9, 0.0]]).unwrap(),
        Structure::molecule(vec![h], vec![[0.0; 3]]).unwrap(),
    ]
    .into_iter()
    .map(|s| s.with_property("E", Property::Number(1.0)))
    .collect::<Vec<_>>();
    let meta = benchpipe::chemio::generate_metadata(&structures, "t", "t.xyz").unwrap();
    let d = Arc::new(Dataset::new(structures, meta).unwrap());
    let spec = PipelineSpec {
        nodes: vec![
            NodeSpec::new("input", "input"),
            NodeSpec::new("cm", "coulomb").input("dataset", "input.dataset").param("max_atoms", 2),
            NodeSpec::new("ridge", "ridge")
                .input("X", "cm.X")
                .input("y", "input.y")
                .input("sizes", "input.sizes"),
        ],
        output: "ridge.yhat".into(),
    };
    let pipeline = build_pipeline(&spec).unwrap();
    let err = precompute(&pipeline, &Stream::new(d), None).unwrap_err();
    assert!(
        matches!(&err, Error::Transform { transform, sample: Some(1), .. } if transform == "cm"),
        "{err:?}"
    );
    assert!(err.to_string().starts_with("transform 'cm' failed at sample 1"));
}
