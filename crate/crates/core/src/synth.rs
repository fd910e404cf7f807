//! Seeded synthetic molecules for tests, demos and the bundled example dataset.

use std::collections::BTreeMap;

use rand::Rng as _;

use crate::chemio::{Dataset, DatasetMeta, Element, Property, Scaling, Structure, TargetSpec};
use crate::descriptors::{coulomb_descriptor, CoulombConfig, CoulombReduction};
use crate::error::Result;
use crate::pipeline::{Repeats, SplitSpec};
use crate::rng::{stream_rng, Rng};

const MOLECULE_STREAM: u64 = 0x6d6f_6c73;
const WEIGHT_STREAM: u64 = 0x7765_6967;
const MIN_DISTANCE: f64 = 0.9;

fn hcno() -> Vec<Element> {
    ["H", "C", "N", "O"]
        .iter()
        .map(|s| Element::from_symbol(s).expect("known symbol"))
        .collect()
}

/// Rejection-samples positions in a cube sized for `n` atoms so that no two
/// atoms are closer than 0.9 Å.
pub fn random_molecule(rng: &mut Rng, n: usize, elements: &[Element]) -> Structure {
    let side = 1.6 * (n as f64).cbrt() + 0.5;
    let mut positions: Vec<[f64; 3]> = Vec::with_capacity(n);
    while positions.len() < n {
        let p = [
            rng.random_range(0.0..side),
            rng.random_range(0.0..side),
            rng.random_range(0.0..side),
        ];
        let clear = positions.iter().all(|q| {
            let d2: f64 = (0..3).map(|k| (p[k] - q[k]).powi(2)).sum();
            d2 >= MIN_DISTANCE * MIN_DISTANCE
        });
        if clear {
            positions.push(p);
        }
    }
    let species = (0..n).map(|_| elements[rng.random_range(0..elements.len())]).collect();
    Structure::molecule(species, positions).expect("consistent lengths")
}

/// `count` molecules over H, C, N, O with atom counts drawn from `min_atoms..=max_atoms`.
pub fn random_molecules(count: usize, min_atoms: usize, max_atoms: usize, seed: u64) -> Vec<Structure> {
    let mut rng = stream_rng(seed, MOLECULE_STREAM);
    let elements = hcno();
    (0..count)
        .map(|_| {
            let n = rng.random_range(min_atoms..=max_atoms);
            random_molecule(&mut rng, n, &elements)
        })
        .collect()
}

/// Additive toy energy: per-element offsets plus a short-ranged pair term.
pub fn toy_energy(s: &Structure) -> f64 {
    let offset = |e: Element| match e.symbol() {
        "H" => -0.5,
        "C" => -37.8,
        "N" => -54.6,
        "O" => -75.1,
        _ => 0.0,
    };
    let mut e: f64 = s.elements.iter().map(|&el| offset(el)).sum();
    for i in 0..s.len() {
        for j in (i + 1)..s.len() {
            let r: f64 = (0..3).map(|k| (s.positions[i][k] - s.positions[j][k]).powi(2)).sum::<f64>().sqrt();
            let z = f64::from(s.elements[i].number()) * f64::from(s.elements[j].number());
            e += 0.05 * z.sqrt() * (-(r - 1.2)).exp();
        }
    }
    e
}

fn meta_for(name: &str, source: &str, target: &str, scaling: Scaling, split: SplitSpec) -> DatasetMeta {
    let mut meta = DatasetMeta::new(name, source);
    meta.elements = hcno();
    meta.elements.sort_by(|a, b| a.symbol().cmp(b.symbol()));
    meta.targets = BTreeMap::from([(
        target.to_string(),
        TargetSpec {
            scaling,
            units: None,
        },
    )]);
    meta.split = split;
    meta
}

/// The small example dataset shipped in `data/`: 60 molecules with 3 to 6
/// atoms and an additive toy energy, evaluated on three training fractions.
pub fn example_dataset() -> Dataset {
    let structures: Vec<Structure> = random_molecules(60, 3, 6, 2024)
        .into_iter()
        .map(|s| {
            let e = toy_energy(&s);
            s.with_property("energy", Property::Number(e))
        })
        .collect();
    let mut split = SplitSpec::sequential(vec![0.25, 0.5, 0.75], 17);
    split.n_repeats = Repeats::Fixed(2);
    let meta = meta_for("synthetic", "synthetic.xyz", "energy", Scaling::Additive, split);
    Dataset::new(structures, meta).expect("synthetic data is valid")
}

/// Molecules whose intensive target is an exact linear function (weights
/// uniform in [-1, 1], plus an offset) of the sorted Coulomb vector padded to
/// `max_atoms`.
pub fn linear_coulomb_dataset(count: usize, min_atoms: usize, max_atoms: usize, seed: u64) -> Result<Dataset> {
    let config = CoulombConfig {
        max_atoms,
        reduction: CoulombReduction::SortedL2,
    };
    let width = max_atoms * (max_atoms + 1) / 2;
    let mut rng = stream_rng(seed, WEIGHT_STREAM);
    let weights: Vec<f64> = (0..width).map(|_| rng.random_range(-1.0..1.0)).collect();
    let offset = rng.random_range(-1.0..1.0);
    let structures = random_molecules(count, min_atoms, max_atoms, seed)
        .into_iter()
        .map(|s| {
            let x = coulomb_descriptor::<f64>(&s, &config)?;
            let y = offset + x.iter().zip(&weights).map(|(a, b)| a * b).sum::<f64>();
            Ok(s.with_property("y", Property::Number(y)))
        })
        .collect::<Result<Vec<_>>>()?;
    let split = SplitSpec::sequential(vec![0.1, 0.3, 0.5, 0.7, 0.9], seed);
    let meta = meta_for("linear-coulomb", "linear_coulomb.xyz", "y", Scaling::Intensive, split);
    Dataset::new(structures, meta)
}
