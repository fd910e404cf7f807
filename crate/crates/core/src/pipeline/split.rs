//! Train/test split generation. Splits depend only on `(spec, n)`, so every
//! model benchmarked under the same spec sees the same index sets.

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::rng::stream_rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitKind {
    Random,
    Sequential,
    KFold,
}

impl SplitKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SplitKind::Random => "random",
            SplitKind::Sequential => "sequential",
            SplitKind::KFold => "kfold",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Repeats {
    /// `⌊√(4 / (f(1−f)))⌋` repeats per training fraction `f`.
    Auto,
    Fixed(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitSpec {
    pub kind: SplitKind,
    /// Training fractions in (0, 1), ascending. Unused for k-fold.
    pub fractions: Vec<f64>,
    pub n_repeats: Repeats,
    pub seed: u64,
    /// Fold count for k-fold splitting.
    pub folds: usize,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec::for_kind(SplitKind::Sequential)
    }
}

impl SplitSpec {
    pub fn for_kind(kind: SplitKind) -> SplitSpec {
        match kind {
            SplitKind::Sequential => SplitSpec {
                kind,
                fractions: (1..=9).map(|i| i as f64 / 10.0).collect(),
                n_repeats: Repeats::Auto,
                seed: 0,
                folds: 5,
            },
            SplitKind::Random => SplitSpec {
                kind,
                fractions: vec![0.8],
                n_repeats: Repeats::Fixed(1),
                seed: 0,
                folds: 5,
            },
            SplitKind::KFold => SplitSpec {
                kind,
                fractions: Vec::new(),
                n_repeats: Repeats::Fixed(1),
                seed: 0,
                folds: 5,
            },
        }
    }

    pub fn sequential(fractions: Vec<f64>, seed: u64) -> SplitSpec {
        SplitSpec {
            fractions,
            seed,
            ..SplitSpec::for_kind(SplitKind::Sequential)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.kind == SplitKind::KFold {
            if self.folds < 2 {
                return Err(Error::Invalid(format!("k-fold needs k >= 2, got {}", self.folds)));
            }
        } else {
            if self.fractions.is_empty() {
                return Err(Error::Invalid("split spec lists no training fractions".into()));
            }
            if let Some(f) = self.fractions.iter().find(|f| !(**f > 0.0 && **f < 1.0)) {
                return Err(Error::Invalid(format!("training fraction {f} outside (0, 1)")));
            }
            if self.fractions.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Invalid("training fractions must be strictly ascending".into()));
            }
        }
        if self.n_repeats == Repeats::Fixed(0) {
            return Err(Error::Invalid("n_repeats must be positive".into()));
        }
        Ok(())
    }

    pub fn repeats_for(&self, fraction: f64) -> usize {
        match self.n_repeats {
            Repeats::Auto => auto_repeats(fraction),
            Repeats::Fixed(n) => n,
        }
    }
}

/// `⌊√(4 / (f(1−f)))⌋`. A small guard absorbs round-off at exact squares
/// (f = 0.2 gives 24.999999999999996 under the square root in binary floating point).
pub fn auto_repeats(fraction: f64) -> usize {
    let v = (4.0 / (fraction * (1.0 - fraction))).sqrt();
    (v + 1e-9).floor() as usize
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
    pub tag: String,
}

impl Split {
    pub fn new(mut train: Vec<usize>, mut test: Vec<usize>, tag: impl Into<String>) -> Split {
        train.sort_unstable();
        test.sort_unstable();
        Split {
            train,
            test,
            tag: tag.into(),
        }
    }

    pub fn fraction(&self) -> f64 {
        self.train.len() as f64 / (self.train.len() + self.test.len()) as f64
    }

    pub fn validate(&self, sample_count: usize) -> Result<()> {
        if self.train.is_empty() {
            return Err(Error::Invalid(format!("split '{}' has an empty training set", self.tag)));
        }
        if let Some(i) = self.train.iter().chain(&self.test).find(|&&i| i >= sample_count) {
            return Err(Error::Invalid(format!(
                "split '{}' index {i} out of range for {sample_count} samples",
                self.tag
            )));
        }
        let mut seen = vec![false; sample_count];
        for &i in self.train.iter().chain(&self.test) {
            if seen[i] {
                return Err(Error::Invalid(format!("split '{}' repeats index {i}", self.tag)));
            }
            seen[i] = true;
        }
        Ok(())
    }
}

fn permutation(n: usize, seed: u64, stream: u64) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut stream_rng(seed, stream));
    idx
}

/// Generates the outer train/test splits for `n` samples.
pub fn generate_splits(spec: &SplitSpec, n: usize) -> Result<Vec<Split>> {
    spec.validate()?;
    if n < 2 {
        return Err(Error::Invalid(format!("cannot split {n} sample(s)")));
    }
    let mut out = Vec::new();
    match spec.kind {
        SplitKind::Sequential | SplitKind::Random => {
            let prefix = if spec.kind == SplitKind::Sequential { "seq" } else { "rnd" };
            for (fi, &f) in spec.fractions.iter().enumerate() {
                let n_train = (f * n as f64).round() as usize;
                if n_train == 0 || n_train >= n {
                    return Err(Error::Invalid(format!(
                        "degenerate fraction {f}: {n_train} of {n} samples in the training set"
                    )));
                }
                if n_train < 2 {
                    return Err(Error::Invalid(format!(
                        "degenerate fraction {f}: training set of {n_train} sample(s)"
                    )));
                }
                for r in 0..spec.repeats_for(f) {
                    let perm = permutation(n, spec.seed, ((fi as u64) << 32) | r as u64);
                    let (train, test) = perm.split_at(n_train);
                    out.push(Split::new(train.to_vec(), test.to_vec(), format!("{prefix}-f{f:.3}-r{r:03}")));
                }
            }
        }
        SplitKind::KFold => {
            let k = spec.folds;
            if k > n {
                return Err(Error::Invalid(format!("{k} folds for {n} samples")));
            }
            let repeats = match spec.n_repeats {
                Repeats::Auto => 1,
                Repeats::Fixed(r) => r,
            };
            for r in 0..repeats {
                let perm = permutation(n, spec.seed, (u32::MAX as u64) << 32 | r as u64);
                for (i, (train, test)) in fold_partition(&perm, k).into_iter().enumerate() {
                    if train.len() < 2 {
                        return Err(Error::Invalid(format!("fold {i} has a training set below 2 samples")));
                    }
                    out.push(Split::new(train, test, format!("kfold-k{k}-r{r:03}-i{i:03}")));
                }
            }
        }
    }
    Ok(out)
}

/// Splits `items` into `k` contiguous chunks (sizes differ by at most one) and
/// returns `(rest, chunk)` for each chunk.
pub fn fold_partition(items: &[usize], k: usize) -> Vec<(Vec<usize>, Vec<usize>)> {
    let n = items.len();
    let mut bounds = Vec::with_capacity(k + 1);
    for f in 0..=k {
        bounds.push(f * n / k);
    }
    (0..k)
        .map(|f| {
            let held = items[bounds[f]..bounds[f + 1]].to_vec();
            let rest = items[..bounds[f]].iter().chain(&items[bounds[f + 1]..]).copied().collect();
            (rest, held)
        })
        .collect()
}

/// Number of nested-validation folds for a training set: `min(10, ⌊n/2⌋)`.
pub fn nested_fold_count(train_size: usize) -> usize {
    (train_size / 2).min(10)
}

/// Shuffled k-fold partition of a training index set for nested validation.
pub fn nested_folds(train: &[usize], k: usize, seed: u64) -> Vec<(Vec<usize>, Vec<usize>)> {
    let mut items = train.to_vec();
    items.shuffle(&mut stream_rng(seed, 0x6e65_7374));
    fold_partition(&items, k)
        .into_iter()
        .map(|(mut a, mut b)| {
            a.sort_unstable();
            b.sort_unstable();
            (a, b)
        })
        .collect()
}
