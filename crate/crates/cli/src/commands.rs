use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use benchpipe::analysis::{kpca, model_similarity, prediction_table, write_kernel_csv, write_map_csv};
use benchpipe::bench::{
    assemble_learning_curves, read_results, run_benchmark, write_results, BenchConfig, ModelLibrary,
};
use benchpipe::chemio::{csv_headers, csv_to_dataset, generate_metadata, parse_extxyz, write_extxyz, ColumnMap, Dataset};
use benchpipe::pipeline::SearchSpec;
use benchpipe::Error;

use crate::plot::{curves_csv, render_svg};

#[derive(Debug)]
pub enum CliError {
    /// Bad or unreadable input (exit 2).
    Input(String),
    /// Nothing to work with (exit 3).
    Empty(String),
    /// Anything else (exit 1).
    Internal(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Empty(_) => 3,
            CliError::Internal(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) | CliError::Empty(m) | CliError::Internal(m) => f.write_str(m),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse { .. }
            | Error::Schema(_)
            | Error::Invalid(_)
            | Error::Scope(_)
            | Error::Io(_)
            | Error::Json(_)
            | Error::Csv(_)
            | Error::Regex(_) => CliError::Input(e.to_string()),
            _ => CliError::Internal(e.to_string()),
        }
    }
}

type CliResult = Result<(), CliError>;

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn write(path: &Path, contents: &str) -> CliResult {
    std::fs::write(path, contents).map_err(|e| CliError::Internal(format!("{}: {e}", path.display())))
}

pub fn input(csv_path: &Path, output: &Path, map: Option<&str>) -> CliResult {
    let text = read(csv_path)?;
    let columns = match map {
        Some(spec) => ColumnMap::parse(spec)?,
        None => ColumnMap::infer(&csv_headers(&text)?),
    };
    let dataset = csv_to_dataset(&text, &columns)?;
    write(output, &write_extxyz(&dataset.structures))?;
    log::info!("wrote {} structures to {}", dataset.len(), output.display());
    Ok(())
}

/// Path of `target` as seen from `base_dir`: a bare file name when they share
/// a directory, an absolute path otherwise.
fn source_reference(target: &Path, base_dir: &Path) -> String {
    let canon = |p: &Path| std::fs::canonicalize(p).unwrap_or_else(|_| p.to_path_buf());
    let target = canon(target);
    match (target.parent(), target.file_name()) {
        (Some(parent), Some(name)) if parent == canon(base_dir) => name.to_string_lossy().into_owned(),
        _ => target.to_string_lossy().into_owned(),
    }
}

pub fn meta(extxyz: &Path, meta_path: &Path, name: Option<&str>) -> CliResult {
    let structures = parse_extxyz(&read(extxyz)?)?;
    let name = name
        .map(str::to_string)
        .or_else(|| extxyz.file_stem().map(|s| s.to_string_lossy().into_owned()))
        .unwrap_or_else(|| "dataset".into());
    let base = match meta_path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let meta = generate_metadata(&structures, &name, &source_reference(extxyz, &base))?;
    write(meta_path, &meta.to_json_string())
}

pub struct RunArgs {
    pub meta: PathBuf,
    pub models: String,
    pub seed: Option<u64>,
    pub output: PathBuf,
    pub cache: Option<PathBuf>,
    pub random_search: Option<usize>,
    pub timing: bool,
}

pub fn run(args: &RunArgs) -> CliResult {
    let library = ModelLibrary::standard();
    let models = library.select(&args.models)?;
    if models.is_empty() {
        return Err(CliError::Empty(format!("no model matches '{}'", args.models)));
    }
    let dataset = Arc::new(Dataset::load(&args.meta)?);
    log::info!("loaded {} structures from {}", dataset.len(), args.meta.display());
    let config = BenchConfig {
        split: None,
        seed: args.seed,
        cache_dir: args.cache.clone(),
        search: match args.random_search {
            Some(n) => SearchSpec::Random {
                n,
                seed: args.seed.unwrap_or(dataset.meta.split.seed),
            },
            None => SearchSpec::Grid,
        },
        timing: args.timing,
    };
    let run = run_benchmark(&models, dataset, &config).map_err(|e| CliError::Internal(e.to_string()))?;
    if run.records.is_empty() {
        return Err(CliError::Empty("no model could run on this dataset".into()));
    }
    write_results(&run.records, &args.output).map_err(|e| CliError::Internal(e.to_string()))?;
    let failed = run.records.iter().filter(|r| !r.is_ok()).count();
    log::info!(
        "wrote {} records ({failed} failed) to {}; {} descriptor evaluations",
        run.records.len(),
        args.output.display(),
        run.descriptor_evaluations
    );
    Ok(())
}

pub fn plot(input: &Path, output: &Path) -> CliResult {
    let records = read_results(input)?;
    let curves = assemble_learning_curves(&records);
    if curves.is_empty() {
        return Err(CliError::Empty(format!("{}: no successful records", input.display())));
    }
    write(output, &render_svg(&curves))?;
    write(&output.with_extension("csv"), &curves_csv(&curves))
}

pub fn analyze(input: &Path, map_mode: bool, output: &Path, components: usize) -> CliResult {
    let records = read_results(input)?;
    let (ids, table) = prediction_table(&records);
    if table.len() < 2 || ids.is_empty() {
        return Err(CliError::Empty("fewer than two models share test samples".into()));
    }
    let kernel = model_similarity(&table)?;
    for flag in &kernel.flags {
        log::warn!("{flag}");
    }
    if !map_mode {
        write_kernel_csv(&kernel, output)?;
        return Ok(());
    }
    let (finite, dropped) = kernel.finite_part();
    if !dropped.is_empty() {
        log::warn!("left out of the map: {}", dropped.join(", "));
    }
    if finite.len() < 2 {
        return Err(CliError::Empty("fewer than two models left for the map".into()));
    }
    let map = kpca(&finite, components.clamp(1, finite.len() - 1))?;
    let mut sums: BTreeMap<String, (f64, usize)> = BTreeMap::new();
    for r in records.iter().filter(|r| r.is_ok()) {
        if let Some(v) = r.metric("rmse") {
            let e = sums.entry(r.model.clone()).or_insert((0.0, 0));
            e.0 += v;
            e.1 += 1;
        }
    }
    let rmse: BTreeMap<String, f64> = sums.into_iter().map(|(k, (s, n))| (k, s / n as f64)).collect();
    write_map_csv(&map, Some(&rmse), output)?;
    Ok(())
}
