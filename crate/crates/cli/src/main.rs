//! `benchpipe`: ingestion, metadata, benchmarking, plotting and analysis.

mod commands;
mod plot;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgAction, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "benchpipe", version, about = "Benchmark chemical-structure representations")]
struct Cli {
    /// More log output on stderr (-v info, -vv debug).
    #[arg(short, long, action = ArgAction::Count, global = true)]
    verbose: u8,

    /// Worker threads (default: available cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Convert a CSV table into extended XYZ.
    Input {
        #[arg(long = "from-csv", alias = "from_csv")]
        from_csv: PathBuf,
        #[arg(long)]
        output: PathBuf,
        /// Column roles, e.g. `id=mol,element=el,x=x,y=y,z=z,target=energy`.
        #[arg(long)]
        map: Option<String>,
    },
    /// Write default metadata for an extended XYZ file.
    Meta {
        #[arg(long)]
        extxyz: PathBuf,
        #[arg(long)]
        meta: PathBuf,
        /// Dataset name (default: file stem).
        #[arg(long)]
        name: Option<String>,
    },
    /// Benchmark the models matching a pattern.
    Run {
        #[arg(long)]
        meta: PathBuf,
        #[arg(long, default_value = ".*")]
        models: String,
        #[arg(long, value_enum, default_value_t = Mode::Benchmark)]
        mode: Mode,
        /// Overrides the split seed from the metadata.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "benchmark.jsonl.gz")]
        output: PathBuf,
        /// Persistent descriptor cache.
        #[arg(long, env = "BENCHPIPE_CACHE")]
        cache: Option<PathBuf>,
        /// Random search with this many candidates instead of the full grid.
        #[arg(long = "random-search", alias = "random_search")]
        random_search: Option<usize>,
        /// Record wall-clock seconds per split.
        #[arg(long)]
        timing: bool,
    },
    /// Learning curves as SVG plus a CSV of the plotted points.
    Plot {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
    },
    /// Model similarity kernel or its KPCA map as CSV.
    Analyze {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum)]
        mode: AnalyzeMode,
        #[arg(long)]
        output: PathBuf,
        #[arg(long, default_value_t = 2)]
        components: usize,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Mode {
    Benchmark,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum AnalyzeMode {
    ModelKernel,
    Kpca,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).format_timestamp(None).init();
    if let Some(jobs) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build_global() {
            log::warn!("could not size thread pool: {e}");
        }
    }
    let result = match cli.command {
        Command::Input { from_csv, output, map } => commands::input(&from_csv, &output, map.as_deref()),
        Command::Meta { extxyz, meta, name } => commands::meta(&extxyz, &meta, name.as_deref()),
        Command::Run {
            meta,
            models,
            mode: Mode::Benchmark,
            seed,
            output,
            cache,
            random_search,
            timing,
        } => commands::run(&commands::RunArgs {
            meta,
            models,
            seed,
            output,
            cache,
            random_search,
            timing,
        }),
        Command::Plot { input, output } => commands::plot(&input, &output),
        Command::Analyze {
            input,
            mode,
            output,
            components,
        } => commands::analyze(&input, mode == AnalyzeMode::Kpca, &output, components),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
