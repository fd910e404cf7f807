//! Model library, benchmark runs, result files and learning curves.

mod curves;
mod library;
mod records;
mod run;

pub use curves::{assemble_learning_curves, best_per_family, CurvePoint, LearningCurve};
pub use library::{Capability, ModelEntry, ModelLibrary, PipelineFactory};
pub use records::{read_results, write_results, BenchmarkRecord, Prediction, Status};
pub use run::{run_benchmark, BenchConfig, BenchRun, SkippedModel};
