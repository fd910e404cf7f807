//! Transform graphs over a shared data stream: split views, dependency
//! hashing, precomputation with an on-disk cache, and nested hyperparameter
//! search.

mod cache;
mod exec;
mod graph;
mod ops;
mod params;
mod search;
mod split;
mod value;

pub use cache::DiskCache;
pub use exec::{fit, map, precompute, FittedPipeline, PrecomputeReport, Stream};
pub use graph::{build_pipeline, NodeSpec, Pipeline, PipelineSpec};
pub use ops::{Counters, State};
pub use params::{canonical, Binding, Params};
pub use search::{candidates, hyper_search, CandidateScore, SearchResult, SearchSpec};
pub use split::*;
pub use value::{open_split, AtomRows, DataTag, Object, Value, View};
