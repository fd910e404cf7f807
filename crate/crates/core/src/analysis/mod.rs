//! Similarity between models and between descriptors, and kernel PCA maps.

mod export;
mod kpca;
mod similarity;

pub use export::{write_kernel_csv, write_map_csv};
pub use kpca::{center_kernel, kpca, KpcaMap};
pub use similarity::{
    descriptor_similarity, flattened_kernel, model_similarity, prediction_table, sample_indices, SimilarityKernel,
};
