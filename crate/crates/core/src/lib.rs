//! Benchmarking chemical-structure representations.
//!
//! Structures are read from extended XYZ ([`chemio`]), turned into descriptors
//! ([`descriptors`]) and regressed with ridge or kernel ridge models
//! ([`regress`]). A [`pipeline`] wires these steps into a graph whose
//! split-independent outputs are computed once and cached by content digest;
//! [`bench`] runs model libraries over repeated train/test splits with nested
//! hyperparameter search, and [`analysis`] compares the resulting models.
//!
//! Numerical kernels are generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below name the common instantiations.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod analysis;
pub mod bench;
pub mod chemio;
pub mod descriptors;
pub mod error;
pub mod fmt;
pub mod linalg;
pub mod pipeline;
pub mod regress;
pub mod rng;
pub mod scalar;
pub mod synth;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Ridge = regress::RidgeModel<f64>;
pub type Ridge32 = regress::RidgeModel<f32>;
pub type Krr = regress::KrrModel<f64>;
pub type Krr32 = regress::KrrModel<f32>;
pub type Whitener = descriptors::Whitener<f64>;
pub type Whitener32 = descriptors::Whitener<f32>;
pub type Soap = descriptors::Soap<f64>;
pub type Soap32 = descriptors::Soap<f32>;
pub type AtomicCoefficients = descriptors::AtomicCoefficients<f64>;
pub type RadialBasis = descriptors::radial::RadialBasis<f64>;
