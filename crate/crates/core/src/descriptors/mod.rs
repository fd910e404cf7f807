//! Atomic and global structure representations.

mod acsf;
mod coulomb;
pub mod harmonics;
mod heuristics;
mod neighbors;
mod normalize;
mod pooling;
pub mod radial;
mod soap;

pub use acsf::{acsf, acsf_structure, AcsfConfig, AngularTerm, RadialTerm};
pub use coulomb::{coulomb_descriptor, coulomb_matrix, reduce_sorted_l2, reduce_spectral, CoulombConfig, CoulombReduction};
pub use heuristics::{length_scale_heuristic, HeuristicVariant, LengthScale, LengthScaleTable};
pub use neighbors::{neighbor_list, Neighbor, NeighborList};
pub use normalize::{l2_rows, Whitener};
pub use pooling::{pool_extensive, pool_intensive, pool_intensive_per_element};
pub use soap::{pair_spectrum, soap_expand, soap_power_spectrum, AtomicCoefficients, Soap, SoapConfig};
