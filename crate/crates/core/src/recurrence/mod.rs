//! Recurrent (allowed) configurations: burning test, equivalence classes
//! modulo the toppling matrix, the uniform recurrent chain, and densities.

mod burning;
mod chain;
mod classes;
mod density;

pub use burning::{find_forbidden, is_recurrent, minimal_recurrent_configs, ForbiddenWitness, MINIMAL_ENUM_CAP};
pub use chain::{
    umrc_chain, umrc_sample, ChainParams, UmrcChain, DEFAULT_BURN_IN_FACTOR, MIN_BURN_IN_FACTOR,
};
pub use classes::{
    equivalence_check, recurrent_representative, rectangle_identity_check, representative_iteration_cap,
    EquivalenceCertificate, RectangleCheck,
};
pub use density::{density_estimate, region_mean, DensityTrace};
