//! Finite-volume stabilization, toppling orders, and wave decomposition.

mod engine;
mod topology;
mod waves;

pub use engine::{
    add, special_boundary_addition, stabilize, stabilize_strict, stabilize_with_order, CapExceeded, Engine,
    OrderPolicy, Stabilization, StabilizationResult, DEFAULT_TOPPLING_CAP,
};
pub use topology::is_simply_connected;
pub use waves::{wave_decompose, wave_decompose_capped, WaveDecomposition, DEFAULT_WAVE_CAP};
