//! Abelian sandpiles on boxes of Z^d: stabilization, recurrence, random
//! height fields, and experiments on when an infinite configuration can be
//! stabilized.

pub mod arw;
pub mod cli;
pub mod config;
pub mod error;
pub mod fields;
pub mod lattice;
pub mod metastability;
pub mod prober;
pub mod recurrence;
pub mod rng;
pub mod topple;

pub use config::{HeightConfig, TopplingVector};
pub use error::{Error, Result};
pub use fields::{sample, FieldKind, SamplerSpec};
pub use lattice::{Site, Volume};
pub use topple::{stabilize, Stabilization, StabilizationResult};
