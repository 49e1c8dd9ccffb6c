use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::Volume;
use crate::topple::DEFAULT_TOPPLING_CAP;

/// Knobs shared by every probe; serialized into reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProbePolicy {
    /// Smallest last increment that still counts as growth.
    pub min_growth: u64,
    /// Seeds per density point in majority votes.
    pub majority_seeds: usize,
    /// Per-site toppling cap; hitting it counts as unbounded growth.
    pub toppling_cap: u64,
}

impl Default for ProbePolicy {
    fn default() -> Self {
        ProbePolicy { min_growth: 1, majority_seeds: 5, toppling_cap: DEFAULT_TOPPLING_CAP }
    }
}

/// Centered cubes of side `base * 2^k` for `k = 0..count`.
pub fn doubling_schedule(d: usize, base: usize, count: usize) -> Result<Vec<Volume>> {
    if base == 0 || count == 0 {
        return Err(Error::Usage("empty schedule".into()));
    }
    (0..count).map(|k| Volume::centered(d, base << k)).collect()
}

/// Default schedule: sides 8..128 in two dimensions, 8..4096 in one, 8..64
/// in three.
pub fn default_schedule(d: usize) -> Result<Vec<Volume>> {
    match d {
        1 => doubling_schedule(1, 8, 10),
        2 => doubling_schedule(2, 8, 5),
        3 => doubling_schedule(3, 8, 4),
        _ => Err(Error::UnsupportedDimension(d)),
    }
}

/// Centered cubes with the given sides, which must nest.
pub fn schedule_from_sides(d: usize, sides: &[usize]) -> Result<Vec<Volume>> {
    sides.iter().map(|&l| Volume::centered(d, l)).collect()
}
