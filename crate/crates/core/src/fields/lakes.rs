use rand::Rng;

use crate::config::HeightConfig;
use crate::error::{Error, Result};
use crate::lattice::Volume;
use crate::recurrence::umrc_sample;
use crate::rng::{derive_seed, site_stream, Domain};

/// A UMRC sample with each site independently raised to `2d` with
/// probability `p`. Raising heights keeps the configuration recurrent.
pub fn sea_islands(p: f64, v: &Volume, seed: u64) -> Result<HeightConfig> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidSampler(format!("probability {p} not in [0, 1]")));
    }
    let top = 2 * v.dim() as i64;
    if p == 1.0 {
        return Ok(HeightConfig::max_stable(v));
    }
    let base = umrc_sample(v, derive_seed(seed, 0))?;
    let heights = v
        .sites()
        .zip(base.heights())
        .map(|(x, &h)| if site_stream(seed, Domain::Overlay, &x).random::<f64>() < p { top } else { h })
        .collect();
    HeightConfig::new(v.clone(), heights)
}

/// Half-width of the largest centered square that fits in `v`.
pub fn inner_radius(v: &Volume) -> i64 {
    v.lo().iter().zip(v.hi()).map(|(l, h)| (-l).min(*h)).min().unwrap_or(0)
}

/// Spacing between consecutive rings of [`build_nested_lakes`].
pub fn lake_spacing(n: usize, v: &Volume) -> i64 {
    if n == 0 { 0 } else { inner_radius(v) / n as i64 }
}

/// Deterministic configuration with `n` disjoint nested square rings of
/// height 4 around the origin, joined to each other and to the origin by a
/// height-4 corridor along the positive first axis. Everything else is 3,
/// so the result is recurrent.
pub fn build_nested_lakes(n: usize, v: &Volume) -> Result<HeightConfig> {
    if v.dim() != 2 {
        return Err(Error::RequiresDimension { required: 2, got: v.dim() });
    }
    if n == 0 {
        return Ok(HeightConfig::max_stable(v));
    }
    if !v.contains(&[0, 0].into()) {
        return Err(Error::InvalidVolume(format!("{v} does not contain the origin")));
    }
    let spacing = lake_spacing(n, v);
    if spacing < 2 {
        return Err(Error::InvalidVolume(format!("{v} is too small for {n} nested rings")));
    }
    let outer = spacing * n as i64;
    HeightConfig::from_fn(v, |s| {
        let (x, y) = (s.coords()[0], s.coords()[1]);
        let r = x.abs().max(y.abs());
        let on_ring = r > 0 && r <= outer && r % spacing == 0;
        let corridor = y == 0 && (0..=outer).contains(&x);
        if on_ring || corridor { 4 } else { 3 }
    })
}
