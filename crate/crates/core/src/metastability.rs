//! Single-grain avalanches on recurrent configurations: wave counts, nested
//! lakes of maximal height around the origin, and sweeps over the density
//! of the maximal-height sea.

use std::collections::VecDeque;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::HeightConfig;
use crate::error::{Error, Result};
use crate::fields::sea_islands;
use crate::lattice::{Site, Volume};
use crate::recurrence::is_recurrent;
use crate::rng::derive_seed;
use crate::topple::{is_simply_connected, wave_decompose_capped, Engine};

/// Square contours of maximal height centered at the origin, each joined to
/// the origin through maximal-height sites.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LakeStructure {
    /// Sup-norm radius of each contour, innermost first.
    pub radii: Vec<i64>,
    /// Sites of each contour.
    pub boundaries: Vec<Vec<Site>>,
}

impl LakeStructure {
    pub fn count(&self) -> usize {
        self.radii.len()
    }
}

/// Sites at sup-norm distance exactly `r` from `c`.
fn square_ring(c: &[i64], r: i64) -> Vec<Site> {
    if r == 0 {
        return vec![Site::from(c.to_vec())];
    }
    let mut out = Vec::with_capacity(8 * r as usize);
    for k in -r..r {
        out.push(Site::from([c[0] + k, c[1] - r]));
        out.push(Site::from([c[0] + r, c[1] + k]));
        out.push(Site::from([c[0] - k, c[1] + r]));
        out.push(Site::from([c[0] - r, c[1] - k]));
    }
    out
}

/// Find the maximal-height component of `origin` and every centered square
/// contour lying entirely inside it. Contours at different radii have
/// disjoint boundaries. Returns nothing if `origin` is below maximal height.
pub fn detect_nested_lakes(eta: &HeightConfig, origin: &Site) -> Result<LakeStructure> {
    let v = eta.volume();
    if v.dim() != 2 {
        return Err(Error::RequiresDimension { required: 2, got: v.dim() });
    }
    let top = eta.threshold();
    let o = v.try_index(origin)?;
    if eta.heights()[o] != top {
        return Ok(LakeStructure::default());
    }
    let st = v.stencil();
    let mut sea = vec![false; v.len()];
    sea[o] = true;
    let mut queue = VecDeque::from([o]);
    while let Some(x) = queue.pop_front() {
        for &y in st.neighbors(x) {
            let y = y as usize;
            if y != crate::lattice::SINK as usize && !sea[y] && eta.heights()[y] == top {
                sea[y] = true;
                queue.push_back(y);
            }
        }
    }
    let c = origin.coords();
    let mut lakes = LakeStructure::default();
    for r in 1.. {
        let ring = square_ring(c, r);
        if !ring.iter().all(|s| v.contains(s)) {
            break;
        }
        if ring.iter().all(|s| sea[v.index_of(s).expect("inside")]) {
            lakes.radii.push(r);
            lakes.boundaries.push(ring);
        }
    }
    Ok(lakes)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetastabilityReport {
    pub origin: Site,
    pub origin_height: i64,
    pub wave_count: usize,
    pub nested_lakes_detected: usize,
    pub lake_radii: Vec<i64>,
    /// One entry per wave.
    pub simply_connected: Vec<bool>,
    pub wave_sizes: Vec<usize>,
    pub first_wave_is_volume: bool,
    pub blow_up: bool,
}

/// Add one grain at `origin` to a recurrent configuration, split the
/// avalanche into waves, and check it against the nested lakes.
///
/// Fails with an invariant error if the waves do not add up to the full
/// stabilization, if a wave support is not simply connected, or if fewer
/// waves than lakes occur while the origin is in the maximal-height sea.
pub fn metastability_probe(eta: &HeightConfig, origin: &Site, wave_cap: usize) -> Result<MetastabilityReport> {
    let v = eta.volume();
    if v.dim() != 2 {
        return Err(Error::RequiresDimension { required: 2, got: v.dim() });
    }
    if !is_recurrent(eta)? {
        return Err(Error::Invariant("metastability probe needs a recurrent configuration".into()));
    }
    let lakes = detect_nested_lakes(eta, origin)?;
    let w = wave_decompose_capped(eta, origin, wave_cap)?;
    let simply_connected = (0..w.wave_count())
        .map(|k| is_simply_connected(&w.support_sites(k)))
        .collect::<Result<Vec<_>>>()?;
    if let Some(k) = simply_connected.iter().position(|ok| !ok) {
        return Err(Error::Invariant(format!("wave {} is not simply connected", k + 1)));
    }
    if !w.blow_up {
        let full = Engine::new(v).stabilize(&eta.add(origin, 1)?)?.into_result()?;
        if full.m != w.total() || full.xi != w.xi {
            return Err(Error::Invariant("waves do not add up to the stabilization".into()));
        }
    }
    let origin_height = eta.get(origin).expect("origin checked");
    if origin_height == eta.threshold() && !w.blow_up && w.wave_count() < lakes.count() {
        return Err(Error::Invariant(format!("{} waves for {} nested lakes", w.wave_count(), lakes.count())));
    }
    Ok(MetastabilityReport {
        origin: origin.clone(),
        origin_height,
        wave_count: w.wave_count(),
        nested_lakes_detected: lakes.count(),
        lake_radii: lakes.radii,
        simply_connected,
        wave_sizes: w.supports.iter().map(Vec::len).collect(),
        first_wave_is_volume: w.supports.first().is_some_and(|s| s.len() == v.len()),
        blow_up: w.blow_up,
    })
}

/// One `(p, side)` cell of a sea-with-islands sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub p: f64,
    pub side: usize,
    pub seeds: usize,
    pub mean_waves: f64,
    pub max_waves: usize,
    pub mean_lakes: f64,
    pub blow_up_rate: f64,
}

/// Wave counts after one grain at the origin of sea-with-islands samples,
/// for every probability and box side. Observational: nothing is asserted
/// about trends.
pub fn sea_islands_sweep(p_list: &[f64], sides: &[usize], seeds: usize, seed: u64, wave_cap: usize) -> Result<Vec<SweepCell>> {
    let mut out = Vec::new();
    for &p in p_list {
        for &side in sides {
            let v = Volume::centered(2, side)?;
            let reports = (0..seeds as u64)
                .into_par_iter()
                .map(|k| {
                    let eta = sea_islands(p, &v, derive_seed(seed, k))?;
                    metastability_probe(&eta, &Site::origin(2), wave_cap)
                })
                .collect::<Result<Vec<_>>>()?;
            let n = reports.len().max(1) as f64;
            out.push(SweepCell {
                p,
                side,
                seeds,
                mean_waves: reports.iter().map(|r| r.wave_count as f64).sum::<f64>() / n,
                max_waves: reports.iter().map(|r| r.wave_count).max().unwrap_or(0),
                mean_lakes: reports.iter().map(|r| r.nested_lakes_detected as f64).sum::<f64>() / n,
                blow_up_rate: reports.iter().filter(|r| r.blow_up).count() as f64 / n,
            });
        }
    }
    Ok(out)
}
