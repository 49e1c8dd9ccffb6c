use serde::{Deserialize, Serialize};

use super::chain::{ChainParams, UmrcChain};
use crate::config::HeightConfig;
use crate::error::{Error, Result};
use crate::fields::{sample, FieldKind, SamplerSpec};
use crate::lattice::{Estimate, Volume};
use crate::rng::derive_seed;

/// Per-sample region means, in emission order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityTrace {
    pub means: Vec<f64>,
    pub estimate: Estimate,
}

pub fn region_mean(eta: &HeightConfig, region: &Volume) -> Result<f64> {
    Ok(eta.restrict(region)?.mean())
}

/// Spatial and ensemble average of heights over `region`.
///
/// A plain UMRC sampler is read off one chain, one emission per sample
/// (burn-in and stride from the spec); every other kind draws `n_samples`
/// independent fields with seeds derived from `seed`.
pub fn density_estimate(
    spec: &SamplerSpec,
    v: &Volume,
    region: &Volume,
    n_samples: usize,
    seed: u64,
) -> Result<DensityTrace> {
    if !region.is_subset_of(v) {
        return Err(Error::InvalidVolume(format!("region {region} is not inside {v}")));
    }
    if n_samples == 0 {
        return Err(Error::Usage("need at least one sample".into()));
    }
    let means: Vec<f64> = match &spec.kind {
        FieldKind::Umrc { burn_in_factor, stride_factor } => {
            let n = v.len() as u64;
            let defaults = ChainParams::defaults(v);
            let params = ChainParams {
                burn_in: burn_in_factor.map_or(defaults.burn_in, |f| f * n),
                stride: stride_factor.map_or(defaults.stride, |f| f * n),
            };
            UmrcChain::new(v, params, seed)?
                .take(n_samples)
                .map(|c| region_mean(&c, region))
                .collect::<Result<_>>()?
        }
        _ => (0..n_samples as u64)
            .map(|k| region_mean(&sample(&spec.with_seed(derive_seed(seed, k)), v)?, region))
            .collect::<Result<_>>()?,
    };
    Ok(DensityTrace { estimate: Estimate::from_samples(&means), means })
}
