use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::config::HeightConfig;
use crate::error::{Error, Result};
use crate::lattice::Volume;
use crate::rng::{self, Domain};
use crate::topple::Engine;

/// Default burn-in, in additions per site.
pub const DEFAULT_BURN_IN_FACTOR: u64 = 20;
/// Smallest accepted burn-in, in additions per site.
pub const MIN_BURN_IN_FACTOR: u64 = 1;

/// Parameters of the addition chain whose stationary law is uniform on the
/// recurrent configurations of a volume.
///
/// On a box where every site has an even number of missing neighbors (1x1,
/// 2x2) the chain has period 2 in the parity of the height sum; an even
/// stride then samples a single parity class.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChainParams {
    pub burn_in: u64,
    pub stride: u64,
}

impl ChainParams {
    /// Burn-in `20 |V|`, stride `|V|`.
    pub fn defaults(v: &Volume) -> Self {
        let n = v.len() as u64;
        ChainParams { burn_in: DEFAULT_BURN_IN_FACTOR * n, stride: n }
    }
}

/// Add one grain at a uniform site and stabilize, starting from the maximal
/// stable configuration (which is recurrent), so the chain never leaves the
/// recurrent class.
pub struct UmrcChain {
    engine: Engine,
    heights: Vec<i64>,
    scratch: Vec<u64>,
    rng: ChaCha8Rng,
    params: ChainParams,
    steps: u64,
    burned: bool,
    topplings: u64,
}

impl UmrcChain {
    pub fn new(v: &Volume, params: ChainParams, seed: u64) -> Result<Self> {
        if params.stride == 0 {
            return Err(Error::Usage("stride must be >= 1".into()));
        }
        if params.burn_in < MIN_BURN_IN_FACTOR * v.len() as u64 {
            return Err(Error::Usage(format!(
                "burn-in {} is below {} additions per site",
                params.burn_in, MIN_BURN_IN_FACTOR
            )));
        }
        Ok(UmrcChain {
            engine: Engine::new(v),
            heights: HeightConfig::max_stable(v).into_heights(),
            scratch: vec![0; v.len()],
            rng: rng::stream(seed, Domain::Umrc, 0, 0),
            params,
            steps: 0,
            burned: false,
            topplings: 0,
        })
    }

    pub fn with_defaults(v: &Volume, seed: u64) -> Result<Self> {
        Self::new(v, ChainParams::defaults(v), seed)
    }

    /// One addition. Returns the avalanche size.
    pub fn step(&mut self) -> u64 {
        let i = self.rng.random_range(0..self.heights.len());
        let k = self
            .engine
            .add_and_relax(&mut self.heights, &mut self.scratch, i)
            .expect("single-grain avalanches are bounded on a finite volume");
        self.steps += 1;
        self.topplings += k;
        k
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// Total topplings performed so far.
    pub fn topplings(&self) -> u64 {
        self.topplings
    }

    pub fn state(&self) -> HeightConfig {
        HeightConfig::new(self.engine.volume().clone(), self.heights.clone()).expect("stable heights")
    }

    pub fn heights(&self) -> &[i64] {
        &self.heights
    }

    /// Advance by `n` additions without emitting.
    pub fn advance(&mut self, n: u64) {
        for _ in 0..n {
            self.step();
        }
    }
}

impl Iterator for UmrcChain {
    type Item = HeightConfig;

    fn next(&mut self) -> Option<HeightConfig> {
        if !self.burned {
            self.advance(self.params.burn_in);
            self.burned = true;
        } else {
            self.advance(self.params.stride);
        }
        Some(self.state())
    }
}

/// Stream of recurrent samples, first after `burn_in` additions and then
/// every `stride` additions.
pub fn umrc_chain(v: &Volume, burn_in: u64, stride: u64, seed: u64) -> Result<UmrcChain> {
    UmrcChain::new(v, ChainParams { burn_in, stride }, seed)
}

/// One sample after the default burn-in.
pub fn umrc_sample(v: &Volume, seed: u64) -> Result<HeightConfig> {
    let mut c = UmrcChain::with_defaults(v, seed)?;
    Ok(c.next().expect("infinite"))
}
