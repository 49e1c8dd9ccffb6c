use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::config::{HeightConfig, TopplingVector};
use crate::error::{Error, Result};
use crate::lattice::{Site, Volume, SINK};

/// Wave cap used by [`wave_decompose`].
pub const DEFAULT_WAVE_CAP: usize = 100_000;

/// Avalanche after one grain at `origin`, split into waves. Wave `k` is the
/// set of sites that toppled between the k-th toppling of the origin and the
/// next one; every site topples at most once per wave. The origin belongs
/// to the support of every wave.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WaveDecomposition {
    pub origin: Site,
    pub volume: Volume,
    /// Site indices (row-major) of each wave's support, ascending.
    pub supports: Vec<Vec<u32>>,
    /// Configuration after the last wave.
    pub xi: HeightConfig,
    /// True when the wave cap stopped the decomposition early.
    pub blow_up: bool,
}

impl WaveDecomposition {
    pub fn wave_count(&self) -> usize {
        self.supports.len()
    }

    pub fn support_sites(&self, k: usize) -> Vec<Site> {
        self.supports[k].iter().map(|&i| self.volume.site(i as usize)).collect()
    }

    /// 0/1 toppling vector of wave `k`.
    pub fn wave_vector(&self, k: usize) -> TopplingVector {
        let mut counts = vec![0; self.volume.len()];
        for &i in &self.supports[k] {
            counts[i as usize] = 1;
        }
        TopplingVector { volume: self.volume.clone(), counts }
    }

    /// Sum of all wave vectors.
    pub fn total(&self) -> TopplingVector {
        let mut counts = vec![0; self.volume.len()];
        for s in &self.supports {
            for &i in s {
                counts[i as usize] += 1;
            }
        }
        TopplingVector { volume: self.volume.clone(), counts }
    }
}

pub fn wave_decompose(eta: &HeightConfig, x: &Site) -> Result<WaveDecomposition> {
    wave_decompose_capped(eta, x, DEFAULT_WAVE_CAP)
}

/// Add a grain at `x` to the stable `eta` and run waves until `x` is stable
/// or `wave_cap` waves have run (then `blow_up` is set).
pub fn wave_decompose_capped(eta: &HeightConfig, x: &Site, wave_cap: usize) -> Result<WaveDecomposition> {
    if !eta.is_stable() {
        return Err(Error::Unstable);
    }
    let v = eta.volume();
    let origin = v.try_index(x)?;
    let st = v.stencil();
    let t = st.degree() as i64;
    let mut h = eta.heights().to_vec();
    h[origin] += 1;

    let mut supports = Vec::new();
    let mut stamp = vec![0u32; v.len()];
    let mut queue: VecDeque<u32> = VecDeque::new();
    let mut blow_up = false;

    while h[origin] > t {
        if supports.len() == wave_cap {
            blow_up = true;
            break;
        }
        let wave = supports.len() as u32 + 1;
        let mut support = vec![origin as u32];
        stamp[origin] = wave;
        h[origin] -= t;
        for &y in st.neighbors(origin) {
            if y != SINK {
                h[y as usize] += 1;
                queue.push_back(y);
            }
        }
        while let Some(y) = queue.pop_front() {
            let y = y as usize;
            if y == origin || h[y] <= t {
                continue;
            }
            if stamp[y] == wave {
                return Err(Error::Invariant(format!("site {} toppled twice in wave {wave}", v.site(y))));
            }
            stamp[y] = wave;
            support.push(y as u32);
            h[y] -= t;
            for &z in st.neighbors(y) {
                if z != SINK {
                    h[z as usize] += 1;
                    if h[z as usize] > t {
                        queue.push_back(z);
                    }
                }
            }
        }
        support.sort_unstable();
        supports.push(support);
    }
    let xi = HeightConfig::new(v.clone(), h)?;
    Ok(WaveDecomposition { origin: x.clone(), volume: v.clone(), supports, xi, blow_up })
}
