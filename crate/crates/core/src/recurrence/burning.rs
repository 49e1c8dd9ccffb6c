use std::collections::{HashMap, HashSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::config::HeightConfig;
use crate::error::{Error, Result};
use crate::lattice::{Site, Volume, SINK};

/// A nonempty set `W` on which every site has height at most its number of
/// neighbours in `W`: a forbidden subconfiguration.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForbiddenWitness {
    pub sites: Vec<Site>,
    pub heights: Vec<i64>,
}

impl ForbiddenWitness {
    /// Re-check the defining inequality on the witness itself.
    pub fn verify(&self) -> bool {
        let members: HashSet<&Site> = self.sites.iter().collect();
        !self.sites.is_empty()
            && self.sites.iter().zip(&self.heights).all(|(x, &h)| {
                let deg = x.neighbors().iter().filter(|y| members.contains(y)).count() as i64;
                h <= deg
            })
    }
}

/// Peel sites whose height exceeds their number of unpeeled neighbours.
/// Whatever survives is a forbidden set; `None` means `eta` is allowed.
pub fn find_forbidden(eta: &HeightConfig) -> Option<ForbiddenWitness> {
    let v = eta.volume();
    let st = v.stencil();
    let h = eta.heights();
    let mut remaining: Vec<i64> = (0..v.len()).map(|i| (st.degree() as u32 - st.lacking(i)) as i64).collect();
    let mut removed = vec![false; v.len()];
    let mut queue: VecDeque<usize> = (0..v.len()).filter(|&i| h[i] > remaining[i]).collect();
    for &i in &queue {
        removed[i] = true;
    }
    while let Some(x) = queue.pop_front() {
        for &y in st.neighbors(x) {
            if y == SINK {
                continue;
            }
            let y = y as usize;
            if removed[y] {
                continue;
            }
            remaining[y] -= 1;
            if h[y] > remaining[y] {
                removed[y] = true;
                queue.push_back(y);
            }
        }
    }
    let left: Vec<usize> = (0..v.len()).filter(|&i| !removed[i]).collect();
    if left.is_empty() {
        None
    } else {
        Some(ForbiddenWitness {
            sites: left.iter().map(|&i| v.site(i)).collect(),
            heights: left.iter().map(|&i| h[i]).collect(),
        })
    }
}

/// A stable configuration is recurrent iff it has no forbidden
/// subconfiguration.
pub fn is_recurrent(eta: &HeightConfig) -> Result<bool> {
    if !eta.is_stable() {
        return Err(Error::Unstable);
    }
    Ok(find_forbidden(eta).is_none())
}

/// Largest volume for [`minimal_recurrent_configs`].
pub const MINIMAL_ENUM_CAP: usize = 16;

/// All minimal recurrent configurations of `v` (recurrent, and lowering any
/// single height breaks recurrence), in lexicographic order of heights.
///
/// A minimal recurrent configuration is exactly one where, for some order
/// of peeling, every site's height is one more than its number of
/// unpeeled neighbours when it is peeled. The enumeration runs over peeled
/// subsets, keeping the distinct partial height assignments for each.
pub fn minimal_recurrent_configs(v: &Volume) -> Result<Vec<HeightConfig>> {
    let n = v.len();
    if n > MINIMAL_ENUM_CAP {
        return Err(Error::ExactCapExceeded { sites: n, cap: MINIMAL_ENUM_CAP });
    }
    let st = v.stencil();
    let t = st.degree() as u8;
    let nbr_mask: Vec<u32> = (0..n)
        .map(|i| st.neighbors(i).iter().filter(|&&j| j != SINK).fold(0u32, |m, &j| m | (1 << j)))
        .collect();
    // partial configs packed 3 bits per site
    let mut layer: HashMap<u32, HashSet<u64>> = HashMap::from([(0u32, HashSet::from([0u64]))]);
    for _ in 0..n {
        let mut next: HashMap<u32, HashSet<u64>> = HashMap::new();
        for (peeled, partials) in &layer {
            for x in 0..n {
                if peeled & (1 << x) != 0 {
                    continue;
                }
                // height = 1 + neighbours in V not yet peeled (x itself excluded)
                let unpeeled = (nbr_mask[x] & !peeled).count_ones() as u8;
                let hx = 1 + unpeeled;
                if hx > t {
                    continue;
                }
                let entry = next.entry(peeled | (1 << x)).or_default();
                for &p in partials {
                    entry.insert(p | ((hx as u64) << (3 * x)));
                }
            }
        }
        layer = next;
    }
    let full = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
    let mut out: Vec<Vec<i64>> = layer
        .remove(&full)
        .unwrap_or_default()
        .into_iter()
        .map(|p| (0..n).map(|i| ((p >> (3 * i)) & 7) as i64).collect())
        .collect();
    out.sort();
    out.into_iter().map(|h| HeightConfig::new(v.clone(), h)).collect()
}
