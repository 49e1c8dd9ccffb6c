use std::collections::VecDeque;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{HeightConfig, TopplingVector};
use crate::error::{Error, Result};
use crate::lattice::{Site, Stencil, Volume, SINK};
use crate::rng::{self, Domain};

/// Default per-site toppling cap.
pub const DEFAULT_TOPPLING_CAP: u64 = 10_000_000;

/// A completed stabilization: `xi = eta - Δ_V m`, with `xi` stable and `m`
/// the minimal (legal) toppling vector.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StabilizationResult {
    pub xi: HeightConfig,
    pub m: TopplingVector,
    pub total_topplings: u64,
    pub grains_lost: u64,
    pub waves: Option<u64>,
}

/// Some site exceeded the toppling cap before the configuration stabilized.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CapExceeded {
    pub site: Site,
    pub cap: u64,
    /// Toppling counts at the moment the cap was hit. A lower bound on the
    /// true odometer.
    pub partial: TopplingVector,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "kebab-case")]
pub enum Stabilization {
    Stable(StabilizationResult),
    CapExceeded(CapExceeded),
}

impl Stabilization {
    pub fn stable(self) -> Option<StabilizationResult> {
        match self {
            Stabilization::Stable(r) => Some(r),
            Stabilization::CapExceeded(_) => None,
        }
    }

    pub fn is_capped(&self) -> bool {
        matches!(self, Stabilization::CapExceeded(_))
    }

    /// Unwrap, turning a cap hit into an error for callers that do not
    /// expect divergence.
    pub fn into_result(self) -> Result<StabilizationResult> {
        match self {
            Stabilization::Stable(r) => Ok(r),
            Stabilization::CapExceeded(c) => Err(Error::IterationCap(c.cap)),
        }
    }
}

/// Order in which unstable sites are toppled. Every policy yields the same
/// `(xi, m)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OrderPolicy {
    /// Repeated row-major sweeps, one toppling per unstable site visited.
    Scanline,
    /// Uniformly random unstable site, one toppling at a time.
    Random,
    /// LIFO worklist.
    Stack,
    /// FIFO worklist, one toppling per dequeue.
    Queue,
    /// Synchronous rounds: every unstable site topples once per round.
    ParallelSweep,
}

impl OrderPolicy {
    pub const ALL: [OrderPolicy; 5] =
        [OrderPolicy::Scanline, OrderPolicy::Random, OrderPolicy::Stack, OrderPolicy::Queue, OrderPolicy::ParallelSweep];
}

struct CapHit {
    site: usize,
}

/// Reusable stabilizer for one volume. Keeps the stencil and work buffers
/// so that repeated single-grain additions do not reallocate.
#[derive(Debug, Clone)]
pub struct Engine {
    volume: Volume,
    stencil: Stencil,
    cap: u64,
    queue: VecDeque<u32>,
    queued: Vec<bool>,
}

impl Engine {
    pub fn new(volume: &Volume) -> Self {
        Self::with_cap(volume, DEFAULT_TOPPLING_CAP)
    }

    pub fn with_cap(volume: &Volume, cap: u64) -> Self {
        Engine {
            volume: volume.clone(),
            stencil: volume.stencil(),
            cap,
            queue: VecDeque::new(),
            queued: vec![false; volume.len()],
        }
    }

    pub fn volume(&self) -> &Volume {
        &self.volume
    }

    pub fn stencil(&self) -> &Stencil {
        &self.stencil
    }

    pub fn cap(&self) -> u64 {
        self.cap
    }

    fn threshold(&self) -> i64 {
        self.stencil.degree() as i64
    }

    /// Relax `h` in place with FIFO order and bulk topplings, adding the
    /// topplings to `m`. Returns the number of topplings performed.
    fn relax_queue(&mut self, h: &mut [i64], m: &mut [u64], seeds: impl Iterator<Item = usize>) -> Result<u64, CapHit> {
        let t = self.threshold();
        for i in seeds {
            if h[i] > t && !self.queued[i] {
                self.queued[i] = true;
                self.queue.push_back(i as u32);
            }
        }
        let mut total = 0u64;
        while let Some(x) = self.queue.pop_front() {
            let x = x as usize;
            self.queued[x] = false;
            let hx = h[x];
            if hx <= t {
                continue;
            }
            // largest k with every one of the k topplings legal: k = floor((h-1)/t)
            let k = (hx - 1) / t;
            h[x] = hx - k * t;
            m[x] += k as u64;
            total += k as u64;
            if m[x] > self.cap {
                self.queue.clear();
                self.queued.fill(false);
                return Err(CapHit { site: x });
            }
            for &y in self.stencil.neighbors(x) {
                if y != SINK {
                    let y = y as usize;
                    h[y] += k;
                    if h[y] > t && !self.queued[y] {
                        self.queued[y] = true;
                        self.queue.push_back(y as u32);
                    }
                }
            }
        }
        Ok(total)
    }

    fn finish(&self, h: Vec<i64>, m: Vec<u64>, total: u64) -> Result<StabilizationResult> {
        let grains_lost = m.iter().enumerate().map(|(i, &c)| c * self.stencil.lacking(i) as u64).sum();
        let xi = HeightConfig::new(self.volume.clone(), h)?;
        Ok(StabilizationResult {
            xi,
            m: TopplingVector { volume: self.volume.clone(), counts: m },
            total_topplings: total,
            grains_lost,
            waves: None,
        })
    }

    fn capped(&self, hit: CapHit, m: Vec<u64>) -> Stabilization {
        Stabilization::CapExceeded(CapExceeded {
            site: self.volume.site(hit.site),
            cap: self.cap,
            partial: TopplingVector { volume: self.volume.clone(), counts: m },
        })
    }

    fn check_volume(&self, eta: &HeightConfig) -> Result<()> {
        if eta.volume() != &self.volume {
            return Err(Error::InvalidVolume(format!("engine for {} got {}", self.volume, eta.volume())));
        }
        Ok(())
    }

    /// Stabilize with the default scheduler.
    pub fn stabilize(&mut self, eta: &HeightConfig) -> Result<Stabilization> {
        self.check_volume(eta)?;
        let mut h = eta.heights().to_vec();
        let mut m = vec![0u64; h.len()];
        match self.relax_queue(&mut h, &mut m, 0..eta.volume().len()) {
            Ok(total) => Ok(Stabilization::Stable(self.finish(h, m, total)?)),
            Err(hit) => Ok(self.capped(hit, m)),
        }
    }

    /// Stabilize starting from a known lower bound `lower` on the odometer.
    ///
    /// The configuration `eta - Δ_V lower` (which may have negative heights)
    /// is relaxed with legal topplings and the result is offset by `lower`.
    /// By the least action principle this reproduces the ordinary
    /// stabilization exactly whenever `lower <= m` pointwise.
    pub fn stabilize_from(&mut self, eta: &HeightConfig, lower: &[u64]) -> Result<Stabilization> {
        self.check_volume(eta)?;
        if lower.len() != eta.volume().len() {
            return Err(Error::Format("lower bound has the wrong length".into()));
        }
        let lower_i: Vec<i64> = lower.iter().map(|&c| c as i64).collect();
        let pushed = crate::lattice::apply_toppling(&self.stencil, &lower_i);
        let mut h: Vec<i64> = eta.heights().iter().zip(&pushed).map(|(a, b)| a - b).collect();
        let mut m = lower.to_vec();
        let start: u64 = lower.iter().sum();
        match self.relax_queue(&mut h, &mut m, 0..eta.volume().len()) {
            Ok(total) => {
                if h.iter().any(|&x| x < 0) {
                    return Err(Error::Invariant("warm start exceeded the odometer".into()));
                }
                Ok(Stabilization::Stable(self.finish(h, m, start + total)?))
            }
            Err(hit) => Ok(self.capped(hit, m)),
        }
    }

    /// Add one grain at site index `i` of the stable state `h` and relax.
    /// Used by the recurrent chain; returns the avalanche size.
    pub fn add_and_relax(&mut self, h: &mut [i64], m: &mut [u64], i: usize) -> Result<u64> {
        h[i] += 1;
        self.relax_queue(h, m, std::iter::once(i)).map_err(|_| Error::IterationCap(self.cap))
    }

    /// Stabilize with an explicit toppling order.
    pub fn stabilize_with_order(&mut self, eta: &HeightConfig, policy: OrderPolicy, seed: u64) -> Result<Stabilization> {
        self.check_volume(eta)?;
        let mut h = eta.heights().to_vec();
        let mut m = vec![0u64; h.len()];
        let res = match policy {
            OrderPolicy::Scanline => self.run_scanline(&mut h, &mut m),
            OrderPolicy::Random => self.run_random(&mut h, &mut m, seed),
            OrderPolicy::Stack => self.run_worklist(&mut h, &mut m, true),
            OrderPolicy::Queue => self.run_worklist(&mut h, &mut m, false),
            OrderPolicy::ParallelSweep => self.run_parallel(&mut h, &mut m),
        };
        match res {
            Ok(total) => Ok(Stabilization::Stable(self.finish(h, m, total)?)),
            Err(hit) => Ok(self.capped(hit, m)),
        }
    }

    #[inline]
    fn topple_once(&self, h: &mut [i64], m: &mut [u64], x: usize) -> Result<(), CapHit> {
        h[x] -= self.threshold();
        m[x] += 1;
        if m[x] > self.cap {
            return Err(CapHit { site: x });
        }
        for &y in self.stencil.neighbors(x) {
            if y != SINK {
                h[y as usize] += 1;
            }
        }
        Ok(())
    }

    fn run_scanline(&self, h: &mut [i64], m: &mut [u64]) -> Result<u64, CapHit> {
        let t = self.threshold();
        let mut total = 0;
        loop {
            let mut changed = false;
            for x in 0..h.len() {
                if h[x] > t {
                    self.topple_once(h, m, x)?;
                    total += 1;
                    changed = true;
                }
            }
            if !changed {
                return Ok(total);
            }
        }
    }

    fn run_random(&self, h: &mut [i64], m: &mut [u64], seed: u64) -> Result<u64, CapHit> {
        let t = self.threshold();
        let mut rng = rng::stream(seed, Domain::Order, 0, 0);
        let mut unstable: Vec<u32> = (0..h.len() as u32).filter(|&i| h[i as usize] > t).collect();
        let mut pos = vec![u32::MAX; h.len()];
        for (k, &i) in unstable.iter().enumerate() {
            pos[i as usize] = k as u32;
        }
        let mut total = 0;
        while !unstable.is_empty() {
            let k = rng.random_range(0..unstable.len());
            let x = unstable[k] as usize;
            self.topple_once(h, m, x)?;
            total += 1;
            if h[x] <= t {
                let last = *unstable.last().expect("nonempty");
                unstable.swap_remove(k);
                if (last as usize) != x {
                    pos[last as usize] = k as u32;
                }
                pos[x] = u32::MAX;
            }
            for &y in self.stencil.neighbors(x) {
                if y != SINK && h[y as usize] > t && pos[y as usize] == u32::MAX {
                    pos[y as usize] = unstable.len() as u32;
                    unstable.push(y);
                }
            }
        }
        Ok(total)
    }

    fn run_worklist(&self, h: &mut [i64], m: &mut [u64], lifo: bool) -> Result<u64, CapHit> {
        let t = self.threshold();
        let mut work: VecDeque<u32> = (0..h.len() as u32).filter(|&i| h[i as usize] > t).collect();
        let mut listed = vec![false; h.len()];
        for &i in &work {
            listed[i as usize] = true;
        }
        let mut total = 0;
        loop {
            let next = if lifo { work.pop_back() } else { work.pop_front() };
            let Some(x) = next else { return Ok(total) };
            let x = x as usize;
            listed[x] = false;
            if h[x] <= t {
                continue;
            }
            self.topple_once(h, m, x)?;
            total += 1;
            if h[x] > t {
                listed[x] = true;
                work.push_back(x as u32);
            }
            for &y in self.stencil.neighbors(x) {
                if y != SINK && h[y as usize] > t && !listed[y as usize] {
                    listed[y as usize] = true;
                    work.push_back(y);
                }
            }
        }
    }

    fn run_parallel(&self, h: &mut [i64], m: &mut [u64]) -> Result<u64, CapHit> {
        let t = self.threshold();
        let st = &self.stencil;
        let mut total = 0u64;
        let mut fire = vec![0i64; h.len()];
        loop {
            fire.par_iter_mut().zip(h.par_iter()).for_each(|(f, &hx)| *f = (hx > t) as i64);
            let fired: u64 = fire.par_iter().map(|&f| f as u64).sum();
            if fired == 0 {
                return Ok(total);
            }
            total += fired;
            h.par_iter_mut().enumerate().for_each(|(i, hx)| {
                let inflow: i64 = st.neighbors(i).iter().filter(|&&j| j != SINK).map(|&j| fire[j as usize]).sum();
                *hx += inflow - t * fire[i];
            });
            for (i, (mx, &f)) in m.iter_mut().zip(&fire).enumerate() {
                *mx += f as u64;
                if *mx > self.cap {
                    return Err(CapHit { site: i });
                }
            }
        }
    }
}

/// Stabilize `eta` restricted to `v` (which must lie inside `eta`'s volume).
pub fn stabilize(eta: &HeightConfig, v: &Volume) -> Result<Stabilization> {
    let eta = if eta.volume() == v { eta.clone() } else { eta.restrict(v)? };
    Engine::new(v).stabilize(&eta)
}

/// Stabilize and fail on a cap hit.
pub fn stabilize_strict(eta: &HeightConfig) -> Result<StabilizationResult> {
    Engine::new(eta.volume()).stabilize(eta)?.into_result()
}

pub fn stabilize_with_order(eta: &HeightConfig, v: &Volume, policy: OrderPolicy, seed: u64) -> Result<Stabilization> {
    let eta = if eta.volume() == v { eta.clone() } else { eta.restrict(v)? };
    Engine::new(v).stabilize_with_order(&eta, policy, seed)
}

/// `eta` with `k` extra grains at `x`.
pub fn add(eta: &HeightConfig, x: &Site, k: i64) -> Result<HeightConfig> {
    eta.add(x, k)
}

/// The addition field `λ_V`: each site receives as many grains as it has
/// neighbours outside `v`.
pub fn special_boundary_addition(v: &Volume) -> HeightConfig {
    let st = v.stencil();
    let heights = (0..v.len()).map(|i| st.lacking(i) as i64).collect();
    HeightConfig::new(v.clone(), heights).expect("lacking counts are nonnegative")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_site(d: usize) -> Volume {
        Volume::new(vec![0; d], vec![0; d]).unwrap()
    }

    #[test]
    fn single_site_d1() {
        let v = one_site(1);
        let eta = HeightConfig::new(v.clone(), vec![3]).unwrap();
        let r = stabilize(&eta, &v).unwrap().stable().unwrap();
        assert_eq!(r.xi.heights(), &[1]);
        assert_eq!(r.m.counts, vec![1]);
        assert_eq!(r.grains_lost, 2);
    }

    #[test]
    fn stable_input_is_fixed() {
        let v = Volume::rect(6, 5).unwrap();
        let eta = HeightConfig::constant(&v, 4).unwrap();
        for p in OrderPolicy::ALL {
            let r = stabilize_with_order(&eta, &v, p, 1).unwrap().stable().unwrap();
            assert!(r.m.is_zero());
            assert_eq!(r.xi, eta);
        }
    }

    #[test]
    fn policies_agree_on_all_fives() {
        let v = Volume::rect(4, 4).unwrap();
        let eta = HeightConfig::constant(&v, 5).unwrap();
        let base = stabilize(&eta, &v).unwrap().stable().unwrap();
        for p in OrderPolicy::ALL {
            for seed in [1, 2] {
                let r = stabilize_with_order(&eta, &v, p, seed).unwrap().stable().unwrap();
                assert_eq!(r.xi, base.xi, "{p:?}");
                assert_eq!(r.m, base.m, "{p:?}");
            }
        }
    }

    #[test]
    fn special_addition_shapes() {
        let v = Volume::rect(4, 3).unwrap();
        let a = special_boundary_addition(&v);
        assert_eq!(a.get(&Site::from([0, 0])), Some(2));
        assert_eq!(a.get(&Site::from([3, 2])), Some(2));
        assert_eq!(a.get(&Site::from([1, 0])), Some(1));
        assert_eq!(a.get(&Site::from([1, 1])), Some(0));
        let line = special_boundary_addition(&Volume::new(vec![0], vec![4]).unwrap());
        assert_eq!(line.heights(), &[1, 0, 0, 0, 1]);
        assert_eq!(special_boundary_addition(&one_site(2)).heights(), &[4]);
    }

    #[test]
    fn cap_is_reported_not_raised() {
        let v = Volume::centered(2, 16).unwrap();
        let eta = HeightConfig::constant(&v, 40).unwrap();
        let out = Engine::with_cap(&v, 10).stabilize(&eta).unwrap();
        match out {
            Stabilization::CapExceeded(c) => {
                assert_eq!(c.cap, 10);
                assert!(c.partial.counts.iter().any(|&k| k > 10));
            }
            _ => panic!("expected cap"),
        }
    }

    #[test]
    fn warm_start_matches_cold() {
        let v = Volume::centered(2, 12).unwrap();
        let eta = HeightConfig::from_fn(&v, |s| 3 + (s.coords()[0] * 7 + s.coords()[1] * 3).rem_euclid(5)).unwrap();
        let cold = stabilize(&eta, &v).unwrap().stable().unwrap();
        let half: Vec<u64> = cold.m.counts.iter().map(|c| c / 2).collect();
        let warm = Engine::new(&v).stabilize_from(&eta, &half).unwrap().stable().unwrap();
        assert_eq!(warm.m, cold.m);
        assert_eq!(warm.xi, cold.xi);
        assert_eq!(warm.total_topplings, cold.total_topplings);
    }
}
