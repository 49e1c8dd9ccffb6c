//! Activated random walkers: every site carries a rate-1 Poisson clock and
//! topples at a ring only if it is unstable at that moment.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::config::{HeightConfig, TopplingVector};
use crate::error::{Error, Result};
use crate::lattice::{apply_toppling, Stencil, Volume, SINK};
use crate::rng::{stream, Domain};

/// Per-site rate-1 Poisson clocks. The `k`-th inter-arrival time of site
/// `i` is a pure function of `(seed, i, k)`, so clocks are generated lazily.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClockSchedule {
    pub seed: u64,
}

impl ClockSchedule {
    pub const RATE: f64 = 1.0;

    /// Waiting time before ring `k + 1` of site `i`.
    pub fn gap(&self, i: usize, k: u64) -> f64 {
        let u: f64 = stream(self.seed, Domain::Clock, i as u64, k).random();
        -(1.0 - u).ln() / Self::RATE
    }

    /// First `count` ring times of site `i`.
    pub fn ring_times(&self, i: usize, count: u64) -> Vec<f64> {
        let mut t = 0.0;
        (0..count)
            .map(|k| {
                t += self.gap(i, k);
                t
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArwState {
    pub config: HeightConfig,
    pub t: f64,
    /// Topplings per site up to `t`.
    pub n: TopplingVector,
    /// Clock rings per site up to `t`.
    pub rings: Vec<u64>,
}

impl ArwState {
    /// `n(x) <= rings(x)` everywhere.
    pub fn clock_bound_holds(&self) -> bool {
        self.n.counts.iter().zip(&self.rings).all(|(n, r)| n <= r)
    }

    pub fn unstable_count(&self) -> usize {
        let t = self.config.threshold();
        self.config.heights().iter().filter(|&&h| h > t).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ArwStop {
    UntilQuiescent,
    TMax(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArwRun {
    pub state: ArwState,
    pub quiescent: bool,
    pub events: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub t: f64,
    pub unstable_count: usize,
    pub total_topplings: u64,
    pub clock_bound_holds: bool,
}

/// Default bound on clock rings in a run to quiescence.
pub const DEFAULT_EVENT_CAP: u64 = 1 << 32;

#[derive(Debug, Clone, Copy, PartialEq)]
struct Ring {
    t: f64,
    site: u32,
}

impl Eq for Ring {}

impl Ord for Ring {
    // reversed so the max-heap pops the earliest ring, lowest index first
    fn cmp(&self, other: &Self) -> Ordering {
        other.t.total_cmp(&self.t).then(other.site.cmp(&self.site))
    }
}

impl PartialOrd for Ring {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

struct Sim {
    initial: Vec<i64>,
    stencil: Stencil,
    volume: Volume,
    clocks: ClockSchedule,
    h: Vec<i64>,
    n: Vec<u64>,
    rings: Vec<u64>,
    heap: BinaryHeap<Ring>,
    unstable: usize,
    t: f64,
    events: u64,
    next_check: u64,
}

impl Sim {
    fn new(initial: &HeightConfig, seed: u64) -> Self {
        let volume = initial.volume().clone();
        let clocks = ClockSchedule { seed };
        let thr = initial.threshold();
        let heap = (0..volume.len()).map(|i| Ring { t: clocks.gap(i, 0), site: i as u32 }).collect();
        Sim {
            initial: initial.heights().to_vec(),
            stencil: volume.stencil(),
            h: initial.heights().to_vec(),
            n: vec![0; volume.len()],
            rings: vec![0; volume.len()],
            unstable: initial.heights().iter().filter(|&&h| h > thr).count(),
            heap,
            volume,
            clocks,
            t: 0.0,
            events: 0,
            next_check: 1,
        }
    }

    fn threshold(&self) -> i64 {
        self.stencil.degree() as i64
    }

    fn peek(&self) -> f64 {
        self.heap.peek().map_or(f64::INFINITY, |r| r.t)
    }

    /// Process the next ring.
    fn step(&mut self) -> Result<()> {
        let Ring { t, site } = self.heap.pop().expect("every site has a pending ring");
        let x = site as usize;
        self.t = t;
        self.rings[x] += 1;
        self.events += 1;
        let thr = self.threshold();
        if self.h[x] > thr {
            self.h[x] -= thr;
            self.n[x] += 1;
            if self.h[x] <= thr {
                self.unstable -= 1;
            }
            for k in 0..self.stencil.neighbors(x).len() {
                let y = self.stencil.neighbors(x)[k];
                if y != SINK {
                    let y = y as usize;
                    self.h[y] += 1;
                    if self.h[y] == thr + 1 {
                        self.unstable += 1;
                    }
                }
            }
        }
        self.heap.push(Ring { t: t + self.clocks.gap(x, self.rings[x]), site });
        if self.events == self.next_check {
            self.next_check *= 2;
            self.check()?;
        }
        Ok(())
    }

    /// `config = initial - Δ n` and the clock bound.
    fn check(&self) -> Result<()> {
        let n: Vec<i64> = self.n.iter().map(|&c| c as i64).collect();
        let pushed = apply_toppling(&self.stencil, &n);
        if self.initial.iter().zip(&pushed).zip(&self.h).any(|((a, p), h)| a - p != *h) {
            return Err(Error::Invariant(format!("config != initial - Δn after {} events", self.events)));
        }
        if self.n.iter().zip(&self.rings).any(|(n, r)| n > r) {
            return Err(Error::Invariant("more topplings than clock rings".into()));
        }
        Ok(())
    }

    fn state(&self) -> Result<ArwState> {
        Ok(ArwState {
            config: HeightConfig::new(self.volume.clone(), self.h.clone())?,
            t: self.t,
            n: TopplingVector { volume: self.volume.clone(), counts: self.n.clone() },
            rings: self.rings.clone(),
        })
    }

    fn point(&self, t: f64) -> TracePoint {
        TracePoint {
            t,
            unstable_count: self.unstable,
            total_topplings: self.n.iter().sum(),
            clock_bound_holds: self.n.iter().zip(&self.rings).all(|(n, r)| n <= r),
        }
    }
}

/// Run the dynamics on the volume of `initial`, with sink boundary.
///
/// Until quiescence the run ends at the ring that stabilizes the last site
/// (time 0 for a stable input). With `TMax` it ends at the last ring not
/// after `t_max`; `quiescent` reports whether the state is stable.
pub fn arw_run(initial: &HeightConfig, stop: ArwStop, seed: u64) -> Result<ArwRun> {
    arw_run_capped(initial, stop, seed, DEFAULT_EVENT_CAP)
}

pub fn arw_run_capped(initial: &HeightConfig, stop: ArwStop, seed: u64, event_cap: u64) -> Result<ArwRun> {
    let mut sim = Sim::new(initial, seed);
    let t_max = match stop {
        ArwStop::UntilQuiescent => f64::INFINITY,
        ArwStop::TMax(t) => t,
    };
    while sim.unstable > 0 && sim.peek() <= t_max {
        if sim.events >= event_cap {
            return Err(Error::IterationCap(event_cap));
        }
        sim.step()?;
    }
    if let ArwStop::TMax(t) = stop {
        sim.t = t;
    }
    sim.check()?;
    Ok(ArwRun { quiescent: sim.unstable == 0, events: sim.events, state: sim.state()? })
}

/// Unstable-site count and total topplings at each time of `t_grid`
/// (sorted ascending), running until the last grid time or quiescence.
pub fn arw_trace(initial: &HeightConfig, t_grid: &[f64], seed: u64) -> Result<Vec<TracePoint>> {
    if t_grid.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::Usage("time grid must be sorted".into()));
    }
    let mut sim = Sim::new(initial, seed);
    let mut out = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        while sim.unstable > 0 && sim.peek() <= t {
            if sim.events >= DEFAULT_EVENT_CAP {
                return Err(Error::IterationCap(DEFAULT_EVENT_CAP));
            }
            sim.step()?;
        }
        out.push(sim.point(t));
    }
    sim.check()?;
    Ok(out)
}
