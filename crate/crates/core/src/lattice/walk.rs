//! Simple random walk killed on leaving a volume.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::geometry::{Site, Volume};
use crate::error::{Error, Result};
use crate::rng::{self, Domain};

/// Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
    pub n: usize,
}

impl Estimate {
    pub fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len();
        if n == 0 {
            return Estimate { mean: f64::NAN, stderr: f64::NAN, n };
        }
        let mean = xs.iter().sum::<f64>() / n as f64;
        let stderr = if n > 1 {
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            (var / n as f64).sqrt()
        } else {
            0.0
        };
        Estimate { mean, stderr, n }
    }

    /// `|mean - target| <= k * stderr`, treating a zero stderr as exact.
    pub fn within(&self, target: f64, k: f64) -> bool {
        let diff = (self.mean - target).abs();
        if self.stderr == 0.0 { diff < 1e-12 } else { diff <= k * self.stderr }
    }
}

/// A walk trajectory. `steps[lifetime]` is the first site outside the
/// volume, or the walk was truncated before exiting and `lifetime` is `None`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WalkPath {
    pub steps: Vec<Site>,
    pub lifetime: Option<usize>,
}

fn step<R: Rng>(x: &mut [i64], rng: &mut R) {
    let d = x.len();
    let k = rng.random_range(0..2 * d);
    x[k / 2] += if k % 2 == 0 { 1 } else { -1 };
}

/// Walk from `start` until it leaves `v` or `max_steps` moves were made.
pub fn walk_path<R: Rng>(v: &Volume, start: &Site, max_steps: usize, rng: &mut R) -> WalkPath {
    let mut x = start.coords().to_vec();
    let mut steps = vec![start.clone()];
    let mut lifetime = if v.contains(start) { None } else { Some(0) };
    while lifetime.is_none() && steps.len() <= max_steps {
        step(&mut x, rng);
        let s = Site::new(x.clone());
        if !v.contains(&s) {
            lifetime = Some(steps.len());
        }
        steps.push(s);
    }
    WalkPath { steps, lifetime }
}

/// Estimate `(1/2d) E_x[visits to y before leaving V]`, which is `G_V(x, y)`.
/// Walk `k` draws from its own stream keyed by `(seed, k)`.
pub fn rw_visits_estimate(v: &Volume, x: &Site, y: &Site, n_walks: usize, seed: u64) -> Result<Estimate> {
    if !v.contains(x) {
        return Err(Error::SiteOutside(x.clone()));
    }
    if !v.contains(y) {
        return Err(Error::SiteOutside(y.clone()));
    }
    if n_walks == 0 {
        return Err(Error::Usage("n_walks must be >= 1".into()));
    }
    let scale = 1.0 / (2 * v.dim()) as f64;
    let target = y.coords();
    let samples: Vec<f64> = (0..n_walks as u64)
        .map(|k| {
            let mut rng = rng::stream(seed, Domain::Walk, k, 0);
            let mut pos = x.coords().to_vec();
            let mut visits = 0u64;
            loop {
                if pos == target {
                    visits += 1;
                }
                step(&mut pos, &mut rng);
                if !in_box(v, &pos) {
                    break;
                }
            }
            visits as f64 * scale
        })
        .collect();
    Ok(Estimate::from_samples(&samples))
}

pub(crate) fn in_box(v: &Volume, c: &[i64]) -> bool {
    c.iter().zip(v.lo().iter().zip(v.hi())).all(|(c, (l, h))| l <= c && c <= h)
}
