use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::config::HeightConfig;
use crate::error::{Error, Result};
use crate::lattice::Volume;
use crate::rng::{stream, Domain};

/// `ζ(x, y) = ω(x) + ω'(y)` with independent Bernoulli(`p`) lines.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineFieldParams {
    pub p: f64,
    pub seed: u64,
}

impl LineFieldParams {
    /// Mark on the vertical line through `x`.
    pub fn omega(&self, x: i64) -> bool {
        stream(self.seed, Domain::Omega, x as u64, 0).random::<f64>() < self.p
    }

    /// Mark on the horizontal line through `y`.
    pub fn omega_prime(&self, y: i64) -> bool {
        stream(self.seed, Domain::OmegaPrime, y as u64, 0).random::<f64>() < self.p
    }
}

/// Closed axis-aligned rectangle `[lo_x, hi_x] x [lo_y, hi_y]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rectangle {
    pub lo: [i64; 2],
    pub hi: [i64; 2],
}

impl Rectangle {
    pub fn contains(&self, x: i64, y: i64) -> bool {
        self.lo[0] <= x && x <= self.hi[0] && self.lo[1] <= y && y <= self.hi[1]
    }

    /// `other` lies strictly inside, so the boundaries are disjoint.
    pub fn strictly_contains(&self, other: &Rectangle) -> bool {
        self.lo[0] < other.lo[0] && other.hi[0] < self.hi[0] && self.lo[1] < other.lo[1] && other.hi[1] < self.hi[1]
    }

    pub fn volume(&self) -> Volume {
        Volume::new(self.lo.to_vec(), self.hi.to_vec()).expect("nonempty rectangle")
    }
}

/// Nested rectangles around the origin whose four delimiting lines are
/// marked, innermost first.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RectangleLadder {
    pub rects: Vec<Rectangle>,
}

impl RectangleLadder {
    pub fn count(&self) -> usize {
        self.rects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rects.is_empty()
    }

    /// Rectangles that fit in `v`. Because the ladder is nested this is a
    /// prefix.
    pub fn count_inside(&self, v: &Volume) -> usize {
        self.rects.iter().take_while(|r| r.volume().is_subset_of(v)).count()
    }

    /// Nesting, origin containment, and marks on every side.
    pub fn verify(&self, zeta: &HeightConfig) -> bool {
        let h = |x: i64, y: i64| zeta.get(&[x, y].into()).unwrap_or(-1);
        self.rects.iter().all(|r| {
            r.contains(0, 0)
                && r.lo[0] < r.hi[0]
                && r.lo[1] < r.hi[1]
                && (r.lo[0]..=r.hi[0]).all(|x| h(x, r.lo[1]) >= 1 && h(x, r.hi[1]) >= 1)
                && (r.lo[1]..=r.hi[1]).all(|y| h(r.lo[0], y) >= 1 && h(r.hi[0], y) >= 1)
                && [r.lo[0], r.hi[0]].iter().all(|&x| h(x, r.lo[1]) == 2 && h(x, r.hi[1]) == 2)
        }) && self.rects.windows(2).all(|w| w[1].strictly_contains(&w[0]))
    }
}

/// Sample the line field on a two-dimensional `v` together with its ladder.
pub fn line_field(params: &LineFieldParams, v: &Volume) -> Result<(HeightConfig, RectangleLadder)> {
    if v.dim() != 2 {
        return Err(Error::RequiresDimension { required: 2, got: v.dim() });
    }
    if !(0.0..=1.0).contains(&params.p) {
        return Err(Error::InvalidSampler(format!("probability {} not in [0, 1]", params.p)));
    }
    let (lo, hi) = (v.lo(), v.hi());
    let omega: Vec<bool> = (lo[0]..=hi[0]).map(|x| params.omega(x)).collect();
    let omega_prime: Vec<bool> = (lo[1]..=hi[1]).map(|y| params.omega_prime(y)).collect();
    line_field_from_lines(v, &omega, &omega_prime)
}

/// Line field from explicit marks; `omega[i]` is the mark at `x = lo_x + i`.
pub fn line_field_from_lines(
    v: &Volume,
    omega: &[bool],
    omega_prime: &[bool],
) -> Result<(HeightConfig, RectangleLadder)> {
    if v.dim() != 2 {
        return Err(Error::RequiresDimension { required: 2, got: v.dim() });
    }
    if omega.len() != v.extents()[0] || omega_prime.len() != v.extents()[1] {
        return Err(Error::InvalidSampler("mark arrays do not match the volume".into()));
    }
    let lo = v.lo();
    let zeta = HeightConfig::from_fn(v, |s| {
        let c = s.coords();
        omega[(c[0] - lo[0]) as usize] as i64 + omega_prime[(c[1] - lo[1]) as usize] as i64
    })?;
    let marks = |m: &[bool], l: i64| -> Vec<i64> {
        m.iter().enumerate().filter(|(_, b)| **b).map(|(i, _)| l + i as i64).collect()
    };
    if !v.contains(&[0, 0].into()) {
        return Ok((zeta, RectangleLadder::default()));
    }
    let xs = pair_sides(&marks(omega, lo[0]));
    let ys = pair_sides(&marks(omega_prime, lo[1]));
    let rects = xs
        .iter()
        .zip(&ys)
        .map(|(&(x0, x1), &(y0, y1))| Rectangle { lo: [x0, y0], hi: [x1, y1] })
        .collect();
    Ok((zeta, RectangleLadder { rects }))
}

/// Pair marked coordinates on either side of 0 into nested intervals,
/// closest first. A mark at 0 goes to whichever side is shorter.
fn pair_sides(marks: &[i64]) -> Vec<(i64, i64)> {
    let mut left: Vec<i64> = marks.iter().copied().filter(|&x| x < 0).rev().collect();
    let mut right: Vec<i64> = marks.iter().copied().filter(|&x| x > 0).collect();
    if marks.contains(&0) {
        if left.len() <= right.len() {
            left.insert(0, 0);
        } else {
            right.insert(0, 0);
        }
    }
    left.into_iter().zip(right).collect()
}
