use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest dimension the crate supports. Everything is written for general
/// `d`, but only d = 1, 2, 3 are exercised.
pub const MAX_DIM: usize = 3;

/// A point of Z^d.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Site(Vec<i64>);

impl Site {
    pub fn new(coords: Vec<i64>) -> Self {
        Site(coords)
    }

    pub fn origin(d: usize) -> Self {
        Site(vec![0; d])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    pub fn l1_distance(&self, other: &Site) -> i64 {
        self.0.iter().zip(&other.0).map(|(a, b)| (a - b).abs()).sum()
    }

    /// The 2d nearest neighbours, in the order +e_0, -e_0, +e_1, -e_1, ...
    pub fn neighbors(&self) -> Vec<Site> {
        let mut out = Vec::with_capacity(2 * self.dim());
        for axis in 0..self.dim() {
            for step in [1, -1] {
                let mut c = self.0.clone();
                c[axis] += step;
                out.push(Site(c));
            }
        }
        out
    }
}

impl From<Vec<i64>> for Site {
    fn from(v: Vec<i64>) -> Self {
        Site(v)
    }
}

impl<const N: usize> From<[i64; N]> for Site {
    fn from(v: [i64; N]) -> Self {
        Site(v.to_vec())
    }
}

impl fmt::Display for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// Nearest neighbours of `x` in Z^d.
pub fn neighbors(x: &Site) -> Vec<Site> {
    x.neighbors()
}

/// Inclusive axis-aligned box `lo..=hi` in Z^d.
///
/// Sites are linearised in row-major (C) order over the coordinate tuple:
/// the last coordinate varies fastest.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "VolumeRepr", into = "VolumeRepr")]
pub struct Volume {
    lo: Vec<i64>,
    hi: Vec<i64>,
    extents: Vec<usize>,
    strides: Vec<usize>,
    len: usize,
}

#[derive(Serialize, Deserialize)]
struct VolumeRepr {
    lo: Vec<i64>,
    hi: Vec<i64>,
}

impl TryFrom<VolumeRepr> for Volume {
    type Error = Error;
    fn try_from(r: VolumeRepr) -> Result<Self> {
        Volume::new(r.lo, r.hi)
    }
}

impl From<Volume> for VolumeRepr {
    fn from(v: Volume) -> Self {
        VolumeRepr { lo: v.lo, hi: v.hi }
    }
}

impl Volume {
    pub fn new(lo: Vec<i64>, hi: Vec<i64>) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(Error::DimensionMismatch { expected: lo.len(), got: hi.len() });
        }
        let d = lo.len();
        if d == 0 || d > MAX_DIM {
            return Err(Error::UnsupportedDimension(d));
        }
        if lo.iter().zip(&hi).any(|(l, h)| l > h) {
            return Err(Error::InvalidVolume(format!("lo {lo:?} is not <= hi {hi:?}")));
        }
        let extents: Vec<usize> = lo.iter().zip(&hi).map(|(l, h)| (h - l + 1) as usize).collect();
        let mut strides = vec![1usize; d];
        for i in (0..d - 1).rev() {
            strides[i] = strides[i + 1] * extents[i + 1];
        }
        let len = extents.iter().product();
        if len > u32::MAX as usize {
            return Err(Error::InvalidVolume(format!("{len} sites is too many")));
        }
        Ok(Volume { lo, hi, extents, strides, len })
    }

    /// Box `[0, w) x [0, h)`.
    pub fn rect(w: usize, h: usize) -> Result<Self> {
        if w == 0 || h == 0 {
            return Err(Error::InvalidVolume("empty rectangle".into()));
        }
        Volume::new(vec![0, 0], vec![w as i64 - 1, h as i64 - 1])
    }

    /// Cube of side `side` containing the origin: `[-k, k]` for odd
    /// `side = 2k + 1`, `[-k, k - 1]` for even `side = 2k`. Cubes obtained by
    /// doubling an even side, or by `2k+1 -> 4k+1`-style growth, are nested.
    pub fn centered(d: usize, side: usize) -> Result<Self> {
        Self::centered_box(&vec![side; d])
    }

    pub fn centered_box(extents: &[usize]) -> Result<Self> {
        if extents.contains(&0) {
            return Err(Error::InvalidVolume("zero extent".into()));
        }
        let lo: Vec<i64> = extents.iter().map(|&e| -((e / 2) as i64)).collect();
        let hi: Vec<i64> = lo.iter().zip(extents).map(|(l, &e)| l + e as i64 - 1).collect();
        Volume::new(lo, hi)
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[i64] {
        &self.lo
    }

    pub fn hi(&self) -> &[i64] {
        &self.hi
    }

    pub fn extents(&self) -> &[usize] {
        &self.extents
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn max_extent(&self) -> usize {
        self.extents.iter().copied().max().unwrap_or(0)
    }

    pub fn contains(&self, x: &Site) -> bool {
        x.dim() == self.dim()
            && x.coords().iter().zip(self.lo.iter().zip(&self.hi)).all(|(c, (l, h))| l <= c && c <= h)
    }

    pub fn index_of(&self, x: &Site) -> Option<usize> {
        if !self.contains(x) {
            return None;
        }
        Some(
            x.coords()
                .iter()
                .zip(&self.lo)
                .zip(&self.strides)
                .map(|((c, l), s)| (c - l) as usize * s)
                .sum(),
        )
    }

    pub fn try_index(&self, x: &Site) -> Result<usize> {
        self.index_of(x).ok_or_else(|| Error::SiteOutside(x.clone()))
    }

    pub fn site(&self, mut idx: usize) -> Site {
        debug_assert!(idx < self.len);
        let mut c = vec![0i64; self.dim()];
        for (i, s) in self.strides.iter().enumerate() {
            c[i] = self.lo[i] + (idx / s) as i64;
            idx %= s;
        }
        Site::new(c)
    }

    pub fn sites(&self) -> impl Iterator<Item = Site> + '_ {
        (0..self.len).map(|i| self.site(i))
    }

    /// `self` is a subset of `other`.
    pub fn is_subset_of(&self, other: &Volume) -> bool {
        self.dim() == other.dim()
            && self.lo.iter().zip(&other.lo).all(|(a, b)| a >= b)
            && self.hi.iter().zip(&other.hi).all(|(a, b)| a <= b)
    }

    /// Number of nearest neighbours of `x` outside the volume.
    pub fn lacking_neighbors(&self, x: &Site) -> Result<u32> {
        if !self.contains(x) {
            return Err(Error::SiteOutside(x.clone()));
        }
        Ok(self.lacking_at(x.coords()))
    }

    fn lacking_at(&self, c: &[i64]) -> u32 {
        c.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .map(|(&c, (&l, &h))| (c == l) as u32 + (c == h) as u32)
            .sum()
    }

    /// Sites with at least one neighbour outside the volume.
    pub fn boundary(&self) -> Vec<Site> {
        self.sites().filter(|x| self.lacking_at(x.coords()) > 0).collect()
    }

    /// Row-major neighbour table for fast repeated access.
    pub fn stencil(&self) -> Stencil {
        Stencil::new(self)
    }
}

impl fmt::Display for Volume {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}..={}]", Site::new(self.lo.clone()), Site::new(self.hi.clone()))
    }
}

/// Sentinel for a neighbour that lies outside the volume (the sink).
pub const SINK: u32 = u32::MAX;

/// Precomputed neighbour indices of every site of a volume. Entry
/// `nbrs[2d * i + k]` is the k-th neighbour of site `i` (same order as
/// [`Site::neighbors`]) or [`SINK`].
#[derive(Debug, Clone)]
pub struct Stencil {
    degree: usize,
    nbrs: Vec<u32>,
    lacking: Vec<u8>,
}

impl Stencil {
    pub fn new(v: &Volume) -> Self {
        let d = v.dim();
        let degree = 2 * d;
        let mut nbrs = vec![SINK; v.len() * degree];
        let mut lacking = vec![0u8; v.len()];
        let mut coord = v.lo.clone();
        for i in 0..v.len() {
            for axis in 0..d {
                let s = v.strides[axis];
                if coord[axis] < v.hi[axis] {
                    nbrs[i * degree + 2 * axis] = (i + s) as u32;
                } else {
                    lacking[i] += 1;
                }
                if coord[axis] > v.lo[axis] {
                    nbrs[i * degree + 2 * axis + 1] = (i - s) as u32;
                } else {
                    lacking[i] += 1;
                }
            }
            // advance the row-major odometer
            for axis in (0..d).rev() {
                if coord[axis] < v.hi[axis] {
                    coord[axis] += 1;
                    break;
                }
                coord[axis] = v.lo[axis];
            }
        }
        Stencil { degree, nbrs, lacking }
    }

    /// 2d: the stability threshold and the diagonal of the toppling matrix.
    #[inline]
    pub fn degree(&self) -> usize {
        self.degree
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.lacking.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lacking.is_empty()
    }

    #[inline]
    pub fn neighbors(&self, i: usize) -> &[u32] {
        &self.nbrs[i * self.degree..(i + 1) * self.degree]
    }

    #[inline]
    pub fn lacking(&self, i: usize) -> u32 {
        self.lacking[i] as u32
    }
}
