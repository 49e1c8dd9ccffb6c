//! Height configurations and toppling vectors, with their JSON and binary
//! encodings.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{Site, Volume};

/// Grains per site on a finite box. Heights are nonnegative; the engine
/// accepts 0 even though sampled configurations usually start at 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct HeightConfig {
    volume: Volume,
    heights: Vec<i64>,
}

impl HeightConfig {
    pub fn new(volume: Volume, heights: Vec<i64>) -> Result<Self> {
        if heights.len() != volume.len() {
            return Err(Error::Format(format!(
                "{} heights for a volume of {} sites",
                heights.len(),
                volume.len()
            )));
        }
        if let Some((index, &height)) = heights.iter().enumerate().find(|(_, h)| **h < 0) {
            return Err(Error::NegativeHeight { index, height });
        }
        Ok(HeightConfig { volume, heights })
    }

    /// Build from a per-site function.
    pub fn from_fn<F: FnMut(&Site) -> i64>(volume: &Volume, mut f: F) -> Result<Self> {
        let heights = volume.sites().map(|s| f(&s)).collect();
        HeightConfig::new(volume.clone(), heights)
    }

    pub fn constant(volume: &Volume, h: i64) -> Result<Self> {
        HeightConfig::new(volume.clone(), vec![h; volume.len()])
    }

    /// The maximal stable configuration, `2d` everywhere.
    pub fn max_stable(volume: &Volume) -> Self {
        HeightConfig { volume: volume.clone(), heights: vec![2 * volume.dim() as i64; volume.len()] }
    }

    pub fn volume(&self) -> &Volume {
        &self.volume
    }

    pub fn heights(&self) -> &[i64] {
        &self.heights
    }

    pub fn into_heights(self) -> Vec<i64> {
        self.heights
    }

    pub fn get(&self, x: &Site) -> Option<i64> {
        self.volume.index_of(x).map(|i| self.heights[i])
    }

    pub fn threshold(&self) -> i64 {
        2 * self.volume.dim() as i64
    }

    pub fn is_stable(&self) -> bool {
        let t = self.threshold();
        self.heights.iter().all(|&h| h <= t)
    }

    pub fn total(&self) -> i64 {
        self.heights.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.total() as f64 / self.heights.len() as f64
    }

    /// `k` extra grains at `x`.
    pub fn add(&self, x: &Site, k: i64) -> Result<Self> {
        let i = self.volume.try_index(x)?;
        let mut out = self.clone();
        out.heights[i] += k;
        if out.heights[i] < 0 {
            return Err(Error::NegativeHeight { index: i, height: out.heights[i] });
        }
        Ok(out)
    }

    /// Pointwise sum of two configurations on the same volume.
    pub fn plus(&self, other: &HeightConfig) -> Result<Self> {
        if self.volume != other.volume {
            return Err(Error::InvalidVolume(format!("{} vs {}", self.volume, other.volume)));
        }
        let heights = self.heights.iter().zip(&other.heights).map(|(a, b)| a + b).collect();
        Ok(HeightConfig { volume: self.volume.clone(), heights })
    }

    /// Restriction to a sub-box.
    pub fn restrict(&self, w: &Volume) -> Result<Self> {
        if !w.is_subset_of(&self.volume) {
            return Err(Error::InvalidVolume(format!("{w} is not inside {}", self.volume)));
        }
        let heights = w.sites().map(|s| self.heights[self.volume.index_of(&s).expect("subset")]).collect();
        Ok(HeightConfig { volume: w.clone(), heights })
    }

    /// Pointwise `self <= other`.
    pub fn le(&self, other: &HeightConfig) -> bool {
        self.volume == other.volume && self.heights.iter().zip(&other.heights).all(|(a, b)| a <= b)
    }

    pub fn to_json(&self) -> ConfigJson {
        ConfigJson {
            d: self.volume.dim(),
            lo: self.volume.lo().to_vec(),
            hi: self.volume.hi().to_vec(),
            heights: self.heights.clone(),
        }
    }

    pub fn from_json(j: ConfigJson) -> Result<Self> {
        if j.lo.len() != j.d {
            return Err(Error::DimensionMismatch { expected: j.d, got: j.lo.len() });
        }
        HeightConfig::new(Volume::new(j.lo, j.hi)?, j.heights)
    }

    /// `ASM1` binary: magic, u32 d, d u32 extents, then one u32 per site in
    /// row-major order, all little-endian. The box position is not stored;
    /// decoding places it with [`Volume::centered_box`].
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(BINARY_MAGIC)?;
        w.write_all(&(self.volume.dim() as u32).to_le_bytes())?;
        for &e in self.volume.extents() {
            w.write_all(&(e as u32).to_le_bytes())?;
        }
        for &h in &self.heights {
            let h = u32::try_from(h).map_err(|_| Error::Format(format!("height {h} does not fit u32")))?;
            w.write_all(&h.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != BINARY_MAGIC {
            return Err(Error::Format("bad magic, expected ASM1".into()));
        }
        let mut word = [0u8; 4];
        let mut next = |r: &mut R| -> Result<u32> {
            r.read_exact(&mut word)?;
            Ok(u32::from_le_bytes(word))
        };
        let d = next(&mut r)? as usize;
        if d == 0 || d > crate::lattice::MAX_DIM {
            return Err(Error::UnsupportedDimension(d));
        }
        let extents: Vec<usize> = (0..d).map(|_| next(&mut r).map(|e| e as usize)).collect::<Result<_>>()?;
        let volume = Volume::centered_box(&extents)?;
        let heights = (0..volume.len()).map(|_| next(&mut r).map(i64::from)).collect::<Result<_>>()?;
        HeightConfig::new(volume, heights)
    }
}

pub const BINARY_MAGIC: &[u8; 4] = b"ASM1";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfigJson {
    pub d: usize,
    pub lo: Vec<i64>,
    pub hi: Vec<i64>,
    pub heights: Vec<i64>,
}

impl Serialize for HeightConfig {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

impl<'de> Deserialize<'de> for HeightConfig {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        HeightConfig::from_json(ConfigJson::deserialize(d)?).map_err(serde::de::Error::custom)
    }
}

/// Per-site toppling counts.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TopplingVector {
    pub volume: Volume,
    pub counts: Vec<u64>,
}

impl TopplingVector {
    pub fn zeros(volume: &Volume) -> Self {
        TopplingVector { volume: volume.clone(), counts: vec![0; volume.len()] }
    }

    pub fn at(&self, x: &Site) -> Option<u64> {
        self.volume.index_of(x).map(|i| self.counts[i])
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.counts.iter().all(|&c| c == 0)
    }

    pub fn as_i64(&self) -> Vec<i64> {
        self.counts.iter().map(|&c| c as i64).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_negative_and_wrong_length() {
        let v = Volume::rect(2, 2).unwrap();
        assert!(HeightConfig::new(v.clone(), vec![1, 2, 3]).is_err());
        assert!(matches!(
            HeightConfig::new(v, vec![1, -1, 0, 0]),
            Err(Error::NegativeHeight { index: 1, .. })
        ));
    }

    #[test]
    fn add_commutes_and_zero_is_identity() {
        let v = Volume::rect(3, 3).unwrap();
        let c = HeightConfig::constant(&v, 2).unwrap();
        let a = Site::from([0, 1]);
        let b = Site::from([2, 2]);
        assert_eq!(c.add(&a, 1).unwrap().add(&b, 3).unwrap(), c.add(&b, 3).unwrap().add(&a, 1).unwrap());
        assert_eq!(c.add(&a, 0).unwrap(), c);
        assert_eq!(c.add(&a, 2).unwrap().get(&a), Some(4));
    }

    #[test]
    fn json_and_binary_roundtrip() {
        let v = Volume::centered(2, 5).unwrap();
        let c = HeightConfig::from_fn(&v, |s| (s.coords()[0] * 3 + s.coords()[1]).rem_euclid(5)).unwrap();
        let text = serde_json::to_string(&c).unwrap();
        assert!(text.starts_with(r#"{"d":2,"lo":[-2,-2],"hi":[2,2],"heights":["#));
        assert_eq!(serde_json::from_str::<HeightConfig>(&text).unwrap(), c);
        let mut buf = Vec::new();
        c.write_binary(&mut buf).unwrap();
        assert_eq!(&buf[..4], b"ASM1");
        assert_eq!(&buf[4..8], &2u32.to_le_bytes());
        assert_eq!(buf.len(), 4 + 4 + 8 + 4 * 25);
        assert_eq!(HeightConfig::read_binary(&buf[..]).unwrap(), c);
        assert!(HeightConfig::read_binary(&b"ASM2\0\0\0\0"[..]).is_err());
    }

    #[test]
    fn restriction() {
        let big = Volume::centered(2, 7).unwrap();
        let small = Volume::centered(2, 3).unwrap();
        let c = HeightConfig::from_fn(&big, |s| s.coords()[0] + 10 * s.coords()[1] + 40).unwrap();
        let r = c.restrict(&small).unwrap();
        for s in small.sites() {
            assert_eq!(r.get(&s), c.get(&s));
        }
        assert!(small_config(&small).restrict(&big).is_err());
    }

    fn small_config(v: &Volume) -> HeightConfig {
        HeightConfig::constant(v, 1).unwrap()
    }
}
