use nalgebra::DMatrix;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::exact::ExactFactor;
use super::geometry::{Site, Volume};
use super::matrix::TopplingMatrix;
use crate::error::{Error, Result};

/// Float mode refuses volumes above this size (dense |V|^2 storage).
pub const FLOAT_SITE_CAP: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GreenMode {
    Exact,
    Float,
}

#[derive(Debug, Clone)]
enum Entries {
    Exact(Vec<BigRational>),
    Float(Vec<f64>),
}

/// Inverse of the toppling matrix, `G_V = Δ_V^{-1}`, stored densely.
#[derive(Debug, Clone)]
pub struct GreenMatrix {
    volume: Volume,
    entries: Entries,
}

pub fn green_function(v: &Volume, mode: GreenMode) -> Result<GreenMatrix> {
    GreenMatrix::new(v, mode)
}

impl GreenMatrix {
    pub fn new(v: &Volume, mode: GreenMode) -> Result<Self> {
        let n = v.len();
        let entries = match mode {
            GreenMode::Exact => {
                let f = ExactFactor::new(v)?;
                let mut out = vec![BigRational::zero(); n * n];
                let mut e = vec![BigRational::zero(); n];
                for j in 0..n {
                    e[j] = BigRational::one();
                    let col = f.solve(&e);
                    e[j] = BigRational::zero();
                    for (i, q) in col.into_iter().enumerate() {
                        out[i * n + j] = q;
                    }
                }
                Entries::Exact(out)
            }
            GreenMode::Float => {
                if n > FLOAT_SITE_CAP {
                    return Err(Error::ExactCapExceeded { sites: n, cap: FLOAT_SITE_CAP });
                }
                let a = TopplingMatrix::new(v);
                let m = DMatrix::from_fn(n, n, |i, j| a.entry_idx(i, j) as f64);
                let inv = m
                    .cholesky()
                    .ok_or_else(|| Error::Invariant("toppling matrix not positive definite".into()))?
                    .inverse();
                Entries::Float((0..n * n).map(|k| inv[(k / n, k % n)]).collect())
            }
        };
        Ok(GreenMatrix { volume: v.clone(), entries })
    }

    pub fn volume(&self) -> &Volume {
        &self.volume
    }

    pub fn mode(&self) -> GreenMode {
        match self.entries {
            Entries::Exact(_) => GreenMode::Exact,
            Entries::Float(_) => GreenMode::Float,
        }
    }

    pub fn get_idx(&self, i: usize, j: usize) -> f64 {
        let n = self.volume.len();
        match &self.entries {
            Entries::Exact(e) => e[i * n + j].to_f64().unwrap_or(f64::NAN),
            Entries::Float(e) => e[i * n + j],
        }
    }

    pub fn get(&self, x: &Site, y: &Site) -> Result<f64> {
        Ok(self.get_idx(self.volume.try_index(x)?, self.volume.try_index(y)?))
    }

    pub fn exact_idx(&self, i: usize, j: usize) -> Option<&BigRational> {
        match &self.entries {
            Entries::Exact(e) => Some(&e[i * self.volume.len() + j]),
            Entries::Float(_) => None,
        }
    }

    pub fn exact(&self, x: &Site, y: &Site) -> Result<Option<&BigRational>> {
        Ok(self.exact_idx(self.volume.try_index(x)?, self.volume.try_index(y)?))
    }

    /// Largest absolute entry of `Δ_V G_V - I`. Zero in exact mode means the
    /// identity holds with no rounding at all.
    pub fn identity_residual(&self) -> f64 {
        let n = self.volume.len();
        let a = TopplingMatrix::new(&self.volume);
        let st = a.stencil();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let r = match &self.entries {
                    Entries::Exact(e) => {
                        let mut acc = e[i * n + j].clone() * BigRational::from_integer(st.degree().into());
                        for &k in st.neighbors(i) {
                            if k != super::SINK {
                                acc -= &e[k as usize * n + j];
                            }
                        }
                        if i == j {
                            acc -= BigRational::one();
                        }
                        acc.to_f64().unwrap_or(f64::INFINITY).abs()
                    }
                    Entries::Float(e) => {
                        let mut acc = e[i * n + j] * st.degree() as f64;
                        for &k in st.neighbors(i) {
                            if k != super::SINK {
                                acc -= e[k as usize * n + j];
                            }
                        }
                        if i == j {
                            acc -= 1.0;
                        }
                        acc.abs()
                    }
                };
                worst = worst.max(r);
            }
        }
        worst
    }

    /// Exact check that `Δ_V G_V = I` with zero residual. `None` in float mode.
    pub fn is_exact_inverse(&self) -> Option<bool> {
        match &self.entries {
            Entries::Float(_) => None,
            Entries::Exact(_) => Some(self.identity_residual() == 0.0),
        }
    }

    pub fn to_json(&self) -> GreenJson {
        let n = self.volume.len();
        let entries = match &self.entries {
            Entries::Exact(e) => GreenJsonEntries::Exact(
                e.chunks(n)
                    .map(|row| row.iter().map(|q| [q.numer().to_string(), q.denom().to_string()]).collect())
                    .collect(),
            ),
            Entries::Float(e) => GreenJsonEntries::Float(e.chunks(n).map(|r| r.to_vec()).collect()),
        };
        GreenJson { d: self.volume.dim(), lo: self.volume.lo().to_vec(), hi: self.volume.hi().to_vec(), entries }
    }
}

/// JSON table form. Exact entries are `[numerator, denominator]` strings.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GreenJson {
    pub d: usize,
    pub lo: Vec<i64>,
    pub hi: Vec<i64>,
    pub entries: GreenJsonEntries,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GreenJsonEntries {
    Exact(Vec<Vec<[String; 2]>>),
    Float(Vec<Vec<f64>>),
}

/// One row `G_V(x, .)` in exact arithmetic, without forming the whole inverse.
pub fn green_row_exact(v: &Volume, x: &Site) -> Result<Vec<BigRational>> {
    let i = v.try_index(x)?;
    let f = ExactFactor::new(v)?;
    let mut e = vec![BigRational::zero(); v.len()];
    e[i] = BigRational::one();
    Ok(f.solve(&e))
}
