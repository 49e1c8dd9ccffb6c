use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::classify::{classify, majority, Verdict, VerdictClass};
use super::policy::ProbePolicy;
use super::probe::nested_probe;
use crate::error::{Error, Result};
use crate::fields::{FieldKind, SamplerSpec};
use crate::lattice::{Site, Volume};
use crate::rng::derive_seed;

/// A one-parameter family of laws, stochastically increasing in the mean.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum DensityFamily {
    /// i.i.d. heights on `{low, high}` with the given mean.
    TwoPoint { low: i64, high: i64 },
    /// i.i.d. `1 + Poisson(rho - 1)` heights.
    PoissonShifted,
}

impl DensityFamily {
    pub fn kind(&self, rho: f64) -> Result<FieldKind> {
        match self {
            DensityFamily::TwoPoint { low, high } => FieldKind::two_point(*low, *high, rho),
            DensityFamily::PoissonShifted if rho >= 1.0 => Ok(FieldKind::IidPoissonShifted { lambda: rho - 1.0 }),
            DensityFamily::PoissonShifted => Err(Error::InvalidSampler(format!("mean {rho} below 1"))),
        }
    }

    pub fn name(&self) -> String {
        match self {
            DensityFamily::TwoPoint { low, high } => format!("two-point {{{low},{high}}}"),
            DensityFamily::PoissonShifted => "1 + Poisson".into(),
        }
    }
}

/// Verdicts of every seed at one density.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityPoint {
    pub rho: f64,
    pub class: VerdictClass,
    pub seeds: Vec<u64>,
    pub verdicts: Vec<Verdict>,
}

/// Densities `lo < hi` with majority verdicts stabilizable-at-scale at `lo`
/// and diverging at `hi`, for a named family at the tested scales.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalBracket {
    pub family: DensityFamily,
    pub lo: f64,
    pub hi: f64,
    /// False when bisection stalled on inconclusive points before reaching
    /// the tolerance.
    pub resolved: bool,
    pub points: Vec<DensityPoint>,
}

impl CriticalBracket {
    pub fn contains(&self, rho: f64) -> bool {
        self.lo <= rho && rho <= self.hi
    }
}

/// Majority verdict over `seeds` of the family at `rho`.
pub fn probe_density(
    family: &DensityFamily,
    rho: f64,
    volumes: &[Volume],
    seeds: &[u64],
    policy: &ProbePolicy,
) -> Result<DensityPoint> {
    let kind = family.kind(rho)?;
    let site = Site::origin(volumes.first().map_or(1, |v| v.dim()));
    let verdicts = seeds
        .iter()
        .map(|&s| classify(&nested_probe(&SamplerSpec::new(kind.clone(), s), volumes, &site, policy)?, policy))
        .collect::<Result<Vec<_>>>()?;
    Ok(DensityPoint { rho, class: majority(&verdicts), seeds: seeds.to_vec(), verdicts })
}

/// Bisect on the mean until `hi - lo <= tol`.
///
/// An inconclusive midpoint does not move either end; the two quarter
/// points are tried instead, and if neither is decisive the search stops
/// with `resolved = false`.
pub fn critical_bracket(
    family: &DensityFamily,
    rho_lo: f64,
    rho_hi: f64,
    tol: f64,
    volumes: &[Volume],
    seed: u64,
    policy: &ProbePolicy,
) -> Result<CriticalBracket> {
    if !(rho_lo < rho_hi) || !(tol > 0.0) {
        return Err(Error::Usage(format!("need lo < hi and tol > 0, got [{rho_lo}, {rho_hi}] tol {tol}")));
    }
    let seeds: Vec<u64> = (0..policy.majority_seeds as u64).map(|k| derive_seed(seed, k)).collect();
    let mut cache: BTreeMap<u64, DensityPoint> = BTreeMap::new();
    let mut eval = |rho: f64| -> Result<VerdictClass> {
        if let Some(p) = cache.get(&rho.to_bits()) {
            return Ok(p.class);
        }
        let p = probe_density(family, rho, volumes, &seeds, policy)?;
        let c = p.class;
        cache.insert(rho.to_bits(), p);
        Ok(c)
    };
    let (lo_class, hi_class) = (eval(rho_lo)?, eval(rho_hi)?);
    if lo_class != VerdictClass::StabilizableAtScale || hi_class != VerdictClass::Diverging {
        return Err(Error::Invariant(format!(
            "endpoint verdicts {lo_class} at {rho_lo} and {hi_class} at {rho_hi}"
        )));
    }
    let (mut lo, mut hi) = (rho_lo, rho_hi);
    let mut resolved = true;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        match eval(mid)? {
            VerdictClass::StabilizableAtScale => lo = mid,
            VerdictClass::Diverging => hi = mid,
            VerdictClass::Inconclusive => {
                let (q1, q3) = (0.5 * (lo + mid), 0.5 * (mid + hi));
                let mut moved = false;
                if eval(q1)? == VerdictClass::StabilizableAtScale {
                    lo = q1;
                    moved = true;
                }
                if eval(q3)? == VerdictClass::Diverging {
                    hi = q3;
                    moved = true;
                }
                if !moved {
                    resolved = false;
                    break;
                }
            }
        }
    }
    let mut points: Vec<DensityPoint> = cache.into_values().collect();
    points.sort_by(|a, b| a.rho.total_cmp(&b.rho));
    Ok(CriticalBracket { family: family.clone(), lo, hi, resolved, points })
}
