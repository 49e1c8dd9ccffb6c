use serde::{Deserialize, Serialize};

use super::classify::{classify, Verdict, VerdictClass};
use super::policy::ProbePolicy;
use super::probe::{nested_probe, ProbeSeries};
use crate::config::HeightConfig;
use crate::error::{Error, Result};
use crate::fields::{FieldKind, RectangleLadder, SamplerSpec};
use crate::lattice::{discrete_laplacian, Site, Volume};
use crate::recurrence::is_recurrent;
use crate::topple::Engine;

/// Toppling count at the origin against the number of marked rectangles
/// that fit in the volume.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RectangleBound {
    pub m0: u64,
    pub ladder_count: usize,
}

impl RectangleBound {
    pub fn holds(&self) -> bool {
        self.m0 >= self.ladder_count as u64
    }
}

/// Stabilize `base + zeta` and compare the origin's toppling count with
/// the rectangles of `ladder` inside the volume. Each such rectangle adds
/// at least its own boundary field, which makes every site inside it
/// topple once more.
pub fn rectangle_lower_bound(
    zeta: &HeightConfig,
    ladder: &RectangleLadder,
    base: &HeightConfig,
) -> Result<RectangleBound> {
    let v = base.volume();
    if !is_recurrent(base)? {
        return Err(Error::Invariant("base configuration is not recurrent".into()));
    }
    let eta = base.plus(zeta)?;
    let r = Engine::new(v).stabilize(&eta)?.into_result()?;
    Ok(RectangleBound { m0: r.m.at(&Site::origin(2)).unwrap_or(0), ladder_count: ladder.count_inside(v) })
}

/// What the one-dimensional theory predicts for a mean height.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum D1Expectation {
    Stabilizable,
    Diverging,
    /// Mean exactly 2: both behaviours occur, no prediction.
    Boundary,
}

impl D1Expectation {
    pub fn for_mean(rho: f64) -> Self {
        if rho < 2.0 {
            D1Expectation::Stabilizable
        } else if rho > 2.0 {
            D1Expectation::Diverging
        } else {
            D1Expectation::Boundary
        }
    }

    /// The verdict says the opposite of the prediction.
    pub fn contradicted_by(&self, class: VerdictClass) -> bool {
        matches!(
            (self, class),
            (D1Expectation::Stabilizable, VerdictClass::Diverging)
                | (D1Expectation::Diverging, VerdictClass::StabilizableAtScale)
        )
    }

    pub fn expected_class(&self) -> Option<VerdictClass> {
        match self {
            D1Expectation::Stabilizable => Some(VerdictClass::StabilizableAtScale),
            D1Expectation::Diverging => Some(VerdictClass::Diverging),
            D1Expectation::Boundary => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct D1Report {
    pub kind: FieldKind,
    pub mean: f64,
    pub expectation: D1Expectation,
    pub seeds: Vec<u64>,
    pub verdicts: Vec<Verdict>,
    pub series: Vec<ProbeSeries>,
    pub contradictions: usize,
    /// Verdicts equal to the predicted class.
    pub agreements: usize,
}

/// Probe a one-dimensional law for every seed and compare with the
/// density-2 threshold.
pub fn d1_exact_check(kind: &FieldKind, volumes: &[Volume], seeds: &[u64], policy: &ProbePolicy) -> Result<D1Report> {
    if volumes.iter().any(|v| v.dim() != 1) {
        return Err(Error::RequiresDimension { required: 1, got: volumes[0].dim() });
    }
    let mean = kind
        .declared_mean()
        .ok_or_else(|| Error::InvalidSampler("one-dimensional check needs a closed-form mean".into()))?;
    let expectation = D1Expectation::for_mean(mean);
    let mut series = Vec::new();
    let mut verdicts = Vec::new();
    for &s in seeds {
        let ps = nested_probe(&SamplerSpec::new(kind.clone(), s), volumes, &Site::origin(1), policy)?;
        verdicts.push(classify(&ps, policy)?);
        series.push(ps);
    }
    let contradictions = verdicts.iter().filter(|v| expectation.contradicted_by(v.class)).count();
    let agreements = verdicts.iter().filter(|v| Some(v.class) == expectation.expected_class()).count();
    Ok(D1Report { kind: kind.clone(), mean, expectation, seeds: seeds.to_vec(), verdicts, series, contradictions, agreements })
}

/// The constant-6 configuration equals `2 - Δf` for `f = x² + y²`, yet
/// finite-volume stabilization of it diverges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SixBarReport {
    pub identity_volume: Volume,
    /// Largest `|6 - (2 - Δf)(x)|` over the identity volume.
    pub identity_max_residual: i64,
    pub six: ProbeSeries,
    pub six_verdict: Verdict,
    pub two: ProbeSeries,
}

impl SixBarReport {
    pub fn holds(&self) -> bool {
        self.identity_max_residual == 0
            && self.six_verdict.class == VerdictClass::Diverging
            && self.two.m0.iter().all(|&m| m == 0)
    }
}

pub fn counterexample_6bar(identity_volume: &Volume, volumes: &[Volume], policy: &ProbePolicy) -> Result<SixBarReport> {
    if identity_volume.dim() != 2 || volumes.iter().any(|v| v.dim() != 2) {
        return Err(Error::RequiresDimension { required: 2, got: identity_volume.dim() });
    }
    let f = |s: &Site| s.coords().iter().map(|c| c * c).sum::<i64>();
    let identity_max_residual =
        identity_volume.sites().map(|x| (6 - (2 - discrete_laplacian(f, &x))).abs()).max().unwrap_or(0);
    let origin = Site::origin(2);
    let six = nested_probe(&SamplerSpec::new(FieldKind::Constant { value: 6 }, 0), volumes, &origin, policy)?;
    let two = nested_probe(&SamplerSpec::new(FieldKind::Constant { value: 2 }, 0), volumes, &origin, policy)?;
    Ok(SixBarReport { identity_volume: identity_volume.clone(), identity_max_residual, six_verdict: classify(&six, policy)?, six, two })
}
