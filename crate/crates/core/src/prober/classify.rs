use serde::{Deserialize, Serialize};

use super::policy::ProbePolicy;
use super::probe::ProbeSeries;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VerdictClass {
    StabilizableAtScale,
    Diverging,
    Inconclusive,
}

impl std::fmt::Display for VerdictClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            VerdictClass::StabilizableAtScale => "stabilizable-at-scale",
            VerdictClass::Diverging => "diverging",
            VerdictClass::Inconclusive => "inconclusive",
        })
    }
}

/// A finite-scale reading of a probe series. It says nothing about volumes
/// beyond `max_extent`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub class: VerdictClass,
    /// `None` when the last volume hit the cap.
    pub last_increment: Option<u64>,
    /// Least-squares slope of `log m0` against `log side` over the
    /// positive, uncapped entries.
    pub growth_exponent: Option<f64>,
    pub max_extent: usize,
}

/// Smallest series `classify` accepts: three doublings.
pub const MIN_SERIES_LEN: usize = 4;

/// Diverging if every step grows strictly and the last step grows by at
/// least `min_growth`; stabilizable-at-scale if the last two steps add
/// nothing; inconclusive otherwise. A capped volume counts as unbounded.
pub fn classify(series: &ProbeSeries, policy: &ProbePolicy) -> Result<Verdict> {
    let n = series.m0.len();
    if n < MIN_SERIES_LEN {
        return Err(Error::Usage(format!("need at least {MIN_SERIES_LEN} volumes, got {n}")));
    }
    let value = |i: usize| if series.caps_hit[i] { None } else { Some(series.m0[i]) };
    // increment i -> i+1; None means unbounded
    let inc: Vec<Option<u64>> = (0..n - 1)
        .map(|i| match (value(i), value(i + 1)) {
            (Some(a), Some(b)) => Some(b - a),
            (Some(_), None) => None,
            (None, _) => None,
        })
        .collect();
    let last = inc[n - 2];
    let strict = inc.iter().all(|d| d.is_none_or(|d| d > 0));
    let class = if strict && last.is_none_or(|d| d >= policy.min_growth) {
        VerdictClass::Diverging
    } else if inc[n - 3..].iter().all(|d| *d == Some(0)) {
        VerdictClass::StabilizableAtScale
    } else {
        VerdictClass::Inconclusive
    };
    Ok(Verdict {
        class,
        last_increment: last,
        growth_exponent: growth_exponent(series),
        max_extent: series.max_extent(),
    })
}

fn growth_exponent(series: &ProbeSeries) -> Option<f64> {
    let pts: Vec<(f64, f64)> = series
        .volumes
        .iter()
        .zip(&series.m0)
        .zip(&series.caps_hit)
        .filter(|((_, m), c)| **m > 0 && !**c)
        .map(|((v, m), _)| ((v.max_extent() as f64).ln(), (*m as f64).ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Majority class over seeds; ties and pluralities below half are
/// inconclusive.
pub fn majority(verdicts: &[Verdict]) -> VerdictClass {
    let count = |c| verdicts.iter().filter(|v| v.class == c).count();
    let half = verdicts.len() / 2;
    if count(VerdictClass::Diverging) > half {
        VerdictClass::Diverging
    } else if count(VerdictClass::StabilizableAtScale) > half {
        VerdictClass::StabilizableAtScale
    } else {
        VerdictClass::Inconclusive
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{FieldKind, SamplerSpec};
    use crate::lattice::{Site, Volume};

    fn series(m0: &[u64], caps: &[bool]) -> ProbeSeries {
        ProbeSeries {
            sampler: SamplerSpec::new(FieldKind::Constant { value: 0 }, 0),
            site: Site::origin(2),
            volumes: (0..m0.len()).map(|k| Volume::centered(2, 8 << k).unwrap()).collect(),
            m0: m0.to_vec(),
            caps_hit: caps.to_vec(),
            total_topplings: vec![0; m0.len()],
        }
    }

    fn class(m0: &[u64]) -> VerdictClass {
        classify(&series(m0, &vec![false; m0.len()]), &ProbePolicy::default()).unwrap().class
    }

    #[test]
    fn rule_examples() {
        assert_eq!(class(&[3, 3, 3, 3]), VerdictClass::StabilizableAtScale);
        assert_eq!(class(&[2, 7, 19, 44]), VerdictClass::Diverging);
        assert_eq!(class(&[2, 5, 5, 6]), VerdictClass::Inconclusive);
        assert_eq!(class(&[0, 4, 4, 4]), VerdictClass::StabilizableAtScale);
        assert_eq!(class(&[0, 0, 1, 2]), VerdictClass::Inconclusive);
    }

    #[test]
    fn too_short() {
        assert!(classify(&series(&[1, 2, 3], &[false; 3]), &ProbePolicy::default()).is_err());
    }

    #[test]
    fn caps_count_as_growth() {
        let s = series(&[1, 5, 9, 9], &[false, false, false, true]);
        let v = classify(&s, &ProbePolicy::default()).unwrap();
        assert_eq!(v.class, VerdictClass::Diverging);
        assert_eq!(v.last_increment, None);
    }

    #[test]
    fn min_growth_threshold() {
        let s = series(&[1, 2, 3, 4], &[false; 4]);
        let p = ProbePolicy { min_growth: 2, ..ProbePolicy::default() };
        assert_eq!(classify(&s, &p).unwrap().class, VerdictClass::Inconclusive);
    }

    #[test]
    fn exponent_of_quadratic_growth() {
        let s = series(&[64, 256, 1024, 4096], &[false; 4]);
        let e = classify(&s, &ProbePolicy::default()).unwrap().growth_exponent.unwrap();
        assert!((e - 2.0).abs() < 1e-9);
    }
}
