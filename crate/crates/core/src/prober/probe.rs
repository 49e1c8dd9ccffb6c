use serde::{Deserialize, Serialize};

use super::policy::ProbePolicy;
use crate::config::HeightConfig;
use crate::error::{Error, Result};
use crate::fields::{sample, SamplerSpec};
use crate::lattice::{apply_toppling, Site, Volume};
use crate::topple::{Engine, Stabilization};

/// Toppling counts at one site over a nested sequence of volumes, all cut
/// from the same sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeSeries {
    pub sampler: SamplerSpec,
    pub site: Site,
    pub volumes: Vec<Volume>,
    /// Toppling count at `site`; for a capped volume, the count reached
    /// when the cap was hit.
    pub m0: Vec<u64>,
    pub caps_hit: Vec<bool>,
    pub total_topplings: Vec<u64>,
}

impl ProbeSeries {
    pub fn len(&self) -> usize {
        self.volumes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.volumes.is_empty()
    }

    pub fn max_extent(&self) -> usize {
        self.volumes.last().map_or(0, |v| v.max_extent())
    }
}

/// Strictly increasing nested boxes, all containing `site`.
pub fn check_nested(volumes: &[Volume], site: &Site) -> Result<()> {
    let first = volumes.first().ok_or_else(|| Error::Usage("empty volume schedule".into()))?;
    if !first.contains(site) {
        return Err(Error::InvalidVolume(format!("{first} does not contain {site}")));
    }
    for w in volumes.windows(2) {
        if !w[0].is_subset_of(&w[1]) || w[0] == w[1] {
            return Err(Error::InvalidVolume(format!("{} is not strictly inside {}", w[0], w[1])));
        }
    }
    Ok(())
}

/// Stabilize one sample of `spec` in every volume of the schedule and
/// record the toppling count at `site`.
///
/// The sample is drawn once on the largest volume and restricted, so every
/// volume sees the same configuration. Each stabilization is warm-started
/// from the previous volume's odometer, which is a lower bound because
/// enlarging the volume only adds legal topplings; in one dimension the
/// bound is sharpened by the real obstacle-problem solution.
pub fn nested_probe(spec: &SamplerSpec, volumes: &[Volume], site: &Site, policy: &ProbePolicy) -> Result<ProbeSeries> {
    check_nested(volumes, site)?;
    let eta = sample(spec, volumes.last().expect("nonempty"))?;
    probe_config(&eta, volumes, site, policy, spec.clone())
}

/// [`nested_probe`] on a given configuration defined on the largest volume.
pub fn probe_config(
    eta: &HeightConfig,
    volumes: &[Volume],
    site: &Site,
    policy: &ProbePolicy,
    sampler: SamplerSpec,
) -> Result<ProbeSeries> {
    check_nested(volumes, site)?;
    let top = volumes.last().expect("nonempty");
    if eta.volume() != top {
        return Err(Error::InvalidVolume(format!("config on {} but schedule ends at {top}", eta.volume())));
    }
    let mut series = ProbeSeries {
        sampler,
        site: site.clone(),
        volumes: volumes.to_vec(),
        m0: Vec::new(),
        caps_hit: Vec::new(),
        total_topplings: Vec::new(),
    };
    let mut prev: Option<(Volume, Vec<u64>)> = None;
    for v in volumes {
        let local = eta.restrict(v)?;
        let mut lower = vec![0u64; v.len()];
        if let Some((pv, pm)) = &prev {
            for (i, x) in pv.sites().enumerate() {
                lower[v.index_of(&x).expect("nested")] = pm[i];
            }
        }
        if v.dim() == 1 {
            for (l, b) in lower.iter_mut().zip(obstacle_lower_bound_1d(local.heights())) {
                *l = (*l).max(b);
            }
        }
        let mut engine = Engine::with_cap(v, policy.toppling_cap);
        let idx = v.index_of(site).expect("checked");
        let m = match engine.stabilize_from(&local, &lower)? {
            Stabilization::Stable(r) => {
                let pushed = apply_toppling(engine.stencil(), &r.m.as_i64());
                let ok = local.heights().iter().zip(&pushed).zip(r.xi.heights()).all(|((e, p), x)| e - p == *x);
                if !ok {
                    return Err(Error::Invariant(format!("eta - Δm != xi on {v}")));
                }
                series.caps_hit.push(false);
                series.total_topplings.push(r.total_topplings);
                r.m.counts
            }
            Stabilization::CapExceeded(c) => {
                series.caps_hit.push(true);
                series.total_topplings.push(c.partial.total());
                c.partial.counts
            }
        };
        if let Some(&last) = series.m0.last() {
            if m[idx] < last {
                return Err(Error::Invariant(format!(
                    "toppling count at {site} fell from {last} to {} on {v}",
                    m[idx]
                )));
            }
        }
        series.m0.push(m[idx]);
        prev = Some((v.clone(), m));
    }
    Ok(series)
}

/// Lower bound on the one-dimensional odometer (threshold 2, sink at both
/// ends) from the minimal real `u >= 0` with `Δu >= eta - 2`.
///
/// Writing `u = w + c` with `Δw = eta - 2`, the constraint becomes `c`
/// concave with `c >= -w` and zero at the two sink sites, so `c` is the
/// upper concave hull of `-w`. The odometer is an integer solution of the
/// same constraints, hence at least `floor(u)`; one unit is given up
/// against rounding.
pub fn obstacle_lower_bound_1d(eta: &[i64]) -> Vec<u64> {
    let n = eta.len();
    if n == 0 {
        return Vec::new();
    }
    let s: Vec<f64> = eta.iter().map(|&h| (h - 2) as f64).collect();
    let w = solve_tridiagonal(&s);
    // points (position, -w) including the sinks at -1 and n
    let pts: Vec<(f64, f64)> = std::iter::once((-1.0, 0.0))
        .chain(w.iter().enumerate().map(|(i, &wi)| (i as f64, -wi)))
        .chain(std::iter::once((n as f64, 0.0)))
        .collect();
    let mut hull: Vec<(f64, f64)> = Vec::with_capacity(pts.len());
    for &p in &pts {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            // drop b if it lies on or below the chord a-p
            if (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0) >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    let mut out = Vec::with_capacity(n);
    let mut seg = 0;
    for (i, &wi) in w.iter().enumerate() {
        let x = i as f64;
        while hull[seg + 1].0 < x {
            seg += 1;
        }
        let (a, b) = (hull[seg], hull[seg + 1]);
        let c = a.1 + (b.1 - a.1) * (x - a.0) / (b.0 - a.0);
        out.push(((wi + c).floor() - 1.0).max(0.0) as u64);
    }
    out
}

/// Solve `2 w_i - w_{i-1} - w_{i+1} = s_i` with zero boundary values.
fn solve_tridiagonal(s: &[f64]) -> Vec<f64> {
    let n = s.len();
    let mut cp = vec![0.0; n];
    let mut dp = vec![0.0; n];
    cp[0] = -0.5;
    dp[0] = s[0] / 2.0;
    for i in 1..n {
        let denom = 2.0 + cp[i - 1];
        cp[i] = -1.0 / denom;
        dp[i] = (s[i] + dp[i - 1]) / denom;
    }
    let mut w = vec![0.0; n];
    w[n - 1] = dp[n - 1];
    for i in (0..n - 1).rev() {
        w[i] = dp[i] - cp[i] * w[i + 1];
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::FieldKind;
    use crate::topple::stabilize_strict;

    fn intervals(sides: &[usize]) -> Vec<Volume> {
        sides.iter().map(|&l| Volume::centered(1, l).unwrap()).collect()
    }

    #[test]
    fn tridiagonal_inverts() {
        let s = [1.0, -2.0, 0.5, 3.0, 0.0];
        let w = solve_tridiagonal(&s);
        for i in 0..5 {
            let l = if i > 0 { w[i - 1] } else { 0.0 };
            let r = if i < 4 { w[i + 1] } else { 0.0 };
            assert!((2.0 * w[i] - l - r - s[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn obstacle_bound_is_below_odometer() {
        for seed in 0..20 {
            let v = Volume::centered(1, 300).unwrap();
            let spec = SamplerSpec::new(FieldKind::two_point(1, 3, 2.2).unwrap(), seed);
            let eta = sample(&spec, &v).unwrap();
            let m = stabilize_strict(&eta).unwrap().m.counts;
            let lb = obstacle_lower_bound_1d(eta.heights());
            assert!(lb.iter().zip(&m).all(|(l, m)| l <= m), "seed {seed}");
            let gap: u64 = m.iter().zip(&lb).map(|(m, l)| m - l).sum();
            assert!(gap < m.iter().sum::<u64>() / 4 + 1000, "bound too weak: {gap}");
        }
    }

    #[test]
    fn stable_constant_never_topples() {
        let spec = SamplerSpec::new(FieldKind::Constant { value: 4 }, 0);
        let vols: Vec<Volume> = [8, 16, 32].iter().map(|&l| Volume::centered(2, l).unwrap()).collect();
        let s = nested_probe(&spec, &vols, &Site::origin(2), &ProbePolicy::default()).unwrap();
        assert_eq!(s.m0, vec![0, 0, 0]);
    }

    #[test]
    fn warm_start_matches_cold() {
        let spec = SamplerSpec::new(FieldKind::uniform_table(&[1, 2, 3]), 9);
        let vols = intervals(&[8, 16, 32, 64]);
        let s = nested_probe(&spec, &vols, &Site::origin(1), &ProbePolicy::default()).unwrap();
        let eta = sample(&spec, vols.last().unwrap()).unwrap();
        for (v, &m0) in vols.iter().zip(&s.m0) {
            let cold = stabilize_strict(&eta.restrict(v).unwrap()).unwrap();
            assert_eq!(cold.m.at(&Site::origin(1)), Some(m0));
        }
    }

    #[test]
    fn rejects_bad_schedules() {
        let spec = SamplerSpec::new(FieldKind::Constant { value: 1 }, 0);
        let p = ProbePolicy::default();
        assert!(nested_probe(&spec, &intervals(&[16, 8]), &Site::origin(1), &p).is_err());
        assert!(nested_probe(&spec, &intervals(&[8, 8]), &Site::origin(1), &p).is_err());
        assert!(nested_probe(&spec, &[], &Site::origin(1), &p).is_err());
    }

    #[test]
    fn cap_is_recorded() {
        let spec = SamplerSpec::new(FieldKind::Constant { value: 6 }, 0);
        let vols: Vec<Volume> = [2, 4, 8].iter().map(|&l| Volume::centered(2, l).unwrap()).collect();
        let p = ProbePolicy { toppling_cap: 3, ..ProbePolicy::default() };
        let s = nested_probe(&spec, &vols, &Site::origin(2), &p).unwrap();
        assert_eq!(s.caps_hit, vec![false, true, true]);
    }
}
