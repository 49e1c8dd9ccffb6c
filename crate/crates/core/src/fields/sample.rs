use rand::Rng;
use rand_distr::{Distribution, Poisson};

use super::lakes::sea_islands;
use super::line::{line_field, LineFieldParams};
use super::spec::{FieldKind, SamplerSpec};
use crate::config::HeightConfig;
use crate::error::{Error, Result};
use crate::lattice::Volume;
use crate::recurrence::{ChainParams, UmrcChain};
use crate::rng::{derive_seed, site_stream, Domain};

/// Draw the configuration described by `spec` on `v`.
///
/// i.i.d., line-field and periodic kinds key their randomness by site, so
/// the sample on a sub-box is the restriction of the sample on `v`.
pub fn sample(spec: &SamplerSpec, v: &Volume) -> Result<HeightConfig> {
    sample_kind(&spec.kind, v, spec.seed)
}

fn sample_kind(kind: &FieldKind, v: &Volume, seed: u64) -> Result<HeightConfig> {
    kind.validate()?;
    match kind {
        FieldKind::Constant { value } => HeightConfig::constant(v, *value),
        FieldKind::IidDiscrete { table } => {
            let total: f64 = table.iter().map(|(_, w)| w).sum();
            HeightConfig::from_fn(v, |x| {
                let u = site_stream(seed, Domain::Iid, x).random::<f64>() * total;
                let mut acc = 0.0;
                for &(h, w) in table {
                    acc += w;
                    if u < acc {
                        return h;
                    }
                }
                table.iter().rev().find(|(_, w)| *w > 0.0).map_or(0, |(h, _)| *h)
            })
        }
        FieldKind::IidPoissonShifted { lambda } => {
            if *lambda == 0.0 {
                return HeightConfig::constant(v, 1);
            }
            let law = Poisson::new(*lambda).map_err(|e| Error::InvalidSampler(e.to_string()))?;
            HeightConfig::from_fn(v, |x| 1 + law.sample(&mut site_stream(seed, Domain::Iid, x)) as i64)
        }
        FieldKind::LineField { p } => Ok(line_field(&LineFieldParams { p: *p, seed }, v)?.0),
        FieldKind::Umrc { burn_in_factor, stride_factor: _ } => {
            let mut params = ChainParams::defaults(v);
            if let Some(f) = burn_in_factor {
                params.burn_in = f * v.len() as u64;
            }
            Ok(UmrcChain::new(v, params, seed)?.next().expect("chain is infinite"))
        }
        FieldKind::SeaIslands { p } => sea_islands(*p, v, seed),
        FieldKind::ComposeAdd { a, b } => {
            sample_kind(a, v, derive_seed(seed, 0))?.plus(&sample_kind(b, v, derive_seed(seed, 1))?)
        }
        FieldKind::D1Periodic { pattern } => {
            let digits: Vec<i64> = pattern.bytes().map(|c| (c - b'0') as i64).collect();
            HeightConfig::from_fn(v, |x| digits[x.coords()[0].rem_euclid(digits.len() as i64) as usize])
        }
    }
}

/// Pointwise sum of independent samples of `a` and `b`.
pub fn compose_add(a: &FieldKind, b: &FieldKind, v: &Volume, seed: u64) -> Result<HeightConfig> {
    sample_kind(&FieldKind::ComposeAdd { a: Box::new(a.clone()), b: Box::new(b.clone()) }, v, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Site;

    fn spec(s: &str, seed: u64) -> SamplerSpec {
        SamplerSpec::parse(s, seed).unwrap()
    }

    #[test]
    fn constant_four() {
        let v = Volume::rect(5, 5).unwrap();
        assert!(sample(&spec("constant:4", 0), &v).unwrap().heights().iter().all(|&h| h == 4));
    }

    #[test]
    fn periodic_31() {
        let v = Volume::new(vec![0], vec![5]).unwrap();
        assert_eq!(sample(&spec("periodic:31", 0), &v).unwrap().heights(), &[3, 1, 3, 1, 3, 1]);
        let w = Volume::new(vec![-3], vec![-1]).unwrap();
        assert_eq!(sample(&spec("periodic:31", 0), &w).unwrap().heights(), &[1, 3, 1]);
    }

    #[test]
    fn deterministic_and_seeded() {
        let v = Volume::rect(8, 8).unwrap();
        for s in ["iid:1=0.5,3=0.5", "poisson:2.5", "line:0.4", "umrc", "sea:0.5", "umrc+line:0.2"] {
            assert_eq!(sample(&spec(s, 3), &v).unwrap(), sample(&spec(s, 3), &v).unwrap(), "{s}");
            assert_ne!(sample(&spec(s, 3), &v).unwrap(), sample(&spec(s, 4), &v).unwrap(), "{s}");
        }
    }

    #[test]
    fn restriction_consistent() {
        let big = Volume::centered(2, 21).unwrap();
        let small = Volume::new(vec![-3, 2], vec![5, 7]).unwrap();
        for s in ["iid:0=0.3,2=0.7", "poisson:1.5", "line:0.5", "two-point:1,3,2.4+line:0.3"] {
            let sp = spec(s, 11);
            assert!(sp.kind.is_restriction_consistent());
            assert_eq!(sample(&sp, &big).unwrap().restrict(&small).unwrap(), sample(&sp, &small).unwrap(), "{s}");
        }
    }

    #[test]
    fn compose_constants() {
        let v = Volume::rect(3, 3).unwrap();
        let c = compose_add(&FieldKind::Constant { value: 2 }, &FieldKind::Constant { value: 1 }, &v, 0).unwrap();
        assert!(c.heights().iter().all(|&h| h == 3));
    }

    #[test]
    fn min_height_convention() {
        let v = Volume::rect(10, 10).unwrap();
        for s in ["poisson:0.7", "umrc", "iid:1=0.2,5=0.8"] {
            let sp = spec(s, 1);
            assert!(sp.kind.respects_min_height());
            assert!(sample(&sp, &v).unwrap().heights().iter().all(|&h| h >= 1), "{s}");
        }
        assert_eq!(sample(&spec("poisson:0", 1), &v).unwrap().get(&Site::from([0, 0])), Some(1));
    }
}
