use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// What to sample. Serialized with a `kind` tag, e.g.
/// `{"kind":"iid-discrete","table":[[1,0.5],[3,0.5]],"seed":7}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FieldKind {
    Constant {
        value: i64,
    },
    /// Independent heights from a finite `(height, weight)` table. Weights
    /// are normalised.
    IidDiscrete {
        table: Vec<(i64, f64)>,
    },
    /// Independent `1 + Poisson(lambda)` heights.
    IidPoissonShifted {
        lambda: f64,
    },
    /// `omega(x_0) + omega'(x_1)` with independent Bernoulli(p) lines.
    LineField {
        p: f64,
    },
    /// Uniform recurrent configuration from the addition chain.
    Umrc {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        burn_in_factor: Option<u64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        stride_factor: Option<u64>,
    },
    /// UMRC sample with each site independently raised to `2d` with
    /// probability `p`.
    SeaIslands {
        p: f64,
    },
    /// Pointwise sum of two independent fields.
    ComposeAdd {
        a: Box<FieldKind>,
        b: Box<FieldKind>,
    },
    /// `pattern[x_0 mod len]`, digits.
    D1Periodic {
        pattern: String,
    },
}

/// A field kind plus the seed that makes it a concrete configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplerSpec {
    #[serde(flatten)]
    pub kind: FieldKind,
    #[serde(default)]
    pub seed: u64,
}

impl SamplerSpec {
    pub fn new(kind: FieldKind, seed: u64) -> Self {
        SamplerSpec { kind, seed }
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        SamplerSpec { kind: self.kind.clone(), seed }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("sampler specs serialize")
    }

    /// Parse JSON or the short form accepted by [`FieldKind::from_str`].
    pub fn parse(s: &str, seed: u64) -> Result<Self> {
        let t = s.trim();
        if t.starts_with('{') {
            let mut spec: SamplerSpec = serde_json::from_str(t)?;
            if !t.contains("\"seed\"") {
                spec.seed = seed;
            }
            spec.kind.validate()?;
            Ok(spec)
        } else {
            Ok(SamplerSpec::new(t.parse()?, seed))
        }
    }
}

impl FieldKind {
    pub fn bernoulli(alpha: f64) -> Self {
        FieldKind::IidDiscrete { table: vec![(0, 1.0 - alpha), (1, alpha)] }
    }

    pub fn uniform_table(values: &[i64]) -> Self {
        let w = 1.0 / values.len() as f64;
        FieldKind::IidDiscrete { table: values.iter().map(|&v| (v, w)).collect() }
    }

    /// Two-point law on `{low, high}` with mean `rho`.
    pub fn two_point(low: i64, high: i64, rho: f64) -> Result<Self> {
        if high <= low || rho < low as f64 || rho > high as f64 {
            return Err(Error::InvalidSampler(format!("mean {rho} not in [{low}, {high}]")));
        }
        let q = (rho - low as f64) / (high - low) as f64;
        Ok(FieldKind::IidDiscrete { table: vec![(low, 1.0 - q), (high, q)] })
    }

    pub fn validate(&self) -> Result<()> {
        let prob = |p: f64| {
            if (0.0..=1.0).contains(&p) {
                Ok(())
            } else {
                Err(Error::InvalidSampler(format!("probability {p} not in [0, 1]")))
            }
        };
        match self {
            FieldKind::Constant { value } if *value < 0 => Err(Error::InvalidSampler("negative constant".into())),
            FieldKind::Constant { .. } => Ok(()),
            FieldKind::IidDiscrete { table } => {
                if table.is_empty() {
                    return Err(Error::InvalidSampler("empty value table".into()));
                }
                if table.iter().any(|(v, w)| *v < 0 || !(*w >= 0.0) || !w.is_finite()) {
                    return Err(Error::InvalidSampler("negative height or bad weight".into()));
                }
                if table.iter().map(|(_, w)| w).sum::<f64>() <= 0.0 {
                    return Err(Error::InvalidSampler("weights sum to zero".into()));
                }
                Ok(())
            }
            FieldKind::IidPoissonShifted { lambda } => {
                if *lambda >= 0.0 && lambda.is_finite() {
                    Ok(())
                } else {
                    Err(Error::InvalidSampler(format!("lambda {lambda}")))
                }
            }
            FieldKind::LineField { p } | FieldKind::SeaIslands { p } => prob(*p),
            FieldKind::Umrc { .. } => Ok(()),
            FieldKind::ComposeAdd { a, b } => {
                a.validate()?;
                b.validate()
            }
            FieldKind::D1Periodic { pattern } => {
                if pattern.is_empty() || !pattern.chars().all(|c| c.is_ascii_digit()) {
                    Err(Error::InvalidSampler(format!("pattern {pattern:?} must be nonempty digits")))
                } else {
                    Ok(())
                }
            }
        }
    }

    /// Mean height where it is known in closed form.
    pub fn declared_mean(&self) -> Option<f64> {
        match self {
            FieldKind::Constant { value } => Some(*value as f64),
            FieldKind::IidDiscrete { table } => {
                let w: f64 = table.iter().map(|(_, w)| w).sum();
                Some(table.iter().map(|(v, p)| *v as f64 * p).sum::<f64>() / w)
            }
            FieldKind::IidPoissonShifted { lambda } => Some(1.0 + lambda),
            FieldKind::LineField { p } => Some(2.0 * p),
            FieldKind::Umrc { .. } | FieldKind::SeaIslands { .. } => None,
            FieldKind::ComposeAdd { a, b } => Some(a.declared_mean()? + b.declared_mean()?),
            FieldKind::D1Periodic { pattern } => {
                Some(pattern.bytes().map(|b| (b - b'0') as f64).sum::<f64>() / pattern.len() as f64)
            }
        }
    }

    /// Sampling `V` and restricting to `W` equals sampling `W` directly.
    pub fn is_restriction_consistent(&self) -> bool {
        match self {
            FieldKind::Umrc { .. } | FieldKind::SeaIslands { .. } => false,
            FieldKind::ComposeAdd { a, b } => a.is_restriction_consistent() && b.is_restriction_consistent(),
            _ => true,
        }
    }

    /// The minimum height is at least 1.
    pub fn respects_min_height(&self) -> bool {
        match self {
            FieldKind::Constant { value } => *value >= 1,
            FieldKind::IidDiscrete { table } => table.iter().all(|(v, w)| *v >= 1 || *w == 0.0),
            FieldKind::IidPoissonShifted { .. } | FieldKind::Umrc { .. } | FieldKind::SeaIslands { .. } => true,
            FieldKind::LineField { .. } => false,
            FieldKind::ComposeAdd { a, b } => a.respects_min_height() || b.respects_min_height(),
            FieldKind::D1Periodic { pattern } => !pattern.contains('0'),
        }
    }
}

/// Short forms: `constant:6`, `iid:1=0.5,3=0.5`, `uniform:1,2,3,4`,
/// `poisson:3.5` (1 + Poisson), `two-point:1,3,2.2` (low, high, mean),
/// `line:0.2`, `umrc`, `sea:0.95`, `periodic:31`, and `a+b` for sums.
impl FromStr for FieldKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some((a, b)) = s.split_once('+') {
            return Ok(FieldKind::ComposeAdd { a: Box::new(a.parse()?), b: Box::new(b.parse()?) });
        }
        let (name, arg) = s.split_once(':').unwrap_or((s, ""));
        let bad = |what: &str| Error::InvalidSampler(format!("cannot parse {what} in {s:?}"));
        let num = |t: &str| t.trim().parse::<f64>().map_err(|_| bad(t));
        let int = |t: &str| t.trim().parse::<i64>().map_err(|_| bad(t));
        let kind = match name {
            "constant" => FieldKind::Constant { value: int(arg)? },
            "iid" => FieldKind::IidDiscrete {
                table: arg
                    .split(',')
                    .map(|kv| {
                        let (k, v) = kv.split_once('=').ok_or_else(|| bad(kv))?;
                        Ok((int(k)?, num(v)?))
                    })
                    .collect::<Result<_>>()?,
            },
            "uniform" => FieldKind::uniform_table(&arg.split(',').map(int).collect::<Result<Vec<_>>>()?),
            "poisson" => FieldKind::IidPoissonShifted { lambda: num(arg)? },
            "two-point" => {
                let parts: Vec<&str> = arg.split(',').collect();
                if parts.len() != 3 {
                    return Err(bad("two-point arguments"));
                }
                FieldKind::two_point(int(parts[0])?, int(parts[1])?, num(parts[2])?)?
            }
            "line" => FieldKind::LineField { p: num(arg)? },
            "umrc" => FieldKind::Umrc { burn_in_factor: None, stride_factor: None },
            "sea" => FieldKind::SeaIslands { p: num(arg)? },
            "periodic" => FieldKind::D1Periodic { pattern: arg.to_string() },
            _ => return Err(bad("sampler name")),
        };
        kind.validate()?;
        Ok(kind)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn short_forms() {
        assert_eq!("constant:6".parse::<FieldKind>().unwrap(), FieldKind::Constant { value: 6 });
        assert_eq!("periodic:31".parse::<FieldKind>().unwrap().declared_mean(), Some(2.0));
        assert_eq!("iid:1=0.5,3=0.5".parse::<FieldKind>().unwrap().declared_mean(), Some(2.0));
        let sum: FieldKind = "umrc+line:0.2".parse().unwrap();
        assert!(matches!(sum, FieldKind::ComposeAdd { .. }));
        assert!("line:1.5".parse::<FieldKind>().is_err());
        assert!("iid:".parse::<FieldKind>().is_err());
        assert!((FieldKind::two_point(1, 3, 2.2).unwrap().declared_mean().unwrap() - 2.2).abs() < 1e-12);
    }

    #[test]
    fn json_schema() {
        let s = SamplerSpec::new(FieldKind::IidDiscrete { table: vec![(1, 0.5), (3, 0.5)] }, 7);
        let j = s.to_json();
        assert_eq!(j, r#"{"kind":"iid-discrete","table":[[1,0.5],[3,0.5]],"seed":7}"#);
        assert_eq!(SamplerSpec::parse(&j, 0).unwrap(), s);
        let nested = SamplerSpec::parse(r#"{"kind":"compose-add","a":{"kind":"umrc"},"b":{"kind":"line-field","p":0.2}}"#, 4)
            .unwrap();
        assert_eq!(nested.seed, 4);
        assert!(SamplerSpec::parse(r#"{"kind":"iid-discrete","table":[]}"#, 0).is_err());
    }
}
