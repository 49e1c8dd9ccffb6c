use std::path::Path;

use serde::Serialize;

use super::artifacts::{content_hash, Output, Provenance};
use super::{Cli, Command, ConfigSource, PolicyArgs};
use crate::config::{ConfigJson, HeightConfig, BINARY_MAGIC};
use crate::error::{Error, Result};
use crate::fields::{build_nested_lakes, line_field, FieldKind, LineFieldParams, SamplerSpec};
use crate::lattice::{Site, Volume, EXACT_SITE_CAP};
use crate::metastability::{detect_nested_lakes, metastability_probe, sea_islands_sweep};
use crate::prober::{
    classify, counterexample_6bar, critical_bracket, d1_exact_check, default_schedule, green_identity_check,
    nested_probe, probe_config, rectangle_lower_bound, schedule_from_sides, DensityFamily, ProbePolicy,
    VerdictClass,
};
use crate::recurrence::{
    density_estimate, equivalence_check, find_forbidden, is_recurrent, recurrent_representative, umrc_chain,
    umrc_sample,
};
use crate::rng::derive_seed;
use crate::topple::{is_simply_connected, stabilize_strict, wave_decompose_capped};
use crate::arw::{arw_run, arw_trace, ArwStop};

pub struct Outcome {
    pub summary: String,
    /// Reason to exit 3 under `--strict`.
    pub strict_failure: Option<String>,
    pub topplings: u64,
}

impl Outcome {
    fn ok(summary: String, topplings: u64) -> Self {
        Outcome { summary, strict_failure: None, topplings }
    }
}

fn policy_from(p: &PolicyArgs, majority_seeds: usize) -> ProbePolicy {
    ProbePolicy { min_growth: p.min_growth, majority_seeds, toppling_cap: p.cap }
}

fn schedule(d: usize, sides: &[usize]) -> Result<Vec<Volume>> {
    if sides.is_empty() { default_schedule(d) } else { schedule_from_sides(d, sides) }
}

fn parse_family(s: &str) -> Result<DensityFamily> {
    let bad = || Error::Usage(format!("family {s:?}: expected two-point:LOW,HIGH or poisson"));
    if s == "poisson" {
        return Ok(DensityFamily::PoissonShifted);
    }
    let rest = s.strip_prefix("two-point:").ok_or_else(bad)?;
    let (a, b) = rest.split_once(',').ok_or_else(bad)?;
    Ok(DensityFamily::TwoPoint { low: a.trim().parse().map_err(|_| bad())?, high: b.trim().parse().map_err(|_| bad())? })
}

/// Read a configuration file: ASM1 binary if it starts with the magic,
/// JSON otherwise.
pub fn read_config_file(path: &Path) -> Result<(HeightConfig, Vec<u8>)> {
    let bytes = std::fs::read(path)?;
    let cfg = if bytes.starts_with(BINARY_MAGIC) {
        HeightConfig::read_binary(&bytes[..])?
    } else {
        HeightConfig::from_json(serde_json::from_slice::<ConfigJson>(&bytes)?)?
    };
    Ok((cfg, bytes))
}

fn load(src: &ConfigSource, seed: u64, prov: &mut Provenance, args_json: &[u8]) -> Result<HeightConfig> {
    let eta = match (&src.input, &src.sampler) {
        (Some(p), None) => {
            let (cfg, bytes) = read_config_file(p)?;
            prov.input_hash = content_hash(&[args_json, &bytes]);
            cfg
        }
        (None, Some(s)) => {
            let spec = SamplerSpec::parse(s, seed)?;
            let v = Volume::centered(src.d, src.side)?;
            prov.sampler = Some(spec.clone());
            prov.seeds = vec![seed];
            crate::fields::sample(&spec, &v)?
        }
        _ => return Err(Error::Usage("give exactly one of --input and --sampler".into())),
    };
    prov.volumes = vec![eta.volume().clone()];
    Ok(eta)
}

fn origin_or_center(v: &Volume) -> Site {
    let o = Site::origin(v.dim());
    if v.contains(&o) {
        o
    } else {
        Site::new(v.lo().iter().zip(v.hi()).map(|(l, h)| (l + h).div_euclid(2)).collect())
    }
}

#[derive(Serialize)]
struct ProbeRow {
    side: usize,
    sites: usize,
    m0: u64,
    cap_hit: bool,
    total_topplings: u64,
}

pub fn dispatch(cli: &Cli, out: &mut Output, prov: &mut Provenance) -> Result<Outcome> {
    let seed = cli.global.seed;
    // the output directory and --strict do not change any payload
    let args_json = serde_json::to_vec(&(&cli.command, seed))?;
    prov.input_hash = content_hash(&[&args_json]);
    prov.subcommand = serde_json::to_value(&cli.command)?
        .as_object()
        .and_then(|o| o.keys().next().cloned())
        .unwrap_or_default();
    match &cli.command {
        Command::Probe { sampler, d, sides, policy } => {
            let spec = SamplerSpec::parse(sampler, seed)?;
            let vols = schedule(*d, sides)?;
            let policy = policy_from(policy, 1);
            prov.sampler = Some(spec.clone());
            prov.policy = Some(policy.clone());
            prov.seeds = vec![seed];
            prov.volumes = vols.clone();
            let series = nested_probe(&spec, &vols, &Site::origin(*d), &policy)?;
            let verdict = classify(&series, &policy)?;
            let rows: Vec<ProbeRow> = (0..series.len())
                .map(|i| ProbeRow {
                    side: vols[i].max_extent(),
                    sites: vols[i].len(),
                    m0: series.m0[i],
                    cap_hit: series.caps_hit[i],
                    total_topplings: series.total_topplings[i],
                })
                .collect();
            out.csv("probe.csv", &rows)?;
            out.report("report.json", prov, &serde_json::json!({ "series": series, "verdict": verdict }))?;
            let strict_failure = if verdict.class == VerdictClass::Inconclusive {
                Some("inconclusive verdict".into())
            } else if series.caps_hit.iter().any(|&c| c) {
                Some("toppling cap hit".into())
            } else {
                None
            };
            Ok(Outcome {
                summary: format!("{}: m0 = {:?} -> {}", spec.to_json(), series.m0, verdict.class),
                strict_failure,
                topplings: series.total_topplings.iter().sum(),
            })
        }
        Command::Bracket { family, d, lo, hi, tol, sides, seeds, policy } => {
            let fam = parse_family(family)?;
            let vols = schedule(*d, sides)?;
            let policy = policy_from(policy, *seeds);
            prov.policy = Some(policy.clone());
            prov.seeds = (0..*seeds as u64).map(|k| derive_seed(seed, k)).collect();
            prov.volumes = vols.clone();
            let b = critical_bracket(&fam, *lo, *hi, *tol, &vols, seed, &policy)?;
            #[derive(Serialize)]
            struct Row {
                rho: f64,
                class: String,
                diverging: usize,
                stabilizable: usize,
                inconclusive: usize,
            }
            let rows: Vec<Row> = b
                .points
                .iter()
                .map(|p| {
                    let c = |k| p.verdicts.iter().filter(|v| v.class == k).count();
                    Row {
                        rho: p.rho,
                        class: p.class.to_string(),
                        diverging: c(VerdictClass::Diverging),
                        stabilizable: c(VerdictClass::StabilizableAtScale),
                        inconclusive: c(VerdictClass::Inconclusive),
                    }
                })
                .collect();
            out.csv("bracket.csv", &rows)?;
            out.report("report.json", prov, &b)?;
            Ok(Outcome {
                summary: format!("{}: critical density in [{}, {}]", fam.name(), b.lo, b.hi),
                strict_failure: (!b.resolved).then(|| "bisection stalled on inconclusive points".into()),
                topplings: 0,
            })
        }
        Command::BurnTest { source } => {
            let eta = load(source, seed, prov, &args_json)?;
            let recurrent = is_recurrent(&eta)?;
            let witness = find_forbidden(&eta);
            out.report("report.json", prov, &serde_json::json!({ "recurrent": recurrent, "witness": witness }))?;
            let detail = witness.as_ref().map_or(String::new(), |w| format!(" (forbidden set of {} sites)", w.sites.len()));
            Ok(Outcome::ok(format!("recurrent: {recurrent}{detail}"), 0))
        }
        Command::UmrcSample { d, side, samples, burn_in, stride, binary } => {
            let v = Volume::centered(*d, *side)?;
            let n = v.len() as u64;
            prov.seeds = vec![seed];
            prov.volumes = vec![v.clone()];
            prov.sampler = Some(SamplerSpec::new(
                FieldKind::Umrc { burn_in_factor: Some(*burn_in), stride_factor: Some(*stride) },
                seed,
            ));
            let mut chain = umrc_chain(&v, burn_in * n, stride * n, seed)?;
            #[derive(Serialize)]
            struct Row {
                index: usize,
                mean: f64,
                additions: u64,
            }
            let mut rows = Vec::new();
            for k in 0..*samples {
                let c = chain.next().expect("chain is infinite");
                out.json(&format!("sample_{k}.json"), &c.to_json())?;
                if *binary {
                    let mut buf = Vec::new();
                    c.write_binary(&mut buf)?;
                    out.bytes(&format!("sample_{k}.asm"), &buf)?;
                }
                rows.push(Row { index: k, mean: c.mean(), additions: chain.steps() });
            }
            out.csv("samples.csv", &rows)?;
            let mean = rows.iter().map(|r| r.mean).sum::<f64>() / rows.len().max(1) as f64;
            out.report("report.json", prov, &serde_json::json!({ "samples": samples, "mean_height": mean }))?;
            Ok(Outcome::ok(format!("{samples} samples on {v}, mean height {mean:.4}"), chain.topplings()))
        }
        Command::Density { sampler, d, side, region, samples } => {
            let spec = SamplerSpec::parse(sampler, seed)?;
            let v = Volume::centered(*d, *side)?;
            let r = Volume::centered(*d, *region)?;
            prov.sampler = Some(spec.clone());
            prov.seeds = vec![seed];
            prov.volumes = vec![v.clone(), r.clone()];
            let t = density_estimate(&spec, &v, &r, *samples, seed)?;
            #[derive(Serialize)]
            struct Row {
                index: usize,
                mean: f64,
            }
            let rows: Vec<Row> = t.means.iter().enumerate().map(|(index, &mean)| Row { index, mean }).collect();
            out.csv("trace.csv", &rows)?;
            out.report(
                "report.json",
                prov,
                &serde_json::json!({ "estimate": t.estimate, "declared_mean": spec.kind.declared_mean() }),
            )?;
            Ok(Outcome::ok(format!("density {:.4} ± {:.4} (n = {})", t.estimate.mean, t.estimate.stderr, t.estimate.n), 0))
        }
        Command::GreenCheck { source } => {
            let eta = load(source, seed, prov, &args_json)?;
            let site = origin_or_center(eta.volume());
            let c = green_identity_check(&eta, &site)?;
            out.report("report.json", prov, &c)?;
            if !c.holds() {
                return Err(Error::Invariant(format!("Green identity residual {:?}", c.residual)));
            }
            let how = if c.residual.is_some() { "exact residual 0" } else { "integer form only" };
            Ok(Outcome::ok(format!("m({site}) = {}: {how}", c.m_at_site), 0))
        }
        Command::Arw { source, until_quiescent: _, t_max, trace_out, trace_step } => {
            let eta = load(source, seed, prov, &args_json)?;
            let stop = t_max.map_or(ArwStop::UntilQuiescent, ArwStop::TMax);
            let run = arw_run(&eta, stop, seed)?;
            let matches = if run.quiescent {
                let s = stabilize_strict(&eta)?;
                let m = s.m == run.state.n && s.xi == run.state.config;
                if !m {
                    return Err(Error::Invariant("quiescent state differs from stabilization".into()));
                }
                Some(true)
            } else {
                None
            };
            if let Some(path) = trace_out {
                if !(*trace_step > 0.0) {
                    return Err(Error::Usage("--trace-step must be positive".into()));
                }
                let end = t_max.unwrap_or(run.state.t);
                let grid: Vec<f64> = (0..).map(|k| k as f64 * trace_step).take_while(|&t| t <= end + trace_step).collect();
                let tr = arw_trace(&eta, &grid, seed)?;
                let mut w = csv::Writer::from_path(path)?;
                w.write_record(["t", "unstable_count", "total_topplings"])?;
                for p in &tr {
                    w.serialize((p.t, p.unstable_count, p.total_topplings))?;
                }
                w.flush()?;
            }
            let total = run.state.n.total();
            out.report(
                "report.json",
                prov,
                &serde_json::json!({
                    "quiescent": run.quiescent,
                    "events": run.events,
                    "t": run.state.t,
                    "total_topplings": total,
                    "clock_bound_holds": run.state.clock_bound_holds(),
                    "matches_stabilization": matches,
                }),
            )?;
            Ok(Outcome {
                summary: format!("t = {:.3}, {} events, {total} topplings, quiescent: {}", run.state.t, run.events, run.quiescent),
                strict_failure: (!run.quiescent).then(|| "time limit reached before quiescence".into()),
                topplings: total,
            })
        }
        Command::Waves { source, site, wave_cap } => {
            let eta = load(source, seed, prov, &args_json)?;
            let x = if site.is_empty() { origin_or_center(eta.volume()) } else { Site::new(site.clone()) };
            let w = wave_decompose_capped(&eta, &x, *wave_cap)?;
            if !w.blow_up {
                let full = stabilize_strict(&eta.add(&x, 1)?)?;
                if full.m != w.total() {
                    return Err(Error::Invariant("waves do not add up to the stabilization".into()));
                }
            }
            #[derive(Serialize)]
            struct Row {
                wave: usize,
                size: usize,
                simply_connected: Option<bool>,
            }
            let mut rows = Vec::new();
            for k in 0..w.wave_count() {
                let sc = if eta.volume().dim() == 2 { Some(is_simply_connected(&w.support_sites(k))?) } else { None };
                rows.push(Row { wave: k + 1, size: w.supports[k].len(), simply_connected: sc });
            }
            out.csv("waves.csv", &rows)?;
            out.report("report.json", prov, &w)?;
            Ok(Outcome {
                summary: format!("{} waves from {x}{}", w.wave_count(), if w.blow_up { " (cap hit)" } else { "" }),
                strict_failure: w.blow_up.then(|| "wave cap hit".into()),
                topplings: w.total().total(),
            })
        }
        Command::Lakes { n, side } => {
            let v = Volume::centered(2, *side)?;
            prov.volumes = vec![v.clone()];
            let eta = build_nested_lakes(*n, &v)?;
            let lakes = detect_nested_lakes(&eta, &Site::origin(2))?;
            let recurrent = is_recurrent(&eta)?;
            out.json("config.json", &eta.to_json())?;
            out.report(
                "report.json",
                prov,
                &serde_json::json!({ "n": n, "detected": lakes.count(), "radii": lakes.radii, "recurrent": recurrent }),
            )?;
            if !recurrent || lakes.count() < *n {
                return Err(Error::Invariant(format!("built {n} lakes, detected {}, recurrent {recurrent}", lakes.count())));
            }
            Ok(Outcome::ok(format!("{n} lakes on {v}: detected {} at radii {:?}", lakes.count(), lakes.radii), 0))
        }
        Command::MetaProbe { source, wave_cap } => {
            let eta = load(source, seed, prov, &args_json)?;
            let r = metastability_probe(&eta, &Site::origin(2), *wave_cap)?;
            out.report("report.json", prov, &r)?;
            Ok(Outcome {
                summary: format!(
                    "{} waves, {} nested lakes{}",
                    r.wave_count,
                    r.nested_lakes_detected,
                    if r.blow_up { ", wave cap hit" } else { "" }
                ),
                strict_failure: r.blow_up.then(|| "wave cap hit".into()),
                topplings: r.wave_sizes.iter().map(|&s| s as u64).sum(),
            })
        }
        Command::MetaSweep { p, sides, seeds, wave_cap } => {
            if p.is_empty() || sides.is_empty() {
                return Err(Error::Usage("--p and --L need at least one value".into()));
            }
            prov.seeds = (0..*seeds as u64).map(|k| derive_seed(seed, k)).collect();
            prov.volumes = sides.iter().map(|&s| Volume::centered(2, s)).collect::<Result<_>>()?;
            let cells = sea_islands_sweep(p, sides, *seeds, seed, *wave_cap)?;
            out.csv("sweep.csv", &cells)?;
            out.report("report.json", prov, &cells)?;
            let lines: Vec<String> = cells
                .iter()
                .map(|c| format!("p={} L={}: mean waves {:.2}, blow-up rate {:.2}", c.p, c.side, c.mean_waves, c.blow_up_rate))
                .collect();
            Ok(Outcome::ok(lines.join("\n"), 0))
        }
        Command::D1Check { sampler, sides, seeds, policy } => {
            let kind = SamplerSpec::parse(sampler, seed)?.kind;
            let vols = schedule(1, sides)?;
            let policy = policy_from(policy, *seeds);
            let seed_list: Vec<u64> = (0..*seeds as u64).map(|k| derive_seed(seed, k)).collect();
            prov.sampler = Some(SamplerSpec::new(kind.clone(), seed));
            prov.policy = Some(policy.clone());
            prov.seeds = seed_list.clone();
            prov.volumes = vols.clone();
            let r = d1_exact_check(&kind, &vols, &seed_list, &policy)?;
            #[derive(Serialize)]
            struct Row {
                seed: u64,
                class: String,
                final_m0: u64,
                growth_exponent: Option<f64>,
            }
            let rows: Vec<Row> = r
                .verdicts
                .iter()
                .zip(&r.series)
                .zip(&r.seeds)
                .map(|((v, s), &seed)| Row {
                    seed,
                    class: v.class.to_string(),
                    final_m0: *s.m0.last().unwrap_or(&0),
                    growth_exponent: v.growth_exponent,
                })
                .collect();
            out.csv("d1.csv", &rows)?;
            out.report("report.json", prov, &r)?;
            Ok(Outcome {
                summary: format!(
                    "mean {}: expected {:?}, {} agree, {} contradict, of {}",
                    r.mean, r.expectation, r.agreements, r.contradictions, seeds
                ),
                strict_failure: (r.contradictions > 0).then(|| format!("{} contradictions", r.contradictions)),
                topplings: r.series.iter().flat_map(|s| &s.total_topplings).sum(),
            })
        }
        Command::Counterexample6bar { identity_side, sides, policy } => {
            let id = Volume::centered(2, *identity_side)?;
            let vols = if sides.is_empty() { schedule_from_sides(2, &[8, 16, 32, 64])? } else { schedule_from_sides(2, sides)? };
            let policy = policy_from(policy, 1);
            prov.policy = Some(policy.clone());
            prov.volumes = vols.clone();
            let r = counterexample_6bar(&id, &vols, &policy)?;
            out.report("report.json", prov, &r)?;
            if r.identity_max_residual != 0 {
                return Err(Error::Invariant(format!("identity residual {}", r.identity_max_residual)));
            }
            Ok(Outcome {
                summary: format!("6 = 2 - Δ(x²+y²) on {id}; constant 6: m0 = {:?} -> {}; constant 2: m0 = {:?}", r.six.m0, r.six_verdict.class, r.two.m0),
                strict_failure: (!r.holds()).then(|| "constant 6 did not diverge".into()),
                topplings: r.six.total_topplings.iter().sum(),
            })
        }
        Command::LineFieldBound { p, side, seeds, nest } => {
            let v = Volume::centered(2, *side)?;
            let nest_vols = if nest.is_empty() { Vec::new() } else { schedule_from_sides(2, nest)? };
            if let Some(last) = nest_vols.last() {
                if last != &v {
                    return Err(Error::Usage("--nest must end at --L".into()));
                }
            }
            let policy = ProbePolicy::default();
            let seed_list: Vec<u64> = (0..*seeds as u64).map(|k| derive_seed(seed, k)).collect();
            prov.sampler = Some(SamplerSpec::parse(&format!("umrc+line:{p}"), seed)?);
            prov.policy = Some(policy.clone());
            prov.seeds = seed_list.clone();
            prov.volumes = if nest_vols.is_empty() { vec![v.clone()] } else { nest_vols.clone() };
            #[derive(Serialize)]
            struct Row {
                seed: u64,
                m0: u64,
                ladder_count: usize,
                holds: bool,
                verdict: Option<String>,
            }
            let mut rows = Vec::new();
            for &s in &seed_list {
                let base = umrc_sample(&v, derive_seed(s, 0))?;
                let (zeta, ladder) = line_field(&LineFieldParams { p: *p, seed: derive_seed(s, 1) }, &v)?;
                let b = rectangle_lower_bound(&zeta, &ladder, &base)?;
                let verdict = if nest_vols.len() >= crate::prober::MIN_SERIES_LEN {
                    let spec = SamplerSpec::parse(&format!("umrc+line:{p}"), s)?;
                    let series = probe_config(&base.plus(&zeta)?, &nest_vols, &Site::origin(2), &policy, spec)?;
                    Some(classify(&series, &policy)?.class.to_string())
                } else {
                    None
                };
                rows.push(Row { seed: s, m0: b.m0, ladder_count: b.ladder_count, holds: b.holds(), verdict });
            }
            out.csv("line_field_bound.csv", &rows)?;
            out.report("report.json", prov, &rows)?;
            if let Some(r) = rows.iter().find(|r| !r.holds) {
                return Err(Error::Invariant(format!("seed {}: m0 {} < {} rectangles", r.seed, r.m0, r.ladder_count)));
            }
            let diverging = rows.iter().filter(|r| r.verdict.as_deref() == Some("diverging")).count();
            Ok(Outcome {
                summary: format!("bound holds for all {} seeds; diverging verdicts: {diverging}", rows.len()),
                strict_failure: (!nest_vols.is_empty() && diverging < rows.len())
                    .then(|| "some verdicts are not diverging".into()),
                topplings: 0,
            })
        }
        Command::Representative { source } => {
            let eta = load(source, seed, prov, &args_json)?;
            let rep = recurrent_representative(&eta)?;
            let cert = if eta.volume().len() <= EXACT_SITE_CAP { equivalence_check(&eta, &rep)? } else { None };
            if let Some(c) = &cert {
                if !c.verify(&eta, &rep) {
                    return Err(Error::Invariant("equivalence certificate does not verify".into()));
                }
            }
            out.json("representative.json", &rep.to_json())?;
            out.report(
                "report.json",
                prov,
                &serde_json::json!({
                    "input_recurrent": is_recurrent(&stabilize_strict(&eta)?.xi)? && eta.is_stable() && is_recurrent(&eta)?,
                    "certificate": cert,
                }),
            )?;
            Ok(Outcome::ok(format!("representative has mean height {:.4}", rep.mean()), 0))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn families() {
        assert_eq!(parse_family("poisson").unwrap(), DensityFamily::PoissonShifted);
        assert_eq!(parse_family("two-point:1,3").unwrap(), DensityFamily::TwoPoint { low: 1, high: 3 });
        assert!(parse_family("three-point").is_err());
    }
}
