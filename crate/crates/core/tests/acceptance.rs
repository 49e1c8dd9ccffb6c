//! Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
//! fails. Run with `cargo test --release --test acceptance`.

mod common;

use std::time::{Duration, Instant};

use common::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sandpile::arw::{arw_run, arw_trace, ArwStop};
use sandpile::fields::{build_nested_lakes, line_field, FieldKind, LineFieldParams, SamplerSpec};
use sandpile::lattice::{martingale_mean, toppling_determinant};
use sandpile::metastability::metastability_probe;
use sandpile::prober::{
    classify, counterexample_6bar, d1_exact_check, green_identity_check, nested_probe, probe_config,
    rectangle_lower_bound, schedule_from_sides, ProbePolicy, VerdictClass,
};
use sandpile::recurrence::{
    density_estimate, is_recurrent, rectangle_identity_check, umrc_chain, umrc_sample, ChainParams, UmrcChain,
};
use sandpile::rng::derive_seed;
use sandpile::topple::{
    is_simply_connected, special_boundary_addition, stabilize_strict, stabilize_with_order, wave_decompose,
    OrderPolicy,
};
use sandpile::{HeightConfig, Site, Volume};
use statrs::distribution::{ChiSquared, ContinuousCDF};

type Check = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok { Ok(()) } else { Err(msg()) }
}

fn e2s<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn stabilization_identity() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for k in 0..1000 {
        let eta = random_instance(&mut rng, 32, 8);
        let v = eta.volume();
        let r = stabilize_strict(&eta).map_err(e2s)?;
        ensure(r.xi.is_stable(), || format!("instance {k}: unstable result"))?;
        let lap = laplacian(v, &r.m.as_i64());
        let mut loss = 0i64;
        for x in v.sites() {
            let i = v.index_of(&x).unwrap();
            ensure(eta.heights()[i] - lap[i] == r.xi.heights()[i], || format!("instance {k}: identity fails at {x}"))?;
            loss += (2 * v.dim() - inner_neighbors(v, &x).len()) as i64 * r.m.counts[i] as i64;
        }
        ensure(eta.total() == r.xi.total() + loss, || format!("instance {k}: grains not conserved"))?;
    }
    Ok("1000 instances up to 32x32, heights <= 8".into())
}

fn abelianness() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    for k in 0..200 {
        let eta = random_instance(&mut rng, 16, 8);
        let first = stabilize_with_order(&eta, eta.volume(), OrderPolicy::ALL[0], k).map_err(e2s)?.into_result().map_err(e2s)?;
        for p in &OrderPolicy::ALL[1..] {
            let s = stabilize_with_order(&eta, eta.volume(), *p, k).map_err(e2s)?.into_result().map_err(e2s)?;
            ensure(s.m == first.m && s.xi == first.xi, || format!("instance {k}: {p:?} disagrees"))?;
        }
    }
    Ok(format!("{} orders x 200 instances identical", OrderPolicy::ALL.len()))
}

fn naive_oracle() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    for k in 0..200 {
        let eta = random_instance(&mut rng, 8, 10);
        let r = stabilize_strict(&eta).map_err(e2s)?;
        let (m, xi) = naive_stabilize(&eta);
        ensure(r.m.counts == m && r.xi.heights() == &xi[..], || format!("instance {k} differs from the naive toppler"))?;
    }
    Ok("200 instances up to 8x8".into())
}

fn green_identity() -> Check {
    use num_rational::BigRational;
    use num_traits::Zero;
    let mut rng = ChaCha8Rng::seed_from_u64(104);
    for k in 0..50 {
        let eta = random_instance(&mut rng, 8, 10);
        let v = eta.volume();
        let x = v.sites().nth(rng.random_range(0..v.len())).unwrap();
        let c = green_identity_check(&eta, &x).map_err(e2s)?;
        ensure(c.holds() && c.residual.as_deref() == Some("0"), || format!("instance {k}: library residual {:?}", c.residual))?;
        let g = exact_green_row(v, &x);
        let xi = stabilize_strict(&eta).map_err(e2s)?.xi;
        let mut s = BigRational::zero();
        for i in 0..v.len() {
            s += &g[i] * BigRational::from_integer((eta.heights()[i] - xi.heights()[i]).into());
        }
        ensure(s == BigRational::from_integer(c.m_at_site.into()), || format!("instance {k}: oracle residual {}", s - BigRational::from_integer(c.m_at_site.into())))?;
    }
    Ok("50 instances up to 8x8, exact residual 0 (library and independent elimination)".into())
}

fn recurrence_oracle() -> Check {
    let v = Volume::rect(2, 2).map_err(e2s)?;
    let mut count = 0u64;
    for code in 0..256u32 {
        let eta = HeightConfig::new(v.clone(), (0..4).map(|k| 1 + (code >> (2 * k) & 3) as i64).collect()).map_err(e2s)?;
        let r = is_recurrent(&eta).map_err(e2s)?;
        ensure(r == brute_force_recurrent(&eta), || format!("2x2 {:?} disagrees", eta.heights()))?;
        count += r as u64;
    }
    let det = toppling_determinant(&v).map_err(e2s)?;
    ensure(count == 192 && det == 192.into(), || format!("{count} recurrent, determinant {det}"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(105);
    let v = Volume::rect(3, 3).map_err(e2s)?;
    let mut rec = 0;
    for _ in 0..10_000 {
        let eta = random_stable(&mut rng, &v);
        let r = is_recurrent(&eta).map_err(e2s)?;
        ensure(r == brute_force_recurrent(&eta), || format!("3x3 {:?} disagrees", eta.heights()))?;
        rec += r as usize;
    }
    Ok(format!("2x2: 192 recurrent = det; 3x3: 10^4 agree ({rec} recurrent)"))
}

fn umrc_stationarity() -> Check {
    let v = Volume::rect(2, 2).map_err(e2s)?;
    let mut chain = UmrcChain::new(&v, ChainParams { burn_in: 1000, stride: 1 }, 106).map_err(e2s)?;
    chain.advance(1000);
    let code = |h: &[i64]| h.iter().fold(0usize, |a, &x| 4 * a + (x - 1) as usize);
    let mut counts = vec![0u64; 256];
    const STEPS: u64 = 1_000_000;
    // every toppling sheds two grains here, so the height-sum parity flips
    // each step and an even stride would see only half the states
    const THIN: u64 = 7;
    for k in 0..STEPS {
        chain.step();
        if k % THIN == 0 {
            counts[code(chain.heights())] += 1;
        }
    }
    let visited = counts.iter().filter(|&&c| c > 0).count();
    ensure(visited == 192, || format!("{visited} states visited"))?;
    let n: u64 = counts.iter().sum();
    let expect = n as f64 / 192.0;
    let chi2: f64 = counts.iter().filter(|&&c| c > 0).map(|&c| (c as f64 - expect).powi(2) / expect).sum();
    let p = 1.0 - ChiSquared::new(191.0).map_err(e2s)?.cdf(chi2);
    ensure(p >= 1e-3, || format!("chi2 = {chi2:.1}, p = {p:.2e}"))?;
    Ok(format!("10^6 additions, every {THIN}th state: chi2 = {chi2:.1} on 191 df, p = {p:.3}"))
}

fn umrc_density() -> Check {
    let v = Volume::centered(2, 64).map_err(e2s)?;
    let r = Volume::centered(2, 32).map_err(e2s)?;
    let t = density_estimate(&SamplerSpec::parse("umrc", 107).map_err(e2s)?, &v, &r, 200, 107).map_err(e2s)?;
    let e = t.estimate;
    ensure(e.mean - 4.0 * e.stderr > 3.0, || format!("mean {:.4} ± {:.4}", e.mean, e.stderr))?;
    Ok(format!("central 32x32 of 64x64, 200 samples: {:.4} ± {:.4} (> 3 at 4σ)", e.mean, e.stderr))
}

fn rectangle_identity() -> Check {
    let v = Volume::rect(16, 16).map_err(e2s)?;
    let mut chain = umrc_chain(&v, 20 * 256, 256, 108).map_err(e2s)?;
    let boundary = special_boundary_addition(&v);
    for k in 0..100 {
        let eta = chain.next().unwrap();
        let c = rectangle_identity_check(&eta).map_err(e2s)?;
        ensure(c.recurrent && c.holds(), || format!("sample {k}: check failed"))?;
        let (m, xi) = naive_stabilize(&eta.plus(&boundary).map_err(e2s)?);
        ensure(m.iter().all(|&c| c == 1) && xi == eta.heights(), || format!("sample {k}: oracle disagrees"))?;
    }
    Ok("100 samples on 16x16: m = 1 everywhere, configuration unchanged".into())
}

fn d1_theorem() -> Check {
    let vols = schedule_from_sides(1, &[64, 128, 256, 512, 1024, 2048, 4096]).map_err(e2s)?;
    let policy = ProbePolicy::default();
    let seeds: Vec<u64> = (0..20).map(|k| derive_seed(109, k)).collect();
    let mut parts = Vec::new();
    for (label, kind, want) in [
        ("iid mean 1.8", FieldKind::two_point(1, 3, 1.8).map_err(e2s)?, VerdictClass::StabilizableAtScale),
        ("iid mean 2.2", FieldKind::two_point(1, 3, 2.2).map_err(e2s)?, VerdictClass::Diverging),
        ("periodic 31", "periodic:31".parse::<FieldKind>().map_err(e2s)?, VerdictClass::Diverging),
    ] {
        let r = d1_exact_check(&kind, &vols, &seeds, &policy).map_err(e2s)?;
        let hits = r.verdicts.iter().filter(|v| v.class == want).count();
        ensure(r.contradictions == 0 && hits == seeds.len(), || {
            format!("{label}: {hits}/20 {want}, {} contradictions", r.contradictions)
        })?;
        parts.push(format!("{label}: 20/20 {want}"));
    }
    Ok(format!("L = 64..4096; {}", parts.join("; ")))
}

fn supercritical_growth() -> Check {
    let vols = schedule_from_sides(2, &[8, 16, 32, 64, 128]).map_err(e2s)?;
    let policy = ProbePolicy::default();
    let mut last = Vec::new();
    for k in 0..10 {
        let spec = SamplerSpec::parse("uniform:3,4,5,6", derive_seed(110, k)).map_err(e2s)?;
        let s = nested_probe(&spec, &vols, &Site::origin(2), &policy).map_err(e2s)?;
        ensure(!s.caps_hit.iter().any(|&c| c), || format!("seed {k}: cap hit"))?;
        ensure(s.m0.windows(2).all(|w| w[0] < w[1]), || format!("seed {k}: m0 = {:?}", s.m0))?;
        last.push(*s.m0.last().unwrap());
    }
    Ok(format!("mean 4.5, L = 8..128, 10/10 strictly increasing; m0(128) in {:?}", (last.iter().min().unwrap(), last.iter().max().unwrap())))
}

fn line_field_example() -> Check {
    let v = Volume::centered(2, 101).map_err(e2s)?;
    let nest = schedule_from_sides(2, &[25, 51, 75, 101]).map_err(e2s)?;
    let policy = ProbePolicy::default();
    let mut min_slack = i64::MAX;
    for k in 0..20 {
        let s = derive_seed(111, k);
        let base = umrc_sample(&v, derive_seed(s, 0)).map_err(e2s)?;
        for p in [0.2, 0.3] {
            let (lines, ladder) = line_field(&LineFieldParams { p, seed: derive_seed(s, 1) }, &v).map_err(e2s)?;
            let b = rectangle_lower_bound(&lines, &ladder, &base).map_err(e2s)?;
            ensure(b.holds(), || format!("seed {k}, p {p}: m0 {} < {} rectangles", b.m0, b.ladder_count))?;
            min_slack = min_slack.min(b.m0 as i64 - b.ladder_count as i64);
            let spec = SamplerSpec::parse(&format!("umrc+line:{p}"), s).map_err(e2s)?;
            let series = probe_config(&base.plus(&lines).map_err(e2s)?, &nest, &Site::origin(2), &policy, spec).map_err(e2s)?;
            let verdict = classify(&series, &policy).map_err(e2s)?;
            ensure(verdict.class == VerdictClass::Diverging, || format!("seed {k}, p {p}: m0 = {:?} -> {}", series.m0, verdict.class))?;
        }
    }
    Ok(format!("p = 0.2, 0.3 x 20 seeds on 101x101: bound holds (min slack {min_slack}), all diverging on L = 25..101"))
}

fn waves() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(112);
    let mut max_waves = 0;
    for (side, count) in [(8usize, 200u64), (16, 200), (24, 100)] {
        let v = Volume::centered(2, side).map_err(e2s)?;
        let n = v.len() as u64;
        let mut chain = umrc_chain(&v, 20 * n, n, rng.random()).map_err(e2s)?;
        for k in 0..count {
            let eta = chain.next().unwrap();
            let x = v.sites().nth(rng.random_range(0..v.len())).unwrap();
            let w = wave_decompose(&eta, &x).map_err(e2s)?;
            for j in 0..w.wave_count() {
                ensure(is_simply_connected(&w.support_sites(j)).map_err(e2s)?, || format!("{side}x{side} #{k}: wave {} has a hole", j + 1))?;
            }
            let full = stabilize_strict(&eta.add(&x, 1).map_err(e2s)?).map_err(e2s)?;
            ensure(full.m == w.total() && full.xi == w.xi, || format!("{side}x{side} #{k}: waves do not sum"))?;
            max_waves = max_waves.max(w.wave_count());
        }
    }
    let lakes = build_nested_lakes(5, &Volume::centered(2, 41).map_err(e2s)?).map_err(e2s)?;
    let r = metastability_probe(&lakes, &Site::origin(2), 10_000).map_err(e2s)?;
    ensure(r.wave_count >= 5, || format!("5 lakes gave {} waves", r.wave_count))?;
    Ok(format!("500 decompositions simply connected and exact (max {max_waves} waves); 5 lakes -> {} waves", r.wave_count))
}

fn arw_equivalence() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(113);
    let mut samples = 0usize;
    for k in 0..200 {
        let eta = random_instance(&mut rng, 16, 8);
        let s = stabilize_strict(&eta).map_err(e2s)?;
        let r = arw_run(&eta, ArwStop::UntilQuiescent, k).map_err(e2s)?;
        ensure(r.quiescent && r.state.n == s.m && r.state.config == s.xi, || format!("run {k}: final state differs"))?;
        ensure(r.state.clock_bound_holds(), || format!("run {k}: clock bound fails at the end"))?;
        let grid: Vec<f64> = (0..=32).map(|j| r.state.t * j as f64 / 32.0).collect();
        let tr = arw_trace(&eta, &grid, k).map_err(e2s)?;
        ensure(tr.iter().all(|p| p.clock_bound_holds), || format!("run {k}: clock bound fails on the grid"))?;
        ensure(tr.last().unwrap().total_topplings == s.m.total(), || format!("run {k}: trace total differs"))?;
        samples += tr.len();
    }
    Ok(format!("200 runs up to 16x16 match stabilization; clock bound at {samples} sampled times"))
}

fn six_bar() -> Check {
    let r = counterexample_6bar(
        &Volume::centered(2, 50).map_err(e2s)?,
        &schedule_from_sides(2, &[8, 16, 32, 64]).map_err(e2s)?,
        &ProbePolicy::default(),
    )
    .map_err(e2s)?;
    ensure(r.identity_max_residual == 0, || format!("identity residual {}", r.identity_max_residual))?;
    ensure(r.six_verdict.class == VerdictClass::Diverging, || format!("constant 6: {:?}", r.six.m0))?;
    ensure(r.two.m0.iter().all(|&m| m == 0), || format!("constant 2: {:?}", r.two.m0))?;
    Ok(format!("identity exact on 50x50; constant 6 m0 = {:?} diverging; constant 2 all zero", r.six.m0))
}

fn martingale() -> Check {
    let v = Volume::centered(2, 16).map_err(e2s)?;
    let o = Site::origin(2);
    let fs: [(&str, fn(&Site) -> f64); 3] = [
        ("x^2+y^2", |s| s.coords().iter().map(|&c| (c * c) as f64).sum()),
        ("x^3-3xy^2", |s| {
            let (x, y) = (s.coords()[0] as f64, s.coords()[1] as f64);
            x * x * x - 3.0 * x * y * y
        }),
        ("exp(x/4)", |s| (s.coords()[0] as f64 / 4.0).exp()),
    ];
    let mut parts = Vec::new();
    for (name, f) in fs {
        let e = martingale_mean(f, &v, &o, 10_000, 200, 115).map_err(e2s)?;
        ensure(e.within(0.0, 4.0), || format!("{name}: {:.4} ± {:.4}", e.mean, e.stderr))?;
        parts.push(format!("{name} {:+.3}±{:.3}", e.mean, e.stderr));
    }
    Ok(format!("10^4 walks: {}", parts.join(", ")))
}

fn main() {
    let criteria: [(&str, u64, fn() -> Check); 15] = [
        ("exact stabilization identity", 60, stabilization_identity),
        ("abelianness", 60, abelianness),
        ("oracle equivalence", 60, naive_oracle),
        ("Green identity", 60, green_identity),
        ("recurrence oracle", 120, recurrence_oracle),
        ("UMRC stationarity", 120, umrc_stationarity),
        ("UMRC density", 600, umrc_density),
        ("rectangle identity", 60, rectangle_identity),
        ("d = 1 threshold", 120, d1_theorem),
        ("supercritical growth", 300, supercritical_growth),
        ("line field example", 600, line_field_example),
        ("waves", 300, waves),
        ("ARW equivalence", 300, arw_equivalence),
        ("6 = 2 - Δ(x²+y²)", 60, six_bar),
        ("martingale", 60, martingale),
    ];
    let mut failed = 0;
    for (k, (name, budget, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let res = f();
        let took = start.elapsed();
        let res = match res {
            Ok(s) if took > Duration::from_secs(*budget) => Err(format!("{s}; over the {budget} s budget")),
            r => r,
        };
        let (tag, msg) = match &res {
            Ok(s) => ("PASS", s),
            Err(s) => ("FAIL", s),
        };
        failed += res.is_err() as usize;
        println!("[{tag}] {:>2}. {name}: {msg} ({:.1} s)", k + 1, took.as_secs_f64());
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
