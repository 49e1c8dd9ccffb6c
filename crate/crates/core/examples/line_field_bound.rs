//! Adding sparse random lines to a recurrent background creates nested
//! rectangles, each of which forces one more toppling at the origin.

use sandpile::fields::{line_field, LineFieldParams, SamplerSpec};
use sandpile::prober::{classify, probe_config, rectangle_lower_bound, schedule_from_sides, ProbePolicy};
use sandpile::recurrence::umrc_sample;
use sandpile::rng::derive_seed;
use sandpile::{Site, Volume};

fn main() -> sandpile::Result<()> {
    let v = Volume::centered(2, 51)?;
    let nest = schedule_from_sides(2, &[13, 25, 37, 51])?;
    let policy = ProbePolicy::default();
    for seed in 0..4 {
        let base = umrc_sample(&v, derive_seed(seed, 0))?;
        let (lines, ladder) = line_field(&LineFieldParams { p: 0.2, seed: derive_seed(seed, 1) }, &v)?;
        let b = rectangle_lower_bound(&lines, &ladder, &base)?;
        let spec = SamplerSpec::parse("umrc+line:0.2", seed)?;
        let series = probe_config(&base.plus(&lines)?, &nest, &Site::origin(2), &policy, spec)?;
        let verdict = classify(&series, &policy)?;
        println!("seed {seed}: {} rectangles, m0 = {} (bound holds: {}), m0 by box {:?} -> {}", b.ladder_count, b.m0, b.holds(), series.m0, verdict.class);
    }
    Ok(())
}
