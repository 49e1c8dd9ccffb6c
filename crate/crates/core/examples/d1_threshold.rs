//! In one dimension an iid field is stabilizable exactly when its mean is
//! below 2. Probe nested intervals for a few laws and report the verdicts.

use sandpile::fields::FieldKind;
use sandpile::prober::{d1_exact_check, schedule_from_sides, ProbePolicy};

fn main() -> sandpile::Result<()> {
    let vols = schedule_from_sides(1, &[64, 128, 256, 512, 1024, 2048, 4096])?;
    let policy = ProbePolicy::default();
    let seeds: Vec<u64> = (0..10).collect();
    for kind in [FieldKind::two_point(1, 3, 1.8)?, FieldKind::two_point(1, 3, 2.2)?, "periodic:31".parse()?] {
        let r = d1_exact_check(&kind, &vols, &seeds, &policy)?;
        println!(
            "mean {:.2}: expected {:?}, {} of {} agree, {} contradict",
            r.mean,
            r.expectation,
            r.agreements,
            seeds.len(),
            r.contradictions
        );
        println!("  seed 0: m0 = {:?}", r.series[0].m0);
    }
    Ok(())
}
