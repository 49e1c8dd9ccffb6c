//! Bracket the critical density of a two-point family by bisection on the
//! mean, using the nested-volume verdict at each point.

use sandpile::prober::{critical_bracket, schedule_from_sides, DensityFamily, ProbePolicy};

fn main() -> sandpile::Result<()> {
    let vols = schedule_from_sides(1, &[64, 128, 256, 512, 1024, 2048])?;
    let policy = ProbePolicy { majority_seeds: 5, ..ProbePolicy::default() };
    let b = critical_bracket(&DensityFamily::TwoPoint { low: 1, high: 3 }, 1.5, 2.5, 0.05, &vols, 0, &policy)?;
    for p in &b.points {
        println!("mean {:.4}: {}", p.rho, p.class);
    }
    println!("d = 1 critical density in [{:.4}, {:.4}] (resolved: {})", b.lo, b.hi, b.resolved);
    Ok(())
}
