//! Constant 6 on Z^2 equals constant 2 minus the Laplacian of x^2 + y^2, so
//! it is equivalent to a stable configuration yet is not stabilizable.

use sandpile::prober::{counterexample_6bar, schedule_from_sides, ProbePolicy};
use sandpile::Volume;

fn main() -> sandpile::Result<()> {
    let r = counterexample_6bar(
        &Volume::centered(2, 50)?,
        &schedule_from_sides(2, &[8, 16, 32, 64])?,
        &ProbePolicy::default(),
    )?;
    println!("identity residual on 50x50: {}", r.identity_max_residual);
    println!("constant 6: m0 = {:?} ({}, growth exponent {:?})", r.six.m0, r.six_verdict.class, r.six_verdict.growth_exponent);
    println!("constant 2: m0 = {:?}", r.two.m0);
    Ok(())
}
