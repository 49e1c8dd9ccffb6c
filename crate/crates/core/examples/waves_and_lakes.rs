//! Split the avalanche from one added grain into waves. Nested square lakes
//! of maximal height around the origin force at least one wave each.

use sandpile::fields::build_nested_lakes;
use sandpile::metastability::{detect_nested_lakes, metastability_probe};
use sandpile::recurrence::umrc_sample;
use sandpile::topple::wave_decompose;
use sandpile::{Site, Volume};

fn main() -> sandpile::Result<()> {
    let o = Site::origin(2);
    let v = Volume::centered(2, 21)?;
    let eta = umrc_sample(&v, 5)?;
    let w = wave_decompose(&eta, &o)?;
    println!("uniform recurrent sample: {} waves, sizes {:?}", w.wave_count(), w.supports.iter().map(Vec::len).collect::<Vec<_>>());

    let v = Volume::centered(2, 41)?;
    for n in [1, 3, 5] {
        let lakes = build_nested_lakes(n, &v)?;
        let found = detect_nested_lakes(&lakes, &o)?;
        let r = metastability_probe(&lakes, &o, 10_000)?;
        println!("{n} lakes built, {} detected at radii {:?}: {} waves", found.count(), found.radii, r.wave_count);
    }
    Ok(())
}
