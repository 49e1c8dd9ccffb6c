//! Recurrent configurations: count them on a 2x2 box with the burning test,
//! compare with the determinant of the toppling matrix, and estimate the
//! density of the uniform recurrent measure with the addition chain.

use sandpile::lattice::toppling_determinant;
use sandpile::recurrence::{density_estimate, find_forbidden, is_recurrent};
use sandpile::fields::SamplerSpec;
use sandpile::{HeightConfig, Volume};

fn main() -> sandpile::Result<()> {
    let v = Volume::rect(2, 2)?;
    let mut recurrent = 0;
    for code in 0..256u32 {
        let eta = HeightConfig::new(v.clone(), (0..4).map(|k| 1 + ((code >> (2 * k)) & 3) as i64).collect())?;
        if is_recurrent(&eta)? {
            recurrent += 1;
        }
    }
    println!("2x2: {recurrent} recurrent of 256, determinant {}", toppling_determinant(&v)?);

    let low = HeightConfig::new(v.clone(), vec![1, 1, 4, 4])?;
    println!("forbidden subconfiguration of [1, 1, 4, 4]: {:?}", find_forbidden(&low).map(|w| w.sites));

    let big = Volume::centered(2, 32)?;
    let region = Volume::centered(2, 16)?;
    let t = density_estimate(&SamplerSpec::parse("umrc", 3)?, &big, &region, 40, 3)?;
    println!("uniform recurrent density on the central 16x16: {:.4} ± {:.4}", t.estimate.mean, t.estimate.stderr);
    Ok(())
}
