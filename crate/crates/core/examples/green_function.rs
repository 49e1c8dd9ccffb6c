//! The odometer at a site is the Green function paired with `eta - xi`.
//! Compare an exact Green row with a random-walk estimate, then check the
//! identity exactly on a random configuration.

use sandpile::fields::{sample, SamplerSpec};
use sandpile::lattice::{green_row_exact, rw_visits_estimate};
use sandpile::prober::green_identity_check;
use sandpile::{Site, Volume};

fn main() -> sandpile::Result<()> {
    let v = Volume::centered(2, 8)?;
    let o = Site::origin(2);
    let row = green_row_exact(&v, &o)?;
    for y in [Site::from([0, 0]), Site::from([1, 0]), Site::from([2, 2])] {
        let exact = &row[v.index_of(&y).unwrap()];
        let est = rw_visits_estimate(&v, &o, &y, 20_000, 1)?;
        println!("G({o}, {y}) = {exact} ~ {:.4} ± {:.4}", est.mean, est.stderr);
    }

    let eta = sample(&SamplerSpec::parse("uniform:3,4,5,6", 11)?, &v)?;
    let c = green_identity_check(&eta, &o)?;
    println!("m(origin) = {}, exact residual {}", c.m_at_site, c.residual.as_deref().unwrap_or("n/a"));
    assert!(c.holds());
    Ok(())
}
