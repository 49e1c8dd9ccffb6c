//! Stabilize a box of height-5 piles and check that every toppling order
//! agrees, that `eta - Δm = xi`, and that grains are only lost at the sink.

use sandpile::topple::{stabilize_strict, stabilize_with_order, OrderPolicy};
use sandpile::{HeightConfig, Site, Volume};

fn main() -> sandpile::Result<()> {
    let v = Volume::centered(2, 16)?;
    let eta = HeightConfig::constant(&v, 5)?;
    let r = stabilize_strict(&eta)?;
    println!("{} topplings in total, m(origin) = {}", r.m.total(), r.m.at(&Site::origin(2)).unwrap());
    println!("mean height {:.3} -> {:.3}", eta.mean(), r.xi.mean());

    // grains leave through boundary sites, once per missing neighbor
    let lost: i64 = v
        .sites()
        .map(|x| {
            let missing = x.neighbors().iter().filter(|y| !v.contains(y)).count() as i64;
            missing * r.m.at(&x).unwrap() as i64
        })
        .sum();
    assert_eq!(eta.total(), r.xi.total() + lost);

    for policy in OrderPolicy::ALL {
        let s = stabilize_with_order(&eta, &v, policy, 7)?.into_result()?;
        assert_eq!((&s.m, &s.xi), (&r.m, &r.xi));
        println!("{policy:?}: same result");
    }
    Ok(())
}
