//! `f(X_n) - f(X_0)` minus the accumulated Laplacian of `f` along a simple
//! random walk is a martingale, so its sample mean sits near zero.

use sandpile::lattice::martingale_mean;
use sandpile::{Site, Volume};

fn main() -> sandpile::Result<()> {
    let v = Volume::centered(2, 16)?;
    let o = Site::origin(2);
    let tests: [(&str, fn(&Site) -> f64); 3] = [
        ("x^2 + y^2", |s| s.coords().iter().map(|&c| (c * c) as f64).sum()),
        ("x^3 - 3xy^2", |s| {
            let (x, y) = (s.coords()[0] as f64, s.coords()[1] as f64);
            x * x * x - 3.0 * x * y * y
        }),
        ("exp(x / 4)", |s| (s.coords()[0] as f64 / 4.0).exp()),
    ];
    for (name, f) in tests {
        let e = martingale_mean(f, &v, &o, 10_000, 200, 9)?;
        println!("{name:>12}: mean {:+.4} ± {:.4}", e.mean, e.stderr);
    }
    Ok(())
}
