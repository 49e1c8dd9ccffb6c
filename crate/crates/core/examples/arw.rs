//! Continuous-time toppling driven by Poisson clocks ends in the same state
//! as the deterministic stabilization, whatever the clock seed.

use sandpile::arw::{arw_run, arw_trace, ArwStop};
use sandpile::topple::stabilize_strict;
use sandpile::{HeightConfig, Volume};

fn main() -> sandpile::Result<()> {
    let v = Volume::rect(12, 12)?;
    let eta = HeightConfig::constant(&v, 6)?;
    let s = stabilize_strict(&eta)?;
    for seed in 0..3 {
        let r = arw_run(&eta, ArwStop::UntilQuiescent, seed)?;
        assert_eq!((&r.state.n, &r.state.config), (&s.m, &s.xi));
        println!("clock seed {seed}: quiescent at t = {:.2} after {} rings", r.state.t, r.events);
    }
    let grid: Vec<f64> = (0..=10).map(|k| 5.0 * k as f64).collect();
    for p in arw_trace(&eta, &grid, 0)? {
        println!("t = {:>4}: {:>3} unstable, {:>5} topplings", p.t, p.unstable_count, p.total_topplings);
    }
    Ok(())
}
