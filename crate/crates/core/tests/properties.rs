mod common;

use proptest::prelude::*;
use sandpile::fields::{sample, SamplerSpec};
use sandpile::lattice::discrete_laplacian;
use sandpile::recurrence::is_recurrent;
use sandpile::topple::{stabilize_strict, stabilize_with_order, OrderPolicy};
use sandpile::{HeightConfig, Site, Volume};

fn config(max_side: usize, max_height: i64) -> impl Strategy<Value = HeightConfig> {
    (1..=max_side, 1..=max_side).prop_flat_map(move |(w, h)| {
        proptest::collection::vec(0..=max_height, w * h)
            .prop_map(move |hs| HeightConfig::new(Volume::rect(w, h).unwrap(), hs).unwrap())
    })
}

/// Grains lost to the sink: one per toppling per missing neighbor.
fn sink_loss(v: &Volume, m: &[u64]) -> i64 {
    v.sites()
        .map(|x| {
            let missing = 2 * v.dim() - common::inner_neighbors(v, &x).len();
            missing as i64 * m[v.index_of(&x).unwrap()] as i64
        })
        .sum()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn conservation(eta in config(12, 8)) {
        let r = stabilize_strict(&eta).unwrap();
        prop_assert!(r.xi.is_stable());
        prop_assert_eq!(eta.total(), r.xi.total() + sink_loss(eta.volume(), &r.m.counts));
    }

    #[test]
    fn every_order_agrees(eta in config(8, 8), seed in any::<u64>()) {
        let r = stabilize_strict(&eta).unwrap();
        for p in OrderPolicy::ALL {
            let s = stabilize_with_order(&eta, eta.volume(), p, seed).unwrap().into_result().unwrap();
            prop_assert_eq!(&s.m, &r.m);
            prop_assert_eq!(&s.xi, &r.xi);
        }
    }

    #[test]
    fn odometer_grows_with_the_volume(eta in config(10, 7), cut in 0usize..4) {
        let v = eta.volume();
        let (lo, hi) = (v.lo().to_vec(), v.hi().to_vec());
        let mut inner_hi = hi.clone();
        inner_hi[cut % 2] = (hi[cut % 2] - (cut as i64 / 2 + 1)).max(lo[cut % 2]);
        let w = Volume::new(lo, inner_hi).unwrap();
        let small = stabilize_strict(&eta.restrict(&w).unwrap()).unwrap();
        let big = stabilize_strict(&eta).unwrap();
        for x in w.sites() {
            prop_assert!(small.m.at(&x).unwrap() <= big.m.at(&x).unwrap());
        }
    }

    #[test]
    fn odometer_grows_with_the_heights(eta in config(8, 7), bumps in proptest::collection::vec(0i64..3, 64)) {
        let v = eta.volume();
        let more = HeightConfig::new(v.clone(), eta.heights().iter().zip(&bumps).map(|(h, b)| h + b).collect()).unwrap();
        let a = stabilize_strict(&eta).unwrap();
        let b = stabilize_strict(&more).unwrap();
        prop_assert!(a.m.counts.iter().zip(&b.m.counts).all(|(x, y)| x <= y));
    }

    #[test]
    fn recurrence_is_upward_closed(eta in config(5, 4), bumps in proptest::collection::vec(0i64..2, 25)) {
        let deg = 4;
        let eta = HeightConfig::new(eta.volume().clone(), eta.heights().iter().map(|h| h.clamp(&1, &deg).to_owned()).collect()).unwrap();
        let up = HeightConfig::new(eta.volume().clone(), eta.heights().iter().zip(&bumps).map(|(h, b)| (h + b).min(deg)).collect()).unwrap();
        if is_recurrent(&eta).unwrap() {
            prop_assert!(is_recurrent(&up).unwrap());
        }
        if eta.volume().len() <= 12 {
            prop_assert_eq!(is_recurrent(&eta).unwrap(), common::brute_force_recurrent(&eta));
        }
    }

    #[test]
    fn site_keyed_samples_restrict(seed in any::<u64>(), side in 2usize..12) {
        let spec = SamplerSpec::parse("uniform:1,2,3,4,5", seed).unwrap();
        let big = Volume::centered(2, 2 * side).unwrap();
        let small = Volume::centered(2, side).unwrap();
        prop_assert_eq!(sample(&spec, &big).unwrap().restrict(&small).unwrap(), sample(&spec, &small).unwrap());
    }

    #[test]
    fn laplacian_is_linear(a in -5i64..5, b in -5i64..5, c in -3i64..3, x in -20i64..20, y in -20i64..20) {
        let f = |s: &Site| s.coords()[0] * s.coords()[0] + 3 * s.coords()[1];
        let g = |s: &Site| s.coords()[0] * s.coords()[1] * s.coords()[1] + c;
        let s = Site::from([x, y]);
        let lhs = discrete_laplacian(|z: &Site| a * f(z) + b * g(z), &s);
        prop_assert_eq!(lhs, a * discrete_laplacian(f, &s) + b * discrete_laplacian(g, &s));
    }
}
