use super::geometry::{Site, Volume};
use super::walk::{in_box, Estimate};
use crate::error::{Error, Result};
use crate::rng::{self, Domain};
use rand::Rng;

/// Infinite-volume `Δf(x) = 2d f(x) - Σ_{|y-x|=1} f(y)` (toppling-matrix sign).
pub fn discrete_laplacian<F>(f: F, x: &Site) -> i64
where
    F: Fn(&Site) -> i64,
{
    let d = x.dim() as i64;
    2 * d * f(x) - x.neighbors().iter().map(&f).sum::<i64>()
}

/// Real-valued counterpart of [`discrete_laplacian`].
pub fn discrete_laplacian_f64<F>(f: F, x: &Site) -> f64
where
    F: Fn(&Site) -> f64,
{
    let d = x.dim() as f64;
    2.0 * d * f(x) - x.neighbors().iter().map(&f).sum::<f64>()
}

/// Sample mean of `M_n = f(X_n) - f(X_0) - (1/2d) Σ_{i<n} (-Δf)(X_i)` over
/// walks started at `start` and stopped at `min(horizon, exit time)`.
///
/// `f` is evaluated on `v` and on the exit site, so it must be defined on
/// the one-site halo around `v`.
pub fn martingale_mean<F>(f: F, v: &Volume, start: &Site, n_walks: usize, horizon: usize, seed: u64) -> Result<Estimate>
where
    F: Fn(&Site) -> f64,
{
    if !v.contains(start) {
        return Err(Error::SiteOutside(start.clone()));
    }
    let d = v.dim();
    let inv = 1.0 / (2 * d) as f64;
    let samples: Vec<f64> = (0..n_walks as u64)
        .map(|k| {
            let mut rng = rng::stream(seed, Domain::Walk, k, 1);
            let mut pos = start.coords().to_vec();
            let mut drift = 0.0;
            let f0 = f(start);
            for _ in 0..horizon {
                let here = Site::new(pos.clone());
                drift += inv * -discrete_laplacian_f64(&f, &here);
                let j = rng.random_range(0..2 * d);
                pos[j / 2] += if j % 2 == 0 { 1 } else { -1 };
                if !in_box(v, &pos) {
                    break;
                }
            }
            f(&Site::new(pos)) - f0 - drift
        })
        .collect();
    Ok(Estimate::from_samples(&samples))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sq(s: &Site) -> i64 {
        s.coords().iter().map(|c| c * c).sum()
    }

    #[test]
    fn laplacian_examples() {
        for x in [[0, 0], [3, -7], [100, 12]] {
            assert_eq!(discrete_laplacian(sq, &Site::from(x)), -4);
            assert_eq!(discrete_laplacian(|_| 9, &Site::from(x)), 0);
        }
        assert_eq!(discrete_laplacian(|s| s.coords()[0], &Site::from([17])), 0);
    }

    #[test]
    fn martingale_zero_function_is_exact() {
        let v = Volume::centered(2, 21).unwrap();
        let e = martingale_mean(|_| 0.0, &v, &Site::origin(2), 100, 50, 1).unwrap();
        assert_eq!(e.mean, 0.0);
    }
}
