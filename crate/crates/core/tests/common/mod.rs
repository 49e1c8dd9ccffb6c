//! Independent oracles. Nothing here calls the engine, the stencil, or the
//! exact solver of the library; neighbors come from coordinates only.

#![allow(dead_code)]

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;
use sandpile::{HeightConfig, Site, Volume};

/// Lattice neighbors of `x` that lie in `v`.
pub fn inner_neighbors(v: &Volume, x: &Site) -> Vec<usize> {
    x.neighbors().iter().filter_map(|y| v.index_of(y)).collect()
}

/// `(Δ_V f)(x) = 2d f(x) - Σ_{y ∈ V, y ~ x} f(y)`.
pub fn laplacian(v: &Volume, f: &[i64]) -> Vec<i64> {
    let deg = 2 * v.dim() as i64;
    v.sites()
        .map(|x| {
            let i = v.index_of(&x).unwrap();
            deg * f[i] - inner_neighbors(v, &x).iter().map(|&j| f[j]).sum::<i64>()
        })
        .collect()
}

/// Topple the lowest-index unstable site, one toppling at a time.
pub fn naive_stabilize(eta: &HeightConfig) -> (Vec<u64>, Vec<i64>) {
    let v = eta.volume();
    let deg = 2 * v.dim() as i64;
    let nbrs: Vec<Vec<usize>> = v.sites().map(|x| inner_neighbors(v, &x)).collect();
    let mut h = eta.heights().to_vec();
    let mut m = vec![0u64; h.len()];
    while let Some(i) = h.iter().position(|&x| x > deg) {
        h[i] -= deg;
        m[i] += 1;
        for &j in &nbrs[i] {
            h[j] += 1;
        }
    }
    (m, h)
}

/// Recurrent iff stable and no nonempty `F ⊆ V` has `η(x) <= #{y ∈ F : y ~ x}`
/// for every `x ∈ F`. Exponential in `|V|`.
pub fn brute_force_recurrent(eta: &HeightConfig) -> bool {
    let v = eta.volume();
    let n = v.len();
    assert!(n <= 20, "brute force over 2^{n} subsets");
    if !eta.is_stable() {
        return false;
    }
    let nbrs: Vec<Vec<usize>> = v.sites().map(|x| inner_neighbors(v, &x)).collect();
    let h = eta.heights();
    !(1u32..1 << n).any(|mask| {
        (0..n)
            .filter(|&i| mask >> i & 1 == 1)
            .all(|i| h[i] <= nbrs[i].iter().filter(|&&j| mask >> j & 1 == 1).count() as i64)
    })
}

/// Row `x` of `Δ_V^{-1}` by Gauss-Jordan elimination over the rationals.
pub fn exact_green_row(v: &Volume, x: &Site) -> Vec<BigRational> {
    let n = v.len();
    let deg = 2 * v.dim() as i64;
    let r = |k: i64| BigRational::from_integer(BigInt::from(k));
    let mut a: Vec<Vec<BigRational>> = vec![vec![BigRational::zero(); n + 1]; n];
    for y in v.sites() {
        let i = v.index_of(&y).unwrap();
        a[i][i] = r(deg);
        for j in inner_neighbors(v, &y) {
            a[i][j] = r(-1);
        }
    }
    // Δ_V is symmetric, so row x of the inverse solves Δ_V g = e_x
    a[v.index_of(x).unwrap()][n] = BigRational::one();
    for col in 0..n {
        let p = (col..n).find(|&k| !a[k][col].is_zero()).expect("nonsingular");
        a.swap(col, p);
        let inv = a[col][col].recip();
        for c in col..=n {
            a[col][c] = &a[col][c] * &inv;
        }
        for k in 0..n {
            if k != col && !a[k][col].is_zero() {
                let f = a[k][col].clone();
                for c in col..=n {
                    let t = &f * &a[col][c];
                    a[k][c] -= t;
                }
            }
        }
    }
    a.into_iter().map(|row| row[n].clone()).collect()
}

/// Box `[0, w) x [0, h)` with `1 <= w, h <= max_side` and heights in
/// `0..=max_height`.
pub fn random_instance<R: Rng>(rng: &mut R, max_side: usize, max_height: i64) -> HeightConfig {
    let v = Volume::rect(rng.random_range(1..=max_side), rng.random_range(1..=max_side)).unwrap();
    let h = (0..v.len()).map(|_| rng.random_range(0..=max_height)).collect();
    HeightConfig::new(v, h).unwrap()
}

/// Uniformly random stable configuration with heights in `1..=2d`.
pub fn random_stable<R: Rng>(rng: &mut R, v: &Volume) -> HeightConfig {
    let deg = 2 * v.dim() as i64;
    HeightConfig::new(v.clone(), (0..v.len()).map(|_| rng.random_range(1..=deg)).collect()).unwrap()
}
