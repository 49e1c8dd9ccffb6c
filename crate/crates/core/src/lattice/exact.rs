//! Exact rational elimination for the toppling matrix.
//!
//! The toppling matrix is symmetric positive definite and banded (bandwidth
//! equals the largest row-major stride), so Gaussian elimination needs no
//! pivoting and never fills outside the band. Only the upper band is stored;
//! by symmetry of every Schur complement the sub-diagonal multipliers are
//! read back from it.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::geometry::{Volume, SINK};
use crate::error::{Error, Result};

/// Refuse exact factorisation above this many sites.
pub const EXACT_SITE_CAP: usize = 1024;

#[derive(Debug, Clone)]
pub struct ExactFactor {
    n: usize,
    bw: usize,
    /// `upper[i][k]` is U(i, i + k) for k in 0..=bw (truncated at n).
    upper: Vec<Vec<BigRational>>,
}

impl ExactFactor {
    pub fn new(v: &Volume) -> Result<Self> {
        Self::with_cap(v, EXACT_SITE_CAP)
    }

    pub fn with_cap(v: &Volume, cap: usize) -> Result<Self> {
        let n = v.len();
        if n > cap {
            return Err(Error::ExactCapExceeded { sites: n, cap });
        }
        let st = v.stencil();
        let bw = (0..n)
            .flat_map(|i| st.neighbors(i).iter().filter(|&&j| j != SINK).map(move |&j| (j as usize).abs_diff(i)))
            .max()
            .unwrap_or(0);
        let deg = BigRational::from_integer(BigInt::from(st.degree()));
        let minus_one = -BigRational::one();
        let mut upper: Vec<Vec<BigRational>> = (0..n)
            .map(|i| {
                let width = (bw + 1).min(n - i);
                let mut row = vec![BigRational::zero(); width];
                row[0] = deg.clone();
                for &j in st.neighbors(i) {
                    if j != SINK && (j as usize) > i {
                        row[j as usize - i] = minus_one.clone();
                    }
                }
                row
            })
            .collect();

        for k in 0..n {
            let pivot = upper[k][0].clone();
            if pivot.is_zero() {
                return Err(Error::Invariant("zero pivot in exact elimination".into()));
            }
            let (head, tail) = upper.split_at_mut(k + 1);
            let prow = &head[k];
            for off in 1..prow.len() {
                if prow[off].is_zero() {
                    continue;
                }
                let l = &prow[off] / &pivot;
                let row = &mut tail[off - 1];
                // row i = k + off; update U(i, j) for j in i..=k+bw
                for j_off in off..prow.len() {
                    if prow[j_off].is_zero() {
                        continue;
                    }
                    let t = &l * &prow[j_off];
                    row[j_off - off] -= t;
                }
            }
        }
        Ok(ExactFactor { n, bw, upper })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Determinant of the toppling matrix (the product of the pivots).
    pub fn determinant(&self) -> BigInt {
        let mut det = BigRational::one();
        for row in &self.upper {
            det *= &row[0];
        }
        debug_assert!(det.is_integer());
        det.to_integer()
    }

    /// Solve `Δ_V x = b` exactly.
    pub fn solve(&self, b: &[BigRational]) -> Vec<BigRational> {
        assert_eq!(b.len(), self.n);
        let mut y: Vec<BigRational> = b.to_vec();
        // forward: L y = b, with L(i, k) = U(k, i) / U(k, k)
        for k in 0..self.n {
            if y[k].is_zero() {
                continue;
            }
            let row = &self.upper[k];
            let yk = &y[k] / &row[0];
            for off in 1..row.len() {
                if !row[off].is_zero() {
                    let t = &row[off] * &yk;
                    y[k + off] -= t;
                }
            }
        }
        // backward: U x = y
        let mut x = vec![BigRational::zero(); self.n];
        for i in (0..self.n).rev() {
            let row = &self.upper[i];
            let mut acc = y[i].clone();
            for off in 1..row.len() {
                if !row[off].is_zero() && !x[i + off].is_zero() {
                    acc -= &row[off] * &x[i + off];
                }
            }
            x[i] = acc / &row[0];
        }
        x
    }

    pub fn solve_int(&self, b: &[i64]) -> Vec<BigRational> {
        let b: Vec<BigRational> = b.iter().map(|&v| BigRational::from_integer(v.into())).collect();
        self.solve(&b)
    }

    pub fn bandwidth(&self) -> usize {
        self.bw
    }
}

/// Exact determinant of the toppling matrix of `v`.
pub fn toppling_determinant(v: &Volume) -> Result<BigInt> {
    Ok(ExactFactor::new(v)?.determinant())
}

/// Solve `Δ_V m = b` and return the solution if it is integral.
pub fn solve_integral(v: &Volume, b: &[i64]) -> Result<Option<Vec<i64>>> {
    let x = ExactFactor::new(v)?.solve_int(b);
    let mut out = Vec::with_capacity(x.len());
    for q in x {
        if !q.is_integer() {
            return Ok(None);
        }
        let z = q.to_integer();
        if z.abs() > BigInt::from(i64::MAX) {
            return Err(Error::Invariant("integral solution overflows i64".into()));
        }
        out.push(i64::try_from(z).expect("checked range"));
    }
    Ok(Some(out))
}
