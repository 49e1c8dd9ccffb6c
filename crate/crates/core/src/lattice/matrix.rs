use super::geometry::{Site, Stencil, Volume, SINK};
use crate::error::Result;

/// The finite-volume toppling matrix: `2d` on the diagonal and `-1` between
/// nearest neighbours inside the volume. Never materialised; it acts through
/// the neighbour stencil.
#[derive(Debug, Clone)]
pub struct TopplingMatrix {
    volume: Volume,
    stencil: Stencil,
}

impl TopplingMatrix {
    pub fn new(volume: &Volume) -> Self {
        TopplingMatrix { volume: volume.clone(), stencil: volume.stencil() }
    }

    pub fn volume(&self) -> &Volume {
        &self.volume
    }

    pub fn stencil(&self) -> &Stencil {
        &self.stencil
    }

    pub fn entry(&self, x: &Site, y: &Site) -> Result<i64> {
        let i = self.volume.try_index(x)?;
        let j = self.volume.try_index(y)?;
        Ok(self.entry_idx(i, j))
    }

    pub fn entry_idx(&self, i: usize, j: usize) -> i64 {
        if i == j {
            self.stencil.degree() as i64
        } else if self.stencil.neighbors(i).contains(&(j as u32)) {
            -1
        } else {
            0
        }
    }

    /// Sum of row `i`; equals the number of lacking neighbours of site `i`.
    pub fn row_sum(&self, i: usize) -> i64 {
        let off = self.stencil.neighbors(i).iter().filter(|&&j| j != SINK).count() as i64;
        self.stencil.degree() as i64 - off
    }

    /// `Δ_V m`.
    pub fn apply(&self, m: &[i64]) -> Vec<i64> {
        apply(&self.stencil, m)
    }
}

pub(crate) fn apply(st: &Stencil, m: &[i64]) -> Vec<i64> {
    let deg = st.degree() as i64;
    (0..st.len())
        .map(|i| {
            let nb: i64 = st
                .neighbors(i)
                .iter()
                .filter(|&&j| j != SINK)
                .map(|&j| m[j as usize])
                .sum();
            deg * m[i] - nb
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn row_sums_are_lacking_counts() {
        for (w, h) in [(1, 1), (2, 2), (5, 3), (32, 32), (7, 1)] {
            let v = Volume::rect(w, h).unwrap();
            let a = TopplingMatrix::new(&v);
            let ones = vec![1i64; v.len()];
            let applied = a.apply(&ones);
            for i in 0..v.len() {
                let lack = v.lacking_neighbors(&v.site(i)).unwrap() as i64;
                assert_eq!(a.row_sum(i), lack);
                assert_eq!(applied[i], lack);
            }
        }
    }

    #[test]
    fn symmetric_entries() {
        let v = Volume::rect(4, 3).unwrap();
        let a = TopplingMatrix::new(&v);
        for i in 0..v.len() {
            for j in 0..v.len() {
                assert_eq!(a.entry_idx(i, j), a.entry_idx(j, i));
            }
        }
        assert_eq!(a.entry(&Site::from([0, 0]), &Site::from([1, 0])).unwrap(), -1);
        assert_eq!(a.entry(&Site::from([0, 0]), &Site::from([1, 1])).unwrap(), 0);
    }
}
