//! Simple connectedness of finite subsets of Z^2.
//!
//! A set is replaced by the union of the closed unit squares centred at its
//! points. Two closed squares meeting only at a corner are connected, so the
//! set itself is taken with 8-adjacency. A hole is a bounded component of
//! the complement; corner contact separates complement cells, so the
//! complement is taken with 4-adjacency.

use std::collections::{HashSet, VecDeque};

use crate::error::{Error, Result};
use crate::lattice::Site;

const N4: [(i64, i64); 4] = [(1, 0), (-1, 0), (0, 1), (0, -1)];
const N8: [(i64, i64); 8] = [(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (1, -1), (-1, 1), (-1, -1)];

pub fn is_simply_connected(sites: &[Site]) -> Result<bool> {
    if let Some(s) = sites.iter().find(|s| s.dim() != 2) {
        return Err(Error::RequiresDimension { required: 2, got: s.dim() });
    }
    if sites.is_empty() {
        return Ok(false);
    }
    let pts: Vec<(i64, i64)> = sites.iter().map(|s| (s.coords()[0], s.coords()[1])).collect();
    let x0 = pts.iter().map(|p| p.0).min().unwrap() - 1;
    let x1 = pts.iter().map(|p| p.0).max().unwrap() + 1;
    let y0 = pts.iter().map(|p| p.1).min().unwrap() - 1;
    let y1 = pts.iter().map(|p| p.1).max().unwrap() + 1;
    let w = (x1 - x0 + 1) as usize;
    let h = (y1 - y0 + 1) as usize;
    let idx = |x: i64, y: i64| (x - x0) as usize * h + (y - y0) as usize;
    let mut inside = vec![false; w * h];
    for &(x, y) in &pts {
        inside[idx(x, y)] = true;
    }
    let members: HashSet<(i64, i64)> = pts.iter().copied().collect();

    let flood = |start: (i64, i64), want: bool, nbrs: &[(i64, i64)]| -> usize {
        let mut seen = vec![false; w * h];
        let mut q = VecDeque::from([start]);
        seen[idx(start.0, start.1)] = true;
        let mut count = 0;
        while let Some((x, y)) = q.pop_front() {
            count += 1;
            for (dx, dy) in nbrs {
                let (nx, ny) = (x + dx, y + dy);
                if nx < x0 || nx > x1 || ny < y0 || ny > y1 {
                    continue;
                }
                let k = idx(nx, ny);
                if !seen[k] && inside[k] == want {
                    seen[k] = true;
                    q.push_back((nx, ny));
                }
            }
        }
        count
    };

    if flood(pts[0], true, &N8) != members.len() {
        return Ok(false);
    }
    // the halo corner is outside the set and in the unbounded component
    let outside = w * h - members.len();
    Ok(flood((x0, y0), false, &N4) == outside)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(pts: &[(i64, i64)]) -> Vec<Site> {
        pts.iter().map(|&(x, y)| Site::from([x, y])).collect()
    }

    fn square(k: i64) -> Vec<(i64, i64)> {
        (0..k).flat_map(|x| (0..k).map(move |y| (x, y))).collect()
    }

    #[test]
    fn solid_square() {
        assert!(is_simply_connected(&set(&square(3))).unwrap());
        assert!(is_simply_connected(&set(&[(4, 4)])).unwrap());
    }

    #[test]
    fn ring_has_hole() {
        let ring: Vec<_> = square(3).into_iter().filter(|&p| p != (1, 1)).collect();
        assert!(!is_simply_connected(&set(&ring)).unwrap());
    }

    #[test]
    fn disjoint_sites() {
        assert!(!is_simply_connected(&set(&[(0, 0), (3, 0)])).unwrap());
        assert!(!is_simply_connected(&[]).unwrap());
    }

    #[test]
    fn corner_contact() {
        // two squares sharing a corner point: connected and simply connected
        assert!(is_simply_connected(&set(&[(0, 0), (1, 1)])).unwrap());
        // a diamond of four squares encloses the centre square through corners
        assert!(!is_simply_connected(&set(&[(1, 0), (0, 1), (-1, 0), (0, -1)])).unwrap());
    }

    #[test]
    fn only_planar() {
        assert!(is_simply_connected(&[Site::from([0, 0, 0])]).is_err());
    }
}
