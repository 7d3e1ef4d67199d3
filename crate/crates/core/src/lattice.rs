//! The discrete torus `Z_L^d` with canonical coordinates in `(-L/2, L/2]^d`.
//!
//! Sites are numbered row-major over shifted coordinates: axis 0 is the most
//! significant digit and every coordinate is offset by `floor((L-1)/2)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TorusLattice {
    dim: usize,
    side: usize,
    sites: usize,
}

impl TorusLattice {
    pub fn new(dim: usize, side: usize) -> Result<Self> {
        if dim == 0 || side == 0 {
            return Err(Error::Parameter(format!(
                "lattice needs positive dimension and side, got d={dim}, L={side}"
            )));
        }
        let sites = (0..dim)
            .try_fold(1usize, |acc, _| acc.checked_mul(side))
            .filter(|&n| n <= u32::MAX as usize)
            .ok_or_else(|| Error::capacity("L^d", (side as u128).pow(dim as u32), u32::MAX as u128))?;
        Ok(TorusLattice { dim, side, sites })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn side(&self) -> usize {
        self.side
    }

    /// Number of sites `N = L^d`.
    pub fn sites(&self) -> usize {
        self.sites
    }

    fn shift(&self) -> i64 {
        (self.side as i64 - 1) / 2
    }

    fn min_coord(&self) -> i64 {
        -self.shift()
    }

    fn max_coord(&self) -> i64 {
        self.side as i64 - 1 - self.shift()
    }

    /// Reduces an arbitrary integer to its representative in `(-L/2, L/2]`.
    pub fn wrap(&self, v: i64) -> i64 {
        let l = self.side as i64;
        (v - self.min_coord()).rem_euclid(l) + self.min_coord()
    }

    pub fn check(&self, x: &[i64]) -> Result<()> {
        let ok = x.len() == self.dim
            && x
                .iter()
                .all(|&c| c >= self.min_coord() && c <= self.max_coord());
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidCoordinate {
                coord: x.to_vec(),
                dim: self.dim,
                side: self.side,
            })
        }
    }

    pub fn index(&self, x: &[i64]) -> Result<usize> {
        self.check(x)?;
        Ok(self.index_unchecked(x))
    }

    fn index_unchecked(&self, x: &[i64]) -> usize {
        let shift = self.shift();
        x.iter()
            .fold(0usize, |acc, &c| acc * self.side + (c + shift) as usize)
    }

    pub fn coord(&self, index: usize) -> Vec<i64> {
        debug_assert!(index < self.sites);
        let mut out = vec![0i64; self.dim];
        let mut rest = index;
        for slot in out.iter_mut().rev() {
            *slot = (rest % self.side) as i64 - self.shift();
            rest /= self.side;
        }
        out
    }

    /// `[x - y]_L`, the representative of `x - y` in `(-L/2, L/2]^d`.
    pub fn representative(&self, x: &[i64], y: &[i64]) -> Result<Vec<i64>> {
        self.check(x)?;
        self.check(y)?;
        Ok(x.iter().zip(y).map(|(a, b)| self.wrap(a - b)).collect())
    }

    /// Periodic l-infinity distance.
    pub fn torus_distance(&self, x: &[i64], y: &[i64]) -> Result<u64> {
        Ok(linf(&self.representative(x, y)?))
    }

    /// `<x - y> = ||x - y||_L + W`.
    pub fn bracket_distance(&self, x: &[i64], y: &[i64], width: f64) -> Result<f64> {
        if !(width >= 1.0) {
            return Err(Error::Parameter(format!("band width must be >= 1, got {width}")));
        }
        Ok(self.torus_distance(x, y)? as f64 + width)
    }

    /// Site index of the displacement `[x - y]_L` for site indices `x`, `y`.
    pub fn displacement(&self, x: usize, y: usize) -> usize {
        let l = self.side;
        let shift = self.shift() as usize;
        let (mut a, mut b) = (x, y);
        let mut stride = 1usize;
        let mut out = 0usize;
        for _ in 0..self.dim {
            let (da, db) = (a % l, b % l);
            // digits are shifted coordinates; their difference modulo L is
            // again a shifted coordinate once the offset is restored
            let diff = (da + l - db + shift) % l;
            out += diff * stride;
            stride *= l;
            a /= l;
            b /= l;
        }
        out
    }

    /// Site index of `-x`.
    pub fn negate(&self, x: usize) -> usize {
        self.displacement(self.origin(), x)
    }

    pub fn origin(&self) -> usize {
        self.index_unchecked(&vec![0; self.dim])
    }

    /// l-infinity norm of the canonical coordinate of site `x`.
    pub fn norm(&self, x: usize) -> u64 {
        let l = self.side;
        let shift = self.shift();
        let mut rest = x;
        let mut best = 0u64;
        for _ in 0..self.dim {
            let c = (rest % l) as i64 - shift;
            best = best.max(c.unsigned_abs());
            rest /= l;
        }
        best
    }

    /// `||x - y||_L` for site indices.
    pub fn distance(&self, x: usize, y: usize) -> u64 {
        self.norm(self.displacement(x, y))
    }

    /// Position of site `x` in the FFT layout, where each axis is stored as
    /// `c mod L` with the same row-major digit order.
    pub fn fft_position(&self, x: usize) -> usize {
        let l = self.side;
        let shift = self.shift() as usize;
        let mut rest = x;
        let mut stride = 1usize;
        let mut out = 0usize;
        for _ in 0..self.dim {
            let digit = rest % l;
            out += ((digit + l - shift) % l) * stride;
            stride *= l;
            rest /= l;
        }
        out
    }
}

pub(crate) fn linf(v: &[i64]) -> u64 {
    v.iter().map(|c| c.unsigned_abs()).max().unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn representative_examples() {
        let l8 = TorusLattice::new(1, 8).unwrap();
        assert_eq!(l8.representative(&[4], &[-3]).unwrap(), vec![-1]);
        assert_eq!(l8.representative(&[2], &[2]).unwrap(), vec![0]);
        let l6 = TorusLattice::new(2, 6).unwrap();
        assert_eq!(l6.representative(&[3, 0], &[-2, 0]).unwrap(), vec![-1, 0]);
    }

    #[test]
    fn distance_examples() {
        let l8 = TorusLattice::new(1, 8).unwrap();
        assert_eq!(l8.torus_distance(&[4], &[-3]).unwrap(), 1);
        assert_eq!(l8.torus_distance(&[1], &[1]).unwrap(), 0);
        let l6 = TorusLattice::new(2, 6).unwrap();
        assert_eq!(l6.torus_distance(&[3, 2], &[-2, 0]).unwrap(), 2);
    }

    #[test]
    fn bracket_examples() {
        let l8 = TorusLattice::new(1, 8).unwrap();
        assert_eq!(l8.bracket_distance(&[0], &[0], 4.0).unwrap(), 4.0);
        assert_eq!(l8.bracket_distance(&[0], &[3], 2.0).unwrap(), 5.0);
        assert_eq!(l8.bracket_distance(&[4], &[-3], 7.0).unwrap(), 8.0);
        assert!(matches!(
            l8.bracket_distance(&[0], &[0], 0.5),
            Err(Error::Parameter(_))
        ));
    }

    #[test]
    fn coordinates_out_of_range_are_rejected() {
        let l8 = TorusLattice::new(1, 8).unwrap();
        assert!(matches!(
            l8.representative(&[-4], &[0]),
            Err(Error::InvalidCoordinate { .. })
        ));
        assert!(l8.index(&[5]).is_err());
        assert!(l8.index(&[4]).is_ok());
        let l7 = TorusLattice::new(1, 7).unwrap();
        assert!(l7.index(&[-3]).is_ok());
        assert!(l7.index(&[4]).is_err());
    }

    #[test]
    fn index_coord_bijection() {
        for (d, l) in [(1, 8), (2, 5), (3, 4), (2, 1)] {
            let lat = TorusLattice::new(d, l).unwrap();
            for i in 0..lat.sites() {
                let c = lat.coord(i);
                lat.check(&c).unwrap();
                assert_eq!(lat.index(&c).unwrap(), i);
            }
        }
    }

    #[test]
    fn even_side_distance_is_bounded_by_half() {
        let lat = TorusLattice::new(2, 6).unwrap();
        for x in 0..lat.sites() {
            for y in 0..lat.sites() {
                assert!(lat.distance(x, y) <= 3);
            }
        }
    }

    fn lattice_and_pair() -> impl Strategy<Value = (TorusLattice, usize, usize, usize)> {
        (1usize..4, 1usize..9).prop_flat_map(|(d, l)| {
            let lat = TorusLattice::new(d, l).unwrap();
            let n = lat.sites();
            (Just(lat), 0..n, 0..n, 0..n)
        })
    }

    proptest! {
        #[test]
        fn displacement_matches_coordinates((lat, x, y, _z) in lattice_and_pair()) {
            let rep = lat.representative(&lat.coord(x), &lat.coord(y)).unwrap();
            prop_assert_eq!(lat.displacement(x, y), lat.index(&rep).unwrap());
            prop_assert_eq!(lat.distance(x, y), linf(&rep));
        }

        #[test]
        fn distance_is_a_metric((lat, x, y, z) in lattice_and_pair()) {
            prop_assert_eq!(lat.distance(x, y), lat.distance(y, x));
            prop_assert!(lat.distance(x, z) <= lat.distance(x, y) + lat.distance(y, z));
            prop_assert!(2 * lat.distance(x, y) <= lat.side() as u64);
        }

        #[test]
        fn representatives_cancel((lat, x, y, _z) in lattice_and_pair()) {
            let a = lat.representative(&lat.coord(x), &lat.coord(y)).unwrap();
            let b = lat.representative(&lat.coord(y), &lat.coord(x)).unwrap();
            for (p, q) in a.iter().zip(&b) {
                prop_assert_eq!(lat.wrap(p + q), 0);
            }
        }
    }
}
