//! Dense-matrix oracles shared by the integration suites.
#![allow(dead_code)]

use faer::linalg::solvers::DenseSolveCore;
use faer::{c64, Mat};
use num_complex::Complex64;
use rbm_core::VarianceProfile;

/// Dense propagators of one profile at one spectral parameter.
pub struct DensePropagators {
    pub theta_circ: Mat<c64>,
    pub theta: Mat<c64>,
    pub s_plus: Mat<c64>,
    pub s_minus: Mat<c64>,
}

/// `X (1 - X)^{-1}` by LU inversion.
fn neumann(x: &Mat<c64>) -> Mat<c64> {
    let n = x.nrows();
    let shifted = Mat::from_fn(n, n, |i, j| if i == j { c64::new(1.0, 0.0) } else { c64::new(0.0, 0.0) } - x[(i, j)]);
    x * shifted.partial_piv_lu().inverse()
}

/// Builds `S` entry by entry and inverts `1 - |m|^2 S°` and `1 - m^2 S` directly.
pub fn dense_propagators(profile: &VarianceProfile, m: Complex64, eta: f64) -> DensePropagators {
    let n = profile.lattice().sites();
    let nf = n as f64;
    let a = m.norm_sqr();
    let circ = Mat::from_fn(n, n, |x, y| c64::new(a * (profile.s(x, y) - 1.0 / nf), 0.0));
    let plus = Mat::from_fn(n, n, |x, y| m * m * profile.s(x, y));
    let minus = Mat::from_fn(n, n, |x, y| (m * m).conj() * profile.s(x, y));
    let theta_circ = neumann(&circ);
    let zero = m.im / (nf * eta);
    let theta = Mat::from_fn(n, n, |x, y| theta_circ[(x, y)] + zero);
    DensePropagators { theta_circ, theta, s_plus: neumann(&plus), s_minus: neumann(&minus) }
}

pub fn max_gap(dense: &Mat<c64>, entry: impl Fn(usize, usize) -> Complex64) -> f64 {
    let n = dense.nrows();
    let mut worst = 0.0f64;
    for x in 0..n {
        for y in 0..n {
            worst = worst.max((dense[(x, y)] - entry(x, y)).norm());
        }
    }
    worst
}
