mod common;

use std::sync::Arc;

use num_complex::Complex64;
use rbm_core::propagators::PropagatorSet;
use rbm_core::{build_profile, mean_field_profile, ShapeFunction, TorusLattice};

#[test]
fn fft_propagators_match_dense_inverse() {
    let cases = [(1, 48, 3.0, "gaussian"), (2, 8, 2.0, "compact-bump"), (3, 4, 1.0, "gaussian")];
    for &(d, l, w, psi) in &cases {
        let prof = Arc::new(build_profile(&ShapeFunction::by_name(psi).unwrap(), w, TorusLattice::new(d, l).unwrap()).unwrap());
        for z in [Complex64::new(0.3, 0.05), Complex64::new(-1.2, 0.4)] {
            let props = PropagatorSet::new(&prof, z).unwrap();
            let dense = common::dense_propagators(&prof, props.m(), z.im);
            assert!(common::max_gap(&dense.theta_circ, |x, y| props.theta_circ(x, y).into()) < 1e-9);
            assert!(common::max_gap(&dense.theta, |x, y| props.theta(x, y).into()) < 1e-9);
            assert!(common::max_gap(&dense.s_plus, |x, y| props.s_plus(x, y)) < 1e-9);
            assert!(common::max_gap(&dense.s_minus, |x, y| props.s_minus(x, y)) < 1e-9);
        }
    }
}

#[test]
fn mean_field_propagators_are_rank_one() {
    // S = J/N, so S° = 0 and S+ = m^2 (1 - m^2)^{-1} J/N
    let prof = Arc::new(mean_field_profile(TorusLattice::new(1, 20).unwrap()));
    let z = Complex64::new(0.1, 0.2);
    let props = PropagatorSet::new(&prof, z).unwrap();
    let m = props.m();
    let expect = m * m / (1.0 - m * m) / 20.0;
    for x in 0..20 {
        assert!(props.theta_circ(0, x).abs() < 1e-14);
        assert!((props.s_plus(0, x) - expect).norm() < 1e-12);
    }
}
