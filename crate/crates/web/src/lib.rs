//! WebAssembly bindings for the static demo page in `www/`.
//!
//! Every export returns plain numeric arrays; the page does the drawing.

use std::sync::Arc;

use num_complex::Complex64;
use rbm_core::propagators::PropagatorSet;
use rbm_core::sampler::sample_band;
use rbm_core::spectral::eigenvalues;
use rbm_core::stats::semicircle_density;
use rbm_core::{build_profile, ShapeFunction, TorusLattice, VarianceProfile};
use wasm_bindgen::prelude::*;

/// Largest matrix the spectrum demo will diagonalize in the browser.
pub const MAX_DEMO_SITES: usize = 1024;

fn profile(dim: usize, size: usize, band: f64, psi: &str) -> Result<VarianceProfile, JsError> {
    let lat = TorusLattice::new(dim, size).map_err(js)?;
    build_profile(&ShapeFunction::by_name(psi).map_err(js)?, band, lat).map_err(js)
}

fn js(e: rbm_core::Error) -> JsError {
    JsError::new(&e.to_string())
}

/// Coordinates `-L/2 + 1, ..., L/2` along the first axis.
#[wasm_bindgen]
pub fn axis_coordinates(size: usize) -> Vec<f64> {
    let half = (size / 2) as i64;
    (half + 1 - size as i64..=half).map(|x| x as f64).collect()
}

fn axis_slice(lat: &TorusLattice, values: impl Fn(usize) -> f64) -> Result<Vec<f64>, JsError> {
    let half = (lat.side() / 2) as i64;
    (half + 1 - lat.side() as i64..=half)
        .map(|x| {
            let mut coord = vec![0i64; lat.dim()];
            coord[0] = x;
            lat.index(&coord).map(&values).map_err(js)
        })
        .collect()
}

/// Variance kernel `s_0x` along the first axis.
#[wasm_bindgen]
pub fn profile_slice(dim: usize, size: usize, band: f64, psi: &str) -> Result<Vec<f64>, JsError> {
    let prof = profile(dim, size, band, psi)?;
    axis_slice(prof.lattice(), |x| prof.kernel()[x])
}

/// `Theta°_0x` along the first axis at `z = energy + i eta`.
#[wasm_bindgen]
pub fn propagator_slice(dim: usize, size: usize, band: f64, psi: &str, energy: f64, eta: f64) -> Result<Vec<f64>, JsError> {
    let prof = Arc::new(profile(dim, size, band, psi)?);
    let props = PropagatorSet::new(&prof, Complex64::new(energy, eta)).map_err(js)?;
    axis_slice(prof.lattice(), |x| props.theta_circ_kernel()[x])
}

/// Eigenvalue histogram of one band matrix on `[-2.5, 2.5]` as densities,
/// followed by the semicircle density at the same bin centres: `2 * bins`
/// values in total.
#[wasm_bindgen]
pub fn spectrum_histogram(dim: usize, size: usize, band: f64, psi: &str, seed: u64, bins: usize) -> Result<Vec<f64>, JsError> {
    let prof = Arc::new(profile(dim, size, band, psi)?);
    let n = prof.lattice().sites();
    if n > MAX_DEMO_SITES {
        return Err(JsError::new(&format!("{n} sites is too many for the browser demo (max {MAX_DEMO_SITES})")));
    }
    if bins == 0 {
        return Err(JsError::new("bins must be positive"));
    }
    let ev = eigenvalues(&sample_band(&prof, seed, 0)).map_err(js)?;
    let (lo, hi) = (-2.5, 2.5);
    let width = (hi - lo) / bins as f64;
    let mut out = vec![0.0; 2 * bins];
    for &e in &ev {
        let b = ((e - lo) / width).floor();
        if b >= 0.0 && (b as usize) < bins {
            out[b as usize] += 1.0 / (n as f64 * width);
        }
    }
    for b in 0..bins {
        out[bins + b] = semicircle_density(lo + (b as f64 + 0.5) * width);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slices_are_centred_and_normalized() {
        let s = profile_slice(1, 32, 4.0, "gaussian").unwrap();
        assert_eq!(s.len(), 32);
        assert!((s.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let peak = s.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(s[15], peak);
        assert_eq!(axis_coordinates(32)[15], 0.0);
        let t = propagator_slice(2, 8, 2.0, "gaussian", 0.1, 0.3).unwrap();
        assert_eq!(t.len(), 8);
    }

    #[test]
    fn histogram_is_a_density() {
        let h = spectrum_histogram(1, 200, 8.0, "gaussian", 1, 50).unwrap();
        let mass: f64 = h[..50].iter().sum::<f64>() * 0.1;
        let reference: f64 = h[50..].iter().sum::<f64>() * 0.1;
        assert!((mass - 1.0).abs() < 1e-9, "{mass}");
        assert!((reference - 1.0).abs() < 0.02, "{reference}");
    }
}
