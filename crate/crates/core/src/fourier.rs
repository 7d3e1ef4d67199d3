//! Multidimensional DFT over the torus, used to synthesize translation
//! invariant kernels from their symbols. Inputs and outputs are indexed by
//! lattice site (canonical layout); the permutation to `c mod L` order needed
//! by the FFT happens here.

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::lattice::TorusLattice;

fn to_fft_layout<T: Copy + Default>(lat: &TorusLattice, data: &[T]) -> Vec<T> {
    let mut out = vec![T::default(); data.len()];
    for (i, v) in data.iter().enumerate() {
        out[lat.fft_position(i)] = *v;
    }
    out
}

fn from_fft_layout<T: Copy + Default>(lat: &TorusLattice, data: &[T]) -> Vec<T> {
    (0..data.len()).map(|i| data[lat.fft_position(i)]).collect()
}

fn transform(lat: &TorusLattice, data: &mut [Complex64], inverse: bool) {
    let l = lat.side();
    let n = lat.sites();
    let mut planner = FftPlanner::<f64>::new();
    let fft = if inverse {
        planner.plan_fft_inverse(l)
    } else {
        planner.plan_fft_forward(l)
    };
    let mut line = vec![Complex64::default(); l];
    for axis in 0..lat.dim() {
        let stride = l.pow((lat.dim() - 1 - axis) as u32);
        for start in 0..n {
            // visit each line once, from its first element
            if !(start / stride).is_multiple_of(l) {
                continue;
            }
            for (j, slot) in line.iter_mut().enumerate() {
                *slot = data[start + j * stride];
            }
            fft.process(&mut line);
            for (j, v) in line.iter().enumerate() {
                data[start + j * stride] = *v;
            }
        }
    }
}

/// `kernel(x) = N^{-1} sum_k symbol(k) exp(2 pi i k.x / L)`.
pub fn synthesize(lat: &TorusLattice, symbol: &[Complex64]) -> Vec<Complex64> {
    let mut buf = to_fft_layout(lat, symbol);
    transform(lat, &mut buf, true);
    let scale = 1.0 / lat.sites() as f64;
    buf.iter_mut().for_each(|v| *v *= scale);
    from_fft_layout(lat, &buf)
}

/// `symbol(k) = sum_x kernel(x) exp(-2 pi i k.x / L)`.
pub fn analyze(lat: &TorusLattice, kernel: &[Complex64]) -> Vec<Complex64> {
    let mut buf = to_fft_layout(lat, kernel);
    transform(lat, &mut buf, false);
    from_fft_layout(lat, &buf)
}

pub fn analyze_real(lat: &TorusLattice, kernel: &[f64]) -> Vec<Complex64> {
    let c: Vec<Complex64> = kernel.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    analyze(lat, &c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn naive_synthesis(lat: &TorusLattice, symbol: &[Complex64]) -> Vec<Complex64> {
        let l = lat.side() as f64;
        (0..lat.sites())
            .map(|x| {
                let cx = lat.coord(x);
                let mut acc = Complex64::default();
                for (k, s) in symbol.iter().enumerate() {
                    let ck = lat.coord(k);
                    let phase: f64 = cx.iter().zip(&ck).map(|(a, b)| (a * b) as f64).sum();
                    acc += s * Complex64::from_polar(1.0, 2.0 * PI * phase / l);
                }
                acc / lat.sites() as f64
            })
            .collect()
    }

    #[test]
    fn synthesis_matches_direct_sum() {
        for (d, l) in [(1, 7), (2, 4), (3, 3)] {
            let lat = TorusLattice::new(d, l).unwrap();
            let symbol: Vec<Complex64> = (0..lat.sites())
                .map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()))
                .collect();
            let fast = synthesize(&lat, &symbol);
            let slow = naive_synthesis(&lat, &symbol);
            for (a, b) in fast.iter().zip(&slow) {
                assert!((a - b).norm() < 1e-12);
            }
            let back = analyze(&lat, &fast);
            for (a, b) in back.iter().zip(&symbol) {
                assert!((a - b).norm() < 1e-12);
            }
        }
    }
}
