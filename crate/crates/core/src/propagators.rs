//! Deterministic propagators built from the symbol of `S`.
//!
//! All kernels are one-point functions `K(0, x)` indexed by lattice site;
//! matrix entries are `K(x, y) = kernel[[x - y]_L]`.

use std::io::Write;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fourier;
use crate::lattice::TorusLattice;
use crate::profile::VarianceProfile;
use crate::spectral::semicircle_m;

fn synthesize_symmetric(lat: &TorusLattice, symbol: &[Complex64]) -> Vec<Complex64> {
    let raw = fourier::synthesize(lat, symbol);
    (0..lat.sites())
        .map(|x| 0.5 * (raw[x] + raw[lat.negate(x)]))
        .collect()
}

fn real_kernel(lat: &TorusLattice, symbol: &[Complex64]) -> Result<Vec<f64>> {
    let k = synthesize_symmetric(lat, symbol);
    let scale = k.iter().map(|v| v.norm()).fold(0.0, f64::max).max(1e-300);
    if let Some(v) = k.iter().find(|v| v.im.abs() > 1e-10 * scale) {
        return Err(Error::Numeric(format!("real propagator has imaginary part {:e}", v.im)));
    }
    Ok(k.iter().map(|v| v.re).collect())
}

/// `Theta°_{0x} = N^{-1} sum_{k != 0} |m|^2 lambda_k / (1 - |m|^2 lambda_k) e^{2 pi i k.x/L}`.
pub fn theta_circ(profile: &VarianceProfile, z: Complex64) -> Result<Vec<f64>> {
    let m2 = semicircle_m(z)?.norm_sqr();
    let lat = profile.lattice();
    let origin = lat.origin();
    let symbol: Vec<Complex64> = profile
        .symbol()
        .iter()
        .enumerate()
        .map(|(k, &lam)| {
            if k == origin {
                Complex64::default()
            } else {
                Complex64::new(m2 * lam / (1.0 - m2 * lam), 0.0)
            }
        })
        .collect();
    real_kernel(lat, &symbol)
}

/// `Theta = |m|^2 S / (1 - |m|^2 S)`, equal to `Theta° + Im m / (N eta)`.
pub fn theta_full(profile: &VarianceProfile, z: Complex64) -> Result<Vec<f64>> {
    let m = semicircle_m(z)?;
    let shift = m.im / (profile.lattice().sites() as f64 * z.im);
    Ok(theta_circ(profile, z)?.into_iter().map(|v| v + shift).collect())
}

/// `S^+ = m^2 S / (1 - m^2 S)` and `S^- = conj(S^+)`.
pub fn s_pm(profile: &VarianceProfile, z: Complex64) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    let m = semicircle_m(z)?;
    let m2 = m * m;
    let symbol: Vec<Complex64> = profile
        .symbol()
        .iter()
        .map(|&lam| m2 * lam / (1.0 - m2 * lam))
        .collect();
    let plus = synthesize_symmetric(profile.lattice(), &symbol);
    let minus = plus.iter().map(|v| v.conj()).collect();
    Ok((plus, minus))
}

/// `B_xy = W^{-2} <x - y>^{2 - d}` from the torus distance.
pub fn b_value(distance: u64, width: f64, dim: usize) -> f64 {
    (distance as f64 + width).powf(2.0 - dim as f64) / (width * width)
}

pub fn b_profile(lat: &TorusLattice, width: f64, x: &[i64], y: &[i64]) -> Result<f64> {
    if !(width >= 1.0) {
        return Err(Error::Parameter(format!("band width must be >= 1, got {width}")));
    }
    Ok(b_value(lat.torus_distance(x, y)?, width, lat.dim()))
}

/// The propagators at one spectral parameter.
#[derive(Debug, Clone)]
pub struct PropagatorSet {
    profile: Arc<VarianceProfile>,
    z: Complex64,
    m: Complex64,
    theta_circ: Vec<f64>,
    theta: Vec<f64>,
    s_plus: Vec<Complex64>,
    s_minus: Vec<Complex64>,
}

impl PropagatorSet {
    pub fn new(profile: &Arc<VarianceProfile>, z: Complex64) -> Result<Self> {
        let m = semicircle_m(z)?;
        let theta_circ = theta_circ(profile, z)?;
        let shift = m.im / (profile.lattice().sites() as f64 * z.im);
        let theta = theta_circ.iter().map(|v| v + shift).collect();
        let (s_plus, s_minus) = s_pm(profile, z)?;
        Ok(PropagatorSet {
            profile: Arc::clone(profile),
            z,
            m,
            theta_circ,
            theta,
            s_plus,
            s_minus,
        })
    }

    pub fn profile(&self) -> &Arc<VarianceProfile> {
        &self.profile
    }

    pub fn z(&self) -> Complex64 {
        self.z
    }

    pub fn m(&self) -> Complex64 {
        self.m
    }

    pub fn theta_circ_kernel(&self) -> &[f64] {
        &self.theta_circ
    }

    pub fn theta_kernel(&self) -> &[f64] {
        &self.theta
    }

    pub fn s_plus_kernel(&self) -> &[Complex64] {
        &self.s_plus
    }

    pub fn s_minus_kernel(&self) -> &[Complex64] {
        &self.s_minus
    }

    #[inline]
    pub fn theta_circ(&self, x: usize, y: usize) -> f64 {
        self.theta_circ[self.profile.lattice().displacement(x, y)]
    }

    #[inline]
    pub fn theta(&self, x: usize, y: usize) -> f64 {
        self.theta[self.profile.lattice().displacement(x, y)]
    }

    #[inline]
    pub fn s_plus(&self, x: usize, y: usize) -> Complex64 {
        self.s_plus[self.profile.lattice().displacement(x, y)]
    }

    #[inline]
    pub fn s_minus(&self, x: usize, y: usize) -> Complex64 {
        self.s_minus[self.profile.lattice().displacement(x, y)]
    }
}

/// One distance shell of the `|Theta°| / B` comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct ShellBound {
    pub distance: u64,
    pub max_abs_theta: f64,
    pub b: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone)]
pub struct ThetaBoundReport {
    pub max_ratio: f64,
    /// `W^tau`, the slack allowed by the bound.
    pub slack: f64,
    pub shells: Vec<ShellBound>,
}

impl ThetaBoundReport {
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "distance,abs_theta_circ,b,ratio")?;
        for s in &self.shells {
            writeln!(out, "{},{:e},{:e},{:e}", s.distance, s.max_abs_theta, s.b, s.ratio)?;
        }
        Ok(())
    }
}

/// Compares `max_{|x| = r} |Theta°_{0x}|` with `B_{0x}` shell by shell.
pub fn theta_bound_report(profile: &VarianceProfile, z: Complex64, tau: f64) -> Result<ThetaBoundReport> {
    if z.re.abs() > 1.9 {
        return Err(Error::Range(format!("|E| = {} exceeds the bulk window 1.9", z.re.abs())));
    }
    let kernel = theta_circ(profile, z)?;
    let lat = profile.lattice();
    let max_dist = (lat.side() / 2) as u64;
    let mut shells: Vec<ShellBound> = (0..=max_dist)
        .map(|r| ShellBound {
            distance: r,
            max_abs_theta: 0.0,
            b: b_value(r, profile.width(), lat.dim()),
            ratio: 0.0,
        })
        .collect();
    for (x, v) in kernel.iter().enumerate() {
        let shell = &mut shells[lat.norm(x) as usize];
        shell.max_abs_theta = shell.max_abs_theta.max(v.abs());
    }
    for s in &mut shells {
        s.ratio = s.max_abs_theta / s.b;
    }
    let max_ratio = shells.iter().map(|s| s.ratio).fold(0.0, f64::max);
    Ok(ThetaBoundReport {
        max_ratio,
        slack: profile.width().powf(tau),
        shells,
    })
}
