//! Translation-invariant banded variance profiles `s_xy = f(x - y)` and their
//! Fourier symbols.
//!
//! The kernel is synthesized from a shape function `psi` on the torus
//! frequencies `2 pi k / L`, so the variance matrix is circulant and its
//! eigenvalues are the symbol values `lambda_k`.

use std::f64::consts::PI;
use std::fmt;
use std::io::Write;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fourier;
use crate::lattice::TorusLattice;

/// Tolerance below which negative kernel entries are treated as round-off.
pub const POSITIVITY_TOLERANCE: f64 = 1e-10;
const IMAGINARY_TOLERANCE: f64 = 1e-12;

type ShapeFn = dyn Fn(&[f64]) -> f64 + Send + Sync;

/// Symmetric Fourier-side shape `psi` with `psi(0) = 1` and `|psi| <= 1`.
#[derive(Clone)]
pub struct ShapeFunction {
    name: String,
    eval: Arc<ShapeFn>,
}

impl fmt::Debug for ShapeFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ShapeFunction").field("name", &self.name).finish()
    }
}

impl ShapeFunction {
    pub fn new(name: impl Into<String>, eval: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        ShapeFunction {
            name: name.into(),
            eval: Arc::new(eval),
        }
    }

    /// `psi(p) = exp(-|p|^2 / 2)`.
    pub fn gaussian() -> Self {
        Self::new("gaussian", |p| {
            let r2: f64 = p.iter().map(|v| v * v).sum();
            (-0.5 * r2).exp()
        })
    }

    /// Smooth bump supported on `|p| < 2`: `psi(p) = exp(1 - 1/(1 - |p|^2/4))`.
    pub fn compact_bump() -> Self {
        Self::new("compact-bump", |p| {
            let u = p.iter().map(|v| v * v).sum::<f64>() / 4.0;
            if u >= 1.0 {
                0.0
            } else {
                (1.0 - 1.0 / (1.0 - u)).exp()
            }
        })
    }

    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "gaussian" => Ok(Self::gaussian()),
            "compact-bump" | "bump" => Ok(Self::compact_bump()),
            other => Err(Error::Parameter(format!(
                "unknown shape function '{other}' (known: gaussian, compact-bump)"
            ))),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn eval(&self, p: &[f64]) -> f64 {
        (self.eval)(p)
    }
}

/// Doubly stochastic symmetric circulant variance matrix on `Z_L^d`.
#[derive(Debug, Clone)]
pub struct VarianceProfile {
    lattice: TorusLattice,
    width: f64,
    kernel: Vec<f64>,
    symbol: Vec<f64>,
    normalization: f64,
    id: String,
}

impl VarianceProfile {
    /// Wraps an explicit kernel. The kernel must be symmetric and
    /// nonnegative; no normalization is imposed.
    pub fn from_kernel(lattice: TorusLattice, width: f64, kernel: Vec<f64>, id: impl Into<String>) -> Result<Self> {
        if kernel.len() != lattice.sites() {
            return Err(Error::Parameter(format!(
                "kernel has {} entries, lattice has {} sites",
                kernel.len(),
                lattice.sites()
            )));
        }
        if let Some((index, &value)) = kernel.iter().enumerate().find(|(_, v)| !(**v >= 0.0)) {
            return Err(Error::ProfilePositivity { index, value });
        }
        for x in 0..lattice.sites() {
            let mx = lattice.negate(x);
            if (kernel[x] - kernel[mx]).abs() > 1e-14 * kernel[x].abs().max(1.0) {
                return Err(Error::Parameter(format!("kernel is not symmetric at site {x}")));
            }
        }
        let symbol = real_symbol(&lattice, &kernel)?;
        Ok(VarianceProfile {
            lattice,
            width,
            kernel,
            symbol,
            normalization: 1.0,
            id: id.into(),
        })
    }

    pub fn lattice(&self) -> &TorusLattice {
        &self.lattice
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    /// `f(x)` indexed by lattice site of the displacement `x`.
    pub fn kernel(&self) -> &[f64] {
        &self.kernel
    }

    /// Eigenvalue `lambda_k` of `S`, indexed by lattice site of `k`.
    pub fn symbol(&self) -> &[f64] {
        &self.symbol
    }

    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    /// Matrix entry `s_xy` for site indices.
    #[inline]
    pub fn s(&self, x: usize, y: usize) -> f64 {
        self.kernel[self.lattice.displacement(x, y)]
    }

    /// `max_y sum_{x : ||x - y||_L >= W^{1+tau}} s_xy`.
    pub fn band_truncation_mass(&self, tau: f64) -> f64 {
        let cutoff = self.width.powf(1.0 + tau);
        // translation invariance: every row carries the same mass
        self.kernel
            .iter()
            .enumerate()
            .filter(|(x, _)| self.lattice.norm(*x) as f64 >= cutoff)
            .map(|(_, v)| v)
            .sum()
    }

    /// `1 - max_{k != 0} lambda_k`.
    pub fn spectral_gap(&self) -> f64 {
        let origin = self.lattice.origin();
        let top = self
            .symbol
            .iter()
            .enumerate()
            .filter(|(k, _)| *k != origin)
            .map(|(_, v)| *v)
            .fold(f64::NEG_INFINITY, f64::max);
        if top.is_finite() {
            1.0 - top
        } else {
            1.0
        }
    }

    pub fn write_kernel_csv<W: Write>(&self, out: W) -> Result<()> {
        write_site_csv(&self.lattice, &self.kernel, "f", out)
    }

    pub fn write_symbol_csv<W: Write>(&self, out: W) -> Result<()> {
        write_site_csv(&self.lattice, &self.symbol, "lambda", out)
    }
}

fn write_site_csv<W: Write>(lat: &TorusLattice, values: &[f64], name: &str, mut out: W) -> Result<()> {
    let header: Vec<String> = (1..=lat.dim()).map(|i| format!("x{i}")).collect();
    writeln!(out, "{},{}", header.join(","), name)?;
    for (i, v) in values.iter().enumerate() {
        let coords: Vec<String> = lat.coord(i).iter().map(|c| c.to_string()).collect();
        writeln!(out, "{},{:e}", coords.join(","), v)?;
    }
    Ok(())
}

fn real_symbol(lat: &TorusLattice, kernel: &[f64]) -> Result<Vec<f64>> {
    let symbol = fourier::analyze_real(lat, kernel);
    let scale = kernel.iter().map(|v| v.abs()).sum::<f64>().max(1.0);
    if let Some(bad) = symbol.iter().find(|c| c.im.abs() > IMAGINARY_TOLERANCE * scale) {
        return Err(Error::Numeric(format!(
            "symbol of a symmetric kernel has imaginary part {:e}",
            bad.im
        )));
    }
    Ok(symbol.iter().map(|c| c.re).collect())
}

/// Builds `f_{W,L}(x) = Z^{-1} N^{-1} sum_k psi(2 pi W k / L) e^{2 pi i k.x / L}`.
pub fn build_profile(psi: &ShapeFunction, width: f64, lattice: TorusLattice) -> Result<VarianceProfile> {
    if !(width >= 1.0) || !width.is_finite() {
        return Err(Error::Parameter(format!("band width must be >= 1, got {width}")));
    }
    if lattice.side() as f64 <= 2.0 * width {
        log::warn!(
            "L = {} does not exceed 2W = {}; the profile is not banded at this size",
            lattice.side(),
            2.0 * width
        );
    }
    let scale = 2.0 * PI * width / lattice.side() as f64;
    let raw_symbol: Vec<Complex64> = (0..lattice.sites())
        .map(|k| {
            let p: Vec<f64> = lattice.coord(k).iter().map(|&c| scale * c as f64).collect();
            Complex64::new(psi.eval(&p), 0.0)
        })
        .collect();
    let raw = fourier::synthesize(&lattice, &raw_symbol);
    if let Some(bad) = raw.iter().find(|c| c.im.abs() > IMAGINARY_TOLERANCE) {
        return Err(Error::Numeric(format!(
            "shape '{}' is not symmetric: synthesized kernel has imaginary part {:e}",
            psi.name(),
            bad.im
        )));
    }
    let z: f64 = raw.iter().map(|c| c.re).sum();
    if !(z > 0.0) {
        return Err(Error::Parameter(format!(
            "normalization constant Z = {z} is not positive for shape '{}'",
            psi.name()
        )));
    }
    // average with the reflection so the kernel is symmetric to the last bit
    let mut kernel: Vec<f64> = (0..lattice.sites())
        .map(|x| 0.5 * (raw[x].re + raw[lattice.negate(x)].re) / z)
        .collect();
    if let Some((index, &value)) = kernel
        .iter()
        .enumerate()
        .find(|(_, v)| **v < -POSITIVITY_TOLERANCE)
    {
        return Err(Error::ProfilePositivity { index, value });
    }
    let clipped = kernel.iter().filter(|v| **v < 0.0).count();
    if clipped > 0 {
        log::debug!("clipping {clipped} round-off negative kernel entries to zero");
        kernel.iter_mut().for_each(|v| *v = v.max(0.0));
        let total: f64 = kernel.iter().sum();
        kernel.iter_mut().for_each(|v| *v /= total);
    }
    let symbol = real_symbol(&lattice, &kernel)?;
    Ok(VarianceProfile {
        lattice,
        width,
        kernel,
        symbol,
        normalization: z,
        id: format!("{}:d={}:L={}:W={}", psi.name(), lattice.dim(), lattice.side(), width),
    })
}

/// `S = J / N`, the Gaussian unitary ensemble variance pattern.
pub fn mean_field_profile(lattice: TorusLattice) -> VarianceProfile {
    let n = lattice.sites();
    let mut symbol = vec![0.0; n];
    symbol[lattice.origin()] = 1.0;
    VarianceProfile {
        lattice,
        width: lattice.side() as f64,
        kernel: vec![1.0 / n as f64; n],
        symbol,
        normalization: 1.0,
        id: format!("mean-field:d={}:L={}", lattice.dim(), lattice.side()),
    }
}
