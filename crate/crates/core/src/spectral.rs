//! Resolvents, eigendecompositions and the exact resolvent identities.

use std::sync::Arc;

use faer::linalg::solvers::DenseSolveCore;
use faer::{c64, Mat, Side};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::profile::VarianceProfile;
use crate::propagators::PropagatorSet;
use crate::sampler::{sample_band, HermitianSample, Provenance};

/// Stieltjes transform of the semicircle law, the root of `m^2 + z m + 1 = 0` with `Im m > 0`.
pub fn semicircle_m(z: Complex64) -> Result<Complex64> {
    if !(z.im > 0.0) {
        return Err(Error::HalfPlane(z.im));
    }
    let root = (z * z - 4.0).sqrt();
    let m = (-z + root) / 2.0;
    let m = if m.im > 0.0 { m } else { (-z - root) / 2.0 };
    // one Newton step cleans up cancellation near the real axis
    let m = m - (m * m + z * m + 1.0) / (2.0 * m + z);
    Ok(m)
}

const RESIDUAL_TOL: f64 = 1e-10;
const RESIDUAL_COLUMNS: usize = 8;

#[derive(Debug, Clone)]
pub struct ResolventContext {
    z: Complex64,
    m: Complex64,
    g: Mat<c64>,
    profile: Arc<VarianceProfile>,
    provenance: Provenance,
}

pub(crate) fn max_abs(a: &Mat<c64>) -> f64 {
    let mut best = 0.0f64;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            best = best.max(a[(i, j)].norm());
        }
    }
    best
}

/// Max-norm of `(H - z) G - I` restricted to the given columns.
pub fn resolvent_residual(h: &Mat<c64>, z: Complex64, g: &Mat<c64>, columns: &[usize]) -> f64 {
    let n = h.nrows();
    let mut worst = 0.0f64;
    for &j in columns {
        for i in 0..n {
            let mut acc = -z * g[(i, j)];
            for k in 0..n {
                acc += h[(i, k)] * g[(k, j)];
            }
            if i == j {
                acc -= 1.0;
            }
            worst = worst.max(acc.norm());
        }
    }
    worst
}

fn probe_columns(n: usize) -> Vec<usize> {
    let k = RESIDUAL_COLUMNS.min(n);
    let mut cols: Vec<usize> = (0..k).map(|i| i * n / k).collect();
    cols.dedup();
    cols
}

/// `G(z) = (H - z)^{-1}` by a dense LU solve.
pub fn resolvent(h: &HermitianSample, z: Complex64) -> Result<ResolventContext> {
    let m = semicircle_m(z)?;
    let a = h.matrix();
    let n = a.nrows();
    let shifted = Mat::from_fn(n, n, |i, j| if i == j { a[(i, j)] - z } else { a[(i, j)] });
    let g = shifted.partial_piv_lu().inverse();
    let gmax = max_abs(&g);
    if !gmax.is_finite() {
        return Err(Error::Numeric(format!("non-finite resolvent for {:?}", h.provenance())));
    }
    let res = resolvent_residual(a, z, &g, &probe_columns(n));
    if res > RESIDUAL_TOL * (1.0 + gmax) {
        return Err(Error::Numeric(format!(
            "resolvent residual {res:e} exceeds tolerance for {:?}",
            h.provenance()
        )));
    }
    Ok(ResolventContext {
        z,
        m,
        g,
        profile: Arc::clone(h.profile()),
        provenance: h.provenance().clone(),
    })
}

impl ResolventContext {
    /// Wraps an externally computed resolvent.
    pub fn from_parts(
        profile: Arc<VarianceProfile>,
        z: Complex64,
        g: Mat<c64>,
        provenance: Provenance,
    ) -> Result<Self> {
        let n = profile.lattice().sites();
        if g.nrows() != n || g.ncols() != n {
            return Err(Error::Parameter(format!(
                "resolvent is {}x{}, lattice has {n} sites",
                g.nrows(),
                g.ncols()
            )));
        }
        Ok(ResolventContext { z, m: semicircle_m(z)?, g, profile, provenance })
    }

    pub fn z(&self) -> Complex64 {
        self.z
    }

    pub fn energy(&self) -> f64 {
        self.z.re
    }

    pub fn eta(&self) -> f64 {
        self.z.im
    }

    pub fn m(&self) -> Complex64 {
        self.m
    }

    pub fn g(&self) -> &Mat<c64> {
        &self.g
    }

    #[inline]
    pub fn entry(&self, x: usize, y: usize) -> Complex64 {
        self.g[(x, y)]
    }

    pub fn profile(&self) -> &Arc<VarianceProfile> {
        &self.profile
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn dim(&self) -> usize {
        self.g.nrows()
    }

    pub fn max_norm(&self) -> f64 {
        max_abs(&self.g)
    }
}

/// Max deviation from the Ward identity over all pairs `(y, y')`.
pub fn ward_residual(ctx: &ResolventContext) -> f64 {
    let g = ctx.g();
    let gram = g.adjoint() * g;
    let n = ctx.dim();
    let denom = Complex64::new(0.0, 2.0 * ctx.eta());
    let mut worst = 0.0f64;
    for y in 0..n {
        for yp in 0..n {
            let rhs = (g[(yp, y)] - g[(y, yp)].conj()) / denom;
            worst = worst.max((gram[(yp, y)] - rhs).norm());
        }
    }
    worst
}

/// `T_{a,b1b2} = |m|^2 sum_x s_{ax} G_{x b1} conj(G_{x b2})`.
pub fn t_three(ctx: &ResolventContext, a: usize, b1: usize, b2: usize) -> Complex64 {
    let prof = ctx.profile();
    let g = ctx.g();
    let sum: Complex64 = (0..ctx.dim())
        .map(|x| prof.s(a, x) * g[(x, b1)] * g[(x, b2)].conj())
        .sum();
    ctx.m().norm_sqr() * sum
}

/// Splits `T_{a,b1b2}` into the part orthogonal to the uniform mode and the zero mode.
pub fn zero_mode_split(ctx: &ResolventContext, a: usize, b1: usize, b2: usize) -> (Complex64, Complex64) {
    let zero = zero_mode(ctx, b1, b2);
    let n = ctx.dim() as f64;
    let prof = ctx.profile();
    let g = ctx.g();
    let sum: Complex64 = (0..ctx.dim())
        .map(|x| (prof.s(a, x) - 1.0 / n) * g[(x, b1)] * g[(x, b2)].conj())
        .sum();
    (ctx.m().norm_sqr() * sum, zero)
}

fn zero_mode(ctx: &ResolventContext, b1: usize, b2: usize) -> Complex64 {
    let g = ctx.g();
    let n = ctx.dim() as f64;
    ctx.m().norm_sqr() * (g[(b2, b1)] - g[(b1, b2)].conj()) / Complex64::new(0.0, 2.0 * n * ctx.eta())
}

/// The explicit terms of the second order T-expansion for one realization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecondOrderTerms {
    pub t: Complex64,
    pub leading: Complex64,
    pub zero_mode: Complex64,
    pub higher: Complex64,
}

impl SecondOrderTerms {
    pub fn residual(&self) -> Complex64 {
        self.t - (self.leading + self.zero_mode + self.higher)
    }
}

/// `A^{(>2)}_{x,b1b2}` for every `x`.
pub fn higher_order_vector(ctx: &ResolventContext, b1: usize, b2: usize) -> Vec<Complex64> {
    let g = ctx.g();
    let m = ctx.m();
    let prof = ctx.profile();
    let n = ctx.dim();
    let u: Vec<Complex64> = (0..n).map(|y| g[(y, b1)] * g[(y, b2)].conj()).collect();
    let dg: Vec<Complex64> = (0..n).map(|y| g[(y, y)] - m).collect();
    (0..n)
        .map(|x| {
            let mut r1 = Complex64::default();
            let mut r2 = Complex64::default();
            for y in 0..n {
                let s = prof.s(x, y);
                r1 += s * dg[y];
                r2 += s * u[y];
            }
            m * r1 * u[x] + m * dg[x].conj() * r2
        })
        .collect()
}

pub fn second_order_terms(
    ctx: &ResolventContext,
    props: &PropagatorSet,
    a: usize,
    b1: usize,
    b2: usize,
) -> SecondOrderTerms {
    let g = ctx.g();
    let m = ctx.m();
    let higher = higher_order_vector(ctx, b1, b2)
        .iter()
        .enumerate()
        .map(|(x, v)| props.theta_circ(a, x) * v)
        .sum();
    SecondOrderTerms {
        t: t_three(ctx, a, b1, b2),
        leading: m * props.theta_circ(a, b1) * g[(b1, b2)].conj(),
        zero_mode: zero_mode(ctx, b1, b2),
        higher,
    }
}

/// Sample mean of a complex quantity with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexEstimate {
    pub mean: Complex64,
    /// Standard error of the mean modulus, `sqrt(se_re^2 + se_im^2)`.
    pub stderr: f64,
    pub stderr_re: f64,
    pub stderr_im: f64,
    pub trials: usize,
}

impl ComplexEstimate {
    pub fn from_samples(samples: &[Complex64]) -> Self {
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<Complex64>() / n;
        let dof = (n - 1.0).max(1.0);
        let var_re = samples.iter().map(|v| (v.re - mean.re).powi(2)).sum::<f64>() / dof;
        let var_im = samples.iter().map(|v| (v.im - mean.im).powi(2)).sum::<f64>() / dof;
        ComplexEstimate {
            mean,
            stderr: ((var_re + var_im) / n).sqrt(),
            stderr_re: (var_re / n).sqrt(),
            stderr_im: (var_im / n).sqrt(),
            trials: samples.len(),
        }
    }

    /// Larger of the componentwise `|mean| / stderr` ratios.
    pub fn z_score(&self) -> f64 {
        fn ratio(mean: f64, se: f64) -> f64 {
            if se > 0.0 {
                mean.abs() / se
            } else if mean == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        }
        ratio(self.mean.re, self.stderr_re).max(ratio(self.mean.im, self.stderr_im))
    }
}

pub const MIN_RESIDUAL_TRIALS: usize = 100;

/// Monte Carlo estimate of the mean second order T-expansion residual.
pub fn second_order_residual(
    profile: &Arc<VarianceProfile>,
    z: Complex64,
    a: usize,
    b1: usize,
    b2: usize,
    trials: usize,
    seed: u64,
) -> Result<ComplexEstimate> {
    if trials < MIN_RESIDUAL_TRIALS {
        return Err(Error::InsufficientSamples { got: trials, min: MIN_RESIDUAL_TRIALS });
    }
    let n = profile.lattice().sites();
    if a >= n || b1 >= n || b2 >= n {
        return Err(Error::Parameter(format!("site index out of range for {n} sites")));
    }
    let props = PropagatorSet::new(profile, z)?;
    let samples = (0..trials as u64)
        .into_par_iter()
        .map(|trial| {
            let h = sample_band(profile, seed, trial);
            let ctx = resolvent(&h, z)?;
            Ok(second_order_terms(&ctx, &props, a, b1, b2).residual())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ComplexEstimate::from_samples(&samples))
}

#[derive(Debug, Clone)]
pub struct SpectralData {
    eigenvalues: Vec<f64>,
    eigenvectors: Mat<c64>,
}

impl SpectralData {
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Columns are the normalized eigenvectors.
    pub fn eigenvectors(&self) -> &Mat<c64> {
        &self.eigenvectors
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }
}

fn sorted_check(values: &[f64], h: &HermitianSample) -> Result<()> {
    if values.iter().any(|v| !v.is_finite()) || values.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::Numeric(format!("eigenvalues not finite and ascending for {:?}", h.provenance())));
    }
    Ok(())
}

pub fn eigensolve(h: &HermitianSample) -> Result<SpectralData> {
    let evd = h
        .matrix()
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Numeric(format!("eigendecomposition failed ({e:?}) for {:?}", h.provenance())))?;
    let s = evd.S().column_vector();
    let eigenvalues: Vec<f64> = (0..s.nrows()).map(|i| s[i].re).collect();
    sorted_check(&eigenvalues, h)?;
    Ok(SpectralData { eigenvalues, eigenvectors: evd.U().to_owned() })
}

/// Eigenvalues only, ascending.
pub fn eigenvalues(h: &HermitianSample) -> Result<Vec<f64>> {
    let values = h
        .matrix()
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Numeric(format!("eigenvalue solve failed ({e:?}) for {:?}", h.provenance())))?;
    sorted_check(&values, h)?;
    Ok(values)
}

/// `sum_a u_a u_a^* / (lambda_a - z)`.
pub fn resolvent_from_spectrum(spec: &SpectralData, z: Complex64) -> Result<Mat<c64>> {
    if !(z.im > 0.0) {
        return Err(Error::HalfPlane(z.im));
    }
    let u = spec.eigenvectors();
    let n = u.nrows();
    let scaled = Mat::from_fn(n, spec.len(), |i, a| u[(i, a)] / (spec.eigenvalues[a] - z));
    Ok(&scaled * u.adjoint())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::TorusLattice;
    use crate::profile::{build_profile, mean_field_profile, ShapeFunction};

    fn band(d: usize, l: usize, w: f64) -> Arc<VarianceProfile> {
        Arc::new(build_profile(&ShapeFunction::gaussian(), w, TorusLattice::new(d, l).unwrap()).unwrap())
    }

    fn from_dense(rows: &[&[f64]]) -> HermitianSample {
        let n = rows.len();
        let prof = Arc::new(mean_field_profile(TorusLattice::new(1, n).unwrap()));
        HermitianSample::from_matrix(prof, Mat::from_fn(n, n, |i, j| c64::new(rows[i][j], 0.0))).unwrap()
    }

    #[test]
    fn semicircle_examples() {
        let m = semicircle_m(Complex64::new(0.0, 1.0)).unwrap();
        assert!((m - Complex64::new(0.0, (5f64.sqrt() - 1.0) / 2.0)).norm() < 1e-14);
        let m = semicircle_m(Complex64::new(0.0, 1e-4)).unwrap();
        assert!((m - Complex64::new(0.0, 1.0)).norm() <= 1e-4);
        let z = Complex64::new(0.3, 0.1);
        let m = semicircle_m(z).unwrap();
        let m2 = m.norm_sqr();
        assert!((m2 / (1.0 - m2) - m.im / z.im).abs() < 1e-12);
        assert!(semicircle_m(Complex64::new(0.3, 0.0)).is_err());
        assert!(semicircle_m(Complex64::new(0.3, -1.0)).is_err());
    }

    #[test]
    fn semicircle_branch_outside_bulk() {
        for &(e, eta) in &[(3.0, 1e-3), (-3.0, 1e-3), (1.999, 1e-9), (-0.5, 1e-12), (10.0, 5.0)] {
            let z = Complex64::new(e, eta);
            let m = semicircle_m(z).unwrap();
            assert!(m.im > 0.0, "{z}");
            assert!((m * m + z * m + 1.0).norm() < 1e-12, "{z}");
        }
    }

    #[test]
    fn resolvent_closed_forms() {
        let z = Complex64::new(0.2, 0.7);
        let ctx = resolvent(&from_dense(&[&[0.5]]), z).unwrap();
        assert!((ctx.entry(0, 0) - 1.0 / (0.5 - z)).norm() < 1e-15);
        assert!(ward_residual(&ctx) < 1e-15);

        let ctx = resolvent(&from_dense(&[&[0.0; 4][..]; 4]), z).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let expect = if i == j { -1.0 / z } else { Complex64::default() };
                assert!((ctx.entry(i, j) - expect).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn random_band_resolvent_and_ward() {
        let prof = band(1, 32, 4.0);
        let h = sample_band(&prof, 5, 0);
        let z = Complex64::new(0.3, 0.1);
        let ctx = resolvent(&h, z).unwrap();
        let all: Vec<usize> = (0..32).collect();
        assert!(resolvent_residual(h.matrix(), z, ctx.g(), &all) <= 1e-10);
        assert!(ward_residual(&ctx) <= 1e-9);
        for y in 0..32 {
            let lhs: f64 = (0..32).map(|x| ctx.entry(x, y).norm_sqr()).sum();
            assert!((lhs - ctx.entry(y, y).im / z.im).abs() < 1e-9);
        }
    }

    #[test]
    fn t_three_against_triple_loop() {
        let prof = band(1, 16, 2.0);
        let ctx = resolvent(&sample_band(&prof, 9, 3), Complex64::new(-0.4, 0.2)).unwrap();
        let m2 = ctx.m().norm_sqr();
        for a in 0..16 {
            for b1 in 0..16 {
                for b2 in [0, 5, b1] {
                    let mut naive = Complex64::default();
                    for x in 0..16 {
                        naive += prof.kernel()[prof.lattice().displacement(a, x)]
                            * ctx.entry(x, b1)
                            * ctx.entry(x, b2).conj();
                    }
                    assert!((t_three(&ctx, a, b1, b2) - m2 * naive).norm() < 1e-12);
                }
            }
            let tb = t_three(&ctx, a, 3, 3);
            assert!(tb.im.abs() < 1e-15 && tb.re >= 0.0);
        }
    }

    #[test]
    fn t_three_at_zero_matrix() {
        let prof = Arc::new(mean_field_profile(TorusLattice::new(1, 4).unwrap()));
        let h = HermitianSample::from_matrix(Arc::clone(&prof), Mat::zeros(4, 4)).unwrap();
        let z = Complex64::new(0.1, 0.4);
        let ctx = resolvent(&h, z).unwrap();
        let m2 = ctx.m().norm_sqr();
        assert!((t_three(&ctx, 1, 2, 2) - m2 * 0.25 / z.norm_sqr()).norm() < 1e-14);
        assert!(t_three(&ctx, 1, 2, 3).norm() < 1e-15);
    }

    #[test]
    fn zero_mode_split_identities() {
        let prof = band(2, 6, 2.0);
        let ctx = resolvent(&sample_band(&prof, 1, 1), Complex64::new(0.1, 0.15)).unwrap();
        let n = ctx.dim();
        for &(b1, b2) in &[(0, 0), (3, 7), (20, 2)] {
            let mut total = Complex64::default();
            for a in 0..n {
                let (tc, zm) = zero_mode_split(&ctx, a, b1, b2);
                let t = t_three(&ctx, a, b1, b2);
                assert!((tc + zm - t).norm() <= 1e-12 * t.norm().max(1e-300));
                total += tc;
                if b1 == b2 {
                    let expect = ctx.m().norm_sqr() * ctx.entry(b1, b1).im / (n as f64 * ctx.eta());
                    assert!((zm - expect).norm() < 1e-13);
                }
            }
            assert!(total.norm() < 1e-10);
        }
    }

    #[test]
    fn second_order_residual_contract() {
        let prof = band(1, 8, 2.0);
        let z = Complex64::new(0.2, 0.5);
        let est = second_order_residual(&prof, z, 0, 0, 0, 100, 7).unwrap();
        assert!(est.mean.re.is_finite() && est.stderr.is_finite() && est.stderr > 0.0);
        assert!(matches!(
            second_order_residual(&prof, z, 0, 0, 0, 99, 7),
            Err(Error::InsufficientSamples { got: 99, min: 100 })
        ));
        let again = second_order_residual(&prof, z, 0, 0, 0, 100, 7).unwrap();
        assert_eq!(est, again);
    }

    #[test]
    fn second_order_residual_mean_zero() {
        let prof = band(1, 8, 2.0);
        let est = second_order_residual(&prof, Complex64::new(0.2, 0.5), 0, 0, 0, 20_000, 11).unwrap();
        assert!(est.z_score() <= 5.0, "{est:?}");
        let mf = Arc::new(mean_field_profile(TorusLattice::new(1, 8).unwrap()));
        let est = second_order_residual(&mf, Complex64::new(0.2, 0.5), 0, 3, 5, 20_000, 12).unwrap();
        assert!(est.z_score() <= 5.0, "{est:?}");
    }

    #[test]
    fn eigensolve_diagonal_and_moments() {
        let spec = eigensolve(&from_dense(&[&[2.0, 0.0, 0.0], &[0.0, 1.0, 0.0], &[0.0, 0.0, 3.0]])).unwrap();
        assert_eq!(spec.eigenvalues(), &[1.0, 2.0, 3.0]);
        for (a, row) in [1usize, 0, 2].iter().enumerate() {
            assert!((spec.eigenvectors()[(*row, a)].norm() - 1.0).abs() < 1e-14);
        }

        let prof = band(1, 48, 3.0);
        let h = sample_band(&prof, 2, 0);
        let spec = eigensolve(&h).unwrap();
        let n = 48usize;
        let a = h.matrix();
        let trace: f64 = (0..n).map(|i| a[(i, i)].re).sum();
        let frob: f64 = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| a[(i, j)].norm_sqr()).sum();
        assert!((spec.eigenvalues().iter().sum::<f64>() - trace).abs() < 1e-9 * n as f64);
        assert!((spec.eigenvalues().iter().map(|l| l * l).sum::<f64>() - frob).abs() < 1e-8 * n as f64);
        let u = spec.eigenvectors();
        let hu = a * u;
        for al in 0..n {
            let r: f64 = (0..n).map(|i| (hu[(i, al)] - spec.eigenvalues()[al] * u[(i, al)]).norm_sqr()).sum();
            assert!(r.sqrt() < 1e-8);
        }
        let gram = u.adjoint() * u;
        for i in 0..n {
            for j in 0..n {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((gram[(i, j)] - e).norm() < 1e-10);
            }
        }
        let only = eigenvalues(&h).unwrap();
        for (x, y) in only.iter().zip(spec.eigenvalues()) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn spectral_resolvent_matches_direct() {
        let z = Complex64::new(0.3, 0.1);
        let one = eigensolve(&from_dense(&[&[-0.25]])).unwrap();
        assert!((resolvent_from_spectrum(&one, z).unwrap()[(0, 0)] - 1.0 / (-0.25 - z)).norm() < 1e-15);

        let prof = band(1, 64, 4.0);
        let h = sample_band(&prof, 4, 2);
        let spec = eigensolve(&h).unwrap();
        let gs = resolvent_from_spectrum(&spec, z).unwrap();
        let ctx = resolvent(&h, z).unwrap();
        let diff = Mat::from_fn(64, 64, |i, j| gs[(i, j)] - ctx.entry(i, j));
        assert!(max_abs(&diff) < 1e-8);

        let im = Mat::from_fn(64, 64, |i, j| (gs[(i, j)] - gs[(j, i)].conj()) / c64::new(0.0, 2.0));
        let vals = im.self_adjoint_eigenvalues(Side::Lower).unwrap();
        assert!(vals[0] >= -1e-10);
        assert!(resolvent_from_spectrum(&spec, Complex64::new(0.0, 0.0)).is_err());
    }
}
