//! Spectral statistics and report records.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::io::Write;
use std::sync::Arc;

use faer::{c64, Mat};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::TorusLattice;
use crate::profile::VarianceProfile;
use crate::propagators::b_value;
use crate::sampler::sample_band;
use crate::spectral::{resolvent, ResolventContext, SpectralData};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metric {
    pub name: String,
    pub value: f64,
    pub stderr: Option<f64>,
    pub n: usize,
    pub definition: String,
}

/// Named scalar metrics with the parameters that produced them.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StatReport {
    pub params: BTreeMap<String, String>,
    pub metrics: Vec<Metric>,
}

impl StatReport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn param(&mut self, key: impl Into<String>, value: impl ToString) -> &mut Self {
        self.params.insert(key.into(), value.to_string());
        self
    }

    pub fn push(&mut self, name: impl Into<String>, value: f64, stderr: Option<f64>, n: usize, definition: impl Into<String>) -> &mut Self {
        self.metrics.push(Metric { name: name.into(), value, stderr, n, definition: definition.into() });
        self
    }

    pub fn extend(&mut self, other: StatReport) {
        self.params.extend(other.params);
        self.metrics.extend(other.metrics);
    }

    pub fn get(&self, name: &str) -> Option<&Metric> {
        self.metrics.iter().find(|m| m.name == name)
    }

    pub fn value(&self, name: &str) -> Option<f64> {
        self.get(name).map(|m| m.value)
    }

    /// JSON object `{params, metrics: {name: {value, stderr, n, definition}}}`.
    pub fn to_json(&self) -> serde_json::Value {
        let metrics: serde_json::Map<String, serde_json::Value> = self
            .metrics
            .iter()
            .map(|m| {
                (
                    m.name.clone(),
                    serde_json::json!({
                        "value": m.value,
                        "stderr": m.stderr,
                        "n": m.n,
                        "definition": m.definition,
                    }),
                )
            })
            .collect();
        serde_json::json!({ "params": self.params, "metrics": metrics })
    }

    pub fn write_json<W: Write>(&self, mut out: W) -> Result<()> {
        serde_json::to_writer_pretty(&mut out, &self.to_json())?;
        writeln!(out)?;
        Ok(())
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "name,value,stderr,n,definition")?;
        for m in &self.metrics {
            let se = m.stderr.map(|s| format!("{s:?}")).unwrap_or_default();
            writeln!(out, "{},{:?},{},{},\"{}\"", m.name, m.value, se, m.n, m.definition.replace('"', "\"\""))?;
        }
        Ok(())
    }
}

/// Mean and standard error of real samples.
pub fn mean_stderr(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    if samples.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = samples.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

pub fn semicircle_cdf(x: f64) -> f64 {
    if x <= -2.0 {
        0.0
    } else if x >= 2.0 {
        1.0
    } else {
        0.5 + x * (4.0 - x * x).sqrt() / (4.0 * PI) + (x / 2.0).asin() / PI
    }
}

/// Kolmogorov-Smirnov distance between the empirical spectral CDF and the semicircle.
pub fn semicircle_distance(eigenvalues: &[f64]) -> Result<f64> {
    if eigenvalues.len() < 16 {
        return Err(Error::InsufficientSamples { got: eigenvalues.len(), min: 16 });
    }
    let mut v = eigenvalues.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    Ok(v.iter().enumerate().fold(0.0f64, |d, (i, &x)| {
        let f = semicircle_cdf(x);
        d.max((i + 1) as f64 / n - f).max(f - i as f64 / n)
    }))
}

fn bulk_check(z: Complex64) -> Result<()> {
    if z.re.abs() > 1.9 {
        return Err(Error::Range(format!("|E| = {} exceeds the bulk window 1.9", z.re.abs())));
    }
    Ok(())
}

/// `max_x |G_xx - m|` and `max_{x != y} |G_xy|^2 / (B_xy + 1/(N eta))` with per-shell maxima.
pub fn local_law_ratios(ctx: &ResolventContext) -> Result<StatReport> {
    bulk_check(ctx.z())?;
    let prof = ctx.profile();
    let lat = prof.lattice();
    let n = ctx.dim();
    let w = prof.width();
    let floor = 1.0 / (n as f64 * ctx.eta());
    let mut diag = 0.0f64;
    let mut diag_sq = 0.0f64;
    let mut shells = vec![0.0f64; lat.side() / 2 + 1];
    for x in 0..n {
        let dev = (ctx.entry(x, x) - ctx.m()).norm();
        diag = diag.max(dev);
        diag_sq += dev * dev;
        for y in 0..n {
            if x == y {
                continue;
            }
            let r = lat.distance(x, y);
            let ratio = ctx.entry(x, y).norm_sqr() / (b_value(r, w, lat.dim()) + floor);
            let s = &mut shells[r as usize];
            *s = s.max(ratio);
        }
    }
    let mut rep = StatReport::new();
    rep.param("E", ctx.energy()).param("eta", ctx.eta());
    rep.push("max_diag_deviation", diag, None, n, "max_x |G_xx - m|");
    rep.push("rms_diag_deviation", (diag_sq / n as f64).sqrt(), None, n, "(N^{-1} sum_x |G_xx - m|^2)^{1/2}");
    rep.push(
        "max_offdiag_ratio",
        shells.iter().copied().fold(0.0, f64::max),
        None,
        n * (n - 1),
        "max_{x!=y} |G_xy|^2 / (B_xy + 1/(N eta))",
    );
    for (r, v) in shells.iter().enumerate().skip(1) {
        rep.push(format!("shell_ratio_{r}"), *v, None, n, format!("max over |x-y| = {r} of |G_xy|^2 / (B_xy + 1/(N eta))"));
    }
    Ok(rep)
}

fn bulk_indices(eigenvalues: &[f64], kappa: f64) -> Result<Vec<usize>> {
    if !(kappa > 0.0 && kappa < 2.0) {
        return Err(Error::Parameter(format!("kappa must lie in (0, 2), got {kappa}")));
    }
    Ok((0..eigenvalues.len()).filter(|&a| eigenvalues[a].abs() <= 2.0 - kappa).collect())
}

/// `max ||u_a||_inf^2` over bulk eigenvectors.
pub fn deloc_supnorm(spec: &SpectralData, kappa: f64) -> Result<f64> {
    let bulk = bulk_indices(spec.eigenvalues(), kappa)?;
    if bulk.is_empty() {
        return Err(Error::Window(format!("no eigenvalues with |lambda| <= {}", 2.0 - kappa)));
    }
    let u = spec.eigenvectors();
    Ok(bulk
        .iter()
        .flat_map(|&a| (0..u.nrows()).map(move |x| u[(x, a)].norm_sqr()))
        .fold(0.0, f64::max))
}

/// Mean of `min(d_a, d_{a+1}) / max(d_a, d_{a+1})` over consecutive gaps whose
/// middle eigenvalue lies in the bulk. Two zero gaps give ratio 1.
pub fn gap_ratio_mean(eigenvalues: &[f64], kappa: f64) -> Result<f64> {
    let mut v = eigenvalues.to_vec();
    v.sort_by(f64::total_cmp);
    let bulk = bulk_indices(&v, kappa)?;
    if bulk.len() < 50 {
        return Err(Error::Window(format!("{} bulk eigenvalues, need at least 50", bulk.len())));
    }
    let ratios: Vec<f64> = bulk
        .iter()
        .filter(|&&a| a >= 1 && a + 1 < v.len())
        .map(|&a| {
            let (d1, d2) = (v[a] - v[a - 1], v[a + 1] - v[a]);
            let hi = d1.max(d2);
            if hi == 0.0 {
                1.0
            } else {
                d1.min(d2) / hi
            }
        })
        .collect();
    Ok(ratios.iter().sum::<f64>() / ratios.len() as f64)
}

/// Real diagonal test matrix `Pi`.
#[derive(Debug, Clone, PartialEq)]
pub struct TestDiagonal {
    values: Vec<f64>,
    trace_zero: bool,
}

impl TestDiagonal {
    /// Fails with a contract error when `trace_zero` is claimed but `sum Pi_x != 0`.
    pub fn new(values: Vec<f64>, trace_zero: bool) -> Result<Self> {
        if trace_zero {
            let sum: f64 = values.iter().sum();
            let scale = values.iter().map(|v| v.abs()).sum::<f64>().max(1.0);
            if sum.abs() > 1e-10 * scale {
                return Err(Error::Contract(format!("test diagonal has trace {sum:e}, expected 0")));
            }
        }
        Ok(TestDiagonal { values, trace_zero })
    }

    /// `Pi_x = (N / |I|) 1_{x in I} - 1`.
    pub fn indicator(n: usize, sites: &[usize]) -> Result<Self> {
        if sites.is_empty() || sites.iter().any(|&x| x >= n) {
            return Err(Error::Parameter("indicator set must be a nonempty set of valid sites".into()));
        }
        let mut inside = vec![false; n];
        for &x in sites {
            inside[x] = true;
        }
        let count = inside.iter().filter(|&&b| b).count() as f64;
        let values = inside.iter().map(|&b| if b { n as f64 / count - 1.0 } else { -1.0 }).collect();
        TestDiagonal::new(values, true)
    }

    /// Indicator of the sup-norm box of radius `r` about the origin, minus its mean.
    pub fn centered_box(lat: &TorusLattice, r: u64) -> Result<Self> {
        let sites: Vec<usize> = (0..lat.sites()).filter(|&x| lat.norm(x) <= r).collect();
        Self::indicator(lat.sites(), &sites)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn trace_zero(&self) -> bool {
        self.trace_zero
    }

    pub fn scaled(&self, k: f64) -> Self {
        TestDiagonal { values: self.values.iter().map(|v| v * k).collect(), trace_zero: self.trace_zero }
    }
}

fn dim_check(n: usize, pi: &TestDiagonal) -> Result<()> {
    if pi.values.len() != n {
        return Err(Error::Contract(format!("test diagonal has {} entries, matrix is {n}x{n}", pi.values.len())));
    }
    Ok(())
}

/// `tr(A Pi A Pi)` with `A = Im G`, from resolvent entries.
pub fn que_trace_resolvent(ctx: &ResolventContext, pi: &TestDiagonal) -> Result<f64> {
    let n = ctx.dim();
    dim_check(n, pi)?;
    let g = ctx.g();
    let p = &pi.values;
    let mut total = 0.0;
    for x in 0..n {
        if p[x] == 0.0 {
            continue;
        }
        let mut row = 0.0;
        for y in 0..n {
            let a = (g[(x, y)] - g[(y, x)].conj()) / Complex64::new(0.0, 2.0);
            row += p[y] * a.norm_sqr();
        }
        total += p[x] * row;
    }
    Ok(total)
}

fn overlap_matrix(spec: &SpectralData, pi: &TestDiagonal) -> Mat<c64> {
    let u = spec.eigenvectors();
    let pu = Mat::from_fn(u.nrows(), u.ncols(), |x, b| u[(x, b)] * pi.values[x]);
    u.adjoint() * &pu
}

/// `sum_{a,b} eta^2 / (|l_a - z|^2 |l_b - z|^2) |<u_a, Pi u_b>|^2`.
pub fn que_trace_spectral(spec: &SpectralData, z: Complex64, pi: &TestDiagonal) -> Result<f64> {
    dim_check(spec.eigenvectors().nrows(), pi)?;
    let ov = overlap_matrix(spec, pi);
    let w: Vec<f64> = spec.eigenvalues().iter().map(|&l| z.im / (l - z).norm_sqr()).collect();
    let n = w.len();
    Ok((0..n)
        .map(|a| w[a] * (0..n).map(|b| w[b] * ov[(a, b)].norm_sqr()).sum::<f64>())
        .sum())
}

/// `(sum_y |Pi_y|) * max_x sum_y B_xy |Pi_y|`.
pub fn que_bound_scale(lat: &TorusLattice, width: f64, pi: &TestDiagonal) -> Result<f64> {
    dim_check(lat.sites(), pi)?;
    let p = &pi.values;
    let mass: f64 = p.iter().map(|v| v.abs()).sum();
    let worst = (0..lat.sites())
        .into_par_iter()
        .map(|x| {
            (0..lat.sites())
                .filter(|&y| p[y] != 0.0)
                .map(|y| b_value(lat.distance(x, y), width, lat.dim()) * p[y].abs())
                .sum::<f64>()
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(0.0, f64::max);
    Ok(mass * worst)
}

pub const QUE_FLAG_RATIO: f64 = 100.0;

/// Monte Carlo `E|tr(A Pi A Pi)|` against the bound scale.
pub fn que_bound_ratio(
    profile: &Arc<VarianceProfile>,
    z: Complex64,
    pi: &TestDiagonal,
    trials: usize,
    seed: u64,
) -> Result<StatReport> {
    if !pi.trace_zero || pi.values.iter().all(|&v| v == 0.0) {
        return Err(Error::Contract("QUE bound needs a nonzero trace-zero test diagonal".into()));
    }
    if trials < 20 {
        return Err(Error::InsufficientSamples { got: trials, min: 20 });
    }
    let lat = profile.lattice();
    dim_check(lat.sites(), pi)?;
    let traces = (0..trials as u64)
        .into_par_iter()
        .map(|t| que_trace_resolvent(&resolvent(&sample_band(profile, seed, t), z)?, pi).map(f64::abs))
        .collect::<Result<Vec<_>>>()?;
    let (mean, se) = mean_stderr(&traces);
    let scale = que_bound_scale(lat, profile.width(), pi)?;
    let ratio = mean / scale;
    let mut rep = StatReport::new();
    rep.param("E", z.re).param("eta", z.im).param("trials", trials).param("seed", seed);
    rep.push("que_trace_abs_mean", mean, Some(se), trials, "E|tr(Im G Pi Im G Pi)|");
    rep.push("que_bound_scale", scale, None, lat.sites(), "(sum_y |Pi_y|) max_x sum_y B_xy |Pi_y|");
    rep.push("que_bound_ratio", ratio, Some(se / scale), trials, "E|tr(Im G Pi Im G Pi)| / bound scale");
    rep.push("que_bound_flagged", (ratio > QUE_FLAG_RATIO) as u8 as f64, None, trials, "1 when the ratio exceeds 100");
    Ok(rep)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverlapCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// Compares `sum |<u_a, Pi u_b>|^2` over eigenvalues within `l` of `E` with `(4 l^4 / eta^2) tr(A Pi A Pi)`.
pub fn overlap_bound_check(spec: &SpectralData, z: Complex64, pi: &TestDiagonal, l: f64) -> Result<OverlapCheck> {
    if !(l >= z.im) {
        return Err(Error::Parameter(format!("window l = {l} is below eta = {}", z.im)));
    }
    let tr = que_trace_spectral(spec, z, pi)?;
    let ov = overlap_matrix(spec, pi);
    let near: Vec<usize> = (0..spec.len()).filter(|&a| (spec.eigenvalues()[a] - z.re).abs() <= l).collect();
    let lhs: f64 = near.iter().flat_map(|&a| near.iter().map(move |&b| (a, b))).map(|(a, b)| ov[(a, b)].norm_sqr()).sum();
    let rhs = 4.0 * l.powi(4) / (z.im * z.im) * tr;
    Ok(OverlapCheck { lhs, rhs, holds: lhs <= rhs * (1.0 + 1e-8) })
}

/// The comparison scale `g(K, W, eta)` of p-gon averages.
pub fn pgon_scale(k: f64, width: f64, side: f64, dim: usize, eta: f64) -> f64 {
    let d = dim as f64;
    let n = side.powf(d);
    let ratio = side * side / (n * eta * width * width);
    let first = 1.0 / (width * width * k.powf(d - 2.0)) + 1.0 / (n * eta) + k.powf(-d / 2.0) * ratio.sqrt();
    let second = 1.0 / (width.powi(4) * k.powf(d - 4.0)) + ratio;
    (first * second).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PgonAverage {
    pub value: Complex64,
    /// `g(K, W, eta)^{p-1}` with `K = |I|^{1/d}`.
    pub scale: f64,
}

pub const PGON_CAP: u128 = 100_000_000;

/// `|I|^{-p} sum_{x_i in I} prod_i G^{s_i}_{x_i x_{i+1}}`; `true` selects `G`, `false` selects `G^*`.
pub fn pgon_average(ctx: &ResolventContext, sites: &[usize], signs: &[bool]) -> Result<PgonAverage> {
    let p = signs.len();
    let k = sites.len();
    if k < 2 || p < 2 {
        return Err(Error::Parameter(format!("p-gon needs |I| >= 2 and p >= 2, got {k} and {p}")));
    }
    if let Some(x) = sites.iter().find(|&&x| x >= ctx.dim()) {
        return Err(Error::Parameter(format!("site {x} outside {} sites", ctx.dim())));
    }
    let terms = (k as u128).checked_pow(p as u32).unwrap_or(u128::MAX);
    if terms > PGON_CAP {
        return Err(Error::capacity("p-gon terms", terms, PGON_CAP));
    }
    let g = ctx.g();
    let block = |plus: bool| {
        Mat::from_fn(k, k, |i, j| {
            let (x, y) = (sites[i], sites[j]);
            if plus {
                g[(x, y)]
            } else {
                g[(y, x)].conj()
            }
        })
    };
    let mut prod = block(signs[0]);
    for &s in &signs[1..] {
        prod = &prod * &block(s);
    }
    let trace: Complex64 = (0..k).map(|i| prod[(i, i)]).sum();
    let prof = ctx.profile();
    let lat = prof.lattice();
    let kk = (k as f64).powf(1.0 / lat.dim() as f64);
    Ok(PgonAverage {
        value: trace / (k as f64).powi(p as i32),
        scale: pgon_scale(kk, prof.width(), lat.side() as f64, lat.dim(), ctx.eta()).powi(p as i32 - 1),
    })
}

/// Circular moving sum of radius `r` along every axis.
fn box_sums(lat: &TorusLattice, values: &[f64], r: usize) -> Vec<f64> {
    let l = lat.side();
    let mut cur = values.to_vec();
    if 2 * r + 1 >= l {
        for axis in 0..lat.dim() {
            let stride = l.pow((lat.dim() - 1 - axis) as u32);
            let mut next = vec![0.0; cur.len()];
            for (i, slot) in next.iter_mut().enumerate() {
                let pos = (i / stride) % l;
                let base = i - pos * stride;
                *slot = (0..l).map(|j| cur[base + j * stride]).sum();
            }
            cur = next;
        }
        return cur;
    }
    for axis in 0..lat.dim() {
        let stride = l.pow((lat.dim() - 1 - axis) as u32);
        let mut next = vec![0.0; cur.len()];
        for (i, slot) in next.iter_mut().enumerate() {
            let pos = (i / stride) % l;
            let base = i - pos * stride;
            *slot = (0..=2 * r).map(|j| cur[base + ((pos + l - r + j) % l) * stride]).sum();
        }
        cur = next;
    }
    cur
}

/// `W^{d_eta}` exponent: `d/2` once `eta >= (W/L)^2`, `delta0/2` below.
fn weak_exponent(width: f64, side: f64, eta: f64, dim: usize, delta0: f64) -> f64 {
    if eta >= (width / side).powi(2) {
        dim as f64 / 2.0
    } else {
        delta0 / 2.0
    }
}

/// The two terms of `||A||_w`: `W^{d_eta} max|A_xy|` and the dyadic-`K` supremum
/// of `(K^d sqrt(g))^{-1} max_{x,x0} sum_{|y-x0|<=K} (|A_xy| + |A_yx|)`.
pub fn weak_norm_terms(profile: &VarianceProfile, eta: f64, delta0: f64, a: &Mat<c64>) -> Result<(f64, f64)> {
    let lat = profile.lattice();
    let (n, w, l, d) = (lat.sites(), profile.width(), lat.side() as f64, lat.dim());
    if a.nrows() != n || a.ncols() != n {
        return Err(Error::Contract(format!("matrix is {}x{}, lattice has {n} sites", a.nrows(), a.ncols())));
    }
    let abs = Mat::from_fn(n, n, |x, y| a[(x, y)].norm());
    let max_entry = (0..n).flat_map(|x| (0..n).map(move |y| (x, y))).map(|(x, y)| abs[(x, y)]).fold(0.0, f64::max);
    let max_term = w.powf(weak_exponent(w, l, eta, d, delta0)) * max_entry;

    let mut scales = Vec::new();
    let mut k = w;
    while k <= l / 2.0 {
        scales.push(k);
        k *= 2.0;
    }
    let shell_term = scales
        .iter()
        .map(|&k| {
            let norm = k.powi(d as i32) * pgon_scale(k, w, l, d, eta).sqrt();
            (0..n)
                .into_par_iter()
                .map(|x| {
                    let row: Vec<f64> = (0..n).map(|y| abs[(x, y)] + abs[(y, x)]).collect();
                    box_sums(lat, &row, k.floor() as usize).into_iter().fold(0.0, f64::max)
                })
                .collect::<Vec<_>>()
                .into_iter()
                .fold(0.0, f64::max)
                / norm
        })
        .fold(0.0, f64::max);
    Ok((max_term, shell_term))
}

pub fn weak_norm(profile: &VarianceProfile, eta: f64, delta0: f64, a: &Mat<c64>) -> Result<f64> {
    let (m, s) = weak_norm_terms(profile, eta, delta0, a)?;
    Ok(m + s)
}

/// `||A||_{s;Phi} = max |A_xy| / (W^{-1} <x-y>^{1-d/2} + Phi)`.
pub fn strong_norm(profile: &VarianceProfile, phi: f64, a: &Mat<c64>) -> Result<f64> {
    if !(phi > 0.0) {
        return Err(Error::Parameter(format!("Phi must be positive, got {phi}")));
    }
    let lat = profile.lattice();
    let n = lat.sites();
    if a.nrows() != n || a.ncols() != n {
        return Err(Error::Contract(format!("matrix is {}x{}, lattice has {n} sites", a.nrows(), a.ncols())));
    }
    let w = profile.width();
    let expo = 1.0 - lat.dim() as f64 / 2.0;
    let mut worst = 0.0f64;
    for x in 0..n {
        for y in 0..n {
            let bracket = lat.distance(x, y) as f64 + w;
            worst = worst.max(a[(x, y)].norm() / (bracket.powf(expo) / w + phi));
        }
    }
    Ok(worst)
}

/// Weak and strong norms of `G - m I`.
pub fn diagnostic_norms(ctx: &ResolventContext, phi: f64, delta0: f64) -> Result<StatReport> {
    let n = ctx.dim();
    let m = ctx.m();
    let a = Mat::from_fn(n, n, |x, y| if x == y { ctx.entry(x, y) - m } else { ctx.entry(x, y) });
    let strong = strong_norm(ctx.profile(), phi, &a)?;
    let (max_term, shell_term) = weak_norm_terms(ctx.profile(), ctx.eta(), delta0, &a)?;
    let mut rep = StatReport::new();
    rep.param("E", ctx.energy()).param("eta", ctx.eta()).param("phi", phi).param("delta0", delta0);
    rep.push("norm_w", max_term + shell_term, None, n, "||G - m||_w");
    rep.push("norm_w_max_term", max_term, None, n, "W^{d_eta} max|A_xy|");
    rep.push("norm_w_shell_term", shell_term, None, n, "sup_K max_{x,x0} (K^d sqrt(g))^{-1} sum_{|y-x0|<=K} (|A_xy|+|A_yx|)");
    rep.push("norm_s", strong, None, n * n, "max |A_xy| / (W^{-1} <x-y>^{1-d/2} + Phi)");
    Ok(rep)
}

/// The `L1` and `L2` flow observables summed over `G1, G2 in {G, G^*}`.
pub fn flow_observables(ctx: &ResolventContext) -> Result<StatReport> {
    let n = ctx.dim();
    let prof = ctx.profile();
    let g = ctx.g();
    let g2 = g * g;
    let nf = n as f64;
    let s_circ = |a: usize, b: usize| prof.s(a, b) - 1.0 / nf;
    // (G1^2)_{ab} for G1 = G or G^*
    let sq = |plus: bool, a: usize, b: usize| if plus { g2[(a, b)] } else { g2[(b, a)].conj() };
    let one = |plus: bool, a: usize| if plus { g[(a, a)] } else { g[(a, a)].conj() };
    let mut l1 = 0.0;
    let mut l2 = 0.0;
    for &p1 in &[true, false] {
        for &p2 in &[true, false] {
            let mut s1 = Complex64::default();
            let mut s2 = Complex64::default();
            for a in 0..n {
                for b in 0..n {
                    let s = s_circ(a, b);
                    s1 += sq(p1, a, a) * s * one(p2, b);
                    s2 += sq(p1, a, b) * s * sq(p2, b, a);
                }
            }
            l1 += (s1 / nf).norm();
            l2 += (s2 / (nf * nf)).norm();
        }
    }
    let mut rep = StatReport::new();
    rep.param("E", ctx.energy()).param("eta", ctx.eta());
    rep.push("flow_l1", l1, None, n * n, "sum_{G1,G2} |N^{-1} sum_{a,b} (G1^2)_aa s°_ab (G2)_bb|");
    rep.push("flow_l2", l2, None, n * n, "sum_{G1,G2} |N^{-2} sum_{a,b} (G1^2)_ab s°_ab (G2^2)_ba|");
    Ok(rep)
}

/// Semicircle density value, for reference curves.
pub fn semicircle_density(x: f64) -> f64 {
    if x.abs() >= 2.0 {
        0.0
    } else {
        (4.0 - x * x).sqrt() / (2.0 * PI)
    }
}
