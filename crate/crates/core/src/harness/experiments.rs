//! The experiment bodies. Each returns a report whose values depend only on
//! the configuration, never on the worker count.

use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::config::{Experiment, ExperimentConfig};
use super::seed::seed_substream;
use crate::error::{Error, Result};
use crate::graphcalc::{evaluate, is_doubly_connected, lemma21_graphs, normalize, scaling_order};
use crate::lattice::TorusLattice;
use crate::profile::{build_profile, ShapeFunction, VarianceProfile};
use crate::propagators::{theta_bound_report, PropagatorSet};
use crate::sampler::{ou_evolve, sample_band, sample_gue};
use crate::spectral::{
    eigensolve, eigenvalues, resolvent, second_order_residual, second_order_terms, t_three,
    ward_residual, zero_mode_split,
};
use crate::stats::{
    diagnostic_norms, flow_observables, gap_ratio_mean, local_law_ratios, mean_stderr, overlap_bound_check,
    pgon_average, que_bound_scale, que_trace_resolvent, que_trace_spectral, semicircle_distance, StatReport,
    TestDiagonal, QUE_FLAG_RATIO,
};

/// Master-seed tags for the oracle ensembles, kept apart from the band stream.
pub const GUE_TAG: u64 = 0x4755_455F_4F52_4143;
pub const POISSON_TAG: u64 = 0x504F_4953_534F_4E21;

/// Largest matrix dimension the graph experiment accepts.
pub const GRAPH_MAX_SITES: usize = 1024;

/// Tail exponent used for the Theta° bound report and the truncation mass.
pub const BOUND_TAU: f64 = 0.1;

/// A named auxiliary output file.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub contents: Vec<u8>,
}

#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub report: StatReport,
    pub artifacts: Vec<Artifact>,
}

pub(crate) fn dispatch(cfg: &ExperimentConfig) -> Result<Outcome> {
    let profile = Arc::new(build_profile(
        &ShapeFunction::by_name(&cfg.psi)?,
        cfg.band,
        TorusLattice::new(cfg.dim, cfg.size)?,
    )?);
    let mut out = match cfg.experiment {
        Experiment::Profile => profile_exp(cfg, &profile),
        Experiment::Wardcheck => wardcheck(cfg, &profile),
        Experiment::Texp2 => texp2(cfg, &profile),
        Experiment::Propcheck => propcheck(cfg, &profile),
        Experiment::Locallaw => locallaw(cfg, &profile),
        Experiment::Universality => universality(cfg, &profile),
        Experiment::Que => que(cfg, &profile),
        Experiment::Graph => graph(cfg, &profile),
        Experiment::Pgon => pgon(cfg, &profile),
    }?;
    let rep = &mut out.report;
    rep.param("experiment", cfg.experiment)
        .param("dim", cfg.dim)
        .param("size", cfg.size)
        .param("band", cfg.band)
        .param("psi", &cfg.psi)
        .param("seed", cfg.seed)
        .param("trials", cfg.trials)
        .param("profile_id", profile.id());
    Ok(out)
}

fn at(name: &str, eta: f64) -> String {
    format!("{name}@eta={eta}")
}

fn z_of(cfg: &ExperimentConfig, eta: f64) -> Complex64 {
    Complex64::new(cfg.energy, eta)
}

/// Runs `f` on every trial index and collects in trial order.
fn per_trial<T: Send>(trials: usize, f: impl Fn(u64) -> Result<T> + Sync + Send) -> Result<Vec<T>> {
    (0..trials as u64).into_par_iter().map(f).collect()
}

fn max_of(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().fold(0.0, f64::max)
}

fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    }
}

fn rel_gap(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

fn csv_artifact(name: String, write: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<Artifact> {
    let mut contents = Vec::new();
    write(&mut contents)?;
    Ok(Artifact { name, contents })
}

fn profile_exp(_cfg: &ExperimentConfig, prof: &Arc<VarianceProfile>) -> Result<Outcome> {
    let n = prof.lattice().sites();
    let sym = prof.symbol();
    let mut rep = StatReport::new();
    rep.push("row_sum", prof.kernel().iter().sum(), None, n, "sum_x s_0x");
    rep.push("kernel_min", prof.kernel().iter().copied().fold(f64::INFINITY, f64::min), None, n, "min_x s_0x");
    rep.push("normalization", prof.normalization(), None, n, "sum_x f_W(x) before rescaling");
    rep.push("symbol_min", sym.iter().copied().fold(f64::INFINITY, f64::min), None, n, "min_k lambda_k");
    rep.push("spectral_gap", prof.spectral_gap(), None, n, "1 - max_{k != 0} lambda_k");
    rep.push("truncation_mass", prof.band_truncation_mass(BOUND_TAU), None, n, "sum_{|x| >= W^{1.1}} s_0x");
    let artifacts = vec![
        csv_artifact("kernel.csv".into(), |b| prof.write_kernel_csv(b))?,
        csv_artifact("symbol.csv".into(), |b| prof.write_symbol_csv(b))?,
    ];
    Ok(Outcome { report: rep, artifacts })
}

fn wardcheck(cfg: &ExperimentConfig, prof: &Arc<VarianceProfile>) -> Result<Outcome> {
    let [a, b1, b2] = cfg.sites;
    let n = prof.lattice().sites() as f64;
    let mut rep = StatReport::new();
    for &eta in &cfg.eta {
        let z = z_of(cfg, eta);
        let rows = per_trial(cfg.trials, |t| {
            let ctx = resolvent(&sample_band(prof, cfg.seed, t), z)?;
            let ward = ward_residual(&ctx);
            let norm = ward / (n * ctx.max_norm().powi(2)).max(1.0);
            let total = t_three(&ctx, a, b1, b2);
            let (circ, zero) = zero_mode_split(&ctx, a, b1, b2);
            let split = (total - circ - zero).norm() / total.norm().max(f64::MIN_POSITIVE);
            Ok((ward, norm, split))
        })?;
        let k = rows.len();
        rep.push(at("ward_residual_max", eta), max_of(rows.iter().map(|r| r.0)), None, k, "max |G*G - (G - G*)/(2i eta)|");
        rep.push(at("ward_normalized_max", eta), max_of(rows.iter().map(|r| r.1)), None, k, "ward residual / max(1, N ||G||_max^2)");
        rep.push(at("zero_mode_rel_max", eta), max_of(rows.iter().map(|r| r.2)), None, k, "|T - T° - zero mode| / |T|");
    }
    Ok(Outcome { report: rep, artifacts: vec![] })
}

fn texp2(cfg: &ExperimentConfig, prof: &Arc<VarianceProfile>) -> Result<Outcome> {
    let [a, b1, b2] = cfg.sites;
    let mut rep = StatReport::new();
    for &eta in &cfg.eta {
        let est = second_order_residual(prof, z_of(cfg, eta), a, b1, b2, cfg.trials, cfg.seed)?;
        let k = est.trials;
        rep.push(at("residual_re", eta), est.mean.re, Some(est.stderr_re), k, "mean Re(T - explicit terms)");
        rep.push(at("residual_im", eta), est.mean.im, Some(est.stderr_im), k, "mean Im(T - explicit terms)");
        rep.push(at("z_score", eta), est.z_score(), None, k, "max componentwise |mean| / stderr");
    }
    Ok(Outcome { report: rep, artifacts: vec![] })
}

fn propcheck(cfg: &ExperimentConfig, prof: &Arc<VarianceProfile>) -> Result<Outcome> {
    let lat = prof.lattice();
    let n = lat.sites();
    let w = prof.width();
    let mut rep = StatReport::new();
    let mut artifacts = Vec::new();
    for &eta in &cfg.eta {
        let z = z_of(cfg, eta);
        let props = PropagatorSet::new(prof, z)?;
        let zero = props.m().im / (n as f64 * eta);
        let sum: f64 = props.theta_circ_kernel().iter().sum();
        let spread = max_of(
            props.theta_kernel().iter().zip(props.theta_circ_kernel()).map(|(t, c)| (t - c - zero).abs()),
        );
        let tail = |r: f64| {
            max_of((0..n).filter(|&x| lat.norm(x) as f64 >= r).map(|x| props.s_plus_kernel()[x].norm()))
        };
        let bound = theta_bound_report(prof, z, BOUND_TAU)?;
        rep.push(at("theta_circ_sum", eta), sum, None, n, "sum_x Theta°_0x");
        rep.push(at("theta_zero_mode_spread", eta), spread, None, n, "max_x |Theta_0x - Theta°_0x - Im m/(N eta)|");
        rep.push(at("theta_bound_max_ratio", eta), bound.max_ratio, None, bound.shells.len(), "max_r |Theta°| / B");
        rep.push(at("theta_bound_slack", eta), bound.slack, None, 1, "W^tau");
        rep.push(at("s_plus_tail_4w", eta), tail(4.0 * w), None, n, "max_{|x| >= 4W} |S+_0x|");
        rep.push(at("s_plus_tail_5w", eta), tail(5.0 * w), None, n, "max_{|x| >= 5W} |S+_0x|");
        artifacts.push(csv_artifact(format!("theta_bound_eta={eta}.csv"), |b| bound.write_csv(b))?);
    }
    Ok(Outcome { report: rep, artifacts })
}

fn locallaw(cfg: &ExperimentConfig, prof: &Arc<VarianceProfile>) -> Result<Outcome> {
    let n = prof.lattice().sites();
    let mut rep = StatReport::new();
    for &eta in &cfg.eta {
        let z = z_of(cfg, eta);
        let phi = (n as f64 * eta).recip().sqrt();
        let rows = per_trial(cfg.trials, |t| {
            let ctx = resolvent(&sample_band(prof, cfg.seed, t), z)?;
            let ratios = local_law_ratios(&ctx)?;
            let extra = if t == 0 {
                let mut r = diagnostic_norms(&ctx, phi, cfg.delta0)?;
                r.extend(flow_observables(&ctx)?);
                Some(r)
            } else {
                None
            };
            Ok((ratios, extra))
        })?;
        let pick = |name: &str| -> Vec<f64> { rows.iter().map(|r| r.0.value(name).unwrap_or(f64::NAN)).collect() };
        let k = rows.len();
        let off = pick("max_offdiag_ratio");
        let diag = pick("max_diag_deviation");
        let (rms, rms_se) = mean_stderr(&pick("rms_diag_deviation"));
        let (off_mean, off_se) = mean_stderr(&off);
        rep.push(at("max_offdiag_ratio", eta), max_of(off.iter().copied()), None, k, "max over draws of max_{x!=y} |G_xy|^2 / (B_xy + 1/(N eta))");
        rep.push(at("mean_offdiag_ratio", eta), off_mean, Some(off_se), k, "mean over draws of the max off-diagonal ratio");
        rep.push(at("max_diag_deviation", eta), max_of(diag.iter().copied()), None, k, "max over draws of max_x |G_xx - m|");
        rep.push(at("median_diag_deviation", eta), median(&diag), None, k, "median over draws of max_x |G_xx - m|");
        rep.push(at("rms_diag_deviation", eta), rms, Some(rms_se), k, "mean over draws of (N^{-1} sum_x |G_xx - m|^2)^{1/2}");
        if let Some(Some(extra)) = rows.into_iter().next().map(|r| r.1) {
            for m in extra.metrics {
                rep.push(at(&m.name, eta), m.value, m.stderr, m.n, m.definition);
            }
        }
    }
    let ks = semicircle_distance(&eigenvalues(&sample_band(prof, cfg.seed, 0))?)?;
    rep.push("semicircle_ks", ks, None, n, "sup_x |F_N(x) - F_sc(x)| for the first draw");
    Ok(Outcome { report: rep, artifacts: vec![] })
}

fn poisson_spectrum(n: usize, seed: u64, trial: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed_substream(seed ^ POISSON_TAG, trial));
    let mut v: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
    v.sort_by(f64::total_cmp);
    v
}

fn universality(cfg: &ExperimentConfig, prof: &Arc<VarianceProfile>) -> Result<Outcome> {
    let n = prof.lattice().sites();
    let rows = per_trial(cfg.trials, |t| {
        let h0 = sample_band(prof, cfg.seed, t);
        let h = if cfg.flow_time > 0.0 { ou_evolve(&h0, cfg.flow_time, prof, cfg.seed, t)? } else { h0 };
        let band = gap_ratio_mean(&eigenvalues(&h)?, cfg.kappa)?;
        let gue = gap_ratio_mean(&eigenvalues(&sample_gue(n, cfg.seed ^ GUE_TAG, t)?)?, cfg.kappa)?;
        let poisson = gap_ratio_mean(&poisson_spectrum(n, cfg.seed, t), cfg.kappa)?;
        Ok([band, gue, poisson])
    })?;
    let k = rows.len();
    let col = |i: usize| mean_stderr(&rows.iter().map(|r| r[i]).collect::<Vec<_>>());
    let (band, band_se) = col(0);
    let (gue, gue_se) = col(1);
    let (poi, poi_se) = col(2);
    let mut rep = StatReport::new();
    rep.param("kappa", cfg.kappa).param("flow_time", cfg.flow_time);
    rep.push("gap_ratio_band", band, Some(band_se), k, "mean bulk gap ratio of the band ensemble");
    rep.push("gap_ratio_gue", gue, Some(gue_se), k, "mean bulk gap ratio of the GUE sampling oracle");
    rep.push("gap_ratio_poisson", poi, Some(poi_se), k, "mean bulk gap ratio of i.i.d. uniform spectra on [-2, 2]");
    rep.push("band_gue_distance", (band - gue).abs(), None, k, "|band - GUE|");
    rep.push("poisson_gue_distance", (poi - gue).abs(), None, k, "|Poisson - GUE|");
    Ok(Outcome { report: rep, artifacts: vec![] })
}

/// Box radius for QUE test diagonals: `floor(W)`, shrunk so the box misses part of the torus.
fn que_radius(lat: &TorusLattice, width: f64) -> u64 {
    (width.floor() as u64).min(((lat.side() - 1) / 4) as u64)
}

fn que(cfg: &ExperimentConfig, prof: &Arc<VarianceProfile>) -> Result<Outcome> {
    let lat = prof.lattice();
    let pi = TestDiagonal::centered_box(lat, que_radius(lat, prof.width()))?;
    let scale = que_bound_scale(lat, prof.width(), &pi)?;
    let mut rep = StatReport::new();
    for &eta in &cfg.eta {
        let z = z_of(cfg, eta);
        let l = 2.0 * eta;
        let rows = per_trial(cfg.trials, |t| {
            let h = sample_band(prof, cfg.seed, t);
            let ctx = resolvent(&h, z)?;
            let spec = eigensolve(&h)?;
            let via_g = que_trace_resolvent(&ctx, &pi)?;
            let via_spec = que_trace_spectral(&spec, z, &pi)?;
            let ov = overlap_bound_check(&spec, z, &pi, l)?;
            Ok((via_g, rel_gap(via_g, via_spec), ov.holds))
        })?;
        let k = rows.len();
        let (mean, se) = mean_stderr(&rows.iter().map(|r| r.0.abs()).collect::<Vec<_>>());
        let ratio = mean / scale;
        let holds = rows.iter().filter(|r| r.2).count() as f64 / k as f64;
        rep.push(at("que_trace_abs_mean", eta), mean, Some(se), k, "E|tr(Im G Pi Im G Pi)|");
        rep.push(at("que_bound_scale", eta), scale, None, lat.sites(), "(sum_y |Pi_y|) max_x sum_y B_xy |Pi_y|");
        rep.push(at("que_bound_ratio", eta), ratio, Some(se / scale), k, "E|tr(Im G Pi Im G Pi)| / bound scale");
        rep.push(at("que_bound_flagged", eta), (ratio > QUE_FLAG_RATIO) as u8 as f64, None, k, "1 when the ratio exceeds 100");
        rep.push(at("que_method_gap_max", eta), max_of(rows.iter().map(|r| r.1)), None, k, "relative gap between resolvent and spectral traces");
        rep.push(at("overlap_holds_fraction", eta), holds, None, k, "fraction of draws satisfying the overlap bound with l = 2 eta");
    }
    Ok(Outcome { report: rep, artifacts: vec![] })
}

fn graph(cfg: &ExperimentConfig, prof: &Arc<VarianceProfile>) -> Result<Outcome> {
    let n = prof.lattice().sites();
    if n > GRAPH_MAX_SITES {
        return Err(Error::capacity("graph experiment sites", n as u128, GRAPH_MAX_SITES as u128));
    }
    let [a, b1, b2] = cfg.sites;
    let bind = [a, b1, b2];
    let mut rep = StatReport::new();
    let mut text = String::new();
    for &eta in &cfg.eta {
        let z = z_of(cfg, eta);
        let props = PropagatorSet::new(prof, z)?;
        let terms = lemma21_graphs(props.m());
        let gaps = per_trial(cfg.trials, |t| {
            let ctx = resolvent(&sample_band(prof, cfg.seed, t), z)?;
            let spectral = second_order_terms(&ctx, &props, a, b1, b2);
            let mut vals = Vec::with_capacity(terms.len());
            for term in &terms {
                let mut v = Complex64::default();
                for g in &term.graphs {
                    v += evaluate(g, &ctx, &props, &bind)?;
                }
                vals.push(v);
            }
            Ok([
                (vals[0] - spectral.leading).norm(),
                (vals[1] - spectral.zero_mode).norm(),
                (vals[2] + vals[3] - spectral.higher).norm(),
            ])
        })?;
        let k = gaps.len();
        for (i, name) in ["graph_gap_leading", "graph_gap_zero_mode", "graph_gap_higher"].iter().enumerate() {
            rep.push(at(name, eta), max_of(gaps.iter().map(|g| g[i])), None, k, "max over draws of |graph value - resolvent term|");
        }
        if text.is_empty() {
            for term in &terms {
                let normal: Vec<_> = term.graphs.iter().flat_map(normalize).collect();
                let mut order = i64::MAX;
                for g in &normal {
                    order = order.min(scaling_order(g)?);
                }
                let dc = is_doubly_connected(&term.graphs[0])?.holds;
                rep.push(format!("order_{}", term.name), order as f64, None, normal.len(), "smallest scaling order after normalization");
                rep.push(format!("doubly_connected_{}", term.name), dc as u8 as f64, None, 1, "1 when the first graph is doubly connected");
                text.push_str(&format!("# {} at eta={eta}\n", term.name));
                for g in &term.graphs {
                    text.push_str(&g.to_string());
                    text.push('\n');
                }
            }
        }
    }
    Ok(Outcome { report: rep, artifacts: vec![Artifact { name: "graphs.txt".into(), contents: text.into_bytes() }] })
}

fn pgon(cfg: &ExperimentConfig, prof: &Arc<VarianceProfile>) -> Result<Outcome> {
    let lat = prof.lattice();
    let n = lat.sites();
    let r = (prof.width() / 2.0).floor() as u64;
    let sites: Vec<usize> = (0..n).filter(|&x| lat.norm(x) <= r).collect();
    let all: Vec<usize> = (0..n).collect();
    let shapes: [(usize, &[bool]); 3] = [(2, &[true, false]), (3, &[true, true, false]), (4, &[true, false, true, false])];
    let mut rep = StatReport::new();
    rep.param("box_radius", r);
    for &eta in &cfg.eta {
        let z = z_of(cfg, eta);
        let rows = per_trial(cfg.trials, |t| {
            let ctx = resolvent(&sample_band(prof, cfg.seed, t), z)?;
            let mut out = Vec::with_capacity(shapes.len() + 1);
            for (_, signs) in &shapes {
                let avg = pgon_average(&ctx, &sites, signs)?;
                out.push((avg.value.norm(), avg.scale));
            }
            let full = pgon_average(&ctx, &all, &[true, false])?.value;
            let ward = (0..n).map(|y| ctx.entry(y, y).im).sum::<f64>() / (n as f64 * n as f64 * eta);
            out.push(((full.re - ward).abs().max(full.im.abs()), 0.0));
            Ok(out)
        })?;
        let k = rows.len();
        for (i, (p, _)) in shapes.iter().enumerate() {
            let (mean, se) = mean_stderr(&rows.iter().map(|r| r[i].0).collect::<Vec<_>>());
            let scale = rows[0][i].1;
            rep.push(at(&format!("pgon_abs_p{p}"), eta), mean, Some(se), k, "mean |p-gon average| over the box");
            rep.push(at(&format!("pgon_scale_p{p}"), eta), scale, None, sites.len(), "g(K, W, eta)^{p-1}, K = |I|^{1/d}");
            rep.push(at(&format!("pgon_ratio_p{p}"), eta), mean / scale, None, k, "mean |p-gon average| / scale");
        }
        let last = shapes.len();
        rep.push(at("pgon_ward_gap_max", eta), max_of(rows.iter().map(|r| r[last].0)), None, k, "|N^{-2} sum |G_xy|^2 - (N eta)^{-1} N^{-1} sum Im G_yy|");
    }
    Ok(Outcome { report: rep, artifacts: vec![] })
}
