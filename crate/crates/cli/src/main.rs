use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use rbm_core::harness::{self, ExperimentConfig};
use rbm_core::{Error, Result};

/// Run a random band matrix experiment, or replay one from its manifest.
///
/// Settings come from built-in defaults, then the `--config` file (flat
/// `key=value` lines), then the flags given here.
#[derive(Parser, Debug)]
#[command(name = "rbm", version)]
struct Args {
    /// profile, wardcheck, texp2, propcheck, locallaw, universality, que, graph, pgon, or replay
    experiment: String,
    /// Manifest to replay (only with `replay`)
    manifest: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    dim: Option<String>,
    #[arg(long)]
    size: Option<String>,
    #[arg(long)]
    band: Option<String>,
    #[arg(long)]
    psi: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    energy: Option<String>,
    /// One value or a comma-separated grid
    #[arg(long, allow_hyphen_values = true)]
    eta: Option<String>,
    #[arg(long)]
    trials: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    flow_time: Option<String>,
    #[arg(long)]
    kappa: Option<String>,
    #[arg(long)]
    delta0: Option<String>,
    /// External sites a,b1,b2 as linear indices
    #[arg(long)]
    sites: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    format: Option<String>,
    /// Worker threads; 0 uses every core
    #[arg(long, default_value_t = 0)]
    threads: usize,
}

impl Args {
    fn overrides(&self) -> BTreeMap<String, String> {
        let pairs = [
            ("dim", &self.dim),
            ("size", &self.size),
            ("band", &self.band),
            ("psi", &self.psi),
            ("energy", &self.energy),
            ("eta", &self.eta),
            ("trials", &self.trials),
            ("seed", &self.seed),
            ("flow-time", &self.flow_time),
            ("kappa", &self.kappa),
            ("delta0", &self.delta0),
            ("sites", &self.sites),
            ("format", &self.format),
        ];
        let mut map: BTreeMap<String, String> =
            pairs.into_iter().filter_map(|(k, v)| v.clone().map(|v| (k.to_string(), v))).collect();
        if let Some(out) = &self.out {
            map.insert("out".into(), out.display().to_string());
        }
        map
    }

    fn config(&self) -> Result<ExperimentConfig> {
        let mut cfg = ExperimentConfig::new(self.experiment.parse()?);
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path)?;
            let mut file = ExperimentConfig::parse_kv(&text)?;
            file.remove("experiment");
            cfg.apply(&file)?;
        }
        cfg.apply(&self.overrides())?;
        Ok(cfg)
    }
}

fn print_report(report: &rbm_core::stats::StatReport) {
    for m in &report.metrics {
        match m.stderr {
            Some(se) => println!("{} = {:e} ± {:e}", m.name, m.value, se),
            None => println!("{} = {:e}", m.name, m.value),
        }
    }
}

fn main_inner(args: Args) -> Result<()> {
    if args.experiment == "replay" {
        let manifest = args
            .manifest
            .as_deref()
            .ok_or_else(|| Error::Validation(vec!["replay needs a manifest path".into()]))?;
        let replay = harness::replay(manifest, args.out.as_deref(), args.threads)?;
        println!("replay of {} matches all {} metrics", manifest.display(), replay.record.report.metrics.len());
        return Ok(());
    }
    if args.manifest.is_some() {
        return Err(Error::Validation(vec!["unexpected positional argument after the experiment".into()]));
    }
    let cfg = args.config()?;
    let record = harness::execute(&cfg, args.threads)?;
    print_report(&record.report);
    log::info!("wrote {} in {:.2}s", cfg.out.display(), record.wall_time);
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match main_inner(Args::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            match &e {
                Error::Validation(items) => {
                    eprintln!("error: invalid configuration");
                    for item in items {
                        eprintln!("  {item}");
                    }
                }
                other => eprintln!("error: {other}"),
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
