//! Experiment configuration and its flat `key=value` text form.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profile::ShapeFunction;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Experiment {
    Profile,
    Wardcheck,
    Texp2,
    Propcheck,
    Locallaw,
    Universality,
    Que,
    Graph,
    Pgon,
}

impl Experiment {
    pub const ALL: [Experiment; 9] = [
        Experiment::Profile,
        Experiment::Wardcheck,
        Experiment::Texp2,
        Experiment::Propcheck,
        Experiment::Locallaw,
        Experiment::Universality,
        Experiment::Que,
        Experiment::Graph,
        Experiment::Pgon,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Profile => "profile",
            Experiment::Wardcheck => "wardcheck",
            Experiment::Texp2 => "texp2",
            Experiment::Propcheck => "propcheck",
            Experiment::Locallaw => "locallaw",
            Experiment::Universality => "universality",
            Experiment::Que => "que",
            Experiment::Graph => "graph",
            Experiment::Pgon => "pgon",
        }
    }

    /// Experiments that materialize dense `N x N` matrices.
    pub fn is_dense(self) -> bool {
        self != Experiment::Profile
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = Experiment::ALL.iter().map(|e| e.name()).collect();
                Error::Validation(vec![format!("unknown experiment {s:?}, expected one of {}", names.join(", "))])
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

impl OutputFormat {
    pub fn metrics_file(self) -> &'static str {
        match self {
            OutputFormat::Csv => "metrics.csv",
            OutputFormat::Json => "metrics.json",
        }
    }
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            _ => Err(Error::Validation(vec![format!("format must be csv or json, got {s:?}")])),
        }
    }
}

impl fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        })
    }
}

pub const MAX_LOG2_SITES: f64 = 30.0;
pub const MAX_DENSE_SITES: usize = 8192;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub dim: usize,
    pub size: usize,
    pub band: f64,
    pub psi: String,
    pub energy: f64,
    pub eta: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub flow_time: f64,
    /// Bulk window `|lambda| <= 2 - kappa`.
    pub kappa: f64,
    pub delta0: f64,
    /// External sites `(a, b1, b2)` as linear indices.
    pub sites: [usize; 3],
    pub out: PathBuf,
    pub format: OutputFormat,
}

impl ExperimentConfig {
    pub fn new(experiment: Experiment) -> Self {
        ExperimentConfig {
            experiment,
            dim: 1,
            size: 32,
            band: 4.0,
            psi: "gaussian".into(),
            energy: 0.0,
            eta: vec![0.1],
            trials: 10,
            seed: 0,
            flow_time: 0.0,
            kappa: 0.5,
            delta0: 0.1,
            sites: [0, 0, 0],
            out: PathBuf::from("out"),
            format: OutputFormat::Json,
        }
    }

    pub fn sites_count(&self) -> Option<usize> {
        u32::try_from(self.dim).ok().and_then(|d| self.size.checked_pow(d))
    }

    pub const KEYS: [&'static str; 15] = [
        "experiment", "dim", "size", "band", "psi", "energy", "eta", "trials", "seed", "flow-time", "kappa",
        "delta0", "sites", "out", "format",
    ];

    /// Applies one `key=value` setting, leaving other fields untouched.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let bad = |what: &str| Error::Validation(vec![format!("{key}: cannot parse {value:?} as {what}")]);
        let v = value.trim();
        match key {
            "experiment" => self.experiment = v.parse()?,
            "dim" => self.dim = v.parse().map_err(|_| bad("an integer"))?,
            "size" => self.size = v.parse().map_err(|_| bad("an integer"))?,
            "band" => self.band = v.parse().map_err(|_| bad("a number"))?,
            "psi" => self.psi = v.to_string(),
            "energy" => self.energy = v.parse().map_err(|_| bad("a number"))?,
            "eta" => {
                self.eta = v
                    .split(',')
                    .map(|x| x.trim().parse::<f64>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| bad("a comma-separated list of numbers"))?
            }
            "trials" => self.trials = v.parse().map_err(|_| bad("an integer"))?,
            "seed" => self.seed = v.parse().map_err(|_| bad("a 64-bit unsigned integer"))?,
            "flow-time" | "flow_time" => self.flow_time = v.parse().map_err(|_| bad("a number"))?,
            "kappa" => self.kappa = v.parse().map_err(|_| bad("a number"))?,
            "delta0" => self.delta0 = v.parse().map_err(|_| bad("a number"))?,
            "sites" => {
                let parts: Vec<usize> = v
                    .split(',')
                    .map(|x| x.trim().parse::<usize>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| bad("three comma-separated site indices"))?;
                self.sites = parts.try_into().map_err(|_| bad("three comma-separated site indices"))?;
            }
            "out" => self.out = PathBuf::from(v),
            "format" => self.format = v.parse()?,
            _ => return Err(Error::Validation(vec![format!("unknown key {key:?}")])),
        }
        Ok(())
    }

    /// Parses `key=value` lines; blank lines and `#` comments are skipped.
    pub fn parse_kv(text: &str) -> Result<BTreeMap<String, String>> {
        let mut map = BTreeMap::new();
        let mut errors = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            match line.split_once('=') {
                Some((k, v)) => {
                    map.insert(k.trim().to_string(), v.trim().to_string());
                }
                None => errors.push(format!("line {}: expected key=value, got {line:?}", i + 1)),
            }
        }
        if errors.is_empty() {
            Ok(map)
        } else {
            Err(Error::Validation(errors))
        }
    }

    /// Builds a config from `key=value` text; `experiment` is required.
    pub fn from_kv_str(text: &str) -> Result<Self> {
        let map = Self::parse_kv(text)?;
        let exp = map
            .get("experiment")
            .ok_or_else(|| Error::Validation(vec!["missing key experiment".into()]))?
            .parse()?;
        let mut cfg = ExperimentConfig::new(exp);
        cfg.apply(&map)?;
        Ok(cfg)
    }

    /// Applies every entry, collecting all parse failures.
    pub fn apply(&mut self, map: &BTreeMap<String, String>) -> Result<()> {
        let mut errors = Vec::new();
        for (k, v) in map {
            if let Err(Error::Validation(mut e)) = self.set(k, v) {
                errors.append(&mut e);
            }
        }
        if errors.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(errors))
        }
    }

    pub fn to_kv_string(&self) -> String {
        let eta: Vec<String> = self.eta.iter().map(|e| format!("{e:?}")).collect();
        format!(
            "experiment={}\ndim={}\nsize={}\nband={:?}\npsi={}\nenergy={:?}\neta={}\ntrials={}\nseed={}\nflow-time={:?}\nkappa={:?}\ndelta0={:?}\nsites={},{},{}\nout={}\nformat={}\n",
            self.experiment,
            self.dim,
            self.size,
            self.band,
            self.psi,
            self.energy,
            eta.join(","),
            self.trials,
            self.seed,
            self.flow_time,
            self.kappa,
            self.delta0,
            self.sites[0],
            self.sites[1],
            self.sites[2],
            self.out.display(),
            self.format,
        )
    }

    /// Checks every field; capacity guards are reported separately from field errors.
    pub fn validate(&self) -> Result<()> {
        let mut errors = Vec::new();
        if self.dim == 0 {
            errors.push("dim must be >= 1".to_string());
        }
        if self.size < 2 {
            errors.push(format!("size must be >= 2, got {}", self.size));
        }
        if !(self.band >= 1.0) || !self.band.is_finite() {
            errors.push(format!("band must be a finite number >= 1, got {}", self.band));
        }
        if ShapeFunction::by_name(&self.psi).is_err() {
            errors.push(format!("unknown psi {:?}, expected gaussian or compact-bump", self.psi));
        }
        if !(self.energy.abs() < 2.0) {
            errors.push(format!("energy must satisfy |E| < 2, got {}", self.energy));
        }
        if self.eta.is_empty() {
            errors.push("eta needs at least one value".into());
        }
        for &e in &self.eta {
            if !(e > 0.0) || !e.is_finite() {
                errors.push(format!("eta must be finite and > 0, got {e}"));
            }
        }
        if self.trials == 0 {
            errors.push("trials must be >= 1".into());
        }
        if !(self.flow_time >= 0.0) || !self.flow_time.is_finite() {
            errors.push(format!("flow-time must be finite and >= 0, got {}", self.flow_time));
        }
        if !(self.kappa > 0.0 && self.kappa < 2.0) {
            errors.push(format!("kappa must lie in (0, 2), got {}", self.kappa));
        }
        if !(self.delta0 > 0.0) || !self.delta0.is_finite() {
            errors.push(format!("delta0 must be finite and > 0, got {}", self.delta0));
        }
        if !errors.is_empty() {
            return Err(Error::Validation(errors));
        }

        let log2 = self.dim as f64 * (self.size as f64).log2();
        if log2 > MAX_LOG2_SITES {
            return Err(Error::capacity("lattice sites", 2f64.powf(log2) as u128, 1u128 << 30));
        }
        let n = self.sites_count().unwrap_or(usize::MAX);
        if self.experiment.is_dense() && n > MAX_DENSE_SITES {
            return Err(Error::capacity("dense matrix dimension", n as u128, MAX_DENSE_SITES as u128));
        }
        if let Some(s) = self.sites.iter().find(|&&s| s >= n) {
            return Err(Error::Validation(vec![format!("site index {s} outside {n} sites")]));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn kv_round_trip_and_overrides() {
        let mut cfg = ExperimentConfig::new(Experiment::Locallaw);
        cfg.eta = vec![0.1, 0.3, 1.0];
        cfg.seed = u64::MAX;
        cfg.sites = [1, 2, 3];
        let back = ExperimentConfig::from_kv_str(&cfg.to_kv_string()).unwrap();
        assert_eq!(back, cfg);

        let text = "# comment\nexperiment = wardcheck\n\ndim=2\nsize=8\neta=0.5,1\n";
        let mut cfg = ExperimentConfig::from_kv_str(text).unwrap();
        assert_eq!((cfg.dim, cfg.size, cfg.eta.clone()), (2, 8, vec![0.5, 1.0]));
        cfg.set("size", "16").unwrap();
        assert_eq!(cfg.size, 16);
    }

    #[test]
    fn parse_errors_are_collected() {
        let err = ExperimentConfig::from_kv_str("experiment=que\ndim=x\nbogus=1\nnot a pair").unwrap_err();
        assert!(matches!(err, Error::Validation(ref v) if v.len() == 1));
        let err = ExperimentConfig::from_kv_str("experiment=que\ndim=x\nbogus=1").unwrap_err();
        assert!(matches!(err, Error::Validation(ref v) if v.len() == 2));
        assert!(ExperimentConfig::from_kv_str("dim=1").is_err());
        assert!(matches!("nope".parse::<Experiment>(), Err(Error::Validation(_))));
    }

    #[test]
    fn validation_lists_every_field() {
        let mut cfg = ExperimentConfig::new(Experiment::Que);
        cfg.energy = 2.5;
        cfg.eta = vec![0.1, -1.0];
        cfg.band = 0.5;
        cfg.psi = "box".into();
        match cfg.validate() {
            Err(Error::Validation(v)) => assert_eq!(v.len(), 4, "{v:?}"),
            other => panic!("{other:?}"),
        }
        assert_eq!(cfg.validate().unwrap_err().exit_code(), 2);
    }

    #[test]
    fn capacity_guards() {
        let mut cfg = ExperimentConfig::new(Experiment::Locallaw);
        cfg.dim = 3;
        cfg.size = 32;
        let err = cfg.validate().unwrap_err();
        assert!(matches!(err, Error::Capacity { .. }));
        assert_eq!(err.exit_code(), 3);
        cfg.experiment = Experiment::Profile;
        assert!(cfg.validate().is_ok());
        cfg.dim = 7;
        cfg.size = 32;
        assert!(matches!(cfg.validate(), Err(Error::Capacity { .. })));
        cfg.dim = 3;
        cfg.size = 1024;
        assert!(cfg.validate().is_ok());
    }

    proptest! {
        #[test]
        fn kv_round_trip(dim in 1usize..4, size in 2usize..64, band in 1.0f64..50.0, energy in -1.99f64..1.99,
                         eta in prop::collection::vec(1e-6f64..10.0, 1..4), trials in 1usize..1000, seed in any::<u64>(),
                         t in 0.0f64..5.0, exp in 0usize..9, json in any::<bool>()) {
            let mut cfg = ExperimentConfig::new(Experiment::ALL[exp]);
            cfg.dim = dim;
            cfg.size = size;
            cfg.band = band;
            cfg.energy = energy;
            cfg.eta = eta;
            cfg.trials = trials;
            cfg.seed = seed;
            cfg.flow_time = t;
            cfg.format = if json { OutputFormat::Json } else { OutputFormat::Csv };
            prop_assert_eq!(ExperimentConfig::from_kv_str(&cfg.to_kv_string()).unwrap(), cfg.clone());
            let json = serde_json::to_string(&cfg).unwrap();
            prop_assert_eq!(serde_json::from_str::<ExperimentConfig>(&json).unwrap(), cfg);
        }
    }
}
