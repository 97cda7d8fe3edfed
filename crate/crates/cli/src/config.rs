use std::collections::BTreeMap;
use std::str::FromStr;

use mshape_core::acceptance::DEFAULT_SEED;
use mshape_core::model::{by_name, CATALOG_NAMES};
use mshape_core::Payoff;
use serde::Serialize;

use crate::{Flags, Kind};

const KEYS: [&str; 17] = [
    "process", "payoff", "strike", "k", "K", "nt", "nx", "T", "xpad", "theta", "paths", "pairs", "seed", "tol",
    "binwidth", "min-count", "out",
];

/// Fully resolved run parameters. Serialized into every output header.
#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    #[serde(serialize_with = "kind_name")]
    pub subcommand: Kind,
    pub process: String,
    pub payoff: String,
    pub strike: f64,
    pub k: Option<f64>,
    #[serde(rename = "K")]
    pub big_k: Option<f64>,
    pub nt: usize,
    pub nx: usize,
    #[serde(rename = "T")]
    pub horizon: f64,
    pub xpad: f64,
    pub theta: f64,
    pub paths: usize,
    pub pairs: usize,
    pub seed: u64,
    pub tol: f64,
    pub binwidth: f64,
    pub min_count: usize,
    #[serde(skip)]
    pub out: String,
    #[serde(skip)]
    pub events: bool,
}

fn kind_name<S: serde::Serializer>(k: &Kind, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(k.name())
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Simulate => "simulate",
            Kind::Condexp => "condexp",
            Kind::Verify => "verify",
            Kind::Support => "support",
            Kind::Couple => "couple",
            Kind::Counterexample => "counterexample",
            Kind::All => "all",
        }
    }

    fn uses_pde(self) -> bool {
        matches!(self, Kind::Condexp | Kind::Verify)
    }
}

/// Parse `key = value` lines; `#` starts a comment.
pub fn parse_config_file(text: &str) -> Result<BTreeMap<String, String>, String> {
    let mut map = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| format!("config line {}: expected key=value", n + 1))?;
        let key = key.trim().trim_start_matches("--");
        if !KEYS.contains(&key) {
            return Err(format!("config line {}: unknown key {key:?}", n + 1));
        }
        map.insert(key.to_string(), value.trim().to_string());
    }
    Ok(map)
}

struct Layer<'a> {
    file: &'a BTreeMap<String, String>,
}

impl Layer<'_> {
    fn get<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, String> {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.file.get(key) {
            None => Ok(None),
            Some(v) => v.parse().map(Some).map_err(|_| format!("config value for {key} is invalid: {v:?}")),
        }
    }
}

fn positive(name: &str, v: f64) -> Result<f64, String> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("--{name} must be positive, got {v}"))
    }
}

fn at_least(name: &str, v: usize, min: usize) -> Result<usize, String> {
    if v >= min {
        Ok(v)
    } else {
        Err(format!("--{name} must be at least {min}, got {v}"))
    }
}

impl RunConfig {
    /// Flags, then the config file, then `env_seed` for the seed, then
    /// defaults that depend on the subcommand.
    pub fn resolve(kind: Kind, flags: &Flags, env_seed: Option<&str>) -> Result<Self, String> {
        let file = match &flags.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read config {path}: {e}"))?;
                parse_config_file(&text)?
            }
            None => BTreeMap::new(),
        };
        let l = Layer { file: &file };

        let process = l.get(flags.process.clone(), "process")?.unwrap_or_else(|| {
            if kind == Kind::Counterexample { "counterexample" } else { "bm" }.to_string()
        });
        if by_name(&process).is_err() {
            return Err(format!("unknown process {process:?}; expected one of {}", CATALOG_NAMES.join(", ")));
        }
        let payoff = l.get(flags.payoff.clone(), "payoff")?.unwrap_or_else(|| "call".to_string());
        let strike = l.get(flags.strike, "strike")?.unwrap_or(0.0);
        let k = l.get(flags.k, "k")?;
        let big_k = l.get(flags.big_k, "K")?;
        let slopes = match (k, big_k) {
            (Some(a), Some(b)) if a > b => return Err(format!("--k {a} exceeds --K {b}")),
            (Some(a), Some(b)) => Some((a, b)),
            _ => None,
        };
        Payoff::from_name(&payoff, strike, slopes).map_err(|e| format!("{e}"))?;

        let path_kind = !kind.uses_pde();
        let counterexample = process == "counterexample";
        let horizon = l.get(flags.horizon, "T")?.unwrap_or(if counterexample { 2.0 } else { 1.0 });
        let default_nt = match kind {
            Kind::Counterexample => (100.0 * horizon).round() as usize,
            _ if path_kind => 200,
            _ => 400,
        };
        let nt = l.get(flags.nt, "nt")?.unwrap_or(default_nt);
        let nx = l.get(flags.nx, "nx")?.unwrap_or(400);
        let xpad = l.get(flags.xpad, "xpad")?.unwrap_or(8.0);
        let theta = l.get(flags.theta, "theta")?.unwrap_or(0.5);
        let paths = l.get(flags.paths, "paths")?.unwrap_or(match kind {
            Kind::Simulate => 1_000,
            Kind::Condexp => 100_000,
            _ => 10_000,
        });
        let pairs = l.get(flags.pairs, "pairs")?.unwrap_or(10_000);
        let env_seed = match env_seed {
            Some(s) => Some(s.trim().parse::<u64>().map_err(|_| format!("MSHAPE_SEED is not an integer: {s:?}"))?),
            None => None,
        };
        let seed = l.get(flags.seed, "seed")?.or(env_seed).unwrap_or(DEFAULT_SEED);
        let tol = l.get(flags.tol, "tol")?.unwrap_or(match kind {
            Kind::Condexp => 2e-3,
            Kind::Counterexample => mshape_core::acceptance::CONTINUITY_TOL,
            _ => 1e-6,
        });
        let binwidth = l.get(flags.binwidth, "binwidth")?.unwrap_or(if kind == Kind::Counterexample { 0.01 } else { 0.05 });
        let min_count = l.get(flags.min_count, "min-count")?.unwrap_or(mshape_core::support::DEFAULT_MIN_COUNT);
        let out = l.get(flags.out.clone(), "out")?.unwrap_or_else(|| "mshape-out".to_string());

        if !(0.0..=1.0).contains(&theta) {
            return Err(format!("--theta must lie in [0, 1], got {theta}"));
        }
        if tol.is_nan() || tol < 0.0 {
            return Err(format!("--tol must be non-negative, got {tol}"));
        }
        Ok(Self {
            subcommand: kind,
            process,
            payoff,
            strike,
            k,
            big_k,
            nt: at_least("nt", nt, 1)?,
            nx: at_least("nx", nx, 2)?,
            horizon: positive("T", horizon)?,
            xpad: positive("xpad", xpad)?,
            theta,
            paths: at_least("paths", paths, 2)?,
            pairs: at_least("pairs", pairs, 1)?,
            seed,
            tol,
            binwidth: positive("binwidth", binwidth)?,
            min_count: at_least("min-count", min_count, 1)?,
            out,
            events: flags.events,
        })
    }

    /// One-line JSON used as the header of every output file.
    pub fn header(&self) -> String {
        format!("config: {}", serde_json::to_string(self).expect("config serializes"))
    }
}
