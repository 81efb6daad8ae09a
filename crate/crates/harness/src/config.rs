//! Flat `key = value` experiment configs.
//!
//! One assignment per line, `#` starts a comment, lists are comma separated.
//! Every key must belong to the chosen kind; anything else is rejected with
//! the offending key and line.

use simmap_core::bounds::MappingKind;
use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ExperimentKind {
    Validate,
    TrotterSweep,
    FloquetSweep,
    SwSweep,
    Bounds,
    FtOverhead,
    Fit,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 7] = [
        ExperimentKind::Validate,
        ExperimentKind::TrotterSweep,
        ExperimentKind::FloquetSweep,
        ExperimentKind::SwSweep,
        ExperimentKind::Bounds,
        ExperimentKind::FtOverhead,
        ExperimentKind::Fit,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Validate => "validate",
            ExperimentKind::TrotterSweep => "trotter-sweep",
            ExperimentKind::FloquetSweep => "floquet-sweep",
            ExperimentKind::SwSweep => "sw-sweep",
            ExperimentKind::Bounds => "bounds",
            ExperimentKind::FtOverhead => "ft-overhead",
            ExperimentKind::Fit => "fit",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    Open,
    Ring,
}

impl Boundary {
    pub fn name(self) -> &'static str {
        match self {
            Boundary::Open => "open",
            Boundary::Ring => "ring",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Placement {
    AllModes,
    TouchedModes,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reduce {
    None,
    /// keep the smallest y for each distinct x
    Min,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub key: Option<String>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.line, &self.key) {
            (Some(l), Some(k)) => write!(f, "line {l}: key `{k}`: {}", self.message),
            (Some(l), None) => write!(f, "line {l}: {}", self.message),
            (None, Some(k)) => write!(f, "key `{k}`: {}", self.message),
            (None, None) => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

fn err(line: Option<usize>, key: Option<&str>, message: impl Into<String>) -> ConfigError {
    ConfigError { line, key: key.map(str::to_string), message: message.into() }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub n: Vec<usize>,
    /// Trotter step counts
    pub steps: Vec<usize>,
    pub uptau: Vec<f64>,
    /// per-layer probability (Trotter, validate) or continuous rate γ
    pub noise: Vec<f64>,
    /// continuous rate for the validate kind's driven case
    pub gamma: Vec<f64>,
    pub p_order: Vec<usize>,
    pub h: f64,
    pub g: f64,
    pub h0: f64,
    pub h1: f64,
    pub g0: f64,
    pub g1: f64,
    pub tau: f64,
    pub placement: Placement,
    pub boundary: Boundary,
    pub tol: f64,
    pub seed: u64,
    pub output: Option<PathBuf>,
    pub threads: Option<usize>,
    pub mapping: MappingKind,
    pub d: usize,
    pub c_map: f64,
    pub c_noise: f64,
    pub xi0: f64,
    pub xi_th: f64,
    pub t_code: u32,
    pub levels: u32,
    pub delta: Vec<f64>,
    pub input: Option<PathBuf>,
    pub x_column: String,
    pub y_column: String,
    pub filter: Vec<(String, String)>,
    pub reduce: Reduce,
}

impl ExperimentConfig {
    /// Defaults for `kind`; grids that have no sensible default are empty.
    pub fn defaults(kind: ExperimentKind) -> Self {
        let (n, p_order, tau, noise) = match kind {
            ExperimentKind::Validate => (vec![2, 3, 4, 5, 6], vec![2], 1.0, vec![0.05]),
            ExperimentKind::TrotterSweep => (vec![], vec![], 1.0, vec![0.0]),
            ExperimentKind::FloquetSweep => (vec![], vec![], 1.5, vec![0.0]),
            ExperimentKind::SwSweep => (vec![6], vec![0], 2.0, vec![0.0]),
            ExperimentKind::Bounds => (vec![], vec![], 1.0, vec![]),
            ExperimentKind::FtOverhead => (vec![], vec![2], 1.0, vec![]),
            ExperimentKind::Fit => (vec![], vec![], 1.0, vec![]),
        };
        ExperimentConfig {
            kind,
            n,
            steps: if kind == ExperimentKind::Validate { vec![4] } else { vec![] },
            uptau: if kind == ExperimentKind::Validate { vec![0.25] } else { vec![] },
            noise,
            gamma: vec![0.01],
            p_order,
            h: 1.0,
            g: 0.5,
            h0: 1.0,
            h1: 0.5,
            g0: 1.0,
            g1: 0.5,
            tau,
            placement: Placement::AllModes,
            boundary: Boundary::Open,
            tol: 1e-10,
            seed: 0,
            output: None,
            threads: None,
            mapping: MappingKind::Trotter,
            d: 1,
            c_map: 1.0,
            c_noise: 1.0,
            xi0: 1e-3,
            xi_th: 1e-2,
            t_code: 1,
            levels: 2,
            delta: vec![],
            input: None,
            x_column: String::new(),
            y_column: String::new(),
            filter: vec![],
            reduce: Reduce::None,
        }
    }
}

/// (key, kinds it applies to, required for those kinds)
struct KeySpec {
    key: &'static str,
    kinds: &'static [ExperimentKind],
    required: &'static [ExperimentKind],
}

use ExperimentKind as K;
const SWEEPS: &[K] = &[K::Validate, K::TrotterSweep, K::FloquetSweep, K::SwSweep, K::Bounds, K::FtOverhead, K::Fit];

const KEYS: &[KeySpec] = &[
    KeySpec { key: "kind", kinds: SWEEPS, required: &[] },
    KeySpec { key: "N", kinds: &[K::Validate, K::TrotterSweep, K::FloquetSweep, K::SwSweep], required: &[K::TrotterSweep, K::FloquetSweep] },
    KeySpec { key: "T", kinds: &[K::Validate, K::TrotterSweep], required: &[K::TrotterSweep] },
    KeySpec { key: "uptau", kinds: &[K::Validate, K::FloquetSweep, K::SwSweep], required: &[K::FloquetSweep, K::SwSweep] },
    KeySpec { key: "noise", kinds: &[K::Validate, K::TrotterSweep, K::FloquetSweep, K::SwSweep, K::Bounds], required: &[K::Bounds] },
    KeySpec { key: "gamma", kinds: &[K::Validate], required: &[] },
    KeySpec {
        key: "p_order",
        kinds: &[K::Validate, K::TrotterSweep, K::FloquetSweep, K::SwSweep, K::Bounds, K::FtOverhead],
        required: &[K::TrotterSweep, K::FloquetSweep, K::Bounds],
    },
    KeySpec { key: "h", kinds: &[K::Validate, K::TrotterSweep], required: &[] },
    KeySpec { key: "g", kinds: &[K::Validate, K::TrotterSweep], required: &[] },
    KeySpec { key: "h0", kinds: &[K::Validate, K::FloquetSweep], required: &[] },
    KeySpec { key: "h1", kinds: &[K::Validate, K::FloquetSweep], required: &[] },
    KeySpec { key: "g0", kinds: &[K::Validate, K::FloquetSweep], required: &[] },
    KeySpec { key: "g1", kinds: &[K::Validate, K::FloquetSweep], required: &[] },
    KeySpec { key: "tau", kinds: &[K::Validate, K::TrotterSweep, K::FloquetSweep, K::SwSweep, K::Bounds, K::FtOverhead], required: &[] },
    KeySpec { key: "noise_placement", kinds: &[K::Validate, K::TrotterSweep], required: &[] },
    KeySpec { key: "boundary", kinds: &[K::TrotterSweep, K::FloquetSweep], required: &[] },
    KeySpec { key: "tol", kinds: &[K::Validate, K::FloquetSweep, K::SwSweep], required: &[] },
    KeySpec { key: "seed", kinds: SWEEPS, required: &[] },
    KeySpec { key: "output", kinds: SWEEPS, required: &[] },
    KeySpec { key: "threads", kinds: SWEEPS, required: &[] },
    KeySpec { key: "mapping", kinds: &[K::Bounds], required: &[K::Bounds] },
    KeySpec { key: "d", kinds: &[K::Bounds, K::FtOverhead], required: &[] },
    KeySpec { key: "c_map", kinds: &[K::Bounds, K::FtOverhead], required: &[] },
    KeySpec { key: "c_noise", kinds: &[K::Bounds, K::FtOverhead], required: &[] },
    KeySpec { key: "xi0", kinds: &[K::FtOverhead], required: &[K::FtOverhead] },
    KeySpec { key: "xi_th", kinds: &[K::FtOverhead], required: &[] },
    KeySpec { key: "t_code", kinds: &[K::FtOverhead], required: &[] },
    KeySpec { key: "levels", kinds: &[K::FtOverhead], required: &[] },
    KeySpec { key: "delta", kinds: &[K::FtOverhead], required: &[K::FtOverhead] },
    KeySpec { key: "input", kinds: &[K::Fit], required: &[K::Fit] },
    KeySpec { key: "x_column", kinds: &[K::Fit], required: &[K::Fit] },
    KeySpec { key: "y_column", kinds: &[K::Fit], required: &[K::Fit] },
    KeySpec { key: "filter", kinds: &[K::Fit], required: &[] },
    KeySpec { key: "reduce", kinds: &[K::Fit], required: &[] },
];

/// One line per key, for `--help`.
pub fn schema_help() -> String {
    let mut s = String::new();
    for k in KEYS {
        let kinds: Vec<&str> = k.kinds.iter().map(|k| k.name()).collect();
        let req: Vec<&str> = k.required.iter().map(|k| k.name()).collect();
        s += &format!("  {:<16} {}", k.key, kinds.join("|"));
        if !req.is_empty() {
            s += &format!("  (required: {})", req.join("|"));
        }
        s.push('\n');
    }
    s
}

fn parse_one<T: FromStr>(key: &str, line: usize, v: &str) -> Result<T, ConfigError> {
    v.trim().parse().map_err(|_| err(Some(line), Some(key), format!("cannot parse `{}` as {}", v.trim(), std::any::type_name::<T>())))
}

fn parse_list<T: FromStr>(key: &str, line: usize, v: &str) -> Result<Vec<T>, ConfigError> {
    let out: Vec<T> = v.split(',').map(|x| parse_one(key, line, x)).collect::<Result<_, _>>()?;
    if out.is_empty() {
        return Err(err(Some(line), Some(key), "empty list"));
    }
    Ok(out)
}

/// Parse config text. `expected` is the kind implied by the CLI subcommand;
/// a `kind` key, if present, must agree with it.
pub fn parse_config(text: &str, expected: Option<ExperimentKind>) -> Result<ExperimentConfig, ConfigError> {
    let mut entries: BTreeMap<String, (usize, String)> = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let Some((k, v)) = body.split_once('=') else {
            return Err(err(Some(line), None, format!("expected `key = value`, found `{body}`")));
        };
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() || k.contains(char::is_whitespace) {
            return Err(err(Some(line), None, format!("malformed key in `{body}`")));
        }
        if v.is_empty() {
            return Err(err(Some(line), Some(k), "missing value"));
        }
        if !KEYS.iter().any(|s| s.key == k) {
            return Err(err(Some(line), Some(k), "unknown key"));
        }
        if let Some((first, _)) = entries.get(k) {
            return Err(err(Some(line), Some(k), format!("duplicate key (first set on line {first})")));
        }
        entries.insert(k.to_string(), (line, v.to_string()));
    }

    let kind = match (entries.get("kind"), expected) {
        (Some((line, v)), exp) => {
            let k = ExperimentKind::parse(v).ok_or_else(|| err(Some(*line), Some("kind"), format!("unknown kind `{v}`")))?;
            if let Some(e) = exp {
                if e != k {
                    return Err(err(Some(*line), Some("kind"), format!("config is `{k}` but the subcommand is `{e}`")));
                }
            }
            k
        }
        (None, Some(e)) => e,
        (None, None) => return Err(err(None, Some("kind"), "missing required key")),
    };

    let mut cfg = ExperimentConfig::defaults(kind);
    for spec in KEYS {
        match entries.get(spec.key) {
            Some((line, _)) if !spec.kinds.contains(&kind) => {
                return Err(err(Some(*line), Some(spec.key), format!("not used by kind `{kind}`")));
            }
            _ => {}
        }
    }

    for (key, (line, v)) in &entries {
        let (key, line) = (key.as_str(), *line);
        match key {
            "kind" => {}
            "N" => cfg.n = parse_list(key, line, v)?,
            "T" => cfg.steps = parse_list(key, line, v)?,
            "uptau" => cfg.uptau = parse_list(key, line, v)?,
            "noise" => cfg.noise = parse_list(key, line, v)?,
            "gamma" => cfg.gamma = parse_list(key, line, v)?,
            "p_order" => cfg.p_order = parse_list(key, line, v)?,
            "h" => cfg.h = parse_one(key, line, v)?,
            "g" => cfg.g = parse_one(key, line, v)?,
            "h0" => cfg.h0 = parse_one(key, line, v)?,
            "h1" => cfg.h1 = parse_one(key, line, v)?,
            "g0" => cfg.g0 = parse_one(key, line, v)?,
            "g1" => cfg.g1 = parse_one(key, line, v)?,
            "tau" => cfg.tau = parse_one(key, line, v)?,
            "tol" => cfg.tol = parse_one(key, line, v)?,
            "seed" => cfg.seed = parse_one(key, line, v)?,
            "output" => cfg.output = Some(PathBuf::from(v)),
            "threads" => cfg.threads = Some(parse_one(key, line, v)?),
            "d" => cfg.d = parse_one(key, line, v)?,
            "c_map" => cfg.c_map = parse_one(key, line, v)?,
            "c_noise" => cfg.c_noise = parse_one(key, line, v)?,
            "xi0" => cfg.xi0 = parse_one(key, line, v)?,
            "xi_th" => cfg.xi_th = parse_one(key, line, v)?,
            "t_code" => cfg.t_code = parse_one(key, line, v)?,
            "levels" => cfg.levels = parse_one(key, line, v)?,
            "delta" => cfg.delta = parse_list(key, line, v)?,
            "input" => cfg.input = Some(PathBuf::from(v)),
            "x_column" => cfg.x_column = v.clone(),
            "y_column" => cfg.y_column = v.clone(),
            "noise_placement" => {
                cfg.placement = match v.as_str() {
                    "all" => Placement::AllModes,
                    "touched" => Placement::TouchedModes,
                    _ => return Err(err(Some(line), Some(key), "expected `all` or `touched`")),
                }
            }
            "boundary" => {
                cfg.boundary = match v.as_str() {
                    "open" => Boundary::Open,
                    "ring" => Boundary::Ring,
                    _ => return Err(err(Some(line), Some(key), "expected `open` or `ring`")),
                }
            }
            "mapping" => {
                cfg.mapping = match v.as_str() {
                    "trotter" => MappingKind::Trotter,
                    "floquet-magnus" => MappingKind::FloquetMagnus,
                    "schrieffer-wolff" => MappingKind::SchriefferWolff,
                    _ => return Err(err(Some(line), Some(key), "expected `trotter`, `floquet-magnus` or `schrieffer-wolff`")),
                }
            }
            "reduce" => {
                cfg.reduce = match v.as_str() {
                    "none" => Reduce::None,
                    "min" => Reduce::Min,
                    _ => return Err(err(Some(line), Some(key), "expected `none` or `min`")),
                }
            }
            "filter" => {
                cfg.filter = v
                    .split(',')
                    .map(|c| {
                        c.split_once(':')
                            .map(|(a, b)| (a.trim().to_string(), b.trim().to_string()))
                            .filter(|(a, b)| !a.is_empty() && !b.is_empty())
                            .ok_or_else(|| err(Some(line), Some(key), format!("expected `column:value`, found `{}`", c.trim())))
                    })
                    .collect::<Result<_, _>>()?
            }
            _ => unreachable!("key table and match arms disagree on `{key}`"),
        }
    }
    if let Some(spec) = KEYS.iter().find(|s| s.required.contains(&kind) && !entries.contains_key(s.key)) {
        return Err(err(None, Some(spec.key), format!("missing required key for kind `{kind}`")));
    }
    check_values(&cfg, &entries)?;
    Ok(cfg)
}

fn check_values(cfg: &ExperimentConfig, entries: &BTreeMap<String, (usize, String)>) -> Result<(), ConfigError> {
    let at = |key: &str| entries.get(key).map(|(l, _)| *l);
    let bad = |key: &str, msg: &str| Err(err(at(key), Some(key), msg.to_string()));
    if cfg.kind == ExperimentKind::Validate && cfg.n.iter().any(|&n| !(2..=6).contains(&n)) {
        return bad("N", "validate runs the dense oracle and needs 2 ≤ N ≤ 6");
    }
    if cfg.kind == ExperimentKind::SwSweep && cfg.n.iter().any(|&n| n < 4 || n % 2 != 0 || n > 12) {
        return bad("N", "the perturbative demo needs an even N between 4 and 12");
    }
    if cfg.n.contains(&0) {
        return bad("N", "sizes must be positive");
    }
    if cfg.steps.contains(&0) {
        return bad("T", "step counts must be positive");
    }
    if cfg.uptau.iter().any(|&u| !(u > 0.0 && u.is_finite())) {
        return bad("uptau", "periods must be positive");
    }
    if cfg.noise.iter().any(|&x| !(x >= 0.0 && x.is_finite())) || cfg.gamma.iter().any(|&x| !(x >= 0.0 && x.is_finite())) {
        return bad(if at("noise").is_some() { "noise" } else { "gamma" }, "noise values must be non-negative");
    }
    if cfg.kind == ExperimentKind::TrotterSweep && cfg.noise.iter().any(|&x| x > 1.0) {
        return bad("noise", "per-layer probabilities must lie in [0, 1]");
    }
    if cfg.kind == ExperimentKind::Bounds && cfg.noise.iter().any(|&x| x <= 0.0) {
        return bad("noise", "tradeoffs need a positive noise rate");
    }
    if !(cfg.tau > 0.0 && cfg.tau.is_finite()) {
        return bad("tau", "must be positive");
    }
    if cfg.tol.is_nan() || cfg.tol <= 0.0 {
        return bad("tol", "must be positive");
    }
    if cfg.threads == Some(0) {
        return bad("threads", "must be at least 1");
    }
    Ok(())
}

pub fn load_config(path: &Path, expected: Option<ExperimentKind>) -> Result<ExperimentConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| err(None, None, format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text, expected)
}
