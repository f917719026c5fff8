use std::collections::HashMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use sbelab_core::dynamics::{ModelConfig, ModelKind};
use sbelab_core::Error as CoreError;

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    Simulate,
    Invariance,
    DriftScaling,
    Cauchy,
    MollifierCauchy,
    ItoCheck,
    Uniqueness,
    Ns2dInvariance,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 8] = [
        ExperimentKind::Simulate,
        ExperimentKind::Invariance,
        ExperimentKind::DriftScaling,
        ExperimentKind::Cauchy,
        ExperimentKind::MollifierCauchy,
        ExperimentKind::ItoCheck,
        ExperimentKind::Uniqueness,
        ExperimentKind::Ns2dInvariance,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Simulate => "simulate",
            ExperimentKind::Invariance => "invariance",
            ExperimentKind::DriftScaling => "drift-scaling",
            ExperimentKind::Cauchy => "cauchy",
            ExperimentKind::MollifierCauchy => "mollifier-cauchy",
            ExperimentKind::ItoCheck => "ito-check",
            ExperimentKind::Uniqueness => "uniqueness",
            ExperimentKind::Ns2dInvariance => "ns2d-invariance",
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

/// Default weight exponent offset in the uniqueness norms.
pub const DEFAULT_EPSILON: f64 = 0.05;

/// A validated run description.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    pub model: ModelConfig,
    pub paths: usize,
    pub modes: Option<Vec<usize>>,
    pub m_list: Option<Vec<usize>>,
    pub eps_list: Option<Vec<f64>>,
    pub dt_list: Option<Vec<f64>>,
    pub seed: u64,
    pub out: PathBuf,
    pub epsilon: f64,
}

impl ExperimentSpec {
    /// Tracked 1d modes: the configured set, or `1..=min(N, cap)`.
    pub fn modes_or(&self, cap: usize) -> Vec<usize> {
        self.modes.clone().unwrap_or_else(|| (1..=self.model.n.min(cap)).collect())
    }

    /// Every parameter, defaults included, as `key = value` pairs.
    pub fn snapshot(&self) -> Vec<(&'static str, String)> {
        let m = &self.model;
        let list = |v: &Option<Vec<String>>| v.as_ref().map_or_else(|| "-".to_string(), |v| v.join(","));
        let ints = |v: &Option<Vec<usize>>| list(&v.as_ref().map(|v| v.iter().map(|x| x.to_string()).collect()));
        let reals = |v: &Option<Vec<f64>>| list(&v.as_ref().map(|v| v.iter().map(|x| x.to_string()).collect()));
        vec![
            ("experiment", self.kind.to_string()),
            ("model", m.kind.to_string()),
            ("theta", m.theta.to_string()),
            ("sigma", m.sigma.to_string()),
            ("N", m.n.to_string()),
            ("dt", m.dt.to_string()),
            ("T", m.horizon.to_string()),
            ("paths", self.paths.to_string()),
            ("stride", m.stride.to_string()),
            ("modes", ints(&self.modes)),
            ("M_list", ints(&self.m_list)),
            ("eps_list", reals(&self.eps_list)),
            ("dt_list", reals(&self.dt_list)),
            ("seed", self.seed.to_string()),
            ("out", self.out.display().to_string()),
            ("epsilon", self.epsilon.to_string()),
            ("noise_scale", m.noise_scale.to_string()),
        ]
    }
}

const KEYS: [&str; 16] = [
    "model",
    "theta",
    "sigma",
    "N",
    "dt",
    "T",
    "paths",
    "stride",
    "modes",
    "M_list",
    "eps_list",
    "dt_list",
    "seed",
    "out",
    "epsilon",
    "noise_scale",
];

const REQUIRED: [&str; 4] = ["model", "N", "dt", "T"];

pub fn parse_config(path: &Path, kind: ExperimentKind) -> Result<ExperimentSpec> {
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    parse_str(&text, &path.display().to_string(), kind)
}

struct Entries<'a> {
    file: &'a str,
    values: HashMap<&'a str, (usize, &'a str)>,
}

impl<'a> Entries<'a> {
    fn err(&self, line: usize, message: impl Into<String>) -> HarnessError {
        HarnessError::ConfigLine {
            file: self.file.to_string(),
            line,
            message: message.into(),
        }
    }

    fn line(&self, key: &str) -> Option<usize> {
        self.values.get(key).map(|&(l, _)| l)
    }

    fn get<T: FromStr>(&self, key: &str, what: &str) -> Result<Option<T>> {
        match self.values.get(key) {
            None => Ok(None),
            Some(&(line, raw)) => raw
                .parse::<T>()
                .map(Some)
                .map_err(|_| self.err(line, format!("`{key}` expects {what}, got `{raw}`"))),
        }
    }

    fn real(&self, key: &str) -> Result<Option<f64>> {
        let v: Option<f64> = self.get(key, "a real number")?;
        match v {
            Some(x) if !x.is_finite() => Err(self.err(self.line(key).unwrap_or(0), format!("`{key}` must be finite"))),
            _ => Ok(v),
        }
    }

    fn positive_int(&self, key: &str) -> Result<Option<usize>> {
        let v: Option<usize> = self.get(key, "a positive integer")?;
        if v == Some(0) {
            return Err(self.err(self.line(key).unwrap_or(0), format!("`{key}` must be positive")));
        }
        Ok(v)
    }

    fn list<T: FromStr>(&self, key: &str, what: &str, ok: impl Fn(&T) -> bool) -> Result<Option<Vec<T>>> {
        let Some(&(line, raw)) = self.values.get(key) else {
            return Ok(None);
        };
        let mut out = Vec::new();
        for item in raw.split(',').map(str::trim) {
            match item.parse::<T>() {
                Ok(v) if ok(&v) => out.push(v),
                _ => return Err(self.err(line, format!("`{key}` expects a comma-separated list of {what}, got `{item}`"))),
            }
        }
        Ok(Some(out))
    }
}

/// Parses the flat `key = value` format; `#` starts a comment.
pub fn parse_str(text: &str, file: &str, kind: ExperimentKind) -> Result<ExperimentSpec> {
    let mut entries = Entries { file, values: HashMap::new() };
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(entries.err(line, format!("expected `key = value`, got `{content}`")));
        };
        let (key, value) = (key.trim(), value.trim());
        if !KEYS.contains(&key) {
            return Err(entries.err(line, format!("unknown key `{key}`")));
        }
        if value.is_empty() {
            return Err(entries.err(line, format!("`{key}` has no value")));
        }
        if let Some(&(first, _)) = entries.values.get(key) {
            return Err(entries.err(line, format!("duplicate key `{key}` (lines {first} and {line})")));
        }
        entries.values.insert(key, (line, value));
    }
    for key in REQUIRED {
        if !entries.values.contains_key(key) {
            return Err(HarnessError::Config(format!("{file}: missing required key `{key}`")));
        }
    }

    let (model_line, model_raw) = entries.values["model"];
    let model_kind = ModelKind::parse(model_raw).ok_or_else(|| {
        entries.err(model_line, format!("unknown model `{model_raw}` (expected ou, sbe, ddt, ss_lattice or ns2d)"))
    })?;
    let theta = entries.real("theta")?.unwrap_or(1.0);
    if theta < 0.0 {
        return Err(entries.err(entries.line("theta").unwrap_or(0), "theta must be ≥ 0"));
    }
    let sigma = entries.real("sigma")?.unwrap_or(0.0);
    if sigma < 0.0 {
        return Err(entries.err(entries.line("sigma").unwrap_or(0), "sigma must be ≥ 0"));
    }
    let n = entries.positive_int("N")?.expect("required");
    let dt = entries.real("dt")?.expect("required");
    let horizon = entries.real("T")?.expect("required");
    let stride = entries.positive_int("stride")?.unwrap_or(1);
    let paths = entries.positive_int("paths")?.unwrap_or(256);
    let seed = entries.get("seed", "an unsigned integer")?.unwrap_or(0);
    let epsilon = entries.real("epsilon")?.unwrap_or(DEFAULT_EPSILON);
    if !(epsilon > 0.0) {
        return Err(entries.err(entries.line("epsilon").unwrap_or(0), "epsilon must be > 0"));
    }
    let noise_scale = entries.real("noise_scale")?.unwrap_or(1.0);
    let modes = entries.list::<usize>("modes", "positive integers", |&k| k > 0)?;
    let m_list = entries.list::<usize>("M_list", "positive integers", |&k| k > 0)?;
    let eps_list = entries.list::<f64>("eps_list", "positive reals", |&e| e > 0.0 && e.is_finite())?;
    let dt_list = entries.list::<f64>("dt_list", "positive reals", |&e| e > 0.0 && e.is_finite())?;
    let out = entries
        .values
        .get("out")
        .map(|&(_, v)| PathBuf::from(v))
        .unwrap_or_else(|| PathBuf::from("sbelab-out").join(kind.name()));

    if model_kind.is_2d() && modes.is_some() {
        return Err(entries.err(entries.line("modes").unwrap_or(0), "`modes` applies to 1d models only"));
    }
    if let (Some(modes), Some(line)) = (&modes, entries.line("modes")) {
        if let Some(k) = modes.iter().find(|&&k| k > n) {
            return Err(entries.err(line, format!("mode {k} exceeds the cutoff N = {n}")));
        }
    }
    if let (Some(ms), Some(line)) = (&m_list, entries.line("M_list")) {
        if let Some(m) = ms.iter().find(|&&m| m > n) {
            return Err(entries.err(line, format!("M = {m} exceeds the cutoff N = {n}")));
        }
    }

    let mut model = ModelConfig::new(model_kind, theta, n, dt, horizon)
        .with_sigma(sigma)
        .with_stride(stride);
    model.noise_scale = noise_scale;
    let check = |cfg: &ModelConfig, line: Option<usize>| -> Result<()> {
        cfg.validate().map_err(|e| match (&e, line) {
            (CoreError::StepRule(msg), Some(l)) => entries.err(l, format!("step-size rule violated: {msg}")),
            _ => HarnessError::Config(format!("{file}: {e}")),
        })
    };
    check(&model, entries.line("dt"))?;
    if let Some(list) = &dt_list {
        for &d in list {
            let mut c = model.clone();
            c.dt = d;
            check(&c, entries.line("dt_list"))?;
        }
    }

    Ok(ExperimentSpec {
        kind,
        model,
        paths,
        modes,
        m_list,
        eps_list,
        dt_list,
        seed,
        out,
        epsilon,
    })
}
