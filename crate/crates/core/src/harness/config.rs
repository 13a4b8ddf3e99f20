//! Flat `key = value` configuration files.
//!
//! Keys are the [`SimConfig`] field names, with the grid given as `x_max`
//! and `n_nodes` and the wave parameters as `b`, `eps`, `a`, `c`. `T`, `A`
//! and `C` are accepted as aliases. A few experiment keys sit next to them:
//! `perturbation`, `fields_every` and `sweep`.
//!
//! ```text
//! # default parameters at desk scale
//! n_nodes = 4001
//! T = 1
//! mollify_width = 10h
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::coupled::{SimConfig, Splitting, Transport, VMode};
use crate::error::{Error, Result};
use crate::hyperbolic::Flux;
use crate::numerics::Grid1D;
use crate::reference::Integrator;

/// Initial perturbation `(ū, v̄)` of the stability experiments.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum Perturbation {
    /// `ū = v̄ = e^{-x²}`.
    #[default]
    Gaussian,
    /// Fields file with header `x,re_u,im_u,v_tilde` on the run grid.
    File(PathBuf),
}

impl Perturbation {
    fn echo(&self) -> String {
        match self {
            Perturbation::Gaussian => "gaussian".into(),
            Perturbation::File(p) => format!("file:{}", p.display()),
        }
    }
}

/// Simulation parameters plus experiment settings.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub sim: SimConfig,
    pub perturbation: Perturbation,
    /// Field dumps every this many steps; a multiple of `output_every`.
    pub fields_every: usize,
    /// Perturbation sizes of the stability sweep, empty for a single run.
    pub sweep: Vec<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            sim: SimConfig::default(),
            perturbation: Perturbation::Gaussian,
            fields_every: 1000,
            sweep: Vec::new(),
        }
    }
}

const KEYS: &[&str] = &[
    "x_max",
    "n_nodes",
    "dt",
    "t_final",
    "b",
    "eps",
    "a",
    "c",
    "delta",
    "mollify_width",
    "v_mode",
    "newton_tol",
    "newton_max_iter",
    "splitting",
    "flux",
    "transport",
    "substeps",
    "integrator",
    "output_every",
    "containment_tol",
    "perturbation",
    "fields_every",
    "sweep",
];

fn canonical(key: &str) -> Option<&'static str> {
    let key = match key {
        "T" => "t_final",
        "A" => "a",
        "C" => "c",
        k => k,
    };
    KEYS.iter().copied().find(|&k| k == key)
}

/// Raw entries, later entries override earlier ones through [`set`](Self::set).
#[derive(Debug, Clone, Default)]
pub struct ConfigBuilder {
    entries: BTreeMap<&'static str, String>,
}

impl ConfigBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Parse config text. Unknown and repeated keys are errors.
    pub fn parse(text: &str) -> Result<Self> {
        let mut b = ConfigBuilder::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`, got `{line}`", i + 1)))?;
            let key = key.trim();
            let name =
                canonical(key).ok_or_else(|| Error::Config(format!("line {}: unknown key `{key}`", i + 1)))?;
            if b.entries.insert(name, value.trim().to_string()).is_some() {
                return Err(Error::Config(format!("line {}: `{key}` given twice", i + 1)));
            }
        }
        Ok(b)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) -> Result<&mut Self> {
        let name = canonical(key).ok_or_else(|| Error::Config(format!("unknown key `{key}`")))?;
        self.entries.insert(name, value.into());
        Ok(self)
    }

    pub fn build(&self) -> Result<RunConfig> {
        let d = RunConfig::default();
        let x_max = self.num("x_max", d.sim.grid.x_max())?;
        let n_nodes = self.num("n_nodes", d.sim.grid.len())?;
        let grid = Grid1D::new(x_max, n_nodes).map_err(|e| Error::Config(e.to_string()))?;
        let h = grid.h();
        let mollify_width = match self.entries.get("mollify_width") {
            None => 10.0 * h,
            Some(v) => match v.strip_suffix('h') {
                Some(cells) => parse_value::<f64>("mollify_width", cells.trim())? * h,
                None => parse_value("mollify_width", v)?,
            },
        };
        let ds = &d.sim;
        let sim = SimConfig {
            grid,
            dt: self.num("dt", ds.dt)?,
            t_final: self.num("t_final", ds.t_final)?,
            wave: crate::reference::WaveParams {
                b: self.num("b", ds.wave.b)?,
                eps: self.num("eps", ds.wave.eps)?,
                a: self.num("a", ds.wave.a)?,
                c: self.num("c", ds.wave.c)?,
            },
            delta: self.num("delta", ds.delta)?,
            mollify_width,
            v_mode: self.choice("v_mode", ds.v_mode, VMode::parse)?,
            newton_tol: self.num("newton_tol", ds.newton_tol)?,
            newton_max_iter: self.num("newton_max_iter", ds.newton_max_iter)?,
            splitting: self.choice("splitting", ds.splitting, Splitting::parse)?,
            flux: self.choice("flux", ds.flux, Flux::parse)?,
            transport: self.choice("transport", ds.transport, Transport::parse)?,
            substeps: self.num("substeps", ds.substeps)?,
            integrator: self.choice("integrator", ds.integrator, Integrator::parse)?,
            output_every: self.num("output_every", ds.output_every)?,
            containment_tol: self.num("containment_tol", ds.containment_tol)?,
        };
        let perturbation = match self.entries.get("perturbation").map(String::as_str) {
            None | Some("gaussian") => Perturbation::Gaussian,
            Some(v) => match v.strip_prefix("file:") {
                Some(p) if !p.trim().is_empty() => Perturbation::File(PathBuf::from(p.trim())),
                _ => return Err(Error::Config(format!("perturbation: expected `gaussian` or `file:PATH`, got `{v}`"))),
            },
        };
        let sweep = match self.entries.get("sweep") {
            None => Vec::new(),
            Some(v) => parse_sweep(v)?,
        };
        let rc = RunConfig {
            sim,
            perturbation,
            fields_every: self.num("fields_every", d.fields_every)?,
            sweep,
        };
        rc.validate()?;
        Ok(rc)
    }

    fn num<T: std::str::FromStr>(&self, key: &str, default: T) -> Result<T> {
        match self.entries.get(key) {
            None => Ok(default),
            Some(v) => parse_value(key, v),
        }
    }

    fn choice<T>(&self, key: &str, default: T, parse: fn(&str) -> Option<T>) -> Result<T> {
        match self.entries.get(key) {
            None => Ok(default),
            Some(v) => parse(v).ok_or_else(|| Error::Config(format!("{key}: unrecognised value `{v}`"))),
        }
    }
}

fn parse_value<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse `{v}`")))
}

/// Comma-separated list of nonnegative perturbation sizes.
pub fn parse_sweep(v: &str) -> Result<Vec<f64>> {
    let out = v
        .split(',')
        .map(|s| parse_value::<f64>("sweep", s.trim()))
        .collect::<Result<Vec<_>>>()?;
    if out.iter().any(|d| !(d.is_finite() && *d >= 0.0)) {
        return Err(Error::Config(format!("sweep: values must be finite and nonnegative, got `{v}`")));
    }
    Ok(out)
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.sim.validate().map_err(|e| match e {
            Error::Resolution { .. } | Error::Config(_) => e,
            other => Error::Config(other.to_string()),
        })?;
        if self.fields_every == 0 || !self.fields_every.is_multiple_of(self.sim.output_every) {
            return Err(Error::Config(format!(
                "fields_every = {} must be a positive multiple of output_every = {}",
                self.fields_every, self.sim.output_every
            )));
        }
        Ok(())
    }

    /// Every key with its value, defaults included. Parsing the echo gives
    /// back the same configuration.
    pub fn echo(&self) -> String {
        let s = &self.sim;
        let mut out = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        kv("x_max", s.grid.x_max().to_string());
        kv("n_nodes", s.grid.len().to_string());
        kv("dt", s.dt.to_string());
        kv("t_final", s.t_final.to_string());
        kv("b", s.wave.b.to_string());
        kv("eps", s.wave.eps.to_string());
        kv("a", s.wave.a.to_string());
        kv("c", s.wave.c.to_string());
        kv("delta", s.delta.to_string());
        kv(
            "mollify_width",
            format!("{}  # {}h", s.mollify_width, s.mollify_width / s.grid.h()),
        );
        kv("v_mode", s.v_mode.name().into());
        kv("newton_tol", s.newton_tol.to_string());
        kv("newton_max_iter", s.newton_max_iter.to_string());
        kv("splitting", s.splitting.name().into());
        kv("flux", s.flux.name().into());
        kv("transport", s.transport.name().into());
        kv("substeps", s.substeps.to_string());
        kv("integrator", s.integrator.name().into());
        kv("output_every", s.output_every.to_string());
        kv("containment_tol", s.containment_tol.to_string());
        kv("perturbation", self.perturbation.echo());
        kv("fields_every", self.fields_every.to_string());
        if !self.sweep.is_empty() {
            let list: Vec<String> = self.sweep.iter().map(|d| d.to_string()).collect();
            kv("sweep", list.join(","));
        }
        out
    }
}
