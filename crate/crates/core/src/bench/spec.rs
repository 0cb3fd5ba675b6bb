use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Deserialize;

use crate::data::DataGenerator;
use crate::dme::{DmeConfig, Mode, RowsRule};
use crate::error::{param, Error, Result};
use crate::sketch::DEFAULT_ROWS;

/// What a benchmark row measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BenchMode {
    Dense(Mode),
    /// Gaussian projection and LASSO decoding.
    Sparse,
}

impl fmt::Display for BenchMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BenchMode::Dense(m) => m.fmt(f),
            BenchMode::Sparse => f.write_str("sparse"),
        }
    }
}

impl FromStr for BenchMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "sparse" {
            Ok(BenchMode::Sparse)
        } else {
            s.parse().map(BenchMode::Dense)
        }
    }
}

/// Everything needed to reproduce one result row.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub mode: BenchMode,
    pub n: usize,
    pub d: usize,
    pub c: f64,
    pub epsilon: f64,
    pub delta: f64,
    pub m: Option<usize>,
    pub t: usize,
    pub s: Option<usize>,
    pub rounds: usize,
    pub seed: u64,
    pub gen: DataGenerator,
    pub out: Option<PathBuf>,
    /// Record wall time; off by default so output is byte-reproducible.
    pub timing: bool,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        ExperimentSpec {
            mode: BenchMode::Dense(Mode::ProjectedDdg),
            n: 8,
            d: 64,
            c: 1.0,
            epsilon: 1.0,
            delta: 1e-5,
            m: None,
            t: DEFAULT_ROWS,
            s: None,
            rounds: 100,
            seed: 0,
            gen: DataGenerator::UniformSphere,
            out: None,
            timing: false,
        }
    }
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.rounds < 2 {
            return Err(param("rounds must be >= 2"));
        }
        if self.t == 0 {
            return Err(param("t must be >= 1"));
        }
        match self.mode {
            BenchMode::Sparse => {
                let s = self.s.ok_or_else(|| param("sparse mode needs --s"))?;
                if s > self.d {
                    return Err(param(format!("s = {s} exceeds d = {}", self.d)));
                }
            }
            BenchMode::Dense(_) => {}
        }
        self.config().validate()
    }

    /// The pipeline configuration this spec describes.
    pub fn config(&self) -> DmeConfig {
        let mode = match self.mode {
            BenchMode::Dense(m) => m,
            BenchMode::Sparse => Mode::ProjectedDdg,
        };
        let mut cfg = DmeConfig::new(self.n, self.d, self.c, self.epsilon).with_mode(mode);
        cfg.delta = self.delta;
        cfg.rows = RowsRule::Fixed(self.t);
        if self.mode != BenchMode::Sparse {
            cfg.m = self.m;
        }
        cfg
    }
}

/// Optional values from a config file or the command line. Unset fields
/// leave the underlying spec untouched.
///
/// The config file is a flat TOML document using these keys:
///
/// ```toml
/// mode = "projected_ddg"   # projected_ddg | plain_ddg | central_gaussian | plain_mean | sparse
/// n = 8
/// d = 64
/// c = 1.0
/// eps = 1.0
/// delta = 1e-5
/// m = 32                   # omit for the automatic choice
/// t = 15
/// s = 5                    # sparse mode only
/// rounds = 100
/// seed = 0
/// gen = "sphere"           # sphere | identical | onehot | sparse:<s>
/// out = "results.csv"
/// ```
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecOverrides {
    pub mode: Option<String>,
    pub n: Option<usize>,
    pub d: Option<usize>,
    pub c: Option<f64>,
    pub eps: Option<f64>,
    pub delta: Option<f64>,
    pub m: Option<usize>,
    pub t: Option<usize>,
    pub s: Option<usize>,
    pub rounds: Option<usize>,
    pub seed: Option<u64>,
    pub gen: Option<String>,
    pub out: Option<PathBuf>,
}

impl SpecOverrides {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| param(format!("config: {}", e.message())))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn apply(&self, spec: &mut ExperimentSpec) -> Result<()> {
        if let Some(v) = &self.mode {
            spec.mode = v.parse()?;
        }
        if let Some(v) = self.n {
            spec.n = v;
        }
        if let Some(v) = self.d {
            spec.d = v;
        }
        if let Some(v) = self.c {
            spec.c = v;
        }
        if let Some(v) = self.eps {
            spec.epsilon = v;
        }
        if let Some(v) = self.delta {
            spec.delta = v;
        }
        if let Some(v) = self.m {
            spec.m = Some(v);
        }
        if let Some(v) = self.t {
            spec.t = v;
        }
        if let Some(v) = self.s {
            spec.s = Some(v);
        }
        if let Some(v) = self.rounds {
            spec.rounds = v;
        }
        if let Some(v) = self.seed {
            spec.seed = v;
        }
        if let Some(v) = &self.gen {
            spec.gen = v.parse()?;
        }
        if let Some(v) = &self.out {
            spec.out = Some(v.clone());
        }
        Ok(())
    }
}

/// Defaults, then the config file (if any), then command-line values.
pub fn resolve_spec(file: Option<&SpecOverrides>, cli: &SpecOverrides) -> Result<ExperimentSpec> {
    let mut spec = ExperimentSpec::default();
    if let Some(f) = file {
        f.apply(&mut spec)?;
    }
    cli.apply(&mut spec)?;
    Ok(spec)
}

/// Spec fields a sweep may vary.
pub const SWEEP_AXES: [&str; 9] = ["n", "d", "c", "eps", "delta", "m", "t", "s", "rounds"];

/// Sets the numeric field `axis` of `spec` to `value`.
pub fn set_axis(spec: &mut ExperimentSpec, axis: &str, value: f64) -> Result<()> {
    let int = || -> Result<usize> {
        if value >= 0.0 && value.fract() == 0.0 && value <= usize::MAX as f64 {
            Ok(value as usize)
        } else {
            Err(param(format!("axis `{axis}` needs a nonnegative integer, got {value}")))
        }
    };
    match axis {
        "n" => spec.n = int()?,
        "d" => spec.d = int()?,
        "c" => spec.c = value,
        "eps" | "epsilon" => spec.epsilon = value,
        "delta" => spec.delta = value,
        "m" => spec.m = Some(int()?),
        "t" => spec.t = int()?,
        "s" => spec.s = Some(int()?),
        "rounds" => spec.rounds = int()?,
        other => {
            return Err(param(format!(
                "unknown sweep axis `{other}` (expected one of {})",
                SWEEP_AXES.join(", ")
            )))
        }
    }
    Ok(())
}
