//! End-to-end private mean estimation: sketch, DDG-encode, aggregate,
//! decode, unsketch. Also the baselines the pipeline is compared against.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::accounting::{ddg_epsilon, default_alphas, PrivacyReport};
use crate::data::DataGenerator;
use crate::ddg::{self, DdgParams};
use crate::error::{param, Error, Result};
use crate::rng::Seed;
use crate::rotate::{padded_dim, RotationSpec};
use crate::secagg::{bits_per_client, AggregationRound, GroupVector};
use crate::sketch::{HashTables, SketchSpec, DEFAULT_ROWS};
use crate::vector::{clip_l2, mean_of, squared_distance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    /// Count-mean sketch to `m` dimensions, then DDG over SecAgg.
    #[default]
    ProjectedDdg,
    /// DDG over SecAgg on the full `d` dimensions.
    PlainDdg,
    /// Sketch, average, then add continuous Gaussian noise centrally.
    CentralGaussian,
    /// Exact average, no privacy.
    PlainMean,
}

impl Mode {
    pub const ALL: [Mode; 4] = [
        Mode::ProjectedDdg,
        Mode::PlainDdg,
        Mode::CentralGaussian,
        Mode::PlainMean,
    ];
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::ProjectedDdg => "projected_ddg",
            Mode::PlainDdg => "plain_ddg",
            Mode::CentralGaussian => "central_gaussian",
            Mode::PlainMean => "plain_mean",
        })
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Mode::ALL
            .into_iter()
            .find(|m| m.to_string() == s)
            .ok_or_else(|| param(format!("unknown mode `{s}`")))
    }
}

/// How many sketch blocks to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowsRule {
    Fixed(usize),
    /// `t = ⌈ln d + ln(n²ε²)⌉`, at least 1.
    Theoretical,
}

impl Default for RowsRule {
    fn default() -> Self {
        RowsRule::Fixed(DEFAULT_ROWS)
    }
}

/// Explicit hash tables replacing the seeded sketch (diagnostics).
#[derive(Debug, Clone, PartialEq)]
pub struct SketchOverride {
    pub tables: HashTables,
    pub width: usize,
}

/// Settings of the compressed-sensing pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOptions {
    /// `m = ⌈c₀·s·ln d⌉`.
    pub c0: f64,
    /// Failure probability used when setting λ.
    pub lasso_delta: f64,
    pub tolerance: f64,
    pub max_iters: usize,
    /// Replaces the automatic λ.
    pub lambda: Option<f64>,
}

impl Default for SparseOptions {
    fn default() -> Self {
        SparseOptions {
            c0: 8.0,
            lasso_delta: 0.05,
            tolerance: 1e-6,
            max_iters: 20_000,
            lambda: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DmeConfig {
    pub n: usize,
    pub d: usize,
    pub c: f64,
    pub epsilon: f64,
    /// δ at which the (ε, δ)-DP guarantee is reported.
    pub delta: f64,
    /// Sketch dimension; chosen by [`choose_m`] when absent.
    pub m: Option<usize>,
    pub rows: RowsRule,
    /// Multiplier on `n²ε²` in the automatic choice of `m`.
    pub m_constant: f64,
    pub clip_margin: f64,
    pub mode: Mode,
    /// Probability budget for modular wraparound when sizing `M`.
    pub wrap_delta: f64,
    /// Run the DDG stage with zero noise and a very fine grid.
    pub noiseless: bool,
    pub sketch_override: Option<SketchOverride>,
    pub sparse: SparseOptions,
}

impl DmeConfig {
    pub fn new(n: usize, d: usize, c: f64, epsilon: f64) -> Self {
        DmeConfig {
            n,
            d,
            c,
            epsilon,
            delta: 1e-5,
            m: None,
            rows: RowsRule::default(),
            m_constant: 1.0,
            clip_margin: 1.1,
            mode: Mode::default(),
            wrap_delta: 1e-5,
            noiseless: false,
            sketch_override: None,
            sparse: SparseOptions::default(),
        }
    }

    pub fn with_mode(mut self, mode: Mode) -> Self {
        self.mode = mode;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.d == 0 {
            return Err(param("n and d must be >= 1"));
        }
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(param(format!("clip bound must be positive, got {}", self.c)));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(param(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(param(format!("delta must lie in (0, 1), got {}", self.delta)));
        }
        if let Some(m) = self.m {
            if m == 0 || m > self.d {
                return Err(param(format!("m must lie in [1, d = {}], got {m}", self.d)));
            }
        }
        if let RowsRule::Fixed(0) = self.rows {
            return Err(param("sketch rows must be >= 1"));
        }
        if !(self.clip_margin >= 1.0) {
            return Err(param(format!("clip margin must be >= 1, got {}", self.clip_margin)));
        }
        if !(self.m_constant > 0.0) {
            return Err(param("m constant must be positive"));
        }
        if !(self.wrap_delta > 0.0 && self.wrap_delta < 1.0) {
            return Err(param("wrap delta must lie in (0, 1)"));
        }
        Ok(())
    }

    /// Sketch rows `t`.
    pub fn rows(&self) -> usize {
        match self.rows {
            RowsRule::Fixed(t) => t,
            RowsRule::Theoretical => {
                let ne = (self.n as f64 * self.epsilon).powi(2).max(1.0);
                ((self.d as f64).ln() + ne.ln()).ceil().max(1.0) as usize
            }
        }
    }

    /// `(m, t)` actually used: `m` is the requested or automatic dimension,
    /// trimmed down to a multiple of `t` when it is not one.
    pub fn sketch_shape(&self) -> (usize, usize) {
        if let Some(o) = &self.sketch_override {
            return (o.tables.rows() * o.width, o.tables.rows());
        }
        let t = self.rows();
        let m = self
            .m
            .unwrap_or_else(|| choose_m_with(self.n, self.epsilon, self.d, t, self.m_constant));
        let w = (m / t).max(1);
        (t * w, t)
    }

    /// DDG parameters for encoding vectors of dimension `dim` with clip `c`.
    pub fn ddg_params(&self, c: f64, dim: usize) -> Result<DdgParams> {
        let d_pad = padded_dim(dim);
        if self.noiseless {
            DdgParams::noiseless(c, d_pad, self.n)
        } else {
            ddg::select_params(c, self.n, self.epsilon, d_pad, self.wrap_delta)
        }
    }

    /// Per-client message size in bits, without running a round.
    pub fn bits_per_client(&self) -> Result<u64> {
        self.validate()?;
        match self.mode {
            Mode::PlainMean => Ok(64 * self.d as u64),
            Mode::CentralGaussian => Ok(64 * self.sketch_shape().0 as u64),
            Mode::PlainDdg => {
                let p = self.ddg_params(self.clip_margin * self.c, self.d)?;
                bits_per_client(p.dim, p.modulus)
            }
            Mode::ProjectedDdg => {
                let p = self.ddg_params(self.clip_margin * self.c, self.sketch_shape().0)?;
                bits_per_client(p.dim, p.modulus)
            }
        }
    }

    fn sketch(&self, seed: Seed) -> Result<SketchSpec> {
        match &self.sketch_override {
            Some(o) => SketchSpec::with_tables(o.tables.clone(), o.width),
            None => {
                let (m, t) = self.sketch_shape();
                SketchSpec::new(seed, t, m / t, self.d)
            }
        }
    }
}

/// Default sketch shape: `t = 15` and
/// `m = min(d, max(16, ⌈n²ε²⌉) rounded up to a multiple of t)`.
pub fn choose_m(n: usize, epsilon: f64, d: usize) -> (usize, usize) {
    (choose_m_with(n, epsilon, d, DEFAULT_ROWS, 1.0), DEFAULT_ROWS)
}

/// [`choose_m`] with an explicit block count and constant on `n²ε²`.
pub fn choose_m_with(n: usize, epsilon: f64, d: usize, t: usize, constant: f64) -> usize {
    let t = t.max(1);
    let target = (constant * (n as f64 * epsilon).powi(2)).ceil().max(16.0) as usize;
    target.div_ceil(t).saturating_mul(t).min(d)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundReport {
    /// Dimension of the transmitted vectors (before padding).
    pub m: usize,
    pub bits_per_client: u64,
    /// `log₂M`, or 0 for modes without modular arithmetic.
    pub log2_modulus: u32,
    pub ddg: Option<DdgParams>,
    /// `None` for the non-private baseline.
    pub privacy: Option<PrivacyReport>,
    /// Non-fatal remarks (for example a regime outside the analysed one).
    pub warnings: Vec<String>,
    /// Whether the iterative decoder met its tolerance (always true for the
    /// linear decoders).
    pub converged: bool,
    pub wall_time: Duration,
}

impl RoundReport {
    pub fn cdp_epsilon(&self) -> Option<f64> {
        self.privacy.as_ref().map(|p| p.cdp_epsilon)
    }

    pub fn dp_epsilon(&self) -> Option<f64> {
        self.privacy
            .as_ref()
            .and_then(|p| p.dp_points.first())
            .map(|p| p.epsilon)
    }
}

/// One round of mean estimation over `xs` under `config.mode`.
pub fn run_round(xs: &[Vec<f64>], config: &DmeConfig, seed: Seed) -> Result<(Vec<f64>, RoundReport)> {
    config.validate()?;
    check_inputs(xs, config.d)?;
    let start = Instant::now();
    let (estimate, mut report) = match config.mode {
        Mode::PlainMean => {
            let report = RoundReport {
                m: config.d,
                bits_per_client: 64 * config.d as u64,
                log2_modulus: 0,
                ddg: None,
                privacy: None,
                warnings: Vec::new(),
                converged: true,
                wall_time: Duration::ZERO,
            };
            (mean_of(xs), report)
        }
        Mode::PlainDdg => {
            // Same clip bound as the projected mode, so the two differ only by S.
            let params = config.ddg_params(config.clip_margin * config.c, config.d)?;
            let (mean, report) = ddg_mean(xs, &params, config, seed)?;
            (mean, report)
        }
        Mode::ProjectedDdg => {
            let sketch = config.sketch(seed.derive("sketch"))?;
            let c = config.clip_margin * config.c;
            let params = config.ddg_params(c, sketch.m())?;
            let ys = xs.par_iter().map(|x| sketch.encode(x)).collect::<Result<Vec<_>>>()?;
            let (mean_y, report) = ddg_mean(&ys, &params, config, seed)?;
            (sketch.unsketch(&mean_y)?, report)
        }
        Mode::CentralGaussian => central_gaussian(xs, config, seed)?,
    };
    report.wall_time = start.elapsed();
    Ok((estimate, report))
}

fn check_inputs(xs: &[Vec<f64>], d: usize) -> Result<()> {
    if xs.is_empty() {
        return Err(param("at least one client vector is required"));
    }
    if let Some(x) = xs.iter().find(|x| x.len() != d) {
        return Err(param(format!("client vector has length {}, expected {d}", x.len())));
    }
    if xs.iter().flatten().any(|v| !v.is_finite()) {
        return Err(param("client vectors must be finite"));
    }
    Ok(())
}

/// Encodes every vector in `ys` with DDG, aggregates, and decodes the mean.
pub(crate) fn ddg_mean(
    ys: &[Vec<f64>],
    params: &DdgParams,
    config: &DmeConfig,
    seed: Seed,
) -> Result<(Vec<f64>, RoundReport)> {
    let dim = ys[0].len();
    let rotation = RotationSpec::new(seed.derive("rotation"), dim)?;
    let messages: Vec<GroupVector> = ys
        .par_iter()
        .enumerate()
        .map(|(i, y)| {
            let mut rng = seed.derive_indexed("client", i).rng();
            ddg::encode(y, params, &rotation, &mut rng)
        })
        .collect::<Result<_>>()?;
    let mut round = AggregationRound::new(params.modulus, params.dim)?;
    for msg in &messages {
        round.absorb(msg)?;
    }
    let mean = ddg::decode_sum(&round.sum(), ys.len(), params, &rotation)?;
    let privacy = if params.sigma > 0.0 {
        let eps = ddg_epsilon(params, ys.len())?;
        Some(PrivacyReport::from_cdp(eps, &default_alphas(), &[config.delta])?)
    } else {
        None
    };
    let report = RoundReport {
        m: dim,
        bits_per_client: bits_per_client(params.dim, params.modulus)?,
        log2_modulus: params.log2_modulus(),
        ddg: Some(*params),
        privacy,
        warnings: Vec::new(),
        converged: true,
        wall_time: Duration::ZERO,
    };
    Ok((mean, report))
}

/// Noise scale of the central baseline:
/// `(2·margin·c/(nε))·√(2 ln(1.25/δ))`.
pub fn central_sigma(config: &DmeConfig) -> f64 {
    central_sensitivity(config) / config.epsilon * (2.0 * (1.25 / config.delta).ln()).sqrt()
}

fn central_sensitivity(config: &DmeConfig) -> f64 {
    2.0 * config.clip_margin * config.c / config.n as f64
}

fn central_gaussian(xs: &[Vec<f64>], config: &DmeConfig, seed: Seed) -> Result<(Vec<f64>, RoundReport)> {
    let sketch = config.sketch(seed.derive("sketch"))?;
    let c = config.clip_margin * config.c;
    let ys = xs
        .par_iter()
        .map(|x| clip_l2(&sketch.encode(x)?, c))
        .collect::<Result<Vec<_>>>()?;
    let sigma = central_sigma(config);
    let mut rng = seed.derive("central-noise").rng();
    let mut mean_y = mean_of(&ys);
    for v in &mut mean_y {
        *v += sigma * rng.sample::<f64, _>(StandardNormal);
    }
    // Gaussian mechanism with sensitivity Δ and scale σ is ½(Δ/σ)²-zCDP.
    let eps = central_sensitivity(config) / sigma;
    let report = RoundReport {
        m: sketch.m(),
        bits_per_client: 64 * sketch.m() as u64,
        log2_modulus: 0,
        ddg: None,
        privacy: Some(PrivacyReport::from_cdp(eps, &default_alphas(), &[config.delta])?),
        warnings: Vec::new(),
        converged: true,
        wall_time: Duration::ZERO,
    };
    Ok((sketch.unsketch(&mean_y)?, report))
}

/// Monte Carlo summary of `‖μ̂ − μ‖²`.
#[derive(Debug, Clone, PartialEq)]
pub struct MseEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub rounds: usize,
    /// Report of the first round (communication and privacy do not vary
    /// across rounds); `converged` is the conjunction over all rounds.
    pub report: RoundReport,
}

/// Squared error over `rounds` rounds on one dataset drawn from `data`.
/// Each round uses fresh sketch, rotation and noise seeds.
pub fn mse_estimate(config: &DmeConfig, data: DataGenerator, rounds: usize, seed: Seed) -> Result<MseEstimate> {
    let xs = data.generate(config.n, config.d, config.c, seed.derive("data"))?;
    mse_over(&xs, rounds, seed, |seed| run_round(&xs, config, seed))
}

/// Shared Monte Carlo driver: `round` maps a per-round seed to an estimate.
pub(crate) fn mse_over<F>(xs: &[Vec<f64>], rounds: usize, seed: Seed, round: F) -> Result<MseEstimate>
where
    F: Fn(Seed) -> Result<(Vec<f64>, RoundReport)> + Sync,
{
    if rounds < 2 {
        return Err(param("at least two rounds are needed for a standard error"));
    }
    let truth = mean_of(xs);
    let results = (0..rounds)
        .into_par_iter()
        .map(|r| {
            let (est, report) = round(seed.derive_indexed("round", r))?;
            Ok((squared_distance(&est, &truth), report))
        })
        .collect::<Result<Vec<_>>>()?;
    let errs: Vec<f64> = results.iter().map(|(e, _)| *e).collect();
    let (mean, stderr) = mean_and_stderr(&errs);
    let converged = results.iter().all(|(_, r)| r.converged);
    let mut report = results.into_iter().next().map(|(_, r)| r).expect("rounds >= 2");
    report.converged = converged;
    Ok(MseEstimate {
        mean,
        stderr,
        rounds,
        report,
    })
}

pub(crate) fn mean_and_stderr(v: &[f64]) -> (f64, f64) {
    let k = v.len() as f64;
    let mean = v.iter().sum::<f64>() / k;
    if v.len() < 2 {
        return (mean, 0.0);
    }
    let var = v.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (k - 1.0);
    (mean, (var / k).sqrt())
}
