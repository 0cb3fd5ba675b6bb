//! Experiment harness behind the `dme` command-line tool.

mod output;
mod spec;

pub use output::{append_csv, fmt_float, to_csv, ResultRow, COLUMNS};
pub use spec::{resolve_spec, set_axis, BenchMode, ExperimentSpec, SpecOverrides, SWEEP_AXES};

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::accounting::{ddg_epsilon, default_alphas, PrivacyReport};
use crate::ddg::{self, DdgParams};
use crate::dme::{mse_estimate, DmeConfig};
use crate::error::{param, Result};
use crate::rng::Seed;
use crate::sparse::sparse_mse_estimate;

/// Runs `spec.rounds` rounds and summarizes them as one row.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ResultRow> {
    spec.validate()?;
    let cfg = spec.config();
    let seed = Seed::new(spec.seed);
    let est = match spec.mode {
        BenchMode::Sparse => {
            let s = spec.s.expect("validated");
            sparse_mse_estimate(&cfg, s, spec.gen, spec.rounds, seed)?
        }
        BenchMode::Dense(_) => mse_estimate(&cfg, spec.gen, spec.rounds, seed)?,
    };
    let r = &est.report;
    Ok(ResultRow {
        spec: spec.clone(),
        m_used: r.m,
        mse_mean: est.mean,
        mse_stderr: est.stderr,
        bits_per_client: r.bits_per_client,
        log2_modulus: r.log2_modulus,
        achieved_epsilon_cdp: r.cdp_epsilon(),
        eps_dp_at_delta: r.dp_epsilon(),
        wall_time_ms: if spec.timing { r.wall_time.as_millis() as u64 } else { 0 },
        warnings: r.warnings.clone(),
    })
}

/// One row per value of `axis`, in input order. Row `i` runs with seed
/// `derive("sweep:i").value` of the base seed, recorded in the row.
pub fn sweep(base: &ExperimentSpec, axis: &str, values: &[f64]) -> Result<Vec<ResultRow>> {
    let specs = values
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let mut spec = base.clone();
            set_axis(&mut spec, axis, v)?;
            spec.seed = Seed::new(base.seed).derive_indexed("sweep", i).value;
            Ok(spec)
        })
        .collect::<Result<Vec<_>>>()?;
    if values.is_empty() {
        // Still reject a bad axis name.
        set_axis(&mut base.clone(), axis, 1.0)?;
    }
    specs.par_iter().map(run_experiment).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct LowerBoundReport {
    /// `max(d·log₂(n²ε²/d), 1)`.
    pub biased_bits: f64,
    /// `min(n²ε², d)`.
    pub unbiased_bits: f64,
    /// Bits the projected DDG scheme sends at the same (n, ε, d, c).
    pub scheme_bits: Option<u64>,
    pub caveat: Option<String>,
}

/// Communication lower bounds (unit constants) next to the scheme's cost.
pub fn lower_bound(d: usize, n: usize, epsilon: f64, c: f64) -> Result<LowerBoundReport> {
    if d == 0 || n == 0 || !(epsilon > 0.0) || !(c > 0.0) {
        return Err(param("lower bound needs positive d, n, epsilon and c"));
    }
    let ne2 = (n as f64 * epsilon).powi(2);
    let df = d as f64;
    let raw = df * (ne2 / df).log2();
    let caveat =
        (raw < 1.0).then(|| format!("d ≥ n²ε² ({df} ≥ {ne2}): the biased bound degenerates and is clamped to 1 bit"));
    let cfg = DmeConfig::new(n, d, c, epsilon);
    Ok(LowerBoundReport {
        biased_bits: raw.max(1.0),
        unbiased_bits: ne2.min(df),
        scheme_bits: cfg.bits_per_client().ok(),
        caveat,
    })
}

pub fn format_lower_bound(r: &LowerBoundReport, unbiased: bool) -> String {
    let mut out = String::new();
    if unbiased {
        let _ = writeln!(out, "unbiased lower bound: {} bits", fmt_float(r.unbiased_bits));
    } else {
        let _ = writeln!(out, "biased lower bound: {} bits", fmt_float(r.biased_bits));
    }
    match r.scheme_bits {
        Some(b) => {
            let _ = writeln!(out, "projected_ddg scheme: {b} bits");
        }
        None => {
            let _ = writeln!(out, "projected_ddg scheme: infeasible");
        }
    }
    if let (false, Some(c)) = (unbiased, &r.caveat) {
        let _ = writeln!(out, "caveat: {c}");
    }
    out
}

/// Where the DDG parameters for a privacy report come from.
#[derive(Debug, Clone, PartialEq)]
pub enum PrivacyInput {
    /// Parameters chosen by [`ddg::select_params`] for a target ε.
    Target {
        c: f64,
        n: usize,
        epsilon: f64,
        d: usize,
        wrap_delta: f64,
    },
    /// Explicit parameters.
    Explicit { params: DdgParams, n: usize },
}

pub fn privacy_report(input: &PrivacyInput, deltas: &[f64]) -> Result<(DdgParams, PrivacyReport)> {
    let (params, n) = match *input {
        PrivacyInput::Target {
            c,
            n,
            epsilon,
            d,
            wrap_delta,
        } => (
            ddg::select_params(c, n, epsilon, crate::rotate::padded_dim(d), wrap_delta)?,
            n,
        ),
        PrivacyInput::Explicit { params, n } => (params, n),
    };
    if n == 0 {
        return Err(param("n must be >= 1"));
    }
    let eps = ddg_epsilon(&params, n)?;
    Ok((params, PrivacyReport::from_cdp(eps, &default_alphas(), deltas)?))
}

pub fn format_privacy(params: &DdgParams, report: &PrivacyReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "c = {}, gamma = {}, sigma = {}, beta = {}, log2 M = {}, d = {}",
        fmt_float(params.c),
        fmt_float(params.gamma),
        fmt_float(params.sigma),
        fmt_float(params.beta),
        params.log2_modulus(),
        params.dim
    );
    let _ = writeln!(out, "cdp epsilon: {}", fmt_float(report.cdp_epsilon));
    let _ = writeln!(out, "\nalpha\trdp_epsilon");
    for (a, e) in &report.rdp_curve {
        let _ = writeln!(out, "{}\t{}", fmt_float(*a), fmt_float(*e));
    }
    let _ = writeln!(out, "\ndelta\tdp_epsilon\talpha");
    for p in &report.dp_points {
        let _ = writeln!(
            out,
            "{}\t{}\t{}",
            fmt_float(p.delta),
            fmt_float(p.epsilon),
            fmt_float(p.alpha)
        );
    }
    out
}
