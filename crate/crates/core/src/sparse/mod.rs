//! Sparse mean estimation: Gaussian projection, DDG on the projected
//! vectors, and LASSO decoding.

mod lasso;
mod projection;

pub use lasso::{lasso_solve, LassoProblem, LassoSolution};
pub use projection::GaussianProjection;

use std::time::Instant;

use crate::data::DataGenerator;
use crate::ddg::DdgParams;
use crate::dme::{ddg_mean, mse_over, DmeConfig, MseEstimate, RoundReport};
use crate::error::{param, Result};
use crate::rng::Seed;

/// `λ = √((1/n)·(ln d + n·ln(1/(1−β)) + ln(2/δ))·((γ² + 4σ²)/8)·col_factor)`.
pub fn lambda_bound(d: usize, n: usize, beta: f64, gamma: f64, sigma: f64, col_factor: f64, delta: f64) -> f64 {
    let nf = n as f64;
    let log_term = (d as f64).ln() + nf * (1.0 / (1.0 - beta)).ln() + (2.0 / delta).ln();
    (log_term / nf * (gamma * gamma + 4.0 * sigma * sigma) / 8.0 * col_factor).sqrt()
}

/// Regularization level for decoding an aggregate encoded with `params`.
///
/// The column factor is `max_j ‖S_j/√m‖²/m`: the LASSO gradient is
/// `(1/m)Sᵀ(Sx − y)`, so the noise it sees is shaped by `S/√m`.
pub fn choose_lambda(params: &DdgParams, proj: &GaussianProjection, n: usize, delta: f64) -> Result<f64> {
    if n == 0 {
        return Err(param("client count must be >= 1"));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(param(format!("delta must lie in (0, 1), got {delta}")));
    }
    let m = proj.rows() as f64;
    let col = proj.column_norms_sq().into_iter().fold(0.0, f64::max) / (m * m);
    Ok(lambda_bound(
        proj.cols(),
        n,
        params.beta,
        params.gamma,
        params.sigma,
        col,
        delta,
    ))
}

/// `m = ⌈c₀·s·ln d⌉`, at least 1.
pub fn sparse_m(c0: f64, s: usize, d: usize) -> usize {
    ((c0 * s as f64 * (d as f64).ln()).ceil() as usize).max(1)
}

/// One round of the compressed-sensing pipeline.
pub fn run_sparse_round(xs: &[Vec<f64>], s: usize, config: &DmeConfig, seed: Seed) -> Result<(Vec<f64>, RoundReport)> {
    config.validate()?;
    if xs.is_empty() {
        return Err(param("at least one client vector is required"));
    }
    if let Some(x) = xs.iter().find(|x| x.len() != config.d) {
        return Err(param(format!(
            "client vector has length {}, expected {}",
            x.len(),
            config.d
        )));
    }
    let start = Instant::now();
    let opts = &config.sparse;
    let m = sparse_m(opts.c0, s, config.d);
    let proj = GaussianProjection::new(seed.derive("projection"), m, config.d)?;
    let c = config.c * proj.sigma_max();
    let params = config.ddg_params(c, m)?;
    let ys = xs.iter().map(|x| proj.apply(x)).collect::<Result<Vec<_>>>()?;
    let (mean_y, mut report) = ddg_mean(&ys, &params, config, seed)?;

    let lambda = match opts.lambda {
        Some(l) => l,
        None => choose_lambda(&params, &proj, xs.len(), opts.lasso_delta)?,
    };
    let sol = lasso_solve(&LassoProblem {
        projection: &proj,
        target: &mean_y,
        lambda,
        tolerance: opts.tolerance,
        max_iters: opts.max_iters,
    })?;
    let ne2 = (xs.len() as f64 * config.epsilon).powi(2);
    if m as f64 > ne2 {
        report.warnings.push(format!(
            "projection dimension {m} exceeds n²ε² = {ne2:.3}; outside the regime the error bound covers"
        ));
    }
    if !sol.converged {
        report.warnings.push(format!(
            "lasso stopped after {} iterations with residual {:.3e}",
            sol.iterations, sol.residual
        ));
    }
    report.converged = sol.converged;
    report.wall_time = start.elapsed();
    Ok((sol.x, report))
}

/// Squared error of [`run_sparse_round`] over `rounds` rounds, each with a
/// fresh projection and noise.
pub fn sparse_mse_estimate(
    config: &DmeConfig,
    s: usize,
    data: DataGenerator,
    rounds: usize,
    seed: Seed,
) -> Result<MseEstimate> {
    let xs = data.generate(config.n, config.d, config.c, seed.derive("data"))?;
    mse_over(&xs, rounds, seed, |seed| run_sparse_round(&xs, s, config, seed))
}
