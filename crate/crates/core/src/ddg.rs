//! Distributed discrete Gaussian (DDG) encoder and decoder.
//!
//! A client clips its vector to norm `c`, scales by `1/γ`, flattens it with a
//! shared randomized Hadamard rotation, rounds to the integer grid (retrying
//! until the rounded norm is below a threshold), adds discrete Gaussian noise
//! of scale `σ/γ` and reduces mod `M`. The server lifts the aggregated
//! residues to `[−M/2, M/2)`, divides by `n`, rescales by `γ` and rotates back.

use rand::Rng;

use crate::accounting::ddg_epsilon;
use crate::dgauss::DiscreteGaussian;
use crate::error::{param, Error, Result};
use crate::rotate::RotationSpec;
use crate::secagg::GroupVector;
use crate::vector::{clip_l2, l2_norm};

/// Cap on conditional-rounding retries before giving up.
pub const MAX_ROUNDING_ATTEMPTS: usize = 1_000_000;

const MAX_LOG2_MODULUS: u32 = 62;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DdgParams {
    /// ℓ₂ clipping bound, real units.
    pub c: f64,
    /// Grid step.
    pub gamma: f64,
    /// Per-client noise scale, real units.
    pub sigma: f64,
    /// Conditional rounding bias, in `[0, 1)`.
    pub beta: f64,
    /// Power of two.
    pub modulus: u64,
    /// Padded (power-of-two) dimension.
    pub dim: usize,
}

impl DdgParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(param(format!("clip bound must be positive, got {}", self.c)));
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(param(format!("granularity must be positive, got {}", self.gamma)));
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(param(format!("noise scale must be >= 0, got {}", self.sigma)));
        }
        if !(0.0..1.0).contains(&self.beta) {
            return Err(param(format!("beta must lie in [0, 1), got {}", self.beta)));
        }
        if self.modulus < 2 || !self.modulus.is_power_of_two() || self.modulus.trailing_zeros() > MAX_LOG2_MODULUS {
            return Err(param(format!(
                "modulus must be a power of two in [2, 2^{MAX_LOG2_MODULUS}], got {}",
                self.modulus
            )));
        }
        if self.dim == 0 {
            return Err(param("dimension must be >= 1"));
        }
        if !self.rounding_threshold().is_finite() {
            return Err(param("rounding threshold is not finite"));
        }
        Ok(())
    }

    /// Norm bound the rounded vector must satisfy:
    /// `min{c/γ + √d, √(c²/γ² + d/4 + √(2 ln(1/β))·(c/γ + √d/2))}`.
    pub fn rounding_threshold(&self) -> f64 {
        let d = self.dim as f64;
        let cg = self.c / self.gamma;
        let loose = cg + d.sqrt();
        if self.beta == 0.0 {
            return loose;
        }
        let tight = (cg * cg + d / 4.0 + (2.0 * (1.0 / self.beta).ln()).sqrt() * (cg + d.sqrt() / 2.0)).sqrt();
        loose.min(tight)
    }

    pub fn log2_modulus(&self) -> u32 {
        self.modulus.trailing_zeros()
    }

    /// Noise-free parameters with a very fine grid, for diagnostics: every
    /// stage is then invertible up to ~1e-12·c per coordinate.
    /// The modulus covers the worst case `n·(c/γ + 1)` per coordinate, so
    /// there is no wraparound at all.
    pub fn noiseless(c: f64, dim: usize, n: usize) -> Result<Self> {
        if n == 0 || dim == 0 || !(c > 0.0) {
            return Err(param("noiseless parameters need n, dim, c > 0"));
        }
        let gamma = c * 2f64.powi(-40);
        let bound = 2.0 * n as f64 * (c / gamma + 2.0);
        let params = DdgParams {
            c,
            gamma,
            sigma: 0.0,
            beta: 0.0,
            modulus: modulus_from_bound(bound)?,
            dim,
        };
        params.validate()?;
        Ok(params)
    }
}

/// Client encoder. Returns the message and the number of rounding attempts.
pub fn encode_counted<R: Rng + ?Sized>(
    x: &[f64],
    params: &DdgParams,
    rotation: &RotationSpec,
    rng: &mut R,
) -> Result<(GroupVector, usize)> {
    params.validate()?;
    if rotation.dim() != params.dim {
        return Err(param(format!(
            "rotation dimension {} differs from parameter dimension {}",
            rotation.dim(),
            params.dim
        )));
    }
    if x.len() != rotation.original_dim() {
        return Err(param(format!(
            "encode expects length {}, got {}",
            rotation.original_dim(),
            x.len()
        )));
    }
    let scaled: Vec<f64> = clip_l2(x, params.c)?.into_iter().map(|v| v / params.gamma).collect();
    let flat = rotation.flatten(&scaled)?;
    let threshold = params.rounding_threshold();

    let mut rounded = vec![0i64; flat.len()];
    let mut attempts = 0;
    loop {
        attempts += 1;
        randomized_round(&flat, &mut rounded, rng);
        let norm = l2_norm(&rounded.iter().map(|&v| v as f64).collect::<Vec<_>>());
        if norm <= threshold {
            break;
        }
        if attempts >= MAX_ROUNDING_ATTEMPTS {
            return Err(Error::Degenerate(format!(
                "conditional rounding did not meet threshold {threshold} after {attempts} attempts"
            )));
        }
    }

    let noise = DiscreteGaussian::new(params.sigma / params.gamma)?;
    for r in rounded.iter_mut() {
        *r += noise.sample(rng);
    }
    Ok((GroupVector::from_signed(&rounded, params.modulus)?, attempts))
}

pub fn encode<R: Rng + ?Sized>(
    x: &[f64],
    params: &DdgParams,
    rotation: &RotationSpec,
    rng: &mut R,
) -> Result<GroupVector> {
    encode_counted(x, params, rotation, rng).map(|(g, _)| g)
}

/// Unbiased rounding of each coordinate to one of its two nearest integers.
pub fn randomized_round<R: Rng + ?Sized>(x: &[f64], out: &mut [i64], rng: &mut R) {
    for (o, &v) in out.iter_mut().zip(x) {
        let lo = v.floor();
        let frac = v - lo;
        let up = rng.random::<f64>() < frac;
        *o = lo as i64 + i64::from(up);
    }
}

/// Server decoder: estimate of the mean of the `n` encoded vectors.
pub fn decode_sum(agg: &GroupVector, n: usize, params: &DdgParams, rotation: &RotationSpec) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(param("client count must be >= 1"));
    }
    if agg.modulus() != params.modulus {
        return Err(param(format!(
            "aggregate modulus {} differs from parameter modulus {}",
            agg.modulus(),
            params.modulus
        )));
    }
    if agg.len() != rotation.dim() {
        return Err(param(format!(
            "aggregate length {} differs from rotation dimension {}",
            agg.len(),
            rotation.dim()
        )));
    }
    let scale = params.gamma / n as f64;
    let lifted: Vec<f64> = agg.to_signed().into_iter().map(|v| v as f64 * scale).collect();
    rotation.unflatten(&lifted)
}

/// Modulus lower bound making wraparound of the aggregate unlikely:
/// `(2/γ)·√((n(γ² + 4σ²) + 4n²c²/d)·(ln d + n·ln(1/(1−β)) + ln(8/δ_wrap)))`.
pub fn modulus_bound(c: f64, n: usize, gamma: f64, sigma: f64, beta: f64, dim: usize, delta_wrap: f64) -> f64 {
    let nf = n as f64;
    let d = dim as f64;
    let spread = nf * (gamma * gamma + 4.0 * sigma * sigma) + 4.0 * nf * nf * c * c / d;
    let log_term = d.ln() + nf * (1.0 / (1.0 - beta)).ln() + (8.0 / delta_wrap).ln();
    2.0 / gamma * (spread * log_term).sqrt()
}

fn modulus_from_bound(bound: f64) -> Result<u64> {
    if !bound.is_finite() || bound > 2f64.powi(MAX_LOG2_MODULUS as i32) {
        return Err(Error::Infeasible(format!(
            "required modulus {bound:e} exceeds 2^{MAX_LOG2_MODULUS}"
        )));
    }
    Ok((bound.ceil() as u64).max(2).next_power_of_two())
}

/// Picks (γ, σ, β, M) for target concentrated-DP `epsilon`.
///
/// σ = max{2c/(ε√n), γ√(8d)/(ε√n), (γ/π²)·ln(20nd/ε²)} and
/// β = min(√(γ/n), 1/n). The starting grid γ = min(c/√(2d), c/(ε√n)) keeps
/// the `γ√d` part of σ below the `c` part and the rounding variance below
/// 1/16 of the noise variance. γ is halved until the accounted ε meets the
/// target, then M is the smallest power of two above [`modulus_bound`].
pub fn select_params(c: f64, n: usize, epsilon: f64, d_pad: usize, delta_wrap: f64) -> Result<DdgParams> {
    if !(c > 0.0) || n == 0 || !(epsilon > 0.0) || d_pad == 0 {
        return Err(param("select_params needs c, n, epsilon and d_pad all positive"));
    }
    if !(delta_wrap > 0.0 && delta_wrap < 1.0) {
        return Err(param(format!("wraparound budget must lie in (0, 1), got {delta_wrap}")));
    }
    let nf = n as f64;
    let d = d_pad as f64;
    let eps2 = epsilon * epsilon;
    let mut gamma = (c / (2.0 * d).sqrt()).min(c / (epsilon * nf.sqrt()));

    for _ in 0..=64 {
        // Capped at 1/2 so that a single client still gets a valid bias.
        let beta = (gamma / nf).sqrt().min(1.0 / nf).min(0.5);
        let sigma = (2.0 * c / (epsilon * nf.sqrt()))
            .max(gamma * (8.0 * d).sqrt() / (epsilon * nf.sqrt()))
            .max(gamma / (std::f64::consts::PI.powi(2)) * (20.0 * nf * d / eps2).ln());
        let mut params = DdgParams {
            c,
            gamma,
            sigma,
            beta,
            modulus: 2,
            dim: d_pad,
        };
        if ddg_epsilon(&params, n)? <= epsilon {
            let bound = modulus_bound(c, n, gamma, sigma, beta, d_pad, delta_wrap);
            params.modulus = modulus_from_bound(bound)?;
            params.validate()?;
            return Ok(params);
        }
        gamma /= 2.0;
    }
    Err(Error::Infeasible(format!(
        "no granularity reaches epsilon {epsilon} for n = {n}, d = {d_pad}"
    )))
}
