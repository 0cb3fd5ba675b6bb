//! Privacy accounting for the distributed discrete Gaussian.
//!
//! All logarithms are natural. A mechanism that is ½ε²-concentrated DP is
//! (α, ½ε²α)-RDP for every α > 1, and RDP converts to (ε_DP, δ)-DP with
//!
//! ```text
//! ε_DP(δ) = ε(α) + ln(1/(αδ))/(α − 1) + ln(1 − 1/α)
//! ```
//!
//! The last term is negative; it is kept exactly as in the conversion this
//! crate implements, which is tighter than the classical `ln(1/δ)/(α − 1)`.

use std::f64::consts::PI;

use crate::ddg::DdgParams;
use crate::error::{param, Error, Result};

/// `{1 + k/10 : k = 1..20} ∪ {4, 8, 16, 32, 64, 128}`.
pub fn default_alphas() -> Vec<f64> {
    let mut a: Vec<f64> = (1..=20).map(|k| 1.0 + k as f64 / 10.0).collect();
    a.extend([4.0, 8.0, 16.0, 32.0, 64.0, 128.0]);
    a
}

/// Concentrated-DP ε of the DDG mechanism at `params` with `n` clients.
///
/// With Δ₂² = min{c² + γ²d/4 + √(2 ln(1/β))·γ·(c + γ√d/2), (c + γ√d)²} and
/// τ = 10·Σ_{k=1}^{n−1} exp(−2π²(σ/γ)²·k/(k+1)), returns
/// min{√(Δ₂²/(nσ²) + τd/2), Δ₂/(√n·σ) + τ√d}. When β = 0 only the second
/// Δ₂² branch applies.
pub fn ddg_epsilon(params: &DdgParams, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(param("client count must be >= 1"));
    }
    let DdgParams {
        c,
        gamma,
        sigma,
        beta,
        dim,
        ..
    } = *params;
    if !(sigma > 0.0) {
        return Err(Error::Parameter("sigma = 0 gives unbounded epsilon".into()));
    }
    let d = dim as f64;
    let nf = n as f64;
    let worst = (c + gamma * d.sqrt()).powi(2);
    let delta_sq = if beta > 0.0 {
        let tight =
            c * c + gamma * gamma * d / 4.0 + (2.0 * (1.0 / beta).ln()).sqrt() * gamma * (c + gamma * d.sqrt() / 2.0);
        tight.min(worst)
    } else {
        worst
    };
    let tau = tau(sigma / gamma, n);
    let first = (delta_sq / (nf * sigma * sigma) + 0.5 * tau * d).sqrt();
    let second = delta_sq.sqrt() / (nf.sqrt() * sigma) + tau * d.sqrt();
    Ok(first.min(second))
}

/// τ = 10·Σ_{k=1}^{n−1} exp(−2π²·ratio²·k/(k+1)), ratio = σ/γ.
pub fn tau(ratio: f64, n: usize) -> f64 {
    let r2 = ratio * ratio;
    (1..n)
        .map(|k| {
            let k = k as f64;
            (-2.0 * PI * PI * r2 * k / (k + 1.0)).exp()
        })
        .sum::<f64>()
        * 10.0
}

/// `(α, ½ε²α)` for every α.
pub fn rdp_curve_from_cdp(epsilon: f64, alphas: &[f64]) -> Result<Vec<(f64, f64)>> {
    alphas
        .iter()
        .map(|&a| {
            if !(a > 1.0) {
                return Err(param(format!("RDP order must exceed 1, got {a}")));
            }
            Ok((a, 0.5 * epsilon * epsilon * a))
        })
        .collect()
}

/// `ε(α) + ln(1/(αδ))/(α − 1) + ln(1 − 1/α)`.
pub fn rdp_to_dp(alpha: f64, eps_alpha: f64, delta: f64) -> Result<f64> {
    if !(alpha > 1.0) {
        return Err(param(format!("RDP order must exceed 1, got {alpha}")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(param(format!("delta must lie in (0, 1), got {delta}")));
    }
    Ok(eps_alpha + (1.0 / (alpha * delta)).ln() / (alpha - 1.0) + (1.0 - 1.0 / alpha).ln())
}

/// Smallest conversion over the curve, with the order achieving it.
pub fn best_dp(curve: &[(f64, f64)], delta: f64) -> Result<(f64, f64)> {
    let mut best: Option<(f64, f64)> = None;
    for &(a, e) in curve {
        let v = rdp_to_dp(a, e, delta)?;
        if best.is_none_or(|(b, _)| v < b) {
            best = Some((v, a));
        }
    }
    best.ok_or_else(|| param("RDP curve is empty"))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DpPoint {
    pub delta: f64,
    pub epsilon: f64,
    pub alpha: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrivacyReport {
    /// The mechanism is ½ε²-concentrated DP with this ε.
    pub cdp_epsilon: f64,
    pub rdp_curve: Vec<(f64, f64)>,
    pub dp_points: Vec<DpPoint>,
}

impl PrivacyReport {
    pub fn from_cdp(cdp_epsilon: f64, alphas: &[f64], deltas: &[f64]) -> Result<Self> {
        let rdp_curve = rdp_curve_from_cdp(cdp_epsilon, alphas)?;
        let dp_points = deltas
            .iter()
            .map(|&delta| {
                let (epsilon, alpha) = best_dp(&rdp_curve, delta)?;
                Ok(DpPoint { delta, epsilon, alpha })
            })
            .collect::<Result<_>>()?;
        Ok(PrivacyReport {
            cdp_epsilon,
            rdp_curve,
            dp_points,
        })
    }

    pub fn epsilon_at(&self, delta: f64) -> Option<f64> {
        self.dp_points.iter().find(|p| p.delta == delta).map(|p| p.epsilon)
    }
}
