//! Discrete Gaussian on the integers.
//!
//! Sampling follows the rejection scheme of Canonne, Kamath and Steinke:
//! a discrete Laplace proposal with scale `⌊σ⌋ + 1`, accepted with a
//! Bernoulli(exp(−·)) coin. The exponential coins are themselves built from
//! Bernoulli(p) draws with `p ≤ 1`, so no CDF table or inversion is involved.

use rand::Rng;

use crate::error::{param, Result};

/// Per-term cutoff for the normalizing series.
const SERIES_CUTOFF: f64 = 1e-18;

/// Scale σ of N_Z(0, σ²), in grid units. σ = 0 is the point mass at 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscreteGaussian {
    sigma: f64,
}

impl DiscreteGaussian {
    pub fn new(sigma: f64) -> Result<Self> {
        if !(sigma >= 0.0) || !sigma.is_finite() {
            return Err(param(format!("sigma must be finite and >= 0, got {sigma}")));
        }
        Ok(DiscreteGaussian { sigma })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> i64 {
        if self.sigma == 0.0 {
            return 0;
        }
        let sigma2 = self.sigma * self.sigma;
        let t = self.sigma.floor() as i64 + 1;
        let tf = t as f64;
        loop {
            let y = sample_discrete_laplace(t, rng);
            let dev = (y.unsigned_abs() as f64) - sigma2 / tf;
            if bernoulli_exp(dev * dev / (2.0 * sigma2), rng) {
                return y;
            }
        }
    }

    pub fn sample_vec<R: Rng + ?Sized>(&self, len: usize, rng: &mut R) -> Vec<i64> {
        (0..len).map(|_| self.sample(rng)).collect()
    }

    /// Probability mass at `x`. Requires σ > 0.
    pub fn pmf(&self, x: i64) -> Result<f64> {
        let z = self.normalizer()?;
        Ok(self.weight(x) / z)
    }

    /// Variance Σ k² p(k), by the same truncated series as the normalizer.
    pub fn variance(&self) -> Result<f64> {
        let z = self.normalizer()?;
        let mut acc = 0.0;
        for k in 1i64.. {
            let w = self.weight(k);
            let term = (k * k) as f64 * w;
            acc += term;
            if w < SERIES_CUTOFF && term < SERIES_CUTOFF {
                break;
            }
        }
        Ok(2.0 * acc / z)
    }

    fn weight(&self, x: i64) -> f64 {
        let xf = x as f64;
        (-(xf * xf) / (2.0 * self.sigma * self.sigma)).exp()
    }

    fn normalizer(&self) -> Result<f64> {
        if !(self.sigma > 0.0) {
            return Err(param("pmf requires sigma > 0"));
        }
        let mut acc = 0.0;
        for k in 1i64.. {
            let w = self.weight(k);
            if w < SERIES_CUTOFF {
                break;
            }
            acc += w;
        }
        Ok(1.0 + 2.0 * acc)
    }
}

/// Draws one N_Z(0, σ²) sample.
pub fn sample<R: Rng + ?Sized>(sigma: f64, rng: &mut R) -> Result<i64> {
    Ok(DiscreteGaussian::new(sigma)?.sample(rng))
}

/// Mass of N_Z(0, σ²) at `x`.
pub fn pmf(sigma: f64, x: i64) -> Result<f64> {
    if !(sigma > 0.0) {
        return Err(param(format!("pmf requires sigma > 0, got {sigma}")));
    }
    DiscreteGaussian::new(sigma)?.pmf(x)
}

#[inline]
fn bernoulli<R: Rng + ?Sized>(p: f64, rng: &mut R) -> bool {
    rng.random::<f64>() < p
}

/// Bernoulli(exp(−x)) for x ∈ [0, 1].
fn bernoulli_exp_unit<R: Rng + ?Sized>(x: f64, rng: &mut R) -> bool {
    let mut k = 1.0;
    while bernoulli(x / k, rng) {
        k += 1.0;
    }
    (k as u64) % 2 == 1
}

/// Bernoulli(exp(−x)) for x ≥ 0.
fn bernoulli_exp<R: Rng + ?Sized>(x: f64, rng: &mut R) -> bool {
    let mut rest = x;
    while rest > 1.0 {
        if !bernoulli_exp_unit(1.0, rng) {
            return false;
        }
        rest -= 1.0;
    }
    bernoulli_exp_unit(rest, rng)
}

/// Discrete Laplace with P(y) ∝ exp(−|y|/t), t ≥ 1.
fn sample_discrete_laplace<R: Rng + ?Sized>(t: i64, rng: &mut R) -> i64 {
    let tf = t as f64;
    loop {
        let u = rng.random_range(0..t);
        if !bernoulli_exp(u as f64 / tf, rng) {
            continue;
        }
        let mut v = 0i64;
        while bernoulli_exp_unit(1.0, rng) {
            v += 1;
        }
        let negative = rng.random::<bool>();
        let magnitude = u + t * v;
        if negative && magnitude == 0 {
            continue;
        }
        return if negative { -magnitude } else { magnitude };
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Seed;

    #[test]
    fn zero_sigma_is_point_mass() {
        let mut rng = Seed::new(1).rng();
        let g = DiscreteGaussian::new(0.0).unwrap();
        assert!((0..1000).all(|_| g.sample(&mut rng) == 0));
    }

    #[test]
    fn negative_sigma_rejected() {
        assert!(DiscreteGaussian::new(-1.0).is_err());
        assert!(DiscreteGaussian::new(f64::NAN).is_err());
        assert!(pmf(0.0, 0).is_err());
        assert!(pmf(-1.0, 0).is_err());
    }

    #[test]
    fn pmf_symmetry_normalization_ratio() {
        for x in 0..10 {
            assert_eq!(pmf(1.0, x).unwrap(), pmf(1.0, -x).unwrap());
        }
        let total: f64 = (-50..=50).map(|x| pmf(1.0, x).unwrap()).sum();
        assert!((total - 1.0).abs() < 1e-12);
        let ratio = pmf(1.0, 0).unwrap() / pmf(1.0, 1).unwrap();
        assert!((ratio - 0.5f64.exp()).abs() < 1e-12);
    }

    #[test]
    fn pmf_at_zero_sigma_one() {
        // Σ_k exp(−k²/2) summed independently to well past 1e-12.
        let z: f64 = (-40i32..=40).map(|k| (-(k * k) as f64 / 2.0).exp()).sum();
        assert!((pmf(1.0, 0).unwrap() - 1.0 / z).abs() < 1e-15);
        assert!((1.0 / z - 0.398942).abs() < 1e-6);
    }

    #[test]
    fn bernoulli_exp_rate() {
        let mut rng = Seed::new(5).rng();
        let n = 200_000;
        for &x in &[0.3, 1.0, 2.5] {
            let hits = (0..n).filter(|_| bernoulli_exp(x, &mut rng)).count();
            let p = f64::exp(-x);
            let se = (p * (1.0 - p) / n as f64).sqrt();
            assert!(((hits as f64 / n as f64) - p).abs() < 5.0 * se, "x = {x}");
        }
    }

    #[test]
    fn sampler_is_reproducible() {
        let g = DiscreteGaussian::new(3.3).unwrap();
        let a = g.sample_vec(100, &mut Seed::new(8).rng());
        let b = g.sample_vec(100, &mut Seed::new(8).rng());
        assert_eq!(a, b);
    }
}
