use std::borrow::Cow;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{param, Error, Result};
use crate::rng::Seed;
use crate::sketch::random_unit;
use crate::vector::l2_norm;

/// Matrices with at most this many entries are kept in memory.
const DENSE_LIMIT: usize = 1 << 24;
const POWER_MAX_ITERS: usize = 10_000;
/// Relative change of the Rayleigh quotient at which power iteration stops.
const POWER_TOL: f64 = 1e-13;

#[derive(Debug, Clone)]
enum Entries {
    Dense(Vec<f64>),
    Streamed,
}

/// Gaussian ensemble `S ∈ R^{m×d}` with i.i.d. N(0, 1) entries. Row `r` is
/// drawn from the `row:r` stream of the seed, so rows can be regenerated
/// independently; small matrices are also cached densely.
#[derive(Debug, Clone)]
pub struct GaussianProjection {
    seed: Seed,
    m: usize,
    d: usize,
    entries: Entries,
    sigma_max: f64,
}

impl GaussianProjection {
    pub fn new(seed: Seed, m: usize, d: usize) -> Result<Self> {
        if m == 0 || d == 0 {
            return Err(param("projection needs m, d >= 1"));
        }
        let mut p = GaussianProjection {
            seed,
            m,
            d,
            entries: Entries::Streamed,
            sigma_max: 0.0,
        };
        if m.saturating_mul(d) <= DENSE_LIMIT {
            let mut data = Vec::with_capacity(m * d);
            for r in 0..m {
                data.extend(p.generate_row(r));
            }
            p.entries = Entries::Dense(data);
        }
        p.sigma_max = p.compute_sigma_max()?;
        Ok(p)
    }

    /// Explicit row-major matrix, for hand-checkable cases.
    pub fn from_dense(m: usize, d: usize, data: Vec<f64>) -> Result<Self> {
        if m == 0 || d == 0 || data.len() != m * d {
            return Err(param(format!("expected {m}×{d} entries, got {}", data.len())));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(param("matrix entries must be finite"));
        }
        let mut p = GaussianProjection {
            seed: Seed::default(),
            m,
            d,
            entries: Entries::Dense(data),
            sigma_max: 0.0,
        };
        p.sigma_max = p.compute_sigma_max()?;
        Ok(p)
    }

    pub fn identity(d: usize) -> Result<Self> {
        let mut data = vec![0.0; d * d];
        for i in 0..d {
            data[i * d + i] = 1.0;
        }
        Self::from_dense(d, d, data)
    }

    pub fn rows(&self) -> usize {
        self.m
    }

    pub fn cols(&self) -> usize {
        self.d
    }

    pub fn is_dense(&self) -> bool {
        matches!(self.entries, Entries::Dense(_))
    }

    /// Cached largest singular value.
    pub fn sigma_max(&self) -> f64 {
        self.sigma_max
    }

    fn generate_row(&self, r: usize) -> Vec<f64> {
        let mut rng = self.seed.derive_indexed("row", r).rng();
        (0..self.d).map(|_| rng.sample(StandardNormal)).collect()
    }

    pub fn row(&self, r: usize) -> Cow<'_, [f64]> {
        match &self.entries {
            Entries::Dense(data) => Cow::Borrowed(&data[r * self.d..(r + 1) * self.d]),
            Entries::Streamed => Cow::Owned(self.generate_row(r)),
        }
    }

    /// `S·x`.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.d {
            return Err(param(format!("apply expects length {}, got {}", self.d, x.len())));
        }
        Ok((0..self.m).into_par_iter().map(|r| dot(&self.row(r), x)).collect())
    }

    /// `Sᵀ·v`.
    pub fn apply_t(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.m {
            return Err(param(format!("apply_t expects length {}, got {}", self.m, v.len())));
        }
        let mut out = vec![0.0; self.d];
        for (r, &vr) in v.iter().enumerate() {
            if vr != 0.0 {
                for (o, s) in out.iter_mut().zip(self.row(r).iter()) {
                    *o += vr * s;
                }
            }
        }
        Ok(out)
    }

    /// `‖S_j‖²` for each column `j`.
    pub fn column_norms_sq(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.d];
        for r in 0..self.m {
            for (o, s) in out.iter_mut().zip(self.row(r).iter()) {
                *o += s * s;
            }
        }
        out
    }

    /// Recomputes the largest singular value by power iteration on the
    /// smaller of `SSᵀ` and `SᵀS`.
    pub fn compute_sigma_max(&self) -> Result<f64> {
        let k = self.m.min(self.d);
        let mut gram = vec![0.0; k * k];
        if self.m <= self.d {
            let rows: Vec<Cow<'_, [f64]>> = (0..self.m).map(|r| self.row(r)).collect();
            for i in 0..k {
                for j in 0..=i {
                    let v = dot(&rows[i], &rows[j]);
                    gram[i * k + j] = v;
                    gram[j * k + i] = v;
                }
            }
        } else {
            for r in 0..self.m {
                let row = self.row(r);
                for i in 0..k {
                    let ri = row[i];
                    if ri != 0.0 {
                        for j in 0..k {
                            gram[i * k + j] += ri * row[j];
                        }
                    }
                }
            }
        }
        let mut v = random_unit(k, &mut self.seed.derive("power").rng());
        let mut w = vec![0.0; k];
        let mut lambda = 0.0;
        for _ in 0..POWER_MAX_ITERS {
            for (i, wi) in w.iter_mut().enumerate() {
                *wi = dot(&gram[i * k..(i + 1) * k], &v);
            }
            let next = dot(&w, &v);
            let norm = l2_norm(&w);
            if norm == 0.0 {
                return Err(Error::Numerical("projection matrix is zero".into()));
            }
            for (vi, wi) in v.iter_mut().zip(&w) {
                *vi = wi / norm;
            }
            if (next - lambda).abs() <= POWER_TOL * next.abs() {
                return Ok(next.max(0.0).sqrt());
            }
            lambda = next;
        }
        Err(Error::Numerical(format!(
            "power iteration did not converge in {POWER_MAX_ITERS} iterations"
        )))
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
