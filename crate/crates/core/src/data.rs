//! Synthetic client datasets.

use std::fmt;
use std::str::FromStr;

use rand::seq::index::sample;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{param, Error, Result};
use crate::rng::Seed;
use crate::sketch::random_unit;
use crate::vector::l2_norm;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataGenerator {
    /// Each client independently uniform on the sphere of radius `c`.
    UniformSphere,
    /// Every client holds the same random vector of norm `c`.
    AllIdentical,
    /// Clients share a random support of size `s`; each holds a perturbed
    /// copy of a common direction on that support, scaled to norm `c`.
    CoordinateSparse { s: usize },
    /// Every client holds `c·e₁`.
    OneHot,
}

impl DataGenerator {
    pub fn generate(&self, n: usize, d: usize, c: f64, seed: Seed) -> Result<Vec<Vec<f64>>> {
        if n == 0 || d == 0 || !(c > 0.0) {
            return Err(param("data generator needs n, d >= 1 and c > 0"));
        }
        let out = match *self {
            DataGenerator::UniformSphere => (0..n)
                .map(|i| {
                    let mut rng = seed.derive_indexed("client", i).rng();
                    random_unit(d, &mut rng).into_iter().map(|v| v * c).collect()
                })
                .collect(),
            DataGenerator::AllIdentical => {
                let x: Vec<f64> = random_unit(d, &mut seed.derive("shared").rng())
                    .into_iter()
                    .map(|v| v * c)
                    .collect();
                vec![x; n]
            }
            DataGenerator::CoordinateSparse { s } => {
                if s > d {
                    return Err(param(format!("sparsity {s} exceeds dimension {d}")));
                }
                if s == 0 {
                    return Ok(vec![vec![0.0; d]; n]);
                }
                let mut rng = seed.derive("support").rng();
                let support = sample(&mut rng, d, s).into_vec();
                let center = random_unit(s, &mut rng);
                (0..n)
                    .map(|i| {
                        let mut rng = seed.derive_indexed("client", i).rng();
                        let local: Vec<f64> = center
                            .iter()
                            .map(|u| u + 0.5 / (s as f64).sqrt() * rng.sample::<f64, _>(StandardNormal))
                            .collect();
                        let norm = l2_norm(&local).max(f64::MIN_POSITIVE);
                        let mut x = vec![0.0; d];
                        for (&j, v) in support.iter().zip(&local) {
                            x[j] = c * v / norm;
                        }
                        x
                    })
                    .collect()
            }
            DataGenerator::OneHot => {
                let mut x = vec![0.0; d];
                x[0] = c;
                vec![x; n]
            }
        };
        Ok(out)
    }
}

impl fmt::Display for DataGenerator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DataGenerator::UniformSphere => f.write_str("sphere"),
            DataGenerator::AllIdentical => f.write_str("identical"),
            DataGenerator::CoordinateSparse { s } => write!(f, "sparse:{s}"),
            DataGenerator::OneHot => f.write_str("onehot"),
        }
    }
}

impl FromStr for DataGenerator {
    type Err = Error;

    /// `sphere`, `identical`, `onehot` or `sparse:<s>`.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sphere" => Ok(DataGenerator::UniformSphere),
            "identical" => Ok(DataGenerator::AllIdentical),
            "onehot" => Ok(DataGenerator::OneHot),
            other => match other.strip_prefix("sparse:") {
                Some(k) => k
                    .parse()
                    .map(|s| DataGenerator::CoordinateSparse { s })
                    .map_err(|_| param(format!("bad sparsity in generator `{other}`"))),
                None => Err(param(format!(
                    "unknown generator `{other}` (expected sphere, identical, onehot, sparse:<s>)"
                ))),
            },
        }
    }
}
