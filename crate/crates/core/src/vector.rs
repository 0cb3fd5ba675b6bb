//! Real vectors, norms and ℓ₂ clipping.

use std::ops::Deref;

use crate::error::{param, Result};

/// A finite real vector of dimension at least one.
#[derive(Debug, Clone, PartialEq)]
pub struct RealVector(Vec<f64>);

impl RealVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(param("vector must have dimension >= 1"));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(param(format!("entry {i} is not finite")));
        }
        Ok(RealVector(values))
    }

    pub fn zeros(dim: usize) -> Self {
        RealVector(vec![0.0; dim.max(1)])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for RealVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl TryFrom<Vec<f64>> for RealVector {
    type Error = crate::Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        RealVector::new(values)
    }
}

pub fn l2_norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Scales `x` by `min(1, c / ‖x‖₂)`.
pub fn clip_l2(x: &[f64], c: f64) -> Result<Vec<f64>> {
    if !(c > 0.0) || !c.is_finite() {
        return Err(param(format!("clip bound must be positive and finite, got {c}")));
    }
    let norm = l2_norm(x);
    if norm <= c {
        return Ok(x.to_vec());
    }
    let scale = c / norm;
    let mut out: Vec<f64> = x.iter().map(|v| v * scale).collect();
    // Rounding can leave the result a few ulps above c; shrink until it is not.
    let mut n = l2_norm(&out);
    while n > c {
        let s = 1.0 - f64::EPSILON;
        out.iter_mut().for_each(|v| *v *= s);
        n = l2_norm(&out);
    }
    Ok(out)
}

pub(crate) fn mean_of(xs: &[Vec<f64>]) -> Vec<f64> {
    let d = xs.first().map_or(0, Vec::len);
    let mut acc = vec![0.0; d];
    for x in xs {
        for (a, v) in acc.iter_mut().zip(x) {
            *a += v;
        }
    }
    let n = xs.len() as f64;
    acc.iter_mut().for_each(|a| *a /= n);
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn norms() {
        assert_eq!(l2_norm(&[3.0, 4.0]), 5.0);
        assert_eq!(l2_norm(&[0.0]), 0.0);
        assert_eq!(l2_norm(&[1.0, 1.0, 1.0, 1.0]), 2.0);
    }

    #[test]
    fn clip_examples() {
        let y = clip_l2(&[3.0, 4.0], 1.0).unwrap();
        assert!((y[0] - 0.6).abs() < 1e-15 && (y[1] - 0.8).abs() < 1e-15);
        assert_eq!(clip_l2(&[0.1, 0.0], 1.0).unwrap(), vec![0.1, 0.0]);
        assert_eq!(clip_l2(&[0.0, 0.0], 7.0).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn clip_rejects_nonpositive_bound() {
        assert!(matches!(clip_l2(&[1.0], 0.0), Err(crate::Error::Parameter(_))));
        assert!(clip_l2(&[1.0], -2.0).is_err());
    }

    #[test]
    fn real_vector_validation() {
        assert!(RealVector::new(vec![]).is_err());
        assert!(RealVector::new(vec![1.0, f64::NAN]).is_err());
        assert!(RealVector::new(vec![1.0, f64::INFINITY]).is_err());
        assert_eq!(RealVector::new(vec![2.0]).unwrap().as_slice(), &[2.0]);
    }

    proptest! {
        #[test]
        fn clip_is_idempotent_and_bounded(
            x in prop::collection::vec(-1e6f64..1e6, 1..40),
            c in 1e-3f64..1e3,
        ) {
            let once = clip_l2(&x, c).unwrap();
            prop_assert!(l2_norm(&once) <= c + 1e-12);
            let twice = clip_l2(&once, c).unwrap();
            prop_assert_eq!(once, twice);
        }
    }
}
