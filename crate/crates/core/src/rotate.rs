//! Randomized Hadamard flattening `x ↦ H·D·x` and its inverse.
//!
//! `H` is the orthonormal Walsh–Hadamard matrix (entries ±1/√d_pad) and `D`
//! a diagonal of random signs. Inputs are zero-padded to the next power of
//! two; the padded dimension is what the DDG formulas call `d`.

use rand::RngCore;

use crate::error::{param, Result};
use crate::rng::Seed;

#[derive(Debug, Clone, PartialEq)]
pub struct RotationSpec {
    seed: Seed,
    original_dim: usize,
    signs: Vec<f64>,
}

impl RotationSpec {
    /// Signs are drawn from the `rotation` child stream of `seed`.
    pub fn new(seed: Seed, original_dim: usize) -> Result<Self> {
        if original_dim == 0 {
            return Err(param("rotation dimension must be >= 1"));
        }
        let dim = padded_dim(original_dim);
        let mut rng = seed.derive("rotation").rng();
        let mut signs = Vec::with_capacity(dim);
        while signs.len() < dim {
            let bits = rng.next_u64();
            for b in 0..64 {
                if signs.len() == dim {
                    break;
                }
                signs.push(if (bits >> b) & 1 == 1 { -1.0 } else { 1.0 });
            }
        }
        Ok(RotationSpec {
            seed,
            original_dim,
            signs,
        })
    }

    /// Explicit sign diagonal, for hand-checkable cases. `signs.len()` must
    /// equal the padded dimension of `original_dim`.
    pub fn with_signs(original_dim: usize, signs: Vec<f64>) -> Result<Self> {
        if original_dim == 0 || signs.len() != padded_dim(original_dim) {
            return Err(param(format!(
                "expected {} signs for dimension {original_dim}",
                padded_dim(original_dim.max(1))
            )));
        }
        if signs.iter().any(|s| *s != 1.0 && *s != -1.0) {
            return Err(param("signs must be ±1"));
        }
        Ok(RotationSpec {
            seed: Seed::default(),
            original_dim,
            signs,
        })
    }

    pub fn seed(&self) -> Seed {
        self.seed
    }

    pub fn dim(&self) -> usize {
        self.signs.len()
    }

    pub fn original_dim(&self) -> usize {
        self.original_dim
    }

    pub fn signs(&self) -> &[f64] {
        &self.signs
    }

    pub fn flatten(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.original_dim {
            return Err(param(format!(
                "flatten expects length {}, got {}",
                self.original_dim,
                x.len()
            )));
        }
        let mut buf = vec![0.0; self.dim()];
        for ((b, v), s) in buf.iter_mut().zip(x).zip(&self.signs) {
            *b = v * s;
        }
        fwht_orthonormal(&mut buf);
        Ok(buf)
    }

    pub fn unflatten(&self, y: &[f64]) -> Result<Vec<f64>> {
        if y.len() != self.dim() {
            return Err(param(format!(
                "unflatten expects length {}, got {}",
                self.dim(),
                y.len()
            )));
        }
        let mut buf = y.to_vec();
        // The orthonormal Hadamard matrix is symmetric and its own inverse.
        fwht_orthonormal(&mut buf);
        buf.truncate(self.original_dim);
        for (b, s) in buf.iter_mut().zip(&self.signs) {
            *b *= s;
        }
        Ok(buf)
    }
}

pub fn padded_dim(d: usize) -> usize {
    d.max(1).next_power_of_two()
}

/// In-place Walsh–Hadamard transform scaled by 1/√n. `data.len()` must be a
/// power of two.
pub fn fwht_orthonormal(data: &mut [f64]) {
    let n = data.len();
    debug_assert!(n.is_power_of_two());
    let mut h = 1;
    while h < n {
        for block in data.chunks_exact_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a, *b);
                *a = x + y;
                *b = x - y;
            }
        }
        h *= 2;
    }
    let scale = 1.0 / (n as f64).sqrt();
    data.iter_mut().for_each(|v| *v *= scale);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vector::l2_norm;
    use rand::Rng;

    #[test]
    fn one_dimensional_is_identity() {
        let r = RotationSpec::with_signs(1, vec![1.0]).unwrap();
        assert_eq!(r.flatten(&[5.0]).unwrap(), vec![5.0]);
    }

    #[test]
    fn two_dimensional_row() {
        let r = RotationSpec::with_signs(2, vec![1.0, 1.0]).unwrap();
        let y = r.flatten(&[1.0, 0.0]).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((y[0] - h).abs() < 1e-15 && (y[1] - h).abs() < 1e-15);
    }

    #[test]
    fn two_dimensional_inverse_with_flipped_sign() {
        // D·Hᵀ·(1/√2, 1/√2): Hᵀy = (1, 0), then D = diag(1, −1) leaves (1, 0).
        let r = RotationSpec::with_signs(2, vec![1.0, -1.0]).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let x = r.unflatten(&[h, h]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-15);
        assert!(x[1].abs() < 1e-15);
    }

    #[test]
    fn roundtrip_small() {
        let r = RotationSpec::new(Seed::new(3), 3).unwrap();
        assert_eq!(r.dim(), 4);
        let x = r.unflatten(&r.flatten(&[1.0, 2.0, 3.0]).unwrap()).unwrap();
        for (a, b) in x.iter().zip([1.0, 2.0, 3.0]) {
            assert!((a - b).abs() < 1e-10);
        }
        let e1 = [1.0, 0.0, 0.0];
        let back = r.unflatten(&r.flatten(&e1).unwrap()).unwrap();
        for (a, b) in back.iter().zip(e1) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn isometry_and_inverse_d37() {
        let mut rng = Seed::new(11).rng();
        let mut worst_norm: f64 = 0.0;
        let mut worst_inv: f64 = 0.0;
        for i in 0..10_000 {
            let r = RotationSpec::new(Seed::new(i), 37).unwrap();
            assert_eq!(r.dim(), 64);
            let x: Vec<f64> = (0..37).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
            let y = r.flatten(&x).unwrap();
            worst_norm = worst_norm.max((l2_norm(&y) - l2_norm(&x)).abs());
            let back = r.unflatten(&y).unwrap();
            for (a, b) in back.iter().zip(&x) {
                worst_inv = worst_inv.max((a - b).abs());
            }
        }
        assert!(worst_norm < 1e-10, "{worst_norm}");
        assert!(worst_inv < 1e-10, "{worst_inv}");
    }

    #[test]
    fn length_mismatch() {
        let r = RotationSpec::new(Seed::new(0), 5).unwrap();
        assert!(r.flatten(&[1.0; 4]).is_err());
        assert!(r.unflatten(&[1.0; 5]).is_err());
        assert!(RotationSpec::new(Seed::new(0), 0).is_err());
        assert!(RotationSpec::with_signs(3, vec![1.0; 3]).is_err());
    }

    #[test]
    fn signs_are_regenerated_identically() {
        let a = RotationSpec::new(Seed::new(17), 100).unwrap();
        let b = RotationSpec::new(Seed::new(17), 100).unwrap();
        assert_eq!(a.signs(), b.signs());
    }

    #[test]
    fn flattening_concentrates() {
        // Fixed unit vector; random sign diagonals. The max coordinate stays
        // below sqrt(2 ln(2 d / 0.01) / d) in at least 99% of trials.
        let d = 1024;
        let bound = (2.0 * (2.0 * d as f64 / 0.01).ln() / d as f64).sqrt();
        // Dense direction: every coordinate of H·D·x is a random ±1 sum.
        let x = vec![1.0 / (d as f64).sqrt(); d];
        let trials = 10_000;
        let mut ok = 0;
        for i in 0..trials {
            let r = RotationSpec::new(Seed::new(1_000 + i), d).unwrap();
            let y = r.flatten(&x).unwrap();
            if y.iter().fold(0.0f64, |m, v| m.max(v.abs())) <= bound {
                ok += 1;
            }
        }
        assert!(ok as f64 >= 0.99 * trials as f64, "{ok}");
    }
}
