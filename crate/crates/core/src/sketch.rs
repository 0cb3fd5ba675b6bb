//! Count-mean sketch: the sparse random projection `S ∈ R^{m×d}`.
//!
//! `S` stacks `t` independent count-sketch blocks of width `w` (so `m = t·w`)
//! and scales by `1/√t`. Block `i` sends coordinate `j` to bucket `h_i(j)`
//! with sign `σ_i(j)`; both are regenerated on the fly from the keyed streams
//! `hash:i` and `sign:i`, so `S` is never stored and every column has exactly
//! `t` nonzeros.

use std::sync::Arc;

use rand::{Rng, RngCore};

use crate::error::{param, Result};
use crate::rng::{Seed, StreamRng};
use crate::vector::l2_norm;

/// Block count used by default.
pub const DEFAULT_ROWS: usize = 15;

/// Where the `1/t` scaling of `SᵀS` is applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Normalization {
    /// `1/√t` on both encode and unsketch, so the operator is literally `S`.
    #[default]
    Symmetric,
    /// `1/t` on encode and 1 on unsketch; smaller sketch norm, same `SᵀS`.
    EncoderSide,
}

/// Explicit per-block hash and sign tables, indexed `[block][coordinate]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HashTables {
    buckets: Vec<Vec<u32>>,
    signs: Vec<Vec<i8>>,
}

impl HashTables {
    pub fn new(buckets: Vec<Vec<u32>>, signs: Vec<Vec<i8>>) -> Result<Self> {
        if buckets.is_empty() || buckets.len() != signs.len() {
            return Err(param("hash tables need one bucket row and one sign row per block"));
        }
        let d = buckets[0].len();
        if d == 0 {
            return Err(param("hash tables must cover at least one coordinate"));
        }
        for (b, s) in buckets.iter().zip(&signs) {
            if b.len() != d || s.len() != d {
                return Err(param("hash table rows must all have length d"));
            }
            if s.iter().any(|v| *v != 1 && *v != -1) {
                return Err(param("signs must be ±1"));
            }
        }
        Ok(HashTables { buckets, signs })
    }

    /// The `d × d` identity as a single block of width `d`.
    pub fn identity(d: usize) -> Self {
        HashTables {
            buckets: vec![(0..d as u32).collect()],
            signs: vec![vec![1; d]],
        }
    }

    pub fn rows(&self) -> usize {
        self.buckets.len()
    }

    pub fn dim(&self) -> usize {
        self.buckets[0].len()
    }
}

#[derive(Debug, Clone, PartialEq)]
enum HashSource {
    Seeded(Seed),
    Explicit(Arc<HashTables>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SketchSpec {
    source: HashSource,
    rows: usize,
    width: usize,
    ambient_dim: usize,
    normalization: Normalization,
}

impl SketchSpec {
    pub fn new(seed: Seed, rows: usize, width: usize, ambient_dim: usize) -> Result<Self> {
        if rows == 0 || width == 0 || ambient_dim == 0 {
            return Err(param("sketch rows, width and dimension must all be >= 1"));
        }
        if width > u32::MAX as usize {
            return Err(param("sketch width must fit in 32 bits"));
        }
        Ok(SketchSpec {
            source: HashSource::Seeded(seed),
            rows,
            width,
            ambient_dim,
            normalization: Normalization::Symmetric,
        })
    }

    /// A sketch driven by explicit tables instead of seeded hashes.
    pub fn with_tables(tables: HashTables, width: usize) -> Result<Self> {
        if width == 0 {
            return Err(param("sketch width must be >= 1"));
        }
        if tables.buckets.iter().flatten().any(|&b| b as usize >= width) {
            return Err(param("bucket index out of range for width"));
        }
        Ok(SketchSpec {
            rows: tables.rows(),
            ambient_dim: tables.dim(),
            width,
            source: HashSource::Explicit(Arc::new(tables)),
            normalization: Normalization::Symmetric,
        })
    }

    pub fn normalized(mut self, normalization: Normalization) -> Self {
        self.normalization = normalization;
        self
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    /// Sketch length `m = t·w`.
    pub fn m(&self) -> usize {
        self.rows * self.width
    }

    pub fn normalization(&self) -> Normalization {
        self.normalization
    }

    /// `y = S·g`.
    pub fn encode(&self, g: &[f64]) -> Result<Vec<f64>> {
        if g.len() != self.ambient_dim {
            return Err(param(format!(
                "sketch encode expects length {}, got {}",
                self.ambient_dim,
                g.len()
            )));
        }
        let scale = match self.normalization {
            Normalization::Symmetric => 1.0 / (self.rows as f64).sqrt(),
            Normalization::EncoderSide => 1.0 / self.rows as f64,
        };
        let w = self.width;
        let mut out = vec![0.0; self.m()];
        self.for_each_block(|i, buckets, signs| {
            let block = &mut out[i * w..(i + 1) * w];
            for ((&b, &s), &v) in buckets.iter().zip(signs).zip(g) {
                block[b as usize] += f64::from(s) * v;
            }
        });
        out.iter_mut().for_each(|v| *v *= scale);
        Ok(out)
    }

    /// `x̂ = Sᵀ·v`.
    pub fn unsketch(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.m() {
            return Err(param(format!("unsketch expects length {}, got {}", self.m(), v.len())));
        }
        let scale = match self.normalization {
            Normalization::Symmetric => 1.0 / (self.rows as f64).sqrt(),
            Normalization::EncoderSide => 1.0,
        };
        let w = self.width;
        let mut out = vec![0.0; self.ambient_dim];
        self.for_each_block(|i, buckets, signs| {
            let block = &v[i * w..(i + 1) * w];
            for ((o, &b), &s) in out.iter_mut().zip(buckets).zip(signs) {
                *o += f64::from(s) * block[b as usize];
            }
        });
        out.iter_mut().for_each(|x| *x *= scale);
        Ok(out)
    }

    /// Materialized tables; mostly useful for inspection and tests.
    pub fn tables(&self) -> HashTables {
        let mut buckets = Vec::with_capacity(self.rows);
        let mut signs = Vec::with_capacity(self.rows);
        self.for_each_block(|_, b, s| {
            buckets.push(b.to_vec());
            signs.push(s.to_vec());
        });
        HashTables { buckets, signs }
    }

    fn for_each_block(&self, mut f: impl FnMut(usize, &[u32], &[i8])) {
        match &self.source {
            HashSource::Explicit(t) => {
                for i in 0..self.rows {
                    f(i, &t.buckets[i], &t.signs[i]);
                }
            }
            HashSource::Seeded(seed) => {
                let d = self.ambient_dim;
                let mut buckets = vec![0u32; d];
                let mut signs = vec![0i8; d];
                for i in 0..self.rows {
                    fill_buckets(&mut seed.derive_indexed("hash", i).rng(), self.width, &mut buckets);
                    fill_signs(&mut seed.derive_indexed("sign", i).rng(), &mut signs);
                    f(i, &buckets, &signs);
                }
            }
        }
    }
}

/// Uniform buckets in `[0, w)`. Widths up to 2¹⁶ use 16-bit lanes with
/// Lemire's multiply-and-reject, four lanes per 64-bit draw.
fn fill_buckets(rng: &mut StreamRng, w: usize, out: &mut [u32]) {
    if w == 1 {
        out.fill(0);
        return;
    }
    if w <= 1 << 16 {
        let w32 = w as u32;
        let reject_below = (65536 - w32) % w32;
        let mut lanes = 0u64;
        let mut left = 0;
        let mut next16 = move |rng: &mut StreamRng| -> u32 {
            if left == 0 {
                lanes = rng.next_u64();
                left = 4;
            }
            let x = (lanes & 0xFFFF) as u32;
            lanes >>= 16;
            left -= 1;
            x
        };
        for o in out.iter_mut() {
            loop {
                let prod = next16(rng) * w32;
                if (prod & 0xFFFF) >= reject_below {
                    *o = prod >> 16;
                    break;
                }
            }
        }
    } else {
        for o in out.iter_mut() {
            *o = rng.random_range(0..w as u32);
        }
    }
}

fn fill_signs(rng: &mut StreamRng, out: &mut [i8]) {
    for chunk in out.chunks_mut(64) {
        let bits = rng.next_u64();
        for (k, s) in chunk.iter_mut().enumerate() {
            *s = if (bits >> k) & 1 == 1 { -1 } else { 1 };
        }
    }
}

/// Monte Carlo estimate of `P(‖S·g‖² ≥ (1 + α)‖g‖²)` over fresh sketches
/// (symmetric normalization) and random unit vectors `g`.
///
/// `m` is rounded down to a multiple of `rows`.
pub fn jl_tail_estimate(m: usize, rows: usize, d: usize, trials: usize, alpha: f64, seed: Seed) -> Result<f64> {
    if trials == 0 {
        return Err(param("trials must be >= 1"));
    }
    let width = (m / rows.max(1)).max(1);
    let mut failures = 0usize;
    for k in 0..trials {
        let trial = seed.derive_indexed("trial", k);
        let g = random_unit(d, &mut trial.derive("vector").rng());
        let spec = SketchSpec::new(trial.derive("sketch"), rows, width, d)?;
        let y = spec.encode(&g)?;
        let ny = l2_norm(&y);
        if ny * ny >= 1.0 + alpha {
            failures += 1;
        }
    }
    Ok(failures as f64 / trials as f64)
}

pub(crate) fn random_unit<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<f64> {
    use rand_distr::StandardNormal;
    loop {
        let g: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        let n = l2_norm(&g);
        if n > 0.0 {
            return g.into_iter().map(|v| v / n).collect();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hand_spec() -> SketchSpec {
        let tables = HashTables::new(vec![vec![0, 1, 0]], vec![vec![1, -1, 1]]).unwrap();
        SketchSpec::with_tables(tables, 2).unwrap()
    }

    #[test]
    fn hand_computed_encode_and_unsketch() {
        let s = hand_spec();
        assert_eq!(s.encode(&[1.0, 2.0, 3.0]).unwrap(), vec![4.0, -2.0]);
        assert_eq!(s.unsketch(&[4.0, -2.0]).unwrap(), vec![4.0, 2.0, 4.0]);
    }

    #[test]
    fn zero_maps_to_zero() {
        let s = SketchSpec::new(Seed::new(1), 3, 4, 10).unwrap();
        assert_eq!(s.encode(&[0.0; 10]).unwrap(), vec![0.0; 12]);
        assert_eq!(s.unsketch(&[0.0; 12]).unwrap(), vec![0.0; 10]);
    }

    #[test]
    fn length_checks() {
        let s = SketchSpec::new(Seed::new(1), 3, 4, 10).unwrap();
        assert!(s.encode(&[0.0; 9]).is_err());
        assert!(s.unsketch(&[0.0; 10]).is_err());
        assert!(SketchSpec::new(Seed::new(1), 0, 4, 10).is_err());
        assert!(SketchSpec::new(Seed::new(1), 1, 0, 10).is_err());
        let t = HashTables::new(vec![vec![0, 3]], vec![vec![1, 1]]).unwrap();
        assert!(SketchSpec::with_tables(t, 2).is_err());
    }

    #[test]
    fn exactly_t_nonzeros_per_column() {
        let s = SketchSpec::new(Seed::new(4), 15, 7, 200).unwrap();
        let tables = s.tables();
        for j in 0..200 {
            let cells: std::collections::BTreeSet<(usize, u32)> = (0..15).map(|i| (i, tables.buckets[i][j])).collect();
            assert_eq!(cells.len(), 15);
        }
        // Column j of S, recovered by encoding e_j, has t entries of ±1/√t.
        let mut e = vec![0.0; 200];
        e[17] = 1.0;
        let col = s.encode(&e).unwrap();
        let nz: Vec<f64> = col.into_iter().filter(|v| *v != 0.0).collect();
        assert_eq!(nz.len(), 15);
        assert!(nz.iter().all(|v| (v.abs() - 1.0 / 15f64.sqrt()).abs() < 1e-15));
    }

    #[test]
    fn buckets_are_uniform() {
        let mut counts = [0usize; 7];
        let mut buf = vec![0u32; 70_000];
        fill_buckets(&mut Seed::new(2).rng(), 7, &mut buf);
        buf.iter().for_each(|&b| counts[b as usize] += 1);
        let chi2: f64 = counts.iter().map(|&c| (c as f64 - 10_000.0).powi(2) / 10_000.0).sum();
        // 6 degrees of freedom; 0.999 quantile is 22.46.
        assert!(chi2 < 22.46, "{chi2}");
    }

    #[test]
    fn wide_sketch_uses_full_range() {
        let mut buf = vec![0u32; 1000];
        fill_buckets(&mut Seed::new(3).rng(), 100_000, &mut buf);
        assert!(buf.iter().all(|&b| b < 100_000));
        assert!(buf.iter().any(|&b| b >= 65_536));
    }

    #[test]
    fn normalizations_agree_on_sts() {
        let sym = SketchSpec::new(Seed::new(9), 5, 6, 40).unwrap();
        let enc = sym.clone().normalized(Normalization::EncoderSide);
        let g: Vec<f64> = (0..40).map(|i| (i as f64).sin()).collect();
        let a = sym.unsketch(&sym.encode(&g).unwrap()).unwrap();
        let b = enc.unsketch(&enc.encode(&g).unwrap()).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn degenerate_sketch_fails_jl() {
        let p = jl_tail_estimate(1, 1, 64, 2000, 0.1, Seed::new(5)).unwrap();
        assert!(p > 0.01, "{p}");
    }

    #[test]
    fn median_band_at_zero_distortion() {
        let p = jl_tail_estimate(60, 15, 256, 2000, 0.0, Seed::new(6)).unwrap();
        assert!((0.3..=0.7).contains(&p), "{p}");
    }
}
