//! Simulated secure aggregation over `(Z_M)^m`.
//!
//! The server side is [`AggregationRound`]: it folds each client message into
//! a running elementwise sum mod `M` and keeps nothing else. There is no way
//! to read back an individual message:
//!
//! ```compile_fail
//! use dme_core::secagg::{AggregationRound, GroupVector};
//! let mut round = AggregationRound::new(16, 2).unwrap();
//! round.absorb(&GroupVector::new(vec![1, 2], 16).unwrap()).unwrap();
//! let _ = round.messages();
//! ```

use crate::error::{param, Error, Result};

/// Residues in `[0, M)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GroupVector {
    residues: Vec<u64>,
    modulus: u64,
}

impl GroupVector {
    pub fn new(residues: Vec<u64>, modulus: u64) -> Result<Self> {
        check_modulus(modulus)?;
        if let Some(r) = residues.iter().find(|&&r| r >= modulus) {
            return Err(param(format!("residue {r} not below modulus {modulus}")));
        }
        Ok(GroupVector { residues, modulus })
    }

    pub fn zeros(len: usize, modulus: u64) -> Result<Self> {
        check_modulus(modulus)?;
        Ok(GroupVector {
            residues: vec![0; len],
            modulus,
        })
    }

    /// Reduces arbitrary signed integers into `[0, M)`.
    pub fn from_signed(values: &[i64], modulus: u64) -> Result<Self> {
        check_modulus(modulus)?;
        let m = i128::from(modulus);
        let residues = values.iter().map(|&v| i128::from(v).rem_euclid(m) as u64).collect();
        Ok(GroupVector { residues, modulus })
    }

    pub fn residues(&self) -> &[u64] {
        &self.residues
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn len(&self) -> usize {
        self.residues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.residues.is_empty()
    }

    /// Representatives in `[−M/2, M/2)`.
    pub fn to_signed(&self) -> Vec<i64> {
        self.residues.iter().map(|&r| signed_lift(r, self.modulus)).collect()
    }
}

/// The representative of `r (mod M)` in `[−M/2, M/2)`.
pub fn signed_lift(r: u64, modulus: u64) -> i64 {
    let r = r % modulus;
    if r >= modulus / 2 + modulus % 2 {
        (i128::from(r) - i128::from(modulus)) as i64
    } else {
        r as i64
    }
}

fn check_modulus(modulus: u64) -> Result<()> {
    if !(2..=1 << 62).contains(&modulus) {
        return Err(param(format!("modulus must be in [2, 2^62], got {modulus}")));
    }
    Ok(())
}

/// Server-side accumulator for one round.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AggregationRound {
    accumulated: Vec<u64>,
    modulus: u64,
    client_count: usize,
}

impl AggregationRound {
    pub fn new(modulus: u64, dim: usize) -> Result<Self> {
        check_modulus(modulus)?;
        Ok(AggregationRound {
            accumulated: vec![0; dim],
            modulus,
            client_count: 0,
        })
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn dim(&self) -> usize {
        self.accumulated.len()
    }

    pub fn client_count(&self) -> usize {
        self.client_count
    }

    pub fn absorb(&mut self, msg: &GroupVector) -> Result<()> {
        if msg.modulus != self.modulus {
            return Err(Error::Protocol(format!(
                "message modulus {} does not match round modulus {}",
                msg.modulus, self.modulus
            )));
        }
        if msg.len() != self.dim() {
            return Err(Error::Protocol(format!(
                "message length {} does not match round dimension {}",
                msg.len(),
                self.dim()
            )));
        }
        let m = self.modulus;
        for (acc, &r) in self.accumulated.iter_mut().zip(&msg.residues) {
            // Both operands are below M ≤ 2^62, so the sum cannot overflow.
            *acc = (*acc + r) % m;
        }
        self.client_count += 1;
        Ok(())
    }

    /// Folds a partial sum computed on another shard into this one.
    pub fn merge(&mut self, other: &AggregationRound) -> Result<()> {
        if other.modulus != self.modulus || other.dim() != self.dim() {
            return Err(Error::Protocol("cannot merge rounds with different shapes".into()));
        }
        let m = self.modulus;
        for (a, &b) in self.accumulated.iter_mut().zip(&other.accumulated) {
            *a = (*a + b) % m;
        }
        self.client_count += other.client_count;
        Ok(())
    }

    /// The only server-visible output: the modular sum.
    pub fn sum(&self) -> GroupVector {
        GroupVector {
            residues: self.accumulated.clone(),
            modulus: self.modulus,
        }
    }
}

/// Per-client message size `m·log₂M`.
pub fn bits_per_client(m: usize, modulus: u64) -> Result<u64> {
    if !modulus.is_power_of_two() || modulus < 2 {
        return Err(param(format!("modulus must be a power of two >= 2, got {modulus}")));
    }
    Ok(m as u64 * u64::from(modulus.trailing_zeros()))
}
