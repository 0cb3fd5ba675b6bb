//! Differentially private distributed mean estimation under secure
//! aggregation.
//!
//! Clients compress their vectors with a count-mean sketch (or a Gaussian
//! projection for sparse means), encode them with the distributed discrete
//! Gaussian mechanism over `Z_M`, and a simulated secure-aggregation server
//! sees only the modular sum. The server decodes the mean linearly, or with
//! a LASSO when the mean is sparse. Privacy is tracked as concentrated DP and
//! converted to (ε, δ)-DP through Rényi DP.
//!
//! ```
//! use dme_core::{dme::{run_round, DmeConfig}, DataGenerator, Seed};
//!
//! let cfg = DmeConfig::new(8, 64, 1.0, 1.0);
//! let xs = DataGenerator::UniformSphere.generate(8, 64, 1.0, Seed::new(1)).unwrap();
//! let (estimate, report) = run_round(&xs, &cfg, Seed::new(2)).unwrap();
//! assert_eq!(estimate.len(), 64);
//! assert!(report.cdp_epsilon().unwrap() <= 1.0);
//! ```

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod accounting;
pub mod bench;
pub mod data;
pub mod ddg;
pub mod dgauss;
pub mod dme;
mod error;
pub mod rng;
pub mod rotate;
pub mod secagg;
pub mod selftest;
pub mod sketch;
pub mod sparse;
pub mod vector;

pub use data::DataGenerator;
pub use error::{Error, Result};
pub use rng::Seed;
pub use vector::RealVector;
