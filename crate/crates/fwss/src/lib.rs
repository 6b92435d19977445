//! Solvers for the fixed weight subset sum problem: given positive integers
//! a_1..a_n, a target t, and a prescribed Hamming weight ell, find a bit
//! vector x of weight ell with sum a_i x_i = t.
//!
//! Three solver families share one instance model:
//!
//! - [`brute`]: exhaustive scans, the reference oracles for everything else;
//! - [`ss4`]: meet-in-the-middle over [`splitting`] systems, including the
//!   Schroeppel-Shamir four-table search with fourth-root space;
//! - [`kset`]: the randomized modular driver built on the [`wagner`] k-set
//!   birthday oracle, trading time against space along T * S^(log2 k).
//!
//! [`bench`] reproduces the reference experiment sweep as CSV.

pub mod bench;
pub mod brute;
pub mod combin;
pub mod error;
pub mod instance;
pub mod kset;
pub mod rng;
pub mod splitting;
pub mod ss4;
pub mod wagner;

pub use error::{Error, Result};
pub use instance::{DensityReport, Instance, SolutionVector};
pub use rng::RngHandle;
