//! Samplers and exact finite-depth measure engines for Galton-Watson and
//! Florida-style random closed sets on binary Cantor space.
//!
//! The crate has three layers:
//!
//! * combinatorics and parameters ([`strings`], [`params`], [`prob`]);
//! * randomized machinery: reproducible counter-based sampling
//!   ([`rng`], [`sampling`]), exact cylinder probabilities and their
//!   brute-force oracles ([`measures`]), and the overlay map with a
//!   measure-preservation verifier ([`overlay`]);
//! * analytics: gamma-weight test constructions and guessing machinery
//!   ([`gamma_tests`]), and ultrametric energy / dimension tools
//!   ([`dimension`]).
//!
//! Everything is a pure function of its inputs; randomized operations are
//! pure functions of a seed, so results are reproducible under any degree
//! of parallelism.

pub mod dimension;
pub mod error;
pub mod gamma_tests;
pub mod measures;
pub mod overlay;
pub mod params;
pub mod prob;
pub mod report;
pub mod rng;
pub mod sampling;
pub mod stats;
pub mod strings;

pub use error::{Error, Result};
pub use prob::{GammaSpec, Prob, Scalar};
