// SPDX-License-Identifier: Apache-2.0

//! Bit-exact simulation of multiplier-less square-law activation functions.
//!
//! The crate is organised bottom-up:
//!
//! - [`fixedpoint`]: two's-complement words and saturating arithmetic.
//! - [`generator`]: the counter-driven iterative generator (symmetric,
//!   LogSQNL, asymmetric and gated modes).
//! - [`closedform`]: exact rational closed forms the generator is checked against.
//! - [`analysis`]: deviation profiles, histograms, segment counting and the
//!   gated error surface.
//! - [`dither`]: floating-point stochastic reference and the tansig fit.
//! - [`resources`]: NAND-equivalent gate cost model and bills of materials.
//! - [`floatfamily`]: real-valued activations with analytic derivatives.
//! - [`nn`]: integer GEMM, and fixed-point / floating-point LSTM cells.
//! - [`goldens`]: fixture store and the brute-force exact oracle.
//! - [`cli`]: the `sqnl` command-line front end.

pub mod analysis;
pub mod cli;
pub mod closedform;
pub mod dither;
mod error;
pub mod fixedpoint;
pub mod floatfamily;
pub mod generator;
pub mod goldens;
pub mod nn;
pub mod resources;

pub use error::{Error, Result};
pub use fixedpoint::{SatBound, Word};
pub use generator::{GeneratorConfig, GeneratorMode, MappingTable, Sequence};
