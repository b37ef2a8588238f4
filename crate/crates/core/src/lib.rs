//! Cell-free massive MIMO uplink with distributed iterative detection and
//! decoding and LLR-driven access-point selection.
//!
//! The pipeline of one Monte Carlo trial is: build the scenario
//! ([`netmodel`]), pick serving APs ([`selection`]), filter locally at each
//! AP ([`apfrontend`]), combine and iterate with the LDPC decoder at the
//! central unit ([`cpu`], [`codec`]). [`harness`] sweeps trials and SNR points
//! and writes the result files.

pub mod apfrontend;
pub mod codec;
pub mod cpu;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod netmodel;
pub mod rng;
pub mod selection;

pub use error::{Error, Result};
pub use selection::{ServiceMap, Strategy};
