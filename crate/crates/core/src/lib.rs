//! Circuit-theoretic beamforming for hybrid arrays of active and
//! reconfigurable parasitic dipoles.
//!
//! The crate covers the induced-EMF impedance model of side-by-side dipole
//! arrays ([`em_model`]), geometric multipath channels ([`channel`]), the
//! multiport circuit of a loaded array ([`circuit`]), closed-form and numerical
//! load/current optimizers ([`solver`]), benchmark architectures
//! ([`benchmarks`]) and the Monte Carlo drivers behind the `parasim` binary
//! ([`sweep`], [`pattern`]).

pub mod benchmarks;
pub mod channel;
pub mod circuit;
pub mod config;
pub mod em_model;
pub mod error;
pub mod linalg;
pub mod pattern;
mod quadrature;
pub mod solver;
pub mod sweep;

pub use error::{Error, Result};
