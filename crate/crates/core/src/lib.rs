//! Spectral synthesis on the finite group Z_N^d.
//!
//! The crate is organised bottom-up:
//!
//! - [`lattice`]: points, linear indices and characters of Z_N^d.
//! - [`fourier`]: the unitary transform, band-limited signals and frequency sets.
//! - [`inequalities`]: counting-measure norms and the sup-norm bounds for
//!   signals with prescribed Fourier support.
//! - [`constructions`]: random sets and their largest nontrivial Fourier
//!   coefficient, coordinate subgroups, and an empirical Λ(p)-set search.
//! - [`recovery`]: recovering a separated real signal with hidden frequencies
//!   by L^p minimisation, with an exhaustive oracle.
//! - [`experiments`]: seeded batch runs producing CSV tables.

pub mod constructions;
pub mod error;
pub mod experiments;
pub mod fourier;
pub mod inequalities;
pub mod io;
pub mod lattice;
pub mod recovery;
pub mod rng;

pub use error::{Error, Result};
pub use fourier::{forward, inverse, FreqSet, Signal, Spectrum};
pub use inequalities::Exponent;
pub use lattice::{GridPoint, GridShape};
