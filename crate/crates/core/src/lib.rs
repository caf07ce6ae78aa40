//! A spectral numerical laboratory for the constructive side of critical
//! Besov-space Navier-Stokes theory on a periodic box: Littlewood-Paley and
//! Kato norm calculus, Picard iteration with higher-order forcing tensors, a
//! small-data mild solver, and explicit splitting algorithms with
//! quantitative certificates.

pub mod error;
pub mod fft;
pub mod field;
pub mod fieldio;
pub mod grid;
pub mod kato;
pub mod lp;
pub mod ops;
pub mod picard;
pub mod splitting;
pub mod synth;
pub mod trajectory;

pub use error::{Error, Result};
pub use field::SpectralField;
pub use grid::GridSpec;
pub use trajectory::Trajectory;
