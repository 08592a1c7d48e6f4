//! Valveless (Liebau) pumping: periodic Green's functions, positivity certificates
//! for singular periodic equations and a grid solver for their positive solutions.

pub mod certify;
pub mod cyclic;
pub mod error;
pub mod funcspec;
pub mod greens;
pub mod numeric;
pub mod presets;
pub mod problem;
pub mod pump;
pub mod regression;
pub mod solve;
pub mod spectral;

pub use error::{Error, Result};
