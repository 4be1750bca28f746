//! Riemann–Liouville fractional integrals and bounded variation on sampled functions.

pub mod cli;
pub mod error;
pub mod fracint;
pub mod fractaldim;
pub mod funcspace;
pub mod special;
pub mod variation;
pub mod verify;

pub use error::{Error, Result};
