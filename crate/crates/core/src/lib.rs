pub mod benchmark;
pub mod classifier;
pub mod domain;
pub mod negotiators;
pub mod protocol;
pub mod reviewer;
pub mod rl;
pub mod sac;
mod error;
pub mod seed;
pub mod switching;

pub use error::{Error, Result};
