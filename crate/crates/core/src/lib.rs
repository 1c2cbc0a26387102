//! Desk-scale laboratory for timing side-channels in token-streaming
//! language-model serving.
//!
//! The pipeline is: [`specsim`] generates token emissions with data-dependent
//! timing, [`wirechan`] turns them into an observable packet stream,
//! [`capture`] is the adversary's sensing layer over that stream,
//! [`attacks`] holds the passive and active adversary procedures,
//! [`defense`] implements constant-rate pacing, and [`harness`] wires
//! everything into reproducible experiments.

pub mod attacks;
pub mod capture;
pub mod defense;
pub mod error;
pub mod gmm;
pub mod harness;
pub mod specsim;
pub mod util;
pub mod wirechan;

pub use error::{Error, Result};

/// Virtual timestamps and durations are integer nanoseconds everywhere.
pub type Nanos = u64;
