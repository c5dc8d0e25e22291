//! Cover-time analysis of finite Markov chains: exact and Monte Carlo engines,
//! martingale certificates and partition constructions.

pub mod chain;
pub mod error;
pub mod exact;
pub mod generators;
pub mod graph;
pub mod martingale;
pub mod mc;
pub mod partition;
pub mod rational;

pub use chain::{MarkovChain, StartRule, WalkTrace};
pub use error::{Error, Result};
pub use graph::Graph;

/// The fixed small constant used for partition sizes and degree horizons.
pub const GAMMA: f64 = 0.1;
