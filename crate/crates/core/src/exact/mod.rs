//! Exact linear-algebra and dynamic-programming computations.

pub mod cover;
pub mod heavy;
pub mod hitting;
pub mod induced;
pub mod inequalities;
pub mod power;
pub mod returns;
pub mod spectral;

pub use cover::{cover_probability, cover_probability_exact};
pub use heavy::{heavy_witness, HeavyWitness};
pub use hitting::{ball_sets, hit_set_within, hitting_stats, BallSets, HittingReport};
pub use induced::{induced_chain, InducedChain};
pub use inequalities::{check_return_inequalities, degree_split, DegreeSplit, ReturnInequalities};
pub use power::transition_power;
pub use returns::{classify_recurrent, return_profile, ReturnSurvival};
pub use spectral::{expander_bounds, spectral_gap, ExpanderBounds, SpectralReport};
