//! Synthetic data with known ground truth.
//!
//! All randomness comes from ChaCha8 (`rand_chacha::ChaCha8Rng`) seeded through
//! `SeedableRng::seed_from_u64`, a portable generator whose output is identical
//! across platforms for a given seed.

mod events;
mod planted;

pub use events::{bin_counts, simulate_omori_events, EventRecord, SimMode, SimSpec};
pub use planted::{
    synthetic_price_series, DecayProfile, PlantedSeries, PlantedSeriesSpec, PlantedShock,
    PlantedTruth,
};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum SimError {
    #[error("invalid simulation spec: {0}")]
    Invalid(String),
    #[error("p = {0} makes the intensity grow past its t = 0 value; thinning needs p >= 0")]
    UnboundedIntensity(f64),
}

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
