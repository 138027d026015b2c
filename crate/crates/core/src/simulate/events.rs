use rand::RngExt;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use super::{seeded_rng, SimError};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SimMode {
    #[default]
    EventTimes,
    IntervalCounts,
}

/// Ground truth for an Omori point process on `(0, horizon]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimSpec {
    #[serde(rename = "K")]
    pub k: f64,
    pub p: f64,
    pub tau: f64,
    pub horizon: u32,
    pub seed: u64,
    #[serde(default)]
    pub mode: SimMode,
}

impl SimSpec {
    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.k.is_finite() && self.k > 0.0) {
            return Err(SimError::Invalid(format!(
                "K must be positive, got {}",
                self.k
            )));
        }
        if !(self.tau.is_finite() && self.tau > 0.0) {
            return Err(SimError::Invalid(format!(
                "tau must be positive, got {}",
                self.tau
            )));
        }
        if self.horizon < 1 {
            return Err(SimError::Invalid("horizon must be at least 1".into()));
        }
        if !self.p.is_finite() {
            return Err(SimError::Invalid(format!(
                "p must be finite, got {}",
                self.p
            )));
        }
        if self.p < 0.0 {
            return Err(SimError::UnboundedIntensity(self.p));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EventRecord {
    /// Event times in `(0, horizon]`, ascending.
    Times(Vec<f64>),
    /// Events per unit interval `(i - 1, i]`, `i = 1..=horizon`.
    Counts(Vec<u32>),
}

impl EventRecord {
    pub fn total(&self) -> usize {
        match self {
            EventRecord::Times(t) => t.len(),
            EventRecord::Counts(c) => c.iter().map(|&v| v as usize).sum(),
        }
    }
}

/// Simulates the inhomogeneous Poisson process with intensity
/// `K (t + tau)^-p` by thinning a homogeneous process at the peak rate
/// `K tau^-p`. The intensity is non-increasing for `p >= 0`, so the peak bounds
/// it everywhere; negative `p` is rejected.
pub fn simulate_omori_events(spec: &SimSpec) -> Result<EventRecord, SimError> {
    spec.validate()?;
    let times = event_times(spec);
    Ok(match spec.mode {
        SimMode::EventTimes => EventRecord::Times(times),
        SimMode::IntervalCounts => EventRecord::Counts(bin_counts(&times, spec.horizon)),
    })
}

fn event_times(spec: &SimSpec) -> Vec<f64> {
    let mut rng = seeded_rng(spec.seed);
    let bound = spec.k * spec.tau.powf(-spec.p);
    let horizon = f64::from(spec.horizon);
    let mut times = Vec::new();
    let mut t = 0.0;
    loop {
        let gap: f64 = Exp1.sample(&mut rng);
        t += gap / bound;
        if t > horizon {
            break;
        }
        let u: f64 = rng.random();
        let accept = (spec.tau / (t + spec.tau)).powf(spec.p);
        if u < accept {
            times.push(t);
        }
    }
    times
}

/// Per-interval counts over `(i - 1, i]`.
pub fn bin_counts(times: &[f64], horizon: u32) -> Vec<u32> {
    let mut counts = vec![0u32; horizon as usize];
    for &t in times {
        let i = (t.ceil() as usize).clamp(1, horizon as usize);
        counts[i - 1] += 1;
    }
    counts
}
