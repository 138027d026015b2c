//! Financial aftershock analysis: realized volatility from high-frequency
//! index data, objective main-shock detection, threshold-swept aftershock
//! counting, and least-squares calibration of the Omori relaxation law.

pub mod config;
pub mod ingest;
pub mod omori;
pub mod pipeline;
pub mod shockdetect;
pub mod simulate;
pub mod volatility;
