pub mod association;
pub mod cli;
pub mod error;
pub mod irs;
pub mod link_budget;
pub mod localization;
pub mod rng;
pub mod scene;
pub mod sim;
pub mod waveform;
