//! Discrete-event simulation of a gated single-photon detector under bright
//! light manipulation, together with the self-tests a receiver can run to
//! notice it.
//!
//! The main entry points are [`engine::run_experiment`] for batches of trials
//! and [`detector::process_timeline`] for a single optical timeline.

pub mod detector;
pub mod engine;
pub mod error;
pub mod harness;

pub mod optics;
pub mod rng;
pub mod selftest;
pub mod stats;
pub mod time;

pub use detector::{ClickCause, ClickRecord, DetectorParams};
pub use engine::{run_experiment, run_trial, sweep, ExperimentConfig, Scenario, TrialResult};
pub use error::{Error, Result};
pub use optics::{AttackScenario, OpticalTimeline};
pub use rng::{RandomStream, StreamTag};
pub use selftest::{Decision, SelfTestPlan, Strategy, Verdict};
pub use time::Time;
