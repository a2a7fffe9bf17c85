//! Energy model for quadcopter package delivery.
//!
//! The crate covers the whole pipeline from raw flight logs to fleet-level
//! comparisons:
//!
//! - [`telemetry`]: flight CSV ingestion, stream synchronization, power and energy.
//! - [`segmentation`]: takeoff / cruise / landing regime detection.
//! - [`physics`]: hover induced power from momentum theory.
//! - [`estimation`]: per-regime linear power model, bootstrap errors, ARE evaluation.
//! - [`gbt`]: gradient-boosted regression trees used as a nonlinear baseline.
//! - [`mission`]: mission energy, two-way range and per-km intensity.
//! - [`fleet`]: per-km and per-package energy and GHG across delivery modes.
//! - [`synth`]: synthetic flight generator with known ground truth.
//! - [`cli`]: the `aeroamp` command-line entry point.

pub mod cli;
pub mod estimation;
pub mod fleet;
pub mod gbt;
pub mod mission;
pub mod physics;
pub mod segmentation;
pub mod synth;
pub mod telemetry;

pub use estimation::{AreReport, RegimeModel, RegimeModelSet, SplitPlan};
pub use mission::{EnergyBreakdown, MissionSpec, RangeResult};
pub use physics::{DroneConfig, Environment, HoverPoint};
pub use segmentation::{Regime, RegimeSlice, SegmentationParams};
pub use telemetry::{FlightRecord, FlightSummary, TelemetrySample};

/// Joules per watt-hour.
pub const J_PER_WH: f64 = 3600.0;
