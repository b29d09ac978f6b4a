//! Possession and event detection for 2D football tracking data.
//!
//! The pipeline turns per-frame player/ball coordinates into a frame-level
//! ball-control timeline and a chronological events table (passes, shots,
//! saves, set pieces, ...), plus a benchmark harness for comparing detected
//! events against manual annotations and a synthetic-match generator used
//! as a ground-truth oracle.

pub mod analytics;
pub mod benchmark;
pub mod config;
pub mod events;
pub mod frames;
pub mod geometry;
pub mod ingest;
pub mod pipeline;
pub mod possession;
pub mod setpiece;
pub mod synth;

pub use config::RunConfig;
pub use frames::{BallStatus, Frame, FrameSeries, PlayerIdx, Point, Role, Roster, TeamIdx};
pub use pipeline::{detect, DetectOutput};
