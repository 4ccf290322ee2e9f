//! Acoustic leak detection for liquid pipelines.
//!
//! Hydrophone and static-pressure records are cut into overlapping
//! batches, reduced to features, and compared against a detection domain
//! in a two-feature plane. Detected batches are sized with a jet-noise
//! power law, and a leak between two stations is located by
//! cross-correlating their band-passed hydrophone signals.
//!
//! A synthesizer produces multi-station records of a pumped line with a
//! scripted leak, so every stage can be exercised without field data.

pub mod commands;
pub mod detect;
pub mod dsp;
pub mod error;
pub mod hydraulics;
pub mod io;
pub mod model;
pub mod synth;

pub use error::{Error, Result};
