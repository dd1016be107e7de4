//! Long-term multi-object tracking through bird's-eye-view forecasting.
//!
//! Detections from a monocular camera are lifted onto the ground plane with a
//! linearized homography, lost tracks are carried forward by a small set of
//! forecast branches, and re-appearing objects are re-associated with a gated
//! geometric plus appearance score.
//!
//! The crate is `no_std` and only needs `alloc`. File formats and the command
//! line live in the companion `bevtrack` crate.
#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod assignment;
pub mod bbox;
pub mod config;
pub mod error;
pub mod eval;
pub mod experiment;
pub mod forecast;
pub mod geometry;
mod linalg;
pub mod sim;
pub mod tracker;

pub use bbox::PixelBox;
pub use config::RunConfig;
pub use error::{Error, Result};
pub use geometry::{BevPoint, EgomotionTrack, Homography, LinearizedHomography, PixelPoint, Point3};

/// Frame index. MOTChallenge files count frames from 1.
pub type Frame = u32;
