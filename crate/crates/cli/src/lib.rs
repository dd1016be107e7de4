//! File formats and the command line of the bevtrack toolkit.
//!
//! The tracking, forecasting, simulation and evaluation logic lives in
//! `bevtrack-core`; this crate reads and writes MOTChallenge text files,
//! homography and point cloud files, scenario and configuration JSON, and
//! wires the pieces into the `bevtrack` binary.

pub mod cli;
pub mod error;
pub mod files;
pub mod mot;

pub use error::{FileError, FileResult};
