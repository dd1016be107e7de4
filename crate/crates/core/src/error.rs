use alloc::string::String;
use alloc::vec::Vec;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("degenerate input: {0}")]
    DegenerateInput(&'static str),
    #[error("BEV point ({x}, {y}) lies outside the invertible domain of the image mapping")]
    OutOfDomain { x: f64, y: f64 },
    #[error("forecast has no live branches")]
    DeadForecast,
    #[error("frame {got} is not after the previous frame {previous}")]
    NonMonotonicFrame { previous: u32, got: u32 },
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("missing ground truth for tracks {0:?}")]
    MissingGroundTruth(Vec<u32>),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
