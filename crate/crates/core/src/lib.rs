//! Layered Alamouti-block space-time codes with rotated layers, their
//! equivalent channel, group and classical detectors, diversity
//! certification and a Monte Carlo BER simulator.

pub mod cli;
pub mod constellation;
pub mod detectors;
pub mod diversity;
pub mod equiv_channel;
pub mod error;
pub mod grouping;
pub mod numerics;
pub mod rotation;
pub mod sim;
pub mod stbc;

pub use constellation::Constellation;
pub use error::{Error, Result};
pub use grouping::GroupingScheme;
pub use rotation::RotationMatrix;
pub use stbc::{CodeSpec, Codeword};
