//! Bayesian processing of body-induced thermal signatures from low-resolution
//! infrared (thermopile) arrays.
//!
//! The crate covers the full sensing pipeline for wall- and ceiling-mounted
//! 8×8 IR arrays:
//!
//! - [`frame`]: thermal frames and the quantized JSON wire codec
//! - [`layout`] / [`params`]: sensor geometry, ROI definitions and model
//!   parameters with calibrated defaults
//! - [`background`]: empty-scene Gaussian statistics with exponential
//!   forgetting (MEWMA/MEWMC)
//! - [`signature`]: body-induced signature models, the softplus distance law
//!   and signature learning
//! - [`tracking`]: per-ROI occupancy, distance and AOA estimation for
//!   wall-mounted arrays (grid-based recursive Bayes)
//! - [`counting`]: MAP occupancy over ceiling ROIs, subject counting and
//!   mutual-distancing alerts
//! - [`screening`]: contactless body-temperature estimation and fever
//!   screening with IR+radar distance fusion
//! - [`simulator`]: generative scene synthesis used as ground truth by the
//!   evaluation harness

pub mod background;
pub mod counting;
pub mod error;
pub mod frame;
mod gaussian;
pub mod lasso;
pub mod layout;
pub mod params;
pub mod screening;
pub mod signature;
pub mod simulator;
pub mod tracking;

pub use error::{Error, Result};
pub use frame::{decode_frame, encode_frame, FrameRecord, ThermalFrame};
pub use layout::{Mount, RoiSpec, SensorLayout};
pub use params::ModelParams;
