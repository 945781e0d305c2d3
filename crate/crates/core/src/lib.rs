pub mod error;
pub mod features;
pub mod geometry;
pub mod gpc;
pub mod io;
pub mod metrics;
pub mod objectness;
pub mod pipeline;
pub mod propagate;
pub mod raster;
pub mod synth;
pub mod synthetic;

pub use error::{Error, Result};
