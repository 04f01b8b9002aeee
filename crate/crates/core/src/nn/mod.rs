//! Dense networks with a recorded reverse pass, Adam, and checkpoint encoding.
//!
//! Everything is computed in `f64`.

pub mod adam;
pub mod codec;
mod dense;

pub use adam::{adam_step, AdamConfig, AdamState};
pub use dense::{sigmoid, Activation, Dense, DenseNet, Gradients, Tape};
