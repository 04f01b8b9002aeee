//! Mapless load-carrier docking with deep reinforcement learning.
//!
//! The crate is organised bottom-up:
//!
//! - [`world`]: deterministic 2D warehouse simulator (kinematics, LiDAR and
//!   semantic ray sensing, reward, task randomization).
//! - [`nn`]: small dense networks with a recorded reverse pass, Adam, and a
//!   checksummed binary checkpoint codec.
//! - [`sac`]: soft actor-critic with a tanh-squashed Gaussian policy, twin
//!   critics with hard target copies and a learned temperature.
//! - [`per`]: proportional prioritized replay on a sum tree and the bounded
//!   episode queue shared by workers and the learner.
//! - [`curriculum`]: the success-prediction network, adaptive filtering and
//!   dynamic task selection.
//! - [`orchestrator`]: asynchronous workers, the learner loop, snapshots and
//!   checkpoints.
//! - [`harness`]: configuration, training runs, grid evaluation and reports.

pub mod curriculum;
pub mod error;
pub mod harness;
pub mod nn;
pub mod orchestrator;
pub mod per;
pub mod sac;
pub mod world;

pub use error::{Error, Result};
