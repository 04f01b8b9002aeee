//! Prioritized experience replay and the worker-to-master episode queue.

mod queue;
mod replay;
mod sum_tree;

pub use queue::{episode_queue, EpisodeReceiver, EpisodeSender};
pub use replay::{PerConfig, PrioritizedReplay, SampledBatch};
pub use sum_tree::SumTree;
