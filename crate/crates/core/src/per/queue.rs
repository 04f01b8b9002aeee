//! Bounded many-producer, single-consumer episode hand-off.

use std::sync::mpsc::{sync_channel, Receiver, SyncSender, TryRecvError};
use std::time::Duration;

/// Producer half. Cloned once per worker; `send` blocks while the queue is full.
#[derive(Debug)]
pub struct EpisodeSender<T> {
    inner: SyncSender<T>,
}

impl<T> Clone for EpisodeSender<T> {
    fn clone(&self) -> Self {
        Self {
            inner: self.inner.clone(),
        }
    }
}

impl<T> EpisodeSender<T> {
    /// Returns the episode back if the consumer has gone away.
    pub fn send(&self, episode: T) -> Result<(), T> {
        self.inner.send(episode).map_err(|e| e.0)
    }
}

#[derive(Debug)]
pub struct EpisodeReceiver<T> {
    inner: Receiver<T>,
}

impl<T> EpisodeReceiver<T> {
    /// Everything currently queued, without blocking.
    pub fn drain(&self) -> Vec<T> {
        let mut out = Vec::new();
        loop {
            match self.inner.try_recv() {
                Ok(e) => out.push(e),
                Err(TryRecvError::Empty | TryRecvError::Disconnected) => return out,
            }
        }
    }

    /// Waits up to `timeout` for one episode. `None` on timeout or when
    /// every producer has hung up.
    pub fn recv_timeout(&self, timeout: Duration) -> Option<T> {
        self.inner.recv_timeout(timeout).ok()
    }

    /// Blocks for the next episode; `None` once all producers are gone.
    pub fn recv(&self) -> Option<T> {
        self.inner.recv().ok()
    }
}

pub fn episode_queue<T>(capacity: usize) -> (EpisodeSender<T>, EpisodeReceiver<T>) {
    let (tx, rx) = sync_channel(capacity.max(1));
    (EpisodeSender { inner: tx }, EpisodeReceiver { inner: rx })
}
