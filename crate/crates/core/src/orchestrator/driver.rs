//! Training loops: inline single-worker mode and threaded workers.

use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::thread;
use std::time::{Duration, Instant};

use super::{EnvConfig, EpisodeRecord, Master, SnapshotBoard, TrainingConfig, Worker};
use crate::curriculum::NavAclConfig;
use crate::per::{episode_queue, PerConfig};
use crate::sac::SacConfig;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainingSummary {
    pub episodes: u64,
    /// Transitions ingested by the master.
    pub transitions: u64,
    /// Transitions workers successfully handed to the queue.
    pub transitions_sent: u64,
    pub updates: u64,
    pub elapsed_secs: f64,
    pub stopped_by_time: bool,
}

/// Master plus its workers, with the configuration they were built from.
#[derive(Debug, Clone)]
pub struct Trainer {
    pub env: EnvConfig,
    pub sac: SacConfig,
    pub per: PerConfig,
    pub nav: NavAclConfig,
    pub training: TrainingConfig,
    pub master: Master,
    pub workers: Vec<Worker>,
}

impl Trainer {
    pub fn new(
        env: EnvConfig,
        sac: SacConfig,
        per: PerConfig,
        nav: NavAclConfig,
        training: TrainingConfig,
    ) -> Result<Self> {
        let mut errors = Vec::new();
        env.validate(&mut errors);
        sac.validate(&mut errors);
        per.validate(&mut errors);
        nav.validate(&mut errors);
        training.validate(&mut errors);
        if !errors.is_empty() {
            return Err(Error::Config(errors));
        }
        let master = Master::new(
            env.observation_len(),
            sac.clone(),
            per,
            nav.clone(),
            training.clone(),
        )?;
        let count = if training.synchronous {
            1
        } else {
            training.workers
        };
        let workers = (0..count as u32)
            .map(|id| {
                Worker::new(
                    id,
                    training.seed,
                    env.clone(),
                    nav.clone(),
                    training.variant,
                )
            })
            .collect();
        Ok(Self {
            env,
            sac,
            per,
            nav,
            training,
            master,
            workers,
        })
    }

    /// Trains until the episode budget or time limit is reached, calling
    /// `on_episode` for every ingested episode in ingestion order.
    pub fn run<F: FnMut(&EpisodeRecord)>(&mut self, on_episode: F) -> Result<TrainingSummary> {
        let start = Instant::now();
        let updates_before = self.master.sac.updates;
        let mut summary = if self.training.synchronous {
            self.run_sync(start, on_episode)?
        } else {
            self.run_async(start, on_episode)?
        };
        summary.episodes = self.master.episodes;
        summary.transitions = self.master.transitions;
        summary.updates = self.master.sac.updates - updates_before;
        summary.elapsed_secs = start.elapsed().as_secs_f64();
        Ok(summary)
    }

    fn out_of_time(&self, start: Instant) -> bool {
        self.training
            .time_limit
            .is_some_and(|t| start.elapsed().as_secs_f64() >= t)
    }

    /// One episode, then its owed updates, strictly alternating.
    pub fn run_sync<F: FnMut(&EpisodeRecord)>(
        &mut self,
        start: Instant,
        mut on_episode: F,
    ) -> Result<TrainingSummary> {
        let mut summary = TrainingSummary::default();
        while self.master.episodes < self.training.episodes {
            if self.out_of_time(start) {
                summary.stopped_by_time = true;
                break;
            }
            let snap = self.master.snapshot();
            let episode = self.workers[0].run_episode(&snap)?;
            summary.transitions_sent += episode.transitions.len() as u64;
            let record = self.master.ingest(episode)?;
            on_episode(&record);
            self.master.train_owed()?;
        }
        Ok(summary)
    }

    pub fn run_async<F: FnMut(&EpisodeRecord)>(
        &mut self,
        start: Instant,
        mut on_episode: F,
    ) -> Result<TrainingSummary> {
        let mut summary = TrainingSummary::default();
        let board = SnapshotBoard::new(self.master.snapshot());
        let stop = AtomicBool::new(false);
        // Workers claim a ticket before each episode so the budget is never overrun.
        let tickets = AtomicU64::new(self.training.episodes.saturating_sub(self.master.episodes));
        let (tx, rx) = episode_queue(self.training.queue_capacity);
        let workers = std::mem::take(&mut self.workers);
        let budget = self.training.episodes;
        let master = &mut self.master;
        let time_limit = self.training.time_limit;

        let (returned, master_result) = thread::scope(|s| {
            let handles: Vec<_> = workers
                .into_iter()
                .map(|mut w| {
                    let tx = tx.clone();
                    let (board, stop, tickets) = (&board, &stop, &tickets);
                    s.spawn(move || {
                        let mut sent = 0u64;
                        let mut failure = None;
                        while !stop.load(Ordering::Acquire)
                            && tickets
                                .fetch_update(Ordering::AcqRel, Ordering::Acquire, |n| {
                                    n.checked_sub(1)
                                })
                                .is_ok()
                        {
                            let snap = board.latest();
                            match w.run_episode(&snap) {
                                Ok(ep) => {
                                    let n = ep.transitions.len() as u64;
                                    if tx.send(ep).is_err() {
                                        break;
                                    }
                                    sent += n;
                                }
                                Err(e) => {
                                    failure = Some(e);
                                    break;
                                }
                            }
                        }
                        (w, sent, failure)
                    })
                })
                .collect();
            drop(tx);

            let all_done =
                |hs: &[thread::ScopedJoinHandle<'_, _>]| hs.iter().all(|h| h.is_finished());
            let mut run = || -> Result<bool> {
                while master.episodes < budget {
                    if time_limit.is_some_and(|t| start.elapsed().as_secs_f64() >= t) {
                        return Ok(true);
                    }
                    match rx.recv_timeout(Duration::from_millis(20)) {
                        Some(ep) => {
                            let record = master.ingest(ep)?;
                            on_episode(&record);
                            master.train_owed()?;
                            board.publish(master.snapshot());
                        }
                        None if all_done(&handles) => return Ok(false),
                        None => {}
                    }
                }
                Ok(false)
            };
            let mut result = run();
            stop.store(true, Ordering::Release);
            if result.is_ok() {
                // Collect everything already handed over so no transition is lost.
                loop {
                    let finished = all_done(&handles);
                    for ep in rx.drain() {
                        match master.ingest(ep) {
                            Ok(record) => on_episode(&record),
                            Err(e) => {
                                result = Err(e);
                                break;
                            }
                        }
                    }
                    if finished || result.is_err() {
                        break;
                    }
                    thread::sleep(Duration::from_millis(1));
                }
            }
            drop(rx);
            let returned: Vec<_> = handles.into_iter().map(|h| h.join()).collect();
            (returned, result)
        });

        let mut failure = None;
        for (id, r) in returned.into_iter().enumerate() {
            match r {
                Ok((w, sent, err)) => {
                    summary.transitions_sent += sent;
                    if let Some(e) = err {
                        failure.get_or_insert(Error::Worker {
                            id: w.id,
                            message: e.to_string(),
                        });
                    }
                    self.workers.push(w);
                }
                Err(_) => {
                    failure.get_or_insert(Error::Worker {
                        id: id as u32,
                        message: "thread panicked".into(),
                    });
                }
            }
        }
        summary.stopped_by_time = master_result?;
        if let Some(e) = failure {
            return Err(e);
        }
        Ok(summary)
    }
}
