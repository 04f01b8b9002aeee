//! Multi-seed training runs with telemetry and checkpoints on disk.

use std::fs::File;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::RunConfig;
use super::stats::{moving_average, task_histograms, HistogramRow};
use crate::curriculum::CurriculumRecord;
use crate::orchestrator::{EpisodeRecord, Trainer, TrainingSummary};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SmoothedRow {
    pub episode: u64,
    pub return_mean: f64,
    pub success_rate: f64,
}

#[derive(Debug, Clone)]
pub struct SeedOutcome {
    pub seed: u64,
    pub dir: PathBuf,
    pub summary: TrainingSummary,
    pub records: Vec<EpisodeRecord>,
}

pub fn curriculum_record(r: &EpisodeRecord) -> CurriculumRecord {
    CurriculumRecord {
        episode: r.episode,
        task_type: r.task_type,
        goal_distance: r.goal_distance,
        agent_clearance: r.agent_clearance,
        goal_clearance: r.goal_clearance,
        relative_angle: r.relative_angle,
        q0: r.q0,
        prediction: r.prediction,
        success: r.success,
    }
}

pub fn smooth(records: &[EpisodeRecord], window: usize) -> Vec<SmoothedRow> {
    let returns: Vec<f64> = records.iter().map(|r| r.episode_return).collect();
    let success: Vec<f64> = records
        .iter()
        .map(|r| if r.success { 1.0 } else { 0.0 })
        .collect();
    let r = moving_average(&returns, window);
    let s = moving_average(&success, window);
    records
        .iter()
        .zip(r.into_iter().zip(s))
        .map(|(rec, (return_mean, success_rate))| SmoothedRow {
            episode: rec.episode,
            return_mean,
            success_rate,
        })
        .collect()
}

/// Start-distance histograms per `run.histogram_window` episodes over the
/// configured goal-distance range.
pub fn histograms(records: &[EpisodeRecord], config: &RunConfig) -> Vec<HistogramRow> {
    let samples: Vec<(u64, f64)> = records
        .iter()
        .map(|r| (r.episode, r.goal_distance))
        .collect();
    let [lo, hi] = config.world.task.goal_distance;
    task_histograms(
        &samples,
        config.run.histogram_window,
        lo,
        hi,
        config.run.histogram_bins,
    )
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_episode_records(path: &Path) -> Result<Vec<EpisodeRecord>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize()
        .map(|row| row.map_err(Error::from))
        .collect()
}

/// Trains one seed into `dir`: `episodes.csv`, `curriculum.csv`,
/// `smoothed.csv`, `histograms.csv` and a periodic `checkpoint.bin`. On divergence the last state is
/// saved as `diverged.bin` before the error is returned.
pub fn train_seed<F: FnMut(&EpisodeRecord)>(
    config: &RunConfig,
    seed: u64,
    dir: &Path,
    resume: Option<&Path>,
    mut progress: F,
) -> Result<SeedOutcome> {
    std::fs::create_dir_all(dir)?;
    let mut training = config.training.clone();
    training.seed = seed;
    let mut trainer = match resume {
        Some(p) => Trainer::restore(
            p,
            config.world.clone(),
            config.sac.clone(),
            config.per,
            config.curriculum.clone(),
            training,
        )?,
        None => Trainer::new(
            config.world.clone(),
            config.sac.clone(),
            config.per,
            config.curriculum.clone(),
            training,
        )?,
    };
    let total = config.training.episodes;
    let step = if config.run.checkpoint_every == 0 {
        total.max(1)
    } else {
        config.run.checkpoint_every
    };
    // A resumed run keeps the telemetry recorded up to the checkpoint.
    let mut records = Vec::new();
    let episodes_path = dir.join("episodes.csv");
    if resume.is_some() && episodes_path.exists() {
        records = read_episode_records(&episodes_path)?;
        records.retain(|r| r.episode <= trainer.master.episodes);
    }
    let mut episodes = csv::Writer::from_writer(File::create(&episodes_path)?);
    let mut curriculum = csv::Writer::from_writer(File::create(dir.join("curriculum.csv"))?);
    for r in &records {
        episodes.serialize(r)?;
        curriculum.serialize(curriculum_record(r))?;
    }
    let mut write_error: Option<Error> = None;
    let mut summary = TrainingSummary::default();
    let checkpoint = dir.join("checkpoint.bin");

    while trainer.master.episodes < total {
        trainer.training.episodes = (trainer.master.episodes + step).min(total);
        let result = trainer.run(|r| {
            if write_error.is_none() {
                if let Err(e) = episodes
                    .serialize(r)
                    .and_then(|_| curriculum.serialize(curriculum_record(r)))
                {
                    write_error = Some(e.into());
                }
            }
            records.push(r.clone());
            progress(r);
        });
        match result {
            Ok(s) => {
                summary.transitions_sent += s.transitions_sent;
                summary.updates += s.updates;
                summary.elapsed_secs += s.elapsed_secs;
                summary.stopped_by_time = s.stopped_by_time;
                if s.stopped_by_time {
                    break;
                }
            }
            Err(e @ Error::Diverged(_)) => {
                trainer.save(&dir.join("diverged.bin"))?;
                return Err(e);
            }
            Err(e) => return Err(e),
        }
        if let Some(e) = write_error.take() {
            return Err(e);
        }
        trainer.save(&checkpoint)?;
    }
    trainer.training.episodes = total;
    summary.episodes = trainer.master.episodes;
    summary.transitions = trainer.master.transitions;
    episodes.flush()?;
    curriculum.flush()?;
    trainer.save(&checkpoint)?;
    write_csv(
        &dir.join("smoothed.csv"),
        &smooth(&records, config.run.smoothing_window),
    )?;
    write_csv(&dir.join("histograms.csv"), &histograms(&records, config))?;
    Ok(SeedOutcome {
        seed,
        dir: dir.to_path_buf(),
        summary,
        records,
    })
}

/// One run per configured seed under `out/seed_<n>`, plus the effective
/// configuration at `out/config.toml`.
pub fn run_training<F: FnMut(u64, &EpisodeRecord)>(
    config: &RunConfig,
    out: &Path,
    mut progress: F,
) -> Result<Vec<SeedOutcome>> {
    std::fs::create_dir_all(out)?;
    std::fs::write(out.join("config.toml"), config.to_toml_string())?;
    config
        .run
        .seeds
        .iter()
        .map(|&seed| {
            train_seed(config, seed, &out.join(format!("seed_{seed}")), None, |r| {
                progress(seed, r)
            })
        })
        .collect()
}
