use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use dollynav::harness::grid::{run_grid_eval, write_grid_outputs};
use dollynav::harness::stats::chi_square_uniform;
use dollynav::harness::training::{histograms, read_episode_records, train_seed, write_csv};
use dollynav::harness::{svg, RunConfig};
use dollynav::orchestrator::{Trainer, Variant};
use dollynav::world::trajectory::read_jsonl;

#[derive(Parser)]
#[command(
    name = "dollynav",
    version,
    about = "Train and evaluate mapless dolly-docking agents"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML run configuration; omitted sections use defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (overrides `run.out_dir`).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Train one run per seed and write telemetry and checkpoints.
    Train {
        #[command(flatten)]
        common: Common,
        /// Train only this seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        variant: Option<Variant>,
        #[arg(long)]
        workers: Option<usize>,
        /// Resume from a checkpoint (requires a single seed).
        #[arg(long)]
        checkpoint: Option<PathBuf>,
    },
    /// Evaluate a checkpointed policy on the fixed test grid.
    EvalGrid {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Rebuild start-distance histograms from an `episodes.csv`.
    Histograms {
        #[command(flatten)]
        common: Common,
        episodes: PathBuf,
    },
    /// Render a recorded trajectory (JSON lines) to SVG.
    Replay {
        trajectory: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load_config(path: Option<&Path>) -> Result<RunConfig> {
    match path {
        Some(p) => RunConfig::from_path(p).with_context(|| format!("loading {}", p.display())),
        None => Ok(RunConfig::default()),
    }
}

fn out_dir(common: &Common, config: &RunConfig) -> PathBuf {
    common
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(&config.run.out_dir))
}

fn train(
    common: Common,
    seed: Option<u64>,
    variant: Option<Variant>,
    workers: Option<usize>,
    checkpoint: Option<PathBuf>,
) -> Result<()> {
    let mut config = load_config(common.config.as_deref())?;
    if let Some(s) = seed {
        config.run.seeds = vec![s];
    }
    if let Some(v) = variant {
        config.training.variant = v;
    }
    if let Some(w) = workers {
        config.training.workers = w;
    }
    let errors = config.validate();
    if !errors.is_empty() {
        bail!("invalid configuration:\n  {}", errors.join("\n  "));
    }
    if checkpoint.is_some() && config.run.seeds.len() != 1 {
        bail!("--checkpoint needs exactly one seed (use --seed)");
    }
    let out = out_dir(&common, &config);
    std::fs::create_dir_all(&out)?;
    std::fs::write(out.join("config.toml"), config.to_toml_string())?;
    for &s in &config.run.seeds {
        let dir = out.join(format!("seed_{s}"));
        let total = config.training.episodes;
        let every = (total / 20).max(1);
        let outcome = train_seed(&config, s, &dir, checkpoint.as_deref(), |r| {
            if r.episode % every == 0 {
                eprintln!("seed {s}: episode {}/{total}", r.episode);
            }
        })
        .with_context(|| format!("training seed {s}"))?;
        let tail = outcome
            .records
            .iter()
            .rev()
            .take(config.run.smoothing_window);
        let (n, ok) = tail.fold((0usize, 0usize), |(n, ok), r| {
            (n + 1, ok + r.success as usize)
        });
        println!(
            "seed {s}: {} episodes, {} updates, {:.1}s, trailing success {:.3} -> {}",
            outcome.summary.episodes,
            outcome.summary.updates,
            outcome.summary.elapsed_secs,
            if n == 0 { 0.0 } else { ok as f64 / n as f64 },
            dir.display()
        );
    }
    Ok(())
}

fn eval_grid(common: Common, checkpoint: PathBuf, seed: Option<u64>) -> Result<()> {
    let config = load_config(common.config.as_deref())?;
    let mut training = config.training.clone();
    if let Some(s) = seed {
        training.seed = s;
    }
    let trainer = Trainer::restore(
        &checkpoint,
        config.world.clone(),
        config.sac.clone(),
        config.per,
        config.curriculum.clone(),
        training,
    )
    .with_context(|| format!("restoring {}", checkpoint.display()))?;
    let result = run_grid_eval(&trainer.master.sac.actor, &config.world, &config.grid)?;
    let out = out_dir(&common, &config);
    write_grid_outputs(&result, &out)?;
    for row in &result.summary {
        println!(
            "{:>14} {:>4} cells  {:.3}",
            row.group, row.cells, row.mean_success
        );
    }
    println!("{} episodes -> {}", result.metadata.episodes, out.display());
    Ok(())
}

fn histograms_cmd(common: Common, episodes: PathBuf) -> Result<()> {
    let config = load_config(common.config.as_deref())?;
    let records = read_episode_records(&episodes)
        .with_context(|| format!("reading {}", episodes.display()))?;
    let rows = histograms(&records, &config);
    let out = common
        .out
        .unwrap_or_else(|| episodes.with_file_name("histograms.csv"));
    write_csv(&out, &rows)?;
    for chunk in rows.chunk_by(|a, b| a.window == b.window) {
        let counts: Vec<u64> = chunk.iter().map(|r| r.count).collect();
        let (stat, p) = chi_square_uniform(&counts);
        println!(
            "window {} ({}..{}): {:?} chi2 {:.2} p {:.4}",
            chunk[0].window, chunk[0].first_episode, chunk[0].last_episode, counts, stat, p
        );
    }
    println!("-> {}", out.display());
    Ok(())
}

fn replay(trajectory: PathBuf, out: Option<PathBuf>) -> Result<()> {
    let file =
        File::open(&trajectory).with_context(|| format!("opening {}", trajectory.display()))?;
    let records = read_jsonl(BufReader::new(file))?;
    if records.is_empty() {
        bail!("{} holds no trajectory records", trajectory.display());
    }
    let out = out.unwrap_or_else(|| trajectory.with_extension("svg"));
    std::fs::write(&out, svg::trajectory(&records))?;
    println!("{} steps -> {}", records.len(), out.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Train {
            common,
            seed,
            variant,
            workers,
            checkpoint,
        } => train(common, seed, variant, workers, checkpoint),
        Command::EvalGrid {
            common,
            checkpoint,
            seed,
        } => eval_grid(common, checkpoint, seed),
        Command::Histograms { common, episodes } => histograms_cmd(common, episodes),
        Command::Replay { trajectory, out } => replay(trajectory, out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
