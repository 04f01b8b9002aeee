mod common;

use common::{rng, small_parts};
use dollynav::harness::{
    chi_square_uniform, moving_average, read_cells, run_grid_eval, run_training, task_histograms,
    write_grid_outputs, FnPolicy, GridEvalConfig, RunConfig,
};
use dollynav::orchestrator::Variant;
use dollynav::world::{sample_task, Action, DollySpec, RobotSpec, TaskBounds};
use dollynav::Error;

#[test]
fn config_round_trips_through_toml() {
    let mut cfg = RunConfig::default();
    cfg.training.workers = 3;
    cfg.sac.gamma = 0.95;
    cfg.grid.repeats = 2;
    let back = RunConfig::from_toml_str(&cfg.to_toml_string()).unwrap();
    assert_eq!(back, cfg);
    assert_eq!(RunConfig::from_toml_str("").unwrap(), RunConfig::default());
}

#[test]
fn config_errors_are_reported() {
    match RunConfig::from_toml_str("[sac]\ngamma = 1.5\n") {
        Err(Error::Config(e)) => assert!(e.iter().any(|m| m.contains("gamma")), "{e:?}"),
        other => panic!("{other:?}"),
    }
    match RunConfig::from_toml_str("[sac]\ngama = 0.9\n[wrld]\n") {
        Err(Error::Config(e)) => {
            assert_eq!(e.len(), 2, "{e:?}");
            assert!(e[0].contains("gama") || e[1].contains("gama"));
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn grid_count_is_closed_form() {
    for (extent, cell, o, r) in [(5.0, 0.5, 8, 9), (2.0, 1.0, 3, 2), (0.0, 0.5, 1, 1)] {
        let g = GridEvalConfig {
            extent,
            cell,
            orientations: (0..o).map(|k| k as f64 * 45.0).collect(),
            repeats: r,
            ..GridEvalConfig::default()
        };
        let side = (extent / cell) as usize + 1;
        assert_eq!(g.episode_count(), side * side * o * r);
    }
}

#[test]
fn idle_policy_never_succeeds_and_summary_recomputes() {
    let dir = tempfile::tempdir().unwrap();
    let (mut env, ..) = small_parts(0, 1, true, 0);
    env.max_steps = 20;
    let grid = GridEvalConfig {
        extent: 1.0,
        cell: 0.5,
        repeats: 2,
        ..GridEvalConfig::default()
    };
    let result = run_grid_eval(&FnPolicy(|_: &[f64]| Action::new(0.0, 0.0)), &env, &grid).unwrap();
    assert_eq!(result.metadata.episodes, grid.episode_count());
    let valid: Vec<_> = result.cells.iter().filter(|c| c.valid).collect();
    assert!(!valid.is_empty());
    for c in &valid {
        assert_eq!(c.successes, 0);
        assert_eq!(c.timeouts, c.episodes);
    }
    write_grid_outputs(&result, dir.path()).unwrap();
    let cells = read_cells(&dir.path().join("cells.csv")).unwrap();
    assert_eq!(cells.len(), result.cells.len());
    assert_eq!(
        dollynav::harness::summarize(&cells, &grid.orientations),
        result.summary
    );
    assert!(dir.path().join("metadata.json").exists());
    assert!(dir.path().join("heatmap_0.svg").exists());
}

#[test]
fn histogram_windows_partition_episodes() {
    let mut r = rng(2);
    let samples: Vec<(u64, f64)> = (1..=2500)
        .map(|e| (e, rand::Rng::random_range(&mut r, 1.5..5.0)))
        .collect();
    let rows = task_histograms(&samples, 1000, 1.5, 5.0, 7);
    let windows: std::collections::BTreeSet<u64> = rows.iter().map(|h| h.window).collect();
    assert_eq!(windows.len(), 3);
    for w in windows {
        let n: u64 = rows.iter().filter(|h| h.window == w).map(|h| h.count).sum();
        assert_eq!(n, if w == 2 { 500 } else { 1000 });
    }
}

#[test]
fn random_start_distances_look_uniform() {
    let bounds = TaskBounds::default();
    let (robot, dolly) = (RobotSpec::default(), DollySpec::default());
    let mut r = rng(17);
    let samples: Vec<(u64, f64)> = (1..=5000)
        .map(|e| {
            (
                e,
                sample_task(&mut r, &bounds, &robot, &dolly)
                    .unwrap()
                    .geometry
                    .goal_distance,
            )
        })
        .collect();
    let [lo, hi] = bounds.goal_distance;
    let rows = task_histograms(&samples, 10_000, lo, hi, 7);
    let counts: Vec<u64> = rows.iter().map(|h| h.count).collect();
    let (chi, p) = chi_square_uniform(&counts);
    assert!(p > 0.01, "chi {chi} p {p} counts {counts:?}");
}

#[test]
fn constant_success_smooths_to_one() {
    let s = moving_average(&vec![1.0; 600], 500);
    assert!(s.iter().all(|&x| x == 1.0));
}

#[test]
fn training_run_writes_telemetry_and_resumes() {
    let dir = tempfile::tempdir().unwrap();
    let (world, sac, per, curriculum, mut training) = small_parts(0, 1, true, 6);
    training.variant = Variant::RandomStarts;
    let mut cfg = RunConfig {
        world,
        sac,
        per,
        curriculum,
        training,
        ..RunConfig::default()
    };
    cfg.run.seeds = vec![4];
    cfg.run.checkpoint_every = 3;
    cfg.run.smoothing_window = 2;
    let out = run_training(&cfg, dir.path(), |_, _| {}).unwrap();
    assert_eq!(out.len(), 1);
    let seed_dir = dir.path().join("seed_4");
    for f in [
        "episodes.csv",
        "curriculum.csv",
        "smoothed.csv",
        "histograms.csv",
        "checkpoint.bin",
    ] {
        assert!(seed_dir.join(f).exists(), "{f}");
    }
    let records = dollynav::harness::read_episode_records(&seed_dir.join("episodes.csv")).unwrap();
    assert_eq!(records, out[0].records);
    assert_eq!(
        RunConfig::from_path(&dir.path().join("config.toml")).unwrap(),
        cfg
    );

    // Resuming with a larger budget appends to the same files.
    cfg.training.episodes = 9;
    let resumed = dollynav::harness::train_seed(
        &cfg,
        4,
        &seed_dir,
        Some(&seed_dir.join("checkpoint.bin")),
        |_| {},
    )
    .unwrap();
    let all = dollynav::harness::read_episode_records(&seed_dir.join("episodes.csv")).unwrap();
    assert_eq!(all.len(), 9);
    assert_eq!(&all[..6], &records[..]);
    assert_eq!(resumed.records.len(), 9);
}
