//! Exhaustive start-pose grid in front of a fixed dolly.

use std::f64::consts::FRAC_PI_2;
use std::path::Path;

use ndarray::ArrayView2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::svg;
use crate::orchestrator::EnvConfig;
use crate::sac::Actor;
use crate::world::trajectory::write_jsonl;
use crate::world::{
    deg, Aabb, Action, EventFlags, Pose, TrajectoryRecord, Vec2, World, WorldConfig,
};
use crate::{Error, Result};

/// Deterministic controller used for evaluation rollouts.
pub trait Policy: Sync {
    fn action(&self, obs: &[f64]) -> Result<Action>;
}

/// The actor's mean action.
impl Policy for Actor {
    fn action(&self, obs: &[f64]) -> Result<Action> {
        let view = ArrayView2::from_shape((1, obs.len()), obs)
            .map_err(|_| Error::InvalidArgument("observation shape".into()))?;
        let a = self.mean_action(view)?;
        Ok(Action::new(a[[0, 0]], a[[0, 1]]))
    }
}

/// Wraps a closure as a policy.
pub struct FnPolicy<F>(pub F);

impl<F: Fn(&[f64]) -> Action + Sync> Policy for FnPolicy<F> {
    fn action(&self, obs: &[f64]) -> Result<Action> {
        Ok((self.0)(obs))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridEvalConfig {
    /// Evaluation room width and length, meters.
    pub room: [f64; 2],
    /// Dolly x, y (meters) and yaw (degrees).
    pub dolly: [f64; 3],
    /// Fixed obstacles as center x, center y, width, height.
    pub obstacles: Vec<[f64; 4]>,
    /// Side length of the square grid, meters.
    pub extent: f64,
    pub cell: f64,
    /// Distance from the dolly center to the nearest grid row.
    pub front_offset: f64,
    /// Start headings in degrees relative to facing the dolly; positive turns left.
    pub orientations: Vec<f64>,
    pub repeats: usize,
}

impl Default for GridEvalConfig {
    fn default() -> Self {
        Self {
            room: [14.0, 14.0],
            dolly: [7.0, 10.5, 90.0],
            obstacles: vec![[2.5, 10.5, 1.0, 1.2], [11.5, 9.0, 1.2, 0.8]],
            extent: 5.0,
            cell: 0.5,
            front_offset: 1.5,
            orientations: vec![0.0, 45.0, -45.0, 90.0, -90.0, 135.0, -135.0, 180.0],
            repeats: 9,
        }
    }
}

impl GridEvalConfig {
    pub fn validate(&self, errors: &mut Vec<String>) {
        if !(self.room[0] > 0.0 && self.room[1] > 0.0) {
            errors.push("grid.room sides must be positive".into());
        }
        if !(self.cell > 0.0 && self.extent >= 0.0) {
            errors.push("grid.cell must be positive and grid.extent non-negative".into());
        }
        if self.orientations.is_empty() || self.repeats == 0 {
            errors.push("grid needs at least one orientation and one repeat".into());
        }
        if self.obstacles.iter().any(|o| !(o[2] > 0.0 && o[3] > 0.0)) {
            errors.push("grid.obstacles need positive width and height".into());
        }
    }

    /// Positions per grid side.
    pub fn side(&self) -> usize {
        (self.extent / self.cell).round() as usize + 1
    }

    pub fn episode_count(&self) -> usize {
        self.side() * self.side() * self.orientations.len() * self.repeats
    }

    pub fn dolly_pose(&self) -> Pose {
        Pose::new(self.dolly[0], self.dolly[1], deg(self.dolly[2]))
    }

    /// Lateral offset of column `col` and distance of row `row` from the dolly.
    pub fn offsets(&self, row: usize, col: usize) -> (f64, f64) {
        (
            -self.extent / 2.0 + col as f64 * self.cell,
            self.front_offset + row as f64 * self.cell,
        )
    }

    /// World-frame start pose for a grid cell and orientation (degrees).
    pub fn start_pose(&self, row: usize, col: usize, orientation: f64) -> Pose {
        let d = self.dolly_pose();
        let forward = Vec2::from_angle(d.yaw);
        let right = Vec2::from_angle(d.yaw - FRAC_PI_2);
        let (dx, dy) = self.offsets(row, col);
        let p = d.position() - forward * dy + right * dx;
        Pose::new(p.x, p.y, d.yaw + deg(orientation))
    }

    pub fn world_config(&self, start: Pose) -> WorldConfig {
        WorldConfig {
            room: Aabb {
                min: Vec2::new(0.0, 0.0),
                max: Vec2::new(self.room[0], self.room[1]),
            },
            obstacles: self
                .obstacles
                .iter()
                .map(|o| Aabb::from_center(Vec2::new(o[0], o[1]), o[2], o[3]))
                .collect(),
            dolly: self.dolly_pose(),
            robot_start: start,
            rng_seed: 0,
        }
    }
}

/// Outcome counts for one (position, orientation) combination.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub row: usize,
    pub col: usize,
    pub x: f64,
    pub y: f64,
    pub dx: f64,
    pub dy: f64,
    pub orientation: f64,
    pub valid: bool,
    pub episodes: usize,
    pub successes: usize,
    pub collisions: usize,
    pub timeouts: usize,
    pub success_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub group: String,
    pub cells: usize,
    pub mean_success: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridMetadata {
    pub episodes: usize,
    pub invalid_cells: usize,
    pub front_offset: f64,
    pub dolly: [f64; 3],
    pub side: usize,
    pub config: GridEvalConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridResult {
    pub cells: Vec<CellResult>,
    pub summary: Vec<SummaryRow>,
    pub metadata: GridMetadata,
    /// First-repeat trajectories of the center column, keyed by (row, orientation).
    pub trajectories: Vec<((usize, f64), Vec<TrajectoryRecord>)>,
}

#[derive(Debug, Clone, Copy)]
enum Ending {
    Goal,
    Collision,
    Timeout,
}

fn rollout<P: Policy + ?Sized>(
    policy: &P,
    mut world: World,
    record: bool,
) -> Result<(Ending, Vec<TrajectoryRecord>)> {
    let mut obs = world.observation().flatten();
    let mut traj = Vec::new();
    if record {
        let p = world.pose();
        traj.push(TrajectoryRecord {
            t: 0,
            x: p.x,
            y: p.y,
            yaw: p.yaw,
            v: 0.0,
            omega: 0.0,
            r: 0.0,
            flags: EventFlags::default(),
        });
    }
    loop {
        let a = policy.action(&obs)?;
        let out = world.step(a)?;
        if record {
            let a = a.clamped();
            traj.push(TrajectoryRecord {
                t: world.steps(),
                x: out.pose.x,
                y: out.pose.y,
                yaw: out.pose.yaw,
                v: a.v,
                omega: a.omega,
                r: out.reward,
                flags: out.flags,
            });
        }
        if out.terminal {
            let end = if out.flags.goal {
                Ending::Goal
            } else if out.flags.any_collision() {
                Ending::Collision
            } else {
                Ending::Timeout
            };
            return Ok((end, traj));
        }
        obs = out.observation.flatten();
    }
}

/// Mean of per-cell success rates over valid cells matching `keep`.
pub fn mean_success<F: Fn(f64) -> bool>(cells: &[CellResult], keep: F) -> (usize, f64) {
    let picked: Vec<f64> = cells
        .iter()
        .filter(|c| c.valid && keep(c.orientation))
        .map(|c| c.success_rate)
        .collect();
    let n = picked.len();
    (
        n,
        if n == 0 {
            f64::NAN
        } else {
            picked.iter().sum::<f64>() / n as f64
        },
    )
}

/// Per-orientation rows, then intrapolated (|o| <= 90), extrapolated and all.
pub fn summarize(cells: &[CellResult], orientations: &[f64]) -> Vec<SummaryRow> {
    let mut rows = Vec::new();
    let mut push = |group: String, (cells, mean_success): (usize, f64)| {
        rows.push(SummaryRow {
            group,
            cells,
            mean_success,
        })
    };
    for &o in orientations {
        push(format!("{o}"), mean_success(cells, |x| x == o));
    }
    push(
        "intrapolated".into(),
        mean_success(cells, |x| x.abs() <= 90.0),
    );
    push(
        "extrapolated".into(),
        mean_success(cells, |x| x.abs() > 90.0),
    );
    push("all".into(), mean_success(cells, |_| true));
    rows
}

pub fn run_grid_eval<P: Policy + ?Sized>(
    policy: &P,
    env: &EnvConfig,
    grid: &GridEvalConfig,
) -> Result<GridResult> {
    let side = grid.side();
    let centre_col = side / 2;
    let make_world = |start: Pose| {
        World::new(
            env.robot.clone(),
            env.dolly.clone(),
            env.reward.clone(),
            grid.world_config(start),
            env.max_steps,
        )
    };
    let mut cells = Vec::with_capacity(side * side * grid.orientations.len());
    for row in 0..side {
        for col in 0..side {
            for &o in &grid.orientations {
                let start = grid.start_pose(row, col, o);
                let (dx, dy) = grid.offsets(row, col);
                let valid = !make_world(start).start_is_blocked();
                cells.push(CellResult {
                    row,
                    col,
                    x: start.x,
                    y: start.y,
                    dx,
                    dy,
                    orientation: o,
                    valid,
                    episodes: 0,
                    successes: 0,
                    collisions: 0,
                    timeouts: 0,
                    success_rate: 0.0,
                });
            }
        }
    }
    let jobs: Vec<(usize, usize)> = cells
        .iter()
        .enumerate()
        .filter(|(_, c)| c.valid)
        .flat_map(|(i, _)| (0..grid.repeats).map(move |r| (i, r)))
        .collect();
    let outcomes: Vec<(usize, usize, Ending, Vec<TrajectoryRecord>)> = jobs
        .par_iter()
        .map(|&(i, r)| {
            let c = &cells[i];
            let record = r == 0 && c.col == centre_col;
            let start = Pose::new(c.x, c.y, grid.start_pose(c.row, c.col, c.orientation).yaw);
            let (end, traj) = rollout(policy, make_world(start), record)?;
            Ok((i, r, end, traj))
        })
        .collect::<Result<_>>()?;

    let mut trajectories = Vec::new();
    for (i, _, end, traj) in outcomes {
        let c = &mut cells[i];
        c.episodes += 1;
        match end {
            Ending::Goal => c.successes += 1,
            Ending::Collision => c.collisions += 1,
            Ending::Timeout => c.timeouts += 1,
        }
        if !traj.is_empty() {
            trajectories.push(((c.row, c.orientation), traj));
        }
    }
    for c in &mut cells {
        if c.episodes > 0 {
            c.success_rate = c.successes as f64 / c.episodes as f64;
        }
    }
    let summary = summarize(&cells, &grid.orientations);
    let metadata = GridMetadata {
        episodes: jobs.len(),
        invalid_cells: cells.iter().filter(|c| !c.valid).count(),
        front_offset: grid.front_offset,
        dolly: grid.dolly,
        side,
        config: grid.clone(),
    };
    Ok(GridResult {
        cells,
        summary,
        metadata,
        trajectories,
    })
}

/// Writes `cells.csv`, `summary.csv`, `metadata.json`, one heatmap per
/// orientation and the recorded trajectories.
pub fn write_grid_outputs(result: &GridResult, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let mut w = csv::Writer::from_path(dir.join("cells.csv"))?;
    for c in &result.cells {
        w.serialize(c)?;
    }
    w.flush()?;
    let mut w = csv::Writer::from_path(dir.join("summary.csv"))?;
    for r in &result.summary {
        w.serialize(r)?;
    }
    w.flush()?;
    std::fs::write(
        dir.join("metadata.json"),
        serde_json::to_string_pretty(&result.metadata)?,
    )?;
    for &o in &result.metadata.config.orientations {
        let cells: Vec<&CellResult> = result.cells.iter().filter(|c| c.orientation == o).collect();
        let doc = svg::heatmap(
            &cells,
            result.metadata.side,
            &format!("orientation {o} deg"),
        );
        std::fs::write(dir.join(format!("heatmap_{o}.svg")), doc)?;
    }
    let tdir = dir.join("trajectories");
    std::fs::create_dir_all(&tdir)?;
    for ((row, o), traj) in &result.trajectories {
        let f = std::fs::File::create(tdir.join(format!("row{row}_o{o}.jsonl")))?;
        write_jsonl(std::io::BufWriter::new(f), traj)?;
    }
    Ok(())
}

/// Reads back a `cells.csv`.
pub fn read_cells(path: &Path) -> Result<Vec<CellResult>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize()
        .map(|row| row.map_err(Error::from))
        .collect()
}
