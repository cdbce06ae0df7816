//! The ten benchmark tasks.
//!
//! Every task scores an episode with a progress value in `[0, 1]` that is a
//! function of the current episode state. The reward of a transition is the
//! change in progress, so the undiscounted return of an episode always equals
//! its final progress.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dsl::{Action, Program};
use crate::interpreter::{exec_in_task, ExecLimits};
use crate::world::{Event, Facing, WorldState};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TaskError {
    #[error("episode already done")]
    EpisodeAlreadyDone,
    #[error("unknown task `{0}`")]
    UnknownTask(String),
    #[error("invalid task config: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TaskId {
    StairClimber,
    FourCorner,
    TopOff,
    Maze,
    CleanHouse,
    Harvester,
    DoorKey,
    OneStroke,
    Seeder,
    Snake,
}

impl TaskId {
    pub const ALL: [TaskId; 10] = [
        TaskId::StairClimber,
        TaskId::FourCorner,
        TaskId::TopOff,
        TaskId::Maze,
        TaskId::CleanHouse,
        TaskId::Harvester,
        TaskId::DoorKey,
        TaskId::OneStroke,
        TaskId::Seeder,
        TaskId::Snake,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TaskId::StairClimber => "StairClimber",
            TaskId::FourCorner => "FourCorner",
            TaskId::TopOff => "TopOff",
            TaskId::Maze => "Maze",
            TaskId::CleanHouse => "CleanHouse",
            TaskId::Harvester => "Harvester",
            TaskId::DoorKey => "DoorKey",
            TaskId::OneStroke => "OneStroke",
            TaskId::Seeder => "Seeder",
            TaskId::Snake => "Snake",
        }
    }
}

impl fmt::Display for TaskId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TaskId {
    type Err = TaskError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        TaskId::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| TaskError::UnknownTask(s.to_string()))
    }
}

/// Geometry knobs. Every grid carries a one-cell wall ring.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskConfig {
    pub rows: usize,
    pub cols: usize,
    /// Garbage markers scattered in CleanHouse.
    pub clean_house_markers: usize,
    /// Markers Snake must eat to finish.
    pub snake_goal: u32,
    /// Initial Snake body length, excluding the head.
    pub snake_body: usize,
    /// Probability that a TopOff bottom-row cell starts with a marker.
    pub top_off_density: f64,
}

impl TaskConfig {
    pub fn for_task(task: TaskId) -> Self {
        let (rows, cols) = match task {
            TaskId::CleanHouse => (CLEAN_HOUSE.len(), CLEAN_HOUSE[0].len()),
            _ => (8, 8),
        };
        TaskConfig {
            rows,
            cols,
            clean_house_markers: 10,
            snake_goal: 20,
            snake_body: 2,
            top_off_density: 0.5,
        }
    }

    /// Applies `key=value` overrides, one per line; `#` starts a comment.
    pub fn apply_overrides(&mut self, text: &str) -> Result<(), TaskError> {
        for line in text.lines() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| TaskError::InvalidConfig(format!("expected key=value: {line}")))?;
            let (k, v) = (k.trim(), v.trim());
            let bad = |_| TaskError::InvalidConfig(format!("bad value for {k}: {v}"));
            match k {
                "rows" => self.rows = v.parse().map_err(bad)?,
                "cols" => self.cols = v.parse().map_err(bad)?,
                "clean_house_markers" => self.clean_house_markers = v.parse().map_err(bad)?,
                "snake_goal" => self.snake_goal = v.parse().map_err(bad)?,
                "snake_body" => self.snake_body = v.parse().map_err(bad)?,
                "top_off_density" => {
                    self.top_off_density = v
                        .parse()
                        .map_err(|_| TaskError::InvalidConfig(format!("bad value for {k}: {v}")))?
                }
                _ => return Err(TaskError::InvalidConfig(format!("unknown key {k}"))),
            }
        }
        Ok(())
    }

    pub fn check(&self, task: TaskId) -> Result<(), TaskError> {
        if task == TaskId::CleanHouse {
            if (self.rows, self.cols) != (CLEAN_HOUSE.len(), CLEAN_HOUSE[0].len()) {
                return Err(TaskError::InvalidConfig(
                    "CleanHouse uses its fixed 14x22 layout".into(),
                ));
            }
        } else if self.rows < 5 || self.cols < 5 {
            return Err(TaskError::InvalidConfig("grid must be at least 5x5".into()));
        }
        if task == TaskId::DoorKey && self.cols < 6 {
            return Err(TaskError::InvalidConfig("DoorKey needs 6 columns".into()));
        }
        if !(0.0..=1.0).contains(&self.top_off_density) {
            return Err(TaskError::InvalidConfig("top_off_density outside [0,1]".into()));
        }
        if self.snake_goal == 0 {
            return Err(TaskError::InvalidConfig("snake_goal must be positive".into()));
        }
        Ok(())
    }
}

/// Hand-authored apartment for CleanHouse. `#` wall, `.` floor, `A` fixed
/// agent start (facing East).
pub const CLEAN_HOUSE: [&str; 14] = [
    "######################",
    "#A...#.......#.......#",
    "#....#.......#.......#",
    "#....#..#....#....#..#",
    "#....#..#.........#..#",
    "#.......#....#....#..#",
    "######.###..##..######",
    "#....#.......#.......#",
    "#....#.......#.......#",
    "#....####..###..###..#",
    "#..........#.........#",
    "#....#.....#.....#...#",
    "#....#.....#.....#...#",
    "######################",
];

/// Per-task bookkeeping carried alongside the world.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Bookkeeping {
    StairClimber {
        goal: (usize, usize),
        stairs: Vec<bool>,
        fell: bool,
    },
    FourCorner {
        corners: [(usize, usize); 4],
    },
    TopOff {
        row: usize,
        /// Initially marked cells, left to right, for columns `1..cols-1`.
        marked: Vec<bool>,
    },
    Maze {
        goal: (usize, usize),
    },
    Collect {
        initial: Vec<bool>,
        total: usize,
    },
    DoorKey {
        key: (usize, usize),
        target: (usize, usize),
        door: (usize, usize),
        key_picked: bool,
    },
    OneStroke {
        visited: usize,
        empty: usize,
    },
    Seeder {
        initial_empty: Vec<bool>,
        empty: usize,
    },
    Snake {
        body: VecDeque<(usize, usize)>,
        eaten: u32,
        goal: u32,
        crashed: bool,
    },
}

/// Result of routing one action through a task.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub event: Event,
    pub reward: f64,
    pub done: bool,
}

/// A live task episode.
#[derive(Debug, Clone)]
pub struct Episode {
    pub task: TaskId,
    pub world: WorldState,
    pub book: Bookkeeping,
    pub done: bool,
    /// Current progress; equals the undiscounted return so far.
    pub progress: f64,
    pub steps: usize,
    rng: ChaCha8Rng,
}

fn interior(rows: usize, cols: usize) -> Vec<(usize, usize)> {
    (1..rows - 1)
        .flat_map(|r| (1..cols - 1).map(move |c| (r, c)))
        .collect()
}

fn random_facing(rng: &mut impl Rng) -> Facing {
    Facing::from_index(rng.random_range(0..4))
}

impl Episode {
    /// Samples an initial configuration with the default geometry.
    pub fn new(task: TaskId, seed: u64) -> Episode {
        Episode::with_config(task, &TaskConfig::for_task(task), seed)
            .expect("default config is valid")
    }

    pub fn with_config(task: TaskId, cfg: &TaskConfig, seed: u64) -> Result<Episode, TaskError> {
        cfg.check(task)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (world, book) = match task {
            TaskId::StairClimber => sample_stair_climber(cfg, &mut rng),
            TaskId::FourCorner => sample_four_corner(cfg, &mut rng),
            TaskId::TopOff => sample_top_off(cfg, &mut rng),
            TaskId::Maze => sample_maze(cfg, &mut rng),
            TaskId::CleanHouse => sample_clean_house(cfg, &mut rng),
            TaskId::Harvester => sample_harvester(cfg),
            TaskId::DoorKey => sample_door_key(cfg, &mut rng),
            TaskId::OneStroke => sample_one_stroke(cfg, &mut rng),
            TaskId::Seeder => sample_seeder(cfg, &mut rng),
            TaskId::Snake => sample_snake(cfg, &mut rng),
        };
        debug_assert!(world.validate().is_ok());
        // Progress starts at 0 even where the initial state already counts
        // (OneStroke's start cell); the first action is credited with it so
        // the return is always the sum of rewards.
        Ok(Episode {
            task,
            world,
            book,
            done: false,
            progress: 0.0,
            steps: 0,
            rng,
        })
    }

    /// Applies one primitive action and the task's transition hook.
    pub fn step(&mut self, action: Action) -> Result<StepOutcome, TaskError> {
        if self.done {
            return Err(TaskError::EpisodeAlreadyDone);
        }
        let prev = self.world.clone();
        let event = self.world.step(action);
        let (reward, done) = self.on_transition(&prev, action, event);
        self.steps += 1;
        Ok(StepOutcome {
            event,
            reward,
            done,
        })
    }

    /// Task hook run after the world transition `prev --action--> self.world`.
    /// Updates bookkeeping (and task-owned cells such as Snake's body) and
    /// returns the reward and the done flag.
    fn on_transition(&mut self, prev: &WorldState, action: Action, event: Event) -> (f64, bool) {
        let moved = action == Action::Move && event == Event::Ok;
        let mut terminal = false;
        match &mut self.book {
            Bookkeeping::StairClimber { stairs, fell, .. } => {
                let i = self.world.idx(self.world.agent_row, self.world.agent_col);
                if !stairs[i] {
                    *fell = true;
                    terminal = true;
                }
            }
            Bookkeeping::DoorKey {
                key,
                door,
                key_picked,
                ..
            } => {
                if !*key_picked
                    && action == Action::PickMarker
                    && event == Event::Ok
                    && self.world.agent() == *key
                {
                    *key_picked = true;
                    self.world.set_wall(door.0, door.1, false);
                }
            }
            Bookkeeping::OneStroke { visited, .. } => {
                if action == Action::Move && event == Event::Blocked {
                    terminal = true;
                } else if moved {
                    self.world.set_wall(prev.agent_row, prev.agent_col, true);
                    *visited += 1;
                }
            }
            Bookkeeping::Seeder { .. } => {
                let (r, c) = prev.agent();
                if action == Action::PutMarker && prev.markers_at(r, c) > 0 {
                    terminal = true;
                }
            }
            Bookkeeping::Snake {
                body,
                eaten,
                goal,
                crashed,
            } => {
                if action == Action::Move {
                    let (dr, dc) = prev.facing.delta();
                    let ahead = (
                        (prev.agent_row as isize + dr) as usize,
                        (prev.agent_col as isize + dc) as usize,
                    );
                    if event == Event::Blocked {
                        if body.contains(&ahead) {
                            *crashed = true;
                            terminal = true;
                        }
                    } else {
                        body.push_front(prev.agent());
                        self.world.set_wall(prev.agent_row, prev.agent_col, true);
                        let (hr, hc) = self.world.agent();
                        if self.world.markers_at(hr, hc) > 0 {
                            self.world.set_markers(hr, hc, 0);
                            *eaten += 1;
                            if *eaten < *goal {
                                spawn_food(&mut self.world, &mut self.rng);
                            }
                        } else if let Some((tr, tc)) = body.pop_back() {
                            self.world.set_wall(tr, tc, false);
                        }
                    }
                }
            }
            Bookkeeping::FourCorner { .. }
            | Bookkeeping::TopOff { .. }
            | Bookkeeping::Maze { .. }
            | Bookkeeping::Collect { .. } => {}
        }
        let now = self.measure();
        let reward = now - self.progress;
        self.progress = now;
        self.done = terminal || self.goal_reached();
        (reward, self.done)
    }

    fn goal_reached(&self) -> bool {
        match &self.book {
            Bookkeeping::Snake { eaten, goal, .. } => eaten >= goal,
            _ => self.progress >= 1.0,
        }
    }

    /// Progress in `[0, 1]` recomputed from the current episode state.
    pub fn measure(&self) -> f64 {
        let w = &self.world;
        match &self.book {
            Bookkeeping::StairClimber { goal, fell, .. } => {
                if !*fell && w.agent() == *goal {
                    1.0
                } else {
                    0.0
                }
            }
            Bookkeeping::FourCorner { corners } => {
                let misplaced = (0..w.rows).any(|r| {
                    (0..w.cols).any(|c| w.markers_at(r, c) > 0 && !corners.contains(&(r, c)))
                });
                if misplaced {
                    0.0
                } else {
                    0.25 * corners.iter().filter(|&&(r, c)| w.markers_at(r, c) > 0).count() as f64
                }
            }
            Bookkeeping::TopOff { row, marked } => {
                let k = marked.iter().filter(|&&m| m).count();
                let mut correct = 0;
                let mut clean = true;
                for (j, &m) in marked.iter().enumerate() {
                    let n = w.markers_at(*row, j + 1);
                    let ok = if m { n >= 2 } else { n == 0 };
                    if !ok {
                        clean = false;
                        break;
                    }
                    if m {
                        correct += 1;
                    }
                }
                let bonus = usize::from(clean && w.agent() == (*row, w.cols - 2));
                (correct + bonus) as f64 / (k + 1) as f64
            }
            Bookkeeping::Maze { goal } => f64::from(u8::from(w.agent() == *goal)),
            Bookkeeping::Collect { initial, total } => {
                let cleared = initial
                    .iter()
                    .zip(&w.markers)
                    .filter(|(&init, &m)| init && m == 0)
                    .count();
                cleared as f64 / *total as f64
            }
            Bookkeeping::DoorKey {
                target, key_picked, ..
            } => {
                let topped = *key_picked && w.markers_at(target.0, target.1) >= 2;
                0.5 * f64::from(u8::from(*key_picked)) + 0.5 * f64::from(u8::from(topped))
            }
            Bookkeeping::OneStroke { visited, empty } => *visited as f64 / *empty as f64,
            Bookkeeping::Seeder {
                initial_empty,
                empty,
            } => {
                let placed = initial_empty
                    .iter()
                    .zip(&w.markers)
                    .filter(|(&e, &m)| e && m > 0)
                    .count();
                placed as f64 / *empty as f64
            }
            Bookkeeping::Snake { eaten, goal, .. } => (*eaten).min(*goal) as f64 / *goal as f64,
        }
    }

    /// Undiscounted return accumulated so far.
    pub fn episode_return(&self) -> f64 {
        self.progress
    }
}

fn sample_stair_climber(cfg: &TaskConfig, rng: &mut ChaCha8Rng) -> (WorldState, Bookkeeping) {
    let (rows, cols) = (cfg.rows, cfg.cols);
    let n = rows.min(cols) - 2;
    let top = rows - 1 - n;
    let mut w = WorldState::with_border(rows, cols, rows - 2, 1, Facing::East);
    // Solid staircase rising to the right: in the k-th interior row from the
    // bottom the first k columns are open and everything right of them is wall.
    let mut stairs = vec![false; rows * cols];
    let mut path = Vec::new();
    for k in 1..=n {
        let r = rows - 1 - k;
        for c in k + 1..cols - 1 {
            w.set_wall(r, c, true);
        }
        if k > 1 {
            path.push((r, k - 1));
        }
        path.push((r, k));
    }
    for r in 1..top {
        for c in 1..cols - 1 {
            w.set_wall(r, c, true);
        }
    }
    for &(r, c) in &path {
        stairs[w.idx(r, c)] = true;
    }
    // Goal anywhere above the bottom step; the agent stands on a tread
    // (wall directly below) strictly lower.
    let goal = *path[1..].choose(rng).expect("staircase has steps");
    let lower: Vec<_> = path
        .iter()
        .copied()
        .filter(|p| p.0 > goal.0 && w.is_wall(p.0 + 1, p.1))
        .collect();
    let a = *lower.choose(rng).expect("bottom step is lower");
    w.agent_row = a.0;
    w.agent_col = a.1;
    w.set_markers(goal.0, goal.1, 1);
    (
        w,
        Bookkeeping::StairClimber {
            goal,
            stairs,
            fell: false,
        },
    )
}

fn sample_four_corner(cfg: &TaskConfig, rng: &mut ChaCha8Rng) -> (WorldState, Bookkeeping) {
    let (rows, cols) = (cfg.rows, cfg.cols);
    let bottom = rows - 2;
    let col = rng.random_range(2..cols - 2);
    let w = WorldState::with_border(rows, cols, bottom, col, Facing::East);
    let corners = [(1, 1), (1, cols - 2), (bottom, 1), (bottom, cols - 2)];
    (w, Bookkeeping::FourCorner { corners })
}

fn sample_top_off(cfg: &TaskConfig, rng: &mut ChaCha8Rng) -> (WorldState, Bookkeeping) {
    let (rows, cols) = (cfg.rows, cfg.cols);
    let row = rows - 2;
    let mut w = WorldState::with_border(rows, cols, row, 1, Facing::East);
    let mut marked = vec![false; cols - 2];
    loop {
        // The agent's own cell stays empty.
        for m in marked.iter_mut().skip(1) {
            *m = rng.random_bool(cfg.top_off_density);
        }
        if marked.iter().any(|&m| m) || cfg.top_off_density == 0.0 {
            break;
        }
    }
    for (j, &m) in marked.iter().enumerate() {
        if m {
            w.set_markers(row, j + 1, 1);
        }
    }
    (
        w,
        Bookkeeping::TopOff { row, marked },
    )
}

/// Recursive-backtracker perfect maze on the odd-coordinate lattice.
fn sample_maze(cfg: &TaskConfig, rng: &mut ChaCha8Rng) -> (WorldState, Bookkeeping) {
    let (rows, cols) = (cfg.rows, cfg.cols);
    let mut w = WorldState::new(rows, cols, 1, 1, Facing::East);
    w.walls.iter_mut().for_each(|x| *x = true);
    let cell_rows: Vec<usize> = (1..rows - 1).step_by(2).collect();
    let cell_cols: Vec<usize> = (1..cols - 1).step_by(2).collect();
    let (nr, nc) = (cell_rows.len(), cell_cols.len());
    let mut seen = vec![false; nr * nc];
    let start = (rng.random_range(0..nr), rng.random_range(0..nc));
    let mut stack = vec![start];
    seen[start.0 * nc + start.1] = true;
    w.set_wall(cell_rows[start.0], cell_cols[start.1], false);
    while let Some(&(i, j)) = stack.last() {
        let mut nbrs = Vec::new();
        if i > 0 {
            nbrs.push((i - 1, j));
        }
        if i + 1 < nr {
            nbrs.push((i + 1, j));
        }
        if j > 0 {
            nbrs.push((i, j - 1));
        }
        if j + 1 < nc {
            nbrs.push((i, j + 1));
        }
        nbrs.retain(|&(a, b)| !seen[a * nc + b]);
        match nbrs.choose(rng) {
            Some(&(a, b)) => {
                seen[a * nc + b] = true;
                let (r0, c0) = (cell_rows[i], cell_cols[j]);
                let (r1, c1) = (cell_rows[a], cell_cols[b]);
                w.set_wall((r0 + r1) / 2, (c0 + c1) / 2, false);
                w.set_wall(r1, c1, false);
                stack.push((a, b));
            }
            None => {
                stack.pop();
            }
        }
    }
    let open: Vec<(usize, usize)> = (0..rows)
        .flat_map(|r| (0..cols).map(move |c| (r, c)))
        .filter(|&(r, c)| !w.is_wall(r, c))
        .collect();
    let mut picks = open.choose_multiple(rng, 2);
    let a = *picks.next().expect("maze has cells");
    let goal = *picks.next().expect("maze has two cells");
    w.agent_row = a.0;
    w.agent_col = a.1;
    w.facing = random_facing(rng);
    w.set_markers(goal.0, goal.1, 1);
    (w, Bookkeeping::Maze { goal })
}

fn sample_clean_house(cfg: &TaskConfig, rng: &mut ChaCha8Rng) -> (WorldState, Bookkeeping) {
    let mut w = WorldState::from_ascii(
        &CLEAN_HOUSE
            .iter()
            .map(|l| l.replace('A', ">"))
            .collect::<Vec<_>>()
            .join("\n"),
    )
    .expect("layout parses");
    let (rows, cols) = (w.rows, w.cols);
    // Garbage sits next to walls.
    let mut spots: Vec<(usize, usize)> = interior(rows, cols)
        .into_iter()
        .filter(|&(r, c)| !w.is_wall(r, c) && (r, c) != w.agent())
        .filter(|&(r, c)| {
            w.is_wall(r - 1, c) || w.is_wall(r + 1, c) || w.is_wall(r, c - 1) || w.is_wall(r, c + 1)
        })
        .collect();
    spots.shuffle(rng);
    let n = cfg.clean_house_markers.clamp(1, spots.len());
    let mut initial = vec![false; rows * cols];
    for &(r, c) in &spots[..n] {
        w.set_markers(r, c, 1);
        initial[r * cols + c] = true;
    }
    (w, Bookkeeping::Collect { initial, total: n })
}

fn sample_harvester(cfg: &TaskConfig) -> (WorldState, Bookkeeping) {
    let (rows, cols) = (cfg.rows, cfg.cols);
    let mut w = WorldState::with_border(rows, cols, rows - 2, 1, Facing::East);
    let mut initial = vec![false; rows * cols];
    let cells = interior(rows, cols);
    for &(r, c) in &cells {
        w.set_markers(r, c, 1);
        initial[r * cols + c] = true;
    }
    (
        w,
        Bookkeeping::Collect {
            initial,
            total: cells.len(),
        },
    )
}

fn sample_door_key(cfg: &TaskConfig, rng: &mut ChaCha8Rng) -> (WorldState, Bookkeeping) {
    let (rows, cols) = (cfg.rows, cfg.cols);
    // Left chamber gets half of the interior columns (3 of 6 on 8x8), then a
    // dividing wall, then the right chamber.
    let inner = cols - 2;
    let left_w = inner / 2;
    let divider = 1 + left_w;
    let mut w = WorldState::with_border(rows, cols, 1, 1, Facing::East);
    for r in 1..rows - 1 {
        w.set_wall(r, divider, true);
    }
    let left: Vec<(usize, usize)> = (1..rows - 1)
        .flat_map(|r| (1..divider).map(move |c| (r, c)))
        .collect();
    let right: Vec<(usize, usize)> = (1..rows - 1)
        .flat_map(|r| (divider + 1..cols - 1).map(move |c| (r, c)))
        .collect();
    let mut picks = left.choose_multiple(rng, 2);
    let agent = *picks.next().expect("left chamber");
    let key = *picks.next().expect("left chamber");
    let target = *right.choose(rng).expect("right chamber");
    let door = (rng.random_range(1..rows - 1), divider);
    w.agent_row = agent.0;
    w.agent_col = agent.1;
    w.facing = random_facing(rng);
    w.set_markers(key.0, key.1, 1);
    w.set_markers(target.0, target.1, 1);
    (
        w,
        Bookkeeping::DoorKey {
            key,
            target,
            door,
            key_picked: false,
        },
    )
}

fn sample_one_stroke(cfg: &TaskConfig, rng: &mut ChaCha8Rng) -> (WorldState, Bookkeeping) {
    let (rows, cols) = (cfg.rows, cfg.cols);
    let cells = interior(rows, cols);
    let &(r, c) = cells.choose(rng).expect("interior");
    let w = WorldState::with_border(rows, cols, r, c, random_facing(rng));
    (
        w,
        Bookkeeping::OneStroke {
            visited: 1,
            empty: cells.len(),
        },
    )
}

fn sample_seeder(cfg: &TaskConfig, rng: &mut ChaCha8Rng) -> (WorldState, Bookkeeping) {
    let (rows, cols) = (cfg.rows, cfg.cols);
    let cells = interior(rows, cols);
    let &(r, c) = cells.choose(rng).expect("interior");
    let w = WorldState::with_border(rows, cols, r, c, random_facing(rng));
    let initial_empty: Vec<bool> = (0..rows * cols)
        .map(|i| !w.walls[i] && w.markers[i] == 0)
        .collect();
    let empty = initial_empty.iter().filter(|&&e| e).count();
    (
        w,
        Bookkeeping::Seeder {
            initial_empty,
            empty,
        },
    )
}

fn spawn_food(w: &mut WorldState, rng: &mut ChaCha8Rng) {
    let free: Vec<usize> = (0..w.rows * w.cols)
        .filter(|&i| !w.walls[i] && w.markers[i] == 0 && i != w.idx(w.agent_row, w.agent_col))
        .collect();
    if let Some(&i) = free.choose(rng) {
        w.markers[i] = 1;
    }
}

fn sample_snake(cfg: &TaskConfig, rng: &mut ChaCha8Rng) -> (WorldState, Bookkeeping) {
    let (rows, cols) = (cfg.rows, cfg.cols);
    let mut starts = Vec::new();
    for (r, c) in interior(rows, cols) {
        for f in Facing::ALL {
            let (dr, dc) = f.opposite().delta();
            let tail_ok = (1..=cfg.snake_body as isize).all(|k| {
                let (tr, tc) = (r as isize + dr * k, c as isize + dc * k);
                tr >= 1 && tc >= 1 && (tr as usize) < rows - 1 && (tc as usize) < cols - 1
            });
            if tail_ok {
                starts.push((r, c, f));
            }
        }
    }
    let &(r, c, f) = starts.choose(rng).expect("grid fits the snake");
    let mut w = WorldState::with_border(rows, cols, r, c, f);
    let (dr, dc) = f.opposite().delta();
    let mut body = VecDeque::new();
    for k in 1..=cfg.snake_body as isize {
        let cell = ((r as isize + dr * k) as usize, (c as isize + dc * k) as usize);
        w.set_wall(cell.0, cell.1, true);
        body.push_back(cell);
    }
    spawn_food(&mut w, rng);
    (
        w,
        Bookkeeping::Snake {
            body,
            eaten: 0,
            goal: cfg.snake_goal,
            crashed: false,
        },
    )
}

/// What [`evaluate_program`] runs in each configuration.
#[derive(Debug, Clone, Copy)]
pub enum Policy<'a> {
    /// One program, executed once.
    Single(&'a Program),
    /// Sub-programs executed one after another on the same episode, each
    /// with its own action budget.
    Sequence(&'a [Program]),
}

/// Per-configuration seeds derived from a base seed.
pub fn config_seed(seed: u64, index: usize) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(index as u64)
        .rotate_left(17)
        ^ 0xD1B5_4A32_D192_ED03
}

/// Return of `policy` on one freshly sampled configuration.
pub fn run_policy(task: TaskId, cfg: &TaskConfig, policy: Policy<'_>, seed: u64, limits: ExecLimits) -> Result<f64, TaskError> {
    let mut ep = Episode::with_config(task, cfg, seed)?;
    let programs: &[Program] = match policy {
        Policy::Single(p) => std::slice::from_ref(p),
        Policy::Sequence(ps) => ps,
    };
    for p in programs {
        if ep.done {
            break;
        }
        exec_in_task(p, &mut ep, limits)?;
    }
    Ok(ep.episode_return())
}

/// Mean and per-configuration returns over `n_configs` sampled configurations.
pub fn evaluate_program(
    task: TaskId,
    cfg: &TaskConfig,
    policy: Policy<'_>,
    n_configs: usize,
    seed: u64,
    limits: ExecLimits,
) -> Result<(f64, Vec<f64>), TaskError> {
    let returns = (0..n_configs)
        .map(|i| run_policy(task, cfg, policy, config_seed(seed, i), limits))
        .collect::<Result<Vec<_>, _>>()?;
    let mean = if returns.is_empty() {
        0.0
    } else {
        returns.iter().sum::<f64>() / returns.len() as f64
    };
    Ok((mean, returns))
}
