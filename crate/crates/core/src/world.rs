//! Karel grid world: state, perception and primitive-action transitions.
//!
//! Row 0 is the top row and East points towards increasing column index.
//! Cells outside the grid behave like walls.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dsl::{Action, Condition, Perception};

/// Markers a single cell can hold.
pub const MAX_MARKERS: u8 = 10;
/// Channels of the state tensor: 4 facing, 1 wall, 11 marker-count one-hot.
pub const CHANNELS: usize = 16;
pub const WALL_CHANNEL: usize = 4;
pub const MARKER_CHANNEL0: usize = 5;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WorldError {
    #[error("dimension mismatch: {0}x{1} vs {2}x{3}")]
    DimensionMismatch(usize, usize, usize, usize),
    #[error("invalid state tensor: {0}")]
    InvalidTensor(String),
    #[error("invalid world: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Facing {
    North,
    East,
    South,
    West,
}

impl Facing {
    pub const ALL: [Facing; 4] = [Facing::North, Facing::East, Facing::South, Facing::West];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Facing {
        Facing::ALL[i % 4]
    }

    pub fn left(self) -> Facing {
        Facing::from_index(self.index() + 3)
    }

    pub fn right(self) -> Facing {
        Facing::from_index(self.index() + 1)
    }

    pub fn opposite(self) -> Facing {
        Facing::from_index(self.index() + 2)
    }

    /// (row, col) step.
    pub fn delta(self) -> (isize, isize) {
        match self {
            Facing::North => (-1, 0),
            Facing::East => (0, 1),
            Facing::South => (1, 0),
            Facing::West => (0, -1),
        }
    }

    fn glyph(self) -> char {
        match self {
            Facing::North => '^',
            Facing::East => '>',
            Facing::South => 'v',
            Facing::West => '<',
        }
    }
}

/// Outcome of a primitive action. Misuse is reported here instead of failing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Event {
    Ok,
    Blocked,
    Saturated,
    InvalidPick,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WorldState {
    pub rows: usize,
    pub cols: usize,
    pub walls: Vec<bool>,
    pub markers: Vec<u8>,
    pub agent_row: usize,
    pub agent_col: usize,
    pub facing: Facing,
}

impl WorldState {
    /// Open grid without walls or markers.
    pub fn new(rows: usize, cols: usize, agent_row: usize, agent_col: usize, facing: Facing) -> Self {
        assert!(rows > 0 && cols > 0, "empty grid");
        assert!(agent_row < rows && agent_col < cols, "agent outside grid");
        WorldState {
            rows,
            cols,
            walls: vec![false; rows * cols],
            markers: vec![0; rows * cols],
            agent_row,
            agent_col,
            facing,
        }
    }

    /// Grid whose outermost ring of cells are walls.
    pub fn with_border(rows: usize, cols: usize, agent_row: usize, agent_col: usize, facing: Facing) -> Self {
        let mut s = WorldState::new(rows, cols, agent_row, agent_col, facing);
        for r in 0..rows {
            for c in 0..cols {
                if r == 0 || c == 0 || r == rows - 1 || c == cols - 1 {
                    s.set_wall(r, c, true);
                }
            }
        }
        s
    }

    /// Parses the ASCII rendering: `#` wall, `.` empty, `1`-`9` marker
    /// count, `X` ten markers, and one of `^>v<` for the agent.
    pub fn from_ascii(text: &str) -> Result<Self, WorldError> {
        let lines: Vec<&str> = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .collect();
        let rows = lines.len();
        let cols = lines.first().map(|l| l.chars().count()).unwrap_or(0);
        if rows == 0 || cols == 0 {
            return Err(WorldError::Invalid("empty drawing".into()));
        }
        let mut walls = vec![false; rows * cols];
        let mut markers = vec![0; rows * cols];
        let mut agent = None;
        for (r, line) in lines.iter().enumerate() {
            if line.chars().count() != cols {
                return Err(WorldError::Invalid(format!("ragged row {r}")));
            }
            for (c, ch) in line.chars().enumerate() {
                let i = r * cols + c;
                match ch {
                    '#' => walls[i] = true,
                    '.' => {}
                    '1'..='9' => markers[i] = ch as u8 - b'0',
                    'X' => markers[i] = MAX_MARKERS,
                    '^' | '>' | 'v' | '<' => {
                        let f = match ch {
                            '^' => Facing::North,
                            '>' => Facing::East,
                            'v' => Facing::South,
                            _ => Facing::West,
                        };
                        if agent.replace((r, c, f)).is_some() {
                            return Err(WorldError::Invalid("two agents".into()));
                        }
                    }
                    other => return Err(WorldError::Invalid(format!("glyph {other:?}"))),
                }
            }
        }
        let (agent_row, agent_col, facing) =
            agent.ok_or_else(|| WorldError::Invalid("no agent".into()))?;
        Ok(WorldState {
            rows,
            cols,
            walls,
            markers,
            agent_row,
            agent_col,
            facing,
        })
    }

    #[inline]
    pub fn idx(&self, r: usize, c: usize) -> usize {
        r * self.cols + c
    }

    pub fn in_grid(&self, r: isize, c: isize) -> bool {
        r >= 0 && c >= 0 && (r as usize) < self.rows && (c as usize) < self.cols
    }

    pub fn is_wall(&self, r: usize, c: usize) -> bool {
        self.walls[self.idx(r, c)]
    }

    pub fn set_wall(&mut self, r: usize, c: usize, wall: bool) {
        let i = self.idx(r, c);
        self.walls[i] = wall;
    }

    pub fn markers_at(&self, r: usize, c: usize) -> u8 {
        self.markers[self.idx(r, c)]
    }

    pub fn set_markers(&mut self, r: usize, c: usize, n: u8) {
        let i = self.idx(r, c);
        self.markers[i] = n.min(MAX_MARKERS);
    }

    pub fn agent(&self) -> (usize, usize) {
        (self.agent_row, self.agent_col)
    }

    pub fn total_markers(&self) -> u32 {
        self.markers.iter().map(|&m| m as u32).sum()
    }

    /// Cell one step from the agent in direction `dir`, if it is in the grid
    /// and not a wall.
    pub fn open_neighbor(&self, dir: Facing) -> Option<(usize, usize)> {
        let (dr, dc) = dir.delta();
        let r = self.agent_row as isize + dr;
        let c = self.agent_col as isize + dc;
        if self.in_grid(r, c) && !self.is_wall(r as usize, c as usize) {
            Some((r as usize, c as usize))
        } else {
            None
        }
    }

    pub fn front_is_clear(&self) -> bool {
        self.open_neighbor(self.facing).is_some()
    }

    pub fn eval_perception(&self, cond: Condition) -> bool {
        let raw = match cond.perception {
            Perception::FrontIsClear => self.front_is_clear(),
            Perception::LeftIsClear => self.open_neighbor(self.facing.left()).is_some(),
            Perception::RightIsClear => self.open_neighbor(self.facing.right()).is_some(),
            Perception::MarkersPresent => self.markers_at(self.agent_row, self.agent_col) > 0,
            Perception::NoMarkersPresent => self.markers_at(self.agent_row, self.agent_col) == 0,
        };
        raw != cond.negated
    }

    /// Applies `action` in place. A blocked move leaves the agent on its cell
    /// but turns it around.
    pub fn step(&mut self, action: Action) -> Event {
        match action {
            Action::Move => match self.open_neighbor(self.facing) {
                Some((r, c)) => {
                    self.agent_row = r;
                    self.agent_col = c;
                    Event::Ok
                }
                None => {
                    self.facing = self.facing.opposite();
                    Event::Blocked
                }
            },
            Action::TurnLeft => {
                self.facing = self.facing.left();
                Event::Ok
            }
            Action::TurnRight => {
                self.facing = self.facing.right();
                Event::Ok
            }
            Action::PutMarker => {
                let i = self.idx(self.agent_row, self.agent_col);
                if self.markers[i] >= MAX_MARKERS {
                    Event::Saturated
                } else {
                    self.markers[i] += 1;
                    Event::Ok
                }
            }
            Action::PickMarker => {
                let i = self.idx(self.agent_row, self.agent_col);
                if self.markers[i] == 0 {
                    Event::InvalidPick
                } else {
                    self.markers[i] -= 1;
                    Event::Ok
                }
            }
        }
    }

    /// Pure transition.
    pub fn apply_action(&self, action: Action) -> (WorldState, Event) {
        let mut next = self.clone();
        let ev = next.step(action);
        (next, ev)
    }

    pub fn same_dims(&self, other: &WorldState) -> Result<(), WorldError> {
        if self.rows == other.rows && self.cols == other.cols {
            Ok(())
        } else {
            Err(WorldError::DimensionMismatch(
                self.rows, self.cols, other.rows, other.cols,
            ))
        }
    }

    /// Checks the state invariants (agent off walls, counts capped).
    pub fn validate(&self) -> Result<(), WorldError> {
        let n = self.rows * self.cols;
        if self.walls.len() != n || self.markers.len() != n {
            return Err(WorldError::Invalid("cell vectors do not match dims".into()));
        }
        if self.agent_row >= self.rows || self.agent_col >= self.cols {
            return Err(WorldError::Invalid("agent outside grid".into()));
        }
        if self.is_wall(self.agent_row, self.agent_col) {
            return Err(WorldError::Invalid("agent on wall".into()));
        }
        if self.markers.iter().any(|&m| m > MAX_MARKERS) {
            return Err(WorldError::Invalid("marker count above cap".into()));
        }
        Ok(())
    }

    pub fn encode_tensor(&self) -> StateTensor {
        let mut data = vec![0u8; self.rows * self.cols * CHANNELS];
        for r in 0..self.rows {
            for c in 0..self.cols {
                let base = (r * self.cols + c) * CHANNELS;
                if (r, c) == self.agent() {
                    data[base + self.facing.index()] = 1;
                }
                if self.is_wall(r, c) {
                    data[base + WALL_CHANNEL] = 1;
                }
                data[base + MARKER_CHANNEL0 + self.markers_at(r, c) as usize] = 1;
            }
        }
        StateTensor {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }
}

/// Structural equality of two same-sized states.
pub fn state_eq(a: &WorldState, b: &WorldState) -> Result<bool, WorldError> {
    a.same_dims(b)?;
    Ok(a == b)
}

impl fmt::Display for WorldState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.rows {
            for c in 0..self.cols {
                let ch = if (r, c) == self.agent() {
                    self.facing.glyph()
                } else if self.is_wall(r, c) {
                    '#'
                } else {
                    match self.markers_at(r, c) {
                        0 => '.',
                        MAX_MARKERS => 'X',
                        m => (b'0' + m) as char,
                    }
                };
                write!(f, "{ch}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Binary `rows x cols x 16` tensor stored row-major as 0/1 bytes.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StateTensor {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<u8>,
}

impl StateTensor {
    pub fn get(&self, r: usize, c: usize, ch: usize) -> bool {
        self.data[(r * self.cols + c) * CHANNELS + ch] != 0
    }

    pub fn shape(&self) -> [usize; 3] {
        [self.rows, self.cols, CHANNELS]
    }

    /// Number of set bits in one channel.
    pub fn channel_count(&self, ch: usize) -> usize {
        self.data
            .chunks_exact(CHANNELS)
            .filter(|cell| cell[ch] != 0)
            .count()
    }

    pub fn decode(&self) -> Result<WorldState, WorldError> {
        if self.data.len() != self.rows * self.cols * CHANNELS {
            return Err(WorldError::InvalidTensor("length does not match shape".into()));
        }
        let mut walls = vec![false; self.rows * self.cols];
        let mut markers = vec![0u8; self.rows * self.cols];
        let mut agent = None;
        for (i, cell) in self.data.chunks_exact(CHANNELS).enumerate() {
            if cell.iter().any(|&b| b > 1) {
                return Err(WorldError::InvalidTensor(format!("non-binary value in cell {i}")));
            }
            for (f, &bit) in cell[..4].iter().enumerate() {
                if bit == 1 && agent.replace((i, Facing::from_index(f))).is_some() {
                    return Err(WorldError::InvalidTensor("more than one facing bit".into()));
                }
            }
            walls[i] = cell[WALL_CHANNEL] == 1;
            let hot: Vec<usize> = (0..=MAX_MARKERS as usize)
                .filter(|&m| cell[MARKER_CHANNEL0 + m] == 1)
                .collect();
            match hot.as_slice() {
                [m] => markers[i] = *m as u8,
                _ => {
                    return Err(WorldError::InvalidTensor(format!(
                        "cell {i} marker one-hot has {} bits",
                        hot.len()
                    )))
                }
            }
        }
        let (i, facing) = agent.ok_or_else(|| WorldError::InvalidTensor("no facing bit".into()))?;
        Ok(WorldState {
            rows: self.rows,
            cols: self.cols,
            walls,
            markers,
            agent_row: i / self.cols,
            agent_col: i % self.cols,
            facing,
        })
    }
}
