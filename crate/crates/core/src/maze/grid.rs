use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const WIDTH: usize = 5;
pub const HEIGHT: usize = 5;
pub const CELLS: usize = WIDTH * HEIGHT;
pub const CHANNELS: usize = 3;
pub const N_ACTIONS: usize = 4;
pub const DEFAULT_HORIZON: usize = 40;
pub const DEFAULT_GAMMA: f64 = 0.95;

/// Lattice column of the parting wall.
pub const WALL_COL: usize = 2;
pub const START: usize = cell(1, 1);
pub const KEY: usize = cell(3, 1);
pub const GOAL: usize = cell(3, 3);

pub mod obj {
    pub const EMPTY: u8 = 0;
    pub const WALL: u8 = 1;
    pub const DOOR: u8 = 2;
    pub const KEY: u8 = 3;
    pub const GOAL: u8 = 4;
    pub const AGENT: u8 = 5;
    pub const COUNT: u8 = 6;
}

pub mod state {
    pub const NONE: u8 = 0;
    pub const LOCKED: u8 = 1;
    pub const OPEN: u8 = 2;
    pub const CARRYING: u8 = 1;
}

pub mod color {
    pub const NONE: u8 = 0;
    pub const RED: u8 = 1;
    pub const GREEN: u8 = 2;
    pub const BLUE: u8 = 3;
    pub const GRAY: u8 = 4;
    pub const COUNT: u8 = 5;
}

pub const fn cell(row: usize, col: usize) -> usize {
    row * WIDTH + col
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DoorRow {
    North = 0,
    Center = 1,
    South = 2,
}

impl DoorRow {
    pub const ALL: [DoorRow; 3] = [DoorRow::North, DoorRow::Center, DoorRow::South];

    pub fn name(self) -> &'static str {
        match self {
            DoorRow::North => "north",
            DoorRow::Center => "center",
            DoorRow::South => "south",
        }
    }

    pub fn cell(self) -> usize {
        cell(1 + self as usize, WALL_COL)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KdColor {
    Red = 1,
    Green = 2,
    Blue = 3,
    Gray = 4,
}

impl KdColor {
    pub const ALL: [KdColor; 4] = [KdColor::Red, KdColor::Green, KdColor::Blue, KdColor::Gray];

    pub fn name(self) -> &'static str {
        match self {
            KdColor::Red => "red",
            KdColor::Green => "green",
            KdColor::Blue => "blue",
            KdColor::Gray => "gray",
        }
    }

    pub fn id(self) -> u8 {
        self as u8
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Action {
    North = 0,
    East = 1,
    South = 2,
    West = 3,
}

impl Action {
    pub const ALL: [Action; 4] = [Action::North, Action::East, Action::South, Action::West];

    pub fn from_index(i: usize) -> Action {
        Self::ALL[i]
    }

    fn apply(self, at: usize) -> usize {
        match self {
            Action::North => at - WIDTH,
            Action::East => at + 1,
            Action::South => at + WIDTH,
            Action::West => at - 1,
        }
    }
}

/// Key-door maze instance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MazeConfig {
    pub door: DoorRow,
    pub color: KdColor,
    /// Step limit `T`.
    pub horizon: usize,
    pub gamma: f64,
}

impl MazeConfig {
    pub fn new(door: DoorRow, color: KdColor) -> Self {
        MazeConfig { door, color, horizon: DEFAULT_HORIZON, gamma: DEFAULT_GAMMA }
    }

    pub fn label(&self) -> alloc::string::String {
        alloc::format!("{}-{}", self.color.name(), self.door.name())
    }

    fn is_wall(&self, at: usize) -> bool {
        let (r, c) = (at / WIDTH, at % WIDTH);
        r == 0 || c == 0 || r == HEIGHT - 1 || c == WIDTH - 1 || (c == WALL_COL && at != self.door.cell())
    }
}

/// Training configurations: the door location fixes the color.
pub fn train_configs() -> Vec<MazeConfig> {
    vec![
        MazeConfig::new(DoorRow::North, KdColor::Red),
        MazeConfig::new(DoorRow::Center, KdColor::Green),
        MazeConfig::new(DoorRow::South, KdColor::Blue),
    ]
}

/// Test configurations: gray key and door at every location.
pub fn test_configs() -> Vec<MazeConfig> {
    DoorRow::ALL.iter().map(|&d| MazeConfig::new(d, KdColor::Gray)).collect()
}

/// All twelve door/color combinations, color-major.
pub fn all_configs() -> Vec<MazeConfig> {
    KdColor::ALL.iter().flat_map(|&c| DoorRow::ALL.iter().map(move |&d| MazeConfig::new(d, c))).collect()
}

/// Dynamic part of a maze episode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MazeState {
    pub agent: usize,
    pub carrying: bool,
    pub door_open: bool,
    pub steps: usize,
    pub done: bool,
}

/// Multi-channel integer grid, cell-major: entry `cell * channels + ch`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MazeObservation {
    pub channels: usize,
    pub data: Vec<u8>,
}

impl MazeObservation {
    pub fn get(&self, at: usize, ch: usize) -> u8 {
        self.data[at * self.channels + ch]
    }

    pub fn cell_values(&self, at: usize) -> &[u8] {
        &self.data[at * self.channels..(at + 1) * self.channels]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepOutcome {
    pub reward: f64,
    pub done: bool,
    /// Reached the goal, as opposed to running out of steps.
    pub solved: bool,
}

pub fn maze_reset(config: &MazeConfig) -> (MazeState, MazeObservation) {
    let s = MazeState { agent: START, carrying: false, door_open: false, steps: 0, done: false };
    (s, render(config, &s))
}

/// Position and flags after one move, ignoring the step limit.
pub fn transition(config: &MazeConfig, s: &MazeState, action: Action) -> MazeState {
    let mut next = *s;
    let target = action.apply(s.agent);
    if target == config.door.cell() {
        if s.door_open || s.carrying {
            next.door_open = true;
            next.agent = target;
        }
    } else if !config.is_wall(target) {
        next.agent = target;
        if target == KEY {
            next.carrying = true;
        }
    }
    next
}

pub fn maze_step(config: &MazeConfig, s: &MazeState, action: Action) -> Result<(MazeState, StepOutcome)> {
    if s.done {
        return Err(Error::SteppedTerminal);
    }
    let mut next = transition(config, s, action);
    next.steps += 1;
    let solved = next.agent == GOAL;
    next.done = solved || next.steps >= config.horizon;
    Ok((next, StepOutcome { reward: if solved { 1.0 } else { 0.0 }, done: next.done, solved }))
}

pub fn render(config: &MazeConfig, s: &MazeState) -> MazeObservation {
    let mut data = vec![0u8; CELLS * CHANNELS];
    for at in 0..CELLS {
        let v = &mut data[at * CHANNELS..(at + 1) * CHANNELS];
        if at == s.agent {
            v.copy_from_slice(&[obj::AGENT, if s.carrying { state::CARRYING } else { state::NONE }, color::NONE]);
        } else if at == config.door.cell() {
            let st = if s.door_open { state::OPEN } else { state::LOCKED };
            v.copy_from_slice(&[obj::DOOR, st, config.color.id()]);
        } else if config.is_wall(at) {
            v.copy_from_slice(&[obj::WALL, state::NONE, color::GRAY]);
        } else if at == KEY && !s.carrying {
            v.copy_from_slice(&[obj::KEY, state::NONE, config.color.id()]);
        } else if at == GOAL {
            v.copy_from_slice(&[obj::GOAL, state::NONE, color::GREEN]);
        }
    }
    MazeObservation { channels: CHANNELS, data }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn count(obs: &MazeObservation, ty: u8) -> usize {
        (0..CELLS).filter(|&at| obs.get(at, 0) == ty).count()
    }

    #[test]
    fn reset_renders_one_agent_and_locked_door() {
        let cfg = MazeConfig::new(DoorRow::Center, KdColor::Green);
        let (s, obs) = maze_reset(&cfg);
        assert_eq!(count(&obs, obj::AGENT), 1);
        assert_eq!(count(&obs, obj::DOOR), 1);
        assert_eq!(obs.cell_values(DoorRow::Center.cell()), &[obj::DOOR, state::LOCKED, color::GREEN]);
        assert_eq!(obs.cell_values(KEY), &[obj::KEY, state::NONE, color::GREEN]);
        assert!(!s.carrying && !s.door_open && s.steps == 0);
        assert_eq!(maze_reset(&cfg), (s, obs));
    }

    #[test]
    fn test_configs_are_gray() {
        for cfg in test_configs() {
            let (_, obs) = maze_reset(&cfg);
            assert_eq!(obs.get(KEY, 2), color::GRAY);
            assert_eq!(obs.get(cfg.door.cell(), 2), color::GRAY);
        }
    }

    #[test]
    fn walls_and_locked_doors_block() {
        let cfg = MazeConfig::new(DoorRow::North, KdColor::Red);
        let (s, _) = maze_reset(&cfg);
        let (n, out) = maze_step(&cfg, &s, Action::North).unwrap();
        assert_eq!((n.agent, out.reward, out.done), (START, 0.0, false));
        // door is east of the start cell but locked
        let (n, _) = maze_step(&cfg, &s, Action::East).unwrap();
        assert_eq!(n.agent, START);
        assert!(!n.door_open);
    }

    #[test]
    fn key_opens_door_and_goal_terminates() {
        let cfg = MazeConfig::new(DoorRow::South, KdColor::Blue);
        let (mut s, _) = maze_reset(&cfg);
        for a in [Action::South, Action::South] {
            s = maze_step(&cfg, &s, a).unwrap().0;
        }
        assert!(s.carrying);
        assert_eq!(render(&cfg, &s).get(KEY, 0), obj::AGENT);
        let (s, _) = maze_step(&cfg, &s, Action::East).unwrap();
        assert!(s.door_open && s.agent == DoorRow::South.cell());
        let (s, out) = maze_step(&cfg, &s, Action::East).unwrap();
        assert_eq!((s.agent, out.reward, out.done, out.solved), (GOAL, 1.0, true, true));
        assert!(matches!(maze_step(&cfg, &s, Action::West), Err(Error::SteppedTerminal)));
    }

    #[test]
    fn step_limit_ends_episode() {
        let cfg = MazeConfig { horizon: 3, ..MazeConfig::new(DoorRow::North, KdColor::Red) };
        let (mut s, _) = maze_reset(&cfg);
        for i in 0..3 {
            let (n, out) = maze_step(&cfg, &s, Action::North).unwrap();
            assert_eq!(out.done, i == 2);
            assert!(!out.solved);
            s = n;
        }
    }

    #[test]
    fn config_sets() {
        assert_eq!(all_configs().len(), 12);
        assert_eq!(all_configs()[0].label(), "red-north");
        assert_eq!(all_configs()[11].label(), "gray-south");
        assert!(train_configs().iter().all(|c| c.door as usize + 1 == c.color as usize));
    }
}
