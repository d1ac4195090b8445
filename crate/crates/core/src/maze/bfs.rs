use alloc::collections::VecDeque;
use alloc::vec::Vec;

use hashbrown::HashMap;

use super::grid::{maze_reset, transition, Action, MazeConfig, MazeState, GOAL};
use crate::error::{Error, Result};

type Key = (usize, bool, bool);

fn key(s: &MazeState) -> Key {
    (s.agent, s.carrying, s.door_open)
}

/// Shortest action sequence from reset to the goal, trying moves in
/// N, E, S, W order. Ignores the step limit.
pub fn shortest_solution(config: &MazeConfig) -> Result<Vec<Action>> {
    let (start, _) = maze_reset(config);
    let mut parent: HashMap<Key, (Key, Action)> = HashMap::new();
    let mut queue = VecDeque::from([start]);
    parent.insert(key(&start), (key(&start), Action::North));
    while let Some(s) = queue.pop_front() {
        if s.agent == GOAL {
            let mut path = Vec::new();
            let mut k = key(&s);
            while k != key(&start) {
                let (prev, a) = parent[&k];
                path.push(a);
                k = prev;
            }
            path.reverse();
            return Ok(path);
        }
        for a in Action::ALL {
            let n = transition(config, &s, a);
            if !parent.contains_key(&key(&n)) {
                parent.insert(key(&n), (key(&s), a));
                queue.push_back(n);
            }
        }
    }
    Err(Error::Unsolvable)
}

/// `γ^{L−1}` for the shortest solve length `L`.
pub fn optimal_maze_value(config: &MazeConfig) -> Result<f64> {
    let len = shortest_solution(config)?.len();
    if len > config.horizon {
        return Err(Error::Unsolvable);
    }
    Ok(libm::pow(config.gamma, (len - 1) as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maze::grid::{DoorRow, KdColor};

    #[test]
    fn path_lengths() {
        for (door, len) in [(DoorRow::North, 8), (DoorRow::Center, 6), (DoorRow::South, 4)] {
            assert_eq!(shortest_solution(&MazeConfig::new(door, KdColor::Gray)).unwrap().len(), len);
        }
    }

    #[test]
    fn value_limits() {
        let mut cfg = MazeConfig::new(DoorRow::Center, KdColor::Green);
        assert!((optimal_maze_value(&cfg).unwrap() - libm::pow(0.95, 5.0)).abs() < 1e-15);
        cfg.gamma = 1.0 - 1e-12;
        assert!((optimal_maze_value(&cfg).unwrap() - 1.0).abs() < 1e-9);
        cfg.horizon = 5;
        assert!(matches!(optimal_maze_value(&cfg), Err(Error::Unsolvable)));
    }
}
