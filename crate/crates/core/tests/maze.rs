use std::collections::{HashMap, HashSet, VecDeque};

use rand::Rng;
use regretscope_core::maze::*;
use regretscope_core::rng::seeded;

/// Test-side dynamics written from the layout description.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
struct S {
    r: i32,
    c: i32,
    key: bool,
    open: bool,
}

const LAYOUT: [&str; 5] = ["#####", "#.|.#", "#.|.#", "#K|G#", "#####"];

fn step(door_row: i32, s: S, a: usize) -> S {
    let (dr, dc) = [(-1, 0), (0, 1), (1, 0), (0, -1)][a];
    let (r, c) = (s.r + dr, s.c + dc);
    let ch = LAYOUT[r as usize].as_bytes()[c as usize];
    let mut n = s;
    match ch {
        b'#' => {}
        b'|' if r == door_row => {
            if s.key || s.open {
                n.r = r;
                n.c = c;
                n.open = true;
            }
        }
        b'|' => {}
        b'K' => {
            n.r = r;
            n.c = c;
            n.key = true;
        }
        _ => {
            n.r = r;
            n.c = c;
        }
    }
    n
}

fn is_goal(s: S) -> bool {
    (s.r, s.c) == (3, 3)
}

const START_S: S = S { r: 1, c: 1, key: false, open: false };

fn bfs_len(door_row: i32) -> usize {
    let mut seen = HashSet::from([START_S]);
    let mut q = VecDeque::from([(START_S, 0)]);
    while let Some((s, d)) = q.pop_front() {
        if is_goal(s) {
            return d;
        }
        for a in 0..4 {
            let n = step(door_row, s, a);
            if seen.insert(n) {
                q.push_back((n, d + 1));
            }
        }
    }
    unreachable!()
}

#[test]
fn bfs_oracle_matches() {
    for door in DoorRow::ALL {
        let cfg = MazeConfig::new(door, KdColor::Gray);
        let len = bfs_len(1 + door as i32);
        assert_eq!(shortest_solution(&cfg).unwrap().len(), len);
        assert!((optimal_maze_value(&cfg).unwrap() - 0.95f64.powi(len as i32 - 1)).abs() < 1e-15);
    }
    // the layout is not mirror-symmetric, so north and south differ
    let n = optimal_maze_value(&MazeConfig::new(DoorRow::North, KdColor::Red)).unwrap();
    let s = optimal_maze_value(&MazeConfig::new(DoorRow::South, KdColor::Blue)).unwrap();
    assert!(n < s);
}

/// Exact expected normalised return of the uniform random policy.
fn uniform_random_value(door_row: i32, horizon: usize, gamma: f64) -> f64 {
    // v[t][s]: expected return from s with t steps left
    let mut states = HashSet::from([START_S]);
    let mut frontier = vec![START_S];
    while let Some(s) = frontier.pop() {
        for a in 0..4 {
            let n = step(door_row, s, a);
            if !is_goal(n) && states.insert(n) {
                frontier.push(n);
            }
        }
    }
    let mut v: HashMap<S, f64> = states.iter().map(|&s| (s, 0.0)).collect();
    for _ in 0..horizon {
        let mut next = HashMap::new();
        for &s in &states {
            let mut sum = 0.0;
            for a in 0..4 {
                let n = step(door_row, s, a);
                sum += if is_goal(n) { 1.0 } else { gamma * v[&n] };
            }
            next.insert(s, sum / 4.0);
        }
        v = next;
    }
    v[&START_S] / gamma.powi(bfs_len(door_row) as i32 - 1)
}

#[test]
fn uniform_random_matches_exact_dp() {
    let cfg = MazeConfig::new(DoorRow::Center, KdColor::Green);
    let exact = uniform_random_value(2, cfg.horizon, cfg.gamma);
    let est = evaluate_with(&[cfg], 20_000, 99, |_, _, rng| rng.random_range(0..4)).unwrap();
    let se = est.std / (est.episodes as f64).sqrt();
    assert!((est.mean - exact).abs() <= 3.0 * se, "{} ± {se} vs {exact}", est.mean);

    // independent generator, independent rollout code
    let mut g = XorShift(0x2545_f491_4f6c_dd1d);
    let n = 20_000;
    let mut sum = 0.0;
    for _ in 0..n {
        let mut s = START_S;
        let mut disc = 1.0;
        for _ in 0..cfg.horizon {
            s = step(2, s, g.action());
            if is_goal(s) {
                sum += disc;
                break;
            }
            disc *= cfg.gamma;
        }
    }
    let mc = sum / n as f64 / cfg.gamma.powi(5);
    assert!((mc - exact).abs() <= 3.0 * se, "{mc} vs {exact}");
}

struct XorShift(u64);

impl XorShift {
    fn action(&mut self) -> usize {
        self.0 ^= self.0 << 13;
        self.0 ^= self.0 >> 7;
        self.0 ^= self.0 << 17;
        (self.0 >> 62) as usize
    }
}

fn reachable(cfg: &MazeConfig) -> Vec<MazeState> {
    let (s0, _) = maze_reset(cfg);
    let mut seen = HashSet::from([s0]);
    let mut stack = vec![s0];
    while let Some(s) = stack.pop() {
        if s.agent == GOAL {
            continue;
        }
        for a in Action::ALL {
            let n = transition(cfg, &s, a);
            if seen.insert(n) {
                stack.push(n);
            }
        }
    }
    let mut v: Vec<_> = seen.into_iter().collect();
    v.sort_by_key(|s| (s.agent, s.carrying, s.door_open));
    v
}

#[test]
fn hidecolors_coincides_on_every_reachable_state() {
    for door in DoorRow::ALL {
        let cfgs: Vec<_> = KdColor::ALL.iter().map(|&c| MazeConfig::new(door, c)).collect();
        let states = reachable(&cfgs[0]);
        assert!(states.len() < 500);
        for cfg in &cfgs[1..] {
            assert_eq!(reachable(cfg), states);
            for s in &states {
                assert_eq!(
                    apply_filter(&render(cfg, s), PreFilter::HideColors),
                    apply_filter(&render(&cfgs[0], s), PreFilter::HideColors)
                );
            }
        }
    }
}

#[test]
fn hidedoor_hides_door_until_opened() {
    let cfgs = test_configs();
    for s in reachable(&cfgs[0]).into_iter().filter(|s| !s.door_open) {
        let obs: Vec<_> = cfgs.iter().map(|c| apply_filter(&render(c, &s), PreFilter::HideDoor)).collect();
        assert_eq!(obs[0], obs[1]);
        assert_eq!(obs[1], obs[2]);
    }
}

#[test]
fn hidedoor_deterministic_policies_solve_at_most_one_door() {
    let cfgs = test_configs();
    let mut rng = seeded(11);
    let mut solved_any = 0;
    for _ in 0..2000 {
        let mut table: HashMap<MazeObservation, usize> = HashMap::new();
        let mut solved = 0;
        for cfg in &cfgs {
            let (mut s, _) = maze_reset(cfg);
            loop {
                let obs = apply_filter(&render(cfg, &s), PreFilter::HideDoor);
                let a = *table.entry(obs).or_insert_with(|| rng.random_range(0..4));
                let (n, out) = maze_step(cfg, &s, Action::from_index(a)).unwrap();
                if out.done {
                    solved += out.solved as usize;
                    break;
                }
                s = n;
            }
        }
        assert!(solved <= 1);
        solved_any += solved;
    }
    assert!(solved_any > 0);
}

/// Best mean normalised return of a single open-loop action sequence over
/// the training configurations (DP over joint states).
fn open_loop_bound() -> f64 {
    let cfgs = train_configs();
    let rows: Vec<i32> = cfgs.iter().map(|c| 1 + c.door as i32).collect();
    let norms: Vec<f64> = rows.iter().map(|&r| 0.95f64.powi(bfs_len(r) as i32 - 1)).collect();
    type Joint = Vec<Option<S>>;
    let mut layers: Vec<HashSet<Joint>> = vec![HashSet::from([vec![Some(START_S); 3]])];
    for _ in 0..DEFAULT_HORIZON {
        let mut next = HashSet::new();
        for j in layers.last().unwrap() {
            for a in 0..4 {
                next.insert(j.iter().zip(&rows).map(|(s, &r)| s.map(|s| step(r, s, a)).filter(|n| !is_goal(*n))).collect());
            }
        }
        layers.push(next);
    }
    let mut value: HashMap<Joint, f64> = layers[DEFAULT_HORIZON].iter().map(|j| (j.clone(), 0.0)).collect();
    for t in (0..DEFAULT_HORIZON).rev() {
        let disc = 0.95f64.powi(t as i32);
        let mut cur = HashMap::new();
        for j in &layers[t] {
            let mut best = f64::NEG_INFINITY;
            for a in 0..4 {
                let mut gain = 0.0;
                let n: Joint = j
                    .iter()
                    .zip(&rows)
                    .enumerate()
                    .map(|(i, (s, &r))| {
                        let n = s.map(|s| step(r, s, a));
                        if n.is_some_and(is_goal) {
                            gain += disc / norms[i] / 3.0;
                            None
                        } else {
                            n
                        }
                    })
                    .collect();
                best = best.max(gain + value[&n]);
            }
            cur.insert(j.clone(), best);
        }
        value = cur;
    }
    value[&vec![Some(START_S); 3]]
}

#[test]
fn blind_learner_is_bounded_by_open_loop() {
    let bound = open_loop_bound();
    assert!(bound > 0.0 && bound < 1.0);
    let rec = Recognizer::new(PreFilter::Blind);
    let table = train_tabular(&train_configs(), &rec, &LearnerConfig::default(), 0).unwrap();
    let v = evaluate(&train_configs(), &rec, &table, 0.0, 30, 0).unwrap();
    assert!(v.mean <= bound + 1e-9, "{} > {bound}", v.mean);
}

#[test]
fn hidecolors_learner_generalizes() {
    let rec = Recognizer::new(PreFilter::HideColors);
    let table = train_tabular(&train_configs(), &rec, &LearnerConfig::default(), 2).unwrap();
    let train = evaluate(&train_configs(), &rec, &table, 0.0, 30, 0).unwrap();
    let test = evaluate(&test_configs(), &rec, &table, 0.0, 30, 0).unwrap();
    assert!(train.mean >= 0.95, "{}", train.mean);
    assert!(test.mean >= 0.95, "{}", test.mean);
    assert_eq!(table.collisions(), 0);
}

#[test]
fn normalized_values_are_bounded() {
    for f in PreFilter::ALL {
        let rec = Recognizer::new(f);
        let cfg = LearnerConfig { episodes: 2000, ..LearnerConfig::default() };
        let table = train_tabular(&train_configs(), &rec, &cfg, 4).unwrap();
        for configs in [train_configs(), test_configs()] {
            let e = evaluate(&configs, &rec, &table, 0.2, 60, 1).unwrap();
            assert!(e.mean >= 0.0 && e.mean <= 1.0 + 1e-9);
        }
    }
}
