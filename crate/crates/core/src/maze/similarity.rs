use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::bfs::shortest_solution;
use super::filter::{apply_filter, PreFilter, ONE_HOT_IDS};
use super::grid::{all_configs, maze_reset, render, transition, DoorRow, KdColor, MazeConfig, MazeObservation};
use crate::error::Result;

/// Pairwise representation distances between the twelve door/color
/// configurations (color-major order).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityMatrix {
    pub filter: PreFilter,
    pub labels: Vec<String>,
    pub values: Vec<Vec<f64>>,
}

fn features(obs: &MazeObservation, filter: PreFilter) -> Vec<f64> {
    if filter == PreFilter::OneHot {
        let mut v = vec![0.0; obs.data.len() * ONE_HOT_IDS];
        for (i, &id) in obs.data.iter().enumerate() {
            v[i * ONE_HOT_IDS + id as usize] = 1.0;
        }
        v
    } else {
        obs.data.iter().map(|&x| x as f64).collect()
    }
}

/// Filtered observations at each decision step of the shortest solution.
pub fn solving_trajectory(config: &MazeConfig, filter: PreFilter) -> Result<Vec<Vec<f64>>> {
    let plan = shortest_solution(config)?;
    let (mut s, _) = maze_reset(config);
    let mut out = Vec::with_capacity(plan.len());
    for a in plan {
        out.push(features(&apply_filter(&render(config, &s), filter), filter));
        s = transition(config, &s, a);
    }
    Ok(out)
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    libm::sqrt(a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum())
}

fn mean_distance(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    let mut sum = 0.0;
    for x in a {
        for y in b {
            sum += dist(x, y);
        }
    }
    sum / (a.len() * b.len()) as f64
}

/// Entry `(i, j)` is `2·D(i, j) − D(i, i) − D(j, j)`, where `D` is the mean
/// Euclidean distance over all pairs of steps of the two trajectories.
pub fn similarity_matrix(filter: PreFilter) -> Result<SimilarityMatrix> {
    let configs = all_configs();
    let trajs = configs.iter().map(|c| solving_trajectory(c, filter)).collect::<Result<Vec<_>>>()?;
    let within: Vec<f64> = trajs.iter().map(|t| mean_distance(t, t)).collect();
    let n = configs.len();
    let mut values = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let cross = mean_distance(&trajs[i], &trajs[j]);
            let v = (cross - within[i]) + (cross - within[j]);
            values[i][j] = v;
            values[j][i] = v;
        }
    }
    Ok(SimilarityMatrix { filter, labels: configs.iter().map(|c| c.label()).collect(), values })
}

impl SimilarityMatrix {
    fn block_mean(&self, groups: &[Vec<usize>]) -> Vec<Vec<f64>> {
        groups
            .iter()
            .map(|gi| {
                groups
                    .iter()
                    .map(|gj| {
                        let sum: f64 = gi.iter().flat_map(|&i| gj.iter().map(move |&j| (i, j))).map(|(i, j)| self.values[i][j]).sum();
                        sum / (gi.len() * gj.len()) as f64
                    })
                    .collect()
            })
            .collect()
    }

    /// 4×4 block averages by key/door color.
    pub fn by_color(&self) -> (Vec<String>, Vec<Vec<f64>>) {
        let groups: Vec<Vec<usize>> = (0..KdColor::ALL.len()).map(|c| (0..3).map(|d| 3 * c + d).collect()).collect();
        (KdColor::ALL.iter().map(|c| String::from(c.name())).collect(), self.block_mean(&groups))
    }

    /// 3×3 block averages by door location.
    pub fn by_door(&self) -> (Vec<String>, Vec<Vec<f64>>) {
        let groups: Vec<Vec<usize>> = (0..3).map(|d| (0..KdColor::ALL.len()).map(|c| 3 * c + d).collect()).collect();
        (DoorRow::ALL.iter().map(|d| String::from(d.name())).collect(), self.block_mean(&groups))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn contracts_hold_for_every_filter() {
        for f in PreFilter::ALL {
            let m = similarity_matrix(f).unwrap();
            for i in 0..12 {
                assert_eq!(m.values[i][i], 0.0);
                for j in 0..12 {
                    assert_eq!(m.values[i][j], m.values[j][i]);
                    assert!(m.values[i][j] >= -1e-12);
                }
            }
        }
    }

    #[test]
    fn hidecolors_same_door_is_zero() {
        let m = similarity_matrix(PreFilter::HideColors).unwrap();
        for d in 0..3 {
            for c1 in 0..4 {
                for c2 in 0..4 {
                    assert_eq!(m.values[3 * c1 + d][3 * c2 + d], 0.0);
                }
            }
        }
    }

    #[test]
    fn identity_same_door_is_positive() {
        let m = similarity_matrix(PreFilter::Identity).unwrap();
        for d in 0..3 {
            for c1 in 0..4 {
                for c2 in 0..4 {
                    if c1 != c2 {
                        assert!(m.values[3 * c1 + d][3 * c2 + d] > 0.0);
                    }
                }
            }
        }
    }

    #[test]
    fn aggregated_views() {
        let m = similarity_matrix(PreFilter::Identity).unwrap();
        let (labels, by_color) = m.by_color();
        assert_eq!(labels.len(), 4);
        assert_eq!(by_color.len(), 4);
        let (labels, by_door) = m.by_door();
        assert_eq!(labels, ["north", "center", "south"]);
        assert_eq!(by_door[0][1], by_door[1][0]);
    }
}
