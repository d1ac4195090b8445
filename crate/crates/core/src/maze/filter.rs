use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::grid::{color, obj, state, MazeObservation, CELLS, CHANNELS, HEIGHT, KEY, WALL_COL, WIDTH};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PreFilter {
    Identity,
    /// Key and door recolored gray.
    HideColors,
    /// Every interior cell of the wall column drawn as a locked door.
    HideDoor,
    /// Constant observation.
    Blind,
    /// Single channel holding one id per object/color combination.
    OneHot,
}

impl PreFilter {
    pub const ALL: [PreFilter; 5] =
        [PreFilter::Identity, PreFilter::HideColors, PreFilter::HideDoor, PreFilter::Blind, PreFilter::OneHot];

    pub fn name(self) -> &'static str {
        match self {
            PreFilter::Identity => "identity",
            PreFilter::HideColors => "hidecolors",
            PreFilter::HideDoor => "hidedoor",
            PreFilter::Blind => "blind",
            PreFilter::OneHot => "onehot",
        }
    }

    pub fn parse(name: &str) -> Option<PreFilter> {
        Self::ALL.into_iter().find(|f| f.name() == name)
    }

    /// Channels produced by this filter on a full observation.
    pub fn output_channels(self) -> usize {
        match self {
            PreFilter::Blind | PreFilter::OneHot => 1,
            _ => CHANNELS,
        }
    }
}

/// Combined id used by [`PreFilter::OneHot`].
pub fn combined_id(ty: u8, col: u8) -> u8 {
    ty * color::COUNT + col
}

pub const ONE_HOT_IDS: usize = obj::COUNT as usize * color::COUNT as usize;

/// Interior cells of the parting wall column.
pub fn wall_column_region() -> Vec<usize> {
    (1..HEIGHT - 1).map(|r| r * WIDTH + WALL_COL).collect()
}

pub fn apply_filter(obs: &MazeObservation, f: PreFilter) -> MazeObservation {
    debug_assert_eq!(obs.channels, CHANNELS);
    match f {
        PreFilter::Identity => obs.clone(),
        PreFilter::HideColors => {
            let mut out = obs.clone();
            for at in 0..CELLS {
                let ty = obs.get(at, 0);
                if ty == obj::KEY || ty == obj::DOOR {
                    out.data[at * CHANNELS + 2] = color::GRAY;
                }
            }
            out
        }
        PreFilter::HideDoor => {
            let region = wall_column_region();
            let door_color = region
                .iter()
                .find(|&&at| obs.get(at, 0) == obj::DOOR)
                .map(|&at| obs.get(at, 2))
                .unwrap_or_else(|| if obs.get(KEY, 0) == obj::KEY { obs.get(KEY, 2) } else { color::NONE });
            let mut out = obs.clone();
            for at in region {
                if obs.get(at, 0) == obj::WALL {
                    out.data[at * CHANNELS..(at + 1) * CHANNELS].copy_from_slice(&[obj::DOOR, state::LOCKED, door_color]);
                }
            }
            out
        }
        PreFilter::Blind => MazeObservation { channels: 1, data: vec![0] },
        PreFilter::OneHot => MazeObservation {
            channels: 1,
            data: (0..CELLS).map(|at| combined_id(obs.get(at, 0), obs.get(at, 2))).collect(),
        },
    }
}

/// Keeps the listed channels, in order. An empty list yields a constant
/// observation.
pub fn project_channels(obs: &MazeObservation, keep: &[usize]) -> Result<MazeObservation> {
    if let Some(&ch) = keep.iter().find(|&&ch| ch >= obs.channels) {
        return Err(Error::OutOfRange { name: "channel", value: ch as f64, range: "[0, channels)" });
    }
    let cells = obs.data.len() / obs.channels.max(1);
    let data = (0..cells).flat_map(|at| keep.iter().map(move |&ch| obs.get(at, ch))).collect();
    Ok(MazeObservation { channels: keep.len(), data })
}

/// Zeroes each channel entry of the `region` cells independently with
/// probability `p`; entries outside the region are untouched.
pub fn apply_mask<R: Rng + ?Sized>(obs: &mut MazeObservation, p: f64, region: &[usize], rng: &mut R) {
    for &at in region {
        for ch in 0..obs.channels {
            if rng.random::<f64>() < p {
                obs.data[at * obs.channels + ch] = 0;
            }
        }
    }
}
