//! Two-weight projections of the error surface: SSE as a function of a
//! chosen pair of weights with every other weight frozen.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::datasets::Dataset;
use crate::fmt::g17;
use crate::network::{Network, Topology};
use crate::trainer::{self, TrainError};

pub const DEFAULT_RANGE: (f64, f64) = (-5.0, 5.0);
pub const DEFAULT_STEPS: usize = 101;
/// Neighbouring cells closer than this are tied.
pub const TIE_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum SurfaceError {
    #[error("malformed weight coordinate `{0}` (expected e.g. w1_11 or w1_1_1)")]
    Syntax(String),
    #[error("weight {coord} does not exist in a {topology} network")]
    Index { coord: WeightCoord, topology: String },
    #[error("projection needs two distinct weights, got {0} twice")]
    SamePair(WeightCoord),
    #[error("need at least {min} steps per axis, got {steps}")]
    Steps { steps: usize, min: usize },
    #[error("invalid range [{lo}, {hi}]")]
    Range { lo: f64, hi: f64 },
    #[error(transparent)]
    Train(#[from] TrainError),
}

pub type Result<T> = std::result::Result<T, SurfaceError>;

/// Zero-based position of a weight: matrix `layer`, unit `row`, input `col`
/// (the last column is the bias).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct WeightCoord {
    pub layer: usize,
    pub row: usize,
    pub col: usize,
}

impl WeightCoord {
    pub fn new(layer: usize, row: usize, col: usize) -> Self {
        Self { layer, row, col }
    }

    pub fn is_valid(&self, topology: &Topology) -> bool {
        self.layer < topology.depth() && {
            let (r, c) = topology.weight_shape(self.layer);
            self.row < r && self.col < c
        }
    }

    pub fn check(&self, topology: &Topology) -> Result<()> {
        if self.is_valid(topology) {
            Ok(())
        } else {
            Err(SurfaceError::Index {
                coord: *self,
                topology: topology.to_string(),
            })
        }
    }
}

impl fmt::Display for WeightCoord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (l, r, c) = (self.layer + 1, self.row + 1, self.col + 1);
        if r > 9 || c > 9 {
            write!(f, "w{l}_{r}_{c}")
        } else {
            write!(f, "w{l}_{r}{c}")
        }
    }
}

impl FromStr for WeightCoord {
    type Err = SurfaceError;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || SurfaceError::Syntax(s.to_string());
        let rest = s.trim().strip_prefix(['w', 'W']).ok_or_else(bad)?;
        let (layer, rest) = rest.split_once('_').ok_or_else(bad)?;
        let one_based = |t: &str| -> Result<usize> {
            match t.parse::<usize>() {
                Ok(v) if v >= 1 && t.bytes().all(|b| b.is_ascii_digit()) => Ok(v - 1),
                _ => Err(bad()),
            }
        };
        let layer = one_based(layer)?;
        let (row, col) = match rest.split_once('_') {
            Some((r, c)) => (one_based(r)?, one_based(c)?),
            None if rest.len() == 2 => (one_based(&rest[..1])?, one_based(&rest[1..])?),
            None => return Err(bad()),
        };
        Ok(WeightCoord { layer, row, col })
    }
}

impl TryFrom<String> for WeightCoord {
    type Error = SurfaceError;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<WeightCoord> for String {
    fn from(c: WeightCoord) -> String {
        c.to_string()
    }
}

/// Every weight coordinate in layer/row/column order.
pub fn all_coords(topology: &Topology) -> Vec<WeightCoord> {
    (0..topology.depth())
        .flat_map(|l| {
            let (rows, cols) = topology.weight_shape(l);
            (0..rows).flat_map(move |r| (0..cols).map(move |c| WeightCoord::new(l, r, c)))
        })
        .collect()
}

/// All unordered pairs of weights, lexicographic.
pub fn enumerate_pairs(topology: &Topology) -> Vec<(WeightCoord, WeightCoord)> {
    let coords = all_coords(topology);
    coords
        .iter()
        .enumerate()
        .flat_map(|(i, &a)| coords[i + 1..].iter().map(move |&b| (a, b)))
        .collect()
}

/// Value of lattice node `i` on `[lo, hi]` with `steps` nodes.
pub fn axis_value(range: (f64, f64), steps: usize, i: usize) -> f64 {
    let (lo, hi) = range;
    if i + 1 == steps {
        hi
    } else {
        lo + (hi - lo) * i as f64 / (steps - 1) as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceGrid {
    pub coord_a: WeightCoord,
    pub coord_b: WeightCoord,
    pub range_a: (f64, f64),
    pub range_b: (f64, f64),
    pub steps: usize,
    /// `values[i][j]` is the SSE at `(a_i, b_j)`.
    pub values: Vec<Vec<f64>>,
    pub frozen_net: Network,
}

impl SurfaceGrid {
    pub fn a_value(&self, i: usize) -> f64 {
        axis_value(self.range_a, self.steps, i)
    }

    pub fn b_value(&self, j: usize) -> f64 {
        axis_value(self.range_b, self.steps, j)
    }

    /// The frozen network with the two projected weights set to cell `(i, j)`.
    pub fn network_at(&self, i: usize, j: usize) -> Network {
        let (a, b) = (self.coord_a, self.coord_b);
        self.frozen_net
            .with_weight(a.layer, a.row, a.col, self.a_value(i))
            .and_then(|n| n.with_weight(b.layer, b.row, b.col, self.b_value(j)))
            .expect("coordinates validated at projection")
    }

    /// Independently recomputes the SSE at cell `(i, j)`.
    pub fn recompute(&self, data: &Dataset, i: usize, j: usize) -> Result<f64> {
        Ok(trainer::network_sse(&self.network_at(i, j), data)?)
    }

    /// The same surface with the roles of the two weights exchanged.
    pub fn swapped(&self) -> SurfaceGrid {
        let n = self.steps;
        SurfaceGrid {
            coord_a: self.coord_b,
            coord_b: self.coord_a,
            range_a: self.range_b,
            range_b: self.range_a,
            steps: n,
            values: (0..n).map(|j| (0..n).map(|i| self.values[i][j]).collect()).collect(),
            frozen_net: self.frozen_net.clone(),
        }
    }

    /// Long-format CSV: `wa,wb,err`, one row per cell, `wa`-major.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("wa,wb,err\n");
        for i in 0..self.steps {
            let a = g17(self.a_value(i));
            for j in 0..self.steps {
                out.push_str(&format!("{a},{},{}\n", g17(self.b_value(j)), g17(self.values[i][j])));
            }
        }
        out
    }

    pub fn metadata(&self, model: &str, dataset: &str) -> SurfaceMeta {
        SurfaceMeta {
            coord_a: self.coord_a,
            coord_b: self.coord_b,
            range_a: self.range_a,
            range_b: self.range_b,
            steps: self.steps,
            spec: self.frozen_net.topology().to_string(),
            model: model.to_string(),
            dataset: dataset.to_string(),
        }
    }
}

/// Companion document describing a grid CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceMeta {
    pub coord_a: WeightCoord,
    pub coord_b: WeightCoord,
    pub range_a: (f64, f64),
    pub range_b: (f64, f64),
    pub steps: usize,
    pub spec: String,
    pub model: String,
    pub dataset: String,
}

/// Evaluates the SSE over a `steps x steps` lattice of values for weights
/// `a` and `b`, all other weights taken from `net`.
pub fn project(
    net: &Network,
    data: &Dataset,
    a: WeightCoord,
    b: WeightCoord,
    range_a: (f64, f64),
    range_b: (f64, f64),
    steps: usize,
) -> Result<SurfaceGrid> {
    a.check(net.topology())?;
    b.check(net.topology())?;
    if a == b {
        return Err(SurfaceError::SamePair(a));
    }
    if steps < 2 {
        return Err(SurfaceError::Steps { steps, min: 2 });
    }
    for (lo, hi) in [range_a, range_b] {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(SurfaceError::Range { lo, hi });
        }
    }
    // Surface the dataset/network shape error before fanning out.
    trainer::network_sse(net, data)?;
    let mut grid = SurfaceGrid {
        coord_a: a,
        coord_b: b,
        range_a,
        range_b,
        steps,
        values: Vec::new(),
        frozen_net: net.clone(),
    };
    let cells: Vec<f64> = (0..steps * steps)
        .into_par_iter()
        .map(|k| grid.recompute(data, k / steps, k % steps))
        .collect::<Result<_>>()?;
    grid.values = cells.chunks(steps).map(|r| r.to_vec()).collect();
    Ok(grid)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LandscapeStats {
    pub min_value: f64,
    /// Weight values at the first grid minimum in `wa`-major order.
    pub min_at: (f64, f64),
    pub min_index: (usize, usize),
    pub max_value: f64,
    /// Cells strictly below every 4-neighbour (by more than the tie tolerance).
    pub strict_local_minima: usize,
    /// Fraction of cells tied with at least one 4-neighbour.
    pub plateau_fraction: f64,
}

fn neighbours(i: usize, j: usize, n: usize) -> impl Iterator<Item = (usize, usize)> {
    let up = i.checked_sub(1).map(|i| (i, j));
    let down = (i + 1 < n).then_some((i + 1, j));
    let left = j.checked_sub(1).map(|j| (i, j));
    let right = (j + 1 < n).then_some((i, j + 1));
    [up, down, left, right].into_iter().flatten()
}

pub fn landscape_stats(grid: &SurfaceGrid) -> Result<LandscapeStats> {
    let n = grid.steps;
    if n < 3 {
        return Err(SurfaceError::Steps { steps: n, min: 3 });
    }
    let v = &grid.values;
    let mut min_index = (0, 0);
    let mut max_value = f64::NEG_INFINITY;
    let mut minima = 0;
    let mut tied = 0;
    for i in 0..n {
        for j in 0..n {
            let x = v[i][j];
            if x < v[min_index.0][min_index.1] {
                min_index = (i, j);
            }
            max_value = max_value.max(x);
            if neighbours(i, j, n).all(|(p, q)| x < v[p][q] - TIE_TOL) {
                minima += 1;
            }
            if neighbours(i, j, n).any(|(p, q)| (x - v[p][q]).abs() <= TIE_TOL) {
                tied += 1;
            }
        }
    }
    Ok(LandscapeStats {
        min_value: v[min_index.0][min_index.1],
        min_at: (grid.a_value(min_index.0), grid.b_value(min_index.1)),
        min_index,
        max_value,
        strict_local_minima: minima,
        plateau_fraction: tied as f64 / (n * n) as f64,
    })
}

/// Largest negative second difference along any grid row or column.
pub fn min_second_difference(grid: &SurfaceGrid) -> f64 {
    let n = grid.steps;
    let v = &grid.values;
    let mut worst = f64::INFINITY;
    for i in 0..n {
        for j in 1..n.saturating_sub(1) {
            worst = worst.min(v[i][j - 1] - 2.0 * v[i][j] + v[i][j + 1]);
            worst = worst.min(v[j - 1][i] - 2.0 * v[j][i] + v[j + 1][i]);
        }
    }
    worst
}
