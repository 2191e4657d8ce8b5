//! Run metrics: task-point counting over room visits, per-cell traversal
//! counters, histograms of per-cell differences between runs, and map
//! snapshots, plus the CSV renderings of all of them.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::env::{CellCoord, Environment};
use crate::pheromone::PheromoneMap;
use crate::vibit::CommCounters;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("path crosses wall cell ({0}, {1})")]
    WallCell(usize, usize),
    #[error("grids have different shapes")]
    ShapeMismatch,
    #[error("difference {0} falls outside every histogram bin")]
    OutOfBins(u64),
}

/// Counts completed surveillance rounds: a task-point fires when every room
/// has been visited since the last one. After a task-point the visited set
/// resets, and the rooms occupied by robots at the next event seed the new
/// round.
#[derive(Clone, Debug, PartialEq)]
pub struct TaskPointTracker {
    all_rooms: BTreeSet<char>,
    visited: BTreeSet<char>,
    seed_pending: bool,
    pub count: u64,
    /// Global event index of every completed task-point.
    pub event_steps: Vec<u64>,
}

impl TaskPointTracker {
    pub fn new(env: &Environment) -> Self {
        TaskPointTracker {
            all_rooms: env.rooms().keys().copied().collect(),
            visited: BTreeSet::new(),
            seed_pending: false,
            count: 0,
            event_steps: Vec::new(),
        }
    }

    pub fn visited(&self) -> &BTreeSet<char> {
        &self.visited
    }

    /// Feeds one event: the rooms visited by the moves of this event and the
    /// rooms currently occupied by robots (used to seed a fresh round).
    /// `event_index` is the global event counter.
    pub fn update(
        &mut self,
        visits: &BTreeSet<char>,
        occupied: &BTreeSet<char>,
        event_index: u64,
    ) {
        if self.seed_pending {
            self.visited.extend(occupied.iter().copied());
            self.seed_pending = false;
        }
        self.visited.extend(visits.iter().copied());
        if self.visited == self.all_rooms {
            self.count += 1;
            self.event_steps.push(event_index);
            self.visited.clear();
            self.seed_pending = true;
        }
    }
}

/// Per-cell counters of how many times each cell was traversed. Walls stay
/// at zero; recording a wall cell is an error because movement can never
/// produce one.
#[derive(Clone, Debug, PartialEq)]
pub struct CellstepsGrid {
    width: usize,
    height: usize,
    free: Vec<bool>,
    counts: Vec<u64>,
}

impl CellstepsGrid {
    pub fn new(env: &Environment) -> Self {
        CellstepsGrid {
            width: env.width(),
            height: env.height(),
            free: env.free_mask(),
            counts: vec![0; env.width() * env.height()],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn count(&self, c: CellCoord) -> u64 {
        self.counts[c.row * self.width + c.col]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Increments every cell of a traversed path.
    pub fn record(&mut self, path: &[CellCoord]) -> Result<(), MetricsError> {
        for &c in path {
            let idx = c.row * self.width + c.col;
            if !self.free[idx] {
                return Err(MetricsError::WallCell(c.row, c.col));
            }
            self.counts[idx] += 1;
        }
        Ok(())
    }

    /// True when every free cell was traversed at least once.
    pub fn full_coverage(&self) -> bool {
        self.counts
            .iter()
            .zip(&self.free)
            .all(|(&n, &free)| !free || n > 0)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for row in 0..self.height {
            for col in 0..self.width {
                if col > 0 {
                    out.push(',');
                }
                out.push_str(&self.counts[row * self.width + col].to_string());
            }
            out.push('\n');
        }
        out
    }
}

/// One histogram bin: a closed integer range, open-ended when `hi` is None.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DiffBin {
    pub lo: u64,
    pub hi: Option<u64>,
}

impl DiffBin {
    pub fn contains(&self, v: u64) -> bool {
        v >= self.lo && self.hi.is_none_or(|hi| v <= hi)
    }
}

/// Default binning: identical, 1-3, 4-7, 8-15, 16-31, 32 and beyond.
pub fn default_bins() -> Vec<DiffBin> {
    vec![
        DiffBin { lo: 0, hi: Some(0) },
        DiffBin { lo: 1, hi: Some(3) },
        DiffBin { lo: 4, hi: Some(7) },
        DiffBin { lo: 8, hi: Some(15) },
        DiffBin {
            lo: 16,
            hi: Some(31),
        },
        DiffBin { lo: 32, hi: None },
    ]
}

/// Histogram of per-cell absolute differences between two traversal grids.
#[derive(Clone, Debug, PartialEq)]
pub struct DiffHistogram {
    pub bins: Vec<DiffBin>,
    pub counts: Vec<u64>,
    /// Fraction of free cells per bin; sums to 1.
    pub relative: Vec<f64>,
    /// Running sum of the relative frequencies; ends at 1.
    pub cumulative: Vec<f64>,
}

impl DiffHistogram {
    fn from_counts(bins: &[DiffBin], counts: Vec<u64>) -> Self {
        let total: u64 = counts.iter().sum();
        let relative: Vec<f64> = counts.iter().map(|&c| c as f64 / total as f64).collect();
        let mut acc = 0.0;
        let cumulative = relative
            .iter()
            .map(|r| {
                acc += r;
                acc
            })
            .collect();
        DiffHistogram {
            bins: bins.to_vec(),
            counts,
            relative,
            cumulative,
        }
    }

    /// Pools another histogram over the same bins into this one.
    pub fn merge(&self, other: &DiffHistogram) -> Result<DiffHistogram, MetricsError> {
        if self.bins != other.bins {
            return Err(MetricsError::ShapeMismatch);
        }
        let counts = self
            .counts
            .iter()
            .zip(&other.counts)
            .map(|(a, b)| a + b)
            .collect();
        Ok(DiffHistogram::from_counts(&self.bins, counts))
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("bin_lo,bin_hi,count,relative,cumulative\n");
        for (i, bin) in self.bins.iter().enumerate() {
            let hi = bin
                .hi
                .map(|h| h.to_string())
                .unwrap_or_else(|| "inf".to_string());
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                bin.lo, hi, self.counts[i], self.relative[i], self.cumulative[i]
            ));
        }
        out
    }
}

/// Bins the per-cell absolute differences of two grids of the same shape.
/// Walls are excluded.
pub fn diff_histogram(
    a: &CellstepsGrid,
    b: &CellstepsGrid,
    bins: &[DiffBin],
) -> Result<DiffHistogram, MetricsError> {
    if a.width != b.width || a.height != b.height || a.free != b.free {
        return Err(MetricsError::ShapeMismatch);
    }
    let mut counts = vec![0u64; bins.len()];
    for idx in 0..a.counts.len() {
        if !a.free[idx] {
            continue;
        }
        let diff = a.counts[idx].abs_diff(b.counts[idx]);
        let bin = bins
            .iter()
            .position(|bin| bin.contains(diff))
            .ok_or(MetricsError::OutOfBins(diff))?;
        counts[bin] += 1;
    }
    Ok(DiffHistogram::from_counts(bins, counts))
}

/// A pheromone map frozen at a point in time.
#[derive(Clone, Debug, PartialEq)]
pub struct HeatmapSnapshot {
    /// Owning robot, or None for the shared map of a centralized run.
    pub robot: Option<usize>,
    /// Timestep the snapshot was taken at.
    pub step: u64,
    pub map: PheromoneMap,
}

/// Deep copy of a map tagged with its owner and timestep.
pub fn snapshot_heatmap(map: &PheromoneMap, robot: Option<usize>, step: u64) -> HeatmapSnapshot {
    HeatmapSnapshot {
        robot,
        step,
        map: map.clone(),
    }
}

/// CSV of task-point completion events: running count per event index.
pub fn taskpoints_csv(event_steps: &[u64]) -> String {
    let mut out = String::from("event_index,count\n");
    for (i, step) in event_steps.iter().enumerate() {
        out.push_str(&format!("{},{}\n", step, i + 1));
    }
    out
}

/// CSV of the communication counters, a header row plus one value row.
pub fn comm_csv(c: &CommCounters) -> String {
    format!(
        "transmissions,transmissions_heard,bytes_disseminated,bytes_aggregated,\
         aggregations_accepted,aggregations_rejected\n{},{},{},{},{},{}\n",
        c.transmissions,
        c.transmissions_heard,
        c.bytes_disseminated,
        c.bytes_aggregated,
        c.aggregations_accepted,
        c.aggregations_rejected
    )
}
