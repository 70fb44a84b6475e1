//! PruneDIRECT over chromosome-combination boxes, and the exhaustive scan
//! on the same lattice.

mod boxes;
mod engine;
mod exhaustive;
mod hull;

use serde::{Deserialize, Serialize};

use crate::genome::GenomePosition;
use crate::lipbound::{QuantileEntry, DEFAULT_EPSILON};

pub use boxes::{init_ccboxes, multisets, split, BoxShape, Child};
pub use engine::{prune, run_prunedirect, PruneDirect, PruneOutcome, SearchBox};
pub use exhaustive::{exhaustive_evaluations, exhaustive_scan, DEFAULT_BUDGET};
pub use hull::select_hull;

/// Largest supported model dimension.
pub const MAX_DIMS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum ScanMode {
    /// Minimise; the pruning reference is the incumbent.
    Search,
    /// Decide whether any point reaches `candidate_rss`; the pruning
    /// reference is the candidate and the scan stops at the first hit.
    Permutation { candidate_rss: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanConfig {
    pub epsilon: f64,
    pub prune: bool,
    pub mode: ScanMode,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            epsilon: DEFAULT_EPSILON,
            prune: true,
            mode: ScanMode::Search,
        }
    }
}

impl ScanConfig {
    pub fn permutation(candidate_rss: f64) -> Self {
        Self {
            mode: ScanMode::Permutation { candidate_rss },
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    /// Every surviving box was split down to single lattice points.
    Resolution,
    /// The box set emptied without any box reaching resolution.
    PrunedAll,
    /// Every lattice tuple was evaluated.
    Exhausted,
    /// Permutation mode found a point at or below the candidate.
    CandidateBeaten,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanResult {
    pub d: usize,
    /// Sorted global lattice indices of the optimum.
    pub best_points: Vec<usize>,
    pub best_positions: Vec<GenomePosition>,
    pub best_rss: f64,
    pub best_logvar: f64,
    pub rss_total: f64,
    pub n: usize,
    /// Distinct lattice tuples fitted.
    pub evaluations: u64,
    /// Centroid evaluations including repeats of the same tuple.
    pub raw_evaluations: u64,
    pub pruned_boxes: u64,
    pub prune_tests: u64,
    pub aggregate_epsilon: f64,
    pub iterations: u64,
    pub terminated: Termination,
    /// Quantile table in force at the end of the run.
    #[serde(default)]
    pub quantiles: Vec<QuantileEntry>,
}

impl ScanResult {
    /// Permuted optimum at or below `candidate_rss`.
    pub fn reaches(&self, candidate_rss: f64) -> bool {
        self.best_rss <= candidate_rss
    }
}
