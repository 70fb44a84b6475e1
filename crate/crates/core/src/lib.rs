//! Quantile-pruned DIRECT search for multi-locus QTL scans in backcross and
//! intercross populations.
//!
//! A scan minimises the residual sum of squares of a full-interaction
//! class-means model over `d`-tuples of lattice positions. [`search`] splits
//! chromosome-combination boxes DIRECT style and permanently drops boxes
//! whose centroid LogVar lies beyond the `1 - epsilon` quantile computed in
//! [`lipbound`], so with high probability it returns the same optimum as the
//! exhaustive scan.

pub mod error;
pub mod genome;
pub mod io;
pub mod lipbound;
pub mod permtest;
pub mod regmodel;
pub mod search;
pub mod simpop;

pub use error::{Error, Result};
pub use genome::{Chromosome, Distance, GeneticMap, GenomePosition};
pub use lipbound::{BoundParams, Quantile, QuantileEntry, QuantileTable, DEFAULT_EPSILON};
pub use permtest::{run_permutation_test, PermutationEngine, PermutationReport};
pub use regmodel::{fit, FitResult, Fitter};
pub use search::{exhaustive_scan, run_prunedirect, ScanConfig, ScanMode, ScanResult, Termination};
pub use simpop::{heritability_to_effects, permute_phenotypes, simulate_population, CrossType, Population, QtlSpec};
