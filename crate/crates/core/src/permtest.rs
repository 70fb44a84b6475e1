//! Permutation testing of a scan optimum.
//!
//! Permutation `i` shuffles phenotypes with seed `base_seed + i`. A permuted
//! optimum "exceeds" the candidate when its RSS is at or below the
//! candidate RSS.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::regmodel::Fitter;
use crate::search::{exhaustive_scan, run_prunedirect, ScanConfig, ScanMode, ScanResult};
use crate::simpop::{permute_phenotypes, Population};

/// How each permuted dataset is scanned.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum PermutationEngine {
    /// PruneDIRECT against the candidate; stops at the first hit.
    Shortcut,
    /// Full PruneDIRECT minimisation.
    Search,
    /// Exhaustive lattice scan.
    Exhaustive { budget: u128 },
}

impl PermutationEngine {
    pub fn records_optima(self) -> bool {
        !matches!(self, Self::Shortcut)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PermutationReport {
    pub d: usize,
    pub candidate_rss: f64,
    pub n_perms: usize,
    pub base_seed: u64,
    pub engine: PermutationEngine,
    pub n_exceeding: usize,
    pub p_value: f64,
    pub exceeds: Vec<bool>,
    pub evaluations: Vec<u64>,
    /// Best RSS per permutation; a shortcut run only knows a point at or
    /// below the candidate, or the best point it saw before pruning out.
    pub best_rss: Vec<f64>,
    pub prune_tests: u64,
    pub aggregate_epsilon: f64,
}

fn scan_one(pop: &Population, d: usize, candidate_rss: f64, engine: PermutationEngine, epsilon: f64) -> Result<ScanResult> {
    match engine {
        PermutationEngine::Shortcut => run_prunedirect(
            pop,
            d,
            &ScanConfig {
                epsilon,
                prune: true,
                mode: ScanMode::Permutation {
                    candidate_rss: candidate_rss.min(Fitter::new(pop).rss_total()),
                },
            },
        ),
        PermutationEngine::Search => run_prunedirect(
            pop,
            d,
            &ScanConfig {
                epsilon,
                prune: true,
                mode: ScanMode::Search,
            },
        ),
        PermutationEngine::Exhaustive { budget } => exhaustive_scan(pop, d, budget),
    }
}

/// Scan `n_perms` permuted datasets and compare each optimum with
/// `candidate_rss`.
pub fn run_permutation_test(
    pop: &Population,
    d: usize,
    candidate_rss: f64,
    n_perms: usize,
    base_seed: u64,
    engine: PermutationEngine,
    epsilon: f64,
) -> Result<PermutationReport> {
    if n_perms == 0 {
        return Err(Error::InvalidParameter("need at least one permutation".into()));
    }
    if !(candidate_rss.is_finite() && candidate_rss >= 0.0) {
        return Err(Error::InvalidParameter(format!("candidate RSS must be finite and >= 0, got {candidate_rss}")));
    }
    let runs = (0..n_perms)
        .into_par_iter()
        .map(|i| {
            let permuted = permute_phenotypes(pop, base_seed.wrapping_add(i as u64));
            scan_one(&permuted, d, candidate_rss, engine, epsilon)
        })
        .collect::<Result<Vec<_>>>()?;

    let exceeds: Vec<bool> = runs.iter().map(|r| r.reaches(candidate_rss)).collect();
    let n_exceeding = exceeds.iter().filter(|&&e| e).count();
    let prune_tests = runs.iter().map(|r| r.prune_tests).sum::<u64>();
    Ok(PermutationReport {
        d,
        candidate_rss,
        n_perms,
        base_seed,
        engine,
        n_exceeding,
        p_value: (n_exceeding + 1) as f64 / (n_perms + 1) as f64,
        exceeds,
        evaluations: runs.iter().map(|r| r.evaluations).collect(),
        best_rss: runs.iter().map(|r| r.best_rss).collect(),
        prune_tests,
        aggregate_epsilon: runs.iter().map(|r| r.aggregate_epsilon).sum(),
    })
}

impl PermutationReport {
    /// Empirical `level`-quantile (type 1) of the permuted optimum RSS.
    ///
    /// Small RSS is extreme, so the conventional 95% threshold is
    /// `threshold_at(0.05)`.
    pub fn threshold_at(&self, level: f64) -> Result<f64> {
        if !self.engine.records_optima() {
            return Err(Error::ThresholdUnavailable);
        }
        if !(0.0..=1.0).contains(&level) {
            return Err(Error::InvalidParameter(format!("level must be in [0, 1], got {level}")));
        }
        let mut sorted = self.best_rss.clone();
        sorted.sort_by(f64::total_cmp);
        let rank = (level * sorted.len() as f64).ceil() as usize;
        Ok(sorted[rank.saturating_sub(1).min(sorted.len() - 1)])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::genome::{GeneticMap, GenomePosition};
    use crate::lipbound::DEFAULT_EPSILON;
    use crate::simpop::{heritability_to_effects, simulate_population, CrossType, QtlSpec};
    use std::sync::Arc;

    fn population(h2: f64, seed: u64) -> Population {
        let map = Arc::new(GeneticMap::uniform(2, 60.0, 1.0).unwrap());
        let scaling = heritability_to_effects(h2, CrossType::Backcross, 1).unwrap();
        let spec = QtlSpec::additive(CrossType::Backcross, vec![GenomePosition::new(1, 30)], &scaling);
        simulate_population(map, CrossType::Backcross, 120, &spec, seed).unwrap()
    }

    #[test]
    fn worthless_candidate_gives_p_one() {
        let pop = population(0.3, 1);
        let total = Fitter::new(&pop).rss_total();
        let rep = run_permutation_test(&pop, 1, total, 10, 7, PermutationEngine::Shortcut, DEFAULT_EPSILON).unwrap();
        assert_eq!(rep.n_exceeding, 10);
        assert_eq!(rep.p_value, 1.0);
    }

    #[test]
    fn unbeatable_candidate_gives_minimal_p() {
        let pop = population(0.3, 2);
        let rep = run_permutation_test(&pop, 1, 0.0, 10, 7, PermutationEngine::Shortcut, DEFAULT_EPSILON).unwrap();
        assert_eq!(rep.n_exceeding, 0);
        assert_eq!(rep.p_value, 1.0 / 11.0);
    }

    #[test]
    fn engines_agree_and_thresholds_follow_levels() {
        let pop = population(0.2, 3);
        let main = run_prunedirect(&pop, 1, &ScanConfig::default()).unwrap();
        let run = |engine| run_permutation_test(&pop, 1, main.best_rss, 30, 100, engine, DEFAULT_EPSILON).unwrap();
        let short = run(PermutationEngine::Shortcut);
        let full = run(PermutationEngine::Search);
        let exh = run(PermutationEngine::Exhaustive { budget: u128::MAX });
        assert_eq!(short.exceeds, full.exceeds);
        assert_eq!(full.exceeds, exh.exceeds);
        assert_eq!(full.best_rss, exh.best_rss);
        for (s, f) in short.evaluations.iter().zip(&full.evaluations) {
            assert!(s <= f);
        }
        let min = full.best_rss.iter().copied().fold(f64::INFINITY, f64::min);
        let max = full.best_rss.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(full.threshold_at(0.0).unwrap(), min);
        assert_eq!(full.threshold_at(1.0).unwrap(), max);
        assert!(full.threshold_at(0.05).unwrap() <= full.threshold_at(0.5).unwrap());
        assert!(matches!(short.threshold_at(0.05), Err(Error::ThresholdUnavailable)));
        assert!(full.threshold_at(1.5).is_err());
    }

    #[test]
    fn deterministic_and_order_free() {
        let pop = population(0.1, 4);
        let a = run_permutation_test(&pop, 1, 50.0, 8, 21, PermutationEngine::Search, DEFAULT_EPSILON).unwrap();
        let b = run_permutation_test(&pop, 1, 50.0, 8, 21, PermutationEngine::Search, DEFAULT_EPSILON).unwrap();
        assert_eq!(a, b);
        // Permutation i is reproducible on its own.
        let single = run_permutation_test(&pop, 1, 50.0, 1, 21 + 5, PermutationEngine::Search, DEFAULT_EPSILON).unwrap();
        assert_eq!(single.best_rss[0], a.best_rss[5]);
    }

    #[test]
    fn zero_permutations_is_an_error() {
        let pop = population(0.1, 5);
        assert!(run_permutation_test(&pop, 1, 50.0, 0, 0, PermutationEngine::Search, DEFAULT_EPSILON).is_err());
    }
}
