use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};

use super::boxes::{init_ccboxes, split, BoxShape};
use super::hull::select_hull;
use super::{ScanConfig, ScanMode, ScanResult, Termination, MAX_DIMS};
use crate::error::{Error, Result};
use crate::lipbound::{chi2_guard, BoundParams, QuantileTable};
use crate::regmodel::{Evaluation, Fitter};
use crate::simpop::Population;

/// A box with its evaluated (guarded) centroid value.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchBox {
    pub shape: BoxShape,
    pub rss: f64,
    /// LogVar at the center after [`chi2_guard`].
    pub value: f64,
    /// Insertion order; earlier boxes win hull ties.
    pub id: u64,
}

#[derive(Debug, Clone, Default)]
pub struct PruneOutcome {
    pub survivors: Vec<SearchBox>,
    pub pruned: Vec<SearchBox>,
    pub tests: u64,
}

/// Drop every box whose value exceeds the quantile at its radius.
///
/// Saturated quantiles cannot prune and are not counted as tests.
pub fn prune(boxes: Vec<SearchBox>, table: &mut QuantileTable) -> Result<PruneOutcome> {
    let mut out = PruneOutcome::default();
    for b in boxes {
        let q = table.get(b.shape.radius_steps())?;
        if q.saturated {
            out.survivors.push(b);
            continue;
        }
        out.tests += 1;
        if b.value > q.logvar {
            out.pruned.push(b);
        } else {
            out.survivors.push(b);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Rank {
    value: f64,
    id: u64,
}

impl Eq for Rank {}

impl PartialOrd for Rank {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Rank {
    fn cmp(&self, other: &Self) -> Ordering {
        self.value.total_cmp(&other.value).then(self.id.cmp(&other.id))
    }
}

/// Active boxes bucketed by radius, each bucket ordered by value then id.
#[derive(Debug, Default)]
struct ActiveSet {
    buckets: BTreeMap<usize, BTreeMap<Rank, SearchBox>>,
    len: usize,
}

impl ActiveSet {
    fn insert(&mut self, b: SearchBox) {
        let rank = Rank { value: b.value, id: b.id };
        self.buckets.entry(b.shape.radius_steps()).or_default().insert(rank, b);
        self.len += 1;
    }

    /// `(radius, value)` of each bucket's best box, by increasing radius.
    fn minima(&self) -> Vec<(usize, f64)> {
        self.buckets
            .iter()
            .map(|(&r, bucket)| (r, bucket.keys().next().expect("buckets are nonempty").value))
            .collect()
    }

    fn pop_best(&mut self, radius: usize) -> SearchBox {
        let bucket = self.buckets.get_mut(&radius).expect("radius present");
        let (_, b) = bucket.pop_first().expect("buckets are nonempty");
        if bucket.is_empty() {
            self.buckets.remove(&radius);
        }
        self.len -= 1;
        b
    }

    /// Every box, in insertion order.
    fn drain(&mut self) -> Vec<SearchBox> {
        let mut all: Vec<SearchBox> = std::mem::take(&mut self.buckets).into_values().flat_map(|b| b.into_values()).collect();
        self.len = 0;
        all.sort_by_key(|b| b.id);
        all
    }

    fn iter(&self) -> impl Iterator<Item = &SearchBox> {
        self.buckets.values().flat_map(|b| b.values())
    }
}

fn compare_incumbent(a: (f64, &[usize]), b: (f64, &[usize])) -> Ordering {
    a.0.total_cmp(&b.0).then_with(|| a.1.cmp(b.1))
}

/// Step-wise PruneDIRECT state.
#[derive(Debug)]
pub struct PruneDirect<'a> {
    fitter: Fitter<'a>,
    d: usize,
    config: ScanConfig,
    memo: HashMap<Vec<usize>, Evaluation>,
    evaluations: u64,
    raw_evaluations: u64,
    active: ActiveSet,
    next_id: u64,
    best: Option<(f64, Vec<usize>)>,
    improved: bool,
    table: Option<QuantileTable>,
    prune_tests: u64,
    pruned_boxes: u64,
    resolved_boxes: u64,
    pruned_volume: u128,
    resolved_volume: u128,
    total_volume: u128,
    iterations: u64,
    terminated: Option<Termination>,
}

impl<'a> PruneDirect<'a> {
    /// Evaluate every cc-box centroid and apply the first pruning pass.
    pub fn new(pop: &'a Population, d: usize, config: ScanConfig) -> Result<Self> {
        if d == 0 || d > MAX_DIMS {
            return Err(Error::InvalidParameter(format!("d must be in 1..={MAX_DIMS}, got {d}")));
        }
        if !(config.epsilon > 0.0 && config.epsilon < 0.5) {
            return Err(Error::InvalidParameter(format!("epsilon must be in (0, 0.5), got {}", config.epsilon)));
        }
        let fitter = Fitter::new(pop);
        if let ScanMode::Permutation { candidate_rss } = config.mode {
            if !(candidate_rss >= 0.0 && candidate_rss <= fitter.rss_total() * (1.0 + 1e-12)) {
                return Err(Error::InvalidParameter(format!(
                    "candidate RSS {candidate_rss} outside [0, {}]",
                    fitter.rss_total()
                )));
            }
        }
        let mut state = Self {
            fitter,
            d,
            config,
            memo: HashMap::new(),
            evaluations: 0,
            raw_evaluations: 0,
            active: ActiveSet::default(),
            next_id: 0,
            best: None,
            improved: false,
            table: None,
            prune_tests: 0,
            pruned_boxes: 0,
            resolved_boxes: 0,
            pruned_volume: 0,
            resolved_volume: 0,
            total_volume: 0,
            iterations: 0,
            terminated: None,
        };
        let mut fresh = Vec::new();
        for shape in init_ccboxes(pop.map(), d) {
            state.total_volume += shape.volume();
            let (rss, value) = state.evaluate(&shape)?;
            state.admit(shape, rss, value, &mut fresh);
        }
        state.after_batch(fresh)?;
        Ok(state)
    }

    fn evaluate(&mut self, shape: &BoxShape) -> Result<(f64, f64)> {
        let key = shape.center_key(self.fitter.population().map());
        self.raw_evaluations += 1;
        let eval = match self.memo.get(&key) {
            Some(&e) => e,
            None => {
                let e = self.fitter.evaluate(&key)?;
                self.evaluations += 1;
                self.memo.insert(key.clone(), e);
                e
            }
        };
        let n = self.fitter.n();
        let value = chi2_guard(self.fitter.logvar(eval.rss)?, eval.dof_model, self.fitter.rss_total(), n);
        let better = match &self.best {
            None => true,
            Some((rss, k)) => compare_incumbent((eval.rss, &key), (*rss, k)) == Ordering::Less,
        };
        if better {
            self.best = Some((eval.rss, key));
            self.improved = true;
        }
        Ok((eval.rss, value))
    }

    fn admit(&mut self, shape: BoxShape, rss: f64, value: f64, fresh: &mut Vec<SearchBox>) {
        if shape.is_resolved() {
            self.resolved_boxes += 1;
            self.resolved_volume += 1;
            return;
        }
        fresh.push(SearchBox {
            shape,
            rss,
            value,
            id: self.next_id,
        });
        self.next_id += 1;
    }

    fn reference_rss(&self) -> f64 {
        match self.config.mode {
            ScanMode::Search => self.best.as_ref().map_or(self.fitter.rss_total(), |b| b.0),
            ScanMode::Permutation { candidate_rss } => candidate_rss.min(self.fitter.rss_total()),
        }
    }

    fn candidate_beaten(&self) -> bool {
        match (self.config.mode, &self.best) {
            (ScanMode::Permutation { candidate_rss }, Some((rss, _))) => *rss <= candidate_rss,
            _ => false,
        }
    }

    /// Prune the new boxes (all boxes after a reference change) and merge.
    fn after_batch(&mut self, fresh: Vec<SearchBox>) -> Result<()> {
        if self.candidate_beaten() {
            fresh.into_iter().for_each(|b| self.active.insert(b));
            self.terminated = Some(Termination::CandidateBeaten);
            return Ok(());
        }
        if !self.config.prune {
            fresh.into_iter().for_each(|b| self.active.insert(b));
            return Ok(());
        }
        let rebuild = self.table.is_none() || (self.improved && matches!(self.config.mode, ScanMode::Search));
        self.improved = false;
        let to_test = if rebuild {
            let params = BoundParams::for_reference(self.fitter.n(), self.fitter.rss_total(), self.reference_rss(), self.config.epsilon)?;
            self.table = Some(QuantileTable::new(params, self.fitter.population().map().step_cm())?);
            let mut all = self.active.drain();
            all.extend(fresh);
            all
        } else {
            fresh
        };
        let table = self.table.as_mut().expect("table built above");
        let outcome = prune(to_test, table)?;
        self.prune_tests += outcome.tests;
        self.pruned_boxes += outcome.pruned.len() as u64;
        self.pruned_volume += outcome.pruned.iter().map(|b| b.shape.volume()).sum::<u128>();
        outcome.survivors.into_iter().for_each(|b| self.active.insert(b));
        Ok(())
    }

    pub fn is_done(&self) -> bool {
        self.terminated.is_some()
    }

    pub fn n_boxes(&self) -> usize {
        self.active.len
    }

    pub fn boxes(&self) -> impl Iterator<Item = &SearchBox> {
        self.active.iter()
    }

    /// Incumbent RSS and sorted global lattice key.
    pub fn incumbent(&self) -> Option<(f64, &[usize])> {
        self.best.as_ref().map(|(r, k)| (*r, k.as_slice()))
    }

    /// `(active, pruned, resolved, total)` lattice volumes.
    pub fn volumes(&self) -> (u128, u128, u128, u128) {
        let active = self.active.iter().map(|b| b.shape.volume()).sum();
        (active, self.pruned_volume, self.resolved_volume, self.total_volume)
    }

    /// One hull selection and split round. Returns `false` once finished.
    pub fn step(&mut self) -> Result<bool> {
        if self.terminated.is_some() {
            return Ok(false);
        }
        if self.active.len == 0 {
            self.terminated = Some(if self.resolved_boxes == 0 {
                Termination::PrunedAll
            } else {
                Termination::Resolution
            });
            return Ok(false);
        }
        self.iterations += 1;
        let minima = self.active.minima();
        let chosen: Vec<SearchBox> = select_hull(&minima).into_iter().map(|i| self.active.pop_best(minima[i].0)).collect();

        let mut fresh = Vec::new();
        for parent in chosen {
            for child in split(&parent.shape) {
                let (rss, value) = if child.inherits {
                    (parent.rss, parent.value)
                } else {
                    self.evaluate(&child.shape)?
                };
                self.admit(child.shape, rss, value, &mut fresh);
            }
        }
        self.after_batch(fresh)?;
        Ok(self.terminated.is_none())
    }

    pub fn finish(mut self) -> Result<ScanResult> {
        while self.step()? {}
        let (best_rss, best_points) = self.best.clone().ok_or_else(|| Error::Inconsistent("no evaluation performed".into()))?;
        let map = self.fitter.population().map();
        let best_positions = best_points.iter().map(|&g| map.position_of(g)).collect::<Result<Vec<_>>>()?;
        Ok(ScanResult {
            d: self.d,
            best_logvar: self.fitter.logvar(best_rss)?,
            best_points,
            best_positions,
            best_rss,
            rss_total: self.fitter.rss_total(),
            n: self.fitter.n(),
            evaluations: self.evaluations,
            raw_evaluations: self.raw_evaluations,
            pruned_boxes: self.pruned_boxes,
            prune_tests: self.prune_tests,
            aggregate_epsilon: self.config.epsilon * self.prune_tests as f64,
            iterations: self.iterations,
            terminated: self.terminated.expect("finished"),
            quantiles: self.table.as_ref().map(|t| t.entries()).unwrap_or_default(),
        })
    }
}

/// Run PruneDIRECT to completion.
pub fn run_prunedirect(pop: &Population, d: usize, config: &ScanConfig) -> Result<ScanResult> {
    PruneDirect::new(pop, d, *config)?.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::genome::GeneticMap;
    use crate::search::{exhaustive_evaluations, exhaustive_scan};
    use crate::simpop::{heritability_to_effects, simulate_population, CrossType, QtlSpec};
    use crate::genome::GenomePosition;
    use std::sync::Arc;

    fn population(h2: f64, chroms: usize, len: f64, n: usize, seed: u64) -> Population {
        let map = Arc::new(GeneticMap::uniform(chroms, len, 1.0).unwrap());
        let spec = if h2 > 0.0 {
            let scaling = heritability_to_effects(h2, CrossType::Backcross, 1).unwrap();
            QtlSpec::additive(CrossType::Backcross, vec![GenomePosition::new(0, (len / 2.0) as usize)], &scaling)
        } else {
            QtlSpec::null(1.0)
        };
        simulate_population(map, CrossType::Backcross, n, &spec, seed).unwrap()
    }

    #[test]
    fn no_pruning_visits_the_exhaustive_set() {
        let pop = population(0.3, 2, 30.0, 120, 3);
        for d in [1, 2] {
            let config = ScanConfig {
                prune: false,
                ..ScanConfig::default()
            };
            let res = run_prunedirect(&pop, d, &config).unwrap();
            assert_eq!(res.evaluations as u128, exhaustive_evaluations(pop.map().lattice_size(), d));
            assert_eq!(res.terminated, Termination::Resolution);
            assert_eq!(res.prune_tests, 0);
            let ex = exhaustive_scan(&pop, d, u128::MAX).unwrap();
            assert_eq!(res.best_points, ex.best_points);
            assert_eq!(res.best_rss, ex.best_rss);
        }
    }

    #[test]
    fn strong_qtl_matches_exhaustive_with_fewer_evaluations() {
        let pop = population(0.5, 2, 100.0, 200, 11);
        let res = run_prunedirect(&pop, 1, &ScanConfig::default()).unwrap();
        let ex = exhaustive_scan(&pop, 1, u128::MAX).unwrap();
        assert_eq!(res.best_points, ex.best_points);
        assert_eq!(res.best_rss, ex.best_rss);
        assert!(res.evaluations < ex.evaluations);
        assert!(res.pruned_boxes > 0);
    }

    #[test]
    fn volumes_and_incumbent_are_conserved() {
        let pop = population(0.3, 2, 40.0, 150, 5);
        let mut state = PruneDirect::new(&pop, 2, ScanConfig::default()).unwrap();
        let mut last = f64::INFINITY;
        loop {
            let (a, p, r, t) = state.volumes();
            assert_eq!(a + p + r, t);
            let (rss, _) = state.incumbent().unwrap();
            assert!(rss <= last);
            last = rss;
            if !state.step().unwrap() {
                break;
            }
        }
    }

    #[test]
    fn unbeatable_candidate_is_pruned_away_early() {
        let pop = population(0.3, 2, 100.0, 200, 2);
        let res = run_prunedirect(&pop, 1, &ScanConfig::permutation(0.0)).unwrap();
        assert_eq!(res.terminated, Termination::PrunedAll);
        assert!(res.evaluations <= 10, "{}", res.evaluations);
    }

    #[test]
    fn worthless_candidate_is_beaten_immediately() {
        let pop = population(0.0, 2, 50.0, 100, 4);
        let total = Fitter::new(&pop).rss_total();
        let res = run_prunedirect(&pop, 1, &ScanConfig::permutation(total)).unwrap();
        assert_eq!(res.terminated, Termination::CandidateBeaten);
        assert_eq!(res.iterations, 0);
    }

    #[test]
    fn rejects_bad_configuration() {
        let pop = population(0.0, 1, 20.0, 50, 1);
        assert!(run_prunedirect(&pop, 0, &ScanConfig::default()).is_err());
        assert!(run_prunedirect(&pop, 1, &ScanConfig { epsilon: 0.7, ..ScanConfig::default() }).is_err());
        assert!(run_prunedirect(&pop, 1, &ScanConfig::permutation(-1.0)).is_err());
    }
}
