use super::{ScanResult, Termination, MAX_DIMS};
use crate::error::{Error, Result};
use crate::regmodel::Fitter;
use crate::simpop::Population;

/// Default evaluation budget for [`exhaustive_scan`].
pub const DEFAULT_BUDGET: u128 = 50_000_000;

/// Number of sorted `d`-tuples with repetition over `lattice` points.
pub fn exhaustive_evaluations(lattice: usize, d: usize) -> u128 {
    // C(lattice + d - 1, d), built up so each partial product is exact.
    let mut acc: u128 = 1;
    for i in 0..d as u128 {
        acc = acc * (lattice as u128 + i) / (i + 1);
    }
    acc
}

/// Fit every sorted `d`-tuple of lattice points.
///
/// Ties are broken towards the lexicographically smallest tuple.
pub fn exhaustive_scan(pop: &Population, d: usize, budget: u128) -> Result<ScanResult> {
    if d == 0 || d > MAX_DIMS {
        return Err(Error::InvalidParameter(format!("d must be in 1..={MAX_DIMS}, got {d}")));
    }
    let lattice = pop.map().lattice_size();
    let required = exhaustive_evaluations(lattice, d);
    if required > budget {
        return Err(Error::BudgetExceeded { required, budget });
    }
    let mut fitter = Fitter::new(pop);
    let mut cur = vec![0usize; d];
    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut evaluations = 0u64;
    loop {
        let rss = fitter.evaluate(&cur)?.rss;
        evaluations += 1;
        if best.as_ref().is_none_or(|(b, _)| rss < *b) {
            best = Some((rss, cur.clone()));
        }
        let Some(i) = (0..d).rev().find(|&i| cur[i] + 1 < lattice) else {
            break;
        };
        let v = cur[i] + 1;
        cur[i..].iter_mut().for_each(|c| *c = v);
    }
    let (best_rss, best_points) = best.expect("lattice is nonempty");
    let best_positions = best_points.iter().map(|&g| pop.map().position_of(g)).collect::<Result<Vec<_>>>()?;
    Ok(ScanResult {
        d,
        best_logvar: fitter.logvar(best_rss)?,
        best_points,
        best_positions,
        best_rss,
        rss_total: fitter.rss_total(),
        n: fitter.n(),
        evaluations,
        raw_evaluations: evaluations,
        pruned_boxes: 0,
        prune_tests: 0,
        aggregate_epsilon: 0.0,
        iterations: 0,
        terminated: Termination::Exhausted,
        quantiles: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::genome::GeneticMap;
    use crate::simpop::{simulate_population, CrossType, QtlSpec};
    use std::sync::Arc;

    #[test]
    fn counts() {
        assert_eq!(exhaustive_evaluations(101, 1), 101);
        assert_eq!(exhaustive_evaluations(101, 2), 5151);
        assert_eq!(exhaustive_evaluations(10, 3), 220);
    }

    #[test]
    fn scans_every_tuple_and_refuses_large_lattices() {
        let map = Arc::new(GeneticMap::uniform(1, 100.0, 1.0).unwrap());
        let pop = simulate_population(map, CrossType::Backcross, 60, &QtlSpec::null(1.0), 9).unwrap();
        assert_eq!(exhaustive_scan(&pop, 1, DEFAULT_BUDGET).unwrap().evaluations, 101);
        assert_eq!(exhaustive_scan(&pop, 2, DEFAULT_BUDGET).unwrap().evaluations, 5151);
        match exhaustive_scan(&pop, 2, 5000) {
            Err(Error::BudgetExceeded { required, budget }) => assert_eq!((required, budget), (5151, 5000)),
            other => panic!("{other:?}"),
        }
    }
}
