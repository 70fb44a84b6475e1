//! Fixtures shared by the benchmarks.

use std::sync::Arc;

use prunedirect_core::genome::{GeneticMap, GenomePosition};
use prunedirect_core::simpop::{heritability_to_effects, simulate_population, CrossType, Population, QtlSpec};

/// Backcross of 200 on two 100 cM chromosomes at 1 cM. `d = 1` places an
/// additive QTL at 1:40; `d = 2` an interacting pair at 1:40 and 2:70.
pub fn fixture(d: usize, h2: f64, seed: u64) -> Population {
    let map = Arc::new(GeneticMap::uniform(2, 100.0, 1.0).expect("map"));
    let loci = [GenomePosition::new(0, 40), GenomePosition::new(1, 70)];
    let spec = if h2 == 0.0 {
        QtlSpec::null(1.0)
    } else if d == 1 {
        let scaling = heritability_to_effects(h2, CrossType::Backcross, 1).expect("h2");
        QtlSpec::additive(CrossType::Backcross, loci[..1].to_vec(), &scaling)
    } else {
        QtlSpec::interaction(CrossType::Backcross, loci.to_vec(), h2).expect("h2")
    };
    simulate_population(map, CrossType::Backcross, 200, &spec, seed).expect("population")
}
