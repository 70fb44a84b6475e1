pub mod bench;
pub mod compare;
pub mod permute;
pub mod report;
pub mod scan;
pub mod simulate;

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use prunedirect_core::genome::{Chromosome, GeneticMap, GenomePosition};
use prunedirect_core::io::{load_map, load_population};
use prunedirect_core::search::MAX_DIMS;
use prunedirect_core::simpop::{heritability_to_effects, simulate_population, CrossType, Population, QtlSpec};

use crate::args::{DataArgs, ModelArg, SimSpec};
use crate::output::check_paths;
use crate::{config_error, CliResult};

/// A lattice point spelled out for readers of the JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Locus {
    pub chromosome: String,
    pub offset_cm: f64,
    pub position: GenomePosition,
}

pub fn describe(map: &GeneticMap, positions: &[GenomePosition]) -> Vec<Locus> {
    positions
        .iter()
        .map(|&p| Locus {
            chromosome: map.chromosomes()[p.chromosome].name.clone(),
            offset_cm: map.offset_cm(p),
            position: p,
        })
        .collect()
}

pub fn check_model(d: usize, epsilon: f64) -> CliResult<()> {
    if d == 0 || d > MAX_DIMS {
        return Err(config_error(format!("d must be in 1..={MAX_DIMS}, got {d}")));
    }
    if !(epsilon > 0.0 && epsilon < 0.5) {
        return Err(config_error(format!("epsilon must be in (0, 0.5), got {epsilon}")));
    }
    Ok(())
}

/// Coarsening factor taking `from` cM to `to` cM.
fn coarsening_factor(from: f64, to: f64) -> CliResult<usize> {
    let ratio = to / from;
    let factor = ratio.round();
    if !(factor >= 1.0 && (ratio - factor).abs() < 1e-9) {
        return Err(config_error(format!("step {to} cM is not a positive multiple of the population step {from} cM")));
    }
    Ok(factor as usize)
}

/// Load the population and coarsen it to the requested step.
pub fn load_data(data: &DataArgs) -> CliResult<Population> {
    check_model(data.d, data.epsilon)?;
    check_paths(&[&data.map, &data.pop], &[])?;
    let pop = load_population(&data.map, &data.pop)?;
    match data.step {
        Some(step) => Ok(pop.coarsened(coarsening_factor(pop.map().step_cm(), step)?)?),
        None => Ok(pop),
    }
}

/// Parse `name:cM` into a lattice position.
pub fn parse_position(map: &GeneticMap, text: &str) -> CliResult<GenomePosition> {
    let (name, offset) = text
        .rsplit_once(':')
        .ok_or_else(|| config_error(format!("position {text:?} is not name:cM")))?;
    let chr = map
        .chromosome_index(name)
        .ok_or_else(|| config_error(format!("chromosome {name:?} not in map")))?;
    let offset: f64 = offset.parse().map_err(|_| config_error(format!("bad offset in {text:?}")))?;
    Ok(map.position_at(chr, offset)?)
}

/// What was simulated, recorded alongside the files.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Truth {
    pub seed: u64,
    pub cross: CrossType,
    pub n: usize,
    pub h2: f64,
    pub model: ModelArg,
    pub qtl: Vec<Locus>,
    pub spec: QtlSpec,
}

pub fn build_map(spec: &SimSpec) -> CliResult<GeneticMap> {
    let chromosomes = match &spec.map {
        Some(path) => {
            check_paths(&[path], &[])?;
            load_map(path)?
        }
        None => {
            if spec.chromosomes == 0 {
                return Err(config_error("need at least one chromosome"));
            }
            (1..=spec.chromosomes).map(|i| Chromosome::new(i.to_string(), spec.length)).collect()
        }
    };
    Ok(GeneticMap::new(chromosomes, spec.step)?)
}

/// Simulate one population. QTL positions not given explicitly are drawn
/// from a stream derived from `seed`.
pub fn simulate(spec: &SimSpec, map: Arc<GeneticMap>, seed: u64) -> CliResult<(Population, Truth)> {
    if !(0.0..1.0).contains(&spec.h2) {
        return Err(config_error(format!("h2 must be in [0, 1), got {}", spec.h2)));
    }
    let cross = CrossType::from(spec.cross);
    let positions = if spec.qtl.is_empty() {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(1);
        (0..spec.qtl_count)
            .map(|_| {
                let chr = rng.random_range(0..map.n_chromosomes());
                GenomePosition::new(chr, rng.random_range(0..map.loci_on(chr)))
            })
            .collect()
    } else {
        spec.qtl.iter().map(|t| parse_position(&map, t)).collect::<CliResult<Vec<_>>>()?
    };
    let qtl = if spec.h2 == 0.0 || positions.is_empty() {
        QtlSpec::null(1.0)
    } else {
        match spec.model {
            ModelArg::Additive => {
                QtlSpec::additive(cross, positions.clone(), &heritability_to_effects(spec.h2, cross, positions.len())?)
            }
            ModelArg::Interaction => QtlSpec::interaction(cross, positions.clone(), spec.h2)?,
        }
    };
    let pop = simulate_population(map.clone(), cross, spec.n, &qtl, seed)?;
    let truth = Truth {
        seed,
        cross,
        n: spec.n,
        h2: spec.h2,
        model: spec.model,
        qtl: describe(&map, &positions),
        spec: qtl,
    };
    Ok((pop, truth))
}

/// Min, median, mean and max of a sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Spread {
    pub min: f64,
    pub median: f64,
    pub mean: f64,
    pub max: f64,
}

impl Spread {
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let m = v.len() / 2;
        let median = if v.len() % 2 == 1 { v[m] } else { 0.5 * (v[m - 1] + v[m]) };
        Some(Self {
            min: v[0],
            median,
            mean: v.iter().sum::<f64>() / v.len() as f64,
            max: v[v.len() - 1],
        })
    }
}
