//! Simulated backcross and F2 intercross populations with known QTL.
//!
//! Gametes are Markov walks along each chromosome: the class at the first
//! lattice point is uniform, and each step flips the class with the Haldane
//! recombination probability for one lattice step. An intercross genotype is
//! the sum of two independent gametes (the number of `Q` alleles).

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::genome::{recombination_prob, Distance, GeneticMap, GenomePosition};

/// Genetic variance assigned to a fully heritable model; matches a single
/// backcross QTL with unit effect.
pub const REFERENCE_GENETIC_VARIANCE: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CrossType {
    Backcross,
    Intercross,
}

impl CrossType {
    /// Genotype classes per locus: 2 for a backcross, 3 for an intercross.
    pub fn classes_per_locus(self) -> usize {
        match self {
            CrossType::Backcross => 2,
            CrossType::Intercross => 3,
        }
    }

    /// Expected class frequencies at a single locus.
    pub fn class_frequencies(self) -> &'static [f64] {
        match self {
            CrossType::Backcross => &[0.5, 0.5],
            CrossType::Intercross => &[0.25, 0.5, 0.25],
        }
    }

    /// Short tag used in files and on the command line.
    pub fn tag(self) -> &'static str {
        match self {
            CrossType::Backcross => "bc",
            CrossType::Intercross => "f2",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        match tag {
            "bc" | "backcross" => Some(CrossType::Backcross),
            "f2" | "intercross" => Some(CrossType::Intercross),
            _ => None,
        }
    }

    /// Number of cells in a full-interaction table over `d` loci.
    pub fn cells(self, d: usize) -> usize {
        self.classes_per_locus().pow(d as u32)
    }
}

/// Individuals with complete allele-origin genotypes on the lattice and one
/// phenotype each.
///
/// Genotypes are stored point-major (`point * n + individual`) and shared
/// between a population and its phenotype permutations.
#[derive(Debug, Clone)]
pub struct Population {
    cross: CrossType,
    map: Arc<GeneticMap>,
    genotypes: Arc<[u8]>,
    phenotypes: Vec<f64>,
}

impl Population {
    pub fn new(map: Arc<GeneticMap>, cross: CrossType, genotypes: Vec<u8>, phenotypes: Vec<f64>) -> Result<Self> {
        let n = phenotypes.len();
        if n < 2 {
            return Err(Error::InvalidPopulation(format!("need at least 2 individuals, got {n}")));
        }
        if genotypes.len() != n * map.lattice_size() {
            return Err(Error::InvalidPopulation(format!(
                "genotype matrix has {} entries, expected {n} x {}",
                genotypes.len(),
                map.lattice_size()
            )));
        }
        let classes = cross.classes_per_locus() as u8;
        if let Some(bad) = genotypes.iter().find(|&&g| g >= classes) {
            return Err(Error::InvalidPopulation(format!("class label {bad} outside the {} alphabet", cross.tag())));
        }
        if let Some(bad) = phenotypes.iter().find(|y| !y.is_finite()) {
            return Err(Error::InvalidPopulation(format!("non-finite phenotype {bad}")));
        }
        Ok(Self {
            cross,
            map,
            genotypes: genotypes.into(),
            phenotypes,
        })
    }

    pub fn cross(&self) -> CrossType {
        self.cross
    }

    pub fn map(&self) -> &Arc<GeneticMap> {
        &self.map
    }

    pub fn n(&self) -> usize {
        self.phenotypes.len()
    }

    pub fn phenotypes(&self) -> &[f64] {
        &self.phenotypes
    }

    /// Class labels of every individual at global lattice point `point`.
    pub fn genotypes_at(&self, point: usize) -> &[u8] {
        let n = self.n();
        &self.genotypes[point * n..(point + 1) * n]
    }

    pub fn genotype(&self, individual: usize, pos: GenomePosition) -> Result<u8> {
        let point = self.map.global_index(pos)?;
        Ok(self.genotypes_at(point)[individual])
    }

    /// Same genotypes, new phenotype vector.
    pub fn with_phenotypes(&self, phenotypes: Vec<f64>) -> Result<Self> {
        if phenotypes.len() != self.n() {
            return Err(Error::InvalidPopulation(format!(
                "expected {} phenotypes, got {}",
                self.n(),
                phenotypes.len()
            )));
        }
        if phenotypes.iter().any(|y| !y.is_finite()) {
            return Err(Error::InvalidPopulation("non-finite phenotype".into()));
        }
        Ok(Self {
            phenotypes,
            ..self.clone()
        })
    }

    /// Keep every `factor`-th lattice point, giving a lattice `factor` times coarser.
    pub fn coarsened(&self, factor: usize) -> Result<Self> {
        if factor == 1 {
            return Ok(self.clone());
        }
        let coarse = Arc::new(self.map.coarsened(factor)?);
        let n = self.n();
        let mut genotypes = Vec::with_capacity(n * coarse.lattice_size());
        for chr in 0..coarse.n_chromosomes() {
            for locus in 0..coarse.loci_on(chr) {
                let point = self.map.global_index(GenomePosition::new(chr, locus * factor))?;
                genotypes.extend_from_slice(self.genotypes_at(point));
            }
        }
        Self::new(coarse, self.cross, genotypes, self.phenotypes.clone())
    }

    /// Observed class counts at a lattice point.
    pub fn class_counts_at(&self, point: usize) -> Vec<usize> {
        let mut counts = vec![0; self.cross.classes_per_locus()];
        for &g in self.genotypes_at(point) {
            counts[g as usize] += 1;
        }
        counts
    }
}

/// Simulated QTL: positions, a full-interaction table of class means and the
/// environmental noise level.
///
/// The table is indexed with the first locus as the most significant digit,
/// i.e. `cell = ((g0 * k) + g1) * k + ...` with `k` classes per locus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QtlSpec {
    pub positions: Vec<GenomePosition>,
    pub effects: Vec<f64>,
    pub env_sd: f64,
}

/// Per-locus additive effect and noise level reaching a target heritability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectScaling {
    pub locus_effect: f64,
    pub env_sd: f64,
    pub genetic_variance: f64,
}

/// Effect size and environmental noise for `d` additive loci with total
/// heritability `h2`.
///
/// The total genetic variance is fixed at 0.25 (a unit backcross effect) and
/// split equally across loci; the noise absorbs the rest. `h2 = 0` gives zero
/// effects and unit noise.
pub fn heritability_to_effects(h2: f64, cross: CrossType, d: usize) -> Result<EffectScaling> {
    if !(0.0..1.0).contains(&h2) {
        return Err(Error::InvalidParameter(format!("heritability must be in [0, 1), got {h2}")));
    }
    if d == 0 {
        return Err(Error::InvalidParameter("need at least one locus".into()));
    }
    if h2 == 0.0 {
        return Ok(EffectScaling {
            locus_effect: 0.0,
            env_sd: 1.0,
            genetic_variance: 0.0,
        });
    }
    // Variance of the allele-count indicator per unit effect.
    let unit_variance = match cross {
        CrossType::Backcross => 0.25,
        CrossType::Intercross => 0.5,
    };
    let per_locus = REFERENCE_GENETIC_VARIANCE / d as f64;
    Ok(EffectScaling {
        locus_effect: (per_locus / unit_variance).sqrt(),
        env_sd: env_sd_for(REFERENCE_GENETIC_VARIANCE, h2),
        genetic_variance: REFERENCE_GENETIC_VARIANCE,
    })
}

fn env_sd_for(genetic_variance: f64, h2: f64) -> f64 {
    (genetic_variance * (1.0 - h2) / h2).sqrt()
}

fn cell_digits(cell: usize, base: usize, d: usize) -> Vec<usize> {
    let mut digits = vec![0; d];
    let mut rest = cell;
    for slot in digits.iter_mut().rev() {
        *slot = rest % base;
        rest /= base;
    }
    digits
}

impl QtlSpec {
    pub fn new(positions: Vec<GenomePosition>, effects: Vec<f64>, env_sd: f64) -> Self {
        Self {
            positions,
            effects,
            env_sd,
        }
    }

    /// No genetic effect; phenotypes are pure noise.
    pub fn null(env_sd: f64) -> Self {
        Self::new(Vec::new(), vec![0.0], env_sd)
    }

    /// Additive loci, each class mean being `locus_effect` times the number of `Q` alleles summed over loci.
    pub fn additive(cross: CrossType, positions: Vec<GenomePosition>, scaling: &EffectScaling) -> Self {
        let base = cross.classes_per_locus();
        let d = positions.len();
        let effects = (0..cross.cells(d))
            .map(|cell| cell_digits(cell, base, d).iter().sum::<usize>() as f64 * scaling.locus_effect)
            .collect();
        Self::new(positions, effects, scaling.env_sd)
    }

    /// Interacting loci: the trait is shifted only when every locus carries
    /// at least one `Q` allele. The table is scaled to the reference genetic
    /// variance and the noise set for heritability `h2`.
    pub fn interaction(cross: CrossType, positions: Vec<GenomePosition>, h2: f64) -> Result<Self> {
        let d = positions.len();
        let scaling = heritability_to_effects(h2, cross, d.max(1))?;
        let base = cross.classes_per_locus();
        let raw: Vec<f64> = (0..cross.cells(d))
            .map(|cell| {
                if cell_digits(cell, base, d).iter().all(|&g| g >= 1) {
                    1.0
                } else {
                    0.0
                }
            })
            .collect();
        let mut spec = Self::new(positions, raw, scaling.env_sd);
        let var = spec.genetic_variance(cross);
        let scale = if h2 == 0.0 || var == 0.0 {
            0.0
        } else {
            (REFERENCE_GENETIC_VARIANCE / var).sqrt()
        };
        spec.effects.iter_mut().for_each(|e| *e *= scale);
        Ok(spec)
    }

    /// Genetic variance of the effect table when loci are unlinked, using the
    /// cross's expected class frequencies.
    pub fn genetic_variance(&self, cross: CrossType) -> f64 {
        let base = cross.classes_per_locus();
        let d = self.positions.len();
        let freqs = cross.class_frequencies();
        let mut mean = 0.0;
        let mut second = 0.0;
        for (cell, &e) in self.effects.iter().enumerate() {
            let w: f64 = cell_digits(cell, base, d).iter().map(|&g| freqs[g]).product();
            mean += w * e;
            second += w * e * e;
        }
        (second - mean * mean).max(0.0)
    }

    pub fn validate(&self, cross: CrossType, map: &GeneticMap) -> Result<()> {
        for (i, pos) in self.positions.iter().enumerate() {
            if !map.contains(*pos) {
                return Err(Error::OffLattice(format!(
                    "QTL {i} at chromosome {} locus {} is not on the map lattice",
                    pos.chromosome, pos.locus
                )));
            }
            if self.positions[..i].contains(pos) {
                return Err(Error::InvalidParameter(format!("QTL positions must be distinct, {i} repeats")));
            }
        }
        let cells = cross.cells(self.positions.len());
        if self.effects.len() != cells {
            return Err(Error::InvalidParameter(format!(
                "effect table has {} entries, {} loci in a {} need {cells}",
                self.effects.len(),
                self.positions.len(),
                cross.tag()
            )));
        }
        if self.effects.iter().any(|e| !e.is_finite()) {
            return Err(Error::InvalidParameter("non-finite effect".into()));
        }
        if !(self.env_sd.is_finite() && self.env_sd >= 0.0) {
            return Err(Error::InvalidParameter(format!("env_sd must be >= 0, got {}", self.env_sd)));
        }
        Ok(())
    }
}

fn walk_gamete(rng: &mut ChaCha8Rng, loci: usize, flip: f64, out: &mut [u8]) {
    let mut class: u8 = rng.random_range(0..2);
    out[0] = class;
    for slot in out.iter_mut().take(loci).skip(1) {
        if rng.random_bool(flip) {
            class ^= 1;
        }
        *slot = class;
    }
}

/// Simulate `n` individuals of the given cross. Deterministic in `seed`.
pub fn simulate_population(
    map: Arc<GeneticMap>,
    cross: CrossType,
    n: usize,
    qtl: &QtlSpec,
    seed: u64,
) -> Result<Population> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("need n >= 2, got {n}")));
    }
    qtl.validate(cross, &map)?;
    let flip = recombination_prob(Distance::Linked(map.step_cm()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lattice = map.lattice_size();
    let mut genotypes = vec![0u8; n * lattice];
    let longest = (0..map.n_chromosomes()).map(|c| map.loci_on(c)).max().unwrap_or(0);
    let mut gamete = vec![0u8; longest];
    let mut second = vec![0u8; longest];

    let qtl_points = qtl
        .positions
        .iter()
        .map(|&p| map.global_index(p))
        .collect::<Result<Vec<_>>>()?;
    let base = cross.classes_per_locus();
    let noise = Normal::new(0.0, qtl.env_sd).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let mut phenotypes = Vec::with_capacity(n);

    for ind in 0..n {
        for chr in 0..map.n_chromosomes() {
            let loci = map.loci_on(chr);
            let first = map.first_point(chr);
            walk_gamete(&mut rng, loci, flip, &mut gamete);
            if cross == CrossType::Intercross {
                walk_gamete(&mut rng, loci, flip, &mut second);
                for (g, s) in gamete.iter_mut().zip(&second).take(loci) {
                    *g += s;
                }
            }
            for (locus, &g) in gamete.iter().take(loci).enumerate() {
                genotypes[(first + locus) * n + ind] = g;
            }
        }
        let cell = qtl_points
            .iter()
            .fold(0usize, |acc, &pt| acc * base + genotypes[pt * n + ind] as usize);
        let mut y = qtl.effects[cell];
        if qtl.env_sd > 0.0 {
            y += noise.sample(&mut rng);
        }
        phenotypes.push(y);
    }
    Population::new(map, cross, genotypes, phenotypes)
}

/// Uniformly shuffle the phenotype vector; genotypes are shared, not copied.
///
/// Every seed produces a Fisher-Yates shuffle driven by ChaCha8 seeded with
/// `seed`; there is no seed reserved for the identity permutation.
pub fn permute_phenotypes(pop: &Population, seed: u64) -> Population {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut phenotypes = pop.phenotypes.clone();
    phenotypes.shuffle(&mut rng);
    Population {
        phenotypes,
        ..pop.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::genome::same_class_prob;
    use approx::assert_relative_eq;

    fn map(chroms: usize, len: f64) -> Arc<GeneticMap> {
        Arc::new(GeneticMap::uniform(chroms, len, 1.0).unwrap())
    }

    #[test]
    fn noiseless_backcross_matches_qtl_class() {
        let m = map(2, 50.0);
        let q = GenomePosition::new(1, 20);
        let spec = QtlSpec::new(vec![q], vec![0.0, 1.0], 0.0);
        let pop = simulate_population(m.clone(), CrossType::Backcross, 300, &spec, 7).unwrap();
        let point = m.global_index(q).unwrap();
        for (y, &g) in pop.phenotypes().iter().zip(pop.genotypes_at(point)) {
            assert_eq!(*y, g as f64);
        }
    }

    #[test]
    fn adjacent_flip_rate_follows_haldane() {
        let m = map(1, 10.0);
        let spec = QtlSpec::new(vec![GenomePosition::new(0, 5)], vec![0.0, 1.0], 1.0);
        let n = 10_000;
        let pop = simulate_population(m, CrossType::Backcross, n, &spec, 11).unwrap();
        let p = 1.0 - same_class_prob(Distance::Linked(1.0)).unwrap();
        let mut flips = 0usize;
        let mut trials = 0usize;
        for point in 0..10 {
            let (a, b) = (pop.genotypes_at(point), pop.genotypes_at(point + 1));
            flips += a.iter().zip(b).filter(|(x, y)| x != y).count();
            trials += n;
        }
        let expected = p * trials as f64;
        let sd = (trials as f64 * p * (1.0 - p)).sqrt();
        assert!((flips as f64 - expected).abs() < 3.0 * sd, "flips {flips} vs {expected} +- {sd}");
    }

    #[test]
    fn null_model_has_unit_variance() {
        let pop = simulate_population(map(1, 20.0), CrossType::Backcross, 10_000, &QtlSpec::null(1.0), 3).unwrap();
        let y = pop.phenotypes();
        let mean = y.iter().sum::<f64>() / y.len() as f64;
        let var = y.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (y.len() - 1) as f64;
        // sd of the sample variance is about sqrt(2/n) = 0.014.
        assert!((var - 1.0).abs() < 0.06, "variance {var}");
        assert!(mean.abs() < 0.05);
    }

    fn chi_square(counts: &[usize], freqs: &[f64]) -> f64 {
        let n: usize = counts.iter().sum();
        counts
            .iter()
            .zip(freqs)
            .map(|(&c, &f)| {
                let e = f * n as f64;
                (c as f64 - e).powi(2) / e
            })
            .sum()
    }

    #[test]
    fn class_frequencies_pass_goodness_of_fit() {
        // Critical values at alpha = 0.001: 10.83 (1 dof), 13.82 (2 dof).
        let m = map(1, 30.0);
        for (cross, critical) in [(CrossType::Backcross, 10.83), (CrossType::Intercross, 13.82)] {
            let pop = simulate_population(m.clone(), cross, 10_000, &QtlSpec::null(1.0), 5).unwrap();
            for point in [0, 15, 30] {
                let stat = chi_square(&pop.class_counts_at(point), cross.class_frequencies());
                assert!(stat < critical, "{cross:?} point {point}: chi2 {stat}");
            }
        }
    }

    #[test]
    fn indicator_correlation_decays_exponentially() {
        let m = map(1, 100.0);
        let n = 10_000;
        let pop = simulate_population(m, CrossType::Backcross, n, &QtlSpec::null(1.0), 21).unwrap();
        for x in [5usize, 20, 50] {
            let (a, b) = (pop.genotypes_at(0), pop.genotypes_at(x));
            let same = a.iter().zip(b).filter(|(u, v)| u == v).count() as f64 / n as f64;
            // corr = 2 * P(same) - 1 for balanced binary indicators.
            let corr = 2.0 * same - 1.0;
            let expected = (-2.0 * x as f64 / 100.0).exp();
            assert!((corr - expected).abs() < 0.04, "x={x}: {corr} vs {expected}");
        }
    }

    #[test]
    fn heritability_scaling() {
        let s = heritability_to_effects(0.5, CrossType::Backcross, 1).unwrap();
        assert_relative_eq!(s.locus_effect, 1.0);
        assert_relative_eq!(s.env_sd, 0.5);
        let zero = heritability_to_effects(0.0, CrossType::Backcross, 1).unwrap();
        assert_eq!(zero.locus_effect, 0.0);
        assert!(heritability_to_effects(1.0, CrossType::Backcross, 1).is_err());
        assert!(heritability_to_effects(-0.1, CrossType::Backcross, 1).is_err());

        for cross in [CrossType::Backcross, CrossType::Intercross] {
            for d in 1..=3 {
                let s = heritability_to_effects(0.3, cross, d).unwrap();
                let positions = (0..d).map(|c| GenomePosition::new(c, 0)).collect();
                let spec = QtlSpec::additive(cross, positions, &s);
                let vg = spec.genetic_variance(cross);
                assert_relative_eq!(vg, REFERENCE_GENETIC_VARIANCE, epsilon = 1e-12);
                assert_relative_eq!(vg / (vg + s.env_sd * s.env_sd), 0.3, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn interaction_table_reaches_target_heritability() {
        for cross in [CrossType::Backcross, CrossType::Intercross] {
            let spec = QtlSpec::interaction(cross, vec![GenomePosition::new(0, 3), GenomePosition::new(1, 9)], 0.3).unwrap();
            assert_eq!(spec.effects.len(), cross.cells(2));
            let vg = spec.genetic_variance(cross);
            assert_relative_eq!(vg / (vg + spec.env_sd.powi(2)), 0.3, epsilon = 1e-12);
        }
    }

    #[test]
    fn simulation_validates_qtl() {
        let m = map(1, 10.0);
        let off = QtlSpec::new(vec![GenomePosition::new(0, 11)], vec![0.0, 1.0], 1.0);
        assert!(matches!(
            simulate_population(m.clone(), CrossType::Backcross, 10, &off, 1),
            Err(Error::OffLattice(_))
        ));
        let wrong_table = QtlSpec::new(vec![GenomePosition::new(0, 1)], vec![0.0, 1.0], 1.0);
        assert!(simulate_population(m.clone(), CrossType::Intercross, 10, &wrong_table, 1).is_err());
        assert!(simulate_population(m, CrossType::Backcross, 1, &QtlSpec::null(1.0), 1).is_err());
    }

    #[test]
    fn simulation_is_deterministic() {
        let m = map(2, 30.0);
        let spec = QtlSpec::null(1.0);
        let a = simulate_population(m.clone(), CrossType::Intercross, 50, &spec, 9).unwrap();
        let b = simulate_population(m.clone(), CrossType::Intercross, 50, &spec, 9).unwrap();
        let c = simulate_population(m, CrossType::Intercross, 50, &spec, 10).unwrap();
        assert_eq!(a.phenotypes(), b.phenotypes());
        assert_eq!(a.genotypes_at(17), b.genotypes_at(17));
        assert_ne!(a.phenotypes(), c.phenotypes());
    }

    #[test]
    fn permutation_properties() {
        let pop = simulate_population(map(1, 10.0), CrossType::Backcross, 40, &QtlSpec::null(1.0), 2).unwrap();
        let p1 = permute_phenotypes(&pop, 100);
        let p2 = permute_phenotypes(&pop, 101);
        let sorted = |v: &[f64]| {
            let mut s = v.to_vec();
            s.sort_by(f64::total_cmp);
            s
        };
        assert_eq!(sorted(p1.phenotypes()), sorted(pop.phenotypes()));
        assert_ne!(p1.phenotypes(), p2.phenotypes());
        assert_eq!(p1.phenotypes(), permute_phenotypes(&pop, 100).phenotypes());
        assert_eq!(p1.genotypes_at(3), pop.genotypes_at(3));
    }

    #[test]
    fn coarsening_subsamples_lattice() {
        let m = map(1, 10.0);
        let pop = simulate_population(m, CrossType::Backcross, 20, &QtlSpec::null(1.0), 4).unwrap();
        let coarse = pop.coarsened(5).unwrap();
        assert_eq!(coarse.map().lattice_size(), 3);
        assert_eq!(coarse.genotypes_at(1), pop.genotypes_at(5));
        assert_eq!(coarse.genotypes_at(2), pop.genotypes_at(10));
    }
}
