//! Genetic maps, the Haldane recombination model and the search lattice.
//!
//! Positions are stored as lattice indices rather than raw centimorgan
//! offsets, so every [`GenomePosition`] is on the lattice by construction.
//! The offset in cM is `locus * step`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Slack used when deciding whether a length is a whole number of steps.
const LATTICE_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Chromosome {
    pub name: String,
    pub length_cm: f64,
}

impl Chromosome {
    pub fn new(name: impl Into<String>, length_cm: f64) -> Self {
        Self {
            name: name.into(),
            length_cm,
        }
    }
}

/// A point on the search lattice: chromosome index plus lattice index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GenomePosition {
    pub chromosome: usize,
    pub locus: usize,
}

impl GenomePosition {
    pub fn new(chromosome: usize, locus: usize) -> Self {
        Self { chromosome, locus }
    }
}

/// Genetic distance between two loci. Loci on different chromosomes
/// segregate independently and have no finite distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Distance {
    Linked(f64),
    Unlinked,
}

/// Probability that the allele-origin class at distance `d` matches the
/// class at the reference locus under Haldane's map function
/// (no crossover interference).
///
/// `p(0) = 1`, decreasing towards `0.5`; exactly `0.5` when unlinked.
pub fn same_class_prob(d: Distance) -> Result<f64> {
    match d {
        Distance::Unlinked => Ok(0.5),
        Distance::Linked(x) if x.is_finite() && x >= 0.0 => Ok(0.5 + 0.5 * (-2.0 * x / 100.0).exp()),
        Distance::Linked(x) => Err(Error::InvalidDistance(x)),
    }
}

/// Probability that the class at distance `d` differs from the reference class.
pub fn recombination_prob(d: Distance) -> Result<f64> {
    match d {
        Distance::Unlinked => Ok(0.5),
        // -0.5 * expm1 keeps precision for short distances.
        Distance::Linked(x) if x.is_finite() && x >= 0.0 => Ok(-0.5 * (-2.0 * x / 100.0).exp_m1()),
        Distance::Linked(x) => Err(Error::InvalidDistance(x)),
    }
}

/// Chromosomes laid out one after another with a global lattice step.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneticMap {
    chromosomes: Vec<Chromosome>,
    step_cm: f64,
    loci: Vec<usize>,
    first_point: Vec<usize>,
    lattice_size: usize,
}

impl GeneticMap {
    pub fn new(chromosomes: Vec<Chromosome>, step_cm: f64) -> Result<Self> {
        if !(step_cm.is_finite() && step_cm > 0.0) {
            return Err(Error::InvalidMap(format!("lattice step must be positive, got {step_cm}")));
        }
        if chromosomes.is_empty() {
            return Err(Error::InvalidMap("map has no chromosomes".into()));
        }
        let mut loci = Vec::with_capacity(chromosomes.len());
        let mut first_point = Vec::with_capacity(chromosomes.len());
        let mut total = 0usize;
        for chr in &chromosomes {
            if !(chr.length_cm.is_finite() && chr.length_cm > 0.0) {
                return Err(Error::InvalidMap(format!(
                    "chromosome {} has non-positive length {}",
                    chr.name, chr.length_cm
                )));
            }
            if chr.length_cm + LATTICE_SLACK < step_cm {
                return Err(Error::InvalidMap(format!(
                    "chromosome {} ({} cM) is shorter than the lattice step {step_cm}",
                    chr.name, chr.length_cm
                )));
            }
            let count = (chr.length_cm / step_cm + LATTICE_SLACK).floor() as usize + 1;
            first_point.push(total);
            loci.push(count);
            total += count;
        }
        Ok(Self {
            chromosomes,
            step_cm,
            loci,
            first_point,
            lattice_size: total,
        })
    }

    /// A map with the default 1 cM lattice.
    pub fn with_unit_step(chromosomes: Vec<Chromosome>) -> Result<Self> {
        Self::new(chromosomes, 1.0)
    }

    /// `count` chromosomes of identical length, named `1..=count`.
    pub fn uniform(count: usize, length_cm: f64, step_cm: f64) -> Result<Self> {
        let chromosomes = (1..=count).map(|i| Chromosome::new(i.to_string(), length_cm)).collect();
        Self::new(chromosomes, step_cm)
    }

    pub fn step_cm(&self) -> f64 {
        self.step_cm
    }

    pub fn chromosomes(&self) -> &[Chromosome] {
        &self.chromosomes
    }

    pub fn n_chromosomes(&self) -> usize {
        self.chromosomes.len()
    }

    /// Number of lattice points on chromosome `chr`.
    pub fn loci_on(&self, chr: usize) -> usize {
        self.loci[chr]
    }

    /// Total number of lattice points over all chromosomes.
    pub fn lattice_size(&self) -> usize {
        self.lattice_size
    }

    pub fn offset_cm(&self, pos: GenomePosition) -> f64 {
        pos.locus as f64 * self.step_cm
    }

    pub fn contains(&self, pos: GenomePosition) -> bool {
        pos.chromosome < self.chromosomes.len() && pos.locus < self.loci[pos.chromosome]
    }

    fn check(&self, pos: GenomePosition) -> Result<()> {
        if self.contains(pos) {
            Ok(())
        } else {
            Err(Error::ForeignPosition(format!(
                "chromosome {} locus {} (map has {} chromosomes)",
                pos.chromosome,
                pos.locus,
                self.chromosomes.len()
            )))
        }
    }

    /// Index of `pos` in the chromosome-major flattening of the lattice.
    pub fn global_index(&self, pos: GenomePosition) -> Result<usize> {
        self.check(pos)?;
        Ok(self.first_point[pos.chromosome] + pos.locus)
    }

    /// Global index of the first lattice point on `chr`.
    pub fn first_point(&self, chr: usize) -> usize {
        self.first_point[chr]
    }

    /// Inverse of [`GeneticMap::global_index`].
    pub fn position_of(&self, global: usize) -> Result<GenomePosition> {
        if global >= self.lattice_size {
            return Err(Error::ForeignPosition(format!("global index {global} of {}", self.lattice_size)));
        }
        let chr = self.first_point.partition_point(|&start| start <= global) - 1;
        Ok(GenomePosition::new(chr, global - self.first_point[chr]))
    }

    /// Lattice position at `offset_cm` on chromosome `chr`.
    pub fn position_at(&self, chr: usize, offset_cm: f64) -> Result<GenomePosition> {
        if chr >= self.chromosomes.len() {
            return Err(Error::ForeignPosition(format!("chromosome index {chr}")));
        }
        let steps = offset_cm / self.step_cm;
        let locus = steps.round();
        if !offset_cm.is_finite() || offset_cm < 0.0 || (steps - locus).abs() > 1e-6 {
            return Err(Error::OffLattice(format!(
                "{offset_cm} cM is not a multiple of the {} cM step",
                self.step_cm
            )));
        }
        let pos = GenomePosition::new(chr, locus as usize);
        if !self.contains(pos) {
            return Err(Error::OffLattice(format!(
                "{offset_cm} cM is beyond the end of chromosome {}",
                self.chromosomes[chr].name
            )));
        }
        Ok(pos)
    }

    pub fn chromosome_index(&self, name: &str) -> Option<usize> {
        self.chromosomes.iter().position(|c| c.name == name)
    }

    /// Every lattice position, chromosome-major.
    pub fn lattice_points(&self) -> Vec<GenomePosition> {
        self.loci
            .iter()
            .enumerate()
            .flat_map(|(chr, &count)| (0..count).map(move |locus| GenomePosition::new(chr, locus)))
            .collect()
    }

    pub fn genetic_distance(&self, a: GenomePosition, b: GenomePosition) -> Result<Distance> {
        self.check(a)?;
        self.check(b)?;
        if a.chromosome != b.chromosome {
            return Ok(Distance::Unlinked);
        }
        Ok(Distance::Linked(a.locus.abs_diff(b.locus) as f64 * self.step_cm))
    }

    /// The same chromosomes on a coarser lattice, `factor` times the current step.
    pub fn coarsened(&self, factor: usize) -> Result<Self> {
        if factor == 0 {
            return Err(Error::InvalidParameter("coarsening factor must be >= 1".into()));
        }
        Self::new(self.chromosomes.clone(), self.step_cm * factor as f64)
    }
}
