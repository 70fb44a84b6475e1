//! The objective: a full-interaction class-means fit at `d` lattice points.
//!
//! With one free mean per genotype class the least-squares solution is the
//! vector of class means, so RSS follows from the group-means identity
//! `RSS = TSS - sum_c n_c (mean_c - mean)^2` without forming a design matrix.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::genome::GenomePosition;
use crate::simpop::Population;

/// Relative floor on explained variance before LogVar saturates.
const EXPLAINED_FLOOR: f64 = f64::EPSILON;

/// Relative slack allowed when checking `rss <= rss_total`.
const RSS_SLACK: f64 = 1e-12;

/// Mean and size of one occupied genotype class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassSummary {
    /// Cell index, first locus most significant.
    pub cell: usize,
    pub count: usize,
    pub mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub rss: f64,
    /// Total sum of squares about the grand mean.
    pub rss_total: f64,
    pub n: usize,
    /// Occupied classes only, in cell order.
    pub classes: Vec<ClassSummary>,
    pub dof_model: usize,
    pub logvar: f64,
}

/// LogVar saturation value: the transform at the explained-variance floor.
pub fn logvar_ceiling(rss_total: f64, n: usize) -> f64 {
    -((rss_total * EXPLAINED_FLOOR) / n as f64).ln()
}

/// `-ln(V_t - V_r)` with `V_r = rss / n` and `V_t = rss_total / n`.
///
/// Zero explained variance saturates at [`logvar_ceiling`] instead of
/// returning infinity.
pub fn logvar_transform(rss: f64, rss_total: f64, n: usize) -> Result<f64> {
    if !(rss_total > 0.0 && rss_total.is_finite()) {
        return Err(Error::InvalidParameter(format!("total SS must be positive, got {rss_total}")));
    }
    if n == 0 {
        return Err(Error::InvalidParameter("n must be positive".into()));
    }
    if rss > rss_total * (1.0 + RSS_SLACK) || rss.is_nan() {
        return Err(Error::Inconsistent(format!("rss {rss} exceeds total SS {rss_total}")));
    }
    let explained = (rss_total - rss).max(rss_total * EXPLAINED_FLOOR);
    Ok(-(explained / n as f64).ln())
}

/// RSS and occupied-class count of one evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub rss: f64,
    pub dof_model: usize,
}

/// Reusable evaluator holding centered phenotypes and per-class scratch space.
#[derive(Debug, Clone)]
pub struct Fitter<'a> {
    pop: &'a Population,
    mean: f64,
    centered: Vec<f64>,
    rss_total: f64,
    cells: Vec<usize>,
    counts: Vec<usize>,
    sums: Vec<f64>,
}

impl<'a> Fitter<'a> {
    pub fn new(pop: &'a Population) -> Self {
        let y = pop.phenotypes();
        let mean = y.iter().sum::<f64>() / y.len() as f64;
        let centered: Vec<f64> = y.iter().map(|v| v - mean).collect();
        let rss_total = centered.iter().map(|c| c * c).sum();
        Self {
            pop,
            mean,
            centered,
            rss_total,
            cells: vec![0; y.len()],
            counts: Vec::new(),
            sums: Vec::new(),
        }
    }

    pub fn population(&self) -> &'a Population {
        self.pop
    }

    pub fn rss_total(&self) -> f64 {
        self.rss_total
    }

    pub fn n(&self) -> usize {
        self.centered.len()
    }

    pub fn logvar(&self, rss: f64) -> Result<f64> {
        logvar_transform(rss, self.rss_total, self.n())
    }

    fn accumulate(&mut self, points: &[usize]) -> Result<()> {
        if points.is_empty() {
            return Err(Error::InvalidParameter("a fit needs at least one position".into()));
        }
        let lattice = self.pop.map().lattice_size();
        if let Some(&bad) = points.iter().find(|&&p| p >= lattice) {
            return Err(Error::ForeignPosition(format!("lattice point {bad} of {lattice}")));
        }
        let base = self.pop.cross().classes_per_locus();
        let n_cells = base.pow(points.len() as u32);
        self.cells.iter_mut().for_each(|c| *c = 0);
        for &p in points {
            for (cell, &g) in self.cells.iter_mut().zip(self.pop.genotypes_at(p)) {
                *cell = *cell * base + g as usize;
            }
        }
        self.counts.clear();
        self.counts.resize(n_cells, 0);
        self.sums.clear();
        self.sums.resize(n_cells, 0.0);
        for (&cell, &y) in self.cells.iter().zip(&self.centered) {
            self.counts[cell] += 1;
            self.sums[cell] += y;
        }
        Ok(())
    }

    fn rss_from_sums(&self) -> Evaluation {
        let mut explained = 0.0;
        let mut dof_model = 0;
        for (&count, &sum) in self.counts.iter().zip(&self.sums) {
            if count > 0 {
                explained += sum * sum / count as f64;
                dof_model += 1;
            }
        }
        Evaluation {
            rss: (self.rss_total - explained).clamp(0.0, self.rss_total),
            dof_model,
        }
    }

    /// RSS at global lattice points `points` (any order, repeats allowed).
    pub fn evaluate(&mut self, points: &[usize]) -> Result<Evaluation> {
        self.accumulate(points)?;
        Ok(self.rss_from_sums())
    }

    /// Full fit report at global lattice points.
    pub fn fit_points(&mut self, points: &[usize]) -> Result<FitResult> {
        self.accumulate(points)?;
        let eval = self.rss_from_sums();
        let classes = self
            .counts
            .iter()
            .zip(&self.sums)
            .enumerate()
            .filter(|(_, (&c, _))| c > 0)
            .map(|(cell, (&count, &sum))| ClassSummary {
                cell,
                count,
                mean: self.mean + sum / count as f64,
            })
            .collect();
        Ok(FitResult {
            rss: eval.rss,
            rss_total: self.rss_total,
            n: self.n(),
            classes,
            dof_model: eval.dof_model,
            logvar: self.logvar(eval.rss)?,
        })
    }
}

/// Fit the class-means model at `positions`.
pub fn fit(pop: &Population, positions: &[GenomePosition]) -> Result<FitResult> {
    let points = positions
        .iter()
        .map(|&p| pop.map().global_index(p))
        .collect::<Result<Vec<_>>>()?;
    Fitter::new(pop).fit_points(&points)
}
