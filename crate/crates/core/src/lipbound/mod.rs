//! Pruning bounds on the LogVar objective.
//!
//! Two layers:
//!
//! * the infinite-population expectation, whose LogVar slope is bounded by
//!   [`LIPSCHITZ_PER_CM`] in every coordinate ([`lipschitz`]);
//! * the finite-population distribution of the RSS at distance `x` from a
//!   hypothetical optimum: a binomially weighted mixture of two-sided normal
//!   tails over the recombinant counts ([`cdf`]), inverted at `1 - epsilon`
//!   on a fixed LogVar grid ([`quantile`]).

pub mod binomial;
pub mod cdf;
pub mod lipschitz;
pub mod quantile;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::regmodel::logvar_ceiling;

pub use binomial::{binomial_row, binomial_row_into, mass_window, truncation_window, TAIL_TOLERANCE};
pub use cdf::{conditional_rss_cdf, marginal_rss_cdf, RecombCounts};
pub use lipschitz::LIPSCHITZ_PER_CM;
pub use quantile::{logvar_quantile, Quantile, QuantileEntry, QuantileSolver, QuantileTable, LOGVAR_RESOLUTION};

/// Default per-test residual probability.
pub const DEFAULT_EPSILON: f64 = 1e-9;

/// Parameters of the RSS distribution around a hypothetical single-locus
/// optimum explaining `rss_total - reference_rss`.
///
/// Effects are in the centered phenotype frame (grand mean zero):
/// class 0 has mean `effect_mu`, class 1 has mean `effect_mu + effect_a`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundParams {
    pub n: usize,
    pub n0: usize,
    pub n1: usize,
    pub reference_rss: f64,
    pub rss_total: f64,
    pub effect_mu: f64,
    pub effect_a: f64,
    pub within_class_sd: f64,
    pub epsilon: f64,
}

impl BoundParams {
    /// Balanced classes (`n0 = n / 2`), effects implied by the reference RSS,
    /// and within-class sd `sqrt(reference_rss / n)`.
    pub fn for_reference(n: usize, rss_total: f64, reference_rss: f64, epsilon: f64) -> Result<Self> {
        let n0 = n / 2;
        Self::with_counts(n, n0, n - n0, rss_total, reference_rss, epsilon)
    }

    /// As [`BoundParams::for_reference`] with explicit class counts at the optimum.
    pub fn with_counts(n: usize, n0: usize, n1: usize, rss_total: f64, reference_rss: f64, epsilon: f64) -> Result<Self> {
        if n0 == 0 || n1 == 0 || n0 + n1 != n {
            return Err(Error::InvalidParameter(format!("class counts {n0} + {n1} must be positive and sum to n = {n}")));
        }
        // Explained SS of a two-class split is n0 n1 / n * a^2.
        let explained = (rss_total - reference_rss).max(0.0);
        let a = (explained * n as f64 / (n0 as f64 * n1 as f64)).sqrt();
        let params = Self {
            n,
            n0,
            n1,
            reference_rss,
            rss_total,
            effect_mu: -a * n1 as f64 / n as f64,
            effect_a: a,
            within_class_sd: (reference_rss.max(0.0) / n as f64).sqrt(),
            epsilon,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n0 == 0 || self.n1 == 0 || self.n0 + self.n1 != self.n {
            return Err(Error::InvalidParameter(format!(
                "class counts {} + {} must be positive and sum to n = {}",
                self.n0, self.n1, self.n
            )));
        }
        if !(self.rss_total > 0.0 && self.rss_total.is_finite()) {
            return Err(Error::InvalidParameter(format!("total SS must be positive, got {}", self.rss_total)));
        }
        if !(0.0..=self.rss_total).contains(&self.reference_rss) {
            return Err(Error::InvalidParameter(format!(
                "reference RSS {} outside [0, {}]",
                self.reference_rss, self.rss_total
            )));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 0.5) {
            return Err(Error::InvalidParameter(format!("epsilon must be in (0, 0.5), got {}", self.epsilon)));
        }
        if !(self.within_class_sd.is_finite() && self.within_class_sd >= 0.0) {
            return Err(Error::InvalidParameter("within-class sd must be finite and >= 0".into()));
        }
        if !(self.effect_mu.is_finite() && self.effect_a.is_finite()) {
            return Err(Error::InvalidParameter("effects must be finite".into()));
        }
        Ok(())
    }
}

/// LogVar of the expected explained SS of a null regression with
/// `dof_model` free class means: `(dof_model - 1) * rss_total / n`.
pub fn chi2_mean_logvar(dof_model: usize, rss_total: f64, n: usize) -> f64 {
    if dof_model <= 1 {
        return logvar_ceiling(rss_total, n);
    }
    let sigma2 = rss_total / n as f64;
    let explained = (dof_model - 1) as f64 * sigma2;
    -(explained / n as f64).ln()
}

/// Clamp a box value that explains less than chance to the chance level.
pub fn chi2_guard(logvar_value: f64, dof_model: usize, rss_total: f64, n: usize) -> f64 {
    logvar_value.min(chi2_mean_logvar(dof_model.max(1), rss_total, n))
}
