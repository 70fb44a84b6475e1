//! Finite-population distribution of the RSS at distance `x` from an optimum.
//!
//! Fix the class labels `Z(0)` and phenotypes at the optimum. Moving to `x`
//! relabels `m01` class-0 individuals as 1 and `m10` class-1 individuals as
//! 0. The slope numerator splits into `a11` (recombinants only, random) and
//! `a12` (deterministic given the counts):
//!
//! ```text
//! a11 = sum_{M01} y - sum_{M10} y ~ N(mu(m01 - m10) - a m10, sigma^2_a11)
//! a12 = sum_i (Z_i(0) - Zbar(x)) y_i
//! a2  = n0(x) n1(x) / n
//! RSS_x = RSS_t - (a11 + a12)^2 / a2
//! ```
//!
//! so `P(RSS_x <= rss) = P(|a11 + a12| >= R)` with `R = sqrt((RSS_t - rss) a2)`.
//! The counts are then integrated out with independent binomial weights.

use statrs::function::erf::erfc;

use super::binomial::{binomial_row_into, mass_window};
use super::BoundParams;
use crate::error::{Error, Result};
use crate::genome::{recombination_prob, Distance};

const SQRT_2: f64 = std::f64::consts::SQRT_2;

/// Relative slack on the degenerate step so the reference value itself
/// lands on the upper side despite rounding.
const STEP_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RecombCounts {
    /// Class 0 at the optimum, class 1 at `x`.
    pub m01: usize,
    /// Class 1 at the optimum, class 0 at `x`.
    pub m10: usize,
}

impl RecombCounts {
    pub fn new(m01: usize, m10: usize) -> Self {
        Self { m01, m10 }
    }
}

fn upper_tail(z: f64) -> f64 {
    0.5 * erfc(z / SQRT_2)
}

fn lower_tail(z: f64) -> f64 {
    0.5 * erfc(-z / SQRT_2)
}

/// Normal model of `a11 + a12` for one pair of recombinant counts.
#[derive(Debug, Clone, Copy)]
pub(crate) struct MixtureTerm {
    a2: f64,
    center: f64,
    sigma: f64,
}

/// Finite-population correction `1 - (m - 1) / (size - 1)` weighted by `m`.
fn corrected_count(m: usize, size: f64) -> f64 {
    if m == 0 {
        return 0.0;
    }
    if size <= 1.0 {
        return 0.0;
    }
    m as f64 * (1.0 - (m as f64 - 1.0) / (size - 1.0))
}

impl MixtureTerm {
    pub(crate) fn new(counts: RecombCounts, params: &BoundParams) -> Self {
        let RecombCounts { m01, m10 } = counts;
        let n = params.n as f64;
        let (n0, n1) = (params.n0 as f64, params.n1 as f64);
        let (m01f, m10f) = (m01 as f64, m10 as f64);
        let n0x = n0 + m10f - m01f;
        let n1x = n1 + m01f - m10f;
        let a2 = n0x * n1x / n;

        let (mu, a) = (params.effect_mu, params.effect_a);
        let mean_y = (n0 * mu + n1 * (mu + a)) / n;
        let a12 = n1 * (mu + a) - n1x * mean_y;
        let mu_a11 = mu * (m01f - m10f) - a * m10f;

        let s2 = params.within_class_sd * params.within_class_sd;
        let mut var = s2 * (corrected_count(m01, n0x) + corrected_count(m10, n1x));
        if var < 0.0 {
            log::trace!("negative a11 variance {var} at counts ({m01}, {m10}); clamped to 0");
            var = 0.0;
        }
        Self {
            a2,
            center: mu_a11 + a12,
            sigma: var.sqrt(),
        }
    }

    /// `P(RSS_x <= rss)` for `rss <= rss_total`.
    pub(crate) fn cdf(&self, rss: f64, rss_total: f64) -> f64 {
        if rss >= rss_total {
            return 1.0;
        }
        if self.a2 <= 0.0 {
            // Everyone in one class at x: RSS_x = RSS_t exactly.
            return 0.0;
        }
        let deficit = rss_total - rss;
        if self.sigma == 0.0 {
            let reached = self.center * self.center / self.a2 >= deficit * (1.0 - STEP_SLACK);
            return if reached { 1.0 } else { 0.0 };
        }
        let r = (deficit * self.a2).sqrt();
        upper_tail((r - self.center) / self.sigma) + lower_tail((-r - self.center) / self.sigma)
    }
}

fn check_rss(rss_x: f64, params: &BoundParams) -> Result<()> {
    if rss_x.is_nan() || rss_x > params.rss_total {
        return Err(Error::InvalidParameter(format!(
            "rss {rss_x} exceeds total SS {}",
            params.rss_total
        )));
    }
    Ok(())
}

/// CDF of `RSS_x` given the recombinant counts.
pub fn conditional_rss_cdf(rss_x: f64, counts: RecombCounts, params: &BoundParams) -> Result<f64> {
    params.validate()?;
    check_rss(rss_x, params)?;
    if counts.m01 > params.n0 || counts.m10 > params.n1 {
        return Err(Error::InvalidParameter(format!(
            "recombinant counts ({}, {}) exceed class sizes ({}, {})",
            counts.m01, counts.m10, params.n0, params.n1
        )));
    }
    Ok(MixtureTerm::new(counts, params).cdf(rss_x, params.rss_total))
}

/// Truncated binomial weights for both recombinant counts at one distance.
#[derive(Debug, Clone, Default)]
pub(crate) struct MixtureWeights {
    pub lo01: usize,
    pub w01: Vec<f64>,
    pub lo10: usize,
    pub w10: Vec<f64>,
}

impl MixtureWeights {
    pub(crate) fn new(distance_cm: f64, params: &BoundParams) -> Result<Self> {
        let p = recombination_prob(Distance::Linked(distance_cm))?;
        let mut weights = Self::default();
        let (lo, hi) = mass_window(params.n0 as u64, p);
        binomial_row_into(params.n0 as u64, p, lo, hi, &mut weights.w01)?;
        weights.lo01 = lo as usize;
        let (lo, hi) = mass_window(params.n1 as u64, p);
        binomial_row_into(params.n1 as u64, p, lo, hi, &mut weights.w10)?;
        weights.lo10 = lo as usize;
        Ok(weights)
    }

    /// Weighted sum of `f(m01, m10)` over the truncated window.
    pub(crate) fn sum(&self, mut f: impl FnMut(usize, usize) -> f64) -> f64 {
        let mut total = 0.0;
        for (i, &w01) in self.w01.iter().enumerate() {
            let mut inner = 0.0;
            for (j, &w10) in self.w10.iter().enumerate() {
                inner += w10 * f(self.lo01 + i, self.lo10 + j);
            }
            total += w01 * inner;
        }
        total
    }
}

/// CDF of `RSS_x` at genetic distance `distance_cm`, integrating the
/// recombinant counts over `mean +- 8 sd` of their binomial laws, widened
/// by [`mass_window`].
///
/// Truncation drops tail mass, so the result slightly underestimates the
/// full sum; quantiles derived from it err upwards.
pub fn marginal_rss_cdf(rss_x: f64, distance_cm: f64, params: &BoundParams) -> Result<f64> {
    params.validate()?;
    check_rss(rss_x, params)?;
    let weights = MixtureWeights::new(distance_cm, params)?;
    let value = weights.sum(|m01, m10| MixtureTerm::new(RecombCounts::new(m01, m10), params).cdf(rss_x, params.rss_total));
    Ok(value.clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn params() -> BoundParams {
        BoundParams::for_reference(100, 100.0, 75.0, 1e-9).unwrap()
    }

    #[test]
    fn no_recombinants_is_a_step_at_the_reference() {
        let p = params();
        let c = RecombCounts::new(0, 0);
        assert_eq!(conditional_rss_cdf(74.9, c, &p).unwrap(), 0.0);
        assert_eq!(conditional_rss_cdf(75.0, c, &p).unwrap(), 1.0);
        assert_eq!(conditional_rss_cdf(99.0, c, &p).unwrap(), 1.0);
    }

    #[test]
    fn full_total_is_certain() {
        let p = params();
        for (a, b) in [(0, 0), (3, 5), (10, 2)] {
            assert_eq!(conditional_rss_cdf(p.rss_total, RecombCounts::new(a, b), &p).unwrap(), 1.0);
        }
    }

    #[test]
    fn conditional_cdf_is_monotone() {
        let p = params();
        let c = RecombCounts::new(4, 6);
        let mut last = 0.0;
        for i in 0..=100 {
            let v = conditional_rss_cdf(60.0 + 0.4 * i as f64, c, &p).unwrap();
            assert!(v >= last - 1e-15);
            last = v;
        }
    }

    #[test]
    fn rejects_bad_arguments() {
        let p = params();
        assert!(conditional_rss_cdf(101.0, RecombCounts::new(0, 0), &p).is_err());
        assert!(conditional_rss_cdf(80.0, RecombCounts::new(51, 0), &p).is_err());
        assert!(marginal_rss_cdf(80.0, -1.0, &p).is_err());
    }

    #[test]
    fn zero_distance_collapses_to_no_recombinants() {
        let p = params();
        for rss in [70.0, 75.0 + 1e-9, 90.0] {
            assert_eq!(
                marginal_rss_cdf(rss, 0.0, &p).unwrap(),
                conditional_rss_cdf(rss, RecombCounts::new(0, 0), &p).unwrap()
            );
        }
    }

    #[test]
    fn marginal_cdf_is_monotone() {
        let p = params();
        let mut last = 0.0;
        for i in 0..=60 {
            let v = marginal_rss_cdf(70.0 + 0.5 * i as f64, 10.0, &p).unwrap();
            assert!(v >= last - 1e-14, "{v} < {last}");
            last = v;
        }
        assert_relative_eq!(last, 1.0, epsilon = 1e-8);
    }

    #[test]
    fn finite_population_correction() {
        assert_eq!(corrected_count(0, 50.0), 0.0);
        assert_eq!(corrected_count(1, 50.0), 1.0);
        // Drawing everyone leaves no randomness.
        assert_eq!(corrected_count(50, 50.0), 0.0);
    }
}
