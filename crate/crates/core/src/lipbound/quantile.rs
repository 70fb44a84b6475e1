//! `1 - epsilon` quantiles of the LogVar at a given distance from a
//! hypothetical optimum, solved by bisection on a fixed LogVar grid.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::cdf::{MixtureTerm, MixtureWeights, RecombCounts};
use super::BoundParams;
use crate::error::{Error, Result};
use crate::regmodel::{logvar_ceiling, logvar_transform};

/// LogVar grid spacing; equivalent to 1 cM of slope.
pub const LOGVAR_RESOLUTION: f64 = 0.04;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quantile {
    pub logvar: f64,
    pub rss: f64,
    /// The CDF never reached `1 - epsilon`; the value is the LogVar ceiling.
    pub saturated: bool,
}

/// One row of a dumped [`QuantileTable`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantileEntry {
    pub radius_cm: f64,
    pub logvar: f64,
    pub rss: f64,
    pub saturated: bool,
}

/// Quantile solver for one reference value.
///
/// Conditional CDF values are cached per grid point and shared across
/// distances; solved grid indices seed the brackets of later distances.
#[derive(Debug, Clone)]
pub struct QuantileSolver {
    params: BoundParams,
    base: f64,
    ceiling: f64,
    grid_len: usize,
    terms: Vec<MixtureTerm>,
    phi: HashMap<usize, Vec<f64>>,
    solved: BTreeMap<u64, usize>,
}

fn distance_key(distance_cm: f64) -> u64 {
    (distance_cm * 1e6).round() as u64
}

impl QuantileSolver {
    pub fn new(params: BoundParams) -> Result<Self> {
        params.validate()?;
        let base = logvar_transform(params.reference_rss, params.rss_total, params.n)?;
        let ceiling = logvar_ceiling(params.rss_total, params.n);
        let grid_len = ((ceiling - base) / LOGVAR_RESOLUTION).ceil().max(0.0) as usize;
        let terms = (0..=params.n0)
            .flat_map(|m01| (0..=params.n1).map(move |m10| RecombCounts::new(m01, m10)))
            .map(|c| MixtureTerm::new(c, &params))
            .collect();
        Ok(Self {
            params,
            base,
            ceiling,
            grid_len,
            terms,
            phi: HashMap::new(),
            solved: BTreeMap::new(),
        })
    }

    pub fn params(&self) -> &BoundParams {
        &self.params
    }

    fn grid_logvar(&self, k: usize) -> f64 {
        if k >= self.grid_len {
            self.ceiling
        } else {
            self.base + k as f64 * LOGVAR_RESOLUTION
        }
    }

    fn grid_rss(&self, k: usize) -> f64 {
        if k >= self.grid_len {
            return self.params.rss_total;
        }
        let explained = self.params.n as f64 * (-self.grid_logvar(k)).exp();
        (self.params.rss_total - explained).clamp(0.0, self.params.rss_total)
    }

    fn marginal(&mut self, k: usize, weights: &MixtureWeights) -> f64 {
        let rss = self.grid_rss(k);
        let rss_total = self.params.rss_total;
        let width = self.params.n1 + 1;
        let cells = self.terms.len();
        let cache = self.phi.entry(k).or_insert_with(|| vec![f64::NAN; cells]);
        let terms = &self.terms;
        weights.sum(|m01, m10| {
            let idx = m01 * width + m10;
            let cached = cache[idx];
            if cached.is_nan() {
                let v = terms[idx].cdf(rss, rss_total);
                cache[idx] = v;
                v
            } else {
                cached
            }
        })
    }

    fn bracket_hint(&self, key: u64) -> (usize, usize) {
        let lo = self.solved.range(..=key).next_back().map_or(0, |(_, &k)| k);
        let hi = self.solved.range(key..).next().map_or(self.grid_len, |(_, &k)| k);
        (lo.min(hi), hi)
    }

    /// Quantile of LogVar at `distance_cm`, rounded up to the grid.
    pub fn solve(&mut self, distance_cm: f64) -> Result<Quantile> {
        if !(distance_cm >= 0.0 && distance_cm.is_finite()) {
            return Err(Error::InvalidDistance(distance_cm));
        }
        let key = distance_key(distance_cm);
        let weights = MixtureWeights::new(distance_cm, &self.params)?;
        let target = 1.0 - self.params.epsilon;

        let (mut lo, mut hi) = self.bracket_hint(key);
        if self.marginal(hi, &weights) < target {
            hi = self.grid_len;
            if self.marginal(hi, &weights) < target {
                log::debug!("quantile at {distance_cm} cM saturates at the LogVar ceiling");
                return Ok(Quantile {
                    logvar: self.ceiling,
                    rss: self.params.rss_total,
                    saturated: true,
                });
            }
        }
        if lo > 0 && self.marginal(lo - 1, &weights) >= target {
            lo = 0;
        }
        // Invariant: G(hi) >= target, and G(k) < target for k < lo.
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            if self.marginal(mid, &weights) >= target {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        self.solved.insert(key, hi);
        Ok(Quantile {
            logvar: self.grid_logvar(hi),
            rss: self.grid_rss(hi),
            saturated: false,
        })
    }
}

/// One-off `1 - epsilon` LogVar quantile at `distance_cm`.
pub fn logvar_quantile(distance_cm: f64, params: &BoundParams) -> Result<f64> {
    Ok(QuantileSolver::new(*params)?.solve(distance_cm)?.logvar)
}

/// Quantiles by box radius for a single reference value.
#[derive(Debug, Clone)]
pub struct QuantileTable {
    solver: QuantileSolver,
    step_cm: f64,
    entries: BTreeMap<usize, Quantile>,
}

impl QuantileTable {
    pub fn new(params: BoundParams, step_cm: f64) -> Result<Self> {
        if !(step_cm > 0.0 && step_cm.is_finite()) {
            return Err(Error::InvalidParameter(format!("step must be positive, got {step_cm}")));
        }
        Ok(Self {
            solver: QuantileSolver::new(params)?,
            step_cm,
            entries: BTreeMap::new(),
        })
    }

    pub fn params(&self) -> &BoundParams {
        self.solver.params()
    }

    pub fn reference_rss(&self) -> f64 {
        self.solver.params().reference_rss
    }

    /// Quantile at a Manhattan radius of `radius_steps` lattice steps.
    pub fn get(&mut self, radius_steps: usize) -> Result<Quantile> {
        if let Some(&q) = self.entries.get(&radius_steps) {
            return Ok(q);
        }
        let q = self.solver.solve(radius_steps as f64 * self.step_cm)?;
        self.entries.insert(radius_steps, q);
        Ok(q)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> Vec<QuantileEntry> {
        self.entries
            .iter()
            .map(|(&r, q)| QuantileEntry {
                radius_cm: r as f64 * self.step_cm,
                logvar: q.logvar,
                rss: q.rss,
                saturated: q.saturated,
            })
            .collect()
    }
}
