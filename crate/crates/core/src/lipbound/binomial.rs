//! Whole rows of binomial probabilities by forward recurrence.
//!
//! `B(k+1) = B(k) * (n-k)/(k+1) * p/(1-p)`, carried as a mantissa with a
//! separate binary exponent so rows far outside the `f64` range (e.g.
//! `0.5^5000`) stay exact up to rounding.

use std::ops::RangeInclusive;

use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// Mantissas are renormalised once they leave `[2^-256, 2^256]`.
const RENORM_LIMIT: f64 = 1.157_920_892_373_162e77;

#[derive(Debug, Clone, Copy)]
struct Scaled {
    mantissa: f64,
    exponent: i64,
}

impl Scaled {
    fn one() -> Self {
        Self {
            mantissa: 1.0,
            exponent: 0,
        }
    }

    fn from_f64(v: f64) -> Self {
        let mut s = Self {
            mantissa: v,
            exponent: 0,
        };
        s.renormalize();
        s
    }

    fn renormalize(&mut self) {
        let m = self.mantissa;
        if m == 0.0 || !m.is_finite() {
            return;
        }
        let bits = m.to_bits();
        let biased = ((bits >> 52) & 0x7ff) as i64;
        if biased == 0 {
            // Subnormal: scale into the normal range first.
            self.mantissa = m * 2f64.powi(64);
            self.exponent -= 64;
            self.renormalize();
            return;
        }
        self.exponent += biased - 1023;
        self.mantissa = f64::from_bits((bits & !(0x7ffu64 << 52)) | (1023u64 << 52));
    }

    fn mul(self, other: Self) -> Self {
        let mut out = Self {
            mantissa: self.mantissa * other.mantissa,
            exponent: self.exponent + other.exponent,
        };
        out.renormalize();
        out
    }

    fn powi(self, mut k: u64) -> Self {
        let mut result = Self::one();
        let mut base = self;
        while k > 0 {
            if k & 1 == 1 {
                result = result.mul(base);
            }
            base = base.mul(base);
            k >>= 1;
        }
        result
    }

    #[cfg(test)]
    fn to_f64(self) -> f64 {
        scale_pow2(self.mantissa, self.exponent)
    }
}

/// `m * 2^e`, flushing to zero below the subnormal range.
fn scale_pow2(m: f64, e: i64) -> f64 {
    if m == 0.0 || e < -1200 {
        return 0.0;
    }
    if e > 1023 {
        return m * f64::INFINITY;
    }
    if e >= -1022 {
        return m * f64::from_bits(((e + 1023) as u64) << 52);
    }
    // Two steps so the intermediate power of two stays normal.
    let first = m * f64::from_bits(((-600i64 + 1023) as u64) << 52);
    first * f64::from_bits(((e + 600 + 1023) as u64) << 52)
}

/// Binomial pmf `B(k; n_trials, p)` for every `k` in `range`.
pub fn binomial_row(n_trials: u64, p: f64, range: RangeInclusive<u64>) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    binomial_row_into(n_trials, p, *range.start(), *range.end(), &mut out)?;
    Ok(out)
}

/// Like [`binomial_row`] but reuses `out`. Work is linear in `hi`.
pub fn binomial_row_into(n_trials: u64, p: f64, lo: u64, hi: u64, out: &mut Vec<f64>) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!("probability must be in [0, 1], got {p}")));
    }
    if lo > hi || hi > n_trials {
        return Err(Error::InvalidParameter(format!("index range {lo}..={hi} outside 0..={n_trials}")));
    }
    out.clear();
    out.reserve((hi - lo + 1) as usize);
    if p == 0.0 || p == 1.0 {
        let mass_at = if p == 0.0 { 0 } else { n_trials };
        out.extend((lo..=hi).map(|k| if k == mass_at { 1.0 } else { 0.0 }));
        return Ok(());
    }
    let q = 1.0 - p;
    let odds = p / q;
    let start = Scaled::from_f64(q).powi(n_trials);
    let mut mantissa = start.mantissa;
    let mut exponent = start.exponent;
    for k in 0..=hi {
        if k >= lo {
            out.push(scale_pow2(mantissa, exponent));
        }
        if k == hi {
            break;
        }
        mantissa *= (n_trials - k) as f64 * odds / (k + 1) as f64;
        if !(1.0 / RENORM_LIMIT..=RENORM_LIMIT).contains(&mantissa) {
            let mut s = Scaled { mantissa, exponent };
            s.renormalize();
            mantissa = s.mantissa;
            exponent = s.exponent;
        }
    }
    Ok(())
}

/// `mean +- 8 sd` window of a binomial, clamped to `[0, n_trials]`.
pub fn truncation_window(n_trials: u64, p: f64) -> (u64, u64) {
    let n = n_trials as f64;
    let mean = n * p;
    let half = 8.0 * (n * p * (1.0 - p)).max(0.0).sqrt();
    let lo = (mean - half).floor().max(0.0) as u64;
    let hi = ((mean + half).ceil() as u64).min(n_trials);
    (lo.min(hi), hi)
}

/// Bound on the binomial mass left outside [`mass_window`].
pub const TAIL_TOLERANCE: f64 = 1e-16;

fn ln_pmf(k: u64, n: u64, p: f64) -> f64 {
    let (kf, nf) = (k as f64, n as f64);
    ln_gamma(nf + 1.0) - ln_gamma(kf + 1.0) - ln_gamma(nf - kf + 1.0) + kf * p.ln() + (nf - kf) * (1.0 - p).ln()
}

/// [`truncation_window`] widened until each excluded tail holds at most
/// [`TAIL_TOLERANCE`].
///
/// Small `n p` leaves far more than that beyond `mean + 8 sd`.
pub fn mass_window(n_trials: u64, p: f64) -> (u64, u64) {
    let (mut lo, mut hi) = truncation_window(n_trials, p);
    if p <= 0.0 || p >= 1.0 {
        return (lo, hi);
    }
    let q = 1.0 - p;
    // Past the mode the pmf ratio r is decreasing, so the tail is at most
    // pmf * r / (1 - r).
    while hi < n_trials {
        let r = (n_trials - hi) as f64 * p / ((hi + 1) as f64 * q);
        if r < 1.0 && ln_pmf(hi, n_trials, p) + (r / (1.0 - r)).ln() < TAIL_TOLERANCE.ln() {
            break;
        }
        hi += 1;
    }
    while lo > 0 {
        let s = lo as f64 * q / ((n_trials - lo + 1) as f64 * p);
        if s < 1.0 && ln_pmf(lo, n_trials, p) + (s / (1.0 - s)).ln() < TAIL_TOLERANCE.ln() {
            break;
        }
        lo -= 1;
    }
    (lo, hi)
}

#[cfg(test)]
fn pow_carried(base: f64, k: u64) -> f64 {
    Scaled::from_f64(base).powi(k).to_f64()
}
