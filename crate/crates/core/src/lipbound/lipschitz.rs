//! Infinite-population residual variance and its LogVar transform.
//!
//! With QTL `i` explaining `V_gi` and a model locus at distance `x_i` from
//! it, `V_r = V_t - sum_i V_gi exp(-4 |x_i| / 100)`. Under
//! `f = -ln(V_t - V_r)` each partial derivative is bounded by 0.04 per cM.

/// Bound on `|df/dx_i|` per centimorgan.
pub const LIPSCHITZ_PER_CM: f64 = 0.04;

/// Expected residual variance for model loci at `distances_cm[i]` from QTL
/// with genetic variances `genetic_variances[i]`.
pub fn expected_residual_variance(total_variance: f64, genetic_variances: &[f64], distances_cm: &[f64]) -> f64 {
    debug_assert_eq!(genetic_variances.len(), distances_cm.len());
    total_variance
        - genetic_variances
            .iter()
            .zip(distances_cm)
            .map(|(vg, x)| vg * (-4.0 * x.abs() / 100.0).exp())
            .sum::<f64>()
}

/// `-ln(V_t - V_r)` of [`expected_residual_variance`].
pub fn expected_logvar(total_variance: f64, genetic_variances: &[f64], distances_cm: &[f64]) -> f64 {
    let vr = expected_residual_variance(total_variance, genetic_variances, distances_cm);
    -(total_variance - vr).ln()
}
