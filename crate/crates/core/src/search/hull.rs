//! Potentially optimal boxes: the lower-right convex hull of
//! `(radius, value)` points.

/// Indices of boxes `j` for which some slope `K >= 0` makes
/// `value_j - K radius_j` minimal over all boxes.
///
/// Only the lowest value per radius is a candidate (earliest index wins
/// ties); collinear hull points are kept.
pub fn select_hull(points: &[(usize, f64)]) -> Vec<usize> {
    if points.is_empty() {
        return Vec::new();
    }
    let mut per_radius: Vec<usize> = Vec::new();
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| points[a].0.cmp(&points[b].0).then(points[a].1.total_cmp(&points[b].1)).then(a.cmp(&b)));
    for i in order {
        if per_radius.last().is_none_or(|&j| points[j].0 != points[i].0) {
            per_radius.push(i);
        }
    }

    let f_min = per_radius.iter().map(|&i| points[i].1).fold(f64::INFINITY, f64::min);
    let start = per_radius.iter().rposition(|&i| points[i].1 == f_min).expect("nonempty");

    let mut chain: Vec<usize> = Vec::new();
    for &i in &per_radius[start..] {
        while chain.len() >= 2 {
            let (o, a) = (points[chain[chain.len() - 2]], points[chain[chain.len() - 1]]);
            let b = points[i];
            let cross = (a.0 as f64 - o.0 as f64) * (b.1 - o.1) - (a.1 - o.1) * (b.0 as f64 - o.0 as f64);
            if cross < 0.0 {
                chain.pop();
            } else {
                break;
            }
        }
        chain.push(i);
    }
    let mut selected: Vec<usize> = per_radius[..start].iter().copied().filter(|&i| points[i].1 == f_min).collect();
    selected.extend(chain);
    selected.sort_unstable();
    selected
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Selected iff the feasible slope interval for `j` is nonempty.
    fn brute_force(points: &[(usize, f64)]) -> Vec<usize> {
        let mut out = Vec::new();
        for (j, &(rj, fj)) in points.iter().enumerate() {
            let earliest_min = points
                .iter()
                .enumerate()
                .filter(|(_, p)| p.0 == rj)
                .min_by(|a, b| a.1 .1.total_cmp(&b.1 .1).then(a.0.cmp(&b.0)))
                .map(|(i, _)| i);
            if earliest_min != Some(j) {
                continue;
            }
            let (mut k_lo, mut k_hi) = (0.0f64, f64::INFINITY);
            for &(ri, fi) in points {
                // fj - K rj <= fi - K ri  <=>  K (ri - rj) <= fi - fj
                let dr = ri as f64 - rj as f64;
                let df = fi - fj;
                if dr > 0.0 {
                    k_hi = k_hi.min(df / dr);
                } else if dr < 0.0 {
                    k_lo = k_lo.max(df / dr);
                } else if df < 0.0 {
                    k_hi = -1.0;
                }
            }
            if k_lo <= k_hi {
                out.push(j);
            }
        }
        out
    }

    #[test]
    fn equal_radii_select_the_minimum() {
        let pts = [(5, 3.0), (5, 1.0), (5, 2.0), (5, 1.0)];
        assert_eq!(select_hull(&pts), vec![1]);
    }

    #[test]
    fn larger_and_lower_keeps_both() {
        assert_eq!(select_hull(&[(2, 3.0), (6, 4.0)]), vec![0, 1]);
        assert_eq!(select_hull(&[(2, 3.0), (6, 2.0)]), vec![1]);
    }

    #[test]
    fn collinear_points_are_kept() {
        let pts = [(1, 1.0), (2, 2.0), (3, 3.0)];
        assert_eq!(select_hull(&pts), vec![0, 1, 2]);
        assert_eq!(brute_force(&pts), vec![0, 1, 2]);
    }

    #[test]
    fn dominated_point_is_dropped() {
        // (3, 5) lies above the segment from (1, 1) to (5, 2).
        assert_eq!(select_hull(&[(1, 1.0), (3, 5.0), (5, 2.0)]), vec![0, 2]);
    }

    proptest! {
        #[test]
        fn matches_brute_force(raw in prop::collection::vec((0usize..12, 0u8..16), 1..40)) {
            let pts: Vec<(usize, f64)> = raw.iter().map(|&(r, f)| (r, f as f64 * 0.25)).collect();
            prop_assert_eq!(select_hull(&pts), brute_force(&pts));
        }

        #[test]
        fn strictly_dominated_is_never_selected(raw in prop::collection::vec((0usize..30, -10.0f64..10.0), 1..50)) {
            let sel = select_hull(&raw);
            for &j in &sel {
                for &(r, f) in &raw {
                    prop_assert!(!(r > raw[j].0 && f < raw[j].1));
                }
            }
        }
    }
}
