//! Box geometry on the lattice: chromosome-combination boxes and trisection.

use serde::{Deserialize, Serialize};

use crate::genome::GeneticMap;

/// An axis-aligned block of lattice points inside one cc-box.
///
/// Every coordinate is a locus index on chromosome `cc[i]`; bounds are
/// inclusive and `center[i]` is the floor or ceiling of the midpoint.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoxShape {
    pub cc: Vec<usize>,
    pub lo: Vec<usize>,
    pub hi: Vec<usize>,
    pub center: Vec<usize>,
}

/// A child produced by [`split`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Child {
    pub shape: BoxShape,
    /// Shares the parent's center and therefore its value.
    pub inherits: bool,
}

impl BoxShape {
    pub fn dims(&self) -> usize {
        self.cc.len()
    }

    pub fn count(&self, dim: usize) -> usize {
        self.hi[dim] - self.lo[dim] + 1
    }

    pub fn volume(&self) -> u128 {
        (0..self.dims()).map(|i| self.count(i) as u128).product()
    }

    pub fn is_resolved(&self) -> bool {
        self.lo == self.hi
    }

    /// Largest distance from the center to a bound, in lattice steps.
    pub fn half_width(&self, dim: usize) -> usize {
        (self.center[dim] - self.lo[dim]).max(self.hi[dim] - self.center[dim])
    }

    pub fn half_widths_cm(&self, step_cm: f64) -> Vec<f64> {
        (0..self.dims()).map(|i| self.half_width(i) as f64 * step_cm).collect()
    }

    /// Manhattan radius in lattice steps.
    pub fn radius_steps(&self) -> usize {
        (0..self.dims()).map(|i| self.half_width(i)).sum()
    }

    pub fn radius_cm(&self, step_cm: f64) -> f64 {
        self.radius_steps() as f64 * step_cm
    }

    /// Global lattice indices of the center, sorted.
    pub fn center_key(&self, map: &GeneticMap) -> Vec<usize> {
        let mut key: Vec<usize> = self.cc.iter().zip(&self.center).map(|(&c, &l)| map.first_point(c) + l).collect();
        key.sort_unstable();
        key
    }

    pub fn contains(&self, point: &[usize]) -> bool {
        point.len() == self.dims() && (0..self.dims()).all(|i| (self.lo[i]..=self.hi[i]).contains(&point[i]))
    }

    /// Dimension with the most lattice points, lowest index on ties.
    pub fn majoring_dim(&self) -> usize {
        let mut best = 0;
        for i in 1..self.dims() {
            if self.count(i) > self.count(best) {
                best = i;
            }
        }
        best
    }
}

/// Non-decreasing `d`-tuples over `0..n`, in lexicographic order.
pub fn multisets(n: usize, d: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if d == 0 || n == 0 {
        return out;
    }
    let mut cur = vec![0; d];
    loop {
        out.push(cur.clone());
        let Some(i) = (0..d).rev().find(|&i| cur[i] + 1 < n) else {
            return out;
        };
        let v = cur[i] + 1;
        cur[i..].iter_mut().for_each(|c| *c = v);
    }
}

fn midpoint_toward(lo: usize, hi: usize, target: usize) -> usize {
    let sum = lo + hi;
    if sum % 2 == 0 || target * 2 < sum {
        sum / 2
    } else {
        sum / 2 + 1
    }
}

/// One full-extent box per multiset of `d` chromosomes.
pub fn init_ccboxes(map: &GeneticMap, d: usize) -> Vec<BoxShape> {
    multisets(map.n_chromosomes(), d)
        .into_iter()
        .map(|cc| {
            let hi: Vec<usize> = cc.iter().map(|&c| map.loci_on(c) - 1).collect();
            let center = hi.iter().map(|&h| h / 2).collect();
            BoxShape {
                lo: vec![0; d],
                hi,
                center,
                cc,
            }
        })
        .collect()
}

/// Trisect along the majoring dimension.
///
/// Returns nothing for a resolved box. A two-point dimension yields two
/// single-point children.
pub fn split(shape: &BoxShape) -> Vec<Child> {
    if shape.is_resolved() {
        return Vec::new();
    }
    let dim = shape.majoring_dim();
    let (lo, hi, c) = (shape.lo[dim], shape.hi[dim], shape.center[dim]);
    let count = hi - lo + 1;
    let with = |l: usize, h: usize, center: usize| {
        let mut s = shape.clone();
        s.lo[dim] = l;
        s.hi[dim] = h;
        s.center[dim] = center;
        Child {
            inherits: center == c,
            shape: s,
        }
    };
    if count == 2 {
        return vec![with(lo, lo, lo), with(hi, hi, hi)];
    }
    let b = count / 3;
    let (s0, s1) = match count % 3 {
        0 => (b, b),
        1 => (b, b + 1),
        _ => (b + 1, b),
    };
    let (l1, h1) = (lo + s0, lo + s0 + s1 - 1);
    debug_assert!((l1..=h1).contains(&c));
    vec![
        with(lo, l1 - 1, midpoint_toward(lo, l1 - 1, c)),
        with(l1, h1, c),
        with(h1 + 1, hi, midpoint_toward(h1 + 1, hi, c)),
    ]
}
