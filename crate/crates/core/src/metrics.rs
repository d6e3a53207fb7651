//! Scores of a reconstruction against a known scene.

use crate::geometry::ParametricCurve;
use crate::inversion::IndicatorGrid;
use crate::Point;

/// Pairing of estimated and true source locations.
#[derive(Clone, Debug, PartialEq)]
pub struct SourceMatch {
    /// For each true source: the index of its estimate and the distance.
    pub assignments: Vec<Option<(usize, f64)>>,
    pub tolerance: f64,
    /// Estimates not assigned to any true source.
    pub spurious: Vec<usize>,
}

impl SourceMatch {
    pub fn matched(&self) -> usize {
        self.assignments.iter().filter(|a| a.is_some()).count()
    }

    /// Indices of true sources without an estimate within tolerance.
    pub fn missed(&self) -> Vec<usize> {
        self.assignments
            .iter()
            .enumerate()
            .filter_map(|(i, a)| a.is_none().then_some(i))
            .collect()
    }

    pub fn all_matched(&self) -> bool {
        self.matched() == self.assignments.len()
    }

    pub fn worst_distance(&self) -> Option<f64> {
        self.assignments.iter().flatten().map(|a| a.1).reduce(f64::max)
    }
}

/// One-to-one matching by increasing distance; pairs farther than `tolerance` are left out.
pub fn match_sources(estimates: &[Point], truth: &[Point], tolerance: f64) -> SourceMatch {
    let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
    for (t, p) in truth.iter().enumerate() {
        for (e, q) in estimates.iter().enumerate() {
            let d = p.distance(*q);
            if d <= tolerance {
                pairs.push((d, t, e));
            }
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut assignments = vec![None; truth.len()];
    let mut used = vec![false; estimates.len()];
    for (d, t, e) in pairs {
        if assignments[t].is_none() && !used[e] {
            assignments[t] = Some((e, d));
            used[e] = true;
        }
    }
    let spurious = (0..estimates.len()).filter(|&e| !used[e]).collect();
    SourceMatch {
        assignments,
        tolerance,
        spurious,
    }
}

/// Fraction of the `top_fraction` largest `|value|` grid points lying within
/// `band` of at least one of the curves.
pub fn boundary_concentration(g: &IndicatorGrid, curves: &[ParametricCurve], top_fraction: f64, band: f64) -> f64 {
    let mut samples: Vec<(Point, f64)> = g.samples().map(|(p, v)| (p, v.abs())).collect();
    samples.sort_by(|a, b| b.1.total_cmp(&a.1));
    let count = ((top_fraction * samples.len() as f64).ceil() as usize).clamp(1, samples.len());
    let near = samples[..count]
        .iter()
        .filter(|(p, _)| curves.iter().any(|c| c.distance(*p) <= band))
        .count();
    near as f64 / count as f64
}
