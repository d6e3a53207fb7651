//! Decoupling of the phaseless data and the two imaging functionals.
//!
//! From the moduli of `u(x; P) + t u(x; z)` at `t = 0, sigma, 2 sigma` one
//! recovers, entry by entry,
//!
//! ```text
//! |u(x; z)| = sqrt(m2^2 - 2 m1^2 + m0^2) / (sqrt(2) sigma)
//! Theta     = (2 m1^2 - m2^2 / 2 - 3 m0^2 / 2) / sigma = 2 Re(u(x; P) conj(u(x; z)))
//! ```
//!
//! The obstacle indicator back-propagates `Upsilon = (|u|^2 - |Phi|^2) / Phi`
//! through the fundamental solution,
//! `I_D(y) = -k^2 Im sum_z sum_x Phi(y,z) Phi(x,y) Upsilon(x,z) w_x w_z`,
//! and the source indicator is
//! `I_P(y) = 1/(rho sqrt(R)) Re sum_x sum_z e^{ik(|x-y| - |x-z|)} |x-z|^{1/2} Theta(x,z) w_x w_z`.
//! Both sums are trapezoidal rules on the rings with weight arc length / count.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::acquisition::PhaselessDataset;
use crate::geometry::SamplingGrid;
use crate::specialfn::fundamental_solution;
use crate::{Error, Point, Result};

/// Obstacle grids whose peak magnitude is below this fraction of the
/// reference scale are treated as identically zero.
pub const DEGENERATE_RATIO: f64 = 1e-9;

/// `|u(x; z)|` for one entry; the flag reports a clamped negative radicand.
pub fn recover_entry(m0: f64, m1: f64, m2: f64, sigma: f64) -> (f64, bool) {
    let radicand = m2 * m2 - 2.0 * m1 * m1 + m0 * m0;
    if radicand < 0.0 {
        (0.0, true)
    } else {
        (radicand.sqrt() / (std::f64::consts::SQRT_2 * sigma), false)
    }
}

/// `Theta(x, z, P)` for one entry.
pub fn theta_entry(m0: f64, m1: f64, m2: f64, sigma: f64) -> f64 {
    (2.0 * m1 * m1 - 0.5 * m2 * m2 - 1.5 * m0 * m0) / sigma
}

/// Recovered `|u(x_i; z_j)|` with the number of clamped entries.
#[derive(Clone, Debug, PartialEq)]
pub struct RecoveredModulus {
    pub values: DMatrix<f64>,
    pub clamped: usize,
}

impl RecoveredModulus {
    pub fn clamped_fraction(&self) -> f64 {
        self.clamped as f64 / self.values.len().max(1) as f64
    }
}

fn check_dataset(ds: &PhaselessDataset) -> Result<()> {
    if !(ds.geometry.sigma > 0.0) {
        return Err(Error::config(format!("sigma must be positive, got {}", ds.geometry.sigma)));
    }
    ds.validate()
}

pub fn recover_modulus(ds: &PhaselessDataset) -> Result<RecoveredModulus> {
    check_dataset(ds)?;
    let sigma = ds.geometry.sigma;
    let mut clamped = 0;
    let values = DMatrix::from_fn(ds.n_rx(), ds.n_ref(), |i, j| {
        let (v, c) = recover_entry(ds.m0[i], ds.m1[(i, j)], ds.m2[(i, j)], sigma);
        clamped += c as usize;
        v
    });
    Ok(RecoveredModulus { values, clamped })
}

pub fn theta(ds: &PhaselessDataset) -> Result<DMatrix<f64>> {
    check_dataset(ds)?;
    let sigma = ds.geometry.sigma;
    Ok(DMatrix::from_fn(ds.n_rx(), ds.n_ref(), |i, j| {
        theta_entry(ds.m0[i], ds.m1[(i, j)], ds.m2[(i, j)], sigma)
    }))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IndicatorKind {
    Obstacle,
    Source,
}

/// Indicator values on a sampling grid, stored `ny x nx` (row `iy`, column `ix`).
#[derive(Clone, Debug, PartialEq)]
pub struct IndicatorGrid {
    pub grid: SamplingGrid,
    pub values: DMatrix<f64>,
    pub kind: IndicatorKind,
    pub normalized: bool,
    /// Set by [`normalize`] when the grid is (numerically) identically zero.
    pub degenerate: bool,
    /// Magnitude the indicator would reach for data of the size of the
    /// incident field; zero when no such scale applies.
    pub reference_scale: f64,
}

impl IndicatorGrid {
    pub fn value(&self, ix: usize, iy: usize) -> f64 {
        self.values[(iy, ix)]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Grid indices `(ix, iy)` of the largest value.
    pub fn argmax(&self) -> (usize, usize) {
        let mut best = (0, 0);
        let mut top = f64::NEG_INFINITY;
        for iy in 0..self.grid.ny {
            for ix in 0..self.grid.nx {
                if self.value(ix, iy) > top {
                    top = self.value(ix, iy);
                    best = (ix, iy);
                }
            }
        }
        best
    }

    /// Points and values, row-major with `y` outer.
    pub fn samples(&self) -> impl Iterator<Item = (Point, f64)> + '_ {
        (0..self.grid.ny).flat_map(move |iy| (0..self.grid.nx).map(move |ix| (self.grid.point(ix, iy), self.value(ix, iy))))
    }
}

fn sweep(grid: &SamplingGrid, f: impl Fn(Point) -> Result<f64> + Sync) -> Result<DMatrix<f64>> {
    let rows: Vec<Vec<f64>> = (0..grid.ny)
        .into_par_iter()
        .map(|iy| (0..grid.nx).map(|ix| f(grid.point(ix, iy))).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;
    Ok(DMatrix::from_fn(grid.ny, grid.nx, |iy, ix| rows[iy][ix]))
}

/// Reverse-time-migration indicator of the obstacle boundary.
pub fn indicator_obstacle(ds: &PhaselessDataset, grid: &SamplingGrid) -> Result<IndicatorGrid> {
    let recovered = recover_modulus(ds)?;
    let k = ds.k;
    let receivers = ds.geometry.receivers.points();
    let references = ds.geometry.references.points();
    let (wx, wz) = (ds.geometry.receivers.weight(), ds.geometry.references.weight());
    let nz = references.len();

    let mut upsilon = Vec::with_capacity(receivers.len() * nz);
    let mut incident_max: f64 = 0.0;
    for (i, &x) in receivers.iter().enumerate() {
        for (j, &z) in references.iter().enumerate() {
            let ui = fundamental_solution(k, x, z)?;
            let modulus2 = ui.norm_sqr();
            if modulus2.sqrt() < 1e-300 {
                return Err(Error::Numeric(format!("incident field vanishes at receiver {i}, reference {j}")));
            }
            incident_max = incident_max.max(modulus2.sqrt());
            let u = recovered.values[(i, j)];
            upsilon.push((u * u - modulus2) / ui);
        }
    }

    let phis = |y: Point, pts: &[Point], w: f64| -> Result<Vec<Complex64>> {
        pts.iter().map(|&p| fundamental_solution(k, p, y).map(|v| v * w)).collect()
    };

    let values = sweep(grid, |y| {
        let a = phis(y, &references, wz)?;
        let b = phis(y, &receivers, wx)?;
        let mut total = Complex64::new(0.0, 0.0);
        for (i, bi) in b.iter().enumerate() {
            let row = &upsilon[i * nz..(i + 1) * nz];
            let inner: Complex64 = row.iter().zip(&a).map(|(u, aj)| u * aj).sum();
            total += bi * inner;
        }
        Ok(-k * k * total.im)
    })?;

    let center = Point::new(0.5 * (grid.xmin + grid.xmax), 0.5 * (grid.ymin + grid.ymax));
    let sum_abs = |pts: &[Point], w: f64| -> Result<f64> {
        Ok(phis(center, pts, w)?.iter().map(|v| v.norm()).sum())
    };
    let reference_scale = k * k * sum_abs(&references, wz)? * sum_abs(&receivers, wx)? * incident_max;

    Ok(IndicatorGrid {
        grid: *grid,
        values,
        kind: IndicatorKind::Obstacle,
        normalized: false,
        degenerate: false,
        reference_scale,
    })
}

/// Direct-sampling indicator of the point sources.
/// Source indicator with the `y`-independent reference sum precomputed, so
/// each evaluation costs one pass over the receivers.
#[derive(Clone, Debug)]
pub struct SourceIndicator {
    k: f64,
    scale: f64,
    receivers: Vec<Point>,
    g: Vec<Complex64>,
}

impl SourceIndicator {
    pub fn new(ds: &PhaselessDataset) -> Result<Self> {
        let th = theta(ds)?;
        let k = ds.k;
        let receivers = ds.geometry.receivers.points();
        let references = ds.geometry.references.points();
        let (wx, wz) = (ds.geometry.receivers.weight(), ds.geometry.references.weight());
        let scale = 1.0 / (ds.geometry.references.radius() * ds.geometry.receivers.radius().sqrt());
        let g = receivers
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                references
                    .iter()
                    .enumerate()
                    .map(|(j, &z)| {
                        let d = x.distance(z);
                        Complex64::from_polar(d.sqrt() * th[(i, j)] * wz, -k * d)
                    })
                    .sum::<Complex64>()
                    * wx
            })
            .collect();
        Ok(SourceIndicator { k, scale, receivers, g })
    }

    pub fn eval(&self, y: Point) -> f64 {
        let mut total = 0.0;
        for (&x, gi) in self.receivers.iter().zip(&self.g) {
            total += (Complex64::from_polar(1.0, self.k * x.distance(y)) * gi).re;
        }
        self.scale * total
    }
}

pub fn indicator_source(ds: &PhaselessDataset, grid: &SamplingGrid) -> Result<IndicatorGrid> {
    let ind = SourceIndicator::new(ds)?;
    let values = sweep(grid, |y| Ok(ind.eval(y)))?;
    Ok(IndicatorGrid {
        grid: *grid,
        values,
        kind: IndicatorKind::Source,
        normalized: false,
        degenerate: false,
        reference_scale: 0.0,
    })
}

/// Divides by the largest absolute value. Grids that are zero, or negligible
/// against their reference scale, are returned unchanged and flagged.
pub fn normalize(g: &IndicatorGrid) -> IndicatorGrid {
    let mut out = g.clone();
    let m = g.max_abs();
    if m == 0.0 || m <= DEGENERATE_RATIO * g.reference_scale {
        out.degenerate = true;
        return out;
    }
    out.values /= m;
    out.normalized = true;
    out.degenerate = false;
    out
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Peak {
    pub point: Point,
    pub value: f64,
    pub ix: usize,
    pub iy: usize,
}

/// Significant local maxima of an indicator.
#[derive(Clone, Debug, PartialEq)]
pub struct PeakSet {
    /// Sorted by descending value.
    pub peaks: Vec<Peak>,
    pub tau: f64,
    pub min_sep: f64,
}

impl PeakSet {
    pub fn len(&self) -> usize {
        self.peaks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.peaks.is_empty()
    }

    pub fn points(&self) -> Vec<Point> {
        self.peaks.iter().map(|p| p.point).collect()
    }
}

/// Default threshold fraction for [`extract_peaks`].
pub const DEFAULT_TAU: f64 = 0.5;

/// Half a wavelength.
pub fn default_min_sep(k: f64) -> f64 {
    std::f64::consts::PI / k
}

/// Grid points strictly above all their (up to 8) neighbours with value at
/// least `tau * max`, accepted greedily by descending value while keeping a
/// pairwise distance of at least `min_sep`.
pub fn extract_peaks(g: &IndicatorGrid, tau: f64, min_sep: f64) -> PeakSet {
    let (nx, ny) = (g.grid.nx, g.grid.ny);
    let top = g.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut candidates = Vec::new();
    if top > 0.0 {
        let threshold = tau * top;
        for iy in 0..ny {
            for ix in 0..nx {
                let v = g.value(ix, iy);
                if v < threshold {
                    continue;
                }
                let mut is_max = true;
                'nbrs: for dy in -1isize..=1 {
                    for dx in -1isize..=1 {
                        if dx == 0 && dy == 0 {
                            continue;
                        }
                        let (jx, jy) = (ix as isize + dx, iy as isize + dy);
                        if jx < 0 || jy < 0 || jx >= nx as isize || jy >= ny as isize {
                            continue;
                        }
                        if g.value(jx as usize, jy as usize) >= v {
                            is_max = false;
                            break 'nbrs;
                        }
                    }
                }
                if is_max {
                    candidates.push(Peak {
                        point: g.grid.point(ix, iy),
                        value: v,
                        ix,
                        iy,
                    });
                }
            }
        }
    }
    candidates.sort_by(|a, b| b.value.total_cmp(&a.value).then((a.iy, a.ix).cmp(&(b.iy, b.ix))));
    let mut peaks: Vec<Peak> = Vec::new();
    for c in candidates {
        if peaks.iter().all(|p| p.point.distance(c.point) >= min_sep) {
            peaks.push(c);
        }
    }
    PeakSet { peaks, tau, min_sep }
}
