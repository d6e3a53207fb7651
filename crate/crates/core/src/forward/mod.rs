//! Exterior scattering of point-source waves by one or more smooth obstacles.
//!
//! The scattered field is sought as a combined double/single layer potential
//!
//! ```text
//! u^s(x) = sum_b int_{dD_b} [dPhi(x,y)/dnu(y) - i eta Phi(x,y)] phi_b(y) ds(y),   eta = k,
//! ```
//!
//! which radiates by construction. On a sound-soft boundary the density solves
//! `(I + K - i eta S) phi = -2 u^i`; on a Neumann/impedance boundary
//! (`du/dnu + i k lambda u = 0`, sound-hard being `lambda = 0`) it solves
//!
//! ```text
//! (T - i eta K' + i eta I) phi + i k lambda (I + K - i eta S) phi = -2 (du^i/dnu + i k lambda u^i),
//! ```
//!
//! with `T` regularized through Maue's identity. Both are uniquely solvable
//! at every real wavenumber. Interactions between distinct obstacles enter as
//! smooth off-diagonal blocks of one dense system, factorized once per scene
//! and reused for every source position.

mod kernels;
pub mod oracle;
mod quadrature;

use std::collections::HashMap;
use std::f64::consts::TAU;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use nalgebra::{DMatrix, DVector, Dyn, LU};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::geometry::ParametricCurve;
use crate::specialfn::{fundamental_solution, grad_fundamental_solution};
use crate::{Error, Point, Result};
use kernels::{layer_kernel, self_operators, Panel};

pub use oracle::{bessel_integer_orders, circle_series_oracle, SeriesValue};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Condition estimates above this abort the solve.
pub const CONDITION_LIMIT: f64 = 1e12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BoundaryCondition {
    /// `u = 0`.
    SoundSoft,
    /// `du/dnu = 0`; identical to `Impedance { lambda: 0.0 }`.
    SoundHard,
    /// `du/dnu + i k lambda u = 0`.
    Impedance { lambda: f64 },
}

impl BoundaryCondition {
    /// Impedance parameter for the Robin-type conditions, `None` for sound-soft.
    pub fn impedance(&self) -> Option<f64> {
        match *self {
            BoundaryCondition::SoundSoft => None,
            BoundaryCondition::SoundHard => Some(0.0),
            BoundaryCondition::Impedance { lambda } => Some(lambda),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Obstacle {
    pub curve: ParametricCurve,
    pub bc: BoundaryCondition,
}

impl Obstacle {
    pub fn new(curve: ParametricCurve, bc: BoundaryCondition) -> Self {
        Obstacle { curve, bc }
    }
}

/// Wavenumber, obstacles and the point sources `P`.
#[derive(Clone, Debug)]
pub struct Scene {
    pub k: f64,
    pub obstacles: Vec<Obstacle>,
    pub sources: Vec<Point>,
}

impl Scene {
    pub fn new(k: f64, obstacles: Vec<Obstacle>, sources: Vec<Point>) -> Result<Self> {
        let scene = Scene { k, obstacles, sources };
        scene.validate()?;
        Ok(scene)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.k > 0.0 && self.k.is_finite()) {
            return Err(Error::config(format!("wavenumber must be positive, got {}", self.k)));
        }
        for ob in &self.obstacles {
            if let Some(lambda) = ob.bc.impedance() {
                if !lambda.is_finite() {
                    return Err(Error::config("impedance parameter must be finite"));
                }
            }
        }
        for (a, oa) in self.obstacles.iter().enumerate() {
            for (b, ob) in self.obstacles.iter().enumerate().skip(a + 1) {
                let touches = |p: &ParametricCurve, q: &ParametricCurve| {
                    q.samples(512).into_iter().any(|x| p.contains(x) || p.distance(x) < 1e-9)
                };
                if touches(&oa.curve, &ob.curve) || touches(&ob.curve, &oa.curve) {
                    return Err(Error::config(format!("obstacles {a} and {b} overlap")));
                }
            }
        }
        for (j, &s) in self.sources.iter().enumerate() {
            if !s.is_finite() {
                return Err(Error::config(format!("source {j} is not finite")));
            }
            self.check_exterior(s)
                .map_err(|_| Error::config(format!("source {j} at {s} lies in an obstacle closure")))?;
            if self.sources[..j].contains(&s) {
                return Err(Error::config(format!("source {j} at {s} is repeated")));
            }
        }
        Ok(())
    }

    /// Error unless `p` is strictly outside every obstacle closure.
    pub fn check_exterior(&self, p: Point) -> Result<()> {
        for (i, ob) in self.obstacles.iter().enumerate() {
            if ob.curve.contains(p) || ob.curve.distance(p) < 1e-12 {
                return Err(Error::domain(format!("point {p} is inside obstacle {i}")));
            }
        }
        Ok(())
    }

    /// Scene with the same obstacles and no sources.
    pub fn without_sources(&self) -> Scene {
        Scene {
            sources: Vec::new(),
            ..self.clone()
        }
    }
}

/// Node counts per obstacle (each even).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Discretization {
    nodes: Vec<usize>,
}

/// Smallest node count accepted per boundary.
pub const MIN_NODES: usize = 8;

impl Discretization {
    /// `max(128, ceil(10 k L / 2pi))` rounded up to even, per obstacle.
    pub fn default_for(scene: &Scene) -> Self {
        Self::with_density(scene, 10.0, 128)
    }

    /// `points_per_wavelength` nodes per wavelength with a floor.
    pub fn with_density(scene: &Scene, points_per_wavelength: f64, floor: usize) -> Self {
        let nodes = scene
            .obstacles
            .iter()
            .map(|ob| {
                let wavelengths = scene.k * ob.curve.length() / TAU;
                let n = ((points_per_wavelength * wavelengths).ceil() as usize).max(floor);
                n + n % 2
            })
            .collect();
        Discretization { nodes }
    }

    pub fn uniform(scene: &Scene, n: usize) -> Result<Self> {
        Self::from_nodes(vec![n; scene.obstacles.len()])
    }

    pub fn from_nodes(nodes: Vec<usize>) -> Result<Self> {
        for &n in &nodes {
            if !n.is_multiple_of(2) || n < MIN_NODES {
                return Err(Error::config(format!(
                    "node count must be even and at least {MIN_NODES}, got {n}"
                )));
            }
        }
        Ok(Discretization { nodes })
    }

    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    pub fn total(&self) -> usize {
        self.nodes.iter().sum()
    }
}

struct SolverInner {
    scene: Scene,
    disc: Discretization,
    eta: f64,
    panels: Vec<Panel>,
    offsets: Vec<usize>,
    lu: Option<LU<Complex64, Dyn, Dyn>>,
    condition: f64,
    solves: AtomicUsize,
}

/// Assembled and factorized boundary system for one scene.
///
/// Cheap to clone; clones share the factorization and the solve counter.
#[derive(Clone)]
pub struct ForwardSolver {
    inner: Arc<SolverInner>,
}

impl std::fmt::Debug for ForwardSolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ForwardSolver")
            .field("k", &self.inner.scene.k)
            .field("nodes", &self.inner.disc.nodes)
            .field("condition", &self.inner.condition)
            .finish()
    }
}

impl ForwardSolver {
    pub fn new(scene: &Scene, disc: &Discretization) -> Result<Self> {
        scene.validate()?;
        if disc.nodes.len() != scene.obstacles.len() {
            return Err(Error::config(format!(
                "discretization lists {} boundaries, scene has {}",
                disc.nodes.len(),
                scene.obstacles.len()
            )));
        }
        let k = scene.k;
        let eta = k;
        let panels: Vec<Panel> = scene
            .obstacles
            .iter()
            .zip(&disc.nodes)
            .map(|(ob, &n)| Panel::new(&ob.curve, n))
            .collect();
        let mut offsets = Vec::with_capacity(panels.len());
        let mut total = 0;
        for p in &panels {
            offsets.push(total);
            total += p.len();
        }

        let (lu, condition) = if total == 0 {
            (None, 1.0)
        } else {
            let matrix = assemble(scene, &panels, &offsets, total, eta);
            let norm1 = (0..total)
                .map(|j| matrix.column(j).iter().map(|v| v.norm()).sum::<f64>())
                .fold(0.0, f64::max);
            let lu = matrix.lu();
            let condition = condition_estimate(&lu, norm1);
            if !(condition.is_finite() && condition < CONDITION_LIMIT) {
                return Err(Error::Solver {
                    message: format!(
                        "boundary system is singular or ill-conditioned ({total} unknowns, k = {k})"
                    ),
                    condition,
                });
            }
            (Some(lu), condition)
        };

        Ok(ForwardSolver {
            inner: Arc::new(SolverInner {
                scene: scene.clone(),
                disc: disc.clone(),
                eta,
                panels,
                offsets,
                lu,
                condition,
                solves: AtomicUsize::new(0),
            }),
        })
    }

    pub fn scene(&self) -> &Scene {
        &self.inner.scene
    }

    pub fn discretization(&self) -> &Discretization {
        &self.inner.disc
    }

    /// Lower-bound estimate of the 1-norm condition number of the boundary system.
    pub fn condition_estimate(&self) -> f64 {
        self.inner.condition
    }

    /// Number of right-hand sides solved so far.
    pub fn solve_count(&self) -> usize {
        self.inner.solves.load(Ordering::Relaxed)
    }

    /// Densities for the incident field `Phi(., z)`.
    pub fn solve(&self, z: Point) -> Result<BoundarySolution> {
        let inner = &*self.inner;
        inner.scene.check_exterior(z)?;
        inner.solves.fetch_add(1, Ordering::Relaxed);
        let density = match &inner.lu {
            None => DVector::zeros(0),
            Some(lu) => {
                let rhs = self.incident_rhs(z)?;
                let density = lu.solve(&rhs).ok_or_else(|| Error::Solver {
                    message: "LU back-substitution failed".into(),
                    condition: inner.condition,
                })?;
                if density.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
                    return Err(Error::Solver {
                        message: "non-finite boundary density".into(),
                        condition: inner.condition,
                    });
                }
                density
            }
        };
        Ok(BoundarySolution {
            solver: self.clone(),
            source: z,
            density,
        })
    }

    fn incident_rhs(&self, z: Point) -> Result<DVector<Complex64>> {
        let inner = &*self.inner;
        let k = inner.scene.k;
        let total = inner.disc.total();
        let mut rhs = DVector::zeros(total);
        for (ob, (panel, &off)) in inner.scene.obstacles.iter().zip(inner.panels.iter().zip(&inner.offsets)) {
            for i in 0..panel.len() {
                let x = panel.x[i];
                let ui = fundamental_solution(k, x, z)?;
                rhs[off + i] = match ob.bc.impedance() {
                    None => -2.0 * ui,
                    Some(lambda) => {
                        let (gx, gy) = grad_fundamental_solution(k, x, z)?;
                        let nu = panel.normal[i];
                        let dn = gx * nu.x + gy * nu.y;
                        -2.0 * (dn + I * k * lambda * ui)
                    }
                };
            }
        }
        Ok(rhs)
    }

    /// Matrix mapping boundary densities to scattered-field values at `points`.
    pub fn evaluation_matrix(&self, points: &[Point]) -> Result<DMatrix<Complex64>> {
        let inner = &*self.inner;
        for &p in points {
            inner.scene.check_exterior(p)?;
        }
        let total = inner.disc.total();
        let rows: Vec<Vec<Complex64>> = points
            .par_iter()
            .map(|&x| {
                let mut row = Vec::with_capacity(total);
                for panel in &inner.panels {
                    for j in 0..panel.len() {
                        let (v, _) = layer_kernel(
                            inner.scene.k,
                            inner.eta,
                            x,
                            None,
                            panel.x[j],
                            panel.dx[j].rotate_cw(),
                        );
                        row.push(v * panel.weight);
                    }
                }
                row
            })
            .collect();
        Ok(DMatrix::from_fn(points.len(), total, |i, j| rows[i][j]))
    }
}

fn condition_estimate(lu: &LU<Complex64, Dyn, Dyn>, norm1: f64) -> f64 {
    let u = lu.u();
    let diag: Vec<f64> = (0..u.nrows()).map(|i| u[(i, i)].norm()).collect();
    let max = diag.iter().copied().fold(0.0, f64::max);
    let min = diag.iter().copied().fold(f64::INFINITY, f64::min);
    if min == 0.0 {
        return f64::INFINITY;
    }
    // ||A^{-1}||_1 >= ||A^{-1} b||_1 / ||b||_1 for a couple of probe vectors
    let n = u.nrows();
    let mut inv_norm: f64 = 1.0 / min;
    for probe in 0..2 {
        let b = DVector::from_fn(n, |i, _| {
            let s = if (i + probe) % 2 == 0 { 1.0 } else { -1.0 };
            Complex64::new(s * (1.0 + i as f64 / n as f64), 0.0)
        });
        if let Some(x) = lu.solve(&b) {
            let ratio = x.iter().map(|v| v.norm()).sum::<f64>() / b.iter().map(|v| v.norm()).sum::<f64>();
            inv_norm = inv_norm.max(ratio);
        }
    }
    (max / min).max(norm1 * inv_norm)
}

fn assemble(scene: &Scene, panels: &[Panel], offsets: &[usize], total: usize, eta: f64) -> DMatrix<Complex64> {
    let k = scene.k;
    let mut matrix = DMatrix::<Complex64>::zeros(total, total);

    let blocks: Vec<DMatrix<Complex64>> = scene
        .obstacles
        .par_iter()
        .zip(panels.par_iter())
        .map(|(ob, panel)| {
            let n = panel.len();
            let ops = self_operators(panel, k, ob.bc.impedance().is_some());
            let eye = DMatrix::<Complex64>::identity(n, n);
            let dirichlet = &eye + &ops.double - &ops.single * (I * eta);
            match (ob.bc.impedance(), ops.normal) {
                (None, _) => dirichlet,
                (Some(lambda), Some((adjoint, hyper))) => {
                    hyper - adjoint * (I * eta) + eye * (I * eta) + dirichlet * (I * k * lambda)
                }
                (Some(_), None) => unreachable!("normal operators requested for impedance boundaries"),
            }
        })
        .collect();
    for (a, block) in blocks.iter().enumerate() {
        let n = panels[a].len();
        matrix.view_mut((offsets[a], offsets[a]), (n, n)).copy_from(block);
    }

    // smooth interactions between distinct boundaries
    for (a, ob) in scene.obstacles.iter().enumerate() {
        let pa = &panels[a];
        let lambda = ob.bc.impedance();
        for (b, pb) in panels.iter().enumerate() {
            if a == b {
                continue;
            }
            let rows: Vec<Vec<Complex64>> = (0..pa.len())
                .into_par_iter()
                .map(|i| {
                    (0..pb.len())
                        .map(|j| {
                            let (v, dn) = layer_kernel(
                                k,
                                eta,
                                pa.x[i],
                                lambda.map(|_| pa.normal[i]),
                                pb.x[j],
                                pb.dx[j].rotate_cw(),
                            );
                            let entry = match lambda {
                                None => v,
                                Some(l) => dn + I * k * l * v,
                            };
                            2.0 * pb.weight * entry
                        })
                        .collect()
                })
                .collect();
            for (i, row) in rows.into_iter().enumerate() {
                for (j, v) in row.into_iter().enumerate() {
                    matrix[(offsets[a] + i, offsets[b] + j)] = v;
                }
            }
        }
    }
    matrix
}

/// Boundary values of the total field at refined parameter points.
#[derive(Clone, Copy, Debug)]
pub struct TraceSample {
    pub t: f64,
    pub point: Point,
    pub normal: Point,
    pub u: Complex64,
    /// Normal derivative; only computed on Neumann/impedance boundaries.
    pub du_dnu: Option<Complex64>,
}

/// Layer densities for one incident point source.
#[derive(Clone)]
pub struct BoundarySolution {
    solver: ForwardSolver,
    source: Point,
    density: DVector<Complex64>,
}

impl std::fmt::Debug for BoundarySolution {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BoundarySolution")
            .field("source", &self.source)
            .field("unknowns", &self.density.len())
            .finish()
    }
}

impl BoundarySolution {
    pub fn source(&self) -> Point {
        self.source
    }

    pub fn density(&self) -> &DVector<Complex64> {
        &self.density
    }

    pub fn solver(&self) -> &ForwardSolver {
        &self.solver
    }

    /// Scattered field by the trapezoidal rule on the layer potential.
    ///
    /// Accurate for points at least about one node spacing away from every boundary.
    pub fn eval_scattered(&self, x: Point) -> Result<Complex64> {
        let inner = &*self.solver.inner;
        inner.scene.check_exterior(x)?;
        Ok(self.scattered_unchecked(x))
    }

    fn scattered_unchecked(&self, x: Point) -> Complex64 {
        let inner = &*self.solver.inner;
        let mut sum = Complex64::new(0.0, 0.0);
        for (panel, &off) in inner.panels.iter().zip(&inner.offsets) {
            for j in 0..panel.len() {
                let (v, _) = layer_kernel(inner.scene.k, inner.eta, x, None, panel.x[j], panel.dx[j].rotate_cw());
                sum += v * panel.weight * self.density[off + j];
            }
        }
        sum
    }

    /// Total field `Phi(x, z) + u^s(x; z)`.
    pub fn eval_total(&self, x: Point) -> Result<Complex64> {
        let inner = &*self.solver.inner;
        let ui = fundamental_solution(inner.scene.k, x, self.source)?;
        Ok(ui + self.eval_scattered(x)?)
    }

    /// Scattered field at many points through a precomputed [`ForwardSolver::evaluation_matrix`].
    pub fn scattered_with(&self, matrix: &DMatrix<Complex64>) -> DVector<Complex64> {
        if self.density.is_empty() {
            DVector::zeros(matrix.nrows())
        } else {
            matrix * &self.density
        }
    }

    /// Total field and (on Robin-type boundaries) its normal derivative at the
    /// `2 n` equispaced parameter points of obstacle `index`, where `n` is its
    /// node count. The density is trigonometrically interpolated and the jump
    /// relations are applied with the refined Nyström operators, so half of the
    /// samples are not collocation points of the solve.
    pub fn boundary_trace(&self, index: usize) -> Result<Vec<TraceSample>> {
        let inner = &*self.solver.inner;
        let ob = inner
            .scene
            .obstacles
            .get(index)
            .ok_or_else(|| Error::config(format!("no obstacle with index {index}")))?;
        let k = inner.scene.k;
        let eta = inner.eta;
        let n = inner.disc.nodes[index];
        let m = 2 * n;
        let off = inner.offsets[index];
        let coarse: Vec<Complex64> = self.density.rows(off, n).iter().copied().collect();
        let fine = DVector::from_vec(quadrature::trig_resample(&coarse, m));
        let panel = Panel::new(&ob.curve, m);
        let robin = ob.bc.impedance().is_some();
        let ops = self_operators(&panel, k, robin);

        // exterior traces of the own layer potential
        let u_self = (&fine + &ops.double * &fine - &ops.single * &fine * (I * eta)) * Complex64::new(0.5, 0.0);
        let dn_self = ops
            .normal
            .as_ref()
            .map(|(adjoint, hyper)| (hyper * &fine - adjoint * &fine * (I * eta) + &fine * (I * eta)) * Complex64::new(0.5, 0.0));

        let mut samples = Vec::with_capacity(m);
        for i in 0..m {
            let x = panel.x[i];
            let nu = panel.normal[i];
            let mut u = u_self[i] + fundamental_solution(k, x, self.source)?;
            let mut dn = dn_self.as_ref().map(|d| d[i]);
            if let Some(d) = dn.as_mut() {
                let (gx, gy) = grad_fundamental_solution(k, x, self.source)?;
                *d += gx * nu.x + gy * nu.y;
            }
            for (b, pb) in inner.panels.iter().enumerate() {
                if b == index {
                    continue;
                }
                let ob_off = inner.offsets[b];
                for j in 0..pb.len() {
                    let (v, vn) = layer_kernel(k, eta, x, robin.then_some(nu), pb.x[j], pb.dx[j].rotate_cw());
                    let phi = self.density[ob_off + j] * pb.weight;
                    u += v * phi;
                    if let Some(d) = dn.as_mut() {
                        *d += vn * phi;
                    }
                }
            }
            samples.push(TraceSample {
                t: panel.t[i],
                point: x,
                normal: nu,
                u,
                du_dnu: dn,
            });
        }
        Ok(samples)
    }

    /// Largest boundary-condition residual `|Bu|` over every obstacle's refined trace.
    pub fn boundary_residual(&self) -> Result<f64> {
        let inner = &*self.solver.inner;
        let k = inner.scene.k;
        let mut worst: f64 = 0.0;
        for (i, ob) in inner.scene.obstacles.iter().enumerate() {
            for s in self.boundary_trace(i)? {
                let r = match (ob.bc.impedance(), s.du_dnu) {
                    (Some(lambda), Some(dn)) => (dn + I * k * lambda * s.u).norm(),
                    _ => s.u.norm(),
                };
                worst = worst.max(r);
            }
        }
        Ok(worst)
    }
}

/// Convenience wrapper: assemble, factorize and solve for one source.
pub fn solve(scene: &Scene, disc: &Discretization, z: Point) -> Result<BoundarySolution> {
    ForwardSolver::new(scene, disc)?.solve(z)
}

/// Total fields of the scene's sources with cached per-source solutions.
pub struct SourceFields {
    solver: ForwardSolver,
    primary: Vec<BoundarySolution>,
    extra: Mutex<HashMap<[u64; 2], Arc<BoundarySolution>>>,
}

impl SourceFields {
    /// Solves once for every source of the scene.
    pub fn new(solver: ForwardSolver) -> Result<Self> {
        let primary = solver
            .scene()
            .sources
            .par_iter()
            .map(|&z| solver.solve(z))
            .collect::<Result<Vec<_>>>()?;
        Ok(SourceFields {
            solver,
            primary,
            extra: Mutex::new(HashMap::new()),
        })
    }

    pub fn solver(&self) -> &ForwardSolver {
        &self.solver
    }

    fn extra_solution(&self, z: Point) -> Result<Arc<BoundarySolution>> {
        let key = [z.x.to_bits(), z.y.to_bits()];
        if let Some(sol) = self.extra.lock().expect("cache lock").get(&key) {
            return Ok(sol.clone());
        }
        let sol = Arc::new(self.solver.solve(z)?);
        self.extra.lock().expect("cache lock").entry(key).or_insert(sol.clone());
        Ok(sol)
    }

    /// `u(x; P)`.
    pub fn total(&self, x: Point) -> Result<Complex64> {
        self.primary.iter().map(|s| s.eval_total(x)).sum()
    }

    /// `u(x; P) + t u(x; z)`; the extra term is skipped when absent.
    pub fn superpose(&self, extra: Option<(f64, Point)>, x: Point) -> Result<Complex64> {
        let base = self.total(x)?;
        match extra {
            None => Ok(base),
            Some((t, z)) => Ok(base + t * self.extra_solution(z)?.eval_total(x)?),
        }
    }
}

/// One-shot form of [`SourceFields::superpose`].
pub fn superpose(scene: &Scene, disc: &Discretization, extra: Option<(f64, Point)>, x: Point) -> Result<Complex64> {
    SourceFields::new(ForwardSolver::new(scene, disc)?)?.superpose(extra, x)
}
