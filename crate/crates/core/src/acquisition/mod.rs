//! Phaseless measurement synthesis.
//!
//! For receivers `x_i` on the ring of radius `R` and reference sources `z_j`
//! on the ring of radius `rho`, three modulus datasets are produced:
//! `m0[i] = |u(x_i; P)|`, `m1[i][j] = |u(x_i; P) + sigma u(x_i; z_j)|` and
//! `m2[i][j] = |u(x_i; P) + 2 sigma u(x_i; z_j)|`. Every distinct point source
//! is solved once against a shared factorization; the superpositions follow
//! by linearity.

mod format;

pub use format::{dataset_from_str, dataset_to_string, read_dataset, write_dataset, FORMAT_HEADER};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::forward::{BoundarySolution, Discretization, ForwardSolver, Scene};
use crate::geometry::Ring;
use crate::specialfn::fundamental_solution;
use crate::{Error, Point, Result};

/// Receiver ring, reference-source ring and the scaling factor `sigma`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AcquisitionGeometry {
    pub receivers: Ring,
    pub references: Ring,
    pub sigma: f64,
}

impl AcquisitionGeometry {
    pub fn new(receivers: Ring, references: Ring, sigma: f64) -> Result<Self> {
        let g = AcquisitionGeometry {
            receivers,
            references,
            sigma,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.receivers.radius() <= self.references.radius() {
            return Err(Error::config(format!(
                "receiver radius {} must exceed reference radius {}",
                self.receivers.radius(),
                self.references.radius()
            )));
        }
        if !(self.sigma >= 1.0 && self.sigma.is_finite()) {
            return Err(Error::config(format!("sigma must be finite and >= 1, got {}", self.sigma)));
        }
        Ok(())
    }

    /// Every obstacle and source must lie strictly inside the reference ring.
    pub fn check_scene(&self, scene: &Scene) -> Result<()> {
        self.validate()?;
        let rho = self.references.radius();
        for (i, ob) in scene.obstacles.iter().enumerate() {
            let extent = ob.curve.samples(2048).iter().map(|p| p.norm()).fold(0.0, f64::max);
            if extent >= rho {
                return Err(Error::config(format!(
                    "obstacle {i} reaches radius {extent:.4}, not inside the reference ring (radius {rho})"
                )));
            }
        }
        for (j, s) in scene.sources.iter().enumerate() {
            if s.norm() >= rho {
                return Err(Error::config(format!(
                    "source {j} at {s} is not inside the reference ring (radius {rho})"
                )));
            }
        }
        Ok(())
    }
}

/// The three modulus datasets and their provenance.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaselessDataset {
    pub geometry: AcquisitionGeometry,
    pub k: f64,
    /// `|u(x_i; P)|`, length `n_rx`.
    pub m0: DVector<f64>,
    /// `|u(x_i; P, sigma z_j)|`, `n_rx x n_ref`.
    pub m1: DMatrix<f64>,
    /// `|u(x_i; P, 2 sigma z_j)|`, `n_rx x n_ref`.
    pub m2: DMatrix<f64>,
    pub noise_delta: f64,
    pub noise_seed: u64,
}

impl PhaselessDataset {
    pub fn n_rx(&self) -> usize {
        self.geometry.receivers.count()
    }

    pub fn n_ref(&self) -> usize {
        self.geometry.references.count()
    }

    pub fn validate(&self) -> Result<()> {
        self.geometry.validate()?;
        if !(self.k > 0.0 && self.k.is_finite()) {
            return Err(Error::config(format!("wavenumber must be positive, got {}", self.k)));
        }
        let (nr, nz) = (self.n_rx(), self.n_ref());
        if self.m0.len() != nr || self.m1.shape() != (nr, nz) || self.m2.shape() != (nr, nz) {
            return Err(Error::config(format!(
                "dataset dimensions {} / {:?} / {:?} do not match geometry {nr} x {nz}",
                self.m0.len(),
                self.m1.shape(),
                self.m2.shape()
            )));
        }
        let all = self.m0.iter().chain(self.m1.iter()).chain(self.m2.iter());
        if let Some(bad) = all.copied().find(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::Numeric(format!("dataset entry {bad} is not a finite nonnegative modulus")));
        }
        Ok(())
    }
}

/// Phased total fields at the receivers.
#[derive(Clone, Debug)]
pub struct PhasedFields {
    pub receivers: Vec<Point>,
    pub references: Vec<Point>,
    /// `u(x_i; P)`.
    pub u_p: DVector<Complex64>,
    /// `u(x_i; z_j)`.
    pub u_z: DMatrix<Complex64>,
}

impl PhasedFields {
    /// Moduli of the superpositions with weights `0`, `sigma` and `2 sigma`.
    pub fn phaseless(&self, geometry: AcquisitionGeometry, k: f64) -> PhaselessDataset {
        let s = geometry.sigma;
        let (nr, nz) = self.u_z.shape();
        let m1 = DMatrix::from_fn(nr, nz, |i, j| (self.u_p[i] + s * self.u_z[(i, j)]).norm());
        let m2 = DMatrix::from_fn(nr, nz, |i, j| (self.u_p[i] + 2.0 * s * self.u_z[(i, j)]).norm());
        PhaselessDataset {
            geometry,
            k,
            m0: self.u_p.map(|v| v.norm()),
            m1,
            m2,
            noise_delta: 0.0,
            noise_seed: 0,
        }
    }

    /// Ratio `max|u(., z)| / max|u(., P)|` and the `sigma >= 1` that would balance them.
    pub fn sigma_diagnostic(&self) -> SigmaDiagnostic {
        let m_ref = self.u_z.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let m0 = self.u_p.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let ratio = if m0 > 0.0 { m_ref / m0 } else { f64::INFINITY };
        let suggested = if m_ref > 0.0 && m0 > 0.0 { (m0 / m_ref).max(1.0) } else { 1.0 };
        SigmaDiagnostic { ratio, suggested }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SigmaDiagnostic {
    pub ratio: f64,
    pub suggested: f64,
}

/// Bookkeeping of one synthesis run.
#[derive(Clone, Copy, Debug)]
pub struct SynthesisReport {
    pub solves: usize,
    /// Largest boundary-condition residual over the solutions for `P`.
    pub max_residual: f64,
    pub condition: f64,
    pub sigma: SigmaDiagnostic,
}

/// Phased total fields for the scene's sources and every reference source.
pub fn synthesize_fields(
    scene: &Scene,
    geometry: &AcquisitionGeometry,
    disc: &Discretization,
) -> Result<(PhasedFields, SynthesisReport)> {
    geometry.check_scene(scene)?;
    let solver = ForwardSolver::new(scene, disc)?;
    let receivers = geometry.receivers.points();
    let references = geometry.references.points();
    let eval = solver.evaluation_matrix(&receivers)?;
    let k = scene.k;

    let field_at_receivers = |sol: &BoundarySolution| -> Result<DVector<Complex64>> {
        let mut total = sol.scattered_with(&eval);
        for (i, &x) in receivers.iter().enumerate() {
            total[i] += fundamental_solution(k, x, sol.source())?;
        }
        Ok(total)
    };

    let primary: Vec<(DVector<Complex64>, f64)> = scene
        .sources
        .par_iter()
        .map(|&z| {
            let sol = solver.solve(z)?;
            let residual = if scene.obstacles.is_empty() { 0.0 } else { sol.boundary_residual()? };
            Ok((field_at_receivers(&sol)?, residual))
        })
        .collect::<Result<_>>()?;
    let reference: Vec<DVector<Complex64>> = references
        .par_iter()
        .map(|&z| field_at_receivers(&solver.solve(z)?))
        .collect::<Result<_>>()?;

    let n_rx = receivers.len();
    let mut u_p = DVector::zeros(n_rx);
    let mut max_residual: f64 = 0.0;
    for (f, r) in &primary {
        u_p += f;
        max_residual = max_residual.max(*r);
    }
    let u_z = DMatrix::from_fn(n_rx, references.len(), |i, j| reference[j][i]);

    let solves = solver.solve_count();
    let fields = PhasedFields {
        receivers,
        references,
        u_p,
        u_z,
    };
    let report = SynthesisReport {
        solves,
        max_residual,
        condition: solver.condition_estimate(),
        sigma: fields.sigma_diagnostic(),
    };
    Ok((fields, report))
}

/// Noiseless phaseless dataset for the scene.
pub fn synthesize(scene: &Scene, geometry: &AcquisitionGeometry, disc: &Discretization) -> Result<PhaselessDataset> {
    synthesize_with_report(scene, geometry, disc).map(|(ds, _)| ds)
}

pub fn synthesize_with_report(
    scene: &Scene,
    geometry: &AcquisitionGeometry,
    disc: &Discretization,
) -> Result<(PhaselessDataset, SynthesisReport)> {
    let (fields, report) = synthesize_fields(scene, geometry, disc)?;
    let ds = fields.phaseless(*geometry, scene.k);
    ds.validate()?;
    Ok((ds, report))
}

/// Dataset ids keying the noise streams.
pub const STREAM_M0: u64 = 0;
pub const STREAM_M1: u64 = 1;
pub const STREAM_M2: u64 = 2;

/// Uniform `r` in `[-1, 1]` for flat entry `index` (`i * n_ref + j`) of dataset `stream`.
pub fn noise_draw(seed: u64, stream: u64, index: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng.set_word_pos(2 * index as u128);
    rng.random_range(-1.0..=1.0)
}

/// Multiplies every entry by `1 + delta r` with an independent `r ~ U[-1, 1]`
/// that depends only on `(seed, dataset, i, j)`.
pub fn add_noise(ds: &PhaselessDataset, delta: f64, seed: u64) -> Result<PhaselessDataset> {
    if !(0.0..1.0).contains(&delta) {
        return Err(Error::config(format!("noise level must lie in [0, 1), got {delta}")));
    }
    let mut out = ds.clone();
    out.noise_delta = delta;
    out.noise_seed = seed;
    if delta == 0.0 {
        return Ok(out);
    }
    let nz = ds.n_ref() as u64;
    out.m0 = DVector::from_vec(
        ds.m0
            .iter()
            .enumerate()
            .collect::<Vec<_>>()
            .par_iter()
            .map(|&(i, &m)| m * (1.0 + delta * noise_draw(seed, STREAM_M0, i as u64)))
            .collect(),
    );
    let perturb = |m: &DMatrix<f64>, stream: u64| {
        let (nr, nc) = m.shape();
        let rows: Vec<Vec<f64>> = (0..nr)
            .into_par_iter()
            .map(|i| {
                (0..nc)
                    .map(|j| m[(i, j)] * (1.0 + delta * noise_draw(seed, stream, i as u64 * nz + j as u64)))
                    .collect()
            })
            .collect();
        DMatrix::from_fn(nr, nc, |i, j| rows[i][j])
    };
    out.m1 = perturb(&ds.m1, STREAM_M1);
    out.m2 = perturb(&ds.m2, STREAM_M2);
    Ok(out)
}
