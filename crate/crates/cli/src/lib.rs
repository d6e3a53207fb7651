//! Command implementations behind the `coinv` binary.
//!
//! Every command writes its human-readable report to a caller-supplied sink
//! and returns a typed error; the binary maps errors to exit codes with
//! [`exit_code`].

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use coinv::acquisition::{
    add_noise, read_dataset, synthesize_fields, write_dataset, PhaselessDataset, SynthesisReport,
};
use coinv::export::{write_grid_csv, write_grid_pgm, write_peaks_csv};
use coinv::forward::{
    circle_series_oracle, BoundaryCondition, Discretization, ForwardSolver, Obstacle, Scene,
};
use coinv::geometry::{CurveKind, ParametricCurve, Ring};
use coinv::inversion::{
    extract_peaks, indicator_obstacle, indicator_source, normalize, recover_modulus, theta, IndicatorGrid, PeakSet,
};
use coinv::metrics::{match_sources, SourceMatch};
use coinv::{Error, Point, Result};

pub use config::{Experiment, ExperimentConfig};

pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_NUMERIC: u8 = 3;
pub const EXIT_VALIDATION: u8 = 4;

/// Failure of a command: either a library error or a failed validation.
#[derive(Debug)]
pub enum CommandError {
    Core(Error),
    Validation(String),
}

impl std::fmt::Display for CommandError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CommandError::Core(e) => write!(f, "{e}"),
            CommandError::Validation(m) => write!(f, "validation failed: {m}"),
        }
    }
}

impl std::error::Error for CommandError {}

impl From<Error> for CommandError {
    fn from(e: Error) -> Self {
        CommandError::Core(e)
    }
}

impl From<std::io::Error> for CommandError {
    fn from(e: std::io::Error) -> Self {
        CommandError::Core(Error::Io(e))
    }
}

pub fn exit_code(e: &CommandError) -> u8 {
    match e {
        CommandError::Validation(_) => EXIT_VALIDATION,
        CommandError::Core(Error::Config(_) | Error::Parse { .. } | Error::Io(_)) => EXIT_CONFIG,
        CommandError::Core(_) => EXIT_NUMERIC,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Which {
    Sources,
    Obstacle,
    Both,
}

impl Which {
    fn sources(self) -> bool {
        matches!(self, Which::Sources | Which::Both)
    }

    fn obstacle(self) -> bool {
        matches!(self, Which::Obstacle | Which::Both)
    }
}

pub fn load_experiment(path: &Path, seed: Option<u64>) -> Result<Experiment> {
    let mut exp = ExperimentConfig::load(path)?.build()?;
    if let Some(s) = seed {
        exp.seed = s;
    }
    Ok(exp)
}

/// Forward synthesis followed by the configured noise.
pub fn synthesize(exp: &Experiment) -> Result<(PhaselessDataset, SynthesisReport)> {
    let (fields, report) = synthesize_fields(&exp.scene, &exp.geometry, &exp.discretization)?;
    let clean = fields.phaseless(exp.geometry, exp.scene.k);
    clean.validate()?;
    let ds = add_noise(&clean, exp.delta, exp.seed)?;
    Ok((ds, report))
}

/// The dataset must have been taken with the configured wavenumber and rings.
pub fn check_compatible(ds: &PhaselessDataset, exp: &Experiment) -> Result<()> {
    let same = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0);
    let ring_ok = |a: &Ring, b: &Ring| {
        a.count() == b.count()
            && same(a.radius(), b.radius())
            && same(a.aperture().0, b.aperture().0)
            && same(a.aperture().1, b.aperture().1)
    };
    if !same(ds.k, exp.scene.k) {
        return Err(Error::Config(format!("dataset k = {} but config k = {}", ds.k, exp.scene.k)));
    }
    if !ring_ok(&ds.geometry.receivers, &exp.geometry.receivers) {
        return Err(Error::Config("dataset receiver ring differs from acquisition.receivers".into()));
    }
    if !ring_ok(&ds.geometry.references, &exp.geometry.references) {
        return Err(Error::Config("dataset reference ring differs from acquisition.references".into()));
    }
    if !same(ds.geometry.sigma, exp.geometry.sigma) {
        return Err(Error::Config(format!(
            "dataset sigma = {} but config sigma = {}",
            ds.geometry.sigma, exp.geometry.sigma
        )));
    }
    Ok(())
}

/// Normalized indicators, peaks and diagnostics of one inversion.
#[derive(Clone, Debug)]
pub struct Inversion {
    pub sources: Option<IndicatorGrid>,
    pub peaks: Option<PeakSet>,
    pub obstacle: Option<IndicatorGrid>,
    pub clamped: usize,
    pub entries: usize,
    /// Peaks against the configured true sources, within two grid cells.
    pub matching: Option<SourceMatch>,
}

pub fn invert(ds: &PhaselessDataset, exp: &Experiment, which: Which) -> Result<Inversion> {
    check_compatible(ds, exp)?;
    let recovered = recover_modulus(ds)?;
    let (mut sources, mut peaks, mut obstacle, mut matching) = (None, None, None, None);
    if which.sources() {
        let g = normalize(&indicator_source(ds, &exp.source_grid)?);
        let p = extract_peaks(&g, exp.tau, exp.min_sep);
        if !exp.scene.sources.is_empty() {
            matching = Some(match_sources(&p.points(), &exp.scene.sources, 2.0 * exp.source_grid.cell()));
        }
        sources = Some(g);
        peaks = Some(p);
    }
    if which.obstacle() {
        obstacle = Some(normalize(&indicator_obstacle(ds, &exp.obstacle_grid)?));
    }
    Ok(Inversion {
        sources,
        peaks,
        obstacle,
        clamped: recovered.clamped,
        entries: recovered.values.len(),
        matching,
    })
}

/// Writes the inversion artefacts into `dir` and returns their paths.
pub fn write_inversion(inv: &Inversion, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    if let Some(g) = &inv.sources {
        let csv = dir.join("sources.csv");
        write_grid_csv(g, &csv)?;
        written.push(csv);
        let pgm = dir.join("sources.pgm");
        write_grid_pgm(g, &pgm)?;
        written.push(pgm);
    }
    if let Some(p) = &inv.peaks {
        let path = dir.join("peaks.csv");
        write_peaks_csv(p, &path)?;
        written.push(path);
    }
    if let Some(g) = &inv.obstacle {
        let csv = dir.join("obstacle.csv");
        write_grid_csv(g, &csv)?;
        written.push(csv);
        let pgm = dir.join("obstacle.pgm");
        write_grid_pgm(g, &pgm)?;
        written.push(pgm);
    }
    Ok(written)
}

fn output_dir(exp: &Experiment, out: Option<&Path>) -> PathBuf {
    out.map(Path::to_path_buf)
        .or_else(|| exp.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"))
}

fn report_synthesis(w: &mut dyn Write, ds: &PhaselessDataset, report: &SynthesisReport) -> std::io::Result<()> {
    writeln!(w, "forward solves: {}", report.solves)?;
    writeln!(w, "condition estimate: {:.3e}", report.condition)?;
    writeln!(w, "max boundary residual: {:.3e}", report.max_residual)?;
    writeln!(
        w,
        "reference/primary modulus ratio: {:.3e} (suggested sigma {:.3})",
        report.sigma.ratio, report.sigma.suggested
    )?;
    writeln!(
        w,
        "dataset: {} receivers x {} references, noise delta {} seed {}",
        ds.n_rx(),
        ds.n_ref(),
        ds.noise_delta,
        ds.noise_seed
    )
}

fn report_inversion(w: &mut dyn Write, inv: &Inversion, exp: &Experiment) -> std::io::Result<()> {
    writeln!(w, "clamped radicands: {} of {}", inv.clamped, inv.entries)?;
    if let Some(p) = &inv.peaks {
        writeln!(w, "source peaks (tau {}, min_sep {:.4}): {}", p.tau, p.min_sep, p.len())?;
        for (i, peak) in p.peaks.iter().enumerate() {
            writeln!(w, "  {:>2}  ({:>8.4}, {:>8.4})  {:.4}", i + 1, peak.point.x, peak.point.y, peak.value)?;
        }
    }
    if let Some(m) = &inv.matching {
        writeln!(
            w,
            "true sources located within {:.4}: {} of {}",
            m.tolerance,
            m.matched(),
            m.assignments.len()
        )?;
        for i in m.missed() {
            writeln!(w, "  missed source {} at {}", i + 1, exp.scene.sources[i])?;
        }
    }
    if let Some(g) = &inv.obstacle {
        if g.degenerate {
            writeln!(w, "warning: obstacle indicator is numerically zero (no scattering detected)")?;
        } else {
            writeln!(w, "obstacle indicator normalized over {} points", g.grid.len())?;
        }
    }
    Ok(())
}

pub fn cmd_synth(
    config: &Path,
    seed: Option<u64>,
    out: Option<&Path>,
    dataset: Option<&Path>,
    w: &mut dyn Write,
) -> Result<PathBuf, CommandError> {
    let exp = load_experiment(config, seed)?;
    let (ds, report) = synthesize(&exp)?;
    let path = match dataset {
        Some(p) => p.to_path_buf(),
        None => {
            let dir = output_dir(&exp, out);
            fs::create_dir_all(&dir)?;
            dir.join("dataset.txt")
        }
    };
    write_dataset(&ds, &path)?;
    report_synthesis(w, &ds, &report)?;
    writeln!(w, "wrote {}", path.display())?;
    Ok(path)
}

pub fn cmd_invert(
    dataset: &Path,
    config: &Path,
    which: Which,
    out: Option<&Path>,
    w: &mut dyn Write,
) -> Result<Inversion, CommandError> {
    let exp = load_experiment(config, None)?;
    let ds = read_dataset(dataset)?;
    let inv = invert(&ds, &exp, which)?;
    let dir = output_dir(&exp, out);
    let written = write_inversion(&inv, &dir)?;
    report_inversion(w, &inv, &exp)?;
    for p in written {
        writeln!(w, "wrote {}", p.display())?;
    }
    Ok(inv)
}

pub fn cmd_pipeline(
    config: &Path,
    seed: Option<u64>,
    which: Which,
    out: Option<&Path>,
    w: &mut dyn Write,
) -> Result<Inversion, CommandError> {
    let exp = load_experiment(config, seed)?;
    let (ds, report) = synthesize(&exp)?;
    let dir = output_dir(&exp, out);
    fs::create_dir_all(&dir)?;
    let path = dir.join("dataset.txt");
    write_dataset(&ds, &path)?;
    report_synthesis(w, &ds, &report)?;
    writeln!(w, "wrote {}", path.display())?;
    let inv = invert(&ds, &exp, which)?;
    let written = write_inversion(&inv, &dir)?;
    report_inversion(w, &inv, &exp)?;
    for p in written {
        writeln!(w, "wrote {}", p.display())?;
    }
    Ok(inv)
}

/// One oracle comparison of the validation suite.
#[derive(Clone, Debug)]
pub struct Check {
    pub name: &'static str,
    pub error: f64,
    pub tolerance: f64,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.error <= self.tolerance
    }
}

fn circle_oracle_error(bc: BoundaryCondition, nodes: usize) -> Result<f64> {
    let k = 4.0 * std::f64::consts::PI;
    let scene = Scene::new(
        k,
        vec![Obstacle::new(ParametricCurve::circle(Point::ORIGIN, 1.0)?, bc)],
        vec![],
    )?;
    let z = Point::new(3.0, 1.0);
    let sol = ForwardSolver::new(&scene, &Discretization::from_nodes(vec![nodes])?)?.solve(z)?;
    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..64 {
        let x = Point::polar(10.0, std::f64::consts::TAU * i as f64 / 64.0);
        let exact = circle_series_oracle(1.0, Point::ORIGIN, k, bc, z, x, k.ceil() as usize + 40)?.value;
        num += (sol.eval_scattered(x)? - exact).norm_sqr();
        den += exact.norm_sqr();
    }
    Ok((num / den).sqrt())
}

fn decoupling_error() -> Result<(f64, f64)> {
    let scene = Scene::new(
        6.0,
        vec![Obstacle::new(
            ParametricCurve::new(CurveKind::Kite { center: Point::new(0.5, 0.0) })?,
            BoundaryCondition::SoundSoft,
        )],
        vec![Point::new(3.0, 1.0), Point::new(-2.5, -2.0)],
    )?;
    let geom = coinv::acquisition::AcquisitionGeometry::new(Ring::full(10.0, 48)?, Ring::full(9.0, 24)?, 1.0)?;
    let (fields, _) = synthesize_fields(&scene, &geom, &Discretization::default_for(&scene))?;
    let ds = fields.phaseless(geom, scene.k);
    let rec = recover_modulus(&ds)?;
    let th = theta(&ds)?;
    let (mut em, mut et) = (0.0f64, 0.0f64);
    for i in 0..ds.n_rx() {
        for j in 0..ds.n_ref() {
            let uz = fields.u_z[(i, j)];
            em = em.max((rec.values[(i, j)] - uz.norm()).abs());
            et = et.max((th[(i, j)] - 2.0 * (fields.u_p[i] * uz.conj()).re).abs());
        }
    }
    Ok((em, et))
}

fn reciprocity_error(bc: BoundaryCondition) -> Result<f64> {
    let scene = Scene::new(
        5.0,
        vec![Obstacle::new(ParametricCurve::new(CurveKind::Kite { center: Point::ORIGIN })?, bc)],
        vec![],
    )?;
    let solver = ForwardSolver::new(&scene, &Discretization::from_nodes(vec![256])?)?;
    let pairs = [
        (Point::new(3.0, 1.0), Point::new(-2.0, 3.5)),
        (Point::new(0.0, -4.0), Point::new(4.0, 4.0)),
        (Point::new(-3.5, 0.5), Point::new(2.5, -2.5)),
    ];
    let mut worst: f64 = 0.0;
    for (x, z) in pairs {
        let a = solver.solve(z)?.eval_total(x)?;
        let b = solver.solve(x)?.eval_total(z)?;
        worst = worst.max((a - b).norm() / a.norm());
    }
    Ok(worst)
}

/// Runs the built-in oracle suite. `circle_nodes` overrides the node count
/// of the circle comparisons (256 by default).
pub fn validation_checks(circle_nodes: Option<usize>) -> Result<Vec<Check>> {
    let n = circle_nodes.unwrap_or(256);
    let (em, et) = decoupling_error()?;
    Ok(vec![
        Check {
            name: "circle series vs boundary integral (sound-soft)",
            error: circle_oracle_error(BoundaryCondition::SoundSoft, n)?,
            tolerance: 1e-6,
        },
        Check {
            name: "circle series vs boundary integral (sound-hard)",
            error: circle_oracle_error(BoundaryCondition::SoundHard, n)?,
            tolerance: 1e-4,
        },
        Check {
            name: "decoupling identity |u(x;z)|",
            error: em,
            tolerance: 1e-12,
        },
        Check {
            name: "decoupling identity Theta",
            error: et,
            tolerance: 1e-10,
        },
        Check {
            name: "reciprocity (sound-soft kite)",
            error: reciprocity_error(BoundaryCondition::SoundSoft)?,
            tolerance: 1e-6,
        },
        Check {
            name: "reciprocity (impedance kite)",
            error: reciprocity_error(BoundaryCondition::Impedance { lambda: 0.8 })?,
            tolerance: 1e-6,
        },
    ])
}

pub fn cmd_validate(circle_nodes: Option<usize>, w: &mut dyn Write) -> Result<(), CommandError> {
    let checks = validation_checks(circle_nodes)?;
    let mut failed = Vec::new();
    for c in &checks {
        let status = if c.passed() { "PASS" } else { "FAIL" };
        writeln!(w, "{status}  {:<48} error {:.3e}  tolerance {:.0e}", c.name, c.error, c.tolerance)?;
        if !c.passed() {
            failed.push(c.name);
        }
    }
    if failed.is_empty() {
        writeln!(w, "all {} checks passed", checks.len())?;
        Ok(())
    } else {
        Err(CommandError::Validation(failed.join("; ")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_by_error_kind() {
        let code = |e: Error| exit_code(&CommandError::Core(e));
        assert_eq!(code(Error::Config("x".into())), EXIT_CONFIG);
        assert_eq!(code(Error::Parse { line: 3, message: "x".into() }), EXIT_CONFIG);
        assert_eq!(code(std::io::Error::other("x").into()), EXIT_CONFIG);
        assert_eq!(
            code(Error::Solver {
                message: "x".into(),
                condition: 1e13
            }),
            EXIT_NUMERIC
        );
        assert_eq!(code(Error::Numeric("x".into())), EXIT_NUMERIC);
        assert_eq!(code(Error::Domain("x".into())), EXIT_NUMERIC);
        assert_eq!(exit_code(&CommandError::Validation("x".into())), EXIT_VALIDATION);
    }
}
