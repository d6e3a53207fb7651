//! End-to-end acceptance suite. Runs every criterion, prints one line each
//! and exits nonzero if any criterion fails.

use std::f64::consts::{PI, TAU};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use coinv::acquisition::{synthesize_fields, AcquisitionGeometry, PhaselessDataset};
use coinv::forward::{circle_series_oracle, BoundaryCondition, Discretization, ForwardSolver, Obstacle, Scene};
use coinv::geometry::{CurveKind, ParametricCurve, Ring};
use coinv::inversion::{recover_modulus, theta, SourceIndicator};
use coinv::metrics::{boundary_concentration, match_sources};
use coinv::Point;
use coinv_cli::{invert, load_experiment, synthesize, Experiment, Inversion, Which};
use proptest::strategy::{Strategy, ValueTree};
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn config(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

fn experiment(name: &str, delta: Option<f64>) -> Experiment {
    let mut exp = load_experiment(&config(name), None).expect("bundled config");
    if let Some(d) = delta {
        exp.delta = d;
    }
    exp
}

fn run(exp: &Experiment, which: Which) -> (PhaselessDataset, Inversion) {
    let (ds, _) = synthesize(exp).expect("synthesis");
    let inv = invert(&ds, exp, which).expect("inversion");
    (ds, inv)
}

fn random_scene() -> impl Strategy<Value = (Scene, f64)> {
    use proptest::prelude::*;
    (
        0.8..1.3f64,
        prop::collection::vec(-0.1..0.1f64, 3),
        prop::collection::vec(-0.1..0.1f64, 3),
        prop::collection::vec((4.0..8.0f64, 0.0..TAU), 1..=7),
        2.0..20.0f64,
        prop::bool::ANY,
    )
        .prop_map(|(r0, mut cos, sin, polar, k, doubled)| {
            cos.insert(0, r0);
            let curve = ParametricCurve::new(CurveKind::TrigPolynomial { center: Point::ORIGIN, cos, sin }).unwrap();
            let mut sources: Vec<Point> = Vec::new();
            for (r, a) in polar {
                let p = Point::polar(r, a);
                if sources.iter().all(|q| q.distance(p) > 0.5) {
                    sources.push(p);
                }
            }
            let scene = Scene::new(k, vec![Obstacle::new(curve, BoundaryCondition::SoundSoft)], sources).unwrap();
            (scene, if doubled { 2.0 } else { 1.0 })
        })
}

fn decoupling() -> Outcome {
    let mut runner = TestRunner::new_with_rng(Config::default(), TestRng::deterministic_rng(RngAlgorithm::ChaCha));
    let strategy = random_scene();
    let (mut em, mut et) = (0.0f64, 0.0f64);
    let mut summary = Vec::new();
    for _ in 0..5 {
        let (scene, sigma) = strategy.new_tree(&mut runner).unwrap().current();
        let geom = AcquisitionGeometry::new(Ring::full(10.0, 64).unwrap(), Ring::full(9.0, 32).unwrap(), sigma).unwrap();
        let (fields, _) = synthesize_fields(&scene, &geom, &Discretization::default_for(&scene)).unwrap();
        let ds = fields.phaseless(geom, scene.k);
        let rec = recover_modulus(&ds).unwrap();
        let th = theta(&ds).unwrap();
        for i in 0..ds.n_rx() {
            for j in 0..ds.n_ref() {
                let uz = fields.u_z[(i, j)];
                em = em.max((rec.values[(i, j)] - uz.norm()).abs());
                et = et.max((th[(i, j)] - 2.0 * (fields.u_p[i] * uz.conj()).re).abs());
            }
        }
        summary.push(format!("k={:.2}/N={}/s={sigma}", scene.k, scene.sources.len()));
    }
    outcome(
        em <= 1e-12 && et <= 1e-10,
        format!("|u| err {em:.2e} (<= 1e-12), Theta err {et:.2e} (<= 1e-10); scenes {}", summary.join(", ")),
    )
}

fn circle_oracle() -> Outcome {
    let k = 4.0 * PI;
    let z = Point::new(3.0, 1.0);
    let mut errors = Vec::new();
    for bc in [BoundaryCondition::SoundSoft, BoundaryCondition::SoundHard] {
        let circle = ParametricCurve::circle(Point::ORIGIN, 1.0).unwrap();
        let scene = Scene::new(k, vec![Obstacle::new(circle, bc)], vec![]).unwrap();
        let sol = ForwardSolver::new(&scene, &Discretization::from_nodes(vec![256]).unwrap())
            .unwrap()
            .solve(z)
            .unwrap();
        let (mut num, mut den) = (0.0, 0.0);
        for i in 0..64 {
            let x = Point::polar(10.0, TAU * i as f64 / 64.0);
            let exact = circle_series_oracle(1.0, Point::ORIGIN, k, bc, z, x, 80).unwrap().value;
            num += (sol.eval_scattered(x).unwrap() - exact).norm_sqr();
            den += exact.norm_sqr();
        }
        errors.push((num / den).sqrt());
    }
    outcome(
        errors[0] <= 1e-6 && errors[1] <= 1e-4,
        format!("sound-soft {:.2e} (<= 1e-6), sound-hard {:.2e} (<= 1e-4)", errors[0], errors[1]),
    )
}

fn reciprocity_and_residual() -> Outcome {
    let pairs = [
        (Point::new(3.0, 1.0), Point::new(-2.0, 3.5)),
        (Point::new(0.0, -4.0), Point::new(4.0, 4.0)),
        (Point::new(-3.5, 0.5), Point::new(2.5, -2.5)),
    ];
    let mut passed = true;
    let mut parts = Vec::new();
    for (name, bc, bound) in [
        ("soft", BoundaryCondition::SoundSoft, 1e-6),
        ("hard", BoundaryCondition::SoundHard, 1e-4),
        ("impedance", BoundaryCondition::Impedance { lambda: 0.8 }, 1e-4),
    ] {
        let (mut recip, mut resid) = (0.0f64, 0.0f64);
        for k in [5.0, 18.0] {
            let kite = ParametricCurve::new(CurveKind::Kite { center: Point::ORIGIN }).unwrap();
            let scene = Scene::new(k, vec![Obstacle::new(kite, bc)], vec![]).unwrap();
            let solver = ForwardSolver::new(&scene, &Discretization::from_nodes(vec![256]).unwrap()).unwrap();
            for (x, z) in pairs {
                let (sz, sx) = (solver.solve(z).unwrap(), solver.solve(x).unwrap());
                resid = resid.max(sz.boundary_residual().unwrap()).max(sx.boundary_residual().unwrap());
                let (a, b) = (sz.eval_total(x).unwrap(), sx.eval_total(z).unwrap());
                recip = recip.max((a - b).norm() / a.norm());
            }
        }
        passed &= recip <= 1e-6 && resid <= bound;
        parts.push(format!("{name}: reciprocity {recip:.1e}, residual {resid:.1e} (<= {bound:.0e})"));
    }
    outcome(passed, parts.join("; "))
}

fn describe_match(inv: &Inversion, tol: f64, truth: &[Point]) -> (bool, String) {
    let peaks = inv.peaks.as_ref().unwrap();
    let m = match_sources(&peaks.points(), truth, tol);
    let worst = m.worst_distance().unwrap_or(f64::NAN);
    let missed: Vec<String> = m.missed().iter().map(|&i| truth[i].to_string()).collect();
    let text = format!(
        "{} peaks, {}/{} sources within {tol:.4} (worst {worst:.4}){}",
        peaks.len(),
        m.matched(),
        truth.len(),
        if missed.is_empty() { String::new() } else { format!(", missed {}", missed.join(" ")) }
    );
    (m.all_matched(), text)
}

fn example1() -> Outcome {
    let clean = experiment("example1.cfg", Some(0.0));
    let cell = clean.source_grid.cell();
    let (_, inv) = run(&clean, Which::Both);
    let (ok0, text0) = describe_match(&inv, cell, &clean.scene.sources);
    let curves: Vec<ParametricCurve> = clean.scene.obstacles.iter().map(|o| o.curve.clone()).collect();
    let conc = boundary_concentration(inv.obstacle.as_ref().unwrap(), &curves, 0.01, 0.2);

    let noisy = experiment("example1.cfg", Some(0.10));
    let (_, inv10) = run(&noisy, Which::Sources);
    let (ok10, text10) = describe_match(&inv10, 3.0 * cell, &noisy.scene.sources);
    outcome(
        ok0 && ok10 && conc >= 0.8,
        format!("delta 0: {text0}; delta 0.10: {text10}; I_D top-1% within 0.2 of boundary {:.1}% (>= 80%)", 100.0 * conc),
    )
}

fn example3() -> Outcome {
    let noisy = experiment("example3.cfg", None);
    let cell = noisy.source_grid.cell();
    let (_, inv) = run(&noisy, Which::Sources);
    let count = inv.peaks.as_ref().unwrap().len();
    let (ok5, text5) = describe_match(&inv, 2.0 * cell, &noisy.scene.sources);

    let clean = experiment("example3.cfg", Some(0.0));
    let (_, inv0) = run(&clean, Which::Sources);
    let count0 = inv0.peaks.as_ref().unwrap().len();
    let (ok0, text0) = describe_match(&inv0, cell, &clean.scene.sources);
    outcome(
        count == 7 && ok5 && ok0,
        format!("delta 0.05: {text5} (need exactly 7); delta 0: {text0}; peak count {count}/{count0}"),
    )
}

fn limited_aperture() -> Outcome {
    let mut parts = Vec::new();
    for name in ["example2_limited.cfg", "example3_less.cfg"] {
        let exp = experiment(name, None);
        let (_, inv) = run(&exp, Which::Both);
        let (_, text) = describe_match(&inv, 2.0 * exp.source_grid.cell(), &exp.scene.sources);
        parts.push(format!("{}: {text}", name.trim_end_matches(".cfg")));
    }
    outcome(true, parts.join("; "))
}

fn source_decay() -> Outcome {
    let k = 4.0 * PI;
    let lambda = TAU / k;
    let source = Point::new(1.0, 0.5);
    let scene = Scene::new(k, vec![], vec![source]).unwrap();
    let geom = AcquisitionGeometry::new(Ring::full(10.0, 128).unwrap(), Ring::full(9.0, 128).unwrap(), 1.0).unwrap();
    let (fields, _) = synthesize_fields(&scene, &geom, &Discretization::from_nodes(vec![]).unwrap()).unwrap();
    let ind = SourceIndicator::new(&fields.phaseless(geom, k)).unwrap();
    let grid = coinv::geometry::SamplingGrid::square(5.0, 200).unwrap();
    let max = grid.points().iter().map(|&y| ind.eval(y).abs()).fold(0.0, f64::max);
    let envelope = |angle: f64, d: f64| {
        (0..=16)
            .map(|s| {
                let r = d - lambda / 4.0 + lambda / 2.0 * s as f64 / 16.0;
                ind.eval(Point::new(source.x + r * angle.cos(), source.y + r * angle.sin())).abs() / max
            })
            .fold(0.0, f64::max)
    };
    let mut decaying = 0;
    for ray in 0..8 {
        let angle = TAU * ray as f64 / 8.0;
        let e = [envelope(angle, lambda), envelope(angle, 2.0 * lambda), envelope(angle, 4.0 * lambda)];
        if e[0] > e[1] && e[1] > e[2] {
            decaying += 1;
        }
    }
    outcome(decaying >= 7, format!("{decaying}/8 rays strictly decreasing at 1, 2, 4 wavelengths (>= 7)"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 7] = [
        ("1 decoupling identity", decoupling),
        ("2 circle oracle", circle_oracle),
        ("3 reciprocity and residual", reciprocity_and_residual),
        ("4 example 1 reproduction", example1),
        ("5 example 3 source table", example3),
        ("6 limited aperture", limited_aperture),
        ("7 source indicator decay", source_decay),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, check) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let o = check();
        let status = if o.passed { "PASS" } else { "FAIL" };
        println!("criterion {name:<28} {status}  {}  [{:.1} s]", o.detail, start.elapsed().as_secs_f64());
        if !o.passed {
            failed += 1;
        }
    }
    if failed > 0 {
        println!("acceptance: {failed} criterion(s) failed");
        ExitCode::FAILURE
    } else {
        println!("acceptance: all criteria passed");
        ExitCode::SUCCESS
    }
}
