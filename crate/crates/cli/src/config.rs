//! Experiment configuration files.
//!
//! TOML with a fixed set of sections; unknown keys are rejected everywhere.
//! Reals that are naturally multiples of pi may be written as strings such
//! as `"4pi"`, `"-pi/2"` or `"2*pi"`. The full schema is in `docs/config-schema.md`.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use coinv::acquisition::AcquisitionGeometry;
use coinv::forward::{BoundaryCondition, Discretization, Obstacle, Scene};
use coinv::geometry::{CurveKind, ParametricCurve, Ring, SamplingGrid};
use coinv::inversion::{default_min_sep, DEFAULT_TAU};
use coinv::{Error, Point, Result};

/// A real given either as a number or as a short expression in `pi`.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum Real {
    Number(f64),
    Expr(String),
}

impl Real {
    pub fn value(&self, field: &str) -> Result<f64> {
        match self {
            Real::Number(v) => Ok(*v),
            Real::Expr(s) => parse_real_expr(s).ok_or_else(|| {
                Error::Config(format!("{field}: cannot read `{s}` as a number or multiple of pi"))
            }),
        }
    }
}

/// `a`, `pi`, `a pi`, `a*pi`, each optionally followed by `/b`.
pub fn parse_real_expr(s: &str) -> Option<f64> {
    let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let (num, den) = match compact.split_once('/') {
        Some((n, d)) => (n, d.parse::<f64>().ok()?),
        None => (compact.as_str(), 1.0),
    };
    let value = if let Some(coef) = num.strip_suffix("pi") {
        let coef = coef.strip_suffix('*').unwrap_or(coef);
        let c = match coef {
            "" | "+" => 1.0,
            "-" => -1.0,
            c => c.parse::<f64>().ok()?,
        };
        c * PI
    } else {
        num.parse::<f64>().ok()?
    };
    let v = value / den;
    v.is_finite().then_some(v)
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scene: SceneConfig,
    pub acquisition: AcquisitionConfig,
    #[serde(default)]
    pub noise: NoiseConfig,
    pub imaging: ImagingConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneConfig {
    pub k: Real,
    #[serde(default)]
    pub sources: Vec<[f64; 2]>,
    #[serde(default)]
    pub obstacles: Vec<ObstacleConfig>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObstacleConfig {
    /// `circle`, `starfish`, `peanut`, `kite` or `trig`.
    pub shape: String,
    #[serde(default)]
    pub center: [f64; 2],
    pub radius: Option<f64>,
    pub amplitude: Option<f64>,
    pub petals: Option<u32>,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub cos: Option<Vec<f64>>,
    pub sin: Option<Vec<f64>>,
    /// `sound-soft`, `sound-hard` or `impedance`.
    pub bc: String,
    pub lambda: Option<f64>,
    /// Node count override for this boundary.
    pub nodes: Option<usize>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RingConfig {
    pub radius: f64,
    pub count: usize,
    /// `[theta0, theta1]`; the full circle when absent.
    pub aperture: Option<[Real; 2]>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AcquisitionConfig {
    pub receivers: RingConfig,
    pub references: RingConfig,
    #[serde(default = "one")]
    pub sigma: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    #[serde(default)]
    pub delta: f64,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    /// `[xmin, xmax, ymin, ymax]`.
    pub bbox: [f64; 4],
    pub n: usize,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImagingConfig {
    pub source_grid: GridConfig,
    pub obstacle_grid: GridConfig,
    pub tau: Option<f64>,
    pub min_sep: Option<Real>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    #[serde(default = "default_ppw")]
    pub points_per_wavelength: f64,
    #[serde(default = "default_min_nodes")]
    pub min_nodes: usize,
}

fn default_ppw() -> f64 {
    10.0
}

fn default_min_nodes() -> usize {
    128
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            points_per_wavelength: default_ppw(),
            min_nodes: default_min_nodes(),
        }
    }
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: Option<PathBuf>,
}

/// Validated runtime objects built from an [`ExperimentConfig`].
#[derive(Clone, Debug)]
pub struct Experiment {
    pub scene: Scene,
    pub geometry: AcquisitionGeometry,
    pub discretization: Discretization,
    pub delta: f64,
    pub seed: u64,
    pub source_grid: SamplingGrid,
    pub obstacle_grid: SamplingGrid,
    pub tau: f64,
    pub min_sep: f64,
    pub output_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string().trim_end().to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn build(&self) -> Result<Experiment> {
        let k = self.scene.k.value("scene.k")?;
        let obstacles = self
            .scene
            .obstacles
            .iter()
            .enumerate()
            .map(|(i, o)| o.build().map_err(|e| prefix(e, &format!("scene.obstacles[{i}]"))))
            .collect::<Result<Vec<_>>>()?;
        let sources = self.scene.sources.iter().map(|&p| Point::from(p)).collect();
        let scene = Scene::new(k, obstacles, sources).map_err(|e| prefix(e, "scene"))?;

        let receivers = self.acquisition.receivers.build().map_err(|e| prefix(e, "acquisition.receivers"))?;
        let references = self.acquisition.references.build().map_err(|e| prefix(e, "acquisition.references"))?;
        let geometry = AcquisitionGeometry::new(receivers, references, self.acquisition.sigma)
            .map_err(|e| prefix(e, "acquisition"))?;
        geometry.check_scene(&scene).map_err(|e| prefix(e, "acquisition"))?;

        if !(0.0..1.0).contains(&self.noise.delta) {
            return Err(Error::Config(format!("noise.delta must lie in [0, 1), got {}", self.noise.delta)));
        }

        let solver = &self.solver;
        if !(solver.points_per_wavelength > 0.0) {
            return Err(Error::Config("solver.points_per_wavelength must be positive".into()));
        }
        let mut nodes = Discretization::with_density(&scene, solver.points_per_wavelength, solver.min_nodes)
            .nodes()
            .to_vec();
        for (i, o) in self.scene.obstacles.iter().enumerate() {
            if let Some(n) = o.nodes {
                nodes[i] = n;
            }
        }
        let discretization = Discretization::from_nodes(nodes).map_err(|e| prefix(e, "nodes"))?;

        let grid = |g: &GridConfig, name: &str| {
            let [x0, x1, y0, y1] = g.bbox;
            SamplingGrid::new((x0, x1, y0, y1), g.n, g.n).map_err(|e| prefix(e, name))
        };
        let tau = self.imaging.tau.unwrap_or(DEFAULT_TAU);
        if !(0.0..=1.0).contains(&tau) {
            return Err(Error::Config(format!("imaging.tau must lie in [0, 1], got {tau}")));
        }
        let min_sep = match &self.imaging.min_sep {
            Some(r) => r.value("imaging.min_sep")?,
            None => default_min_sep(k),
        };
        if !(min_sep >= 0.0) {
            return Err(Error::Config(format!("imaging.min_sep must be nonnegative, got {min_sep}")));
        }

        Ok(Experiment {
            scene,
            geometry,
            discretization,
            delta: self.noise.delta,
            seed: self.noise.seed,
            source_grid: grid(&self.imaging.source_grid, "imaging.source_grid")?,
            obstacle_grid: grid(&self.imaging.obstacle_grid, "imaging.obstacle_grid")?,
            tau,
            min_sep,
            output_dir: self.output.dir.clone(),
        })
    }
}

fn prefix(e: Error, at: &str) -> Error {
    match e {
        Error::Config(m) => Error::Config(format!("{at}: {m}")),
        other => other,
    }
}

impl RingConfig {
    fn build(&self) -> Result<Ring> {
        match &self.aperture {
            None => Ring::full(self.radius, self.count),
            Some([a, b]) => Ring::new(self.radius, self.count, a.value("aperture")?, b.value("aperture")?),
        }
    }
}

impl ObstacleConfig {
    fn build(&self) -> Result<Obstacle> {
        let center = Point::from(self.center);
        let shape = self.shape.as_str();
        let allowed: &[&str] = match shape {
            "circle" => &["radius"],
            "starfish" => &["radius", "amplitude", "petals"],
            "peanut" => &["a", "b"],
            "kite" => &[],
            "trig" => &["cos", "sin"],
            other => {
                return Err(Error::Config(format!(
                    "unknown shape `{other}` (expected circle, starfish, peanut, kite or trig)"
                )))
            }
        };
        let given = [
            ("radius", self.radius.is_some()),
            ("amplitude", self.amplitude.is_some()),
            ("petals", self.petals.is_some()),
            ("a", self.a.is_some()),
            ("b", self.b.is_some()),
            ("cos", self.cos.is_some()),
            ("sin", self.sin.is_some()),
        ];
        for (name, present) in given {
            if present && !allowed.contains(&name) {
                return Err(Error::Config(format!("`{name}` does not apply to shape `{shape}`")));
            }
        }
        let need = |v: Option<f64>, name: &str| {
            v.ok_or_else(|| Error::Config(format!("shape `{shape}` requires `{name}`")))
        };
        let kind = match shape {
            "circle" => CurveKind::Circle {
                center,
                radius: need(self.radius, "radius")?,
            },
            "starfish" => CurveKind::Starfish {
                center,
                radius: need(self.radius, "radius")?,
                amplitude: need(self.amplitude, "amplitude")?,
                petals: self
                    .petals
                    .ok_or_else(|| Error::Config("shape `starfish` requires `petals`".into()))?,
            },
            "peanut" => CurveKind::Peanut {
                center,
                a: need(self.a, "a")?,
                b: need(self.b, "b")?,
            },
            "kite" => CurveKind::Kite { center },
            _ => CurveKind::TrigPolynomial {
                center,
                cos: self
                    .cos
                    .clone()
                    .ok_or_else(|| Error::Config("shape `trig` requires `cos`".into()))?,
                sin: self.sin.clone().unwrap_or_default(),
            },
        };
        let bc = match (self.bc.as_str(), self.lambda) {
            ("sound-soft", None) => BoundaryCondition::SoundSoft,
            ("sound-hard", None) => BoundaryCondition::SoundHard,
            ("impedance", Some(lambda)) => BoundaryCondition::Impedance { lambda },
            ("impedance", None) => return Err(Error::Config("`impedance` requires `lambda`".into())),
            ("sound-soft" | "sound-hard", Some(_)) => {
                return Err(Error::Config(format!("`lambda` does not apply to `{}`", self.bc)))
            }
            (other, _) => {
                return Err(Error::Config(format!(
                    "unknown boundary condition `{other}` (expected sound-soft, sound-hard or impedance)"
                )))
            }
        };
        Ok(Obstacle::new(ParametricCurve::new(kind)?, bc))
    }
}
