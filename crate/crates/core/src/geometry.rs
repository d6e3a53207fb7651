//! Obstacle boundaries, sensor rings and sampling grids.

use std::f64::consts::TAU;

use crate::{Error, Point, Result};

/// Shape of a closed, counterclockwise, smooth boundary parametrized over `[0, 2pi)`.
#[derive(Clone, Debug, PartialEq)]
pub enum CurveKind {
    Circle {
        center: Point,
        radius: f64,
    },
    /// `c + (radius + amplitude cos(petals t)) (cos t, sin t)`.
    Starfish {
        center: Point,
        radius: f64,
        amplitude: f64,
        petals: u32,
    },
    /// `c + sqrt(a^2 cos^2 t + b^2 sin^2 t) (cos t, sin t)`.
    Peanut { center: Point, a: f64, b: f64 },
    /// `c + (cos t + 0.65 cos 2t - 0.65, 1.5 sin t)`.
    Kite { center: Point },
    /// Radial trigonometric polynomial
    /// `r(t) = cos[0] + sum_m (cos[m] cos(mt) + sin[m-1] sin(mt))`.
    TrigPolynomial {
        center: Point,
        cos: Vec<f64>,
        sin: Vec<f64>,
    },
}

/// Point, derivatives and unit outward normal at a parameter value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurveSample {
    pub point: Point,
    /// `x'(t)`.
    pub tangent: Point,
    /// `x''(t)`.
    pub second: Point,
    pub normal: Point,
    /// `|x'(t)|`.
    pub speed: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParametricCurve {
    kind: CurveKind,
}

const SHAPE_SAMPLES: usize = 2048;

impl ParametricCurve {
    /// Validates the parameters: finite values, positive radial functions, and a
    /// nonvanishing speed everywhere.
    pub fn new(kind: CurveKind) -> Result<Self> {
        let finite = |p: Point| p.is_finite();
        match &kind {
            CurveKind::Circle { center, radius } => {
                if !finite(*center) || !(*radius > 0.0 && radius.is_finite()) {
                    return Err(Error::config("circle needs a finite center and positive radius"));
                }
            }
            CurveKind::Starfish {
                center,
                radius,
                amplitude,
                petals,
            } => {
                if !finite(*center) || !radius.is_finite() || !amplitude.is_finite() || *petals == 0 {
                    return Err(Error::config("starfish parameters must be finite with petals >= 1"));
                }
            }
            CurveKind::Peanut { center, a, b } => {
                if !finite(*center) || !(*a > 0.0 && *b > 0.0 && a.is_finite() && b.is_finite()) {
                    return Err(Error::config("peanut semi-axes must be positive"));
                }
            }
            CurveKind::Kite { center } => {
                if !finite(*center) {
                    return Err(Error::config("kite center must be finite"));
                }
            }
            CurveKind::TrigPolynomial { center, cos, sin } => {
                if !finite(*center) || cos.is_empty() || cos.iter().chain(sin).any(|v| !v.is_finite()) {
                    return Err(Error::config(
                        "trig polynomial needs a finite center and at least the constant coefficient",
                    ));
                }
            }
        }
        let curve = ParametricCurve { kind };
        if curve.radial().is_some() {
            for i in 0..SHAPE_SAMPLES {
                let t = TAU * i as f64 / SHAPE_SAMPLES as f64;
                let (r, _, _) = curve.radial_profile(t);
                if !(r > 0.0) {
                    return Err(Error::config(format!(
                        "radial function is not positive at t = {t:.4}"
                    )));
                }
            }
        }
        for i in 0..SHAPE_SAMPLES {
            let t = TAU * i as f64 / SHAPE_SAMPLES as f64;
            if !(curve.eval(t).speed > 0.0) {
                return Err(Error::config(format!("curve speed vanishes at t = {t:.4}")));
            }
        }
        Ok(curve)
    }

    pub fn circle(center: Point, radius: f64) -> Result<Self> {
        Self::new(CurveKind::Circle { center, radius })
    }

    pub fn kind(&self) -> &CurveKind {
        &self.kind
    }

    /// Center of the radial parametrization, if the curve is star-shaped about it.
    fn radial(&self) -> Option<Point> {
        match &self.kind {
            CurveKind::Circle { center, .. }
            | CurveKind::Starfish { center, .. }
            | CurveKind::Peanut { center, .. }
            | CurveKind::TrigPolynomial { center, .. } => Some(*center),
            CurveKind::Kite { .. } => None,
        }
    }

    /// `(r, r', r'')` for the radial kinds.
    fn radial_profile(&self, t: f64) -> (f64, f64, f64) {
        match &self.kind {
            CurveKind::Circle { radius, .. } => (*radius, 0.0, 0.0),
            CurveKind::Starfish {
                radius,
                amplitude,
                petals,
                ..
            } => {
                let m = *petals as f64;
                let (s, c) = (m * t).sin_cos();
                (radius + amplitude * c, -amplitude * m * s, -amplitude * m * m * c)
            }
            CurveKind::Peanut { a, b, .. } => {
                let d = a * a - b * b;
                let c = t.cos();
                let (s2, c2) = (2.0 * t).sin_cos();
                let f = b * b + d * c * c;
                let f1 = -d * s2;
                let f2 = -2.0 * d * c2;
                let r = f.sqrt();
                (r, f1 / (2.0 * r), f2 / (2.0 * r) - f1 * f1 / (4.0 * r * r * r))
            }
            CurveKind::TrigPolynomial { cos, sin, .. } => {
                let mut r = cos[0];
                let (mut r1, mut r2) = (0.0, 0.0);
                let order = cos.len().max(sin.len() + 1);
                for m in 1..order {
                    let a = cos.get(m).copied().unwrap_or(0.0);
                    let b = sin.get(m - 1).copied().unwrap_or(0.0);
                    let mf = m as f64;
                    let (s, c) = (mf * t).sin_cos();
                    r += a * c + b * s;
                    r1 += mf * (b * c - a * s);
                    r2 -= mf * mf * (a * c + b * s);
                }
                (r, r1, r2)
            }
            CurveKind::Kite { .. } => unreachable!("kite is not radial"),
        }
    }

    /// Point, first and second derivative, unit outward normal and speed at `t`.
    pub fn eval(&self, t: f64) -> CurveSample {
        let (point, tangent, second) = match &self.kind {
            CurveKind::Kite { center } => {
                let (s, c) = t.sin_cos();
                let (s2, c2) = (2.0 * t).sin_cos();
                (
                    *center + Point::new(c + 0.65 * c2 - 0.65, 1.5 * s),
                    Point::new(-s - 1.3 * s2, 1.5 * c),
                    Point::new(-c - 2.6 * c2, -1.5 * s),
                )
            }
            _ => {
                let center = self.radial().expect("radial kind");
                let (r, r1, r2) = self.radial_profile(t);
                let (s, c) = t.sin_cos();
                let e = Point::new(c, s);
                let e_perp = Point::new(-s, c);
                (
                    center + e * r,
                    e * r1 + e_perp * r,
                    e * (r2 - r) + e_perp * (2.0 * r1),
                )
            }
        };
        let speed = tangent.norm();
        CurveSample {
            point,
            tangent,
            second,
            normal: tangent.rotate_cw() * (1.0 / speed),
            speed,
        }
    }

    pub fn point(&self, t: f64) -> Point {
        self.eval(t).point
    }

    /// Perimeter by the (spectrally accurate) periodic trapezoidal rule.
    pub fn length(&self) -> f64 {
        let n = 1024;
        (0..n).map(|i| self.eval(TAU * i as f64 / n as f64).speed).sum::<f64>() * TAU / n as f64
    }

    /// Dense polygonal sample of the boundary.
    pub fn samples(&self, n: usize) -> Vec<Point> {
        (0..n).map(|i| self.point(TAU * i as f64 / n as f64)).collect()
    }

    /// Whether `p` lies in the open interior.
    pub fn contains(&self, p: Point) -> bool {
        if let Some(center) = self.radial() {
            let d = p - center;
            if d.norm() == 0.0 {
                return true;
            }
            let theta = d.angle().rem_euclid(TAU);
            return d.norm() < self.radial_profile(theta).0;
        }
        winding_number(&self.samples(SHAPE_SAMPLES), p) != 0
    }

    /// Approximate distance from `p` to the boundary.
    pub fn distance(&self, p: Point) -> f64 {
        let n = SHAPE_SAMPLES;
        let h = TAU / n as f64;
        let (best, _) = (0..n)
            .map(|i| (i, self.point(h * i as f64).distance(p)))
            .fold((0, f64::INFINITY), |acc, (i, d)| if d < acc.1 { (i, d) } else { acc });
        // golden-section refinement around the best sample
        let (mut a, mut b) = (h * (best as f64 - 1.0), h * (best as f64 + 1.0));
        let g = 0.5 * (5f64.sqrt() - 1.0);
        let f = |t: f64| self.point(t).distance(p);
        let (mut c, mut d) = (b - g * (b - a), a + g * (b - a));
        for _ in 0..60 {
            if f(c) < f(d) {
                b = d;
            } else {
                a = c;
            }
            c = b - g * (b - a);
            d = a + g * (b - a);
        }
        f(0.5 * (a + b))
    }

    /// Largest distance of a boundary point from the origin.
    pub fn max_radius(&self) -> f64 {
        self.samples(SHAPE_SAMPLES)
            .into_iter()
            .map(Point::norm)
            .fold(0.0, f64::max)
    }
}

fn winding_number(polygon: &[Point], p: Point) -> i32 {
    let mut wn = 0;
    for (i, &a) in polygon.iter().enumerate() {
        let b = polygon[(i + 1) % polygon.len()];
        let cross = (b.x - a.x) * (p.y - a.y) - (p.x - a.x) * (b.y - a.y);
        if a.y <= p.y {
            if b.y > p.y && cross > 0.0 {
                wn += 1;
            }
        } else if b.y <= p.y && cross < 0.0 {
            wn -= 1;
        }
    }
    wn
}

/// Points uniformly deployed on an arc of a circle centered at the origin.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ring {
    radius: f64,
    count: usize,
    theta0: f64,
    theta1: f64,
}

impl Ring {
    pub fn new(radius: f64, count: usize, theta0: f64, theta1: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::config(format!("ring radius must be positive, got {radius}")));
        }
        if count == 0 {
            return Err(Error::config("ring needs at least one point"));
        }
        if !(theta0.is_finite() && theta1.is_finite() && theta1 > theta0) {
            return Err(Error::config(format!(
                "aperture must satisfy theta0 < theta1, got [{theta0}, {theta1}]"
            )));
        }
        if theta1 - theta0 > TAU * (1.0 + 1e-12) {
            return Err(Error::config("aperture wider than a full circle"));
        }
        Ok(Ring {
            radius,
            count,
            theta0,
            theta1,
        })
    }

    pub fn full(radius: f64, count: usize) -> Result<Self> {
        Self::new(radius, count, 0.0, TAU)
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn aperture(&self) -> (f64, f64) {
        (self.theta0, self.theta1)
    }

    pub fn is_full(&self) -> bool {
        (self.theta1 - self.theta0 - TAU).abs() < 1e-12
    }

    /// `theta_j = theta0 + j (theta1 - theta0)/n`; for the full circle this is `2 pi j / n`.
    pub fn angle(&self, j: usize) -> f64 {
        self.theta0 + j as f64 * (self.theta1 - self.theta0) / self.count as f64
    }

    pub fn points(&self) -> Vec<Point> {
        (0..self.count)
            .map(|j| Point::polar(self.radius, self.angle(j)))
            .collect()
    }

    /// Covered arc length.
    pub fn arc_length(&self) -> f64 {
        self.radius * (self.theta1 - self.theta0)
    }

    /// Trapezoidal quadrature weight per point: arc length / n.
    pub fn weight(&self) -> f64 {
        self.arc_length() / self.count as f64
    }
}

/// Endpoint-inclusive rectangular lattice, enumerated row-major (y outer).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SamplingGrid {
    pub xmin: f64,
    pub xmax: f64,
    pub ymin: f64,
    pub ymax: f64,
    pub nx: usize,
    pub ny: usize,
}

impl SamplingGrid {
    pub fn new(bbox: (f64, f64, f64, f64), nx: usize, ny: usize) -> Result<Self> {
        let (xmin, xmax, ymin, ymax) = bbox;
        if ![xmin, xmax, ymin, ymax].iter().all(|v| v.is_finite()) || xmax <= xmin || ymax <= ymin {
            return Err(Error::config(format!(
                "grid bounding box must be finite and nondegenerate, got {bbox:?}"
            )));
        }
        if nx < 2 || ny < 2 {
            return Err(Error::config("grid needs at least two points per axis"));
        }
        Ok(SamplingGrid {
            xmin,
            xmax,
            ymin,
            ymax,
            nx,
            ny,
        })
    }

    /// Square grid `[-half, half]^2` with `n` points per axis.
    pub fn square(half: f64, n: usize) -> Result<Self> {
        Self::new((-half, half, -half, half), n, n)
    }

    pub fn x(&self, ix: usize) -> f64 {
        self.xmin + ix as f64 * (self.xmax - self.xmin) / (self.nx - 1) as f64
    }

    pub fn y(&self, iy: usize) -> f64 {
        self.ymin + iy as f64 * (self.ymax - self.ymin) / (self.ny - 1) as f64
    }

    pub fn point(&self, ix: usize, iy: usize) -> Point {
        Point::new(self.x(ix), self.y(iy))
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn spacing(&self) -> (f64, f64) {
        (
            (self.xmax - self.xmin) / (self.nx - 1) as f64,
            (self.ymax - self.ymin) / (self.ny - 1) as f64,
        )
    }

    /// Larger of the two axis spacings.
    pub fn cell(&self) -> f64 {
        let (hx, hy) = self.spacing();
        hx.max(hy)
    }

    pub fn points(&self) -> Vec<Point> {
        let mut pts = Vec::with_capacity(self.len());
        for iy in 0..self.ny {
            for ix in 0..self.nx {
                pts.push(self.point(ix, iy));
            }
        }
        pts
    }
}
