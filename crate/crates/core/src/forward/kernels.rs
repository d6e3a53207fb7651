//! Nyström matrices of the boundary integral operators on one smooth closed curve.
//!
//! All operators carry the factor 2 of the jump relations:
//! `S = 2 int Phi`, `K = 2 int dPhi/dnu(y)`, `K' = 2 int dPhi/dnu(x)`,
//! `T = 2 d/dnu(x) int dPhi/dnu(y)`. Kernels with a logarithmic singularity
//! are split as `A(t,tau) = A1(t,tau) ln(4 sin^2((t-tau)/2)) + A2(t,tau)` with
//! smooth `A1`, `A2`; the `ln` part is integrated with [`log_weights`] and the
//! remainder with the trapezoidal rule.

use std::f64::consts::{PI, TAU};

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::quadrature::{diff_matrix, log_sin2, log_weights};
use crate::geometry::ParametricCurve;
use crate::specialfn::Cylinder01;
use crate::Point;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Quadrature nodes on one boundary.
#[derive(Clone, Debug)]
pub(crate) struct Panel {
    pub t: Vec<f64>,
    pub x: Vec<Point>,
    pub dx: Vec<Point>,
    pub ddx: Vec<Point>,
    pub normal: Vec<Point>,
    pub speed: Vec<f64>,
    /// Trapezoidal weight `2 pi / n`.
    pub weight: f64,
}

impl Panel {
    pub fn new(curve: &ParametricCurve, n: usize) -> Self {
        let mut p = Panel {
            t: Vec::with_capacity(n),
            x: Vec::with_capacity(n),
            dx: Vec::with_capacity(n),
            ddx: Vec::with_capacity(n),
            normal: Vec::with_capacity(n),
            speed: Vec::with_capacity(n),
            weight: TAU / n as f64,
        };
        for j in 0..n {
            let t = TAU * j as f64 / n as f64;
            let s = curve.eval(t);
            p.t.push(t);
            p.x.push(s.point);
            p.dx.push(s.tangent);
            p.ddx.push(s.second);
            p.normal.push(s.normal);
            p.speed.push(s.speed);
        }
        p
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    /// `(x'_2 x''_1 - x'_1 x''_2) / (2 pi |x'|^2)`: diagonal of the double-layer kernels.
    fn curvature_term(&self, i: usize) -> f64 {
        let (d, dd) = (self.dx[i], self.ddx[i]);
        (d.y * dd.x - d.x * dd.y) / (TAU * self.speed[i] * self.speed[i])
    }

    /// Diagonal of the smooth part of `(i/2) H0(k r)`, per unit speed.
    fn log_diagonal(&self, k: f64, i: usize) -> Complex64 {
        Complex64::new(
            -EULER_GAMMA / PI - (0.5 * k * self.speed[i]).ln() / PI,
            0.5,
        )
    }
}

/// The self-interaction operators needed for one boundary condition.
pub(crate) struct SelfOperators {
    pub single: DMatrix<Complex64>,
    pub double: DMatrix<Complex64>,
    /// `(K', T)`, only assembled for Neumann/impedance boundaries.
    pub normal: Option<(DMatrix<Complex64>, DMatrix<Complex64>)>,
}

pub(crate) fn self_operators(panel: &Panel, k: f64, with_normal: bool) -> SelfOperators {
    let n = panel.len();
    let rw = log_weights(n);
    let w = panel.weight;
    let inv2pi = 1.0 / TAU;

    let mut single = DMatrix::zeros(n, n);
    let mut double = DMatrix::zeros(n, n);
    let mut adjoint = DMatrix::zeros(if with_normal { n } else { 0 }, if with_normal { n } else { 0 });
    let mut s_plain = adjoint.clone();
    let mut n_part = adjoint.clone();

    for i in 0..n {
        for j in 0..n {
            let r_ij = rw[(i as isize - j as isize).rem_euclid(n as isize) as usize];
            let (si, sj) = (panel.speed[i], panel.speed[j]);
            if i == j {
                let diag = panel.log_diagonal(k, i);
                let curv = panel.curvature_term(i);
                single[(i, i)] = r_ij * (-inv2pi * si) + w * diag * si;
                double[(i, i)] = Complex64::new(w * curv, 0.0);
                if with_normal {
                    adjoint[(i, i)] = Complex64::new(w * curv, 0.0);
                    s_plain[(i, i)] = r_ij * -inv2pi + w * diag;
                    n_part[(i, i)] = r_ij * (-inv2pi * k * k * si) + w * diag * (k * k * si);
                }
                continue;
            }
            let diff = panel.x[i] - panel.x[j];
            let r = diff.norm();
            let c = Cylinder01::eval(k * r);
            let (h0, h1) = (c.h0(), c.h1());
            let ln = log_sin2(panel.t[i] - panel.t[j]);

            // S: (i/2) H0(kr) |x'(tau)|
            let s1 = -inv2pi * c.j0 * sj;
            let s_full = 0.5 * I * h0 * sj;
            single[(i, j)] = r_ij * s1 + w * (s_full - s1 * ln);

            // K: (ik/2) H1(kr)/r n(tau).(x(t) - x(tau)), n unnormalized
            let d = panel.dx[j].rotate_cw().dot(diff);
            let k1 = -k * inv2pi * c.j1 * d / r;
            let k_full = 0.5 * I * k * h1 * d / r;
            double[(i, j)] = r_ij * k1 + w * (k_full - k1 * ln);

            if with_normal {
                // K': -(ik/2) H1(kr)/r n(t).(x(t) - x(tau)) |x'(tau)|/|x'(t)|
                let dp = panel.dx[i].rotate_cw().dot(diff) * sj / si;
                let a1 = k * inv2pi * c.j1 * dp / r;
                let a_full = -0.5 * I * k * h1 * dp / r;
                adjoint[(i, j)] = r_ij * a1 + w * (a_full - a1 * ln);

                // (i/2) H0(kr) without the speed factor, applied to psi'
                let p1 = -inv2pi * c.j0;
                let p_full = 0.5 * I * h0;
                s_plain[(i, j)] = r_ij * p1 + w * (p_full - p1 * ln);

                // (ik^2/2) H0(kr) x'(t).x'(tau)/|x'(t)|
                let tt = panel.dx[i].dot(panel.dx[j]) / si;
                let n1 = -inv2pi * k * k * c.j0 * tt;
                let n_full = 0.5 * I * k * k * h0 * tt;
                n_part[(i, j)] = r_ij * n1 + w * (n_full - n1 * ln);
            }
        }
    }

    let normal = with_normal.then(|| {
        // Maue: T psi = (1/|x'|) d/dt S~[psi'] + N psi
        let dm = diff_matrix(n).map(|v| Complex64::new(v, 0.0));
        let mut hyper = &dm * (&s_plain * &dm);
        for i in 0..n {
            let scale = 1.0 / panel.speed[i];
            for j in 0..n {
                hyper[(i, j)] *= scale;
            }
        }
        hyper += n_part;
        (adjoint, hyper)
    });

    SelfOperators {
        single,
        double,
        normal,
    }
}

/// Combined layer potential `[dPhi/dnu(y) - i eta Phi](x, y)` and, if a unit
/// normal at `x` is given, its normal derivative at `x`. Both are scaled by
/// `|x'(tau)|`, i.e. `n_y` is the unnormalized normal `x'(tau)` rotated by -pi/2.
#[inline]
pub(crate) fn layer_kernel(
    k: f64,
    eta: f64,
    x: Point,
    nu_x: Option<Point>,
    y: Point,
    n_y: Point,
) -> (Complex64, Complex64) {
    let diff = x - y;
    let r = diff.norm();
    let c = Cylinder01::eval(k * r);
    let (h0, h1) = (c.h0(), c.h1());
    let rn_y = diff.dot(n_y) / r;
    let speed = n_y.norm();
    let phi = 0.25 * I * h0;
    let dphi_dny = 0.25 * I * k * h1 * rn_y;
    let value = dphi_dny - I * eta * phi * speed;

    let normal = match nu_x {
        None => Complex64::new(0.0, 0.0),
        Some(nu) => {
            let rn_x = diff.dot(nu) / r;
            let dphi_dnx = -0.25 * I * k * h1 * rn_x * speed;
            // H1'(s) = H0(s) - H1(s)/s
            let dh1 = h0 - h1 / (k * r);
            let mixed = 0.25 * I * k * (k * dh1 * rn_x * rn_y + h1 * (nu.dot(n_y) - rn_x * rn_y) / r);
            mixed - I * eta * dphi_dnx
        }
    };
    (value, normal)
}
