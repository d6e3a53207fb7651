//! Cylinder functions of orders 0 and 1 and the 2D Helmholtz fundamental solution.
//!
//! Only real, positive arguments are needed anywhere in the crate, so the
//! Bessel functions come from the `libm` ports of the FreeBSD msun routines
//! (rational approximations on small arguments, modulus/phase expansions
//! beyond). Everything here is a pure function.

use num_complex::Complex64;

use crate::{Error, Point, Result};

/// `J0, Y0, J1, Y1` evaluated at one argument.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cylinder01 {
    pub j0: f64,
    pub y0: f64,
    pub j1: f64,
    pub y1: f64,
}

impl Cylinder01 {
    /// Evaluates all four functions; the caller guarantees `t > 0`.
    #[inline]
    pub(crate) fn eval(t: f64) -> Self {
        debug_assert!(t > 0.0);
        Cylinder01 {
            j0: libm::j0(t),
            y0: libm::y0(t),
            j1: libm::j1(t),
            y1: libm::y1(t),
        }
    }

    #[inline]
    pub fn h0(&self) -> Complex64 {
        Complex64::new(self.j0, self.y0)
    }

    #[inline]
    pub fn h1(&self) -> Complex64 {
        Complex64::new(self.j1, self.y1)
    }
}

fn check_argument(t: f64) -> Result<()> {
    if t.is_nan() || t <= 0.0 {
        return Err(Error::domain(format!(
            "cylinder functions need a positive argument, got {t}"
        )));
    }
    if t.is_infinite() {
        return Err(Error::domain("cylinder functions need a finite argument"));
    }
    Ok(())
}

/// `(J0(t), Y0(t))` for `t > 0`.
pub fn bessel_j0y0(t: f64) -> Result<(f64, f64)> {
    check_argument(t)?;
    Ok((libm::j0(t), libm::y0(t)))
}

/// `(J1(t), Y1(t))` for `t > 0`.
pub fn bessel_j1y1(t: f64) -> Result<(f64, f64)> {
    check_argument(t)?;
    Ok((libm::j1(t), libm::y1(t)))
}

/// Hankel function of the first kind `H_n(t) = J_n(t) + i Y_n(t)`, `n` in {0, 1}.
pub fn hankel1(order: u32, t: f64) -> Result<Complex64> {
    let (j, y) = match order {
        0 => bessel_j0y0(t)?,
        1 => bessel_j1y1(t)?,
        n => {
            return Err(Error::domain(format!(
                "hankel1 supports orders 0 and 1, got {n}"
            )))
        }
    };
    Ok(Complex64::new(j, y))
}

fn separation(x: Point, y: Point) -> Result<f64> {
    let r = x.distance(y);
    if r == 0.0 || !r.is_finite() {
        return Err(Error::Singularity(format!(
            "fundamental solution evaluated at coincident points {x} and {y}"
        )));
    }
    Ok(r)
}

fn check_wavenumber(k: f64) -> Result<()> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::domain(format!("wavenumber must be positive, got {k}")));
    }
    Ok(())
}

/// `Phi(x, y) = (i/4) H0(k|x - y|)`.
pub fn fundamental_solution(k: f64, x: Point, y: Point) -> Result<Complex64> {
    check_wavenumber(k)?;
    let r = separation(x, y)?;
    Ok(phi_unchecked(k, r))
}

/// Gradient with respect to `x`: `-(ik/4) H1(k|x - y|) (x - y)/|x - y|`.
pub fn grad_fundamental_solution(k: f64, x: Point, y: Point) -> Result<(Complex64, Complex64)> {
    check_wavenumber(k)?;
    let r = separation(x, y)?;
    let h1 = Cylinder01::eval(k * r).h1();
    let scale = Complex64::new(0.0, -0.25 * k) * h1 / r;
    let d = x - y;
    Ok((scale * d.x, scale * d.y))
}

/// `(i/4) H0(k r)` for a known positive separation.
#[inline]
pub(crate) fn phi_unchecked(k: f64, r: f64) -> Complex64 {
    let t = k * r;
    Complex64::new(-0.25 * libm::y0(t), 0.25 * libm::j0(t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_2_PI, PI};

    // Independent oracles: power series on small arguments, and the Bessel
    // integral representations evaluated with composite Gauss-Legendre
    // quadrature on any argument.

    const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

    fn series_j0(t: f64) -> f64 {
        let q = -(t * t) / 4.0;
        let (mut term, mut sum) = (1.0, 1.0);
        for m in 1..60 {
            term *= q / (m * m) as f64;
            sum += term;
        }
        sum
    }

    fn series_y0(t: f64) -> f64 {
        let q = -(t * t) / 4.0;
        let (mut term, mut harmonic, mut sum) = (1.0, 0.0, 0.0);
        for m in 1..60 {
            term *= q / (m * m) as f64;
            harmonic += 1.0 / m as f64;
            sum -= harmonic * term;
        }
        FRAC_2_PI * ((t / 2.0).ln() + EULER_GAMMA) * series_j0(t) + FRAC_2_PI * sum
    }

    fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
        let mut rule = Vec::with_capacity(n);
        for i in 0..n {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            rule.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
        }
        rule
    }

    fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
        let rule = gauss_legendre(12);
        let h = (b - a) / panels as f64;
        let mut sum = 0.0;
        for p in 0..panels {
            let mid = a + (p as f64 + 0.5) * h;
            for &(x, w) in &rule {
                sum += w * f(mid + 0.5 * h * x);
            }
        }
        0.5 * h * sum
    }

    /// `J_n(t) = (1/pi) int_0^pi cos(n s - t sin s) ds`.
    fn integral_j(n: f64, t: f64) -> f64 {
        let panels = 40 + (t as usize) / 2;
        integrate(|s| (n * s - t * s.sin()).cos(), 0.0, PI, panels) / PI
    }

    /// `Y_n(t) = (1/pi) int_0^pi sin(t sin s - n s) ds
    ///          - (1/pi) int_0^inf (e^{n u} + (-1)^n e^{-n u}) e^{-t sinh u} du`.
    fn integral_y(n: f64, t: f64) -> f64 {
        let panels = 40 + (t as usize) / 2;
        let first = integrate(|s| (t * s.sin() - n * s).sin(), 0.0, PI, panels);
        let sign = if n as i64 % 2 == 0 { 1.0 } else { -1.0 };
        let upper = (2.0 * (40.0 / t).max(1.0)).asinh() + 1.0;
        let second = integrate(
            |u| ((n * u).exp() + sign * (-n * u).exp()) * (-t * u.sinh()).exp(),
            0.0,
            upper,
            400,
        );
        (first - second) / PI
    }

    /// Hankel's asymptotic expansion for `t >= 30`, returning `(J_n, Y_n)`, `n` in {0, 1}.
    fn asymptotic_jy(n: u32, t: f64) -> (f64, f64) {
        let mu = 4.0 * (n * n) as f64;
        let (mut p, mut q) = (0.0, 0.0);
        let mut term = 1.0;
        for k in 0..60 {
            if k > 0 {
                let next = term * (mu - ((2 * k - 1) * (2 * k - 1)) as f64) / (k as f64 * 8.0 * t);
                if next.abs() >= term.abs() {
                    break;
                }
                term = next;
            }
            let signed = if (k / 2) % 2 == 0 { term } else { -term };
            if k % 2 == 0 {
                p += signed;
            } else {
                q += signed;
            }
            if term.abs() < 1e-18 {
                break;
            }
        }
        let (s, c) = t.sin_cos();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let (cos_chi, sin_chi) = if n == 0 {
            ((c + s) * r, (s - c) * r)
        } else {
            ((s - c) * r, (-s - c) * r)
        };
        let amp = (2.0 / (PI * t)).sqrt();
        (amp * (p * cos_chi - q * sin_chi), amp * (p * sin_chi + q * cos_chi))
    }

    fn envelope(t: f64) -> f64 {
        (2.0 / (PI * t)).sqrt().min(1.0)
    }

    #[test]
    fn j0y0_at_one_matches_series() {
        let (j, y) = bessel_j0y0(1.0).unwrap();
        assert!((j - series_j0(1.0)).abs() < 1e-15);
        assert!((y - series_y0(1.0)).abs() < 1e-15);
        assert!((j - 0.765_197_686_6).abs() < 1e-10);
        assert!((y - 0.088_256_964_2).abs() < 1e-10);
    }

    #[test]
    fn j0y0_series_agreement_small_arguments() {
        for i in 1..=80 {
            let t = 0.1 * i as f64;
            let (j, y) = bessel_j0y0(t).unwrap();
            assert!((j - series_j0(t)).abs() <= 1e-12 * envelope(t), "J0({t})");
            assert!((y - series_y0(t)).abs() <= 1e-12 * y.abs().max(envelope(t)), "Y0({t})");
        }
    }

    #[test]
    fn agrees_with_independent_oracles_log_spaced() {
        // Relative to the local envelope sqrt(2/(pi t)): near a zero of J or Y,
        // pointwise relative error is meaningless. Quadrature of the integral
        // representations loses ~t eps at large t, so the asymptotic expansion
        // takes over there.
        let mut t = 1e-3;
        while t <= 1e4 {
            let (j0, y0) = bessel_j0y0(t).unwrap();
            let (j1, y1) = bessel_j1y1(t).unwrap();
            let tol = 1e-12 * envelope(t).max(y0.abs()).max(y1.abs());
            if t >= 30.0 {
                let (aj0, ay0) = asymptotic_jy(0, t);
                let (aj1, ay1) = asymptotic_jy(1, t);
                assert!((j0 - aj0).abs() <= tol, "J0({t})");
                assert!((y0 - ay0).abs() <= tol, "Y0({t})");
                assert!((j1 - aj1).abs() <= tol, "J1({t})");
                assert!((y1 - ay1).abs() <= tol, "Y1({t})");
                t *= 1.37;
                continue;
            }
            assert!((j0 - integral_j(0.0, t)).abs() <= tol, "J0({t})");
            assert!((j1 - integral_j(1.0, t)).abs() <= tol, "J1({t})");
            if t >= 0.05 {
                assert!((y0 - integral_y(0.0, t)).abs() <= tol, "Y0({t})");
                assert!((y1 - integral_y(1.0, t)).abs() <= tol, "Y1({t})");
            }
            t *= 1.37;
        }
    }

    #[test]
    #[allow(clippy::excessive_precision)]
    fn frozen_high_precision_values() {
        // 30-digit reference values computed offline with an arbitrary-precision library.
        let cases = [
            (5.0, -0.177596771314338304347, -0.308517625249033780074, -0.327579137591465222038, 0.147863143391226844801),
            (20.0, 0.167024664340583154727, 0.0626405968093838311617, 0.0668331241758500455790, -0.165511614362521295864),
            (1e3, 0.0247866861524201745613, 0.00471591797762281339977, 0.00472831190708952391758, -0.0247843312923517789149),
            (1e4, -0.00709616035338880147727, 0.00364780555898660588669, 0.00364745075552958034412, 0.00709634275253649513502),
        ];
        for (t, j0, y0, j1, y1) in cases {
            let tol = 1e-12 * envelope(t);
            let (a, b) = bessel_j0y0(t).unwrap();
            let (c, d) = bessel_j1y1(t).unwrap();
            assert!((a - j0).abs() < tol && (b - y0).abs() < tol, "order 0 at {t}");
            assert!((c - j1).abs() < tol && (d - y1).abs() < tol, "order 1 at {t}");
        }
    }

    #[test]
    fn small_argument_limits_and_domain() {
        assert!(bessel_j0y0(0.0).is_err());
        assert!(bessel_j0y0(-1.0).is_err());
        assert!(bessel_j0y0(f64::NAN).is_err());
        assert!(hankel1(0, 0.0).is_err());
        assert!(hankel1(2, 1.0).is_err());
        let (j, _) = bessel_j0y0(1e-9).unwrap();
        assert!((j - 1.0).abs() < 1e-15);
    }

    #[test]
    fn large_argument_modulus() {
        let h = hankel1(0, 100.0).unwrap();
        assert!((10.0 * h.norm() - (2.0 / PI).sqrt()).abs() < 1e-3);
    }

    #[test]
    fn wronskian_identity() {
        for t in [0.5, 1.0, 5.0] {
            let (j0, y0) = bessel_j0y0(t).unwrap();
            let (j1, y1) = bessel_j1y1(t).unwrap();
            assert!((j0 * y1 - j1 * y0 + 2.0 / (PI * t)).abs() < 1e-10);
        }
        let mut t = 1e-2;
        while t < 1e3 {
            let c = Cylinder01::eval(t);
            let w = c.j0 * c.y1 - c.j1 * c.y0;
            assert!((w + 2.0 / (PI * t)).abs() <= 1e-10 * (2.0 / (PI * t)), "t = {t}");
            t *= 1.1;
        }
    }

    #[test]
    fn hankel0_has_no_real_zero() {
        for i in 1..=100_000 {
            let t = 1e-2 * i as f64;
            assert!(hankel1(0, t).unwrap().norm() > 0.0);
        }
    }

    #[test]
    fn hankel0_derivative_is_minus_hankel1() {
        for t in [0.3, 1.0, 2.5, 7.9, 8.1, 30.0, 250.0] {
            let h = 1e-6 * t;
            let fd = (hankel1(0, t + h).unwrap() - hankel1(0, t - h).unwrap()) / (2.0 * h);
            let h1 = hankel1(1, t).unwrap();
            assert!((fd + h1).norm() <= 1e-6 * h1.norm(), "t = {t}");
        }
    }

    #[test]
    fn fundamental_solution_value_and_symmetry() {
        let phi = fundamental_solution(2.0, Point::new(0.1, 0.2), Point::new(0.1, 0.7)).unwrap();
        assert!((phi.re + 0.022_064_241_0).abs() < 1e-10);
        assert!((phi.im - 0.191_299_421_7).abs() < 1e-10);

        let mut seed = 12345u64;
        let mut next = || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (seed >> 11) as f64 / (1u64 << 53) as f64 * 10.0 - 5.0
        };
        for _ in 0..100 {
            let x = Point::new(next(), next());
            let y = Point::new(next(), next());
            assert_eq!(
                fundamental_solution(3.3, x, y).unwrap(),
                fundamental_solution(3.3, y, x).unwrap()
            );
        }
        assert!(matches!(
            fundamental_solution(1.0, Point::ORIGIN, Point::ORIGIN),
            Err(Error::Singularity(_))
        ));
    }

    #[test]
    fn fundamental_solution_satisfies_helmholtz() {
        let k = 5.0;
        let y = Point::new(0.3, -0.2);
        let h = 1e-3;
        for x in [Point::new(1.0, 1.0), Point::new(-2.0, 0.5), Point::new(0.3, 3.0)] {
            let f = |p: Point| fundamental_solution(k, p, y).unwrap();
            let lap = (f(x + Point::new(h, 0.0))
                + f(x - Point::new(h, 0.0))
                + f(x + Point::new(0.0, h))
                + f(x - Point::new(0.0, h))
                - f(x) * 4.0)
                / (h * h);
            assert!((lap + f(x) * (k * k)).norm() <= 1e-4, "residual at {x}");
        }
    }

    #[test]
    fn gradient_properties() {
        let k = 4.0;
        let pairs = [
            (Point::new(1.0, 0.5), Point::new(-0.3, 0.2)),
            (Point::new(-2.0, 1.5), Point::new(0.7, -1.1)),
            (Point::new(0.1, 0.1), Point::new(0.2, 0.3)),
        ];
        for (x, y) in pairs {
            let (gx, gy) = grad_fundamental_solution(k, x, y).unwrap();
            let (hx, hy) = grad_fundamental_solution(k, y, x).unwrap();
            assert_eq!(gx, -hx);
            assert_eq!(gy, -hy);

            let h = 1e-5;
            let f = |p: Point| fundamental_solution(k, p, y).unwrap();
            let fx = (f(x + Point::new(h, 0.0)) - f(x - Point::new(h, 0.0))) / (2.0 * h);
            let fy = (f(x + Point::new(0.0, h)) - f(x - Point::new(0.0, h))) / (2.0 * h);
            assert!((fx - gx).norm() < 1e-6 && (fy - gy).norm() < 1e-6);

            // perpendicular to x - y
            let d = (x - y).rotate_cw();
            let along = gx * d.x + gy * d.y;
            assert!(along.norm() <= 1e-15 * (gx.norm() + gy.norm()) * d.norm());
        }
        // Exactly perpendicular configuration.
        let (gx, _) = grad_fundamental_solution(k, Point::new(0.0, 2.0), Point::new(0.0, -1.0)).unwrap();
        assert_eq!(gx, Complex64::new(0.0, 0.0));
    }
}
