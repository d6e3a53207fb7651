//! Fourier-Bessel series for point-source scattering by a single disk.
//!
//! Shares nothing with the boundary-integral path except `J0, Y0, J1, Y1`:
//! higher integer orders come from the three-term recurrence (upward for `Y`,
//! Miller's downward normalization for `J`).

use num_complex::Complex64;

use super::BoundaryCondition;
use crate::specialfn::Cylinder01;
use crate::{Error, Point, Result};

/// Value of the truncated series together with the magnitude of its last term.
#[derive(Clone, Copy, Debug)]
pub struct SeriesValue {
    pub value: Complex64,
    pub tail: f64,
}

impl SeriesValue {
    /// Whether the last retained term is below `tol` relative to the sum.
    pub fn converged(&self, tol: f64) -> bool {
        self.tail <= tol * self.value.norm().max(f64::MIN_POSITIVE)
    }
}

/// `J_n(x)` and `Y_n(x)` for `n = 0..=nmax`.
pub fn bessel_integer_orders(x: f64, nmax: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(Error::domain(format!("integer-order Bessel needs x > 0, got {x}")));
    }
    let c = Cylinder01::eval(x);

    let mut y = vec![0.0; nmax + 1];
    y[0] = c.y0;
    if nmax >= 1 {
        y[1] = c.y1;
    }
    for n in 1..nmax {
        y[n + 1] = 2.0 * n as f64 / x * y[n] - y[n - 1];
    }

    let top = nmax.max(x as usize);
    let mut start = top + 20 + (40.0 * top as f64).sqrt() as usize;
    start += start % 2;
    let mut j = vec![0.0; start + 2];
    j[start] = 1e-300;
    for n in (1..=start).rev() {
        j[n - 1] = 2.0 * n as f64 / x * j[n] - j[n + 1];
        if j[n - 1].abs() > 1e250 {
            for v in &mut j[n - 1..] {
                *v *= 1e-250;
            }
        }
    }
    let norm = j[0] + 2.0 * j.iter().skip(2).step_by(2).sum::<f64>();
    j.truncate(nmax + 1);
    for v in &mut j {
        *v /= norm;
    }
    Ok((j, y))
}

/// Scattered field `u^s(x; z)` of a disk (radius `a`, given center) excited by
/// the point source `z`, summed over `|n| <= n_terms`.
///
/// `u^s = sum_n c_n H_n(k r_z) H_n(k r_x) e^{i n (theta_x - theta_z)}` with
/// `c_n = -(i/4) J_n(ka)/H_n(ka)` for a sound-soft disk and
/// `c_n = -(i/4) (J_n' + i lambda J_n)(ka) / (H_n' + i lambda H_n)(ka)` for
/// `du/dnu + i k lambda u = 0`.
pub fn circle_series_oracle(
    radius: f64,
    center: Point,
    k: f64,
    bc: BoundaryCondition,
    z: Point,
    x: Point,
    n_terms: usize,
) -> Result<SeriesValue> {
    let (rz, rx) = (z.distance(center), x.distance(center));
    if !(rz > radius && rx > radius) {
        return Err(Error::domain("series oracle needs source and receiver outside the disk"));
    }
    let phase = (x - center).angle() - (z - center).angle();
    let (ja, ya) = bessel_integer_orders(k * radius, n_terms + 1)?;
    let (jz, yz) = bessel_integer_orders(k * rz, n_terms)?;
    let (jx, yx) = bessel_integer_orders(k * rx, n_terms)?;
    let ka = k * radius;

    let ratio = |n: usize| -> Complex64 {
        let h = Complex64::new(ja[n], ya[n]);
        match bc.impedance() {
            None => ja[n] / h,
            Some(lambda) => {
                // J_n' = J_{n-1} - (n/x) J_n, with J_{-1} = -J_1
                let (jm, ym) = if n == 0 { (-ja[1], -ya[1]) } else { (ja[n - 1], ya[n - 1]) };
                let dj = jm - n as f64 / ka * ja[n];
                let dh = Complex64::new(jm, ym) - h * (n as f64 / ka);
                let il = Complex64::new(0.0, lambda);
                (il * ja[n] + dj) / (dh + il * h)
            }
        }
    };

    let quarter_i = Complex64::new(0.0, -0.25);
    let mut sum = Complex64::new(0.0, 0.0);
    let mut tail = 0.0;
    for n in 0..=n_terms {
        let hz = Complex64::new(jz[n], yz[n]);
        let hx = Complex64::new(jx[n], yx[n]);
        let angular = if n == 0 { 1.0 } else { 2.0 * (n as f64 * phase).cos() };
        let term = quarter_i * ratio(n) * hz * hx * angular;
        sum += term;
        tail = term.norm();
    }
    Ok(SeriesValue { value: sum, tail })
}
