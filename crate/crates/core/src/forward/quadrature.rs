//! Periodic quadrature on `2n` equispaced nodes `t_j = pi j / n`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

/// Weights `R_d`, `d = 0..2n`, such that
/// `int_0^{2pi} ln(4 sin^2((t_i - tau)/2)) f(tau) dtau ~ sum_j R_{|i-j|} f(t_j)`,
/// exact for trigonometric polynomials of degree below `n`.
pub(crate) fn log_weights(nodes: usize) -> Vec<f64> {
    assert!(nodes >= 2 && nodes.is_multiple_of(2), "node count must be even");
    let n = nodes / 2;
    let nf = n as f64;
    (0..nodes)
        .map(|d| {
            let mut sum = 0.0;
            for m in 1..n {
                sum += (m as f64 * d as f64 * PI / nf).cos() / m as f64;
            }
            let alt = if d % 2 == 0 { 1.0 } else { -1.0 };
            -2.0 * PI / nf * sum - PI / (nf * nf) * alt
        })
        .collect()
}

/// `ln(4 sin^2(s/2))`.
#[inline]
pub(crate) fn log_sin2(s: f64) -> f64 {
    let h = (0.5 * s).sin();
    (4.0 * h * h).ln()
}

/// Fourier differentiation matrix on the equispaced periodic grid.
pub(crate) fn diff_matrix(nodes: usize) -> DMatrix<f64> {
    assert!(nodes.is_multiple_of(2));
    let h = 2.0 * PI / nodes as f64;
    DMatrix::from_fn(nodes, nodes, |i, j| {
        if i == j {
            0.0
        } else {
            let d = i as isize - j as isize;
            let sign = if d.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            0.5 * sign / (0.5 * d as f64 * h).tan()
        }
    })
}

/// Trigonometric interpolant of equispaced periodic samples, evaluated at `m`
/// equispaced points (including `t = 0`). The Nyquist mode is taken as a cosine.
pub(crate) fn trig_resample(values: &[Complex64], m: usize) -> Vec<Complex64> {
    let nodes = values.len();
    assert!(nodes.is_multiple_of(2));
    let n = nodes / 2;
    let tj = |j: usize| 2.0 * PI * j as f64 / nodes as f64;
    // c_q for q = -(n-1)..=(n-1), plus the Nyquist coefficient
    let mut coeffs = Vec::with_capacity(2 * n - 1);
    for q in -(n as isize - 1)..=(n as isize - 1) {
        let mut c = Complex64::new(0.0, 0.0);
        for (j, v) in values.iter().enumerate() {
            c += v * Complex64::from_polar(1.0, -(q as f64) * tj(j));
        }
        coeffs.push((q, c / nodes as f64));
    }
    let nyquist: Complex64 = values
        .iter()
        .enumerate()
        .map(|(j, v)| if j % 2 == 0 { *v } else { -*v })
        .sum::<Complex64>()
        / nodes as f64;
    (0..m)
        .map(|i| {
            let t = 2.0 * PI * i as f64 / m as f64;
            let mut f = nyquist * (n as f64 * t).cos();
            for &(q, c) in &coeffs {
                f += c * Complex64::from_polar(1.0, q as f64 * t);
            }
            f
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_weights_integrate_fourier_modes() {
        // int ln(4 sin^2((t - tau)/2)) cos(m tau) dtau = -2 pi cos(m t)/m, and 0 for m = 0.
        let nodes = 32;
        let w = log_weights(nodes);
        let t_i = PI * 5.0 / 16.0;
        let i = 5;
        for m in 0..16 {
            let approx: f64 = (0..nodes)
                .map(|j| {
                    let d = (i as isize - j as isize).rem_euclid(nodes as isize) as usize;
                    w[d] * (m as f64 * PI * j as f64 / 16.0).cos()
                })
                .sum();
            let exact = if m == 0 { 0.0 } else { -2.0 * PI * (m as f64 * t_i).cos() / m as f64 };
            assert!((approx - exact).abs() < 1e-12, "mode {m}: {approx} vs {exact}");
        }
    }

    #[test]
    fn differentiation_is_exact_on_trig_polynomials() {
        let nodes = 24;
        let d = diff_matrix(nodes);
        let t: Vec<f64> = (0..nodes).map(|j| 2.0 * PI * j as f64 / nodes as f64).collect();
        let f = nalgebra::DVector::from_iterator(nodes, t.iter().map(|&s| (3.0 * s).sin() + (5.0 * s).cos()));
        let df = &d * f;
        for (j, &s) in t.iter().enumerate() {
            let exact = 3.0 * (3.0 * s).cos() - 5.0 * (5.0 * s).sin();
            assert!((df[j] - exact).abs() < 1e-12);
        }
    }

    #[test]
    fn resampling_reproduces_band_limited_functions() {
        let nodes = 16;
        let f = |t: f64| Complex64::new((2.0 * t).cos(), (3.0 * t).sin() + 0.5);
        let vals: Vec<Complex64> = (0..nodes).map(|j| f(2.0 * PI * j as f64 / nodes as f64)).collect();
        let fine = trig_resample(&vals, 48);
        for (i, v) in fine.iter().enumerate() {
            assert!((v - f(2.0 * PI * i as f64 / 48.0)).norm() < 1e-13);
        }
        // resampling at the same nodes is the identity
        let same = trig_resample(&vals, nodes);
        for (a, b) in same.iter().zip(&vals) {
            assert!((a - b).norm() < 1e-13);
        }
    }
}
