//! Finite-difference stencils used for derivative closures and cross-checks.
//!
//! Step sizes follow the usual machine-epsilon scalings: `eps^(1/3)` for
//! first derivatives of function values, `eps^(1/4)` for second derivatives,
//! and `eps^(1/7)` for the 7-point third-derivative stencil.

/// Step for a centered first difference around `x`.
pub fn step1(x: f64) -> f64 {
    f64::EPSILON.powf(1.0 / 3.0) * x.abs().max(1.0)
}

/// Step for a centered second difference around `x`.
pub fn step2(x: f64) -> f64 {
    f64::EPSILON.powf(1.0 / 4.0) * x.abs().max(1.0)
}

/// Step for the 7-point stencils around `x`.
pub fn step7(x: f64) -> f64 {
    f64::EPSILON.powf(1.0 / 7.0) * x.abs().max(1.0)
}

/// Centered first derivative, O(h^2).
pub fn d1_central<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}

/// Centered second derivative, O(h^2).
pub fn d2_central<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h)
}

/// Centered mixed second derivative d^2f/(dx dy), O(h^2).
pub fn d2_mixed<F: Fn(f64, f64) -> f64>(f: F, x: f64, y: f64, hx: f64, hy: f64) -> f64 {
    (f(x + hx, y + hy) - f(x + hx, y - hy) - f(x - hx, y + hy) + f(x - hx, y - hy))
        / (4.0 * hx * hy)
}

// 7-point centered coefficients (offsets -3..=3).
const C7_D1: [f64; 7] = [
    -1.0 / 60.0,
    3.0 / 20.0,
    -3.0 / 4.0,
    0.0,
    3.0 / 4.0,
    -3.0 / 20.0,
    1.0 / 60.0,
];
const C7_D2: [f64; 7] = [
    1.0 / 90.0,
    -3.0 / 20.0,
    3.0 / 2.0,
    -49.0 / 18.0,
    3.0 / 2.0,
    -3.0 / 20.0,
    1.0 / 90.0,
];
const C7_D3: [f64; 7] = [1.0 / 8.0, -1.0, 13.0 / 8.0, 0.0, -13.0 / 8.0, 1.0, -1.0 / 8.0];

fn stencil7<F: Fn(f64) -> f64>(f: &F, x: f64, h: f64, coeffs: &[f64; 7], power: i32) -> f64 {
    let mut acc = 0.0;
    for (i, c) in coeffs.iter().enumerate() {
        if *c != 0.0 {
            let off = (i as f64) - 3.0;
            acc += c * f(x + off * h);
        }
    }
    acc / h.powi(power)
}

/// 7-point first derivative, O(h^6).
pub fn d1_stencil7<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    stencil7(&f, x, h, &C7_D1, 1)
}

/// 7-point second derivative, O(h^6).
pub fn d2_stencil7<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    stencil7(&f, x, h, &C7_D2, 2)
}

/// 7-point third derivative, O(h^4).
pub fn d3_stencil7<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    stencil7(&f, x, h, &C7_D3, 3)
}

/// Third derivative with one Richardson extrapolation of the 7-point
/// stencil (kills the h^4 term; needed when high-order derivatives of f
/// are large relative to the value).
pub fn d3_refined<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    let coarse = stencil7(&f, x, h, &C7_D3, 3);
    let fine = stencil7(&f, x, h / 2.0, &C7_D3, 3);
    (16.0 * fine - coarse) / 15.0
}

/// Richardson slope from values of a residual at steps h and h/2:
/// `log2(|r(h)| / |r(h/2)|)`. Close to the convergence order when the
/// residual is discretization-dominated.
pub fn richardson_slope(res_h: f64, res_h2: f64) -> f64 {
    (res_h.abs() / res_h2.abs()).log2()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn stencils_differentiate_exp() {
        let f = |x: f64| (1.3 * x).exp();
        let x = 0.4;
        let d = 1.3 * f(x);
        assert_relative_eq!(d1_central(f, x, step1(x)), d, max_relative = 1e-9);
        assert_relative_eq!(d2_central(f, x, step2(x)), 1.3 * d, max_relative = 1e-6);
        let h = step7(x);
        assert_relative_eq!(d1_stencil7(f, x, h), d, max_relative = 1e-10);
        assert_relative_eq!(d2_stencil7(f, x, h), 1.3 * d, max_relative = 1e-8);
        assert_relative_eq!(d3_stencil7(f, x, h), 1.69 * d, max_relative = 1e-6);
    }

    #[test]
    fn mixed_derivative_of_product() {
        let f = |x: f64, y: f64| x.sin() * y.cos();
        let (x, y) = (0.7f64, 0.3f64);
        let exact = x.cos() * (-y.sin());
        let d = d2_mixed(f, x, y, step2(x), step2(y));
        assert_relative_eq!(d, exact, max_relative = 1e-6);
    }

    #[test]
    fn richardson_slope_of_quadratic_residual() {
        // residual(h) = 3 h^2 exactly -> slope 2
        let slope = richardson_slope(3.0 * 0.01f64.powi(2), 3.0 * 0.005f64.powi(2));
        assert_relative_eq!(slope, 2.0, epsilon = 1e-12);
    }
}
