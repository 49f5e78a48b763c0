//! Complex Bessel functions J0 and J1 by power series.
//!
//! Arguments stay within |z| <= ~30 here (Womersley numbers up to 20), where
//! the alternating series converges quickly and the intermediate terms remain
//! small enough relative to the result that no significant cancellation
//! occurs. The loop stops once a term falls below 1e-16 of the running sum.

use nalgebra::Complex;

const REL_STOP: f64 = 1e-16;
const MAX_TERMS: usize = 200;

/// J0(z) = sum_m (-1)^m (z/2)^(2m) / (m!)^2
pub fn j0(z: Complex<f64>) -> Complex<f64> {
    let q = -(z * z) * 0.25;
    let mut term = Complex::new(1.0, 0.0);
    let mut sum = term;
    for m in 1..MAX_TERMS {
        term = term * q / ((m * m) as f64);
        sum += term;
        if term.norm() < REL_STOP * sum.norm().max(f64::MIN_POSITIVE) {
            break;
        }
    }
    sum
}

/// J1(z) = (z/2) sum_m (-1)^m (z/2)^(2m) / (m! (m+1)!)
pub fn j1(z: Complex<f64>) -> Complex<f64> {
    let q = -(z * z) * 0.25;
    let mut term = Complex::new(1.0, 0.0);
    let mut sum = term;
    for m in 1..MAX_TERMS {
        term = term * q / ((m * (m + 1)) as f64);
        sum += term;
        if term.norm() < REL_STOP * sum.norm().max(f64::MIN_POSITIVE) {
            break;
        }
    }
    sum * z * 0.5
}
