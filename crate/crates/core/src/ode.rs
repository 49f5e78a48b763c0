//! Embedded Dormand-Prince 5(4) integrator with continuous (dense) output.
//!
//! The solver advances a small fixed-size state vector with adaptive step
//! control and stores, per accepted step, the five-coefficient continuous
//! extension so the solution can be evaluated anywhere inside the step at
//! interpolation error commensurate with the local tolerance.

use crate::error::{Error, Result};

// Butcher tableau (Dormand & Prince 1980), FSAL form.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
// Error coefficients (5th minus embedded 4th order solution).
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
// Dense-output coefficients.
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// Verdict of the right-hand side at a proposed evaluation point.
pub enum Rhs<const N: usize> {
    /// Derivative of the state.
    Ok([f64; N]),
    /// The point is unusable; the caller wants the integration to stop with
    /// the given cause. The step leading here is discarded and the solution
    /// is truncated at the last point where `halt_when` was clear.
    Halt(Error),
}

/// Integration options.
#[derive(Debug, Clone)]
pub struct OdeOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_steps: usize,
    pub initial_step: Option<f64>,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_steps: 1_000_000,
            initial_step: None,
        }
    }
}

/// One accepted step together with its continuous extension.
#[derive(Debug, Clone)]
pub struct DenseSegment<const N: usize> {
    pub t0: f64,
    pub h: f64,
    cont: [[f64; N]; 5],
}

impl<const N: usize> DenseSegment<N> {
    /// Evaluate the interpolant at `t` inside `[t0, t0 + h]`.
    pub fn eval(&self, t: f64) -> [f64; N] {
        let theta = (t - self.t0) / self.h;
        let th1 = 1.0 - theta;
        let mut y = [0.0; N];
        for i in 0..N {
            let c = &self.cont;
            y[i] = c[0][i]
                + theta * (c[1][i] + th1 * (c[2][i] + theta * (c[3][i] + th1 * c[4][i])));
        }
        y
    }
}

/// Why the integration ended.
#[derive(Debug, Clone)]
pub enum OdeEnd {
    /// Reached the end of the requested span.
    Completed,
    /// A halt condition triggered; carries the cause.
    Halted(Error),
}

impl OdeEnd {
    pub fn is_completed(&self) -> bool {
        matches!(self, OdeEnd::Completed)
    }
}

/// Dense solution of an initial value problem on `[t0, t_end]` (direction
/// given by the sign of `t_end - t0`).
#[derive(Debug, Clone)]
pub struct OdeSolution<const N: usize> {
    pub t0: f64,
    /// Final time actually reached.
    pub t_end: f64,
    pub y0: [f64; N],
    pub y_end: [f64; N],
    pub end: OdeEnd,
    segments: Vec<DenseSegment<N>>,
    /// Accepted step boundary times (length = segments + 1).
    knots: Vec<f64>,
}

impl<const N: usize> OdeSolution<N> {
    pub fn sample_times(&self) -> &[f64] {
        &self.knots
    }

    pub fn n_steps(&self) -> usize {
        self.segments.len()
    }

    fn locate(&self, t: f64) -> &DenseSegment<N> {
        let forward = self.t_end >= self.t0;
        let idx = if forward {
            match self.knots.binary_search_by(|k| k.partial_cmp(&t).unwrap()) {
                Ok(i) => i.min(self.segments.len().saturating_sub(1)),
                Err(i) => i.saturating_sub(1).min(self.segments.len() - 1),
            }
        } else {
            // knots decreasing
            match self
                .knots
                .binary_search_by(|k| t.partial_cmp(k).unwrap())
            {
                Ok(i) => i.min(self.segments.len().saturating_sub(1)),
                Err(i) => i.saturating_sub(1).min(self.segments.len() - 1),
            }
        };
        &self.segments[idx]
    }

    /// Evaluate the dense output at `t` (clamped to the covered span).
    pub fn eval(&self, t: f64) -> [f64; N] {
        if self.segments.is_empty() {
            return self.y0;
        }
        let (lo, hi) = if self.t_end >= self.t0 {
            (self.t0, self.t_end)
        } else {
            (self.t_end, self.t0)
        };
        let tc = t.clamp(lo, hi);
        self.locate(tc).eval(tc)
    }

    /// Span actually covered, in integration direction.
    pub fn span(&self) -> (f64, f64) {
        (self.t0, self.t_end)
    }
}

fn error_norm<const N: usize>(
    err: &[f64; N],
    y0: &[f64; N],
    y1: &[f64; N],
    opts: &OdeOptions,
) -> f64 {
    let mut acc = 0.0;
    for i in 0..N {
        let sc = opts.abs_tol + opts.rel_tol * y0[i].abs().max(y1[i].abs());
        let q = err[i] / sc;
        acc += q * q;
    }
    (acc / N as f64).sqrt()
}

fn initial_step_guess<const N: usize>(
    f0: &[f64; N],
    y0: &[f64; N],
    span: f64,
    opts: &OdeOptions,
) -> f64 {
    let mut d0: f64 = 0.0;
    let mut d1: f64 = 0.0;
    for i in 0..N {
        let sc = opts.abs_tol + opts.rel_tol * y0[i].abs();
        d0 += (y0[i] / sc).powi(2);
        d1 += (f0[i] / sc).powi(2);
    }
    let (d0, d1) = (d0.sqrt(), d1.sqrt());
    let h = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    h.min(span.abs()).max(1e-12)
}

/// Integrate `dy/dt = f(t, y)` from `t0` to `t_end` (either direction).
///
/// The RHS may return [`Rhs::Halt`] to stop the integration; the partial
/// solution up to the last accepted step is returned with
/// [`OdeEnd::Halted`]. A `halt_when` predicate, checked on accepted steps,
/// additionally locates its trigger by bisection on the dense output.
pub fn integrate<const N: usize>(
    mut f: impl FnMut(f64, &[f64; N]) -> Rhs<N>,
    t0: f64,
    t_end: f64,
    y0: [f64; N],
    opts: &OdeOptions,
    mut halt_when: impl FnMut(f64, &[f64; N]) -> Option<Error>,
) -> Result<OdeSolution<N>> {
    let dir = (t_end - t0).signum();
    if dir == 0.0 || !(t_end - t0).is_finite() {
        return Err(Error::InvalidParameter {
            name: "t_span",
            reason: format!("degenerate span [{t0}, {t_end}]"),
        });
    }
    let mut sol = OdeSolution {
        t0,
        t_end: t0,
        y0,
        y_end: y0,
        end: OdeEnd::Completed,
        segments: Vec::new(),
        knots: vec![t0],
    };

    if let Some(e) = halt_when(t0, &y0) {
        sol.end = OdeEnd::Halted(e);
        return Ok(sol);
    }

    let mut t = t0;
    let mut y = y0;
    let mut k1 = match f(t, &y) {
        Rhs::Ok(v) => v,
        Rhs::Halt(e) => {
            sol.end = OdeEnd::Halted(e);
            return Ok(sol);
        }
    };

    let span = t_end - t0;
    let mut h = opts
        .initial_step
        .map(|h| h.abs())
        .unwrap_or_else(|| initial_step_guess(&k1, &y0, span, opts))
        * dir;

    let mut n_steps = 0usize;
    let axpy = |y: &[f64; N], h: f64, coeffs: &[(f64, &[f64; N])]| {
        let mut out = *y;
        for (c, k) in coeffs {
            for i in 0..N {
                out[i] += h * c * k[i];
            }
        }
        out
    };

    loop {
        if n_steps >= opts.max_steps {
            return Err(Error::MaxSteps {
                max_steps: opts.max_steps,
                t,
            });
        }
        n_steps += 1;

        // Do not step past the end point.
        if (t + h - t_end) * dir > 0.0 {
            h = t_end - t;
        }
        let mut halted: Option<Error> = None;
        macro_rules! stage {
            ($tt:expr, $yy:expr) => {
                match f($tt, &$yy) {
                    Rhs::Ok(v) => v,
                    Rhs::Halt(e) => {
                        halted = Some(e);
                        [0.0; N]
                    }
                }
            };
        }

        let y2 = axpy(&y, h, &[(A21, &k1)]);
        let k2 = stage!(t + C2 * h, y2);
        let y3 = axpy(&y, h, &[(A31, &k1), (A32, &k2)]);
        let k3 = if halted.is_none() { stage!(t + C3 * h, y3) } else { [0.0; N] };
        let y4 = axpy(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]);
        let k4 = if halted.is_none() { stage!(t + C4 * h, y4) } else { [0.0; N] };
        let y5 = axpy(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]);
        let k5 = if halted.is_none() { stage!(t + C5 * h, y5) } else { [0.0; N] };
        let y6 = axpy(
            &y,
            h,
            &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
        );
        let k6 = if halted.is_none() { stage!(t + h, y6) } else { [0.0; N] };
        let y_new = axpy(&y, h, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
        let k7 = if halted.is_none() { stage!(t + h, y_new) } else { [0.0; N] };

        if let Some(e) = halted {
            // A stage left the evaluable region: shrink toward the last good
            // point rather than accepting a poisoned step.
            if h.abs() < 1e-13 * t.abs().max(1.0) {
                sol.end = OdeEnd::Halted(e);
                return Ok(sol);
            }
            h *= 0.25;
            continue;
        }

        let mut err = [0.0; N];
        for i in 0..N {
            err[i] = h
                * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        }
        let errn = error_norm(&err, &y, &y_new, opts);

        if errn <= 1.0 {
            // Accept: build the continuous extension.
            let mut cont = [[0.0; N]; 5];
            for i in 0..N {
                let ydiff = y_new[i] - y[i];
                let bspl = h * k1[i] - ydiff;
                cont[0][i] = y[i];
                cont[1][i] = ydiff;
                cont[2][i] = bspl;
                cont[3][i] = ydiff - h * k7[i] - bspl;
                cont[4][i] = h
                    * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i]
                        + D7 * k7[i]);
            }
            let seg = DenseSegment { t0: t, h, cont };

            // Event check on the accepted step.
            if let Some(cause) = halt_when(t + h, &y_new) {
                // Bisect inside the step for a tighter end point.
                let (mut a, mut b) = (t, t + h);
                for _ in 0..60 {
                    let m = 0.5 * (a + b);
                    let ym = seg.eval(m);
                    if halt_when(m, &ym).is_some() {
                        b = m;
                    } else {
                        a = m;
                    }
                }
                let ya = seg.eval(a);
                // Keep the segment's own h (the interpolation parameter);
                // the knot marks where the covered span ends.
                sol.segments.push(seg);
                sol.knots.push(a);
                sol.t_end = a;
                sol.y_end = ya;
                sol.end = OdeEnd::Halted(cause);
                return Ok(sol);
            }

            sol.segments.push(seg);
            t += h;
            y = y_new;
            k1 = k7; // FSAL
            sol.knots.push(t);
            sol.t_end = t;
            sol.y_end = y;

            if (t - t_end) * dir >= 0.0 {
                sol.end = OdeEnd::Completed;
                return Ok(sol);
            }
            let fac = (0.9 * errn.powf(-0.2)).clamp(0.2, 5.0);
            h *= fac;
        } else {
            let fac = (0.9 * errn.powf(-0.2)).clamp(0.2, 1.0);
            h *= fac;
            if h.abs() < f64::EPSILON * t.abs().max(1.0) * 4.0 {
                return Err(Error::Numeric(format!(
                    "step size underflow at t = {t} (error norm {errn})"
                )));
            }
        }
    }
}
