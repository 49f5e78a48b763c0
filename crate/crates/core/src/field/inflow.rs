//! Inflow profiles g(t): the axial speed imposed at the inflow station.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fd;

type TimeFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A scalar inflow-outflow profile with first and second derivative
/// evaluators. Profiles must be strictly positive on the range they are
/// used on (unilateral flow downstream); [`InflowProfile::validate_on`]
/// enforces this by sampling.
#[derive(Clone)]
pub struct InflowProfile {
    g: TimeFn,
    dg: TimeFn,
    ddg: TimeFn,
    label: String,
}

impl fmt::Debug for InflowProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "InflowProfile({})", self.label)
    }
}

impl InflowProfile {
    /// Constant inflow g(t) = c.
    pub fn constant(c: f64) -> Self {
        Self {
            g: Arc::new(move |_| c),
            dg: Arc::new(|_| 0.0),
            ddg: Arc::new(|_| 0.0),
            label: format!("const({c})"),
        }
    }

    /// Quadratic inflow g(t) = g0 + g1 t + g2 t^2 / 2.
    pub fn quadratic(g0: f64, g1: f64, g2: f64) -> Self {
        Self {
            g: Arc::new(move |t| g0 + g1 * t + 0.5 * g2 * t * t),
            dg: Arc::new(move |t| g1 + g2 * t),
            ddg: Arc::new(move |_| g2),
            label: format!("quadratic({g0}, {g1}, {g2})"),
        }
    }

    /// Linear inflow g(t) = g0 + g1 t.
    pub fn linear(g0: f64, g1: f64) -> Self {
        Self::quadratic(g0, g1, 0.0)
    }

    /// Offset sinusoid g(t) = mean + amp sin(omega t).
    pub fn sinusoidal(mean: f64, amp: f64, omega: f64) -> Self {
        Self {
            g: Arc::new(move |t| mean + amp * (omega * t).sin()),
            dg: Arc::new(move |t| amp * omega * (omega * t).cos()),
            ddg: Arc::new(move |t| -amp * omega * omega * (omega * t).sin()),
            label: format!("sinusoidal({mean}, {amp}, {omega})"),
        }
    }

    /// Arbitrary profile; missing derivatives are closed with centered
    /// differences of `g`.
    pub fn from_fn(
        label: impl Into<String>,
        g: impl Fn(f64) -> f64 + Send + Sync + 'static,
        dg: Option<TimeFn>,
        ddg: Option<TimeFn>,
    ) -> Self {
        let g: TimeFn = Arc::new(g);
        let dg = dg.unwrap_or_else(|| {
            let g = g.clone();
            Arc::new(move |t| fd::d1_central(|x| g(x), t, fd::step1(t)))
        });
        let ddg = ddg.unwrap_or_else(|| {
            let g = g.clone();
            Arc::new(move |t| fd::d2_central(|x| g(x), t, fd::step2(t)))
        });
        Self {
            g,
            dg,
            ddg,
            label: label.into(),
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        (self.g)(t)
    }

    pub fn d1(&self, t: f64) -> f64 {
        (self.dg)(t)
    }

    pub fn d2(&self, t: f64) -> f64 {
        (self.ddg)(t)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Check g > 0 on `[t_min, t_max]` by sampling `n` points.
    pub fn validate_on(&self, t_min: f64, t_max: f64, n: usize) -> Result<()> {
        for k in 0..=n {
            let t = t_min + (t_max - t_min) * (k as f64) / (n as f64);
            let v = self.value(t);
            if v.is_nan() || v <= 0.0 {
                return Err(Error::InvalidParameter {
                    name: "inflow",
                    reason: format!("g({t}) = {v} not strictly positive"),
                });
            }
        }
        Ok(())
    }
}
