//! Inflow-condition instability scan: sweeps admissible inflow families
//! (g(0), g'(0), g''(0)) with and without swirl, and tabulates the laminar
//! rates and key-estimate margins per grid point and seed.
//!
//! The scanned family is the swirl-responsive nozzle: its streamline map
//! deforms in time at a rate proportional to the squared swirl times the
//! inflow acceleration (g' + lag g''), so without swirl the map is frozen
//! (L^t = 0 exactly) and with swirl L^t grows monotonically with both g'(0)
//! and g''(0).

use std::io::Write;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::atlas::{build_streamline_map, laminar_rate_t};
use crate::error::Result;
use crate::field::{catalog, Field, InflowProfile};
use crate::identities::{key_inequalities, MarginClass};
use crate::trajectory::{integrate_trajectory, Seed};

/// Scan configuration. The inflow family is quadratic in time,
/// g(t) = g0 + g1 t + g2 t^2 / 2, diagnosed at t = 0.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ScanParams {
    /// Smallness parameter of the admissibility window.
    pub epsilon: f64,
    /// Laminar-profile bound.
    pub beta: f64,
    /// Inflow-growth parameter.
    pub delta: f64,
    /// g(0), common to the whole grid.
    pub g0: f64,
    /// g'(0) values to sweep.
    pub g1_grid: Vec<f64>,
    /// g''(0) values to sweep.
    pub g2_grid: Vec<f64>,
    /// Seed stations (rbar0, z).
    pub seeds: Vec<(f64, f64)>,
    /// Swirl rate s (v_theta = s r); 0 selects the no-swirl control family.
    pub swirl: f64,
    /// Admissible band for u0 . e_theta at the seeds.
    pub swirl_band: (f64, f64),
    /// Nozzle base strength, response gain and response lag of the family.
    pub base_amp: f64,
    pub gain: f64,
    pub lag: f64,
    /// Inflow station.
    pub z_in: f64,
    /// L^t step as a fraction of the inflow variation timescale.
    pub dt_factor: f64,
}

impl Default for ScanParams {
    fn default() -> Self {
        Self {
            epsilon: 0.25,
            beta: 2.0,
            delta: 0.1,
            g0: 10.0,
            g1_grid: vec![200.0, 400.0, 800.0],
            g2_grid: vec![3.0e4, 1.0e5, 3.0e5],
            seeds: vec![(0.6, 0.0), (0.75, 0.5)],
            swirl: 1.5,
            swirl_band: (0.5, 2.0),
            base_amp: 0.25,
            gain: 0.05,
            lag: 1e-4,
            z_in: -20.0,
            dt_factor: 1e-3,
        }
    }
}

impl ScanParams {
    /// The flux-condition admissibility of one (g1, g2) grid point:
    /// 1/beta^5 <= g0 <= 1/epsilon^5 and 1/delta^3 < g1/delta^2 < g2.
    pub fn admissible_inflow(&self, g1: f64, g2: f64) -> std::result::Result<(), String> {
        let lo = self.beta.powi(-5);
        let hi = self.epsilon.powi(-5);
        if self.g0 < lo || self.g0 > hi {
            return Err(format!("g0 = {} outside [{lo}, {hi}]", self.g0));
        }
        let d2 = self.delta * self.delta;
        if g1 / d2 <= 1.0 / self.delta.powi(3) {
            return Err(format!(
                "g'(0)/delta^2 = {} not above 1/delta^3 = {}",
                g1 / d2,
                1.0 / self.delta.powi(3)
            ));
        }
        if g2 <= g1 / d2 {
            return Err(format!("g''(0) = {g2} not above g'(0)/delta^2 = {}", g1 / d2));
        }
        Ok(())
    }

    /// Seed admissibility: swirl band at the seed and the radial bound
    /// rbar0 > 1/beta. The no-swirl control family skips the band check.
    pub fn admissible_seed(&self, rbar0: f64) -> std::result::Result<(), String> {
        if rbar0 <= 1.0 / self.beta {
            return Err(format!("seed radius {rbar0} not above 1/beta = {}", 1.0 / self.beta));
        }
        if self.swirl != 0.0 {
            let u_th = self.swirl * rbar0;
            let (lo, hi) = self.swirl_band;
            if !(lo..=hi).contains(&u_th) {
                return Err(format!("u0.e_theta = {u_th} outside [{lo}, {hi}]"));
            }
        }
        Ok(())
    }

    /// The scanned field at one grid point.
    pub fn family_field(&self, g1: f64, g2: f64) -> Field {
        let g = InflowProfile::quadratic(self.g0, g1, g2);
        catalog::swirl_response_nozzle(g, self.base_amp, self.swirl, self.gain, self.lag)
    }

    fn lt_dt(&self, g1: f64, g2: f64) -> f64 {
        let tau = (self.g0 / g1.abs().max(1e-12))
            .min((self.g0 / g2.abs().max(1e-12)).sqrt());
        // floor keeps the centered difference above the integration noise
        (self.dt_factor * tau).clamp(2e-5, 1e-3)
    }
}

/// One scan row.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ScanRow {
    pub g0: f64,
    pub g1: f64,
    pub g2: f64,
    pub epsilon: f64,
    pub beta: f64,
    pub seed_rbar0: f64,
    pub seed_z: f64,
    pub u0_etheta: f64,
    pub l_x: f64,
    pub l_t: f64,
    pub margin1: f64,
    pub margin2: f64,
    pub n_dot_etheta: f64,
    pub margin_class: String,
}

/// A grid point that was skipped, with the reason.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SkippedPoint {
    pub g1: f64,
    pub g2: f64,
    pub seed_rbar0: f64,
    pub seed_z: f64,
    pub reason: String,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ScanTable {
    pub params: ScanParams,
    pub rows: Vec<ScanRow>,
    pub skipped: Vec<SkippedPoint>,
    /// Kendall rank correlation (tau-b) of L^t against g'(0) and g''(0).
    pub kendall_lt_g1: Option<f64>,
    pub kendall_lt_g2: Option<f64>,
}

/// Kendall's tau-b rank correlation with tie correction.
pub fn kendall_tau_b(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let n = xs.len();
    if n < 2 || n != ys.len() {
        return None;
    }
    let (mut concordant, mut discordant) = (0i64, 0i64);
    let (mut ties_x, mut ties_y) = (0i64, 0i64);
    for i in 0..n {
        for j in (i + 1)..n {
            let dx = xs[i] - xs[j];
            let dy = ys[i] - ys[j];
            if dx == 0.0 && dy == 0.0 {
                ties_x += 1;
                ties_y += 1;
            } else if dx == 0.0 {
                ties_x += 1;
            } else if dy == 0.0 {
                ties_y += 1;
            } else if dx * dy > 0.0 {
                concordant += 1;
            } else {
                discordant += 1;
            }
        }
    }
    let n0 = (n * (n - 1) / 2) as i64;
    let denom = (((n0 - ties_x) as f64) * ((n0 - ties_y) as f64)).sqrt();
    if denom == 0.0 {
        return None;
    }
    Some((concordant - discordant) as f64 / denom)
}

/// Run the scan over the (g1, g2) grid and seed set. Rows are ordered by
/// grid index (g1-major, then g2, then seed) and the computation is
/// deterministic: identical parameters produce identical tables.
pub fn instability_scan(params: &ScanParams) -> Result<ScanTable> {
    let mut jobs: Vec<(usize, f64, f64, f64, f64)> = Vec::new();
    let mut skipped: Vec<SkippedPoint> = Vec::new();
    let mut idx = 0usize;
    for &g1 in &params.g1_grid {
        for &g2 in &params.g2_grid {
            for &(r0, z) in &params.seeds {
                let admissible = params
                    .admissible_inflow(g1, g2)
                    .and_then(|_| params.admissible_seed(r0));
                match admissible {
                    Ok(()) => {
                        jobs.push((idx, g1, g2, r0, z));
                        idx += 1;
                    }
                    Err(reason) => skipped.push(SkippedPoint {
                        g1,
                        g2,
                        seed_rbar0: r0,
                        seed_z: z,
                        reason,
                    }),
                }
            }
        }
    }

    let mut rows: Vec<(usize, ScanRow)> = jobs
        .par_iter()
        .map(|&(i, g1, g2, r0, z)| -> Result<(usize, ScanRow)> {
            let field = Arc::new(params.family_field(g1, g2));
            // L^x needs the map bracket around the seed label
            let mut r0_grid: Vec<f64> = (1..=9).map(|k| 0.1 * k as f64).collect();
            if !r0_grid.iter().any(|g| (g - r0).abs() < 1e-12) {
                r0_grid.push(r0);
                r0_grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
            }
            let map = build_streamline_map(&field, 0.0, &r0_grid, &[z], params.z_in)?;
            let l_x = map.laminar_rate_x(r0, z)?.l_x;
            let lt = laminar_rate_t(&field, 0.0, params.lt_dt(g1, g2), r0, z, params.z_in)?;
            // margins along the trajectory seeded at t = 0
            let (margin1, margin2, n_eth, class) = if params.swirl != 0.0 {
                let tau_w = params.lt_dt(g1, g2);
                let traj = integrate_trajectory(
                    field.clone(),
                    Seed {
                        r: map.eval(r0, z)?.rbar,
                        theta: 0.0,
                        z,
                    },
                    (0.0, tau_w),
                    1e-10,
                )?;
                let m = key_inequalities(&traj, 0.0)?;
                let class = match m.class {
                    MarginClass::Holds => "holds",
                    MarginClass::Fails => "fails",
                    MarginClass::Degenerate => "degenerate",
                };
                (m.margin1, m.margin2, m.n_dot_etheta, class)
            } else {
                (0.0, 0.0, 0.0, "degenerate")
            };
            Ok((
                i,
                ScanRow {
                    g0: params.g0,
                    g1,
                    g2,
                    epsilon: params.epsilon,
                    beta: params.beta,
                    seed_rbar0: r0,
                    seed_z: z,
                    u0_etheta: params.swirl * map.eval(r0, z)?.rbar,
                    l_x,
                    l_t: lt.l_t,
                    margin1,
                    margin2,
                    n_dot_etheta: n_eth,
                    margin_class: class.to_string(),
                },
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by_key(|(i, _)| *i);
    let rows: Vec<ScanRow> = rows.into_iter().map(|(_, r)| r).collect();

    let lts: Vec<f64> = rows.iter().map(|r| r.l_t).collect();
    let g1s: Vec<f64> = rows.iter().map(|r| r.g1).collect();
    let g2s: Vec<f64> = rows.iter().map(|r| r.g2).collect();
    Ok(ScanTable {
        params: params.clone(),
        kendall_lt_g1: kendall_tau_b(&g1s, &lts),
        kendall_lt_g2: kendall_tau_b(&g2s, &lts),
        rows,
        skipped,
    })
}

impl ScanTable {
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(
            w,
            "# g0,g1,g2,epsilon,beta,seed_rbar0,seed_z,u0_etheta,L_x,L_t,margin1,margin2,n_dot_etheta,margin_class"
        )?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                r.g0,
                r.g1,
                r.g2,
                r.epsilon,
                r.beta,
                r.seed_rbar0,
                r.seed_z,
                r.u0_etheta,
                r.l_x,
                r.l_t,
                r.margin1,
                r.margin2,
                r.n_dot_etheta,
                r.margin_class
            )?;
        }
        Ok(())
    }
}
