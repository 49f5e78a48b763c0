//! Fixed-time streamline maps: the radial labeling Rbar(rbar0, z, t) with
//! variational derivatives up to third order, its inverse, inflow
//! propagation, laminar-rate functionals, velocity reconstruction from the
//! inflow, and Gronwall swirl transport along trajectories.

use std::io::Write;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{Comp, Deriv, Field, InflowProfile};
use crate::ode::{self, OdeEnd, OdeOptions, OdeSolution, Rhs};
use crate::trajectory::Trajectory;

/// Absolute tolerance of the radial inversion, in units of rbar0.
pub const INVERSION_TOL: f64 = 1e-12;

/// Meridional slope field f = v_r / v_z and the partials the variational
/// system needs. The third radial derivative is closed with a centered
/// difference of the analytic second.
#[derive(Debug, Clone, Copy)]
struct SlopeDerivs {
    f: f64,
    f_r: f64,
    f_rr: f64,
    f_rrr: f64,
    f_z: f64,
    f_rz: f64,
    f_zz: f64,
}

fn slope_f_rr(field: &Field, r: f64, z: f64, t: f64) -> f64 {
    let sign = if r < 0.0 { -1.0 } else { 1.0 };
    let r = r.abs();
    let vr = field.component(Comp::R, r, z, t);
    let vz = field.component(Comp::Z, r, z, t);
    let d = |c, dd| field.deriv(c, dd, r, z, t);
    let (vr_r, vr_rr) = (d(Comp::R, Deriv::R), d(Comp::R, Deriv::Rr));
    let (vz_r, vz_rr) = (d(Comp::Z, Deriv::R), d(Comp::Z, Deriv::Rr));
    sign
        * (vr_rr / vz - 2.0 * vr_r * vz_r / (vz * vz) - vr * vz_rr / (vz * vz)
            + 2.0 * vr * vz_r * vz_r / (vz * vz * vz))
}

fn slope_derivs(field: &Field, r: f64, z: f64, t: f64) -> SlopeDerivs {
    let vr = field.component(Comp::R, r, z, t);
    let vz = field.component(Comp::Z, r, z, t);
    let d = |c, dd| field.deriv(c, dd, r, z, t);
    let (vr_r, vr_z, vr_rr, vr_rz, vr_zz) = (
        d(Comp::R, Deriv::R),
        d(Comp::R, Deriv::Z),
        d(Comp::R, Deriv::Rr),
        d(Comp::R, Deriv::Rz),
        d(Comp::R, Deriv::Zz),
    );
    let (vz_r, vz_z, vz_rr, vz_rz, vz_zz) = (
        d(Comp::Z, Deriv::R),
        d(Comp::Z, Deriv::Z),
        d(Comp::Z, Deriv::Rr),
        d(Comp::Z, Deriv::Rz),
        d(Comp::Z, Deriv::Zz),
    );
    let vz2 = vz * vz;
    let vz3 = vz2 * vz;
    let f = vr / vz;
    let f_r = vr_r / vz - vr * vz_r / vz2;
    let f_z = vr_z / vz - vr * vz_z / vz2;
    let f_rr =
        vr_rr / vz - 2.0 * vr_r * vz_r / vz2 - vr * vz_rr / vz2 + 2.0 * vr * vz_r * vz_r / vz3;
    let f_rz = vr_rz / vz - vr_r * vz_z / vz2 - (vr_z * vz_r + vr * vz_rz) / vz2
        + 2.0 * vr * vz_r * vz_z / vz3;
    let f_zz =
        vr_zz / vz - 2.0 * vr_z * vz_z / vz2 - vr * vz_zz / vz2 + 2.0 * vr * vz_z * vz_z / vz3;
    let h = crate::fd::step1(r);
    let f_rrr = (slope_f_rr(field, r + h, z, t) - slope_f_rr(field, r - h, z, t)) / (2.0 * h);
    SlopeDerivs {
        f,
        f_r,
        f_rr,
        f_rrr,
        f_z,
        f_rz,
        f_zz,
    }
}

/// One axis-length streamline with its variational derivatives: dense
/// solution of [Rbar, Thetabar, Y1, Y2, Y3] in z, where Yk is the k-th
/// derivative of Rbar with respect to the inflow label rbar0.
#[derive(Debug, Clone)]
pub struct Streamline {
    field: Arc<Field>,
    pub rbar0: f64,
    pub t: f64,
    pub z_in: f64,
    sol: OdeSolution<5>,
}

/// Map data at one (rbar0, z) point.
#[derive(Debug, Clone, Copy)]
pub struct MapNode {
    pub rbar0: f64,
    pub z: f64,
    /// Rbar(rbar0, z).
    pub rbar: f64,
    /// Accumulated twist Thetabar(z) - Thetabar(z_in).
    pub theta: f64,
    /// d^k Rbar / d rbar0^k, k = 1..3.
    pub d_r0: [f64; 3],
    /// d^k Rbar / d z^k, k = 1..3.
    pub d_z: [f64; 3],
    /// d^2 Rbar / (d rbar0 d z).
    pub d_r0_z: f64,
    /// d^3 Rbar / (d rbar0^2 d z).
    pub d_r0r0_z: f64,
    /// d^3 Rbar / (d rbar0 d z^2).
    pub d_r0_zz: f64,
}

/// Trace the streamline entering at radius `rbar0` through the inflow
/// station `z_span.0`, at frozen time `t`. Fails on unilateral violation
/// (v_z <= 0) or loss of the monotone radial labeling.
pub fn trace_streamline(
    field: &Arc<Field>,
    rbar0: f64,
    t: f64,
    z_span: (f64, f64),
) -> Result<Streamline> {
    let (z_in, z_end) = z_span;
    if !(rbar0 > 0.0 && rbar0 < field.domain().r_max) {
        return Err(Error::InvalidParameter {
            name: "rbar0",
            reason: format!(
                "inflow radius must lie in (0, {}), got {rbar0}",
                field.domain().r_max
            ),
        });
    }
    let f = field.clone();
    let rhs = move |z: f64, y: &[f64; 5]| {
        let r = y[0];
        if r <= 0.0 {
            return Rhs::Halt(Error::AxisHit { t: z });
        }
        let vz = f.component(Comp::Z, r, z, t);
        if vz <= 0.0 {
            return Rhs::Halt(Error::UnilateralViolation { v_z: vz, r, z, t });
        }
        let vth = f.component(Comp::Theta, r, z, t);
        let sd = slope_derivs(&f, r, z, t);
        let (y1, y2, y3) = (y[2], y[3], y[4]);
        Rhs::Ok([
            sd.f,
            vth / (r * vz),
            sd.f_r * y1,
            sd.f_rr * y1 * y1 + sd.f_r * y2,
            sd.f_rrr * y1 * y1 * y1 + 3.0 * sd.f_rr * y1 * y2 + sd.f_r * y3,
        ])
    };
    let f = field.clone();
    let halt = move |z: f64, y: &[f64; 5]| {
        let r = y[0];
        if r <= 0.0 {
            return Some(Error::AxisHit { t: z });
        }
        if r > f.domain().r_max {
            return Some(Error::OutOfDomain {
                coordinate: "r",
                value: r,
                bound: format!("[0, {}]", f.domain().r_max),
            });
        }
        let vz = f.component(Comp::Z, r, z, t);
        if vz <= 0.0 {
            return Some(Error::UnilateralViolation { v_z: vz, r, z, t });
        }
        if y[2] <= 0.0 {
            return Some(Error::MapNotMonotone {
                slope: y[2],
                rbar0,
                z,
            });
        }
        None
    };
    let opts = OdeOptions {
        rel_tol: 1e-12,
        abs_tol: 1e-14,
        ..Default::default()
    };
    let sol = ode::integrate(rhs, z_in, z_end, [rbar0, 0.0, 1.0, 0.0, 0.0], &opts, halt)?;
    if let OdeEnd::Halted(e) = &sol.end {
        return Err(e.clone());
    }
    Ok(Streamline {
        field: field.clone(),
        rbar0,
        t,
        z_in,
        sol,
    })
}

impl Streamline {
    /// Radial position and twist at station z.
    pub fn position(&self, z: f64) -> (f64, f64) {
        let y = self.sol.eval(z);
        (y[0], y[1])
    }

    /// Full node with all stored partials at station z.
    pub fn node(&self, z: f64) -> MapNode {
        let y = self.sol.eval(z);
        let (rbar, theta, y1, y2, y3) = (y[0], y[1], y[2], y[3], y[4]);
        let sd = slope_derivs(&self.field, rbar, z, self.t);
        // z-partials along the streamline (d/dz at fixed rbar0)
        let rz = sd.f;
        let rzz = sd.f_r * sd.f + sd.f_z;
        let rzzz = sd.f_rr * sd.f * sd.f
            + sd.f_r * sd.f_r * sd.f
            + 2.0 * sd.f_rz * sd.f
            + sd.f_r * sd.f_z
            + sd.f_zz;
        MapNode {
            rbar0: self.rbar0,
            z,
            rbar,
            theta,
            d_r0: [y1, y2, y3],
            d_z: [rz, rzz, rzzz],
            d_r0_z: sd.f_r * y1,
            d_r0r0_z: sd.f_rr * y1 * y1 + sd.f_r * y2,
            d_r0_zz: (sd.f_rr * sd.f + sd.f_r * sd.f_r + sd.f_rz) * y1,
        }
    }

    pub fn z_span(&self) -> (f64, f64) {
        self.sol.span()
    }
}

/// The fixed-time streamline map on a (rbar0, z) grid, with on-demand
/// evaluation off the grid.
pub struct StreamlineMap {
    field: Arc<Field>,
    pub t: f64,
    pub z_in: f64,
    rbar0_grid: Vec<f64>,
    z_grid: Vec<f64>,
    streamlines: Vec<Streamline>,
}

/// Build the map by tracing one variational streamline per grid label.
/// Streamlines are integrated in parallel; the result is ordered by the
/// grid and fully deterministic.
pub fn build_streamline_map(
    field: &Arc<Field>,
    t: f64,
    rbar0_grid: &[f64],
    z_grid: &[f64],
    z_in: f64,
) -> Result<StreamlineMap> {
    if rbar0_grid.is_empty() || z_grid.is_empty() {
        return Err(Error::InvalidParameter {
            name: "grid",
            reason: "empty rbar0 or z grid".into(),
        });
    }
    let z_end = z_grid.last().copied().unwrap().max(z_in);
    let streamlines: Vec<Result<Streamline>> = rbar0_grid
        .par_iter()
        .map(|&r0| trace_streamline(field, r0, t, (z_in, z_end)))
        .collect();
    let streamlines = streamlines.into_iter().collect::<Result<Vec<_>>>()?;
    // monotone labeling across neighbors at every grid station
    for &z in z_grid {
        for w in streamlines.windows(2) {
            let (a, b) = (w[0].position(z).0, w[1].position(z).0);
            if b <= a {
                return Err(Error::MapNotMonotone {
                    slope: b - a,
                    rbar0: w[1].rbar0,
                    z,
                });
            }
        }
    }
    Ok(StreamlineMap {
        field: field.clone(),
        t,
        z_in,
        rbar0_grid: rbar0_grid.to_vec(),
        z_grid: z_grid.to_vec(),
        streamlines,
    })
}

/// Inverse-map data at a spatial point (r, z): the inflow label and the
/// derivatives of Rbar^{-1} in r and z up to third order.
#[derive(Debug, Clone, Copy)]
pub struct InverseNode {
    pub rbar0: f64,
    /// d^k Rbar^{-1} / d r^k, k = 1..3.
    pub d_r: [f64; 3],
    /// d^k Rbar^{-1} / d z^k, k = 1..3.
    pub d_z: [f64; 3],
}

/// Inflow propagation rho = rbar0 / (d_rbar0 Rbar * Rbar) and its first two
/// derivatives in z and rbar0.
#[derive(Debug, Clone, Copy)]
pub struct RhoNode {
    pub rho: f64,
    pub d_z: f64,
    pub d_zz: f64,
    pub d_r0: f64,
    pub d_r0r0: f64,
}

/// The laminar-rate functional L^x and its term breakdown: six absolute
/// derivatives of Rbar (orders 1..3 in z and rbar0) plus six of Rbar^{-1}
/// (orders 1..3 in z and r), evaluated on the streamline.
#[derive(Debug, Clone, serde::Serialize)]
pub struct LaminarRateX {
    pub l_x: f64,
    /// |d^k Rbar/d rbar0^k|, k = 1..3.
    pub fwd_r0: [f64; 3],
    /// |d^k Rbar/d z^k|, k = 1..3.
    pub fwd_z: [f64; 3],
    /// |d^k Rbar^{-1}/d r^k|, k = 1..3.
    pub inv_r: [f64; 3],
    /// |d^k Rbar^{-1}/d z^k|, k = 1..3.
    pub inv_z: [f64; 3],
}

/// L^t = |dt Rbar^{-1}| + |dt d_rbar0 Rbar| + |dt d_z Rbar| by centered
/// differences of maps built at t - dt and t + dt, with a Richardson
/// estimate at half step.
#[derive(Debug, Clone, serde::Serialize)]
pub struct LaminarRateT {
    pub l_t: f64,
    pub dt_inverse: f64,
    pub dt_d_r0: f64,
    pub dt_d_z: f64,
    /// L^t recomputed with dt/2 (step-halving error estimate).
    pub l_t_half_step: f64,
    pub dt_used: f64,
}

impl StreamlineMap {
    pub fn field(&self) -> &Arc<Field> {
        &self.field
    }

    pub fn rbar0_grid(&self) -> &[f64] {
        &self.rbar0_grid
    }

    pub fn z_grid(&self) -> &[f64] {
        &self.z_grid
    }

    pub fn grid_streamline(&self, i: usize) -> &Streamline {
        &self.streamlines[i]
    }

    /// Node at an arbitrary (rbar0, z); off-grid labels trace a fresh
    /// streamline.
    pub fn eval(&self, rbar0: f64, z: f64) -> Result<MapNode> {
        if let Some(i) = self
            .rbar0_grid
            .iter()
            .position(|&g| (g - rbar0).abs() < 1e-14)
        {
            return Ok(self.streamlines[i].node(z));
        }
        let z_end = self.z_grid.last().copied().unwrap().max(z).max(self.z_in);
        let s = trace_streamline(&self.field, rbar0, self.t, (self.z_in, z_end))?;
        Ok(s.node(z))
    }

    /// Radial band covered by the map at station z.
    pub fn radial_range(&self, z: f64) -> (f64, f64) {
        (
            self.streamlines.first().unwrap().position(z).0,
            self.streamlines.last().unwrap().position(z).0,
        )
    }

    /// Invert the radial map at station z: find rbar0 with
    /// Rbar(rbar0, z) = r. Bisection brackets the label, Newton polishes it
    /// to [`INVERSION_TOL`]; the derivative data comes from the variational
    /// solution on the found streamline.
    pub fn invert(&self, r: f64, z: f64) -> Result<InverseNode> {
        let (lo_r, hi_r) = self.radial_range(z);
        if r < lo_r - INVERSION_TOL || r > hi_r + INVERSION_TOL {
            return Err(Error::OutOfMapRange {
                r,
                lo: lo_r,
                hi: hi_r,
                z,
            });
        }
        let (mut a, mut b) = (
            self.rbar0_grid.first().copied().unwrap(),
            self.rbar0_grid.last().copied().unwrap(),
        );
        let rbar_at = |r0: f64| -> Result<f64> { Ok(self.eval(r0, z)?.rbar) };
        // bisection to a coarse bracket
        for _ in 0..20 {
            let m = 0.5 * (a + b);
            if rbar_at(m)? < r {
                a = m;
            } else {
                b = m;
            }
        }
        // Newton polish using the variational slope
        let mut r0 = 0.5 * (a + b);
        for _ in 0..8 {
            let node = self.eval(r0, z)?;
            let err = node.rbar - r;
            if err.abs() <= INVERSION_TOL {
                break;
            }
            if node.d_r0[0] <= 0.0 {
                return Err(Error::MapNotMonotone {
                    slope: node.d_r0[0],
                    rbar0: r0,
                    z,
                });
            }
            r0 -= err / node.d_r0[0];
            r0 = r0.clamp(a - (b - a), b + (b - a));
        }
        let node = self.eval(r0, z)?;
        let [y1, y2, y3] = node.d_r0;
        // radial inverse-function derivatives
        let g_r1 = 1.0 / y1;
        let g_r2 = -y2 / (y1 * y1 * y1);
        let g_r3 = (3.0 * y2 * y2 - y1 * y3) / y1.powi(5);
        // implicit z-derivatives of the inverse along Rbar(G(r,z), z) = r
        let g_z1 = -node.d_z[0] / y1;
        let g_z2 = -(node.d_z[1] + 2.0 * node.d_r0_z * g_z1 + y2 * g_z1 * g_z1) / y1;
        let g_z3 = -(y3 * g_z1.powi(3)
            + 3.0 * node.d_r0r0_z * g_z1 * g_z1
            + 3.0 * y2 * g_z1 * g_z2
            + 3.0 * node.d_r0_zz * g_z1
            + 3.0 * node.d_r0_z * g_z2
            + node.d_z[2])
            / y1;
        Ok(InverseNode {
            rbar0: r0,
            d_r: [g_r1, g_r2, g_r3],
            d_z: [g_z1, g_z2, g_z3],
        })
    }

    /// Inflow propagation and its derivatives at (rbar0, z).
    pub fn rho(&self, rbar0: f64, z: f64) -> Result<RhoNode> {
        let node = self.eval(rbar0, z)?;
        rho_from_node(&self.field, &node, self.t)
    }

    /// Reconstruct (v_z, v_r) at (r, z) from the map and the uniform inflow:
    /// v_z = rho(Rbar^{-1}, z) g(t), v_r = d_z Rbar (Rbar^{-1}, z) v_z.
    pub fn reconstruct_velocity(&self, g: &InflowProfile, r: f64, z: f64) -> Result<(f64, f64)> {
        let inv = self.invert(r, z)?;
        let node = self.eval(inv.rbar0, z)?;
        let rho = rho_from_node(&self.field, &node, self.t)?.rho;
        let v_z = rho * g.value(self.t);
        let v_r = node.d_z[0] * v_z;
        Ok((v_z, v_r))
    }

    /// L^x at (rbar0, z): both derivative directions per order, forward map
    /// and inverse, mixed partials excluded.
    pub fn laminar_rate_x(&self, rbar0: f64, z: f64) -> Result<LaminarRateX> {
        let node = self.eval(rbar0, z)?;
        let inv = self.invert(node.rbar, z)?;
        let fwd_r0 = node.d_r0.map(f64::abs);
        let fwd_z = node.d_z.map(f64::abs);
        let inv_r = inv.d_r.map(f64::abs);
        let inv_z = inv.d_z.map(f64::abs);
        let l_x = fwd_r0.iter().sum::<f64>()
            + fwd_z.iter().sum::<f64>()
            + inv_r.iter().sum::<f64>()
            + inv_z.iter().sum::<f64>();
        Ok(LaminarRateX {
            l_x,
            fwd_r0,
            fwd_z,
            inv_r,
            inv_z,
        })
    }

    /// Dump the map grid as CSV: one row per (rbar0, z) node.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(
            w,
            "# rbar0,z,Rbar,Thetabar,dRbar_drbar0,d2Rbar_drbar0_2,d3Rbar_drbar0_3,dRbar_dz,d2Rbar_dz2,d3Rbar_dz3,d2Rbar_drbar0_dz"
        )?;
        for s in &self.streamlines {
            for &z in &self.z_grid {
                let n = s.node(z);
                writeln!(
                    w,
                    "{},{},{},{},{},{},{},{},{},{},{}",
                    n.rbar0,
                    n.z,
                    n.rbar,
                    n.theta,
                    n.d_r0[0],
                    n.d_r0[1],
                    n.d_r0[2],
                    n.d_z[0],
                    n.d_z[1],
                    n.d_z[2],
                    n.d_r0_z
                )?;
            }
        }
        Ok(())
    }
}

fn rho_from_node(field: &Field, node: &MapNode, t: f64) -> Result<RhoNode> {
    if node.rbar < crate::field::AXIS_FLOOR {
        return Err(Error::OutOfDomain {
            coordinate: "Rbar",
            value: node.rbar,
            bound: "axis floor".into(),
        });
    }
    let (r0, rbar) = (node.rbar0, node.rbar);
    let [y1, y2, y3] = node.d_r0;
    let rho = r0 / (y1 * rbar);
    // log-derivatives in z: d_z ln(rho) = -f_r - f / Rbar
    let sd = slope_derivs(field, rbar, node.z, t);
    let lz = -(sd.f_r + sd.f / rbar);
    // d/dz f_r along the streamline = f_rr f + f_rz;
    // d/dz (f/R) = (f_r f + f_z)/R - f^2/R^2
    let dlz = -((sd.f_rr * sd.f + sd.f_rz) + (sd.f_r * sd.f + sd.f_z) / rbar
        - sd.f * sd.f / (rbar * rbar));
    let d_z = rho * lz;
    let d_zz = rho * (lz * lz + dlz);
    // log-derivatives in rbar0: d_r0 ln(rho) = 1/r0 - Y2/Y1 - Y1/Rbar
    let lr = 1.0 / r0 - y2 / y1 - y1 / rbar;
    let dlr = -1.0 / (r0 * r0) - (y3 * y1 - y2 * y2) / (y1 * y1)
        - (y2 * rbar - y1 * y1) / (rbar * rbar);
    let d_r0 = rho * lr;
    let d_r0r0 = rho * (lr * lr + dlr);
    Ok(RhoNode {
        rho,
        d_z,
        d_zz,
        d_r0,
        d_r0r0,
    })
}

/// L^t at (rbar0, z): centered time differences of independently built
/// streamlines at t +- dt, with the halved-step value as error estimate.
pub fn laminar_rate_t(
    field: &Arc<Field>,
    t: f64,
    dt: f64,
    rbar0: f64,
    z: f64,
    z_in: f64,
) -> Result<LaminarRateT> {
    let z_end = z + (z - z_in).abs().max(1.0) * 0.01;
    let base = trace_streamline(field, rbar0, t, (z_in, z_end))?.node(z);
    let compute = |dt: f64| -> Result<(f64, f64, f64)> {
        let minus = trace_streamline(field, rbar0, t - dt, (z_in, z_end))?;
        let plus = trace_streamline(field, rbar0, t + dt, (z_in, z_end))?;
        let nm = minus.node(z);
        let np = plus.node(z);
        // dt of the inverse at the fixed spatial point (r, z) with
        // r = Rbar(rbar0, z, t): invert through the time-shifted maps.
        let inv_at = |t_shift: f64| -> Result<f64> {
            let mut r0 = rbar0;
            for _ in 0..12 {
                let n = trace_streamline(field, r0, t_shift, (z_in, z_end))?.node(z);
                let err = n.rbar - base.rbar;
                if err.abs() <= INVERSION_TOL {
                    break;
                }
                r0 -= err / n.d_r0[0];
            }
            Ok(r0)
        };
        let inv_p = inv_at(t + dt)?;
        let inv_m = inv_at(t - dt)?;
        let dt_inverse = (inv_p - inv_m) / (2.0 * dt);
        let dt_d_r0 = (np.d_r0[0] - nm.d_r0[0]) / (2.0 * dt);
        let dt_d_z = (np.d_z[0] - nm.d_z[0]) / (2.0 * dt);
        Ok((dt_inverse, dt_d_r0, dt_d_z))
    };
    let (a, b, c) = compute(dt)?;
    let (a2, b2, c2) = compute(dt / 2.0)?;
    Ok(LaminarRateT {
        l_t: a.abs() + b.abs() + c.abs(),
        dt_inverse: a,
        dt_d_r0: b,
        dt_d_z: c,
        l_t_half_step: a2.abs() + b2.abs() + c2.abs(),
        dt_used: dt,
    })
}

/// Transported swirl along a trajectory:
/// v_theta(t) = v_theta(seed) exp(-int_{t0}^{t} v_r / R dtau),
/// with the exponent integrated by Gauss-Legendre panels between the
/// accepted steps of the trajectory.
pub fn swirl_transport(traj: &Trajectory, t: f64) -> Result<f64> {
    let field = traj.field();
    let seed = traj.seed();
    let v0 = field.component(Comp::Theta, seed.r, seed.z, traj.t_start());
    let p_end = traj.point(t);
    if p_end.r <= crate::field::AXIS_FLOOR {
        return Err(Error::AxisHit { t });
    }
    let integrand = |tau: f64| {
        let p = traj.point(tau);
        field.component(Comp::R, p.r, p.z, tau) / p.r
    };
    let t0 = traj.t_start();
    let (lo, hi) = (t0.min(t), t0.max(t));
    let mut acc = 0.0;
    for w in traj.sample_times().windows(2) {
        let (a, b) = (w[0].min(w[1]).max(lo), w[0].max(w[1]).min(hi));
        if b <= a {
            continue;
        }
        acc += gauss_panel(&integrand, a, b);
    }
    if t < t0 {
        acc = -acc;
    }
    Ok(v0 * (-acc).exp())
}

/// Fixed 12-node Gauss-Legendre quadrature over one panel.
fn gauss_panel(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let (nodes, weights) = gauss_legendre(12);
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut acc = 0.0;
    for (x, w) in nodes.iter().zip(&weights) {
        acc += w * f(c + h * x);
    }
    acc * h
}

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration on the
/// Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for k in 0..n {
        let mut x = (std::f64::consts::PI * (k as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let legendre = |x: f64| {
            let (mut p0, mut p1) = (1.0, x);
            for j in 2..=n {
                let jf = j as f64;
                let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
                p0 = p1;
                p1 = p2;
            }
            let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            (p1, dp)
        };
        for _ in 0..100 {
            let (p, dp) = legendre(x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre(x);
        nodes[k] = x;
        weights[k] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

/// Axial volume flux through the annulus [r_lo, r_hi] at station z:
/// 2 pi int v_z r dr.
pub fn annulus_flux(field: &Field, r_lo: f64, r_hi: f64, z: f64, t: f64) -> f64 {
    let f = |r: f64| field.component(Comp::Z, r, z, t) * r;
    2.0 * std::f64::consts::PI * gauss_panel(&f, r_lo, r_hi)
}

/// Relative flux-conservation defect of the stream annulus seeded at
/// [rbar0, rbar0 + eps]: compares the flux through its image at z against
/// the inflow-station flux.
pub fn flux_conservation_defect(map: &StreamlineMap, rbar0: f64, eps: f64, z: f64) -> Result<f64> {
    let lo = map.eval(rbar0, z)?.rbar;
    let hi = map.eval(rbar0 + eps, z)?.rbar;
    let field = map.field();
    let downstream = annulus_flux(field, lo, hi, z, map.t);
    let inflow = annulus_flux(field, rbar0, rbar0 + eps, map.z_in, map.t);
    Ok((downstream - inflow).abs() / inflow.abs().max(1e-300))
}

#[cfg(test)]
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;
    use crate::field::catalog::{self, SwirlSpec};
    use crate::trajectory::{integrate_trajectory, Seed};
    use approx::assert_relative_eq;

    fn nozzle_field() -> Arc<Field> {
        Arc::new(catalog::nozzle(
            InflowProfile::constant(1.0),
            0.5,
            SwirlSpec::None,
        ))
    }

    #[test]
    fn uniform_map_is_identity() {
        let field = Arc::new(catalog::uniform(InflowProfile::quadratic(1.0, 2.0, 1.0)));
        let r0s: Vec<f64> = (1..=9).map(|i| i as f64 * 0.1).collect();
        let zs: Vec<f64> = (0..=10).map(|i| -10.0 + 2.0 * i as f64).collect();
        let map = build_streamline_map(&field, 0.5, &r0s, &zs, -10.0).unwrap();
        for &r0 in &r0s {
            for &z in &zs {
                let n = map.eval(r0, z).unwrap();
                assert_relative_eq!(n.rbar, r0, epsilon = 1e-14);
                assert_relative_eq!(n.d_r0[0], 1.0, epsilon = 1e-14);
                for k in 1..3 {
                    assert!(n.d_r0[k].abs() < 1e-14);
                    assert!(n.d_z[k].abs() < 1e-14);
                }
                assert!(n.d_z[0].abs() < 1e-14);
            }
        }
        // inverse is the identity as well
        let inv = map.invert(0.55, 4.0).unwrap();
        assert_relative_eq!(inv.rbar0, 0.55, epsilon = 1e-12);
        assert_relative_eq!(inv.d_r[0], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn streamline_entering_label_is_preserved() {
        let field = nozzle_field();
        let s = trace_streamline(&field, 0.6, 0.0, (-20.0, 5.0)).unwrap();
        let (r_at_in, theta_at_in) = s.position(-20.0);
        assert_relative_eq!(r_at_in, 0.6, epsilon = 1e-13);
        assert_relative_eq!(theta_at_in, 0.0, epsilon = 1e-13);
    }

    #[test]
    fn nozzle_map_closed_form() {
        // psi conservation: Rbar(rbar0, z) = rbar0 sqrt(a(z_in)/a(z)),
        // with a(-20) - 1 ~ 1e-18.
        let field = nozzle_field();
        let s = trace_streamline(&field, 0.5, 0.0, (-20.0, 5.0)).unwrap();
        let want = 0.5 / 1.25f64.sqrt();
        let (got, _) = s.position(0.0);
        assert!(
            (got - want).abs() < 1e-8,
            "Rbar(0.5, 0) = {got}, want {want}"
        );
        // variational slope: d_rbar0 Rbar = 1/sqrt(a)
        let n = s.node(0.0);
        assert_relative_eq!(n.d_r0[0], 1.0 / 1.25f64.sqrt(), max_relative = 1e-8);
        // z-slope law: d_z Rbar = (v_r / v_z)(Rbar, z)
        let v = field.velocity_unchecked(n.rbar, 0.0, 0.0);
        assert_relative_eq!(n.d_z[0], v.r / v.z, max_relative = 1e-12);
    }

    #[test]
    fn rigid_swirl_twist_is_linear_in_z() {
        let g = InflowProfile::quadratic(2.0, 1.0, 0.0);
        let field = Arc::new(catalog::rigid_swirl_pulsatile(0.8, g.clone()));
        let t = 0.7;
        let s = trace_streamline(&field, 0.5, t, (-5.0, 5.0)).unwrap();
        let (_, th) = s.position(3.0);
        // d_z Theta = omega / g(t), frozen t
        let want = 0.8 * (3.0 - (-5.0)) / g.value(t);
        assert_relative_eq!(th, want, max_relative = 1e-10);
    }

    /// Divergence-free field with a radially curved axial profile, from
    /// psi = r^2 (1 + 0.3 r^2) a(z) / 2: the radial slope field is genuinely
    /// nonlinear in r, so the higher variational derivatives are nonzero.
    fn curved_nozzle() -> Arc<Field> {
        use crate::field::{Comp as C, Deriv as D, Field};
        let sh = |z: f64| {
            let th = z.tanh();
            let s2 = 1.0 - th * th;
            // a, a', a'', a'''
            [
                1.0 + (1.0 + th) / 4.0,
                s2 / 4.0,
                -2.0 * th * s2 / 4.0,
                -s2 * (2.0 - 6.0 * th * th) / 4.0,
            ]
        };
        Arc::new(
            Field::builder("curved_nozzle")
                .component(C::Z, move |r, z, _| (1.0 + 0.6 * r * r) * sh(z)[0])
                .deriv(C::Z, D::R, move |r, z, _| 1.2 * r * sh(z)[0])
                .deriv(C::Z, D::Rr, move |_, z, _| 1.2 * sh(z)[0])
                .deriv(C::Z, D::Z, move |r, z, _| (1.0 + 0.6 * r * r) * sh(z)[1])
                .deriv(C::Z, D::Rz, move |r, z, _| 1.2 * r * sh(z)[1])
                .deriv(C::Z, D::Zz, move |r, z, _| (1.0 + 0.6 * r * r) * sh(z)[2])
                .zero_remaining_derivs(C::Z)
                .component(C::R, move |r, z, _| -(0.5 * r + 0.15 * r.powi(3)) * sh(z)[1])
                .deriv(C::R, D::R, move |r, z, _| -(0.5 + 0.45 * r * r) * sh(z)[1])
                .deriv(C::R, D::Rr, move |r, z, _| -0.9 * r * sh(z)[1])
                .deriv(C::R, D::Z, move |r, z, _| -(0.5 * r + 0.15 * r.powi(3)) * sh(z)[2])
                .deriv(C::R, D::Rz, move |r, z, _| -(0.5 + 0.45 * r * r) * sh(z)[2])
                .deriv(C::R, D::Zz, move |r, z, _| -(0.5 * r + 0.15 * r.powi(3)) * sh(z)[3])
                .zero_remaining_derivs(C::R)
                .incompressible()
                .default_z_in(-20.0)
                .build(),
        )
    }

    #[test]
    fn variational_derivatives_match_cross_streamline_fd() {
        let field = curved_nozzle();
        let t = 0.0;
        let z = 0.5;
        let r0 = 0.55;
        let h = 1e-3;
        let node = |r0: f64| {
            trace_streamline(&field, r0, t, (-20.0, 2.0))
                .unwrap()
                .node(z)
        };
        let (nm1, n0, np1) = (node(r0 - h), node(r0), node(r0 + h));
        let fd1 = (np1.rbar - nm1.rbar) / (2.0 * h);
        let fd2 = (np1.rbar - 2.0 * n0.rbar + nm1.rbar) / (h * h);
        // wider step for the third difference (noise floor / h^3)
        let h3 = 5e-3;
        let (qm2, qm1, qp1, qp2) = (
            node(r0 - 2.0 * h3),
            node(r0 - h3),
            node(r0 + h3),
            node(r0 + 2.0 * h3),
        );
        let fd3 =
            (qp2.rbar - 2.0 * qp1.rbar + 2.0 * qm1.rbar - qm2.rbar) / (2.0 * h3 * h3 * h3);
        assert!(n0.d_r0[1].abs() > 1e-3, "test field should curve the map");
        assert_relative_eq!(n0.d_r0[0], fd1, max_relative = 1e-8);
        assert_relative_eq!(n0.d_r0[1], fd2, max_relative = 1e-4);
        assert_relative_eq!(n0.d_r0[2], fd3, max_relative = 1e-3, epsilon = 1e-6);
        // frozen closed-form values from stream-function conservation
        // (psi(rbar0, z_in) = psi(Rbar, z), 40-digit root + differentiation)
        assert_relative_eq!(n0.rbar, 0.47567833127195129, max_relative = 1e-9);
        assert_relative_eq!(n0.d_r0[0], 0.880835322448, max_relative = 1e-9);
        assert_relative_eq!(n0.d_r0[1], 0.0725417658631, max_relative = 1e-7);
        assert_relative_eq!(n0.d_r0[2], 0.0183506748471, max_relative = 1e-6);
        // variation of Y1 across streamlines matches Y2
        let fd_y2 = (np1.d_r0[0] - nm1.d_r0[0]) / (2.0 * h);
        assert_relative_eq!(n0.d_r0[1], fd_y2, max_relative = 1e-6);
        // and of Y2 matches Y3
        let fd_y3 = (np1.d_r0[1] - nm1.d_r0[1]) / (2.0 * h);
        assert_relative_eq!(n0.d_r0[2], fd_y3, max_relative = 1e-5, epsilon = 1e-8);
    }

    #[test]
    fn degenerate_map_derivatives_vanish_for_linear_slope_field() {
        // The plain nozzle has f = v_r/v_z linear in r: Y2 = Y3 = 0 exactly.
        let field = Arc::new(catalog::nozzle(
            InflowProfile::constant(1.0),
            0.5,
            SwirlSpec::Rigid { s: 0.5 },
        ));
        let n = trace_streamline(&field, 0.55, 0.0, (-20.0, 2.0))
            .unwrap()
            .node(0.5);
        assert!(n.d_r0[1].abs() < 1e-12);
        assert!(n.d_r0[2].abs() < 1e-12);
    }

    #[test]
    fn map_z_derivatives_match_fd_along_streamline() {
        let field = nozzle_field();
        let s = trace_streamline(&field, 0.5, 0.0, (-20.0, 3.0)).unwrap();
        let z = 0.3;
        let h = 1e-3;
        let r_at = |zz: f64| s.position(zz).0;
        let n = s.node(z);
        let fd1 = (r_at(z + h) - r_at(z - h)) / (2.0 * h);
        let fd2 = (r_at(z + h) - 2.0 * r_at(z) + r_at(z - h)) / (h * h);
        let fd3 = (r_at(z + 2.0 * h) - 2.0 * r_at(z + h) + 2.0 * r_at(z - h)
            - r_at(z - 2.0 * h))
            / (2.0 * h * h * h);
        assert_relative_eq!(n.d_z[0], fd1, max_relative = 1e-6);
        assert_relative_eq!(n.d_z[1], fd2, max_relative = 1e-5, epsilon = 1e-9);
        assert_relative_eq!(n.d_z[2], fd3, max_relative = 1e-3, epsilon = 1e-6);
    }

    #[test]
    fn inversion_round_trip_and_closed_form() {
        let field = nozzle_field();
        let r0s: Vec<f64> = (1..=8).map(|i| 0.1 * i as f64).collect();
        let zs: Vec<f64> = (0..=6).map(|i| -2.0 + i as f64).collect();
        let map = build_streamline_map(&field, 0.0, &r0s, &zs, -20.0).unwrap();
        // closed form: Rbar^{-1}(r, z) = r sqrt(a(z))
        let inv = map.invert(0.4, 0.0).unwrap();
        assert_relative_eq!(inv.rbar0, 0.4 * 1.25f64.sqrt(), max_relative = 1e-8);
        assert_relative_eq!(inv.d_r[0], 1.25f64.sqrt(), max_relative = 1e-8);
        // round trip over assorted labels
        let mut x = 7u64;
        let mut rng = move || {
            x ^= x << 13;
            x ^= x >> 7;
            x ^= x << 17;
            (x >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..20 {
            let r0 = 0.15 + 0.6 * rng();
            let z = -1.0 + 3.0 * rng();
            let rbar = map.eval(r0, z).unwrap().rbar;
            let back = map.invert(rbar, z).unwrap().rbar0;
            assert!(
                (back - r0).abs() < 1e-10,
                "round trip {r0} -> {rbar} -> {back}"
            );
        }
        // out-of-range radius
        assert!(matches!(
            map.invert(0.95, 2.0),
            Err(Error::OutOfMapRange { .. })
        ));
    }

    #[test]
    fn inverse_z_derivatives_match_closed_form() {
        let field = nozzle_field();
        let r0s: Vec<f64> = (1..=8).map(|i| 0.1 * i as f64).collect();
        let zs: Vec<f64> = (0..=6).map(|i| -2.0 + i as f64).collect();
        let map = build_streamline_map(&field, 0.0, &r0s, &zs, -20.0).unwrap();
        // G(r, z) = r sqrt(a(z)):
        //   G_z   = r a' / (2 sqrt(a))
        //   G_zz  = r (2 a a'' - a'^2) / (4 a^{3/2})
        //   G_zzz = r (4 a^2 a''' - 6 a a' a'' + 3 a'^3) / (8 a^{5/2})
        let (r, z) = (0.45, 0.4f64);
        let th = z.tanh();
        let s2 = 1.0 - th * th;
        let a = 1.0 + (1.0 + th) / 4.0;
        let ap = s2 / 4.0;
        let app = -2.0 * th * s2 / 4.0;
        let appp = -s2 * (2.0 - 6.0 * th * th) / 4.0;
        let inv = map.invert(r, z).unwrap();
        assert_relative_eq!(inv.d_z[0], r * ap / (2.0 * a.sqrt()), max_relative = 1e-7);
        assert_relative_eq!(
            inv.d_z[1],
            r * (2.0 * a * app - ap * ap) / (4.0 * a.powf(1.5)),
            max_relative = 1e-6
        );
        assert_relative_eq!(
            inv.d_z[2],
            r * (4.0 * a * a * appp - 6.0 * a * ap * app + 3.0 * ap.powi(3)) / (8.0 * a.powf(2.5)),
            max_relative = 1e-4
        );
    }

    #[test]
    fn rho_closed_form_and_area_oracle() {
        let field = nozzle_field();
        let r0s: Vec<f64> = (1..=8).map(|i| 0.1 * i as f64).collect();
        let zs = vec![-1.0, 0.0, 1.0];
        let map = build_streamline_map(&field, 0.0, &r0s, &zs, -20.0).unwrap();
        // uniform: rho = 1
        let uni = Arc::new(catalog::uniform(InflowProfile::constant(1.0)));
        let umap = build_streamline_map(&uni, 0.0, &r0s, &zs, -10.0).unwrap();
        assert_relative_eq!(umap.rho(0.5, 1.0).unwrap().rho, 1.0, epsilon = 1e-12);
        // nozzle at z = 0: rho = a(0) = 1.25
        assert_relative_eq!(map.rho(0.5, 0.0).unwrap().rho, 1.25, max_relative = 1e-8);
        // annulus-area ratio oracle with eps = 1e-4
        let eps = 1e-4;
        let (r0, z) = (0.5, 0.7);
        let lo = map.eval(r0, z).unwrap().rbar;
        let hi = map.eval(r0 + eps, z).unwrap().rbar;
        let oracle = ((r0 + eps).powi(2) - r0 * r0) / (hi * hi - lo * lo);
        assert_relative_eq!(map.rho(r0, z).unwrap().rho, oracle, max_relative = 1e-6);
    }

    #[test]
    fn rho_derivatives_match_fd() {
        let field = nozzle_field();
        let r0s: Vec<f64> = (1..=8).map(|i| 0.1 * i as f64).collect();
        let zs = vec![-1.0, 0.0, 1.0];
        let map = build_streamline_map(&field, 0.0, &r0s, &zs, -20.0).unwrap();
        let (r0, z) = (0.5, 0.2);
        let n = map.rho(r0, z).unwrap();
        let h = 1e-4;
        let rho_at = |r0: f64, z: f64| map.rho(r0, z).unwrap().rho;
        let fd_z = (rho_at(r0, z + h) - rho_at(r0, z - h)) / (2.0 * h);
        let fd_zz = (rho_at(r0, z + h) - 2.0 * n.rho + rho_at(r0, z - h)) / (h * h);
        let fd_r0 = (rho_at(r0 + h, z) - rho_at(r0 - h, z)) / (2.0 * h);
        let fd_r0r0 = (rho_at(r0 + h, z) - 2.0 * n.rho + rho_at(r0 - h, z)) / (h * h);
        assert_relative_eq!(n.d_z, fd_z, max_relative = 1e-5, epsilon = 1e-8);
        assert_relative_eq!(n.d_zz, fd_zz, max_relative = 1e-4, epsilon = 1e-5);
        assert_relative_eq!(n.d_r0, fd_r0, max_relative = 1e-5, epsilon = 1e-8);
        assert_relative_eq!(n.d_r0r0, fd_r0r0, max_relative = 1e-4, epsilon = 1e-5);
    }

    #[test]
    fn velocity_reconstruction_on_nozzle() {
        let g = InflowProfile::quadratic(1.0, 0.5, 0.0);
        let field = Arc::new(catalog::nozzle(g.clone(), 0.5, SwirlSpec::None));
        let t = 0.8;
        let r0s: Vec<f64> = (1..=9).map(|i| 0.1 * i as f64).collect();
        let zs = vec![-2.0, 0.0, 2.0];
        let map = build_streamline_map(&field, t, &r0s, &zs, -20.0).unwrap();
        // at z = 0: v_z = a(0) g = 1.25 g
        let (vz, _) = map.reconstruct_velocity(&g, 0.3, 0.0).unwrap();
        assert_relative_eq!(vz, 1.25 * g.value(t), max_relative = 1e-8);
        // random probes against direct evaluation
        let mut x = 99u64;
        let mut rng = move || {
            x ^= x << 13;
            x ^= x >> 7;
            x ^= x << 17;
            (x >> 11) as f64 / (1u64 << 53) as f64
        };
        let mut worst: f64 = 0.0;
        for _ in 0..200 {
            let r = 0.1 + 0.6 * rng();
            let z = -2.0 + 4.0 * rng();
            let (vz, vr) = map.reconstruct_velocity(&g, r, z).unwrap();
            let direct = field.velocity_unchecked(r, z, t);
            worst = worst.max((vz - direct.z).abs() / direct.z.abs());
            worst = worst.max((vr - direct.r).abs() / direct.speed());
        }
        assert!(worst < 1e-6, "max reconstruction error {worst}");
    }

    #[test]
    fn laminar_rate_x_values() {
        // uniform pulsatile: exactly 2
        let uni = Arc::new(catalog::uniform(InflowProfile::quadratic(1.0, 3.0, 1.0)));
        let r0s: Vec<f64> = (1..=9).map(|i| 0.1 * i as f64).collect();
        let zs = vec![-2.0, 0.0, 2.0];
        let map = build_streamline_map(&uni, 0.5, &r0s, &zs, -10.0).unwrap();
        let lx = map.laminar_rate_x(0.5, 1.0).unwrap();
        assert!((lx.l_x - 2.0).abs() < 1e-10, "uniform L^x = {}", lx.l_x);

        // nozzle: closed-form sum from Rbar = rbar0 / sqrt(a),
        // Rbar^{-1} = r sqrt(a), at (rbar0, z) = (0.5, 0.0)
        let field = nozzle_field();
        let map = build_streamline_map(&field, 0.0, &r0s, &zs, -20.0).unwrap();
        let lx = map.laminar_rate_x(0.5, 0.0).unwrap();
        let (r0, z) = (0.5f64, 0.0f64);
        let th = z.tanh();
        let s2 = 1.0 - th * th;
        let a: f64 = 1.0 + (1.0 + th) / 4.0;
        let ap = s2 / 4.0;
        let app = -2.0 * th * s2 / 4.0;
        let appp = -s2 * (2.0 - 6.0 * th * th) / 4.0;
        let rbar = r0 / a.sqrt();
        // forward z-derivatives of rbar0 a^{-1/2}
        let f1 = -r0 * ap / (2.0 * a.powf(1.5));
        let f2 = r0 * (3.0 * ap * ap - 2.0 * a * app) / (4.0 * a.powf(2.5));
        let f3 = r0 * (-4.0 * a * a * appp + 18.0 * a * ap * app - 15.0 * ap.powi(3))
            / (8.0 * a.powf(3.5));
        // inverse z-derivatives of r sqrt(a) at r = rbar
        let g1 = rbar * ap / (2.0 * a.sqrt());
        let g2 = rbar * (2.0 * a * app - ap * ap) / (4.0 * a.powf(1.5));
        let g3 = rbar * (4.0 * a * a * appp - 6.0 * a * ap * app + 3.0 * ap.powi(3))
            / (8.0 * a.powf(2.5));
        let want = 1.0 / a.sqrt()
            + (f1.abs() + f2.abs() + f3.abs())
            + a.sqrt()
            + (g1.abs() + g2.abs() + g3.abs());
        assert_relative_eq!(lx.l_x, want, max_relative = 1e-6);
        for term in lx
            .fwd_r0
            .iter()
            .chain(&lx.fwd_z)
            .chain(&lx.inv_r)
            .chain(&lx.inv_z)
        {
            assert!(*term >= 0.0);
        }
        assert!(lx.l_x >= 2.0);
    }

    #[test]
    fn laminar_rate_x_at_least_two_on_catalog() {
        let fields = [
            Arc::new(catalog::nozzle(
                InflowProfile::constant(1.0),
                0.5,
                SwirlSpec::Rigid { s: 0.5 },
            )),
            Arc::new(catalog::rigid_swirl_pulsatile(
                1.0,
                InflowProfile::quadratic(1.0, 1.0, 0.0),
            )),
            Arc::new(catalog::modulated_nozzle(
                InflowProfile::constant(1.0),
                0.25,
                0.5,
                1.0,
                SwirlSpec::None,
            )),
        ];
        for f in fields {
            let r0s: Vec<f64> = (2..=8).map(|i| 0.1 * i as f64).collect();
            let zs = vec![0.0, 1.0];
            let map = build_streamline_map(&f, 0.3, &r0s, &zs, f.default_z_in()).unwrap();
            for &r0 in &[0.3, 0.5, 0.7] {
                let lx = map.laminar_rate_x(r0, 1.0).unwrap().l_x;
                assert!(lx >= 2.0 - 1e-12, "{}: L^x = {lx}", f.name());
            }
        }
    }

    #[test]
    fn laminar_rate_t_steady_and_modulated() {
        // steady nozzle: L^t = 0
        let steady = nozzle_field();
        let lt = laminar_rate_t(&steady, 0.4, 1e-3, 0.5, 0.5, -20.0).unwrap();
        assert!(lt.l_t < 1e-10, "steady L^t = {}", lt.l_t);

        // uniform pulsatile: L^t = 0 even though g varies
        let uni = Arc::new(catalog::uniform(InflowProfile::quadratic(1.0, 2.0, 3.0)));
        let lt = laminar_rate_t(&uni, 0.2, 1e-3, 0.5, 2.0, -10.0).unwrap();
        assert!(lt.l_t < 1e-10, "uniform pulsatile L^t = {}", lt.l_t);

        // time-modulated nozzle against the analytic map derivative:
        // a(z,t) = 1 + (1 + tanh z)(1 + 0.5 sin t)/8, Rbar = rbar0/sqrt(a)
        let field = Arc::new(catalog::modulated_nozzle(
            InflowProfile::constant(1.0),
            0.25,
            0.5,
            1.0,
            SwirlSpec::None,
        ));
        let (t, r0, z) = (0.4f64, 0.5, 0.6);
        let lt = laminar_rate_t(&field, t, 1e-4, r0, z, -20.0).unwrap();
        let w = (1.0 + z.tanh()) / 2.0;
        let wp = (1.0 - z.tanh().powi(2)) / 2.0;
        let m = 0.25 * (1.0 + 0.5 * t.sin());
        let mp = 0.25 * 0.5 * t.cos();
        let a = 1.0 + w * m;
        let a_t = w * mp;
        let a_z = wp * m;
        let a_zt = wp * mp;
        let rbar = r0 / a.sqrt();
        let dt_inv = rbar * a_t / (2.0 * a.sqrt());
        let dt_dr0 = -a_t / (2.0 * a.powf(1.5));
        let dt_dz = -r0 * (a_zt / (2.0 * a.powf(1.5)) - 3.0 * a_z * a_t / (4.0 * a.powf(2.5)));
        let want = dt_inv.abs() + dt_dr0.abs() + dt_dz.abs();
        assert_relative_eq!(lt.l_t, want, max_relative = 1e-4);
        assert_relative_eq!(lt.l_t, lt.l_t_half_step, max_relative = 1e-4);
    }

    #[test]
    fn swirl_transport_laws() {
        // v_r = 0: swirl constant along the trajectory
        let rigid = Arc::new(catalog::rigid_swirl_pulsatile(
            1.2,
            InflowProfile::quadratic(1.0, 1.0, 0.0),
        ));
        let traj = integrate_trajectory(
            rigid.clone(),
            Seed {
                r: 0.5,
                theta: 0.0,
                z: 0.0,
            },
            (0.0, 2.0),
            1e-11,
        )
        .unwrap();
        for t in [0.5, 1.0, 1.9] {
            let got = swirl_transport(&traj, t).unwrap();
            assert_relative_eq!(got, 1.2 * 0.5, max_relative = 1e-12);
            // matches the field's own swirl along the trajectory (certified)
            let p = traj.point(t);
            let own = rigid.component(Comp::Theta, p.r, p.z, t);
            assert_relative_eq!(got, own, max_relative = 1e-10);
        }

        // potential vortex on a nozzle: r v_theta is materially conserved,
        // so the transported value must equal c / R(t).
        let field = Arc::new(catalog::nozzle(
            InflowProfile::constant(1.0),
            0.5,
            SwirlSpec::Vortex { c: 0.3 },
        ));
        let traj = integrate_trajectory(
            field,
            Seed {
                r: 0.6,
                theta: 0.0,
                z: -2.0,
            },
            (0.0, 3.0),
            1e-11,
        )
        .unwrap();
        for t in [1.0, 2.0, 2.9] {
            let got = swirl_transport(&traj, t).unwrap();
            let want = 0.3 / traj.point(t).r;
            assert_relative_eq!(got, want, max_relative = 1e-6);
        }
    }

    #[test]
    fn flux_conservation_on_catalog() {
        let eps = 0.05;
        let cases: Vec<(Arc<Field>, f64)> = vec![
            (
                Arc::new(catalog::uniform(InflowProfile::constant(1.5))),
                -10.0,
            ),
            (nozzle_field(), -20.0),
            (
                Arc::new(catalog::rigid_swirl_pulsatile(
                    1.0,
                    InflowProfile::quadratic(1.0, 1.0, 0.0),
                )),
                -10.0,
            ),
            (
                Arc::new(catalog::modulated_nozzle(
                    InflowProfile::constant(1.0),
                    0.25,
                    0.5,
                    1.0,
                    SwirlSpec::None,
                )),
                -20.0,
            ),
        ];
        for (field, z_in) in cases {
            let r0s: Vec<f64> = (1..=8).map(|i| 0.1 * i as f64).collect();
            let zs = vec![0.0, 1.5];
            let map = build_streamline_map(&field, 0.3, &r0s, &zs, z_in).unwrap();
            for &r0 in &[0.2, 0.5, 0.7] {
                for &z in &zs {
                    let defect = flux_conservation_defect(&map, r0, eps, z).unwrap();
                    assert!(
                        defect < 1e-6,
                        "{}: flux defect {defect} at (r0={r0}, z={z})",
                        field.name()
                    );
                }
            }
        }
    }

    #[test]
    fn steady_streamlines_coincide_with_trajectories() {
        let field = Arc::new(catalog::nozzle(
            InflowProfile::constant(1.0),
            0.5,
            SwirlSpec::Rigid { s: 0.5 },
        ));
        let seed_r = 0.5;
        let z_start = -3.0;
        let traj = integrate_trajectory(
            field.clone(),
            Seed {
                r: seed_r,
                theta: 0.0,
                z: z_start,
            },
            (0.0, 4.0),
            1e-11,
        )
        .unwrap();
        let stream =
            trace_streamline(&field, seed_r, 0.0, (z_start, traj.point(traj.t_end()).z)).unwrap();
        // compare radial position and twist at matched z
        let mut worst: f64 = 0.0;
        for k in 1..20 {
            let t = traj.t_end() * k as f64 / 20.0;
            let p = traj.point(t);
            let (rs, ths) = stream.position(p.z);
            worst = worst.max((rs - p.r).abs()).max((ths - p.theta).abs());
        }
        assert!(worst < 1e-6, "streamline/trajectory distance {worst}");
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        // 12-node rule is exact through degree 23
        let f = |x: f64| 5.0 * x.powi(8) - 3.0 * x.powi(5) + x - 2.0;
        let got = gauss_panel(&f, -1.0, 2.0);
        // antiderivative: 5x^9/9 - x^6/2 + x^2/2 - 2x
        let anti = |x: f64| 5.0 * x.powi(9) / 9.0 - x.powi(6) / 2.0 + x * x / 2.0 - 2.0 * x;
        assert_relative_eq!(got, anti(2.0) - anti(-1.0), max_relative = 1e-13);
    }

    #[test]
    fn map_csv_dump_has_header() {
        let field = nozzle_field();
        let map = build_streamline_map(&field, 0.0, &[0.3, 0.5], &[0.0, 1.0], -20.0).unwrap();
        let mut buf = Vec::new();
        map.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("# rbar0,z,Rbar,"));
        assert_eq!(text.lines().count(), 1 + 4);
    }
}
