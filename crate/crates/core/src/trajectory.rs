//! Particle trajectories: adaptive integration of the Lagrangian flow,
//! arc-length reparametrization, the axis-length view with derivatives up
//! to third order, and along-trajectory speed rates.

use std::io::Write;
use std::sync::Arc;

use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::field::{Comp, CylVelocity, Deriv, Field, AXIS_FLOOR};
use crate::ode::{OdeEnd, OdeOptions, OdeSolution, Rhs};
use crate::{fd, ode::integrate};

/// Speed below which a trajectory is flagged as stagnant.
pub const U_FLOOR: f64 = 1e-12;

/// How an integration ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrajectoryStatus {
    Completed,
    LeftDomain,
    AxisHit,
    Stagnation,
}

/// Seed of a trajectory: cylindrical position at the start time.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Seed {
    pub r: f64,
    pub theta: f64,
    pub z: f64,
}

/// A dense-output particle path. State layout: [R, Theta, Z, s] with
/// dR/dt = v_r, dTheta/dt = v_theta / R (Theta accumulates, no branch
/// cuts), dZ/dt = v_z and ds/dt = |u|.
#[derive(Clone)]
pub struct Trajectory {
    field: Arc<Field>,
    seed: Seed,
    t_start: f64,
    sol: OdeSolution<4>,
    status: TrajectoryStatus,
}

impl std::fmt::Debug for Trajectory {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Trajectory")
            .field("field", &self.field.name())
            .field("seed", &self.seed)
            .field("span", &self.sol.span())
            .field("status", &self.status)
            .finish()
    }
}

/// Cylindrical state of a trajectory at a time.
#[derive(Debug, Clone, Copy)]
pub struct TrajPoint {
    pub t: f64,
    pub r: f64,
    pub theta: f64,
    pub z: f64,
    pub s: f64,
}

/// Position, velocity, acceleration and jerk of the particle in Cartesian
/// coordinates, from the analytic chain rule through the field derivatives.
#[derive(Debug, Clone, Copy)]
pub struct Kinematics {
    pub pos: Vector3<f64>,
    pub vel: Vector3<f64>,
    pub acc: Vector3<f64>,
    pub jerk: Vector3<f64>,
}

/// Integrate the Lagrangian flow of `field` from `seed` over `t_span`.
///
/// The integration halts (with a status, not an error) when the particle
/// leaves the domain, reaches the axis, or stagnates. A stagnant or
/// out-of-domain seed is an error.
pub fn integrate_trajectory(
    field: Arc<Field>,
    seed: Seed,
    t_span: (f64, f64),
    rel_tol: f64,
) -> Result<Trajectory> {
    let (t0, t1) = t_span;
    field.domain().contains(seed.r, seed.z, t0)?;
    let v0 = field.velocity_unchecked(seed.r, seed.z, t0);
    if v0.speed() <= U_FLOOR {
        return Err(Error::Stagnation {
            speed: v0.speed(),
            floor: U_FLOOR,
            t: t0,
        });
    }

    let opts = OdeOptions {
        rel_tol,
        abs_tol: (rel_tol * 1e-2).min(1e-12),
        ..Default::default()
    };
    let f = field.clone();
    let rhs = move |t: f64, y: &[f64; 4]| {
        let (r, z) = (y[0], y[2]);
        if r <= AXIS_FLOOR {
            return Rhs::Halt(Error::AxisHit { t });
        }
        let v = f.velocity_unchecked(r, z, t);
        let speed = v.speed();
        if speed < U_FLOOR {
            return Rhs::Halt(Error::Stagnation {
                speed,
                floor: U_FLOOR,
                t,
            });
        }
        Rhs::Ok([v.r, v.theta / r, v.z, speed])
    };
    let f = field.clone();
    let halt = move |t: f64, y: &[f64; 4]| {
        let (r, z) = (y[0], y[2]);
        if r <= AXIS_FLOOR {
            return Some(Error::AxisHit { t });
        }
        if f.domain().contains(r, z, t).is_err() {
            return Some(Error::OutOfDomain {
                coordinate: "trajectory",
                value: r,
                bound: "field domain".into(),
            });
        }
        let speed = f.velocity_unchecked(r, z, t).speed();
        if speed < U_FLOOR {
            return Some(Error::Stagnation {
                speed,
                floor: U_FLOOR,
                t,
            });
        }
        None
    };

    let sol = integrate(rhs, t0, t1, [seed.r, seed.theta, seed.z, 0.0], &opts, halt)?;
    let status = match &sol.end {
        OdeEnd::Completed => TrajectoryStatus::Completed,
        OdeEnd::Halted(Error::AxisHit { .. }) => TrajectoryStatus::AxisHit,
        OdeEnd::Halted(Error::Stagnation { .. }) => TrajectoryStatus::Stagnation,
        OdeEnd::Halted(_) => TrajectoryStatus::LeftDomain,
    };
    Ok(Trajectory {
        field,
        seed,
        t_start: t0,
        sol,
        status,
    })
}

impl Trajectory {
    pub fn field(&self) -> &Arc<Field> {
        &self.field
    }

    pub fn seed(&self) -> Seed {
        self.seed
    }

    pub fn status(&self) -> TrajectoryStatus {
        self.status
    }

    /// Time span actually covered (in integration direction).
    pub fn t_span(&self) -> (f64, f64) {
        self.sol.span()
    }

    pub fn t_start(&self) -> f64 {
        self.t_start
    }

    pub fn t_end(&self) -> f64 {
        self.sol.span().1
    }

    /// Accepted step times.
    pub fn sample_times(&self) -> &[f64] {
        self.sol.sample_times()
    }

    pub fn point(&self, t: f64) -> TrajPoint {
        let y = self.sol.eval(t);
        TrajPoint {
            t,
            r: y[0],
            theta: y[1],
            z: y[2],
            s: y[3],
        }
    }

    /// Arc length accumulated at time `t`.
    pub fn arc_length(&self, t: f64) -> f64 {
        self.sol.eval(t)[3]
    }

    pub fn total_arc_length(&self) -> f64 {
        self.sol.y_end[3]
    }

    /// Velocity components at the particle position.
    pub fn velocity(&self, t: f64) -> CylVelocity {
        let p = self.point(t);
        self.field.velocity_unchecked(p.r, p.z, t)
    }

    pub fn position_cartesian(&self, t: f64) -> Vector3<f64> {
        let p = self.point(t);
        Vector3::new(p.r * p.theta.cos(), p.r * p.theta.sin(), p.z)
    }

    /// Along-trajectory rate of each velocity component:
    /// D v_i = (d_t + R' d_r + Z' d_z) v_i.
    pub fn component_rates(&self, t: f64) -> CylVelocity {
        let p = self.point(t);
        let v = self.field.velocity_unchecked(p.r, p.z, t);
        let d = |c, dd| self.field.deriv(c, dd, p.r, p.z, t);
        let rate =
            |c: Comp| d(c, Deriv::T) + v.r * d(c, Deriv::R) + v.z * d(c, Deriv::Z);
        CylVelocity {
            r: rate(Comp::R),
            theta: rate(Comp::Theta),
            z: rate(Comp::Z),
        }
    }

    /// Along-trajectory rate of the speed,
    /// d|u|/dt = (Dv_r v_r + Dv_theta v_theta + Dv_z v_z) / |u|.
    pub fn speed_rate(&self, t: f64) -> Result<f64> {
        let p = self.point(t);
        let v = self.field.velocity_unchecked(p.r, p.z, t);
        let speed = v.speed();
        if speed < U_FLOOR {
            return Err(Error::Stagnation {
                speed,
                floor: U_FLOOR,
                t,
            });
        }
        let rates = self.component_rates(t);
        Ok((rates.r * v.r + rates.theta * v.theta + rates.z * v.z) / speed)
    }

    /// Position/velocity/acceleration/jerk by the analytic chain rule.
    pub fn kinematics(&self, t: f64) -> Kinematics {
        let p = self.point(t);
        let (r, z) = (p.r, p.z);
        let field = &self.field;
        let v = field.velocity_unchecked(r, z, t);
        let d = |c, dd| field.deriv(c, dd, r, z, t);

        // acceleration components and their spatial/time partials
        let dv = |c: Comp| (d(c, Deriv::R), d(c, Deriv::Z), d(c, Deriv::T));
        let (vr_r, vr_z, vr_t) = dv(Comp::R);
        let (vt_r, vt_z, vt_t) = dv(Comp::Theta);
        let (vz_r, vz_z, vz_t) = dv(Comp::Z);

        let a_r = vr_t + v.r * vr_r + v.z * vr_z - v.theta * v.theta / r;
        let a_t = vt_t + v.r * vt_r + v.z * vt_z + v.r * v.theta / r;
        let a_z = vz_t + v.r * vz_r + v.z * vz_z;

        let d2 = |c: Comp| {
            (
                d(c, Deriv::Rr),
                d(c, Deriv::Rz),
                d(c, Deriv::Zz),
                d(c, Deriv::Rt),
                d(c, Deriv::Zt),
                d(c, Deriv::Tt),
            )
        };
        let (vr_rr, vr_rz, vr_zz, vr_rt, vr_zt, vr_tt) = d2(Comp::R);
        let (vt_rr, vt_rz, vt_zz, vt_rt, vt_zt, vt_tt) = d2(Comp::Theta);
        let (vz_rr, vz_rz, vz_zz, vz_rt, vz_zt, vz_tt) = d2(Comp::Z);

        // partials of the acceleration components
        let ar_r = vr_rt + vr_r * vr_r + v.r * vr_rr + vz_r * vr_z + v.z * vr_rz
            - (2.0 * v.theta * vt_r * r - v.theta * v.theta) / (r * r);
        let ar_z = vr_zt + vr_z * vr_r + v.r * vr_rz + vz_z * vr_z + v.z * vr_zz
            - 2.0 * v.theta * vt_z / r;
        let ar_t = vr_tt + vr_t * vr_r + v.r * vr_rt + vz_t * vr_z + v.z * vr_zt
            - 2.0 * v.theta * vt_t / r;

        let at_r = vt_rt + vr_r * vt_r + v.r * vt_rr + vz_r * vt_z + v.z * vt_rz
            + (vr_r * v.theta + v.r * vt_r) / r
            - v.r * v.theta / (r * r);
        let at_z = vt_zt + vr_z * vt_r + v.r * vt_rz + vz_z * vt_z + v.z * vt_zz
            + (vr_z * v.theta + v.r * vt_z) / r;
        let at_t = vt_tt + vr_t * vt_r + v.r * vt_rt + vz_t * vt_z + v.z * vt_zt
            + (vr_t * v.theta + v.r * vt_t) / r;

        let az_r = vz_rt + vr_r * vz_r + v.r * vz_rr + vz_r * vz_z + v.z * vz_rz;
        let az_z = vz_zt + vr_z * vz_r + v.r * vz_rz + vz_z * vz_z + v.z * vz_zz;
        let az_t = vz_tt + vr_t * vz_r + v.r * vz_rt + vz_t * vz_z + v.z * vz_zt;

        // along-trajectory rates of the acceleration components
        let da_r = ar_t + v.r * ar_r + v.z * ar_z;
        let da_t = at_t + v.r * at_r + v.z * at_z;
        let da_z = az_t + v.r * az_r + v.z * az_z;

        // frame rotation rate
        let theta_dot = v.theta / r;
        let jerk_r = da_r - a_t * theta_dot;
        let jerk_t = da_t + a_r * theta_dot;
        let jerk_z = da_z;

        let (sin_t, cos_t) = p.theta.sin_cos();
        let to_cart = |cr: f64, ct: f64, cz: f64| {
            Vector3::new(cr * cos_t - ct * sin_t, cr * sin_t + ct * cos_t, cz)
        };
        Kinematics {
            pos: Vector3::new(r * cos_t, r * sin_t, z),
            vel: to_cart(v.r, v.theta, v.z),
            acc: to_cart(a_r, a_t, a_z),
            jerk: to_cart(jerk_r, jerk_t, jerk_z),
        }
    }

    /// Position derivatives d^k eta / dt^k (k = 1..3) by 7-point stencils
    /// on the dense output; the finite-difference cross-check route.
    ///
    /// The step balances stencil truncation against the dense-output noise
    /// floor (~rel_tol), which the third-derivative stencil divides by h^3.
    pub fn kinematics_fd(&self, t: f64) -> Kinematics {
        let (t0, t1) = self.sol.span();
        let (lo, hi) = (t0.min(t1), t0.max(t1));
        let width = hi - lo;
        let h = (0.04 * t.abs().max(1.0))
            .min((t - lo).max(1e-9) / 3.2)
            .min((hi - t).max(1e-9) / 3.2)
            .min(width / 8.0);
        let pos = |tt: f64| self.position_cartesian(tt);
        let mut vel = Vector3::zeros();
        let mut acc = Vector3::zeros();
        let mut jerk = Vector3::zeros();
        for i in 0..3 {
            let f = |tt: f64| pos(tt)[i];
            vel[i] = fd::d1_stencil7(f, t, h);
            acc[i] = fd::d2_stencil7(f, t, h);
            jerk[i] = fd::d3_refined(f, t, h);
        }
        Kinematics {
            pos: pos(t),
            vel,
            acc,
            jerk,
        }
    }

    /// Write the trajectory as CSV with columns
    /// (t, s, R, Theta, Z, v_r, v_theta, v_z) at the accepted step times.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "# t,s,R,Theta,Z,v_r,v_theta,v_z")?;
        for &t in self.sol.sample_times() {
            let p = self.point(t);
            let v = self.field.velocity_unchecked(p.r, p.z, t);
            writeln!(
                w,
                "{},{},{},{},{},{},{},{}",
                t, p.s, p.r, p.theta, p.z, v.r, v.theta, v.z
            )?;
        }
        Ok(())
    }
}

/// Arc-length reparametrization of a trajectory: s is accumulated path
/// length, t(s) its strictly increasing inverse with dt/ds = 1/|u|.
#[derive(Debug, Clone)]
pub struct ArcLengthTrajectory {
    traj: Trajectory,
    s_total: f64,
}

/// Reparametrize by arc length. Fails if the path contains a stagnant
/// point (t(s) would not be invertible there).
pub fn reparametrize_arclength(traj: &Trajectory) -> Result<ArcLengthTrajectory> {
    for &t in traj.sample_times() {
        let speed = traj.velocity(t).speed();
        if speed < U_FLOOR {
            return Err(Error::Stagnation {
                speed,
                floor: U_FLOOR,
                t,
            });
        }
    }
    Ok(ArcLengthTrajectory {
        s_total: traj.total_arc_length(),
        traj: traj.clone(),
    })
}

impl ArcLengthTrajectory {
    pub fn trajectory(&self) -> &Trajectory {
        &self.traj
    }

    pub fn total_length(&self) -> f64 {
        self.s_total
    }

    /// Invert s(t) by bisection refined with Newton steps (ds/dt = |u|).
    pub fn t_of_s(&self, s: f64) -> f64 {
        let (t0, t1) = self.traj.t_span();
        let target = s.clamp(0.0, self.s_total);
        let (mut a, mut b) = (t0.min(t1), t0.max(t1));
        let sval = |t: f64| self.traj.arc_length(t);
        for _ in 0..90 {
            let m = 0.5 * (a + b);
            if sval(m) < target {
                a = m;
            } else {
                b = m;
            }
        }
        let mut t = 0.5 * (a + b);
        for _ in 0..3 {
            let speed = self.traj.velocity(t).speed();
            if speed <= U_FLOOR {
                break;
            }
            t -= (sval(t) - target) / speed;
            t = t.clamp(t0.min(t1), t0.max(t1));
        }
        t
    }

    /// Position on the curve at arc length `s`.
    pub fn position(&self, s: f64) -> Vector3<f64> {
        self.traj.position_cartesian(self.t_of_s(s))
    }

    /// Unit tangent at arc length `s` (equals u/|u|).
    pub fn tangent(&self, s: f64) -> Vector3<f64> {
        let t = self.t_of_s(s);
        let k = self.traj.kinematics(t);
        k.vel / k.vel.norm()
    }
}

/// Value and first/second derivative of a quantity along a curve;
/// the arithmetic needed to assemble quotients like v_theta / (r v_z).
#[derive(Debug, Clone, Copy)]
pub struct Jet2 {
    pub v: f64,
    pub d1: f64,
    pub d2: f64,
}

impl Jet2 {
    pub fn constant(v: f64) -> Self {
        Jet2 { v, d1: 0.0, d2: 0.0 }
    }
}

impl std::ops::Mul for Jet2 {
    type Output = Jet2;
    fn mul(self, o: Jet2) -> Jet2 {
        Jet2 {
            v: self.v * o.v,
            d1: self.d1 * o.v + self.v * o.d1,
            d2: self.d2 * o.v + 2.0 * self.d1 * o.d1 + self.v * o.d2,
        }
    }
}

impl std::ops::Div for Jet2 {
    type Output = Jet2;
    fn div(self, o: Jet2) -> Jet2 {
        let v = self.v / o.v;
        let d1 = (self.d1 - v * o.d1) / o.v;
        let d2 = (self.d2 - 2.0 * d1 * o.d1 - v * o.d2) / o.v;
        Jet2 { v, d1, d2 }
    }
}

/// Along-curve data of the axis-length view at a station z.
#[derive(Debug, Clone, Copy)]
pub struct AxisSample {
    pub z: f64,
    /// r(z) and derivatives: [r, r', r'', r'''].
    pub r: [f64; 4],
    /// theta(z) and derivatives.
    pub theta: [f64; 4],
    /// t(z) and derivatives.
    pub t: [f64; 4],
    /// Velocity components at the point.
    pub v: CylVelocity,
    /// First and second along-curve z-derivatives of each component.
    pub dzv: CylVelocity,
    pub dz2v: CylVelocity,
}

/// The trajectory re-parametrized by the axial coordinate: valid only for
/// unilateral flow (v_z > 0 along the path).
#[derive(Debug, Clone)]
pub struct AxisLengthView {
    traj: Trajectory,
    z_range: (f64, f64),
}

/// Build the axis-length view, verifying unilaterality along the path.
pub fn axis_length_view(traj: &Trajectory) -> Result<AxisLengthView> {
    for &t in traj.sample_times() {
        let p = traj.point(t);
        let vz = traj.field().component(Comp::Z, p.r, p.z, t);
        if vz <= 0.0 {
            return Err(Error::UnilateralViolation {
                v_z: vz,
                r: p.r,
                z: p.z,
                t,
            });
        }
    }
    let (t0, t1) = traj.t_span();
    let z0 = traj.point(t0).z;
    let z1 = traj.point(t1).z;
    Ok(AxisLengthView {
        traj: traj.clone(),
        z_range: (z0, z1),
    })
}

impl AxisLengthView {
    pub fn z_range(&self) -> (f64, f64) {
        self.z_range
    }

    pub fn trajectory(&self) -> &Trajectory {
        &self.traj
    }

    /// Invert Z(t) = z (monotone by unilaterality).
    pub fn t_of_z(&self, z: f64) -> f64 {
        let (t0, t1) = self.traj.t_span();
        let (mut a, mut b) = (t0.min(t1), t0.max(t1));
        let zval = |t: f64| self.traj.point(t).z;
        // Z increases with t for unilateral flow
        for _ in 0..90 {
            let m = 0.5 * (a + b);
            if zval(m) < z {
                a = m;
            } else {
                b = m;
            }
        }
        let mut t = 0.5 * (a + b);
        for _ in 0..3 {
            let p = self.traj.point(t);
            let vz = self.traj.field().component(Comp::Z, p.r, p.z, t);
            if vz <= 0.0 {
                break;
            }
            t -= (p.z - z) / vz;
            t = t.clamp(t0.min(t1), t0.max(t1));
        }
        t
    }

    /// Along-curve jet of a field component to second order: value,
    /// D_z phi and D_z^2 phi with D_z = r' d_r + d_z + t' d_t.
    #[allow(clippy::too_many_arguments)]
    fn comp_jet(
        &self,
        c: Comp,
        r: f64,
        z: f64,
        t: f64,
        rp: f64,
        tp: f64,
        rpp: f64,
        tpp: f64,
    ) -> Jet2 {
        let field = self.traj.field();
        let d = |dd| field.deriv(c, dd, r, z, t);
        let v = field.component(c, r, z, t);
        let (fr, fz, ft) = (d(Deriv::R), d(Deriv::Z), d(Deriv::T));
        let d1 = fr * rp + fz + ft * tp;
        let (frr, frz, fzz, frt, fzt, ftt) = (
            d(Deriv::Rr),
            d(Deriv::Rz),
            d(Deriv::Zz),
            d(Deriv::Rt),
            d(Deriv::Zt),
            d(Deriv::Tt),
        );
        let d2 = (frr * rp + frz + frt * tp) * rp
            + fr * rpp
            + (frz * rp + fzz + fzt * tp)
            + (frt * rp + fzt + ftt * tp) * tp
            + ft * tpp;
        Jet2 { v, d1, d2 }
    }

    /// Evaluate r(z), theta(z), t(z) and their derivatives to third order
    /// by the chain rule through the field derivatives.
    pub fn sample(&self, z: f64) -> AxisSample {
        let t = self.t_of_z(z);
        let p = self.traj.point(t);
        let r = p.r;
        let field = self.traj.field();
        let v = field.velocity_unchecked(r, z, t);

        // first pass: slopes
        let rp = v.r / v.z;
        let tp = 1.0 / v.z;

        // second pass: D_z of v_r, v_z with (rp, tp); curvature of r(z), t(z)
        let d1 = |c: Comp| {
            let dd = |x| field.deriv(c, x, r, z, t);
            dd(Deriv::R) * rp + dd(Deriv::Z) + dd(Deriv::T) * tp
        };
        let dz_vr = d1(Comp::R);
        let dz_vz = d1(Comp::Z);
        let rpp = (dz_vr * v.z - v.r * dz_vz) / (v.z * v.z);
        let tpp = -dz_vz / (v.z * v.z);

        // third pass: full jets
        let jr = self.comp_jet(Comp::R, r, z, t, rp, tp, rpp, tpp);
        let jt = self.comp_jet(Comp::Theta, r, z, t, rp, tp, rpp, tpp);
        let jz = self.comp_jet(Comp::Z, r, z, t, rp, tp, rpp, tpp);

        let r_jet = jr / jz; // r' and its two derivatives
        let t_jet = Jet2::constant(1.0) / jz; // t'
        let rad = Jet2 {
            v: r,
            d1: rp,
            d2: rpp,
        };
        let th_jet = jt / (rad * jz); // theta'

        AxisSample {
            z,
            r: [r, r_jet.v, r_jet.d1, r_jet.d2],
            theta: [p.theta, th_jet.v, th_jet.d1, th_jet.d2],
            t: [t, t_jet.v, t_jet.d1, t_jet.d2],
            v,
            dzv: CylVelocity {
                r: jr.d1,
                theta: jt.d1,
                z: jz.d1,
            },
            dz2v: CylVelocity {
                r: jr.d2,
                theta: jt.d2,
                z: jz.d2,
            },
        }
    }

    /// r(z), theta(z), t(z) derivatives up to order 3 by 7-point stencils
    /// on an equispaced resample of the dense output (cross-check route).
    pub fn sample_fd(&self, z: f64) -> AxisSample {
        let (z0, z1) = self.z_range;
        let (lo, hi) = (z0.min(z1), z0.max(z1));
        let h = (0.04 * z.abs().max(1.0))
            .min((z - lo).max(1e-9) / 3.2)
            .min((hi - z).max(1e-9) / 3.2)
            .min((hi - lo) / 8.0);
        let eval = |zz: f64, pick: &dyn Fn(TrajPoint) -> f64| {
            let t = self.t_of_z(zz);
            pick(self.traj.point(t))
        };
        let make = |pick: &dyn Fn(TrajPoint) -> f64| {
            [
                eval(z, pick),
                fd::d1_stencil7(|x| eval(x, pick), z, h),
                fd::d2_stencil7(|x| eval(x, pick), z, h),
                fd::d3_refined(|x| eval(x, pick), z, h),
            ]
        };
        let t = self.t_of_z(z);
        let p = self.traj.point(t);
        let v = self.traj.field().velocity_unchecked(p.r, z, t);
        AxisSample {
            z,
            r: make(&|p: TrajPoint| p.r),
            theta: make(&|p: TrajPoint| p.theta),
            t: make(&|p: TrajPoint| p.t),
            v,
            dzv: CylVelocity {
                r: f64::NAN,
                theta: f64::NAN,
                z: f64::NAN,
            },
            dz2v: CylVelocity {
                r: f64::NAN,
                theta: f64::NAN,
                z: f64::NAN,
            },
        }
    }
}

/// Integrate the same trajectory backwards from its endpoint (reversibility
/// checks for steady fields).
pub fn integrate_back(traj: &Trajectory, rel_tol: f64) -> Result<Trajectory> {
    let (t0, t1) = traj.t_span();
    let end = traj.point(t1);
    integrate_trajectory(
        traj.field().clone(),
        Seed {
            r: end.r,
            theta: end.theta,
            z: end.z,
        },
        (t1, t0),
        rel_tol,
    )
}
