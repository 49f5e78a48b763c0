//! Moving-frame diagnostics along trajectories of certified exact Euler
//! fields: the four pressure identities, the rotation-invariance balance,
//! and the key-estimate margins.
//!
//! The identities verified here, with a = -grad p the material acceleration
//! and (tau, n, b) the right-handed Frenet frame:
//!
//!   (i)   -grad p . tau = d_t|u|            (tangential)
//!   (ii)  -grad p . n   = kappa |u|^2       (normal)
//!   (iii) 3 kappa d_t|u| + d_s(kappa) |u|^2 = D_n                (radial frame)
//!   (iv)  T kappa |u|^2                     = D_b                (binormal frame)
//!
//! where D_w is the frame-direction derivative of the along-trajectory
//! speed rate. Two routes compute D_w:
//!
//! - the pressure route differentiates the co-moving pressure rate
//!   (d_t p + u0 . grad p)/|u0| built from the certified gradient; for an
//!   exact solution this makes (iii) and (iv) exact identities;
//! - the flow route displaces the probe point and differences the speed
//!   rate of the trajectories through the displaced points. This is the
//!   naive re-reading of "d_t|u| at a displaced point" and differs from
//!   the identity value by time-coupling terms of the same order as the
//!   identity itself; it is reported for diagnosis and is the correct
//!   building block of the rotation balance, where the time couplings
//!   cancel by axisymmetry.

use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::field::{Comp, Field};
use crate::frenet::{frenet_at_time, FrenetSample, KAPPA_MIN};
use crate::trajectory::Trajectory;

/// Default relative tolerance the report is judged against.
pub const IDENTITY_TOL: f64 = 1e-4;

fn cartesian_grad_p(field: &Field, x: Vector3<f64>, t: f64) -> Result<Vector3<f64>> {
    let r = x.xy().norm();
    let z = x.z;
    let (pr, pz) = field
        .pressure_gradient(r, z, t)
        .ok_or_else(|| Error::Uncertified {
            name: field.name().to_string(),
        })?;
    let er = if r > 0.0 {
        Vector3::new(x.x / r, x.y / r, 0.0)
    } else {
        Vector3::zeros()
    };
    Ok(pr * er + Vector3::new(0.0, 0.0, pz))
}

/// Along-trajectory speed rate of the trajectory through a displaced point
/// (pointwise: a . u / |u| from the field).
fn speed_rate_field(field: &Field, x: Vector3<f64>, t: f64) -> Result<f64> {
    let r = x.xy().norm();
    let z = x.z;
    let a = field.material_acceleration_unchecked(r, z, t)?;
    let v = field.velocity_unchecked(r, z, t);
    Ok((a.r * v.r + a.theta * v.theta + a.z * v.z) / v.speed())
}

/// Frame-direction derivatives of the speed rate at one probe, by both
/// routes, at one FD step.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct RateDerivatives {
    pub n_pressure: f64,
    pub b_pressure: f64,
    pub n_flow: f64,
    pub b_flow: f64,
}

fn rate_flow(
    field: &Field,
    x: Vector3<f64>,
    t: f64,
    w: &Vector3<f64>,
    h_space: f64,
) -> Result<f64> {
    Ok((speed_rate_field(field, x + h_space * w, t)?
        - speed_rate_field(field, x - h_space * w, t)?)
        / (2.0 * h_space))
}

fn rate_derivatives(
    field: &Field,
    x: Vector3<f64>,
    t: f64,
    u: Vector3<f64>,
    frame: &FrenetSample,
    h_space: f64,
    h_time: f64,
) -> Result<RateDerivatives> {
    let speed = u.norm();
    let uhat = u / speed;
    let b_raw = frame.binormal_raw();
    // pressure route: -(w^T Hess(p) u + w^T dt grad p) / |u|
    let hess_u = (cartesian_grad_p(field, x + h_space * uhat, t)?
        - cartesian_grad_p(field, x - h_space * uhat, t)?)
        / (2.0 * h_space)
        * speed;
    let dt_grad = (cartesian_grad_p(field, x, t + h_time)?
        - cartesian_grad_p(field, x, t - h_time)?)
        / (2.0 * h_time);
    let rate_p = |w: &Vector3<f64>| -(w.dot(&hess_u) + w.dot(&dt_grad)) / speed;
    Ok(RateDerivatives {
        n_pressure: rate_p(&frame.normal),
        b_pressure: rate_p(&b_raw),
        n_flow: rate_flow(field, x, t, &frame.normal, h_space)?,
        b_flow: rate_flow(field, x, t, &b_raw, h_space)?,
    })
}

/// Residuals of the four identities at one FD step.
#[derive(Debug, Clone, Copy, Default, serde::Serialize)]
pub struct ProbeResiduals {
    pub tau: f64,
    pub n: f64,
    pub rbar: f64,
    pub zbar: f64,
    pub rel_tau: f64,
    pub rel_n: f64,
    pub rel_rbar: f64,
    pub rel_zbar: f64,
}

impl ProbeResiduals {
    pub fn max_rel(&self) -> f64 {
        self.rel_tau
            .max(self.rel_n)
            .max(self.rel_rbar)
            .max(self.rel_zbar)
    }
}

/// All identity data at one probe time.
#[derive(Debug, Clone, serde::Serialize)]
pub struct IdentityProbe {
    pub t: f64,
    pub s: f64,
    pub kappa: f64,
    pub torsion_raw: f64,
    pub speed: f64,
    pub dt_speed: f64,
    pub ds_kappa: f64,
    /// Residuals with the trajectory-side ingredients from the analytic
    /// chain rule (the pressure-side frame derivatives still difference the
    /// gradient closure at the base step).
    pub analytic: ProbeResiduals,
    /// Residuals with FD ingredients at the base step (the headline values)
    /// and at half step, plus the Richardson slopes log2(|r(h)|/|r(h/2)|).
    pub fd: ProbeResiduals,
    pub fd_half: ProbeResiduals,
    pub slopes: [f64; 4],
    pub rates: RateDerivatives,
    pub fd_space: f64,
    pub fd_time: f64,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct IdentityReport {
    pub field: String,
    pub tolerance: f64,
    pub probes: Vec<IdentityProbe>,
    /// Worst relative FD residual across probes and identities.
    pub max_rel_residual: f64,
    pub passed: bool,
}

impl IdentityReport {
    /// CSV with one row per probe.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(
            w,
            "# probe_s,residual_tau,residual_n,residual_rbar,residual_zbar"
        )?;
        for p in &self.probes {
            writeln!(
                w,
                "{},{},{},{},{}",
                p.s, p.fd.tau, p.fd.n, p.fd.rbar, p.fd.zbar
            )?;
        }
        Ok(())
    }
}

fn rel(res: f64, scale: f64) -> f64 {
    res.abs() / scale.max(1e-300)
}

/// FD steps: spatial step scaled by the tube validity radius 1/kappa
/// (clamped), time step by the same factor.
fn default_steps(kappa: f64) -> (f64, f64) {
    let h = (1e-4 / kappa).clamp(1e-7, 1e-2);
    (h, h)
}

/// Check the four pressure identities along `traj` at the probe times.
/// Requires a certified field (attached pressure gradient).
pub fn check_pressure_identities(
    traj: &Trajectory,
    probe_times: &[f64],
    fd_scale: Option<f64>,
) -> Result<IdentityReport> {
    let field = traj.field();
    if !field.is_certified() {
        return Err(Error::Uncertified {
            name: field.name().to_string(),
        });
    }
    let mut probes = Vec::with_capacity(probe_times.len());
    let mut worst: f64 = 0.0;
    for &t in probe_times {
        let frame = frenet_at_time(traj, t)?;
        let k = traj.kinematics(t);
        let grad_p = cartesian_grad_p(field, k.pos, t)?;
        let dt_speed = traj.speed_rate(t)?;
        let speed = frame.speed;
        let kappa = frame.kappa;
        let t_raw = frame.torsion_raw;

        let (mut h_s, mut h_t) = default_steps(kappa);
        if let Some(sc) = fd_scale {
            h_s = sc;
            h_t = sc;
        }
        // wider step for differencing the path kinematics (their noise
        // floor comes from the dense output, not from analytic closures)
        let (t0, t1) = traj.t_span();
        let h_kin = (1e-2 * t.abs().max(1.0))
            .min((t - t0.min(t1)).max(1e-7) / 2.0)
            .min((t0.max(t1) - t).max(1e-7) / 2.0);

        // identity scales; identities whose own terms vanish are judged
        // against the probe's dominant dynamical scale
        let lhs3 = 3.0 * kappa * dt_speed + frame.ds_kappa * speed * speed;
        let lhs4 = t_raw * kappa * speed * speed;
        let probe_scale = dt_speed
            .abs()
            .max(kappa * speed * speed)
            .max((frame.ds_kappa * speed * speed).abs())
            .max(lhs4.abs())
            .max(grad_p.norm());
        let floor = 1e-3 * probe_scale;
        let scale_tau = grad_p
            .dot(&frame.tangent)
            .abs()
            .max(dt_speed.abs())
            .max(floor);
        let scale_n = grad_p
            .dot(&frame.normal)
            .abs()
            .max(kappa * speed * speed)
            .max(floor);
        let scale3 = (3.0 * kappa * dt_speed)
            .abs()
            .max((frame.ds_kappa * speed * speed).abs())
            .max(floor);
        let scale4 = lhs4.abs().max(floor);

        // analytic residuals: every ingredient by the chain rule
        let rates_a = rate_derivatives(field, k.pos, t, k.vel, &frame, h_s, h_t)?;
        let analytic = ProbeResiduals {
            tau: -grad_p.dot(&frame.tangent) - dt_speed,
            n: -grad_p.dot(&frame.normal) - kappa * speed * speed,
            rbar: lhs3 - rates_a.n_pressure,
            zbar: lhs4 - rates_a.b_pressure,
            rel_tau: rel(-grad_p.dot(&frame.tangent) - dt_speed, scale_tau),
            rel_n: rel(
                -grad_p.dot(&frame.normal) - kappa * speed * speed,
                scale_n,
            ),
            rel_rbar: rel(lhs3 - rates_a.n_pressure, scale3.max(rates_a.n_pressure.abs())),
            rel_zbar: rel(lhs4 - rates_a.b_pressure, scale4.max(rates_a.b_pressure.abs())),
        };

        // FD residuals: the h-dependent ingredients are
        //   (i)   d_t|u| by a centered difference of |u| along the path
        //   (ii)  kappa by a centered second difference of the position
        //   (iii), (iv) the frame-direction rate derivatives at step h
        let fd_at = |sigma: f64| -> Result<ProbeResiduals> {
            let (hs, ht, hk) = (sigma * h_s, sigma * h_t, sigma * h_kin);
            let sp = |tt: f64| traj.velocity(tt).speed();
            let dt_speed_fd = (sp(t + hk) - sp(t - hk)) / (2.0 * hk);
            let pos = |tt: f64| traj.position_cartesian(tt);
            let acc_fd = (pos(t + hk) - 2.0 * pos(t) + pos(t - hk)) / (hk * hk);
            let kappa_fd = k.vel.cross(&acc_fd).norm() / speed.powi(3);
            let rates = rate_derivatives(field, k.pos, t, k.vel, &frame, hs, ht)?;
            let r_tau = -grad_p.dot(&frame.tangent) - dt_speed_fd;
            let r_n = -grad_p.dot(&frame.normal) - kappa_fd * speed * speed;
            let r_rbar = lhs3 - rates.n_pressure;
            let r_zbar = lhs4 - rates.b_pressure;
            Ok(ProbeResiduals {
                tau: r_tau,
                n: r_n,
                rbar: r_rbar,
                zbar: r_zbar,
                rel_tau: rel(r_tau, scale_tau),
                rel_n: rel(r_n, scale_n),
                rel_rbar: rel(r_rbar, scale3.max(rates.n_pressure.abs())),
                rel_zbar: rel(r_zbar, scale4.max(rates.b_pressure.abs())),
            })
        };
        let fd = fd_at(1.0)?;
        let fd_half = fd_at(0.5)?;
        let slopes = [
            crate::fd::richardson_slope(fd.tau, fd_half.tau),
            crate::fd::richardson_slope(fd.n, fd_half.n),
            crate::fd::richardson_slope(fd.rbar, fd_half.rbar),
            crate::fd::richardson_slope(fd.zbar, fd_half.zbar),
        ];
        worst = worst.max(fd.max_rel());
        probes.push(IdentityProbe {
            t,
            s: frame.s,
            kappa,
            torsion_raw: t_raw,
            speed,
            dt_speed,
            ds_kappa: frame.ds_kappa,
            analytic,
            fd,
            fd_half,
            slopes,
            rates: rates_a,
            fd_space: h_s,
            fd_time: h_t,
        });
    }
    Ok(IdentityReport {
        field: field.name().to_string(),
        tolerance: IDENTITY_TOL,
        max_rel_residual: worst,
        passed: worst < IDENTITY_TOL,
        probes,
    })
}

/// The rotation-invariance balance at one probe.
#[derive(Debug, Clone, serde::Serialize)]
pub struct BalanceReport {
    /// Whether the field is a certified exact Euler solution (the balance
    /// decomposition presumes one).
    pub applicable: bool,
    /// Frame undefined (straight trajectory): every term is reported zero.
    pub degenerate: bool,
    /// (e_th.n) D_n + (e_th.b) D_b with the flow-route frame derivatives:
    /// the numerical realization of the azimuthal derivative of the speed
    /// rate, which axisymmetry forces to vanish.
    pub balance: f64,
    /// Trajectory-side assembly with the identity grouping
    /// (e_th.n)(3 kappa dt|u| + ds(kappa)|u|^2) + (e_th.b) T kappa |u|^2.
    pub grouping_identity: f64,
    /// Trajectory-side assembly with the factored grouping
    /// 3 (e_th.n)(kappa dt|u| + ds(kappa)|u|^2) + (e_th.b) T kappa |u|^2.
    pub grouping_factored: f64,
    /// Individual terms: [3 (e_th.n) kappa dt|u|, (e_th.n) ds(kappa) |u|^2,
    /// (e_th.b) T kappa |u|^2].
    pub terms: [f64; 3],
    /// Lower-bound comparator (3/2)|ds kappa||u|^2 - 3 kappa |dt|u|| -
    /// |T| kappa |u|^2.
    pub comparator: f64,
    /// Independent two-sided angular FD of the speed rate around the axis.
    pub angular_fd: f64,
    /// max of the absolute trajectory-side terms.
    pub dominant_scale: f64,
}

/// Evaluate the rotation balance at time `t` along `traj`. For fields that
/// fail certification the balance is reported not-applicable; for straight
/// trajectories it is degenerate.
pub fn rotation_balance(traj: &Trajectory, t: f64) -> Result<BalanceReport> {
    let field = traj.field();
    let applicable = field.is_certified();
    let frame = match frenet_at_time(traj, t) {
        Ok(f) => f,
        Err(Error::FrameUndefined { .. }) => {
            return Ok(BalanceReport {
                applicable,
                degenerate: true,
                balance: 0.0,
                grouping_identity: 0.0,
                grouping_factored: 0.0,
                terms: [0.0; 3],
                comparator: 0.0,
                angular_fd: 0.0,
                dominant_scale: 0.0,
            })
        }
        Err(e) => return Err(e),
    };
    let k = traj.kinematics(t);
    let p = traj.point(t);
    let e_th = Vector3::new(-p.theta.sin(), p.theta.cos(), 0.0);
    let dt_speed = traj.speed_rate(t)?;
    let speed = frame.speed;
    let (kappa, ds_kappa, t_raw) = (frame.kappa, frame.ds_kappa, frame.torsion_raw);
    let b_raw = frame.binormal_raw();

    let (h_s, _h_t) = default_steps(kappa);
    let n_flow = rate_flow(field, k.pos, t, &frame.normal, h_s)?;
    let b_flow = rate_flow(field, k.pos, t, &b_raw, h_s)?;
    let cn = e_th.dot(&frame.normal);
    let cb = e_th.dot(&b_raw);
    let balance = cn * n_flow + cb * b_flow;

    let term1 = 3.0 * cn * kappa * dt_speed;
    let term2 = cn * ds_kappa * speed * speed;
    let term3 = cb * t_raw * kappa * speed * speed;
    let comparator = 1.5 * ds_kappa.abs() * speed * speed
        - 3.0 * kappa * dt_speed.abs()
        - t_raw.abs() * kappa * speed * speed;

    // angular FD: rotate the probe point around the axis and difference the
    // displaced-trajectory speed rate; axisymmetry makes this vanish.
    let dphi = 1e-4;
    let rot = |phi: f64| {
        let (s, c) = phi.sin_cos();
        Vector3::new(c * k.pos.x - s * k.pos.y, s * k.pos.x + c * k.pos.y, k.pos.z)
    };
    let arc = p.r * dphi;
    let angular_fd = (speed_rate_field(field, rot(dphi), t)?
        - speed_rate_field(field, rot(-dphi), t)?)
        / (2.0 * arc);

    Ok(BalanceReport {
        applicable,
        degenerate: false,
        balance,
        grouping_identity: cn * (3.0 * kappa * dt_speed + ds_kappa * speed * speed) + term3,
        grouping_factored: 3.0 * cn * (kappa * dt_speed + ds_kappa * speed * speed) + term3,
        terms: [term1, term2, term3],
        comparator,
        angular_fd,
        dominant_scale: term1.abs().max(term2.abs()).max(term3.abs()),
    })
}

/// Classification of the key-estimate margins.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum MarginClass {
    Holds,
    Fails,
    Degenerate,
}

/// Margins of the three key estimates at a probe:
///   m1 = |u|^2 |ds kappa| / 6 - kappa dt|u|
///   m2 = |ds kappa| / 2 - |kappa T b . e_theta|
///   n . e_theta in [-1, -1/2)
#[derive(Debug, Clone, serde::Serialize)]
pub struct MarginReport {
    pub class: MarginClass,
    pub margin1: f64,
    pub margin2: f64,
    pub n_dot_etheta: f64,
    pub kappa: f64,
    pub ds_kappa: f64,
    pub dt_speed: f64,
    pub torsion_raw: f64,
    pub speed: f64,
}

/// Relative floor below which |ds kappa| counts as degenerate (steady
/// geometry).
const DS_KAPPA_DEGENERATE: f64 = 1e-8;

pub fn key_inequalities(traj: &Trajectory, t: f64) -> Result<MarginReport> {
    let p = traj.point(t);
    let v_theta = traj
        .field()
        .component(Comp::Theta, p.r, p.z, t);
    if v_theta == 0.0 {
        return Err(Error::InvalidParameter {
            name: "traj",
            reason: "key estimates need a swirling flow (v_theta != 0)".into(),
        });
    }
    let frame = match frenet_at_time(traj, t) {
        Ok(f) => f,
        Err(Error::FrameUndefined { kappa, .. }) => {
            return Ok(MarginReport {
                class: MarginClass::Degenerate,
                margin1: 0.0,
                margin2: 0.0,
                n_dot_etheta: 0.0,
                kappa,
                ds_kappa: 0.0,
                dt_speed: 0.0,
                torsion_raw: 0.0,
                speed: traj.velocity(t).speed(),
            })
        }
        Err(e) => return Err(e),
    };
    let dt_speed = traj.speed_rate(t)?;
    let e_th = Vector3::new(-p.theta.sin(), p.theta.cos(), 0.0);
    let speed = frame.speed;
    let m1 = speed * speed * frame.ds_kappa.abs() / 6.0 - frame.kappa * dt_speed;
    let m2 = frame.ds_kappa.abs() / 2.0
        - (frame.kappa * frame.torsion_raw * frame.binormal_raw().dot(&e_th)).abs();
    let ne = frame.normal.dot(&e_th);
    let degenerate =
        frame.ds_kappa.abs() < DS_KAPPA_DEGENERATE * frame.kappa.max(KAPPA_MIN);
    let class = if degenerate {
        MarginClass::Degenerate
    } else if m1 > 0.0 && m2 > 0.0 && (-1.0..-0.5).contains(&ne) {
        MarginClass::Holds
    } else {
        MarginClass::Fails
    };
    Ok(MarginReport {
        class,
        margin1: m1,
        margin2: m2,
        n_dot_etheta: ne,
        kappa: frame.kappa,
        ds_kappa: frame.ds_kappa,
        dt_speed,
        torsion_raw: frame.torsion_raw,
        speed,
    })
}
