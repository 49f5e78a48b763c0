//! Frenet-Serret apparatus along arc-length trajectories, theta-derivative
//! diagnostics of the axis-length view, moving-frame coordinate matrices,
//! and normal (tube) coordinates around a trajectory.

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};
use crate::trajectory::{ArcLengthTrajectory, AxisLengthView, Kinematics};

/// Curvature floor below which the frame is reported undefined.
pub const KAPPA_MIN: f64 = 1e-8;
/// Torsion floor for the orientation selection.
pub const TORSION_FLOOR: f64 = 1e-10;

/// Which binormal was selected to keep the reported torsion positive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Orientation {
    /// b = + tau x n (right-handed; raw torsion was nonnegative).
    PlusTauCrossN,
    /// b = - tau x n (raw torsion was negative; flipped to keep T > 0).
    MinusTauCrossN,
}

/// Frenet data at one point of a trajectory.
#[derive(Debug, Clone, Copy)]
pub struct FrenetSample {
    /// Arc length of the sample.
    pub s: f64,
    /// Time at which the particle passes the sample.
    pub t: f64,
    pub tangent: Vector3<f64>,
    pub normal: Vector3<f64>,
    /// Binormal under the positive-torsion convention (see `orientation`).
    pub binormal: Vector3<f64>,
    pub kappa: f64,
    /// Torsion under the positive convention: |raw| where the orientation
    /// flag applies.
    pub torsion: f64,
    /// Raw signed torsion of the right-handed frame b = tau x n.
    pub torsion_raw: f64,
    pub orientation: Orientation,
    /// Arc-length derivative of the curvature.
    pub ds_kappa: f64,
    pub speed: f64,
}

impl FrenetSample {
    /// Right-handed binormal tau x n regardless of orientation.
    pub fn binormal_raw(&self) -> Vector3<f64> {
        match self.orientation {
            Orientation::PlusTauCrossN => self.binormal,
            Orientation::MinusTauCrossN => -self.binormal,
        }
    }
}

/// Assemble the frame from position derivatives (velocity, acceleration,
/// jerk) of the particle path.
pub fn frenet_from_kinematics(k: &Kinematics, s: f64, t: f64) -> Result<FrenetSample> {
    let speed = k.vel.norm();
    let tau = k.vel / speed;
    let ua = k.vel.cross(&k.acc);
    let ua_norm = ua.norm();
    let kappa = ua_norm / speed.powi(3);
    if kappa < KAPPA_MIN {
        return Err(Error::FrameUndefined {
            kappa,
            floor: KAPPA_MIN,
            s,
        });
    }
    let b_raw = ua / ua_norm;
    let normal = b_raw.cross(&tau);
    let torsion_raw = ua.dot(&k.jerk) / (ua_norm * ua_norm);
    let (binormal, torsion, orientation) = if torsion_raw < -TORSION_FLOOR {
        (-b_raw, -torsion_raw, Orientation::MinusTauCrossN)
    } else {
        (b_raw, torsion_raw, Orientation::PlusTauCrossN)
    };
    // d kappa/ds: d/dt |u x a| = (u x a).(u x j)/|u x a|, d|u|/dt = a.tau
    let dt_kappa = ua.dot(&k.vel.cross(&k.jerk)) / (ua_norm * speed.powi(3))
        - 3.0 * kappa * k.acc.dot(&tau) / speed;
    Ok(FrenetSample {
        s,
        t,
        tangent: tau,
        normal,
        binormal,
        kappa,
        torsion,
        torsion_raw,
        orientation,
        ds_kappa: dt_kappa / speed,
        speed,
    })
}

/// Frenet apparatus at arc length `s`, with derivatives from the analytic
/// chain rule through the field.
pub fn frenet_apparatus(arc: &ArcLengthTrajectory, s: f64) -> Result<FrenetSample> {
    let t = arc.t_of_s(s);
    let k = arc.trajectory().kinematics(t);
    frenet_from_kinematics(&k, s, t)
}

/// Same apparatus with position derivatives from 7-point stencils on the
/// dense output (the cross-check route).
pub fn frenet_apparatus_fd(arc: &ArcLengthTrajectory, s: f64) -> Result<FrenetSample> {
    let t = arc.t_of_s(s);
    let k = arc.trajectory().kinematics_fd(t);
    frenet_from_kinematics(&k, s, t)
}

/// Frenet frame at a trajectory time (used by the identity checks, which
/// probe by t rather than s).
pub fn frenet_at_time(traj: &crate::trajectory::Trajectory, t: f64) -> Result<FrenetSample> {
    let k = traj.kinematics(t);
    let s = traj.arc_length(t);
    frenet_from_kinematics(&k, s, t)
}

/// Theta derivatives of the axis-length view together with the leading
/// terms of their along-trajectory expansions:
///   theta''  ~ -v_theta Dz(v_z) / v_z^2
///   theta''' ~ -v_theta Dz^2(v_z)/(r v_z^2) + 2 v_theta (Dz v_z)^2/(r v_z^3)
/// (Dz the along-trajectory z-derivative). The remainders measure what the
/// leading terms leave out.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct ThetaDerivatives {
    pub z: f64,
    pub theta1: f64,
    pub theta2: f64,
    pub theta3: f64,
    pub theta2_main: f64,
    pub theta3_main: f64,
    pub theta2_remainder: f64,
    pub theta3_remainder: f64,
}

pub fn theta_derivatives(view: &AxisLengthView, z: f64) -> ThetaDerivatives {
    let s = view.sample(z);
    let (r, v, dzv, dz2v) = (s.r[0], s.v, s.dzv, s.dz2v);
    let theta2_main = -v.theta * dzv.z / (v.z * v.z);
    let theta3_main = -v.theta * dz2v.z / (r * v.z * v.z)
        + 2.0 * v.theta * dzv.z * dzv.z / (r * v.z * v.z * v.z);
    ThetaDerivatives {
        z,
        theta1: s.theta[1],
        theta2: s.theta[2],
        theta3: s.theta[3],
        theta2_main,
        theta3_main,
        theta2_remainder: s.theta[2] - theta2_main,
        theta3_remainder: s.theta[3] - theta3_main,
    }
}

/// Curvature squared assembled from the axis-length view (r(z), theta(z)
/// and their derivatives), for cross-checking against the direct frame.
pub fn kappa_squared_from_axis_view(view: &AxisLengthView, z: f64) -> f64 {
    let s = view.sample(z);
    let (r, rp, rpp) = (s.r[0], s.r[1], s.r[2]);
    let (thp, thpp) = (s.theta[1], s.theta[2]);
    let (sin_t, cos_t) = s.theta[0].sin_cos();
    let e1 = Vector3::new(
        rp * cos_t - r * thp * sin_t,
        rp * sin_t + r * thp * cos_t,
        1.0,
    );
    let e2 = Vector3::new(
        rpp * cos_t - 2.0 * rp * thp * sin_t - r * thpp * sin_t - r * thp * thp * cos_t,
        rpp * sin_t + 2.0 * rp * thp * cos_t + r * thpp * cos_t - r * thp * thp * sin_t,
        0.0,
    );
    let n1 = e1.norm();
    let zp = 1.0 / n1;
    let zpp = -e1.dot(&e2) / n1.powi(4);
    e2.norm_squared() * zp.powi(4) + 2.0 * e1.dot(&e2) * zp * zp * zpp + n1 * n1 * zpp * zpp
}

/// Validity floor for the tube coordinates: 1 - kappa rbar must stay above
/// this margin.
pub const TUBE_VALIDITY_MIN: f64 = 0.1;

/// Coordinate-change matrices of the moving frame. `forward` maps the
/// coordinate partials (d_thetabar, d_rbar, d_zbar) to coefficients on
/// (tau, n, b); `inverse` is its exact algebraic inverse, so tau =
/// (1 - kappa rbar)^{-1} [d_thetabar - zbar T d_rbar - rbar T d_zbar].
#[derive(Debug, Clone, Copy)]
pub struct FrameMatrices {
    pub forward: Matrix3<f64>,
    pub inverse: Matrix3<f64>,
}

pub fn moving_frame_matrices(
    kappa: f64,
    torsion: f64,
    rbar: f64,
    zbar: f64,
) -> Result<FrameMatrices> {
    let q = 1.0 - kappa * rbar;
    if q <= TUBE_VALIDITY_MIN {
        return Err(Error::OutsideTube { value: q });
    }
    let forward = Matrix3::new(
        q,
        zbar * torsion,
        rbar * torsion,
        0.0,
        1.0,
        0.0,
        0.0,
        0.0,
        1.0,
    );
    let qi = 1.0 / q;
    let inverse = Matrix3::new(
        qi,
        -zbar * torsion * qi,
        -rbar * torsion * qi,
        0.0,
        1.0,
        0.0,
        0.0,
        0.0,
        1.0,
    );
    Ok(FrameMatrices { forward, inverse })
}

/// Tube coordinates of a point near the curve: x = eta*(theta_bar)
/// + rbar n + zbar b, with theta_bar the arc length of the foot point.
#[derive(Debug, Clone, Copy)]
pub struct NormalCoordinates {
    pub theta_bar: f64,
    pub rbar: f64,
    pub zbar: f64,
    /// |x - reconstruction| of the round trip.
    pub residual: f64,
}

/// Solve the closest-point problem on the curve and project on the frame.
///
/// Candidate feet are located by scanning the dense samples, then refined
/// by Newton iteration on (x - eta*(s)) . tau(s) = 0. Two distinct feet
/// inside the tube make the coordinates ambiguous.
pub fn normal_coordinates(
    arc: &ArcLengthTrajectory,
    x: Vector3<f64>,
) -> Result<NormalCoordinates> {
    let total = arc.total_length();
    let n_scan = 400;
    let dist2 = |s: f64| (x - arc.position(s)).norm_squared();
    // local minima of the scanned distance
    let vals: Vec<f64> = (0..=n_scan)
        .map(|i| dist2(total * i as f64 / n_scan as f64))
        .collect();
    let mut candidates: Vec<f64> = Vec::new();
    for i in 0..=n_scan {
        let v = vals[i];
        let left = if i > 0 { vals[i - 1] } else { f64::INFINITY };
        let right = if i < n_scan { vals[i + 1] } else { f64::INFINITY };
        if v <= left && v <= right {
            candidates.push(total * i as f64 / n_scan as f64);
        }
    }
    // Newton refine: phi(s) = (x - eta(s)).tau(s), phi' = -1 + (x - eta).kappa n
    let mut feet: Vec<(f64, f64)> = Vec::new(); // (s, distance)
    for s0 in candidates {
        let mut s = s0;
        for _ in 0..40 {
            let t = arc.t_of_s(s);
            let k = arc.trajectory().kinematics(t);
            let frame = frenet_from_kinematics(&k, s, t)?;
            let d = x - k.pos;
            let phi = d.dot(&frame.tangent);
            let dphi = -1.0 + d.dot(&frame.normal) * frame.kappa;
            if dphi.abs() < 1e-14 {
                break;
            }
            let step = phi / dphi;
            s -= step;
            s = s.clamp(0.0, total);
            if step.abs() < 1e-13 * total.max(1.0) {
                break;
            }
        }
        let dist = (x - arc.position(s)).norm();
        if !feet
            .iter()
            .any(|(fs, _)| (fs - s).abs() < 1e-6 * total.max(1.0))
        {
            feet.push((s, dist));
        }
    }
    feet.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
    let (s_star, dist) = *feet
        .first()
        .ok_or(Error::Numeric("no closest-point candidate found".into()))?;
    let t_star = arc.t_of_s(s_star);
    let k = arc.trajectory().kinematics(t_star);
    let frame = frenet_from_kinematics(&k, s_star, t_star)?;
    // tube validity: strictly inside the osculating radius
    if dist * frame.kappa >= 1.0 {
        return Err(Error::OutsideTube {
            value: 1.0 - dist * frame.kappa,
        });
    }
    // ambiguity: a second foot inside the tube
    if let Some((s2, d2)) = feet.get(1) {
        if d2 * frame.kappa < 1.0 && (s2 - s_star).abs() > 1e-6 * total.max(1.0) {
            return Err(Error::AmbiguousProjection {
                s1: s_star,
                s2: *s2,
            });
        }
    }
    let d = x - k.pos;
    let rbar = d.dot(&frame.normal);
    let zbar = d.dot(&frame.binormal);
    let recon = k.pos + rbar * frame.normal + zbar * frame.binormal;
    Ok(NormalCoordinates {
        theta_bar: s_star,
        rbar,
        zbar,
        residual: (x - recon).norm(),
    })
}

/// CSV export of frame samples: s, frame vectors, curvature, torsion and
/// orientation sign.
pub fn write_frames_csv<W: std::io::Write>(
    samples: &[FrenetSample],
    mut w: W,
) -> std::io::Result<()> {
    writeln!(
        w,
        "# s,tau_x,tau_y,tau_z,n_x,n_y,n_z,b_x,b_y,b_z,kappa,torsion,orientation"
    )?;
    for f in samples {
        let o = match f.orientation {
            Orientation::PlusTauCrossN => 1i32,
            Orientation::MinusTauCrossN => -1,
        };
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            f.s,
            f.tangent.x,
            f.tangent.y,
            f.tangent.z,
            f.normal.x,
            f.normal.y,
            f.normal.z,
            f.binormal.x,
            f.binormal.y,
            f.binormal.z,
            f.kappa,
            f.torsion,
            o
        )?;
    }
    Ok(())
}
