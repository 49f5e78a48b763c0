//! Analytic field catalog: classical profiles, divergence-free nozzle
//! families built from stream functions, and manufactured fields for
//! negative tests. Catalog fields carry analytic derivatives; anything
//! constructed from bare closures falls back to the FD closures.

use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::Complex;
use serde::{Deserialize, Serialize};

use super::bessel::{j0, j1};
use super::inflow::InflowProfile;
use super::{Comp, Deriv, Domain, Field};
use crate::error::{Error, Result};

fn positive(name: &'static str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::InvalidParameter {
            name,
            reason: format!("must be strictly positive, got {v}"),
        })
    }
}

/// Uniform columnar flow u = (0, 0, g(t)): the laminar reference solution.
pub fn uniform(g: InflowProfile) -> Field {
    let g1 = g.clone();
    let g2 = g.clone();
    let g3 = g.clone();
    Field::builder(format!("uniform[{}]", g.label()))
        .component(Comp::Z, move |_, _, t| g1.value(t))
        .deriv(Comp::Z, Deriv::T, move |_, _, t| g2.d1(t))
        .deriv(Comp::Z, Deriv::Tt, move |_, _, t| g3.d2(t))
        .zero_remaining_derivs(Comp::Z)
        .pressure_gradient(|_, _, _| 0.0, {
            let g = g.clone();
            move |_, _, t| -g.d1(t)
        })
        .incompressible()
        .inflow(g)
        .build()
}

/// Poiseuille profile u_z = p_s (R^2 - r^2) / (4 nu ell). Also a steady
/// Euler solution (unidirectional shear), hence certified with zero
/// pressure gradient.
pub fn poiseuille(p_s: f64, nu: f64, ell: f64, radius: f64) -> Result<Field> {
    positive("p_s", p_s)?;
    positive("nu", nu)?;
    positive("ell", ell)?;
    positive("radius", radius)?;
    let c = p_s / (4.0 * nu * ell);
    let r2 = radius * radius;
    Ok(Field::builder("poiseuille")
        .component(Comp::Z, move |r, _, _| c * (r2 - r * r))
        .deriv(Comp::Z, Deriv::R, move |r, _, _| -2.0 * c * r)
        .deriv(Comp::Z, Deriv::Rr, move |_, _, _| -2.0 * c)
        .zero_remaining_derivs(Comp::Z)
        .pressure_gradient(|_, _, _| 0.0, |_, _, _| 0.0)
        .incompressible()
        .inflow(InflowProfile::constant(c * r2))
        .domain(Domain {
            r_max: radius,
            ..Domain::default()
        })
        .build())
}

/// Parameters of the oscillatory pipe-flow profile.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WomersleyParams {
    /// Pipe radius.
    pub radius: f64,
    /// Kinematic viscosity.
    pub nu: f64,
    /// Angular frequency of the pressure oscillation.
    pub n_freq: f64,
    /// Oscillatory pressure-gradient amplitude.
    pub p_o: f64,
    /// Steady pressure-gradient magnitude (companion Poiseuille part).
    pub p_s: f64,
    /// Pipe length.
    pub ell: f64,
}

impl WomersleyParams {
    pub fn validate(&self) -> Result<()> {
        positive("radius", self.radius)?;
        positive("nu", self.nu)?;
        positive("n_freq", self.n_freq)?;
        positive("p_o", self.p_o)?;
        positive("p_s", self.p_s)?;
        positive("ell", self.ell)?;
        Ok(())
    }

    pub fn alpha(&self) -> f64 {
        womersley_number(self.radius, self.n_freq, self.nu)
    }
}

/// Womersley number alpha = R sqrt(N / nu).
pub fn womersley_number(radius: f64, n_freq: f64, nu: f64) -> f64 {
    radius * (n_freq / nu).sqrt()
}

/// Largest Womersley number the power-series evaluation is validated for.
pub const MAX_WOMERSLEY_ALPHA: f64 = 20.0;

fn j1_over_x(x: Complex<f64>) -> Complex<f64> {
    if x.norm() < 1e-30 {
        Complex::new(0.5, 0.0)
    } else {
        j1(x) / x
    }
}

/// Oscillatory pipe flow: the real part of the classical complex profile
///   u_z(r, t) = Re{ (p_o / (i N)) [1 - J0(k r) / J0(k R)] e^{i N t} },
/// k = i^(3/2) alpha / R. Satisfies no-slip at r = R and the linearized
/// axial momentum balance with forcing p_o cos(N t).
pub fn womersley(params: &WomersleyParams) -> Result<Field> {
    params.validate()?;
    let alpha = params.alpha();
    if alpha > MAX_WOMERSLEY_ALPHA {
        return Err(Error::Numeric(format!(
            "Womersley number {alpha} exceeds series-validated bound {MAX_WOMERSLEY_ALPHA}"
        )));
    }
    let radius = params.radius;
    let n = params.n_freq;
    // i^(3/2) = exp(3 pi i / 4)
    let i32 = Complex::new(-std::f64::consts::FRAC_1_SQRT_2, std::f64::consts::FRAC_1_SQRT_2);
    let k = i32 * alpha / radius;
    let big_b = j0(k * radius);
    let amp = Complex::new(0.0, -params.p_o / n); // p_o / (iN)
    let phase = move |t: f64| Complex::new(0.0, n * t).exp();

    // Radial derivative order m of the complex amplitude profile.
    let profile = move |r: f64, m: u32| -> Complex<f64> {
        let x = k * r;
        match m {
            0 => amp * (Complex::new(1.0, 0.0) - j0(x) / big_b),
            1 => amp * k * j1(x) / big_b,
            // J1'(x) = J0(x) - J1(x)/x
            2 => amp * k * k * (j0(x) - j1_over_x(x)) / big_b,
            _ => unreachable!(),
        }
    };
    let val = move |r: f64, t: f64, m: u32, dt: u32| -> f64 {
        let mut c = profile(r, m) * phase(t);
        for _ in 0..dt {
            c *= Complex::new(0.0, n);
        }
        c.re
    };

    Ok(Field::builder(format!("womersley[alpha={alpha:.3}]"))
        .component(Comp::Z, move |r, _, t| val(r, t, 0, 0))
        .deriv(Comp::Z, Deriv::R, move |r, _, t| val(r, t, 1, 0))
        .deriv(Comp::Z, Deriv::Rr, move |r, _, t| val(r, t, 2, 0))
        .deriv(Comp::Z, Deriv::T, move |r, _, t| val(r, t, 0, 1))
        .deriv(Comp::Z, Deriv::Tt, move |r, _, t| val(r, t, 0, 2))
        .deriv(Comp::Z, Deriv::Rt, move |r, _, t| val(r, t, 1, 1))
        .deriv(Comp::Z, Deriv::Z, |_, _, _| 0.0)
        .deriv(Comp::Z, Deriv::Zz, |_, _, _| 0.0)
        .deriv(Comp::Z, Deriv::Rz, |_, _, _| 0.0)
        .deriv(Comp::Z, Deriv::Zt, |_, _, _| 0.0)
        .incompressible()
        .domain(Domain {
            r_max: radius,
            ..Domain::default()
        })
        .build())
}

/// Rigid-body swirl with uniform pulsatile axial flow:
/// v = (0, omega r, g(t)). Exact Euler solution with
/// grad p = (omega^2 r, 0, -g'(t)).
pub fn rigid_swirl_pulsatile(omega: f64, g: InflowProfile) -> Field {
    let (g1, g2, g3) = (g.clone(), g.clone(), g.clone());
    Field::builder(format!("rigid_swirl_pulsatile[omega={omega}, {}]", g.label()))
        .component(Comp::Theta, move |r, _, _| omega * r)
        .deriv(Comp::Theta, Deriv::R, move |_, _, _| omega)
        .zero_remaining_derivs(Comp::Theta)
        .component(Comp::Z, move |_, _, t| g1.value(t))
        .deriv(Comp::Z, Deriv::T, move |_, _, t| g2.d1(t))
        .deriv(Comp::Z, Deriv::Tt, move |_, _, t| g3.d2(t))
        .zero_remaining_derivs(Comp::Z)
        .pressure_gradient(move |r, _, _| omega * omega * r, {
            let g = g.clone();
            move |_, _, t| -g.d1(t)
        })
        .incompressible()
        .inflow(g)
        .build()
}

/// Steady rigid rotation plus constant axial flow (helical trajectories).
pub fn rotation_axial(omega: f64, c: f64) -> Field {
    rigid_swirl_pulsatile(omega, InflowProfile::constant(c))
}

/// Swirl attached to a nozzle-family field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SwirlSpec {
    None,
    /// v_theta = s r.
    Rigid { s: f64 },
    /// v_theta = c / r (potential vortex; singular at the axis).
    Vortex { c: f64 },
}

fn apply_swirl(builder: super::FieldBuilder, swirl: SwirlSpec) -> super::FieldBuilder {
    match swirl {
        SwirlSpec::None => builder,
        SwirlSpec::Rigid { s } => builder
            .component(Comp::Theta, move |r, _, _| s * r)
            .deriv(Comp::Theta, Deriv::R, move |_, _, _| s)
            .zero_remaining_derivs(Comp::Theta),
        SwirlSpec::Vortex { c } => builder
            .component(Comp::Theta, move |r, _, _| c / r)
            .deriv(Comp::Theta, Deriv::R, move |r, _, _| -c / (r * r))
            .deriv(Comp::Theta, Deriv::Rr, move |r, _, _| 2.0 * c / (r * r * r))
            .zero_remaining_derivs(Comp::Theta),
    }
}

/// A stream function psi(r, z, t) with optional analytic first partials
/// (closed with centered differences when absent). psi/r^2 must stay
/// bounded toward the axis.
pub struct StreamFunction {
    pub psi: super::SpaceTimeFn,
    pub d_r: Option<super::SpaceTimeFn>,
    pub d_z: Option<super::SpaceTimeFn>,
}

impl StreamFunction {
    pub fn from_closure(psi: impl Fn(f64, f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            psi: Arc::new(psi),
            d_r: None,
            d_z: None,
        }
    }

    pub fn with_gradient(
        mut self,
        d_r: impl Fn(f64, f64, f64) -> f64 + Send + Sync + 'static,
        d_z: impl Fn(f64, f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        self.d_r = Some(Arc::new(d_r));
        self.d_z = Some(Arc::new(d_z));
        self
    }
}

/// Radius below which the stream-function components switch to their axis
/// limits (v_r linear, v_z constant in r).
const PSI_AXIS_FLOOR: f64 = 1e-8;

/// Divergence-free field from a stream function:
/// v_r = -(d_z psi)/r, v_z = (d_r psi)/r, with an arbitrary swirl profile.
/// Higher derivatives close by finite differences of the components.
pub fn stream_function_field(
    name: impl Into<String>,
    sf: StreamFunction,
    swirl: SwirlSpec,
) -> Field {
    let d_r = sf.d_r.unwrap_or_else(|| {
        let psi = sf.psi.clone();
        Arc::new(move |r, z, t| {
            crate::fd::d1_central(|x| psi(x, z, t), r, crate::fd::step1(r))
        })
    });
    let d_z = sf.d_z.unwrap_or_else(|| {
        let psi = sf.psi.clone();
        Arc::new(move |r, z, t| {
            crate::fd::d1_central(|x| psi(r, x, t), z, crate::fd::step1(z))
        })
    });
    let dz2 = d_z.clone();
    let dr2 = d_r.clone();
    let builder = Field::builder(name)
        .component(Comp::R, move |r, z, t| {
            if r < PSI_AXIS_FLOOR {
                -dz2(PSI_AXIS_FLOOR, z, t) / PSI_AXIS_FLOOR * (r / PSI_AXIS_FLOOR)
            } else {
                -dz2(r, z, t) / r
            }
        })
        .component(Comp::Z, move |r, z, t| {
            let rr = r.max(PSI_AXIS_FLOOR);
            dr2(rr, z, t) / rr
        });
    apply_swirl(builder, swirl).incompressible().build()
}

/// z-profile of the nozzle families: W(z) = (1 + tanh z)/2 and its first
/// three derivatives. W -> 0 as z -> -inf (uniform inflow) and -> 1
/// downstream.
fn tanh_shape(z: f64) -> [f64; 4] {
    let th = z.tanh();
    let s2 = 1.0 - th * th;
    [
        0.5 * (1.0 + th),
        0.5 * s2,
        -th * s2,
        -s2 * (1.0 - 3.0 * th * th),
    ]
}

/// Divergence-free nozzle family from the stream function
/// psi = g(t) r^2 a(z, t) / 2 with a(z, t) = 1 + W(z) M(t):
///   v_z = g a,   v_r = -g r (dа/dz) / 2.
/// `m` supplies M and its first two time derivatives.
fn separable_nozzle(
    name: String,
    g: InflowProfile,
    m: Arc<dyn Fn(f64) -> [f64; 3] + Send + Sync>,
    swirl: SwirlSpec,
) -> Field {
    let gz = g.clone();
    let gr = g.clone();
    let a = move |z: f64, _t: f64, mm: &[f64; 3]| -> [[f64; 4]; 3] {
        // a-derivatives: rows = t-order 0..2, cols = z-order 0..3
        let w = tanh_shape(z);
        let mut out = [[0.0; 4]; 3];
        for (ti, mv) in mm.iter().enumerate() {
            for zi in 0..4 {
                out[ti][zi] = w[zi] * mv;
            }
            if ti == 0 {
                out[0][0] += 1.0;
            }
        }
        out
    };

    let m_z = m.clone();
    let a_z = a;
    let builder = Field::builder(name)
        .component(Comp::Z, move |_, z, t| {
            let aa = a_z(z, t, &m_z(t));
            gz.value(t) * aa[0][0]
        })
        .deriv(Comp::Z, Deriv::R, |_, _, _| 0.0)
        .deriv(Comp::Z, Deriv::Rr, |_, _, _| 0.0)
        .deriv(Comp::Z, Deriv::Rz, |_, _, _| 0.0)
        .deriv(Comp::Z, Deriv::Rt, |_, _, _| 0.0);

    let (gc, mc, ac) = (g.clone(), m.clone(), a);
    let builder = builder.deriv(Comp::Z, Deriv::Z, move |_, z, t| {
        gc.value(t) * ac(z, t, &mc(t))[0][1]
    });
    let (gc, mc, ac) = (g.clone(), m.clone(), a);
    let builder = builder.deriv(Comp::Z, Deriv::Zz, move |_, z, t| {
        gc.value(t) * ac(z, t, &mc(t))[0][2]
    });
    let (gc, mc, ac) = (g.clone(), m.clone(), a);
    let builder = builder.deriv(Comp::Z, Deriv::T, move |_, z, t| {
        let aa = ac(z, t, &mc(t));
        gc.d1(t) * aa[0][0] + gc.value(t) * aa[1][0]
    });
    let (gc, mc, ac) = (g.clone(), m.clone(), a);
    let builder = builder.deriv(Comp::Z, Deriv::Tt, move |_, z, t| {
        let aa = ac(z, t, &mc(t));
        gc.d2(t) * aa[0][0] + 2.0 * gc.d1(t) * aa[1][0] + gc.value(t) * aa[2][0]
    });
    let (gc, mc, ac) = (g.clone(), m.clone(), a);
    let builder = builder.deriv(Comp::Z, Deriv::Zt, move |_, z, t| {
        let aa = ac(z, t, &mc(t));
        gc.d1(t) * aa[0][1] + gc.value(t) * aa[1][1]
    });

    let (mc, ac) = (m.clone(), a);
    let builder = builder.component(Comp::R, move |r, z, t| {
        -gr.value(t) * r * ac(z, t, &mc(t))[0][1] / 2.0
    });
    let (gc, mc, ac) = (g.clone(), m.clone(), a);
    let builder = builder.deriv(Comp::R, Deriv::R, move |_, z, t| {
        -gc.value(t) * ac(z, t, &mc(t))[0][1] / 2.0
    });
    let builder = builder.deriv(Comp::R, Deriv::Rr, |_, _, _| 0.0);
    let (gc, mc, ac) = (g.clone(), m.clone(), a);
    let builder = builder.deriv(Comp::R, Deriv::Z, move |r, z, t| {
        -gc.value(t) * r * ac(z, t, &mc(t))[0][2] / 2.0
    });
    let (gc, mc, ac) = (g.clone(), m.clone(), a);
    let builder = builder.deriv(Comp::R, Deriv::Rz, move |_, z, t| {
        -gc.value(t) * ac(z, t, &mc(t))[0][2] / 2.0
    });
    let (gc, mc, ac) = (g.clone(), m.clone(), a);
    let builder = builder.deriv(Comp::R, Deriv::Zz, move |r, z, t| {
        -gc.value(t) * r * ac(z, t, &mc(t))[0][3] / 2.0
    });
    let (gc, mc, ac) = (g.clone(), m.clone(), a);
    let builder = builder.deriv(Comp::R, Deriv::T, move |r, z, t| {
        let aa = ac(z, t, &mc(t));
        -r * (gc.d1(t) * aa[0][1] + gc.value(t) * aa[1][1]) / 2.0
    });
    let (gc, mc, ac) = (g.clone(), m.clone(), a);
    let builder = builder.deriv(Comp::R, Deriv::Rt, move |_, z, t| {
        let aa = ac(z, t, &mc(t));
        -(gc.d1(t) * aa[0][1] + gc.value(t) * aa[1][1]) / 2.0
    });
    let (gc, mc, ac) = (g.clone(), m.clone(), a);
    let builder = builder.deriv(Comp::R, Deriv::Zt, move |r, z, t| {
        let aa = ac(z, t, &mc(t));
        -r * (gc.d1(t) * aa[0][2] + gc.value(t) * aa[1][2]) / 2.0
    });
    let (gc, mc, ac) = (g.clone(), m.clone(), a);
    let builder = builder.deriv(Comp::R, Deriv::Tt, move |r, z, t| {
        let aa = ac(z, t, &mc(t));
        -r * (gc.d2(t) * aa[0][1] + 2.0 * gc.d1(t) * aa[1][1] + gc.value(t) * aa[2][1]) / 2.0
    });

    apply_swirl(builder, swirl)
        .incompressible()
        .inflow(g)
        .default_z_in(-20.0)
        .domain(Domain {
            r_max: 1.0,
            z_range: (-40.0, 40.0),
            t_range: (-100.0, 100.0),
        })
        .build()
}

/// Steady-shape nozzle: a(z) = 1 + amp (1 + tanh z) / 2. With the default
/// amp = 0.5 the throat expansion is a(+inf) = 1.5 and a(0) = 1.25.
pub fn nozzle(g: InflowProfile, amp: f64, swirl: SwirlSpec) -> Field {
    separable_nozzle(
        format!("nozzle[amp={amp}, {}]", g.label()),
        g,
        Arc::new(move |_t| [amp, 0.0, 0.0]),
        swirl,
    )
}

/// Nozzle whose strength is modulated in time:
/// a(z, t) = 1 + (1 + tanh z)/2 * amp (1 + m sin(omega_m t)).
pub fn modulated_nozzle(
    g: InflowProfile,
    amp: f64,
    m: f64,
    omega_m: f64,
    swirl: SwirlSpec,
) -> Field {
    separable_nozzle(
        format!("modulated_nozzle[amp={amp}, m={m}, omega_m={omega_m}]"),
        g,
        Arc::new(move |t| {
            [
                amp * (1.0 + m * (omega_m * t).sin()),
                amp * m * omega_m * (omega_m * t).cos(),
                -amp * m * omega_m * omega_m * (omega_m * t).sin(),
            ]
        }),
        swirl,
    )
}

/// Scan family: a nozzle whose strength responds to the inflow history in
/// proportion to the squared swirl rate,
///   a(z, t) = 1 + W(z) [ base_amp + sigma(t) ],
///   sigma(t) = gain s^2 [ (g(t) - g(0)) + lag (g'(t) - g'(0)) ] / g(0),
/// so that d(sigma)/dt at t = 0 is gain s^2 (g'(0) + lag g''(0)) / g(0).
/// Without swirl (s = 0) the shape is frozen and the streamline map is
/// time-independent. The inflow is expected to be quadratic in t (the
/// scan's default family), for which the implied third derivative vanishes.
pub fn swirl_response_nozzle(
    g: InflowProfile,
    base_amp: f64,
    swirl_rate: f64,
    gain: f64,
    lag: f64,
) -> Field {
    let g0 = g.value(0.0);
    let g1 = g.d1(0.0);
    let s2 = swirl_rate * swirl_rate;
    let gm = g.clone();
    let name = format!(
        "swirl_response_nozzle[s={swirl_rate}, base={base_amp}, gain={gain}, lag={lag}, {}]",
        g.label()
    );
    separable_nozzle(
        name,
        g,
        Arc::new(move |t| {
            let sig = gain * s2 * ((gm.value(t) - g0) + lag * (gm.d1(t) - g1)) / g0;
            let sig1 = gain * s2 * (gm.d1(t) + lag * gm.d2(t)) / g0;
            let sig2 = gain * s2 * gm.d2(t) / g0; // g''' = 0 for quadratic g
            [base_amp + sig, sig1, sig2]
        }),
        if swirl_rate == 0.0 {
            SwirlSpec::None
        } else {
            SwirlSpec::Rigid { s: swirl_rate }
        },
    )
}

/// Manufactured non-Euler field v = (0, (omega0 + omega1 z) r, c): the
/// azimuthal acceleration c omega1 r does not vanish, so certification
/// must fail.
pub fn sheared_swirl(omega0: f64, omega1: f64, c: f64) -> Field {
    Field::builder(format!("sheared_swirl[{omega0}, {omega1}, {c}]"))
        .component(Comp::Theta, move |r, z, _| (omega0 + omega1 * z) * r)
        .deriv(Comp::Theta, Deriv::R, move |_, z, _| omega0 + omega1 * z)
        .deriv(Comp::Theta, Deriv::Z, move |r, _, _| omega1 * r)
        .deriv(Comp::Theta, Deriv::Rz, move |_, _, _| omega1)
        .zero_remaining_derivs(Comp::Theta)
        .component(Comp::Z, move |_, _, _| c)
        .zero_remaining_derivs(Comp::Z)
        .incompressible()
        .inflow(InflowProfile::constant(c))
        .build()
}

/// Representative incompressible fields for property tests.
pub fn incompressible_test_catalog() -> Vec<Field> {
    vec![
        uniform(InflowProfile::quadratic(1.0, 0.5, 0.2)),
        poiseuille(4.0, 1.0, 1.0, 1.0).unwrap(),
        rigid_swirl_pulsatile(1.0, InflowProfile::quadratic(1.0, 1.0, 2.0)),
        nozzle(InflowProfile::constant(1.0), 0.5, SwirlSpec::None),
        nozzle(
            InflowProfile::quadratic(1.0, 0.3, 0.1),
            0.5,
            SwirlSpec::Rigid { s: 0.7 },
        ),
        modulated_nozzle(InflowProfile::constant(1.0), 0.25, 0.5, 1.0, SwirlSpec::None),
        womersley(&WomersleyParams {
            radius: 1.0,
            nu: 0.05,
            n_freq: 3.0,
            p_o: 2.0,
            p_s: 1.0,
            ell: 1.0,
        })
        .unwrap(),
    ]
}

/// Catalog addressable by name and flat parameter map (the CLI entry
/// point). Inflow profiles come from `g0`, `g1`, `g2` (quadratic).
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct FieldSpec {
    pub name: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
}

impl FieldSpec {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            params: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: &str, value: f64) -> Self {
        self.params.insert(key.to_string(), value);
        self
    }

    fn get(&self, key: &str) -> Result<f64> {
        self.params.get(key).copied().ok_or(Error::InvalidParameter {
            name: "params",
            reason: format!("field '{}' requires parameter '{key}'", self.name),
        })
    }

    fn get_or(&self, key: &str, default: f64) -> f64 {
        self.params.get(key).copied().unwrap_or(default)
    }

    fn inflow(&self) -> InflowProfile {
        InflowProfile::quadratic(
            self.get_or("g0", 1.0),
            self.get_or("g1", 0.0),
            self.get_or("g2", 0.0),
        )
    }

    fn swirl(&self) -> SwirlSpec {
        if let Some(&c) = self.params.get("swirl_vortex") {
            SwirlSpec::Vortex { c }
        } else {
            match self.get_or("swirl_rigid", 0.0) {
                s if s != 0.0 => SwirlSpec::Rigid { s },
                _ => SwirlSpec::None,
            }
        }
    }

    pub fn build(&self) -> Result<Field> {
        match self.name.as_str() {
            "uniform" => Ok(uniform(self.inflow())),
            "poiseuille" => poiseuille(
                self.get("p_s")?,
                self.get("nu")?,
                self.get_or("ell", 1.0),
                self.get_or("radius", 1.0),
            ),
            "womersley" => womersley(&WomersleyParams {
                radius: self.get_or("radius", 1.0),
                nu: self.get("nu")?,
                n_freq: self.get("n_freq")?,
                p_o: self.get("p_o")?,
                p_s: self.get_or("p_s", 1.0),
                ell: self.get_or("ell", 1.0),
            }),
            "rigid_swirl_pulsatile" => {
                Ok(rigid_swirl_pulsatile(self.get("omega")?, self.inflow()))
            }
            "rotation_axial" => Ok(rotation_axial(self.get("omega")?, self.get("c")?)),
            "nozzle" => Ok(nozzle(self.inflow(), self.get_or("amp", 0.5), self.swirl())),
            "modulated_nozzle" => Ok(modulated_nozzle(
                self.inflow(),
                self.get_or("amp", 0.25),
                self.get_or("m", 0.5),
                self.get_or("omega_m", 1.0),
                self.swirl(),
            )),
            "swirl_response_nozzle" => Ok(swirl_response_nozzle(
                self.inflow(),
                self.get_or("base_amp", 0.25),
                self.get_or("swirl", 1.0),
                self.get_or("gain", 0.05),
                self.get_or("lag", 0.01),
            )),
            "sheared_swirl" => Ok(sheared_swirl(
                self.get_or("omega0", 1.0),
                self.get_or("omega1", 0.5),
                self.get_or("c", 1.0),
            )),
            other => Err(Error::InvalidParameter {
                name: "field.name",
                reason: format!("unknown catalog field '{other}'"),
            }),
        }
    }
}
