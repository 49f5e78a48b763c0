//! Axisymmetric velocity fields on the cylinder: evaluation, analytic or
//! finite-difference derivatives, divergence, material acceleration, and
//! exact-Euler certification.

mod bessel;
pub mod catalog;
mod inflow;

pub use catalog::{FieldSpec, SwirlSpec};
pub use inflow::InflowProfile;

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fd;

/// Radius below which axis limit forms replace singular expressions.
pub const AXIS_FLOOR: f64 = 1e-8;

pub type SpaceTimeFn = Arc<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>;

/// Cylindrical velocity components at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CylVelocity {
    pub r: f64,
    pub theta: f64,
    pub z: f64,
}

impl CylVelocity {
    pub fn speed(&self) -> f64 {
        (self.r * self.r + self.theta * self.theta + self.z * self.z).sqrt()
    }
}

/// Velocity component index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Comp {
    R = 0,
    Theta = 1,
    Z = 2,
}

/// Partial-derivative selector for component evaluators: first and second
/// derivatives in (r, z, t) including the mixed ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Deriv {
    R = 0,
    Z = 1,
    T = 2,
    Rr = 3,
    Rz = 4,
    Zz = 5,
    Tt = 6,
    Rt = 7,
    Zt = 8,
}

pub const N_DERIVS: usize = 9;

/// Reflection parity of a component across the axis r = 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Odd,
    Even,
}

impl Parity {
    fn sign(self) -> f64 {
        match self {
            Parity::Odd => -1.0,
            Parity::Even => 1.0,
        }
    }
}

/// Evaluation domain: the cylinder 0 <= r <= r_max with z and t windows.
#[derive(Debug, Clone)]
pub struct Domain {
    pub r_max: f64,
    pub z_range: (f64, f64),
    pub t_range: (f64, f64),
}

impl Default for Domain {
    fn default() -> Self {
        Self {
            r_max: 1.0,
            z_range: (-50.0, 50.0),
            t_range: (-100.0, 100.0),
        }
    }
}

impl Domain {
    pub fn contains(&self, r: f64, z: f64, t: f64) -> Result<()> {
        if !(0.0..=self.r_max).contains(&r) {
            return Err(Error::OutOfDomain {
                coordinate: "r",
                value: r,
                bound: format!("[0, {}]", self.r_max),
            });
        }
        if !(self.z_range.0..=self.z_range.1).contains(&z) {
            return Err(Error::OutOfDomain {
                coordinate: "z",
                value: z,
                bound: format!("[{}, {}]", self.z_range.0, self.z_range.1),
            });
        }
        if !(self.t_range.0..=self.t_range.1).contains(&t) {
            return Err(Error::OutOfDomain {
                coordinate: "t",
                value: t,
                bound: format!("[{}, {}]", self.t_range.0, self.t_range.1),
            });
        }
        Ok(())
    }
}

struct Component {
    value: SpaceTimeFn,
    derivs: [Option<SpaceTimeFn>; N_DERIVS],
    parity: Parity,
}

/// An axisymmetric velocity field (v_r, v_theta, v_z)(r, z, t).
///
/// Analytic derivative evaluators are attached where the catalog knows them;
/// anything missing is closed with centered finite differences of the
/// component evaluators, reflecting across the axis with the declared
/// parities so the stencils stay centered near r = 0.
///
/// A field carrying a `pressure_gradient` evaluator is a certified exact
/// Euler solution: its material acceleration equals minus that gradient.
pub struct Field {
    name: String,
    comps: [Component; 3],
    pressure_gradient: Option<[SpaceTimeFn; 2]>,
    domain: Domain,
    incompressible: bool,
    inflow: Option<InflowProfile>,
    default_z_in: f64,
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Field")
            .field("name", &self.name)
            .field("incompressible", &self.incompressible)
            .field("certified", &self.pressure_gradient.is_some())
            .finish()
    }
}

impl Field {
    pub fn builder(name: impl Into<String>) -> FieldBuilder {
        FieldBuilder::new(name)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn is_incompressible(&self) -> bool {
        self.incompressible
    }

    /// The uniform inflow profile this field approaches at the inflow
    /// station, when one was declared.
    pub fn inflow(&self) -> Option<&InflowProfile> {
        self.inflow.as_ref()
    }

    /// Default inflow station used when a caller does not override z_in.
    pub fn default_z_in(&self) -> f64 {
        self.default_z_in
    }

    /// Whether an analytic pressure gradient is attached (certified exact
    /// Euler solution).
    pub fn is_certified(&self) -> bool {
        self.pressure_gradient.is_some()
    }

    /// Analytic pressure gradient (dp/dr, dp/dz) for certified fields.
    pub fn pressure_gradient(&self, r: f64, z: f64, t: f64) -> Option<(f64, f64)> {
        self.pressure_gradient
            .as_ref()
            .map(|pg| ((pg[0])(r, z, t), (pg[1])(r, z, t)))
    }

    /// Component value with axis reflection for r < 0 (used by the
    /// finite-difference closures so centered stencils cross the axis).
    fn comp_reflected(&self, c: Comp, r: f64, z: f64, t: f64) -> f64 {
        let comp = &self.comps[c as usize];
        if r < 0.0 {
            comp.parity.sign() * (comp.value)(-r, z, t)
        } else {
            (comp.value)(r, z, t)
        }
    }

    /// Raw component value (no domain check).
    pub fn component(&self, c: Comp, r: f64, z: f64, t: f64) -> f64 {
        self.comp_reflected(c, r, z, t)
    }

    /// Velocity with domain check.
    pub fn velocity(&self, r: f64, z: f64, t: f64) -> Result<CylVelocity> {
        self.domain.contains(r, z, t)?;
        Ok(self.velocity_unchecked(r, z, t))
    }

    pub fn velocity_unchecked(&self, r: f64, z: f64, t: f64) -> CylVelocity {
        CylVelocity {
            r: self.comp_reflected(Comp::R, r, z, t),
            theta: self.comp_reflected(Comp::Theta, r, z, t),
            z: self.comp_reflected(Comp::Z, r, z, t),
        }
    }

    pub fn speed(&self, r: f64, z: f64, t: f64) -> f64 {
        self.velocity_unchecked(r, z, t).speed()
    }

    /// Partial derivative of a component: analytic when attached, centered
    /// finite differences of the component evaluator otherwise.
    pub fn deriv(&self, c: Comp, d: Deriv, r: f64, z: f64, t: f64) -> f64 {
        if let Some(f) = &self.comps[c as usize].derivs[d as usize] {
            return f(r, z, t);
        }
        let v = |r, z, t| self.comp_reflected(c, r, z, t);
        match d {
            Deriv::R => fd::d1_central(|x| v(x, z, t), r, fd::step1(r)),
            Deriv::Z => fd::d1_central(|x| v(r, x, t), z, fd::step1(z)),
            Deriv::T => fd::d1_central(|x| v(r, z, x), t, fd::step1(t)),
            Deriv::Rr => fd::d2_central(|x| v(x, z, t), r, fd::step2(r)),
            Deriv::Zz => fd::d2_central(|x| v(r, x, t), z, fd::step2(z)),
            Deriv::Tt => fd::d2_central(|x| v(r, z, x), t, fd::step2(t)),
            Deriv::Rz => fd::d2_mixed(|x, y| v(x, y, t), r, z, fd::step2(r), fd::step2(z)),
            Deriv::Rt => fd::d2_mixed(|x, y| v(x, z, y), r, t, fd::step2(r), fd::step2(t)),
            Deriv::Zt => fd::d2_mixed(|x, y| v(r, x, y), z, t, fd::step2(z), fd::step2(t)),
        }
    }

    /// Cylindrical divergence (1/r) d(r v_r)/dr + d(v_z)/dz.
    ///
    /// At the axis the limit form 2 dv_r/dr + dv_z/dz applies provided
    /// v_r(0) = 0; otherwise the divergence is singular there.
    pub fn divergence(&self, r: f64, z: f64, t: f64) -> Result<f64> {
        self.domain.contains(r, z, t)?;
        let dvr_dr = self.deriv(Comp::R, Deriv::R, r, z, t);
        let dvz_dz = self.deriv(Comp::Z, Deriv::Z, r, z, t);
        if r < AXIS_FLOOR {
            let vr0 = self.comp_reflected(Comp::R, r, z, t);
            if vr0.abs() > 1e-9 {
                return Err(Error::OutOfDomain {
                    coordinate: "r",
                    value: r,
                    bound: format!("axis limit needs v_r(0) = 0, got {vr0}"),
                });
            }
            return Ok(2.0 * dvr_dr + dvz_dz);
        }
        let vr = self.comp_reflected(Comp::R, r, z, t);
        Ok(vr / r + dvr_dr + dvz_dz)
    }

    /// Material acceleration Du/Dt in cylindrical components:
    ///   a_r     = D v_r - v_theta^2 / r
    ///   a_theta = D v_theta + v_r v_theta / r
    ///   a_z     = D v_z
    /// with D the along-trajectory rate. For a certified field this equals
    /// (-dp/dr, 0, -dp/dz).
    pub fn material_acceleration(&self, r: f64, z: f64, t: f64) -> Result<CylVelocity> {
        self.domain.contains(r, z, t)?;
        self.material_acceleration_unchecked(r, z, t)
    }

    /// Acceleration without the domain check; finite-difference probes near
    /// the boundary evaluate the analytic continuation marginally outside.
    pub fn material_acceleration_unchecked(&self, r: f64, z: f64, t: f64) -> Result<CylVelocity> {
        let v = self.velocity_unchecked(r, z, t);
        let d = |c, dd| self.deriv(c, dd, r, z, t);
        let adv = |c: Comp| {
            d(c, Deriv::T) + v.r * d(c, Deriv::R) + v.z * d(c, Deriv::Z)
        };
        // Singular terms: with odd parity both v_theta^2/r and v_r v_theta/r
        // vanish linearly at the axis.
        let (cent, coriolis) = if r < AXIS_FLOOR {
            let dvt = d(Comp::Theta, Deriv::R);
            let dvr = d(Comp::R, Deriv::R);
            if v.theta.abs() > 1e-9 || v.r.abs() > 1e-9 {
                return Err(Error::OutOfDomain {
                    coordinate: "r",
                    value: r,
                    bound: "axis limit needs v_r(0) = v_theta(0) = 0".into(),
                });
            }
            (r * dvt * dvt, r * dvr * dvt)
        } else {
            (v.theta * v.theta / r, v.r * v.theta / r)
        };
        Ok(CylVelocity {
            r: adv(Comp::R) - cent,
            theta: adv(Comp::Theta) + coriolis,
            z: adv(Comp::Z),
        })
    }
}

/// Numerical certification that a field admits a single-valued pressure:
/// the azimuthal acceleration must vanish and the meridional acceleration
/// must be curl-free.
#[derive(Debug, Clone, serde::Serialize)]
pub struct CertificationReport {
    pub field: String,
    pub max_a_theta: f64,
    pub max_curl_residual: f64,
    /// max |a| over the sample grid, the scale the tolerances are relative to.
    pub accel_scale: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// Check a_theta = 0 and d(a_r)/dz - d(a_z)/dr = 0 on the given sample
/// points. Failure is an outcome, not an error.
pub fn pressure_gradient_certify(
    field: &Field,
    samples: &[(f64, f64, f64)],
) -> Result<CertificationReport> {
    const REL_TOL: f64 = 1e-8;
    let mut max_at: f64 = 0.0;
    let mut max_curl: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for &(r, z, t) in samples {
        let a = field.material_acceleration(r, z, t)?;
        scale = scale.max(a.speed());
        max_at = max_at.max(a.theta.abs());
        let hr = fd::step1(r).min(0.25 * r.max(AXIS_FLOOR));
        let hz = fd::step1(z);
        let dar_dz = (field.material_acceleration(r, z + hz, t)?.r
            - field.material_acceleration(r, z - hz, t)?.r)
            / (2.0 * hz);
        let daz_dr = (field.material_acceleration(r + hr, z, t)?.z
            - field.material_acceleration((r - hr).max(0.0), z, t)?.z)
            / (hr + hr.min(r));
        max_curl = max_curl.max((dar_dz - daz_dr).abs());
    }
    let tol = REL_TOL * scale.max(1e-30);
    Ok(CertificationReport {
        field: field.name().to_string(),
        max_a_theta: max_at,
        max_curl_residual: max_curl,
        accel_scale: scale,
        tolerance: tol,
        passed: max_at <= tol && max_curl <= tol,
    })
}

/// Builder for assembling a [`Field`] from component closures.
pub struct FieldBuilder {
    name: String,
    comps: [Option<Component>; 3],
    pressure_gradient: Option<[SpaceTimeFn; 2]>,
    domain: Domain,
    incompressible: bool,
    inflow: Option<InflowProfile>,
    default_z_in: f64,
}

impl FieldBuilder {
    fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            comps: [None, None, None],
            pressure_gradient: None,
            domain: Domain::default(),
            incompressible: false,
            inflow: None,
            default_z_in: -10.0,
        }
    }

    /// Set a component from a value closure; derivatives fall back to FD.
    pub fn component(
        mut self,
        c: Comp,
        value: impl Fn(f64, f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        let parity = default_parity(c);
        self.comps[c as usize] = Some(Component {
            value: Arc::new(value),
            derivs: Default::default(),
            parity,
        });
        self
    }

    /// Attach an analytic derivative to the most recently set component.
    pub fn deriv(
        mut self,
        c: Comp,
        d: Deriv,
        f: impl Fn(f64, f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        let comp = self.comps[c as usize]
            .as_mut()
            .expect("set the component before its derivatives");
        comp.derivs[d as usize] = Some(Arc::new(f));
        self
    }

    /// Declare every unlisted derivative of a component identically zero.
    pub fn zero_remaining_derivs(mut self, c: Comp) -> Self {
        let comp = self.comps[c as usize]
            .as_mut()
            .expect("set the component before its derivatives");
        for slot in comp.derivs.iter_mut() {
            if slot.is_none() {
                *slot = Some(Arc::new(|_, _, _| 0.0));
            }
        }
        self
    }

    pub fn parity(mut self, c: Comp, p: Parity) -> Self {
        if let Some(comp) = self.comps[c as usize].as_mut() {
            comp.parity = p;
        }
        self
    }

    pub fn pressure_gradient(
        mut self,
        dp_dr: impl Fn(f64, f64, f64) -> f64 + Send + Sync + 'static,
        dp_dz: impl Fn(f64, f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        self.pressure_gradient = Some([Arc::new(dp_dr), Arc::new(dp_dz)]);
        self
    }

    pub fn domain(mut self, domain: Domain) -> Self {
        self.domain = domain;
        self
    }

    pub fn incompressible(mut self) -> Self {
        self.incompressible = true;
        self
    }

    pub fn inflow(mut self, g: InflowProfile) -> Self {
        self.inflow = Some(g);
        self
    }

    pub fn default_z_in(mut self, z_in: f64) -> Self {
        self.default_z_in = z_in;
        self
    }

    pub fn build(self) -> Field {
        let zero = || Component {
            value: Arc::new(|_, _, _| 0.0),
            derivs: std::array::from_fn(|_| Some(Arc::new(|_, _, _| 0.0) as SpaceTimeFn)),
            parity: Parity::Odd,
        };
        let [r, th, z] = self.comps;
        Field {
            name: self.name,
            comps: [
                r.unwrap_or_else(zero),
                th.unwrap_or_else(zero),
                z.unwrap_or_else(zero),
            ],
            pressure_gradient: self.pressure_gradient,
            domain: self.domain,
            incompressible: self.incompressible,
            inflow: self.inflow,
            default_z_in: self.default_z_in,
        }
    }
}

fn default_parity(c: Comp) -> Parity {
    match c {
        Comp::R | Comp::Theta => Parity::Odd,
        Comp::Z => Parity::Even,
    }
}
