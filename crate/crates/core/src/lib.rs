//! Lagrangian diagnostics for pulsatile axisymmetric pipe flow.
//!
//! The crate provides, over an analytic catalog of axisymmetric velocity
//! fields in a cylinder:
//!
//! - particle trajectory integration with dense output, arc-length and
//!   axis-length reparametrizations ([`trajectory`]);
//! - fixed-time streamline maps with variational derivatives, radial
//!   inversion, inflow propagation, laminar-rate functionals and swirl
//!   transport ([`atlas`]);
//! - the Frenet-Serret apparatus along trajectories, moving-frame
//!   coordinate matrices and normal coordinates ([`frenet`]);
//! - moving-frame pressure identities, the rotation-invariance balance,
//!   key-estimate margins and the inflow-condition instability scan
//!   ([`identities`], [`scan`]).

pub mod atlas;
pub mod error;
pub mod fd;
pub mod field;
pub mod frenet;
pub mod identities;
pub mod ode;
pub mod scan;
pub mod trajectory;

pub use error::{Error, Result};
pub use field::{
    catalog, CylVelocity, Comp, Deriv, Domain, Field, FieldSpec, InflowProfile, SwirlSpec,
};
