//! Simulation and analysis toolkit for mirror-mediated optical cooling of
//! trapped particles.
//!
//! A tightly focused laser drives a polarizable particle sitting in front of a
//! distant mirror; the round-trip delay of the reflected light turns the
//! dipole potential into a non-conservative force with a velocity-linear
//! friction component. This crate provides
//!
//! * closed-form perturbative results (friction, momentum diffusion,
//!   stationary temperature) in [`physics`],
//! * a discrete-mode description of the field and the deterministic drift of
//!   the coupled atom-field system in [`field`],
//! * a stochastic integrator for single trajectories and deterministic
//!   parallel ensembles in [`sde`] and [`ensemble`],
//! * extraction of cooling rates and stationary temperatures from simulated
//!   data in [`analysis`],
//! * CSV/JSON dataset emission with reproducible run manifests in [`dataset`].
//!
//! All numerical kernels are generic over the floating-point scalar through
//! the [`real::Real`] trait; the [`f64` aliases](#types) below are what the
//! command-line front end uses.

pub mod analysis;
pub mod constants;
pub mod dataset;
pub mod ensemble;
pub mod error;
pub mod field;
pub mod physics;
pub mod rng;
pub mod sde;
pub mod units;

mod real;

pub use error::{Error, Result};
pub use real::Real;

/// Concrete `f64` instantiations of the generic core types.
pub type Params = physics::PhysicalParams<f64>;
pub type Trap = physics::TrapSpec<f64>;
pub type Grid = field::ModeGrid<f64>;
pub type Field = field::FieldState<f64>;
pub type Coupling = field::AtomFieldCoupling<f64>;
pub type State = sde::SystemState<f64>;
pub type Config = sde::RunConfig<f64>;
pub type Scales = units::Scales<f64>;
