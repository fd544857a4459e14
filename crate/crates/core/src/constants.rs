//! Physical constants (SI) and atom presets.

/// Reduced Planck constant, J s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Boltzmann constant, J/K.
pub const KB: f64 = 1.380_649e-23;
/// Speed of light in vacuum, m/s.
pub const C: f64 = 299_792_458.0;
/// Atomic mass unit, kg.
pub const AMU: f64 = 1.660_539_066_60e-27;

/// Rb-87 atomic mass, kg.
pub const RB87_MASS: f64 = 86.909_180_531 * AMU;
/// Rb D2 transition wavelength used throughout, m.
pub const RB_WAVELENGTH: f64 = 780e-9;
/// Rb half linewidth (half of the excited-state decay rate), rad/s.
pub const RB_HALF_LINEWIDTH: f64 = 2.0 * std::f64::consts::PI * 3.03e6;
