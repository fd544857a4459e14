//! Unit handling.
//!
//! Two jobs live here:
//!
//! 1. Parsing dimensioned quantity strings from run configurations. Every
//!    dimensioned config value must carry an explicit unit suffix
//!    (`"10 ns"`, `"-10 Gamma"`, `"3.03 2pi*MHz"`); bare numbers are rejected
//!    for anything that is not dimensionless. Angular frequencies never accept
//!    plain `Hz`-family units, which forces the 2*pi convention to be written
//!    out and blocks the classic factor-of-2*pi mistake.
//!
//! 2. Conversion between SI and the internal normalized unit system used by
//!    the simulation kernels: time in 1/Gamma, angular frequency in Gamma,
//!    length in 1/k0, momentum in hbar*k0, energy and temperature in
//!    hbar*Gamma. SI appears only at the I/O boundary.

use crate::constants::{C, HBAR, KB};
use crate::error::{Error, Result};
use crate::real::Real;

/// Physical dimension of a config quantity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    Time,
    Length,
    Mass,
    AngularFrequency,
    Temperature,
    SpringConstant,
    Wavenumber,
    Dimensionless,
}

/// Context needed to resolve relative units (`Gamma`, `lambda`).
#[derive(Debug, Clone, Copy, Default)]
pub struct UnitContext {
    /// Half linewidth Gamma, rad/s.
    pub gamma: Option<f64>,
    /// Transition wavelength, m.
    pub wavelength: Option<f64>,
}

fn need(ctx: Option<f64>, what: &str, field: &str) -> Result<f64> {
    ctx.ok_or_else(|| {
        Error::Config(format!(
            "unit of `{field}` is relative to {what}, which is not known yet in this context"
        ))
    })
}

/// Parses `"<number> <unit>"` into SI units for the given dimension.
///
/// `field` is used for error reporting only.
pub fn parse_si(field: &str, text: &str, dim: Dimension, ctx: UnitContext) -> Result<f64> {
    let s = text.trim();
    let (num, unit) = match s.split_once(char::is_whitespace) {
        Some((n, u)) => (n.trim(), u.trim()),
        None => (s, ""),
    };
    let value: f64 = num.parse().map_err(|_| {
        Error::Config(format!("`{field}`: cannot parse number in quantity \"{text}\""))
    })?;
    if unit.is_empty() {
        if dim == Dimension::Dimensionless {
            return Ok(value);
        }
        return Err(Error::Config(format!(
            "`{field}`: \"{text}\" has no unit suffix; dimensioned quantities require one (e.g. \"10 ns\")"
        )));
    }
    if dim == Dimension::Dimensionless {
        return Err(Error::Config(format!(
            "`{field}`: dimensionless quantity must not carry a unit (got \"{unit}\")"
        )));
    }

    let tau = std::f64::consts::TAU;
    let factor = match (dim, unit) {
        (Dimension::Time, "s") => 1.0,
        (Dimension::Time, "ms") => 1e-3,
        (Dimension::Time, "us") => 1e-6,
        (Dimension::Time, "ns") => 1e-9,
        (Dimension::Time, "ps") => 1e-12,
        (Dimension::Time, "fs") => 1e-15,
        (Dimension::Time, "1/Gamma" | "Gamma^-1") => 1.0 / need(ctx.gamma, "Gamma", field)?,

        (Dimension::Length, "m") => 1.0,
        (Dimension::Length, "cm") => 1e-2,
        (Dimension::Length, "mm") => 1e-3,
        (Dimension::Length, "um") => 1e-6,
        (Dimension::Length, "nm") => 1e-9,
        (Dimension::Length, "pm") => 1e-12,
        (Dimension::Length, "lambda") => need(ctx.wavelength, "the wavelength", field)?,

        (Dimension::Mass, "kg") => 1.0,
        (Dimension::Mass, "u" | "amu") => crate::constants::AMU,

        (Dimension::AngularFrequency, "rad/s") => 1.0,
        (Dimension::AngularFrequency, "Gamma") => need(ctx.gamma, "Gamma", field)?,
        (Dimension::AngularFrequency, "2pi*Gamma") => tau * need(ctx.gamma, "Gamma", field)?,
        (Dimension::AngularFrequency, "2pi*Hz") => tau,
        (Dimension::AngularFrequency, "2pi*kHz") => tau * 1e3,
        (Dimension::AngularFrequency, "2pi*MHz") => tau * 1e6,
        (Dimension::AngularFrequency, "2pi*GHz") => tau * 1e9,
        (Dimension::AngularFrequency, "Hz" | "kHz" | "MHz" | "GHz") => {
            return Err(Error::Config(format!(
                "`{field}`: plain {unit} is ambiguous for an angular frequency; \
                 write \"... 2pi*{unit}\" or \"... rad/s\""
            )));
        }

        (Dimension::Temperature, "K") => 1.0,
        (Dimension::Temperature, "mK") => 1e-3,
        (Dimension::Temperature, "uK") => 1e-6,
        (Dimension::Temperature, "nK") => 1e-9,

        (Dimension::SpringConstant, "N/m") => 1.0,

        (Dimension::Wavenumber, "rad/m") => 1.0,

        _ => {
            return Err(Error::Config(format!(
                "`{field}`: unit \"{unit}\" is not valid for {dim:?}"
            )));
        }
    };
    Ok(value * factor)
}

/// Conversion factors between SI and the Gamma-normalized internal system.
///
/// Internally: time in 1/Gamma, length in 1/k0, momentum in hbar*k0, mass in
/// hbar*k0^2/Gamma, energy and k_B*temperature in hbar*Gamma.
#[derive(Debug, Clone, Copy)]
pub struct Scales<R: Real> {
    /// Half linewidth Gamma, rad/s.
    pub gamma: R,
    /// Pump wavenumber k0, rad/m.
    pub k0: R,
}

impl<R: Real> Scales<R> {
    pub fn new(gamma: R, k0: R) -> Self {
        Self { gamma, k0 }
    }

    #[inline]
    fn hbar(&self) -> R {
        R::lit(HBAR)
    }

    #[inline]
    pub fn time_to_norm(&self, t_si: R) -> R {
        t_si * self.gamma
    }
    #[inline]
    pub fn time_to_si(&self, t: R) -> R {
        t / self.gamma
    }

    #[inline]
    pub fn freq_to_norm(&self, w_si: R) -> R {
        w_si / self.gamma
    }
    #[inline]
    pub fn freq_to_si(&self, w: R) -> R {
        w * self.gamma
    }

    /// Rates (friction coefficients, scattering rates) scale like frequencies.
    #[inline]
    pub fn rate_to_si(&self, r: R) -> R {
        r * self.gamma
    }

    #[inline]
    pub fn length_to_norm(&self, x_si: R) -> R {
        x_si * self.k0
    }
    #[inline]
    pub fn length_to_si(&self, x: R) -> R {
        x / self.k0
    }

    #[inline]
    pub fn momentum_to_norm(&self, p_si: R) -> R {
        p_si / (self.hbar() * self.k0)
    }
    #[inline]
    pub fn momentum_to_si(&self, p: R) -> R {
        p * self.hbar() * self.k0
    }

    #[inline]
    pub fn mass_to_norm(&self, m_si: R) -> R {
        m_si * self.gamma / (self.hbar() * self.k0 * self.k0)
    }

    #[inline]
    pub fn energy_to_norm(&self, e_si: R) -> R {
        e_si / (self.hbar() * self.gamma)
    }
    #[inline]
    pub fn energy_to_si(&self, e: R) -> R {
        e * self.hbar() * self.gamma
    }

    /// Temperature in internal units is k_B T / (hbar Gamma).
    #[inline]
    pub fn temperature_to_norm(&self, t_kelvin: R) -> R {
        t_kelvin * R::lit(KB) / (self.hbar() * self.gamma)
    }
    #[inline]
    pub fn temperature_to_si(&self, t: R) -> R {
        t * self.hbar() * self.gamma / R::lit(KB)
    }

    /// Trap spring constant, internal unit hbar k0^2 Gamma.
    #[inline]
    pub fn spring_to_norm(&self, k_si: R) -> R {
        k_si / (self.hbar() * self.k0 * self.k0 * self.gamma)
    }

    /// Momentum diffusion, internal unit (hbar k0)^2 Gamma.
    #[inline]
    pub fn diffusion_to_norm(&self, d_si: R) -> R {
        let hk = self.hbar() * self.k0;
        d_si / (hk * hk * self.gamma)
    }
    #[inline]
    pub fn diffusion_to_si(&self, d: R) -> R {
        let hk = self.hbar() * self.k0;
        d * hk * hk * self.gamma
    }

    /// One-way mirror distance corresponding to a delay, in 1/k0 units.
    #[inline]
    pub fn delay_to_norm_length(&self, tau_si: R) -> R {
        tau_si * R::lit(C) * self.k0
    }
}
