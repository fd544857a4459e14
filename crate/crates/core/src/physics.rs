//! Closed-form perturbative results for mirror-mediated cooling.
//!
//! Everything in this module is a pure function of the physical parameters:
//! the atom-field coupling strength, the first-order field response to a
//! slowly moving atom, the velocity-linear friction force and its oscillation
//! average in a harmonic microtrap, the momentum diffusion constant, and the
//! stationary temperature where friction and diffusion balance.
//!
//! Sign conventions: the detuning is laser minus atom (red detuning is
//! negative) and a positive friction coefficient `rho` means cooling, with
//! the force written `F = -rho * m * v`. Friction is maximal where
//! `sin(4 k0 x) = -1`.

use crate::constants::HBAR;
use crate::error::{Error, Result};
use crate::real::Real;
use num_complex::Complex;

/// Atomic and optical parameters of a run, in SI units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams<R: Real> {
    /// Atom mass, kg.
    pub mass: R,
    /// Transition wavelength, m.
    pub wavelength: R,
    /// Half linewidth Gamma, rad/s. The excited-state decay rate is 2*Gamma.
    pub half_linewidth: R,
    /// Laser-atom detuning, rad/s; negative is red-detuned.
    pub detuning: R,
    /// Beam waist w, m.
    pub beam_waist: R,
    /// One-way light travel time atom -> mirror, s.
    pub delay: R,
    /// Saturation parameter at a standing-wave antinode, dimensionless.
    pub saturation: R,
    /// Pump wavenumber k0 = omega0/c, rad/m.
    pub pump_wavenumber: R,
}

impl<R: Real> PhysicalParams<R> {
    /// Validates the construction invariants.
    ///
    /// Fails on non-positive mass, wavelength, linewidth or waist, negative
    /// delay or saturation. Returns the validated parameters so construction
    /// can be chained.
    pub fn validated(self) -> Result<Self> {
        let zero = R::zero();
        if self.mass <= zero {
            return Err(Error::InvalidParameter("mass must be > 0".into()));
        }
        if self.wavelength <= zero {
            return Err(Error::InvalidParameter("wavelength must be > 0".into()));
        }
        if self.half_linewidth <= zero {
            return Err(Error::InvalidParameter("half_linewidth must be > 0".into()));
        }
        if self.beam_waist <= zero {
            return Err(Error::InvalidParameter("beam_waist must be > 0".into()));
        }
        if self.delay < zero {
            return Err(Error::InvalidParameter("delay must be >= 0".into()));
        }
        if self.saturation < zero {
            return Err(Error::InvalidParameter("saturation must be >= 0".into()));
        }
        if self.pump_wavenumber <= zero {
            return Err(Error::InvalidParameter("pump_wavenumber must be > 0".into()));
        }
        Ok(self)
    }

    /// Diagnostic warnings for parameter regimes where the adiabatic model is
    /// questionable; these are not hard errors.
    pub fn diagnostics(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.detuning.abs() < R::lit(5.0) * self.half_linewidth {
            out.push(format!(
                "|detuning| = {:.3} Gamma is below 5 Gamma; the adiabatic (far-detuned) model \
                 is marginal here",
                (self.detuning / self.half_linewidth).abs()
            ));
        }
        out
    }

    /// Atomic radiative cross section sigma_a = 3 lambda^2 / (2 pi), m^2.
    #[inline]
    pub fn cross_section(&self) -> R {
        R::lit(3.0) * self.wavelength * self.wavelength / (R::lit(2.0) * R::PI())
    }

    /// Geometric factor sigma_a / (pi w^2).
    #[inline]
    pub fn geometric_factor(&self) -> R {
        self.cross_section() / (R::PI() * self.beam_waist * self.beam_waist)
    }

    /// Recoil frequency scale hbar k0^2 / m, rad/s.
    #[inline]
    pub fn recoil_rate(&self) -> R {
        R::lit(HBAR) * self.pump_wavenumber * self.pump_wavenumber / self.mass
    }
}

/// Harmonic microtrap holding the atom in the standing wave.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrapSpec<R: Real> {
    /// Trap center position relative to the mirror at x = 0, m.
    pub center: R,
    /// Spring constant k_t, N/m. The force is restoring toward `center`.
    pub spring_constant: R,
    /// Maximum displacement from the center during one oscillation, m.
    pub amplitude: R,
}

impl<R: Real> TrapSpec<R> {
    pub fn validated(self) -> Result<Self> {
        if self.spring_constant <= R::zero() {
            return Err(Error::InvalidParameter("spring_constant must be > 0".into()));
        }
        if self.amplitude < R::zero() {
            return Err(Error::InvalidParameter("trap amplitude must be >= 0".into()));
        }
        Ok(self)
    }

    /// Angular trap frequency sqrt(k_t / m), rad/s.
    #[inline]
    pub fn angular_frequency(&self, mass: R) -> R {
        (self.spring_constant / mass).sqrt()
    }
}

/// Squared atom-field coupling constant g^2 defined by
/// `2 pi g^2 = Gamma * 4 sigma_a / (pi w^2)`, in rad/s.
///
/// Monotonically decreasing in the beam waist.
pub fn coupling_constant<R: Real>(params: &PhysicalParams<R>) -> Result<R> {
    if params.beam_waist <= R::zero() {
        return Err(Error::InvalidParameter("beam_waist must be > 0".into()));
    }
    Ok(params.half_linewidth * R::lit(4.0) * params.geometric_factor() / (R::lit(2.0) * R::PI()))
}

/// `phi(z) = (exp(-i z) - 1) / z`, the single-pole kernel of the first-order
/// field response, with a series branch near the removable singularity.
fn phi_kernel<R: Real>(z: R) -> Complex<R> {
    let i = Complex::new(R::zero(), R::one());
    if z.abs() < R::lit(1e-2) {
        // -i - z/2 + i z^2/6 + z^3/24 - i z^4/120
        let z2 = z * z;
        Complex::new(
            -z / R::lit(2.0) + z * z2 / R::lit(24.0),
            -R::one() + z2 / R::lit(6.0) - z2 * z2 / R::lit(120.0),
        )
    } else {
        ((-i * z).exp() - Complex::new(R::one(), R::zero())) / z
    }
}

/// `psi(z) = i [ (1 + i z) exp(-i z) - 1 ] / z^2`, the double-pole kernel of
/// the velocity response. The double pole cancels; near z = 0 a series is
/// used because the closed form loses two digits per decade of smallness.
fn psi_kernel<R: Real>(z: R) -> Complex<R> {
    let i = Complex::new(R::zero(), R::one());
    if z.abs() < R::lit(1e-2) {
        // i/2 + z/3 - i z^2/8 - z^3/30 + i z^4/144
        let z2 = z * z;
        Complex::new(
            z / R::lit(3.0) - z * z2 / R::lit(30.0),
            R::lit(0.5) - z2 / R::lit(8.0) + z2 * z2 / R::lit(144.0),
        )
    } else {
        let one = Complex::new(R::one(), R::zero());
        i * ((one + i * z) * (-i * z).exp() - one) / (z * z)
    }
}

/// First-order field corrections per unit pump amplitude.
///
/// For a pump at `omega0 = c k0` and an atom at position `x` probed at time
/// `t0` (measured from switch-on, `t0 >> 2 x / c`), returns `(a1/A, b1/A)`:
/// the first-order-in-coupling correction to the mode amplitude at frequency
/// `omega`, and its velocity derivative. Both are reported per unit pump
/// amplitude `A` because only `|A|^2 g^2 / Delta^2` (the saturation) is fixed
/// by the other parameters.
///
/// The velocity kernel carries the quadrature phase required by direct
/// integration of the mode equations; see the oracle tests.
pub fn first_order_amplitudes<R: Real>(
    params: &PhysicalParams<R>,
    x: R,
    t0: R,
    omega: R,
) -> (Complex<R>, Complex<R>) {
    let c = R::lit(crate::constants::C);
    let omega0 = params.pump_wavenumber * c;
    let dw = omega - omega0;
    let z = dw * t0;

    let sin_w = (omega * x / c).sin();
    let cos_w = (omega * x / c).cos();
    let sin_0 = (omega0 * x / c).sin();
    let cos_0 = (omega0 * x / c).cos();

    let a1 = phi_kernel(z).scale(t0 * sin_w * sin_0);

    let grad = (omega * cos_w * sin_0 + omega0 * sin_w * cos_0) / c;
    let b1 = psi_kernel(z).scale(t0 * t0 * grad);

    (a1, b1)
}

/// Velocity-linear force `F_v = hbar k0^2 v tau s Gamma (4 sigma_a / pi w^2) sin(4 k0 x)`, N.
///
/// Antisymmetric in `v` and equal to `-friction_coefficient * m * v`.
pub fn velocity_force<R: Real>(params: &PhysicalParams<R>, x: R, v: R) -> R {
    let k0 = params.pump_wavenumber;
    R::lit(HBAR)
        * k0
        * k0
        * v
        * params.delay
        * params.saturation
        * params.half_linewidth
        * R::lit(4.0)
        * params.geometric_factor()
        * (R::lit(4.0) * k0 * x).sin()
}

/// Spatially dependent friction coefficient, 1/s:
///
/// ```text
/// rho(x) = -4 s Gamma (sigma_a / pi w^2) (hbar k0^2 / m) tau sin(4 k0 x)
/// ```
///
/// Positive values cool (`F = -rho m v`); the maximum sits where
/// `sin(4 k0 x) = -1`.
pub fn friction_coefficient<R: Real>(params: &PhysicalParams<R>, x: R) -> R {
    -R::lit(4.0)
        * params.saturation
        * params.half_linewidth
        * params.geometric_factor()
        * params.recoil_rate()
        * params.delay
        * (R::lit(4.0) * params.pump_wavenumber * x).sin()
}

/// 1/e cooling time `1 / rho(x)`, s. Errors where the friction is not cooling.
pub fn cooling_time<R: Real>(params: &PhysicalParams<R>, x: R) -> Result<R> {
    let rho = friction_coefficient(params, x);
    if rho <= R::zero() {
        return Err(Error::NoCoolingAtPosition {
            rho_per_s: rho.to_f64_lossy(),
        });
    }
    Ok(rho.recip())
}

/// Number of nodes of the periodic trapezoid rule used for the oscillation
/// average; the integrand is smooth and 2*pi-periodic, so this converges
/// spectrally.
pub const FRICTION_AVERAGE_NODES: usize = 256;

/// Friction coefficient averaged over one trap oscillation of amplitude
/// `delta` around `center`, 1/s:
///
/// ```text
/// <rho> = -4 s Gamma (sigma_a/pi w^2) (hbar k0^2/m) tau
///         * (1/2pi) Int_0^2pi sin(4 k0 x_c + 4 k0 delta sin T) cos^2 T dT
/// ```
///
/// The phase excursion is `4 k0 delta`, which reproduces the sign change of
/// the average near `delta ~ 0.15 lambda` for a trap centered at maximum
/// friction. Evaluated by a fixed 256-node periodic trapezoid rule.
pub fn averaged_friction<R: Real>(params: &PhysicalParams<R>, trap: &TrapSpec<R>) -> Result<R> {
    if trap.amplitude < R::zero() {
        return Err(Error::InvalidParameter("trap amplitude must be >= 0".into()));
    }
    let k0 = params.pump_wavenumber;
    let phase = R::lit(4.0) * k0 * trap.center;
    let excursion = R::lit(4.0) * k0 * trap.amplitude;

    let n = FRICTION_AVERAGE_NODES;
    let step = R::lit(2.0) * R::PI() / R::lit(n as f64);
    let mut acc = R::zero();
    for idx in 0..n {
        let t = step * R::lit(idx as f64);
        let c = t.cos();
        acc += (phase + excursion * t.sin()).sin() * c * c;
    }
    let average = acc / R::lit(n as f64);

    let prefactor = -R::lit(4.0)
        * params.saturation
        * params.half_linewidth
        * params.geometric_factor()
        * params.recoil_rate()
        * params.delay;
    Ok(prefactor * average)
}

/// Momentum diffusion constant `D = hbar^2 k0^2 Gamma s`, (kg m/s)^2 / s.
pub fn diffusion_constant<R: Real>(params: &PhysicalParams<R>) -> R {
    let hbar = R::lit(HBAR);
    let k0 = params.pump_wavenumber;
    hbar * hbar * k0 * k0 * params.half_linewidth * params.saturation
}

/// Stationary temperature from the friction-diffusion balance, K:
///
/// ```text
/// k_B T = (hbar / tau) (pi w^2 / 4 sigma_a) (-1 / sin(4 k0 x))
/// ```
///
/// Independent of saturation and detuning. Errors outside the cooling region
/// (`sin(4 k0 x) >= 0`) and for zero delay.
pub fn stationary_temperature<R: Real>(params: &PhysicalParams<R>, x: R) -> Result<R> {
    let s4 = (R::lit(4.0) * params.pump_wavenumber * x).sin();
    if s4 >= R::zero() {
        return Err(Error::NoStationaryTemperature);
    }
    if params.delay <= R::zero() {
        return Err(Error::InvalidParameter(
            "stationary temperature needs a positive delay".into(),
        ));
    }
    let kb_t = R::lit(HBAR) / params.delay / (R::lit(4.0) * params.geometric_factor()) / (-s4);
    Ok(kb_t / R::lit(crate::constants::KB))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::{RB87_MASS, RB_HALF_LINEWIDTH, RB_WAVELENGTH};
    use proptest::prelude::*;

    pub fn rb_params(saturation: f64, delay: f64, waist: f64) -> PhysicalParams<f64> {
        PhysicalParams {
            mass: RB87_MASS,
            wavelength: RB_WAVELENGTH,
            half_linewidth: RB_HALF_LINEWIDTH,
            detuning: -10.0 * RB_HALF_LINEWIDTH,
            beam_waist: waist,
            delay,
            saturation,
            pump_wavenumber: std::f64::consts::TAU / RB_WAVELENGTH,
        }
        .validated()
        .unwrap()
    }

    /// Position with sin(4 k0 x) = target, on the branch k0 x in (0, pi/2).
    pub fn position_with_sine(params: &PhysicalParams<f64>, target: f64) -> f64 {
        (std::f64::consts::PI - target.asin()) / (4.0 * params.pump_wavenumber)
    }

    /// Bessel J1 by power series; test-only oracle, good to ~1e-12 for |x| < 14.
    pub fn bessel_j1(x: f64) -> f64 {
        let half = x / 2.0;
        let mut term = half;
        let mut sum = term;
        for m in 1..60 {
            term *= -half * half / (m as f64 * (m as f64 + 1.0));
            sum += term;
            if term.abs() < 1e-18 * sum.abs().max(1e-300) {
                break;
            }
        }
        sum
    }

    #[test]
    fn coupling_constant_geometric_limit() {
        // pi w^2 = 4 sigma_a makes 2 pi g^2 = Gamma.
        let mut p = rb_params(0.1, 1e-8, 1e-6);
        let w = (4.0 * p.cross_section() / std::f64::consts::PI).sqrt();
        p.beam_waist = w;
        let g2 = coupling_constant(&p).unwrap();
        let rel = (2.0 * std::f64::consts::PI * g2 / p.half_linewidth - 1.0).abs();
        assert!(rel < 1e-12, "rel = {rel}");
    }

    #[test]
    fn coupling_constant_waist_scaling_and_pinned_value() {
        let p = rb_params(0.1, 1e-8, 0.7e-6);
        let g2 = coupling_constant(&p).unwrap();
        let mut ph = p;
        ph.beam_waist = 0.35e-6;
        assert!((coupling_constant(&ph).unwrap() / g2 - 4.0).abs() < 1e-12);
        // Rb, w = 0.7 um: hand evaluation of Gamma * 2 sigma_a / (pi^2 w^2).
        assert!(
            (g2 - 2.2871111e6).abs() / 2.2871111e6 < 1e-6,
            "g2 = {g2}"
        );
    }

    #[test]
    fn coupling_constant_rejects_bad_waist() {
        let mut p = rb_params(0.1, 1e-8, 1e-6);
        p.beam_waist = -1.0;
        assert!(coupling_constant(&p).is_err());
    }

    #[test]
    fn first_order_amplitudes_vanish_at_mirror() {
        let p = rb_params(0.1, 1e-8, 1e-6);
        let omega0 = p.pump_wavenumber * crate::constants::C;
        let (a1, b1) = first_order_amplitudes(&p, 0.0, 1e-6, omega0 * (1.0 + 1e-9));
        assert_eq!(a1.norm(), 0.0);
        assert_eq!(b1.norm(), 0.0);
    }

    #[test]
    fn first_order_amplitude_pump_limit() {
        // omega -> omega0: a1 -> -i t0 sin^2(omega0 x / c).
        let p = rb_params(0.1, 1e-8, 1e-6);
        let c = crate::constants::C;
        let omega0 = p.pump_wavenumber * c;
        let x = 0.731;
        let t0 = 3.2e-7;
        let (a1, _) = first_order_amplitudes(&p, x, t0, omega0);
        let expect = -t0 * (omega0 * x / c).sin().powi(2);
        assert!((a1.im - expect).abs() < 1e-12 * expect.abs());
        assert!(a1.re.abs() < 1e-12 * expect.abs());
    }

    #[test]
    fn kernel_branches_match_at_the_switch() {
        for &z in &[0.9e-2, 1.1e-2, -0.9e-2, -1.1e-2] {
            let i = num_complex::Complex::new(0.0, 1.0);
            let one = num_complex::Complex::new(1.0, 0.0);
            let phi_closed = ((-i * z).exp() - one) / z;
            let psi_closed = i * ((one + i * z) * (-i * z).exp() - one) / (z * z);
            assert!((phi_kernel(z) - phi_closed).norm() < 1e-12);
            assert!((psi_kernel(z) - psi_closed).norm() < 1e-10);
        }
    }

    #[test]
    fn velocity_force_is_linear_and_nodal() {
        let p = rb_params(0.1, 1e-8, 1e-6);
        let x = position_with_sine(&p, -1.0);
        assert_eq!(velocity_force(&p, x, 0.0), 0.0);
        let node = std::f64::consts::PI / (4.0 * p.pump_wavenumber);
        let f = velocity_force(&p, node, 3.0);
        assert!(f.abs() < 1e-30, "f = {f}");
        let f1 = velocity_force(&p, x, 1.0);
        let f2 = velocity_force(&p, x, -1.0);
        assert_eq!(f1, -f2);
    }

    #[test]
    fn velocity_force_matches_friction_coefficient() {
        let p = rb_params(0.37, 2.4e-8, 1.3e-6);
        for i in 0..40 {
            let x = 0.1 + 0.013 * i as f64 * RB_WAVELENGTH;
            for &v in &[-2.0, -0.3, 0.6, 5.0] {
                let lhs = velocity_force(&p, x, v);
                let rhs = -friction_coefficient(&p, x) * p.mass * v;
                assert!(
                    (lhs - rhs).abs() <= 1e-12 * lhs.abs().max(rhs.abs()).max(1e-300),
                    "x={x} v={v}: {lhs} vs {rhs}"
                );
            }
        }
    }

    #[test]
    fn friction_pinned_cooling_time_is_milliseconds() {
        // Rb, s = 0.1, tau = 10 ns, w = 1 um at maximum friction.
        let p = rb_params(0.1, 1e-8, 1e-6);
        let x = position_with_sine(&p, -1.0);
        let t = cooling_time(&p, x).unwrap();
        assert!((t - 2.99508e-3).abs() / 2.99508e-3 < 1e-4, "t = {t}");
    }

    #[test]
    fn friction_is_odd_between_extremes() {
        let p = rb_params(0.1, 1e-8, 1e-6);
        let xp = position_with_sine(&p, 1.0);
        let xm = position_with_sine(&p, -1.0);
        let rp = friction_coefficient(&p, xp);
        let rm = friction_coefficient(&p, xm);
        assert!((rp + rm).abs() < 1e-9 * rm.abs());
        assert!(rm > 0.0);
    }

    #[test]
    fn cooling_time_scalings() {
        let p = rb_params(0.1, 1e-8, 1e-6);
        let x = position_with_sine(&p, -1.0);
        let t = cooling_time(&p, x).unwrap();
        let mut p2 = p;
        p2.delay = 2e-8;
        assert!((cooling_time(&p2, x).unwrap() / t - 0.5).abs() < 1e-12);
        let mut p3 = p;
        p3.beam_waist = 2e-6;
        assert!((cooling_time(&p3, x).unwrap() / t - 4.0).abs() < 1e-12);
    }

    #[test]
    fn cooling_time_errors_in_heating_region() {
        let p = rb_params(0.1, 1e-8, 1e-6);
        let x = position_with_sine(&p, 1.0);
        assert!(matches!(
            cooling_time(&p, x),
            Err(Error::NoCoolingAtPosition { .. })
        ));
    }

    #[test]
    fn averaged_friction_zero_amplitude_is_half_local() {
        let p = rb_params(0.1, 1e-8, 1e-6);
        for i in 0..10 {
            let target = -0.95 + 0.21 * i as f64;
            let x = position_with_sine(&p, target.clamp(-1.0, 1.0));
            let trap = TrapSpec {
                center: x,
                spring_constant: 1e-10,
                amplitude: 0.0,
            };
            let avg = averaged_friction(&p, &trap).unwrap();
            let half = friction_coefficient(&p, x) / 2.0;
            assert!((avg - half).abs() <= 1e-12 * half.abs().max(1e-12));
        }
    }

    #[test]
    fn averaged_friction_matches_bessel_closed_form() {
        // For any center: <rho> = rho(x_c) * J1(u)/u with u = 4 k0 delta.
        let p = rb_params(0.1, 1e-8, 0.5e-6);
        let x = position_with_sine(&p, -1.0);
        for i in 1..=40 {
            let delta = 0.0125 * i as f64 * RB_WAVELENGTH; // up to 0.5 lambda
            let trap = TrapSpec {
                center: x,
                spring_constant: 1e-10,
                amplitude: delta,
            };
            let avg = averaged_friction(&p, &trap).unwrap();
            let u = 4.0 * p.pump_wavenumber * delta;
            let closed = friction_coefficient(&p, x) * bessel_j1(u) / u;
            let scale = friction_coefficient(&p, x).abs();
            assert!(
                (avg - closed).abs() < 1e-10 * scale,
                "delta/lambda = {}: {avg} vs {closed}",
                delta / RB_WAVELENGTH
            );
        }
    }

    #[test]
    fn averaged_friction_quadrature_vs_bessel_tight_at_small_amplitude() {
        let p = rb_params(0.1, 1e-8, 1e-6);
        let x = position_with_sine(&p, -1.0);
        let delta = 0.05 * RB_WAVELENGTH;
        let trap = TrapSpec {
            center: x,
            spring_constant: 1e-10,
            amplitude: delta,
        };
        let avg = averaged_friction(&p, &trap).unwrap();
        let u = 4.0 * p.pump_wavenumber * delta;
        let closed = friction_coefficient(&p, x) * bessel_j1(u) / u;
        assert!((avg / closed - 1.0).abs() < 1e-8);
    }

    #[test]
    fn averaged_friction_rejects_negative_amplitude() {
        let p = rb_params(0.1, 1e-8, 1e-6);
        let trap = TrapSpec {
            center: 0.1,
            spring_constant: 1e-10,
            amplitude: -1e-9,
        };
        assert!(averaged_friction(&p, &trap).is_err());
    }

    #[test]
    fn diffusion_constant_values() {
        let p0 = rb_params(0.0, 1e-8, 1e-6);
        assert_eq!(diffusion_constant(&p0), 0.0);
        let p1 = rb_params(0.076, 1e-8, 1e-6);
        let d = diffusion_constant(&p1);
        assert!((d - 1.04414e-48).abs() / 1.04414e-48 < 1e-4, "D = {d}");
        let p2 = rb_params(0.152, 1e-8, 1e-6);
        assert!((diffusion_constant(&p2) / d - 2.0).abs() < 1e-12);
    }

    #[test]
    fn stationary_temperature_is_independent_of_saturation_and_scales_with_delay() {
        let p = rb_params(0.1, 1e-8, 1e-6);
        let x = position_with_sine(&p, -0.8);
        let t = stationary_temperature(&p, x).unwrap();
        let mut ps = p;
        ps.saturation = 0.9;
        assert_eq!(stationary_temperature(&ps, x).unwrap(), t);
        let mut pd = p;
        pd.delay = 2e-8;
        assert!((stationary_temperature(&pd, x).unwrap() / t - 0.5).abs() < 1e-12);
    }

    #[test]
    fn stationary_temperature_errors_outside_cooling_region() {
        let p = rb_params(0.1, 1e-8, 1e-6);
        let x = position_with_sine(&p, 0.5);
        assert!(matches!(
            stationary_temperature(&p, x),
            Err(Error::NoStationaryTemperature)
        ));
    }

    #[test]
    fn adiabatic_warning_below_five_gamma() {
        let mut p = rb_params(0.1, 1e-8, 1e-6);
        assert!(p.diagnostics().is_empty());
        p.detuning = -3.0 * p.half_linewidth;
        assert_eq!(p.diagnostics().len(), 1);
    }

    #[test]
    fn works_in_single_precision() {
        let p = PhysicalParams::<f32> {
            mass: RB87_MASS as f32,
            wavelength: RB_WAVELENGTH as f32,
            half_linewidth: RB_HALF_LINEWIDTH as f32,
            detuning: -10.0 * RB_HALF_LINEWIDTH as f32,
            beam_waist: 1e-6,
            delay: 1e-8,
            saturation: 0.1,
            pump_wavenumber: std::f32::consts::TAU / RB_WAVELENGTH as f32,
        }
        .validated()
        .unwrap();
        let x = (std::f32::consts::PI - (-1.0f32).asin()) / (4.0 * p.pump_wavenumber);
        let rho = friction_coefficient(&p, x);
        assert!((rho / 333.88 - 1.0).abs() < 1e-3, "rho = {rho}");
    }

    proptest! {
        #[test]
        fn friction_is_periodic_and_odd(x in 1e-3f64..1.0, k in 1u32..6) {
            let p = rb_params(0.1, 1e-8, 1e-6);
            let period = std::f64::consts::PI / (2.0 * p.pump_wavenumber);
            let r0 = friction_coefficient(&p, x);
            let rk = friction_coefficient(&p, x + k as f64 * period);
            prop_assert!((r0 - rk).abs() < 1e-6 * r0.abs().max(1e-3));
            // odd about the zeros x = n * period / ... : reflection through a node
            let node = (4.0 * p.pump_wavenumber * x / std::f64::consts::PI).round()
                * std::f64::consts::PI / (4.0 * p.pump_wavenumber);
            let mirrored = friction_coefficient(&p, 2.0 * node - x);
            prop_assert!((r0 + mirrored).abs() < 1e-6 * r0.abs().max(1e-3));
        }

        #[test]
        fn stationary_temperature_sine_identity(u in 0.05f64..0.95, v in 0.05f64..0.95) {
            // T(x) * |sin(4 k0 x)| is the same at any two cooling positions.
            let p = rb_params(0.1, 1e-8, 1e-6);
            let xa = position_with_sine(&p, -u);
            let xb = position_with_sine(&p, -v);
            let ta = stationary_temperature(&p, xa).unwrap() * u;
            let tb = stationary_temperature(&p, xb).unwrap() * v;
            prop_assert!((ta / tb - 1.0).abs() < 1e-9);
        }
    }
}
