//! Discrete-mode model of the electromagnetic field in front of the mirror.
//!
//! The field is a comb of equally spaced standing-wave modes
//! `f_k(x) = sin(omega_k x / c)` with a node at the mirror (x = 0), centered
//! on the pump frequency. Amplitudes are coherent-state values `alpha_k` in a
//! frame rotating at the pump, so the pump mode is stationary and the frame
//! detunings are `Delta_k = omega0 - omega_k`.
//!
//! Positions are handled as offsets from the trap center: the atom sits at
//! `x = L + xi` with `L = c tau` a macroscopic mirror distance. Evaluating
//! `omega_k x / c` directly would burn the inter-mode phase differences that
//! encode the delay into float roundoff, so the baseline phase
//! `omega0 L / c mod 2pi` is reduced once per run in extended precision and
//! only small offsets are accumulated per step.

use crate::error::{Error, Result};
use crate::physics::{coupling_constant, PhysicalParams};
use crate::real::Real;
use crate::units::Scales;
use num_complex::Complex;
use serde::{Deserialize, Serialize};

const TWO_PI_HI: f64 = 6.283185307179586;
const TWO_PI_LO: f64 = 2.449293598294709e-16;

/// `(a * b) mod 2pi` without losing the product's low-order bits.
///
/// The product is split with an FMA two-product; the reduction subtracts the
/// integer multiple of a double-double 2*pi. Accurate to a few ulp of the
/// reduced phase even for products of order 1e8 rad.
pub fn reduce_phase(a: f64, b: f64) -> f64 {
    let hi = a * b;
    let lo = a.mul_add(b, -hi);
    let n = (hi / TWO_PI_HI).round();
    // hi - n*2pi_hi is exact to one rounding via FMA.
    let r = (-n).mul_add(TWO_PI_HI, hi) + (lo - n * TWO_PI_LO);
    r.rem_euclid(TWO_PI_HI)
}

/// Where the trap center sits inside the standing-wave pattern, expressed as
/// the pump phase `k0 x` at the trap center.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum TrapPlacement {
    /// Maximum friction, on the branch closer to a field node
    /// (`k0 x = 7 pi/8 mod pi`). This is the default for cooling runs.
    MaxFrictionNodeSide,
    /// Maximum friction, on the branch closer to a field antinode
    /// (`k0 x = 3 pi/8 mod pi`). Same friction, larger local diffusion from
    /// the intensity noise channel.
    MaxFrictionAntinodeSide,
    /// A field node (`k0 x = pi mod pi`): zero friction, gradient noise only.
    Node,
    /// A field antinode (`k0 x = pi/2 mod pi`).
    Antinode,
    /// Explicit pump phase in radians.
    Phase(f64),
}

impl TrapPlacement {
    pub fn pump_phase(self) -> f64 {
        use std::f64::consts::PI;
        match self {
            TrapPlacement::MaxFrictionNodeSide => 7.0 * PI / 8.0,
            TrapPlacement::MaxFrictionAntinodeSide => 3.0 * PI / 8.0,
            TrapPlacement::Node => PI,
            TrapPlacement::Antinode => PI / 2.0,
            TrapPlacement::Phase(phi) => phi.rem_euclid(TWO_PI_HI),
        }
    }
}

/// The frequency comb and its geometry. Immutable after construction.
#[derive(Debug, Clone)]
pub struct ModeGrid<R: Real> {
    count: usize,
    /// Mode spacing in units of Gamma.
    spacing: R,
    /// Pump phase at the trap center: `k0 L mod 2pi`.
    phi0: R,
    /// One-way delay in units of 1/Gamma, from the actual mirror distance.
    delay: R,
    /// Gamma / omega0: converts sideband index scales to wavenumber ratios.
    eta: R,
    /// Per-mode wavenumber ratio omega_k / omega0.
    wavenumber_ratio: Vec<R>,
    /// Actual mirror distance L, m.
    mirror_distance: f64,
    /// Pump angular frequency, rad/s.
    pump_frequency: f64,
    scales: Scales<R>,
}

impl<R: Real> ModeGrid<R> {
    /// Builds the comb for the given parameters.
    ///
    /// The mirror distance starts at `c * delay` and is then adjusted by less
    /// than one wavelength so that the trap center (at `x = L`) sits exactly
    /// at the requested pump phase; the delay changes by under a femtosecond.
    pub fn new(
        params: &PhysicalParams<R>,
        count: usize,
        spacing_si: R,
        placement: TrapPlacement,
    ) -> Result<Self> {
        if count < 2 || count % 2 != 0 {
            return Err(Error::Config(format!(
                "mode count must be even and >= 2, got {count}"
            )));
        }
        if spacing_si <= R::zero() {
            return Err(Error::Config("mode spacing must be > 0".into()));
        }
        let gamma = params.half_linewidth.to_f64_lossy();
        let k0 = params.pump_wavenumber.to_f64_lossy();
        let c = crate::constants::C;
        let scales = Scales::new(params.half_linewidth, params.pump_wavenumber);

        let base_distance = c * params.delay.to_f64_lossy();
        let target = placement.pump_phase();
        let raw = reduce_phase(k0, base_distance);
        let distance = base_distance + (target - raw).rem_euclid(TWO_PI_HI) / k0;
        let delay_norm = gamma * distance / c;

        let spacing = spacing_si / params.half_linewidth;
        let eta = gamma / (k0 * c);
        let half = (count / 2) as i64;
        let wavenumber_ratio = (0..count)
            .map(|k| R::one() + R::lit((k as i64 - half) as f64) * spacing * R::lit(eta))
            .collect();

        Ok(Self {
            count,
            spacing,
            phi0: R::lit(target),
            delay: R::lit(delay_norm),
            eta: R::lit(eta),
            wavenumber_ratio,
            mirror_distance: distance,
            pump_frequency: k0 * c,
            scales,
        })
    }

    #[inline]
    pub fn count(&self) -> usize {
        self.count
    }

    #[inline]
    pub fn pump_index(&self) -> usize {
        self.count / 2
    }

    /// Mode spacing in units of Gamma.
    #[inline]
    pub fn spacing(&self) -> R {
        self.spacing
    }

    #[inline]
    pub fn scales(&self) -> Scales<R> {
        self.scales
    }

    /// Actual one-way mirror distance, m.
    #[inline]
    pub fn mirror_distance(&self) -> f64 {
        self.mirror_distance
    }

    /// Actual one-way delay in units of 1/Gamma.
    #[inline]
    pub fn delay(&self) -> R {
        self.delay
    }

    /// Pump phase `k0 x` at the trap center.
    #[inline]
    pub fn pump_phase(&self) -> R {
        self.phi0
    }

    pub fn pump_frequency(&self) -> f64 {
        self.pump_frequency
    }

    /// Rotating-frame detuning of mode `k` in units of Gamma:
    /// `Delta_k = omega_k - omega0`, so the pump mode is stationary.
    ///
    /// The sign pairs with the standing-wave phases `omega_k x / c` so that
    /// the delay-induced velocity force cools where `sin(4 k0 x) = -1`; the
    /// opposite convention puts the cooling regions at `sin(4 k0 x) = +1`.
    #[inline]
    pub fn frame_detuning(&self, k: usize) -> R {
        R::lit((k as i64 - self.pump_index() as i64) as f64) * self.spacing
    }

    /// Mode angular frequency, rad/s.
    pub fn mode_frequency(&self, k: usize) -> f64 {
        self.pump_frequency
            + (k as i64 - self.pump_index() as i64) as f64
                * (self.spacing * self.scales.gamma).to_f64_lossy()
    }

    /// The discrete field repeats after `2 pi / spacing` (in 1/Gamma);
    /// propagation is limited to 95% of that.
    pub fn max_propagation_time(&self) -> R {
        R::lit(0.95) * R::lit(2.0) * R::PI() / self.spacing
    }

    /// Mode phase `omega_k x / c` for an atom at offset `xi` (units 1/k0)
    /// from the trap center.
    #[inline]
    pub fn mode_phase(&self, k: usize, xi: R) -> R {
        let nu = R::lit((k as i64 - self.pump_index() as i64) as f64) * self.spacing;
        self.phi0 + xi + nu * (self.delay + self.eta * xi)
    }

    /// Fills `sin_buf`/`cos_buf` with `sin/cos(omega_k x / c)` for all modes.
    ///
    /// The phases are affine in the mode index, so a single rotation
    /// recurrence covers the comb with two `sin_cos` calls.
    pub fn mode_trig(&self, xi: R, sin_buf: &mut [R], cos_buf: &mut [R]) {
        debug_assert_eq!(sin_buf.len(), self.count);
        debug_assert_eq!(cos_buf.len(), self.count);
        let half = R::lit(self.pump_index() as f64);
        let step = self.spacing * (self.delay + self.eta * xi);
        let start = self.phi0 + xi - half * step;
        let (mut s, mut c) = start.sin_cos();
        let (sb, cb) = step.sin_cos();
        for k in 0..self.count {
            sin_buf[k] = s;
            cos_buf[k] = c;
            let ns = s * cb + c * sb;
            let nc = c * cb - s * sb;
            s = ns;
            c = nc;
        }
    }
}

/// Coherent mode amplitudes; one value type per trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldState<R: Real> {
    pub amplitudes: Vec<Complex<R>>,
}

impl<R: Real> FieldState<R> {
    pub fn zero(count: usize) -> Self {
        Self {
            amplitudes: vec![Complex::new(R::zero(), R::zero()); count],
        }
    }

    /// Total photon number `sum |alpha_k|^2`.
    pub fn photon_number(&self) -> R {
        self.amplitudes
            .iter()
            .fold(R::zero(), |acc, a| acc + a.norm_sqr())
    }

    pub fn is_finite(&self) -> bool {
        self.amplitudes
            .iter()
            .all(|a| a.re.is_finite() && a.im.is_finite())
    }
}

/// Scattering rate and light shift per photon, in units of Gamma.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AtomFieldCoupling<R: Real> {
    /// Scattering rate per photon, gamma / Gamma.
    pub scattering_rate: R,
    /// Light shift per photon, U0 / Gamma. Same sign as the detuning.
    pub light_shift: R,
}

impl<R: Real> AtomFieldCoupling<R> {
    /// Per-mode coupling from the continuum coupling constant:
    /// `U0 = g^2 d_omega / Delta`, `gamma = g^2 d_omega Gamma / Delta^2`.
    pub fn from_params(params: &PhysicalParams<R>, grid: &ModeGrid<R>) -> Result<Self> {
        if params.detuning == R::zero() {
            return Err(Error::InvalidParameter(
                "detuning must be nonzero for adiabatic coupling".into(),
            ));
        }
        let g2 = coupling_constant(params)? / params.half_linewidth;
        let detuning = params.detuning / params.half_linewidth;
        let per_mode = g2 * grid.spacing();
        Ok(Self {
            scattering_rate: per_mode / (detuning * detuning),
            light_shift: per_mode / detuning,
        })
    }

    /// Couplings with the dissipative channel switched off.
    pub fn without_scattering(self) -> Self {
        Self {
            scattering_rate: R::zero(),
            light_shift: self.light_shift,
        }
    }

    pub fn off() -> Self {
        Self {
            scattering_rate: R::zero(),
            light_shift: R::zero(),
        }
    }
}

/// Harmonic trap in normalized units (spring in hbar k0^2 Gamma, center as an
/// offset from the grid baseline in 1/k0).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HarmonicTrap<R: Real> {
    pub spring: R,
    pub center: R,
}

impl<R: Real> HarmonicTrap<R> {
    pub fn off() -> Self {
        Self {
            spring: R::zero(),
            center: R::zero(),
        }
    }
}

/// Total field amplitude `E(x) = sum_k alpha_k sin(omega_k x / c)` at offset
/// `xi` from the trap center.
pub fn total_field<R: Real>(grid: &ModeGrid<R>, field: &FieldState<R>, xi: R) -> Complex<R> {
    let mut s = vec![R::zero(); grid.count()];
    let mut c = vec![R::zero(); grid.count()];
    grid.mode_trig(xi, &mut s, &mut c);
    field
        .amplitudes
        .iter()
        .zip(&s)
        .fold(Complex::new(R::zero(), R::zero()), |acc, (a, sk)| {
            acc + a.scale(*sk)
        })
}

/// Field gradient `dE/d xi = sum_k alpha_k (omega_k/omega0) cos(omega_k x/c)`
/// in units of k0 (multiply by k0 for per-meter).
pub fn field_gradient<R: Real>(grid: &ModeGrid<R>, field: &FieldState<R>, xi: R) -> Complex<R> {
    let mut s = vec![R::zero(); grid.count()];
    let mut c = vec![R::zero(); grid.count()];
    grid.mode_trig(xi, &mut s, &mut c);
    let mut acc = Complex::new(R::zero(), R::zero());
    for (k, a) in field.amplitudes.iter().enumerate() {
        acc = acc + a.scale(grid.wavenumber_ratio[k] * c[k]);
    }
    acc
}

/// Field amplitude at an absolute mirror distance `x` (m); phases are reduced
/// per call, so this is exact at the mirror itself.
pub fn total_field_at_distance<R: Real>(
    grid: &ModeGrid<R>,
    field: &FieldState<R>,
    x_si: f64,
) -> Complex<R> {
    let mut acc = Complex::new(R::zero(), R::zero());
    for (k, a) in field.amplitudes.iter().enumerate() {
        let phase = reduce_phase(grid.mode_frequency(k) / crate::constants::C, x_si);
        acc = acc + a.scale(R::lit(phase.sin()));
    }
    acc
}

/// Time derivatives of the full system state under the deterministic part of
/// the dynamics.
#[derive(Debug, Clone)]
pub struct Drift<R: Real> {
    /// d xi / dt, (1/k0)/(1/Gamma).
    pub position: R,
    /// d p / dt, hbar k0 Gamma.
    pub momentum: R,
    /// d alpha_k / dt, 1/(1/Gamma).
    pub field: Vec<Complex<R>>,
}

/// Light force on the atom given the local field and gradient:
/// `i gamma (E E'* - E* E') - U0 (E E'* + E* E')`, in hbar k0 Gamma.
#[inline]
pub fn light_force<R: Real>(
    coupling: &AtomFieldCoupling<R>,
    e: Complex<R>,
    grad: Complex<R>,
) -> R {
    let cross = e.conj() * grad;
    let two = R::lit(2.0);
    two * coupling.scattering_rate * cross.im - two * coupling.light_shift * cross.re
}

/// Deterministic drift of Eqs. of motion for `(xi, p, {alpha_k})`:
/// `dxi/dt = p/m`, the light force plus restoring trap force on `p`, and
/// `d alpha_k/dt = i Delta_k alpha_k - (i U0 + gamma) E f_k`.
pub fn drift<R: Real>(
    grid: &ModeGrid<R>,
    coupling: &AtomFieldCoupling<R>,
    trap: &HarmonicTrap<R>,
    mass_norm: R,
    xi: R,
    momentum: R,
    field: &FieldState<R>,
) -> Drift<R> {
    let mut s = vec![R::zero(); grid.count()];
    let mut c = vec![R::zero(); grid.count()];
    grid.mode_trig(xi, &mut s, &mut c);

    let mut e = Complex::new(R::zero(), R::zero());
    let mut grad = Complex::new(R::zero(), R::zero());
    for (k, a) in field.amplitudes.iter().enumerate() {
        e = e + a.scale(s[k]);
        grad = grad + a.scale(grid.wavenumber_ratio[k] * c[k]);
    }

    let force = light_force(coupling, e, grad) - trap.spring * (xi - trap.center);

    let sink = Complex::new(coupling.scattering_rate, coupling.light_shift); // gamma + i U0
    let source = -(sink * e);
    let dfield = field
        .amplitudes
        .iter()
        .enumerate()
        .map(|(k, a)| {
            let rot = Complex::new(R::zero(), grid.frame_detuning(k));
            rot * a + source.scale(s[k])
        })
        .collect();

    Drift {
        position: momentum / mass_norm,
        momentum: force,
        field: dfield,
    }
}

/// Pump coherent state calibrated against the continuum saturation: all modes
/// empty except the pump, whose photon number satisfies
/// `gamma |alpha_pump|^2 = s Gamma`, so the zeroth-order antinode scattering
/// rate and the standing-wave potential depth `s Delta sin^2(k0 x)` match the
/// continuum model exactly.
pub fn pump_initial_state<R: Real>(
    grid: &ModeGrid<R>,
    coupling: &AtomFieldCoupling<R>,
    params: &PhysicalParams<R>,
) -> Result<FieldState<R>> {
    let mut state = FieldState::zero(grid.count());
    if params.saturation == R::zero() {
        return Ok(state);
    }
    if coupling.scattering_rate <= R::zero() {
        return Err(Error::Config(
            "pump calibration needs a positive scattering rate; got zero coupling with s > 0"
                .into(),
        ));
    }
    let amp = (params.saturation / coupling.scattering_rate).sqrt();
    state.amplitudes[grid.pump_index()] = Complex::new(amp, R::zero());
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::{RB87_MASS, RB_HALF_LINEWIDTH, RB_WAVELENGTH};
    use num_complex::Complex64;

    fn rb() -> PhysicalParams<f64> {
        PhysicalParams {
            mass: RB87_MASS,
            wavelength: RB_WAVELENGTH,
            half_linewidth: RB_HALF_LINEWIDTH,
            detuning: -10.0 * RB_HALF_LINEWIDTH,
            beam_waist: 0.7e-6,
            delay: 0.25 / RB_HALF_LINEWIDTH,
            saturation: 0.076,
            pump_wavenumber: std::f64::consts::TAU / RB_WAVELENGTH,
        }
        .validated()
        .unwrap()
    }

    fn grid() -> ModeGrid<f64> {
        ModeGrid::new(&rb(), 128, 0.1 * RB_HALF_LINEWIDTH, TrapPlacement::MaxFrictionNodeSide)
            .unwrap()
    }

    #[test]
    fn phase_reduction_matches_naive_for_small_products() {
        for i in 1..200 {
            let a = 0.037 * i as f64;
            let b = 1.3;
            let naive = (a * b).rem_euclid(std::f64::consts::TAU);
            let red = reduce_phase(a, b);
            assert!((naive - red).abs() < 1e-12);
        }
    }

    #[test]
    fn phase_reduction_keeps_relative_offsets_for_large_products() {
        // Adding exactly half a wavelength to a meter-scale distance flips the
        // pump phase by pi.
        let k0 = std::f64::consts::TAU / RB_WAVELENGTH;
        let base = 3.937;
        let p0 = reduce_phase(k0, base);
        let p1 = reduce_phase(k0, base + RB_WAVELENGTH / 2.0);
        let diff = (p1 - p0).rem_euclid(std::f64::consts::TAU);
        assert!((diff - std::f64::consts::PI).abs() < 1e-6, "diff = {diff}");
    }

    #[test]
    fn grid_places_trap_at_requested_phase() {
        let params = rb();
        let g = grid();
        let k0 = params.pump_wavenumber;
        assert!((g.pump_phase() - 7.0 * std::f64::consts::PI / 8.0).abs() < 1e-12);
        // Distance was adjusted by less than one wavelength.
        let nominal = crate::constants::C * params.delay;
        assert!(g.mirror_distance() >= nominal);
        assert!(g.mirror_distance() - nominal < RB_WAVELENGTH);
        // And the reduced phase of the stored distance agrees.
        let raw = reduce_phase(k0, g.mirror_distance());
        assert!((raw - g.pump_phase()).abs() < 1e-6, "raw = {raw}");
        // sin(4 k0 x) = -1 there.
        assert!(((4.0 * g.pump_phase()).sin() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn mode_trig_matches_per_mode_phases() {
        let g = grid();
        let mut s = vec![0.0; g.count()];
        let mut c = vec![0.0; g.count()];
        for &xi in &[-0.4, 0.0, 0.3, 0.2134] {
            g.mode_trig(xi, &mut s, &mut c);
            for k in (0..g.count()).step_by(17) {
                let th = g.mode_phase(k, xi);
                assert!((s[k] - th.sin()).abs() < 1e-11);
                assert!((c[k] - th.cos()).abs() < 1e-11);
            }
        }
    }

    #[test]
    fn single_mode_field_and_linearity() {
        let g = grid();
        let mut f1 = FieldState::zero(g.count());
        f1.amplitudes[40] = Complex64::new(0.7, -0.2);
        let xi = 0.23;
        let expect = Complex64::new(0.7, -0.2) * g.mode_phase(40, xi).sin();
        assert!((total_field(&g, &f1, xi) - expect).norm() < 1e-12);

        let mut f2 = FieldState::zero(g.count());
        f2.amplitudes[64] = Complex64::new(-0.1, 0.9);
        f2.amplitudes[3] = Complex64::new(0.4, 0.0);
        let mut sum = FieldState::zero(g.count());
        for k in 0..g.count() {
            sum.amplitudes[k] = f1.amplitudes[k] + f2.amplitudes[k];
        }
        let lhs = total_field(&g, &sum, xi);
        let rhs = total_field(&g, &f1, xi) + total_field(&g, &f2, xi);
        assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn field_vanishes_at_mirror() {
        let g = grid();
        let mut f = FieldState::zero(g.count());
        for k in 0..g.count() {
            f.amplitudes[k] = Complex64::new(0.3 + k as f64 * 0.01, -0.2);
        }
        assert_eq!(total_field_at_distance(&g, &f, 0.0).norm(), 0.0);
    }

    #[test]
    fn gradient_matches_finite_difference() {
        let g = grid();
        let params = rb();
        let coupling = AtomFieldCoupling::from_params(&params, &g).unwrap();
        let mut f = pump_initial_state(&g, &coupling, &params).unwrap();
        f.amplitudes[10] = Complex64::new(1.3, 0.4);
        f.amplitudes[100] = Complex64::new(-0.6, 0.1);
        let xi = 0.17;
        let h = 1e-4;
        let fd = (total_field(&g, &f, xi + h) - total_field(&g, &f, xi - h)) / (2.0 * h);
        let an = field_gradient(&g, &f, xi);
        assert!((fd - an).norm() / an.norm() < 1e-6, "{fd} vs {an}");
    }

    #[test]
    fn gradient_of_intensity_vanishes_at_antinode() {
        let params = rb();
        let g = ModeGrid::new(&params, 128, 0.1 * RB_HALF_LINEWIDTH, TrapPlacement::Antinode)
            .unwrap();
        let coupling = AtomFieldCoupling::from_params(&params, &g).unwrap();
        let f = pump_initial_state(&g, &coupling, &params).unwrap();
        let e = total_field(&g, &f, 0.0);
        let grad = field_gradient(&g, &f, 0.0);
        // d|E|^2/dx = 2 Re(E* E') = 0 at the antinode.
        assert!((e.conj() * grad).re.abs() < 1e-10 * e.norm_sqr());
    }

    #[test]
    fn coupling_constants_sign_and_magnitude() {
        let params = rb();
        let g = grid();
        let c = AtomFieldCoupling::from_params(&params, &g).unwrap();
        assert!(c.scattering_rate > 0.0);
        assert!(c.light_shift < 0.0); // red detuning
        assert!((c.light_shift + 1.201336e-3).abs() < 1e-8, "{}", c.light_shift);
        assert!((c.scattering_rate - 1.201336e-4).abs() < 1e-9);
    }

    #[test]
    fn pump_calibration_reproduces_standing_wave_potential() {
        let params = rb();
        let g = grid();
        let coupling = AtomFieldCoupling::from_params(&params, &g).unwrap();
        let f = pump_initial_state(&g, &coupling, &params).unwrap();
        // gamma |alpha|^2 = s
        let n = f.photon_number();
        assert!((coupling.scattering_rate * n - params.saturation).abs() < 1e-12);
        // U0 |E(xi)|^2 equals s * Delta * sin^2(k0 x) over a wavelength.
        let detuning = params.detuning / params.half_linewidth;
        for i in 0..32 {
            let xi = i as f64 * std::f64::consts::TAU / 32.0;
            let depth = coupling.light_shift * total_field(&g, &f, xi).norm_sqr();
            let theta = g.mode_phase(g.pump_index(), xi);
            let expect = params.saturation * detuning * theta.sin().powi(2);
            assert!(
                (depth - expect).abs() <= 1e-2 * (params.saturation * detuning).abs(),
                "xi={xi}: {depth} vs {expect}"
            );
        }
    }

    #[test]
    fn pump_state_scales_linearly_with_saturation() {
        let params = rb();
        let g = grid();
        let coupling = AtomFieldCoupling::from_params(&params, &g).unwrap();
        let mut p2 = params;
        p2.saturation = 2.0 * params.saturation;
        let f1 = pump_initial_state(&g, &coupling, &params).unwrap();
        let f2 = pump_initial_state(&g, &coupling, &p2).unwrap();
        assert!((f2.photon_number() / f1.photon_number() - 2.0).abs() < 1e-12);

        let mut p0 = params;
        p0.saturation = 0.0;
        let f0 = pump_initial_state(&g, &coupling, &p0).unwrap();
        assert_eq!(f0.photon_number(), 0.0);
    }

    #[test]
    fn drift_fixed_point_with_zero_field_at_trap_center() {
        let params = rb();
        let g = grid();
        let coupling = AtomFieldCoupling::from_params(&params, &g).unwrap();
        let trap = HarmonicTrap {
            spring: 100.0,
            center: 0.0,
        };
        let f = FieldState::zero(g.count());
        let d = drift(&g, &coupling, &trap, 400.0, 0.0, 0.0, &f);
        assert_eq!(d.position, 0.0);
        assert_eq!(d.momentum, 0.0);
        assert!(d.field.iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn drift_conserves_photon_number_without_scattering() {
        let params = rb();
        let g = grid();
        let coupling = AtomFieldCoupling::from_params(&params, &g)
            .unwrap()
            .without_scattering();
        let mut f = pump_initial_state(
            &g,
            &AtomFieldCoupling::from_params(&params, &g).unwrap(),
            &params,
        )
        .unwrap();
        f.amplitudes[20] = Complex64::new(0.4, 1.1);
        let trap = HarmonicTrap::off();
        let d = drift(&g, &coupling, &trap, 400.0, 0.1, 3.0, &f);
        // d/dt sum |alpha|^2 = 2 Re sum conj(alpha) dalpha = 0 when gamma = 0.
        let dn: f64 = f
            .amplitudes
            .iter()
            .zip(&d.field)
            .map(|(a, da)| 2.0 * (a.conj() * da).re)
            .sum();
        assert!(dn.abs() < 1e-12 * f.photon_number(), "dn = {dn}");
    }

    #[test]
    fn dipole_force_points_toward_antinode_for_red_detuning() {
        let params = rb();
        let g = ModeGrid::new(&params, 128, 0.1 * RB_HALF_LINEWIDTH, TrapPlacement::Antinode)
            .unwrap();
        let coupling = AtomFieldCoupling::from_params(&params, &g).unwrap();
        let f = pump_initial_state(&g, &coupling, &params).unwrap();
        let trap = HarmonicTrap::off();
        let mass = 400.0;
        let at = |xi: f64| drift(&g, &coupling, &trap, mass, xi, 0.0, &f).momentum;
        let eps = 0.05;
        assert!(at(0.0).abs() < 1e-10 * at(-eps).abs());
        assert!(at(-eps) > 0.0, "below antinode the force pushes up");
        assert!(at(eps) < 0.0, "above antinode the force pushes down");
    }

    #[test]
    fn grid_rejects_odd_or_tiny_counts() {
        let params = rb();
        assert!(ModeGrid::new(&params, 0, 1.0, TrapPlacement::Node).is_err());
        assert!(ModeGrid::new(&params, 127, 1.0, TrapPlacement::Node).is_err());
        assert!(ModeGrid::new(&params, 128, -1.0, TrapPlacement::Node).is_err());
    }
}
