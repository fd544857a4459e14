//! Stochastic time integration of the coupled atom-field equations.
//!
//! One step advances `(xi, p, {alpha_k})` by a fixed `dt` (units 1/Gamma):
//!
//! * momentum: semi-implicit Euler kick from the light force and the
//!   restoring trap force, plus the Ito noise increment `dP`;
//! * position: drift with the updated momentum (symplectic for the trap part,
//!   which keeps the oscillator energy error bounded instead of secular);
//! * modes: the stiff rotation `i Delta_k alpha_k` is applied exactly through
//!   precomputed phase factors, with the coupling term and the noise `dA_k`
//!   as an Euler kick (exponential Euler-Maruyama). Plain Euler would inflate
//!   the photon number by orders of magnitude over a 60/Gamma run.
//!
//! All noise coefficients are evaluated at the step start (Ito convention).
//! The `dW_+` channel is shared between `dP` and every `dA_k`, preserving the
//! momentum-field noise correlation.

use crate::error::{Error, Result};
use crate::field::{light_force, AtomFieldCoupling, FieldState, HarmonicTrap, ModeGrid};
use crate::real::Real;
use crate::rng::TrajectoryRng;
use num_complex::Complex;

/// Atom phase-space point plus the field, in normalized units.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemState<R: Real> {
    /// Offset from the trap center, units 1/k0.
    pub position: R,
    /// Momentum, units hbar k0.
    pub momentum: R,
    /// Time, units 1/Gamma.
    pub time: R,
    pub field: FieldState<R>,
}

impl<R: Real> SystemState<R> {
    pub fn new(position: R, momentum: R, field: FieldState<R>) -> Self {
        Self {
            position,
            momentum,
            time: R::zero(),
            field,
        }
    }
}

/// Ito increments for one step, each with zero mean and variance dt.
#[derive(Debug, Clone, Copy)]
pub struct NoiseChannels<R: Real> {
    pub dw0: R,
    pub dw_plus: R,
    pub dw_minus: R,
}

impl<R: Real> NoiseChannels<R> {
    /// Draws the three channels; the order (dW0, dW+, dW-) is fixed and part
    /// of the determinism contract.
    #[inline]
    pub fn draw(rng: &mut TrajectoryRng, sqrt_dt: R) -> Self {
        Self {
            dw0: rng.normal::<R>() * sqrt_dt,
            dw_plus: rng.normal::<R>() * sqrt_dt,
            dw_minus: rng.normal::<R>() * sqrt_dt,
        }
    }
}

/// Integration and ensemble parameters, in normalized units.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig<R: Real> {
    /// Time step, 1/Gamma.
    pub dt: R,
    /// Total propagation time, 1/Gamma.
    pub duration: R,
    /// Steps between stored samples.
    pub record_stride: usize,
    pub master_seed: u64,
    pub trajectory_count: usize,
    /// Initial thermal temperature, k_B T / (hbar Gamma).
    pub initial_temperature: R,
    pub noise_enabled: bool,
    /// Antithetic pairing: trajectories 2j and 2j+1 share initial conditions
    /// and use sign-flipped noise. Halves the number of independent initial
    /// conditions but cancels the leading-order diffusion noise in ensemble
    /// means.
    pub antithetic: bool,
    /// Number of equally sized sub-ensembles used for error estimation.
    pub sub_ensembles: usize,
}

impl<R: Real> RunConfig<R> {
    pub fn validate(&self, grid: &ModeGrid<R>) -> Result<()> {
        if self.dt <= R::zero() {
            return Err(Error::Config("dt must be > 0".into()));
        }
        if self.duration <= R::zero() {
            return Err(Error::Config("duration must be > 0".into()));
        }
        let bound = grid.max_propagation_time();
        if self.duration > bound {
            return Err(Error::PeriodicityBound {
                requested: self.duration.to_f64_lossy(),
                bound: bound.to_f64_lossy(),
                period: (R::lit(2.0) * R::PI() / grid.spacing()).to_f64_lossy(),
            });
        }
        if self.record_stride == 0 {
            return Err(Error::Config("record_stride must be >= 1".into()));
        }
        if self.trajectory_count == 0 {
            return Err(Error::Config("trajectory_count must be >= 1".into()));
        }
        if self.antithetic && self.trajectory_count % 2 != 0 {
            return Err(Error::Config(
                "antithetic pairing requires an even trajectory count".into(),
            ));
        }
        if self.sub_ensembles == 0 || self.trajectory_count % self.sub_ensembles != 0 {
            return Err(Error::Config(format!(
                "sub_ensembles must divide trajectory_count ({} / {})",
                self.trajectory_count, self.sub_ensembles
            )));
        }
        if self.antithetic && (self.trajectory_count / self.sub_ensembles) % 2 != 0 {
            return Err(Error::Config(
                "antithetic pairs must not straddle sub-ensembles".into(),
            ));
        }
        Ok(())
    }

    pub fn step_count(&self) -> u64 {
        (self.duration / self.dt).to_f64_lossy().round() as u64
    }

    pub fn sample_count(&self) -> usize {
        (self.step_count() / self.record_stride as u64) as usize + 1
    }
}

/// Noise increments `(dP, {dA_k})` for one step from the given state.
///
/// `dP = k0 sqrt(4 gamma/5) |E| dW0 + sqrt(2 gamma) |E'| dW+` (in hbar k0),
/// `dA_k = sqrt(gamma/2) f_k (E'/|E'|) (i dW+ - dW-)`. Where the gradient is
/// exactly zero its unit phase factor is undefined; the increments are zeroed
/// there (a measure-zero event, so statistics cannot depend on the choice,
/// and an empty field then produces no noise at all).
pub fn noise_increments<R: Real>(
    grid: &ModeGrid<R>,
    coupling: &AtomFieldCoupling<R>,
    state: &SystemState<R>,
    dt: R,
    rng: &mut TrajectoryRng,
) -> (R, Vec<Complex<R>>) {
    let n = grid.count();
    let mut sin_buf = vec![R::zero(); n];
    let mut cos_buf = vec![R::zero(); n];
    grid.mode_trig(state.position, &mut sin_buf, &mut cos_buf);
    let mut e = Complex::new(R::zero(), R::zero());
    let mut grad = Complex::new(R::zero(), R::zero());
    for (k, a) in state.field.amplitudes.iter().enumerate() {
        e = e + a.scale(sin_buf[k]);
        grad = grad + a.scale(cos_buf[k]);
    }
    let ch = NoiseChannels::draw(rng, dt.sqrt());
    let (dp, unit) = momentum_kick(coupling, e, grad, &ch);
    let fac = field_noise_factor(coupling, unit, &ch);
    let da = sin_buf.iter().map(|s| fac.scale(*s)).collect();
    (dp, da)
}

#[inline]
fn momentum_kick<R: Real>(
    coupling: &AtomFieldCoupling<R>,
    e: Complex<R>,
    grad: Complex<R>,
    ch: &NoiseChannels<R>,
) -> (R, Complex<R>) {
    let g = coupling.scattering_rate;
    let e_abs = e.norm();
    let grad_abs = grad.norm();
    let unit = if grad_abs > R::zero() {
        grad.unscale(grad_abs)
    } else {
        Complex::new(R::zero(), R::zero())
    };
    let dp = (R::lit(4.0 / 5.0) * g).sqrt() * e_abs * ch.dw0
        + (R::lit(2.0) * g).sqrt() * grad_abs * ch.dw_plus;
    (dp, unit)
}

#[inline]
fn field_noise_factor<R: Real>(
    coupling: &AtomFieldCoupling<R>,
    unit: Complex<R>,
    ch: &NoiseChannels<R>,
) -> Complex<R> {
    let amp = (coupling.scattering_rate / R::lit(2.0)).sqrt();
    unit.scale(amp) * Complex::new(-ch.dw_minus, ch.dw_plus)
}

/// Reusable integrator for one system configuration.
pub struct Stepper<'a, R: Real> {
    grid: &'a ModeGrid<R>,
    coupling: AtomFieldCoupling<R>,
    trap: HarmonicTrap<R>,
    /// Atom mass, units hbar k0^2 / Gamma.
    mass: R,
    dt: R,
    sqrt_dt: R,
    noise_enabled: bool,
    rotation: Vec<Complex<R>>,
    sin_buf: Vec<R>,
    cos_buf: Vec<R>,
}

impl<'a, R: Real> Stepper<'a, R> {
    pub fn new(
        grid: &'a ModeGrid<R>,
        coupling: AtomFieldCoupling<R>,
        trap: HarmonicTrap<R>,
        mass: R,
        dt: R,
        noise_enabled: bool,
    ) -> Self {
        let rotation = (0..grid.count())
            .map(|k| Complex::from_polar(R::one(), grid.frame_detuning(k) * dt))
            .collect();
        Self {
            grid,
            coupling,
            trap,
            mass,
            dt,
            sqrt_dt: dt.sqrt(),
            noise_enabled,
            rotation,
            sin_buf: vec![R::zero(); grid.count()],
            cos_buf: vec![R::zero(); grid.count()],
        }
    }

    /// Field amplitude and gradient at `xi` using the internal buffers.
    fn eval_field(&mut self, field: &FieldState<R>, xi: R) -> (Complex<R>, Complex<R>) {
        self.grid.mode_trig(xi, &mut self.sin_buf, &mut self.cos_buf);
        let mut e = Complex::new(R::zero(), R::zero());
        let mut grad = Complex::new(R::zero(), R::zero());
        for (k, a) in field.amplitudes.iter().enumerate() {
            e = e + a.scale(self.sin_buf[k]);
            grad = grad + a.scale(self.cos_buf[k]);
        }
        (e, grad)
    }

    /// Deterministic light force at a state, for diagnostics.
    pub fn light_force_at(&mut self, field: &FieldState<R>, xi: R) -> R {
        let (e, grad) = self.eval_field(field, xi);
        light_force(&self.coupling, e, grad)
    }

    /// Advances the state by one step. `step_index` only labels aborts.
    pub fn step(&mut self, state: &mut SystemState<R>, rng: &mut TrajectoryRng, step_index: u64) -> Result<()> {
        let (e, grad) = self.eval_field(&state.field, state.position);

        let mut force = light_force(&self.coupling, e, grad);
        force -= self.trap.spring * (state.position - self.trap.center);

        let mut field_kick = -(Complex::new(self.coupling.scattering_rate, self.coupling.light_shift) * e)
            .scale(self.dt);
        if self.noise_enabled {
            let ch = NoiseChannels::draw(rng, self.sqrt_dt);
            let (dp, unit) = momentum_kick(&self.coupling, e, grad, &ch);
            state.momentum += dp;
            field_kick = field_kick + field_noise_factor(&self.coupling, unit, &ch);
        }

        state.momentum += force * self.dt;
        state.position += state.momentum / self.mass * self.dt;

        for (k, a) in state.field.amplitudes.iter_mut().enumerate() {
            *a = self.rotation[k] * (*a + field_kick.scale(self.sin_buf[k]));
        }
        state.time += self.dt;

        if !(state.position.is_finite() && state.momentum.is_finite()) {
            return Err(Error::NumericalAbort {
                step: step_index,
                norm: state.momentum.to_f64_lossy().abs(),
            });
        }
        Ok(())
    }
}

/// Runs `n_steps` from `state`, invoking `on_sample(sample_index, state)` at
/// step 0 and every `record_stride` steps.
#[allow(clippy::too_many_arguments)]
pub fn propagate<R: Real>(
    grid: &ModeGrid<R>,
    coupling: AtomFieldCoupling<R>,
    trap: HarmonicTrap<R>,
    mass: R,
    dt: R,
    n_steps: u64,
    record_stride: usize,
    noise_enabled: bool,
    state: &mut SystemState<R>,
    rng: &mut TrajectoryRng,
    mut on_sample: impl FnMut(usize, &SystemState<R>),
) -> Result<()> {
    let mut stepper = Stepper::new(grid, coupling, trap, mass, dt, noise_enabled);
    on_sample(0, state);
    let stride = record_stride as u64;
    let mut sample = 1usize;
    for step in 1..=n_steps {
        stepper.step(state, rng, step)?;
        if step % stride == 0 {
            on_sample(sample, state);
            sample += 1;
        }
    }
    Ok(())
}

/// Recorded time series of one trajectory, normalized units.
#[derive(Debug, Clone)]
pub struct Trajectory<R: Real> {
    pub times: Vec<R>,
    pub positions: Vec<R>,
    pub momenta: Vec<R>,
    pub momenta_sq: Vec<R>,
    pub photon_numbers: Vec<R>,
    pub stream_index: u64,
    pub final_state: SystemState<R>,
}

/// Thermal-cloud initial condition: position and momentum Gaussian with the
/// classical harmonic-trap variances, field in the calibrated pump state.
/// Drawn with unflipped noise so antithetic twins share it.
pub fn sample_thermal_state<R: Real>(
    trap: &HarmonicTrap<R>,
    mass: R,
    temperature: R,
    pump: &FieldState<R>,
    rng: &mut TrajectoryRng,
) -> SystemState<R> {
    let pos_sigma = if trap.spring > R::zero() {
        (temperature / trap.spring).sqrt()
    } else {
        R::zero()
    };
    let mom_sigma = (mass * temperature).sqrt();
    let position = trap.center + pos_sigma * rng.unflipped::<R>();
    let momentum = mom_sigma * rng.unflipped::<R>();
    SystemState::new(position, momentum, pump.clone())
}

/// Integrates a single trajectory with the per-trajectory RNG stream.
#[allow(clippy::too_many_arguments)]
pub fn run_trajectory<R: Real>(
    grid: &ModeGrid<R>,
    coupling: AtomFieldCoupling<R>,
    trap: HarmonicTrap<R>,
    mass: R,
    config: &RunConfig<R>,
    initial: SystemState<R>,
    stream_index: u64,
    rng: &mut TrajectoryRng,
) -> Result<Trajectory<R>> {
    config.validate(grid)?;
    let samples = config.sample_count();
    let mut traj = Trajectory {
        times: Vec::with_capacity(samples),
        positions: Vec::with_capacity(samples),
        momenta: Vec::with_capacity(samples),
        momenta_sq: Vec::with_capacity(samples),
        photon_numbers: Vec::with_capacity(samples),
        stream_index,
        final_state: initial.clone(),
    };
    let mut state = initial;
    propagate(
        grid,
        coupling,
        trap,
        mass,
        config.dt,
        config.step_count(),
        config.record_stride,
        config.noise_enabled,
        &mut state,
        rng,
        |_, s| {
            traj.times.push(s.time);
            traj.positions.push(s.position);
            traj.momenta.push(s.momentum);
            traj.momenta_sq.push(s.momentum * s.momentum);
            traj.photon_numbers.push(s.field.photon_number());
        },
    )?;
    traj.final_state = state;
    Ok(traj)
}

/// Extracts the velocity-linear part of the light force by dragging the atom
/// at a prescribed constant velocity through `xi_center` and antisymmetrizing
/// against the time-reversed drag. The conservative force cancels exactly
/// because both runs visit the same positions; returned is the mean
/// velocity-odd force over the central window, in hbar k0 Gamma.
pub fn velocity_force_probe<R: Real>(
    grid: &ModeGrid<R>,
    coupling: AtomFieldCoupling<R>,
    mass_placeholder: R,
    pump: &FieldState<R>,
    xi_center: R,
    velocity: R,
    total_time: R,
    settle_time: R,
    dt: R,
) -> R {
    let n = (total_time / dt).to_f64_lossy().round() as usize;
    let skip = (settle_time / dt).to_f64_lossy().round() as usize;
    let half = total_time / R::lit(2.0);

    let force_series = |v: R| -> Vec<R> {
        let mut stepper = Stepper::new(grid, coupling, HarmonicTrap::off(), mass_placeholder, dt, false);
        let mut field = pump.clone();
        let mut out = Vec::with_capacity(n + 1);
        for i in 0..=n {
            let t = dt * R::lit(i as f64);
            let xi = xi_center + v * (t - half);
            let (e, grad) = stepper.eval_field(&field, xi);
            out.push(light_force(&coupling, e, grad));
            // field-only update at the prescribed position
            let kick = -(Complex::new(coupling.scattering_rate, coupling.light_shift) * e).scale(dt);
            for (k, a) in field.amplitudes.iter_mut().enumerate() {
                *a = stepper.rotation[k] * (*a + kick.scale(stepper.sin_buf[k]));
            }
        }
        out
    };

    let fwd = force_series(velocity);
    let bwd = force_series(-velocity);
    let lo = skip.max(1);
    let hi = n - skip;
    let mut acc = R::zero();
    let mut count = 0usize;
    for i in lo..=hi {
        acc += (fwd[i] - bwd[n - i]) / R::lit(2.0);
        count += 1;
    }
    acc / R::lit(count as f64)
}
