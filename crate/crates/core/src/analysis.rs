//! Extraction of friction coefficients and cooling rates from trajectories
//! and ensembles.
//!
//! The oscillation in the raw signal is orders of magnitude larger than the
//! friction-induced drift, so both extraction methods remove it before
//! measuring a rate:
//!
//! * **Method 1** segments the momentum series at its zero crossings, fits
//!   each oscillation with a fixed-frequency harmonic, and regresses the log
//!   of the per-oscillation amplitudes on time. The returned value is the
//!   amplitude decay rate, which is exactly the oscillation-averaged friction
//!   coefficient (a uniform friction `rho` damps the amplitude at `rho/2`,
//!   and its oscillation average is `rho/2` as well).
//! * **Method 2** fits a single sine at twice the trap frequency to the
//!   squared-momentum (or temperature) series, subtracts it, and fits a line
//!   to what is left. The slope measures `d<p^2>/dt` or `dT/dt`.
//!
//! Fit windows exclude the first trap period to let switch-on transients die
//! out; the excluded fraction is recorded in the diagnostics.

use crate::ensemble::EnsembleResult;
use crate::error::{Error, Result};
use crate::real::Real;
use serde::{Deserialize, Serialize};

/// Fit metadata carried by every result.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitDiagnostics {
    /// "method1", "method2" or "linear".
    pub method: String,
    pub n_points: usize,
    pub residual_rms: f64,
    /// Fit window in the input time units.
    pub window: (f64, f64),
    /// Fraction of the series dropped as transient.
    pub excluded_fraction: f64,
    pub weighted: bool,
    /// Method 2 fell back to the linearized (sin, cos) basis because the
    /// phase refinement did not converge.
    pub fallback_linearized: bool,
    pub notes: Vec<String>,
}

impl FitDiagnostics {
    fn new(method: &str) -> Self {
        Self {
            method: method.into(),
            n_points: 0,
            residual_rms: 0.0,
            window: (0.0, 0.0),
            excluded_fraction: 0.0,
            weighted: false,
            fallback_linearized: false,
            notes: Vec::new(),
        }
    }
}

/// A fitted value with its standard error.
#[derive(Debug, Clone)]
pub struct FitResult<R: Real> {
    pub value: R,
    pub std_error: R,
    pub diagnostics: FitDiagnostics,
}

/// Ensemble temperature series `T(t) = <p^2>/(m k_B)` in normalized units
/// (k_B T in hbar Gamma), with per-bin errors from the sub-ensemble spread.
#[derive(Debug, Clone)]
pub struct TemperatureSeries<R: Real> {
    pub times: Vec<R>,
    pub temperature: Vec<R>,
    pub stderr: Vec<R>,
}

/// Weighted straight-line fit `y = intercept + slope * x`.
#[derive(Debug, Clone, Copy)]
pub struct LinearFit<R: Real> {
    pub intercept: R,
    pub slope: R,
    pub var_intercept: R,
    pub var_slope: R,
    pub covariance: R,
    pub chi2: R,
    pub dof: usize,
    pub residual_rms: R,
}

/// Ordinary or weighted least squares on a line. With weights the parameter
/// covariance comes from the weight matrix; without, from the residual
/// variance.
pub fn linear_fit<R: Real>(x: &[R], y: &[R], weights: Option<&[R]>) -> Result<LinearFit<R>> {
    let n = x.len();
    if n != y.len() || n < 2 {
        return Err(Error::InsufficientData(format!(
            "linear fit needs >= 2 matched points, got {n}"
        )));
    }
    let w_of = |i: usize| weights.map_or(R::one(), |w| w[i]);
    let mut s0 = R::zero();
    let mut s1 = R::zero();
    let mut s2 = R::zero();
    let mut sy = R::zero();
    let mut sxy = R::zero();
    for i in 0..n {
        let w = w_of(i);
        s0 += w;
        s1 += w * x[i];
        s2 += w * x[i] * x[i];
        sy += w * y[i];
        sxy += w * x[i] * y[i];
    }
    let det = s0 * s2 - s1 * s1;
    if det <= R::zero() {
        return Err(Error::InsufficientData(
            "degenerate abscissa in linear fit".into(),
        ));
    }
    let intercept = (s2 * sy - s1 * sxy) / det;
    let slope = (s0 * sxy - s1 * sy) / det;

    let mut chi2 = R::zero();
    let mut rss = R::zero();
    for i in 0..n {
        let r = y[i] - intercept - slope * x[i];
        chi2 += w_of(i) * r * r;
        rss += r * r;
    }
    let dof = n.saturating_sub(2);
    // Covariance of (intercept, slope) from the normal equations; for the
    // unweighted case scale by the residual variance estimate.
    let scale = if weights.is_some() {
        R::one()
    } else if dof > 0 {
        chi2 / R::lit(dof as f64)
    } else {
        R::zero()
    };
    Ok(LinearFit {
        intercept,
        slope,
        var_intercept: scale * s2 / det,
        var_slope: scale * s0 / det,
        covariance: -scale * s1 / det,
        chi2,
        dof,
        residual_rms: (rss / R::lit(n as f64)).sqrt(),
    })
}

/// Fixed-frequency sinusoid fit `y = offset + amplitude * sin(omega t + phase)`.
#[derive(Debug, Clone, Copy)]
pub struct SinusoidFit<R: Real> {
    pub offset: R,
    pub amplitude: R,
    pub phase: R,
    pub converged: bool,
}

fn solve3<R: Real>(m: [[R; 3]; 3], b: [R; 3]) -> Option<[R; 3]> {
    // Gaussian elimination with partial pivoting on a 3x3 system.
    let mut a = [
        [m[0][0], m[0][1], m[0][2], b[0]],
        [m[1][0], m[1][1], m[1][2], b[1]],
        [m[2][0], m[2][1], m[2][2], b[2]],
    ];
    for col in 0..3 {
        let mut piv = col;
        for row in col + 1..3 {
            if a[row][col].abs() > a[piv][col].abs() {
                piv = row;
            }
        }
        if a[piv][col] == R::zero() {
            return None;
        }
        a.swap(col, piv);
        for row in col + 1..3 {
            let f = a[row][col] / a[col][col];
            for k in col..4 {
                let upper = a[col][k];
                a[row][k] = a[row][k] - f * upper;
            }
        }
    }
    let mut out = [R::zero(); 3];
    for col in (0..3).rev() {
        let mut acc = a[col][3];
        for k in col + 1..3 {
            acc = acc - a[col][k] * out[k];
        }
        out[col] = acc / a[col][col];
    }
    Some(out)
}

/// Fits `offset + amplitude sin(omega t + phase)` by linear regression on the
/// `(1, sin, cos)` basis followed by Gauss-Newton refinement of the
/// `(offset, amplitude, phase)` parametrization. Returns the linearized
/// solution with `converged = false` if the refinement stalls.
pub fn sinusoid_fit_fixed_freq<R: Real>(
    t: &[R],
    y: &[R],
    weights: Option<&[R]>,
    omega: R,
) -> Result<SinusoidFit<R>> {
    let n = t.len();
    if n != y.len() || n < 4 {
        return Err(Error::InsufficientData(format!(
            "sinusoid fit needs >= 4 matched points, got {n}"
        )));
    }
    let w_of = |i: usize| weights.map_or(R::one(), |w| w[i]);

    // Linear basis solve.
    let mut m = [[R::zero(); 3]; 3];
    let mut rhs = [R::zero(); 3];
    for i in 0..n {
        let (s, c) = (omega * t[i]).sin_cos();
        let basis = [R::one(), s, c];
        let w = w_of(i);
        for a in 0..3 {
            rhs[a] += w * basis[a] * y[i];
            for b in 0..3 {
                m[a][b] += w * basis[a] * basis[b];
            }
        }
    }
    let sol = solve3(m, rhs).ok_or_else(|| {
        Error::InsufficientData("degenerate design matrix in sinusoid fit".into())
    })?;
    let mut offset = sol[0];
    let mut amplitude = (sol[1] * sol[1] + sol[2] * sol[2]).sqrt();
    let mut phase = sol[2].atan2(sol[1]);

    if amplitude == R::zero() {
        return Ok(SinusoidFit {
            offset,
            amplitude,
            phase: R::zero(),
            converged: true,
        });
    }

    // Gauss-Newton on (offset, amplitude, phase).
    let mut converged = false;
    for _ in 0..20 {
        let mut jt_j = [[R::zero(); 3]; 3];
        let mut jt_r = [R::zero(); 3];
        for i in 0..n {
            let (s, c) = (omega * t[i] + phase).sin_cos();
            let model = offset + amplitude * s;
            let r = y[i] - model;
            let j = [R::one(), s, amplitude * c];
            let w = w_of(i);
            for a in 0..3 {
                jt_r[a] += w * j[a] * r;
                for b in 0..3 {
                    jt_j[a][b] += w * j[a] * j[b];
                }
            }
        }
        let Some(step) = solve3(jt_j, jt_r) else { break };
        offset += step[0];
        amplitude += step[1];
        phase += step[2];
        let scale = amplitude.abs().max(offset.abs()).max(R::lit(1e-300));
        if step[0].abs() + step[1].abs() + step[2].abs() * amplitude.abs() < R::lit(1e-12) * scale {
            converged = true;
            break;
        }
    }
    if amplitude < R::zero() {
        amplitude = -amplitude;
        phase += R::PI();
    }
    Ok(SinusoidFit {
        offset,
        amplitude,
        phase,
        converged,
    })
}

fn transient_cut<R: Real>(times: &[R], trap_frequency: R) -> usize {
    let period = R::lit(2.0) * R::PI() / trap_frequency;
    let cutoff = times[0] + period;
    times.iter().position(|&t| t > cutoff).unwrap_or(0)
}

/// Method 1: per-oscillation harmonic fits of the momentum series, then a
/// log-amplitude regression.
///
/// Returns the amplitude decay rate, which estimates the oscillation-averaged
/// friction coefficient, in inverse input time units. Fails with
/// `InsufficientData` when fewer than 3 oscillations are resolvable.
pub fn fit_method1<R: Real>(times: &[R], momenta: &[R], trap_frequency: R) -> Result<FitResult<R>> {
    if times.len() != momenta.len() || times.len() < 8 {
        return Err(Error::InsufficientData(
            "method 1 needs a sampled momentum series".into(),
        ));
    }
    let start = transient_cut(times, trap_frequency);
    let t = &times[start..];
    let p = &momenta[start..];
    let span = *t.last().unwrap() - t[0];
    let period = R::lit(2.0) * R::PI() / trap_frequency;
    if span < R::lit(5.0) * period {
        return Err(Error::InsufficientData(format!(
            "method 1 wants >= 5 trap oscillations in the fit window, got {:.2}",
            (span / period).to_f64_lossy()
        )));
    }

    // Zero crossings of p delimit half oscillations; a full oscillation runs
    // between every second crossing.
    let mut crossings = Vec::new();
    for i in 0..p.len() - 1 {
        if (p[i] <= R::zero() && p[i + 1] > R::zero()) || (p[i] >= R::zero() && p[i + 1] < R::zero())
        {
            crossings.push(i);
        }
    }
    if crossings.len() < 5 {
        return Err(Error::InsufficientData(format!(
            "fewer than 3 resolvable oscillations ({} zero crossings)",
            crossings.len()
        )));
    }

    let mut amp_times = Vec::new();
    let mut log_amps = Vec::new();
    for w in crossings.windows(3).step_by(2) {
        let (lo, hi) = (w[0], w[2]);
        if hi - lo < 16 {
            continue;
        }
        // 2-parameter harmonic fit over one oscillation at fixed frequency.
        let t0 = t[lo];
        let mut ss = R::zero();
        let mut cc = R::zero();
        let mut sc = R::zero();
        let mut sy = R::zero();
        let mut cy = R::zero();
        for i in lo..=hi {
            let (s, c) = (trap_frequency * (t[i] - t0)).sin_cos();
            ss += s * s;
            cc += c * c;
            sc += s * c;
            sy += s * p[i];
            cy += c * p[i];
        }
        let det = ss * cc - sc * sc;
        if det == R::zero() {
            continue;
        }
        let a = (cc * sy - sc * cy) / det;
        let b = (ss * cy - sc * sy) / det;
        let amp = (a * a + b * b).sqrt();
        if amp > R::zero() {
            amp_times.push((t[lo] + t[hi]) / R::lit(2.0));
            log_amps.push(amp.ln());
        }
    }
    if amp_times.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "fewer than 3 resolvable oscillations ({} fitted)",
            amp_times.len()
        )));
    }

    let fit = linear_fit(&amp_times, &log_amps, None)?;
    let mut diagnostics = FitDiagnostics::new("method1");
    diagnostics.n_points = amp_times.len();
    diagnostics.residual_rms = fit.residual_rms.to_f64_lossy();
    diagnostics.window = (t[0].to_f64_lossy(), t.last().unwrap().to_f64_lossy());
    diagnostics.excluded_fraction = start as f64 / times.len() as f64;
    Ok(FitResult {
        value: -fit.slope,
        std_error: fit.var_slope.sqrt(),
        diagnostics,
    })
}

/// Method 2: fit and subtract a single sine at twice the trap frequency, then
/// fit a line to the remainder. Returns the line's slope in input units
/// (e.g. d<p^2>/dt, or dT/dt when applied to a temperature series).
pub fn fit_method2<R: Real>(
    times: &[R],
    values: &[R],
    errors: Option<&[R]>,
    trap_frequency: R,
) -> Result<FitResult<R>> {
    if times.len() != values.len() || times.len() < 8 {
        return Err(Error::InsufficientData(
            "method 2 needs a sampled series".into(),
        ));
    }
    let start = transient_cut(times, trap_frequency);
    let t = &times[start..];
    let y = &values[start..];
    let omega = R::lit(2.0) * trap_frequency;
    let span = *t.last().unwrap() - t[0];
    if span * omega < R::lit(5.0) * R::lit(2.0) * R::PI() {
        return Err(Error::InsufficientData(format!(
            "method 2 wants >= 5 oscillation periods of the squared signal, got {:.2}",
            (span * omega / (R::lit(2.0) * R::PI())).to_f64_lossy()
        )));
    }

    let weights: Option<Vec<R>> = errors.map(|e| {
        e[start..]
            .iter()
            .map(|&s| {
                if s > R::zero() {
                    (s * s).recip()
                } else {
                    R::one()
                }
            })
            .collect()
    });
    let w = weights.as_deref();

    let sine = sinusoid_fit_fixed_freq(t, y, w, omega)?;
    let residual: Vec<R> = t
        .iter()
        .zip(y)
        .map(|(&ti, &yi)| yi - sine.amplitude * (omega * ti + sine.phase).sin())
        .collect();
    let line = linear_fit(t, &residual, w)?;

    let mut diagnostics = FitDiagnostics::new("method2");
    diagnostics.n_points = t.len();
    diagnostics.residual_rms = line.residual_rms.to_f64_lossy();
    diagnostics.window = (t[0].to_f64_lossy(), t.last().unwrap().to_f64_lossy());
    diagnostics.excluded_fraction = start as f64 / times.len() as f64;
    diagnostics.weighted = w.is_some();
    diagnostics.fallback_linearized = !sine.converged;
    if !sine.converged {
        diagnostics
            .notes
            .push("phase refinement did not converge; linearized basis solution used".into());
    }
    diagnostics.notes.push(format!(
        "oscillation amplitude {:.6e}, offset {:.6e}",
        sine.amplitude.to_f64_lossy(),
        sine.offset.to_f64_lossy()
    ));
    Ok(FitResult {
        value: line.slope,
        std_error: line.var_slope.sqrt(),
        diagnostics,
    })
}

/// Friction coefficient implied by a method-2 slope on a squared-momentum
/// series: `<p^2>` of a trapped oscillation decays at `2 <rho>`, so
/// `rho = -slope / (2 mean)`.
pub fn friction_from_p2_slope<R: Real>(slope: R, mean_p2: R) -> R {
    -slope / (R::lit(2.0) * mean_p2)
}

/// Ensemble temperature `T(t) = <p^2>(t)/m` with per-bin standard errors from
/// the sub-ensemble spread (normalized units: k_B T in hbar Gamma).
pub fn ensemble_temperature<R: Real>(
    ensemble: &EnsembleResult<R>,
    mass: R,
) -> Result<TemperatureSeries<R>> {
    if ensemble.trajectory_count < 2 {
        return Err(Error::InsufficientData(
            "ensemble temperature needs >= 2 trajectories".into(),
        ));
    }
    Ok(TemperatureSeries {
        times: ensemble.times.clone(),
        temperature: ensemble.mean_p2.iter().map(|&v| v / mass).collect(),
        stderr: ensemble.stderr_p2.iter().map(|&v| v / mass).collect(),
    })
}

/// Cooling rate dT/dt of a temperature series via method 2.
pub fn cooling_rate<R: Real>(
    series: &TemperatureSeries<R>,
    trap_frequency: R,
) -> Result<FitResult<R>> {
    let have_errors = series.stderr.iter().any(|&e| e > R::zero());
    fit_method2(
        &series.times,
        &series.temperature,
        have_errors.then_some(series.stderr.as_slice()),
        trap_frequency,
    )
}

/// Cooling rate of an ensemble with the error bar estimated the way the
/// sub-ensembles see it: method 2 on the full series gives the value, the
/// spread of the same fit over the sub-ensembles gives the standard error.
pub fn cooling_rate_with_subensembles<R: Real>(
    ensemble: &EnsembleResult<R>,
    mass: R,
    trap_frequency: R,
) -> Result<FitResult<R>> {
    let series = ensemble_temperature(ensemble, mass)?;
    let mut full = cooling_rate(&series, trap_frequency)?;

    let n_sub = ensemble.sub_mean_p2.len();
    if n_sub >= 2 {
        let mut rates = Vec::with_capacity(n_sub);
        for sub in &ensemble.sub_mean_p2 {
            let temp: Vec<R> = sub.iter().map(|&v| v / mass).collect();
            let fit = fit_method2(&ensemble.times, &temp, None, trap_frequency)?;
            rates.push(fit.value);
        }
        let mean = rates.iter().fold(R::zero(), |a, &b| a + b) / R::lit(n_sub as f64);
        let var = rates
            .iter()
            .fold(R::zero(), |a, &b| a + (b - mean) * (b - mean))
            / R::lit((n_sub - 1) as f64);
        full.std_error = (var / R::lit(n_sub as f64)).sqrt();
        full.diagnostics.notes.push(format!(
            "std error from {n_sub} sub-ensembles; sub-fit mean {:.6e}",
            mean.to_f64_lossy()
        ));
    }
    Ok(full)
}

/// One `(T0, dT/dt, error)` measurement for the stationary-temperature fit.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RatePoint {
    pub initial_temperature: f64,
    pub rate: f64,
    pub error: f64,
}

/// Weighted linear fit `dT/dt = a - b T0`; the stationary temperature is the
/// root `T_s = a/b`, with Gaussian error propagation from the parameter
/// covariance. Errors if the fitted slope is not a damping (`b <= 0`).
pub fn stationary_temperature_fit(points: &[RatePoint]) -> Result<FitResult<f64>> {
    if points.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "stationary-temperature fit needs >= 2 points, got {}",
            points.len()
        )));
    }
    let x: Vec<f64> = points.iter().map(|p| p.initial_temperature).collect();
    let y: Vec<f64> = points.iter().map(|p| p.rate).collect();
    let weighted = points.iter().all(|p| p.error > 0.0);
    let w: Option<Vec<f64>> = weighted
        .then(|| points.iter().map(|p| 1.0 / (p.error * p.error)).collect());
    let fit = linear_fit(&x, &y, w.as_deref())?;

    let a = fit.intercept;
    let b = -fit.slope;
    if b <= 0.0 {
        return Err(Error::NoStableRoot);
    }
    let t_s = a / b;
    // T_s = -A/B in the (intercept A, slope B) parametrization.
    let da = -1.0 / fit.slope;
    let db = fit.intercept / (fit.slope * fit.slope);
    let var = da * da * fit.var_intercept + db * db * fit.var_slope
        + 2.0 * da * db * fit.covariance;

    let mut diagnostics = FitDiagnostics::new("linear");
    diagnostics.n_points = points.len();
    diagnostics.residual_rms = fit.residual_rms;
    diagnostics.weighted = weighted;
    diagnostics.window = (
        x.iter().copied().fold(f64::INFINITY, f64::min),
        x.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    );
    let dof = fit.dof.max(1) as f64;
    diagnostics.notes.push(format!(
        "intercept {a:.6e} K/s, slope {:.6e} 1/s, chi2/dof {:.3}",
        fit.slope,
        fit.chi2 / dof
    ));
    let all_positive = y.iter().all(|&v| v > 0.0);
    let all_negative = y.iter().all(|&v| v < 0.0);
    if all_positive || all_negative {
        diagnostics
            .notes
            .push("all rates share one sign: root extrapolated outside sampled range".into());
    }
    Ok(FitResult {
        value: t_s,
        std_error: var.max(0.0).sqrt(),
        diagnostics,
    })
}
