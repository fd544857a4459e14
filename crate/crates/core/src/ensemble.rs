//! Parallel trajectory ensembles with order-independent statistics.
//!
//! Trajectories are independent work items; each owns its RNG stream, derived
//! from `(master_seed, pair index)`. Reduction into per-time-bin sums happens
//! in a fixed order regardless of how many worker threads rayon schedules:
//! work is split into chunks that never straddle a sub-ensemble, chunk
//! results are collected in index order and folded sequentially. Ensemble
//! statistics are therefore bit-identical for any worker count.

use crate::error::Result;
use crate::field::{AtomFieldCoupling, FieldState, HarmonicTrap, ModeGrid};
use crate::real::Real;
use crate::rng::StreamFactory;
use crate::sde::{propagate, sample_thermal_state, RunConfig};
use rayon::prelude::*;

/// Per-time-bin ensemble statistics of the squared momentum, plus the
/// sub-ensemble breakdown used for error estimation.
#[derive(Debug, Clone)]
pub struct EnsembleResult<R: Real> {
    /// Sample times, 1/Gamma.
    pub times: Vec<R>,
    /// Ensemble mean momentum squared per bin, (hbar k0)^2.
    pub mean_p2: Vec<R>,
    /// Standard error of `mean_p2` from the sub-ensemble spread.
    pub stderr_p2: Vec<R>,
    /// Per-sub-ensemble means, `sub_ensembles x bins`.
    pub sub_mean_p2: Vec<Vec<R>>,
    /// Initial temperature actually realized by the sampled cloud,
    /// k_B T / (hbar Gamma).
    pub measured_initial_temperature: R,
    pub trajectory_count: usize,
    pub aborted: usize,
}

struct ChunkSums<R> {
    sub: usize,
    p2: Vec<R>,
    count: usize,
    aborted: usize,
}

/// Runs `config.trajectory_count` trajectories from thermal initial
/// conditions at `config.initial_temperature` and reduces them into
/// `<p^2>(t)` statistics.
pub fn run_ensemble<R: Real>(
    grid: &ModeGrid<R>,
    coupling: AtomFieldCoupling<R>,
    trap: HarmonicTrap<R>,
    mass: R,
    config: &RunConfig<R>,
    pump: &FieldState<R>,
) -> Result<EnsembleResult<R>> {
    config.validate(grid)?;
    let bins = config.sample_count();
    let n = config.trajectory_count;
    let n_sub = config.sub_ensembles;
    let sub_size = n / n_sub;
    let factory = StreamFactory::new(config.master_seed);

    // Chunks of work that stay inside one sub-ensemble.
    const CHUNK: usize = 64;
    let mut chunks = Vec::new();
    for sub in 0..n_sub {
        let lo = sub * sub_size;
        let hi = lo + sub_size;
        let mut start = lo;
        while start < hi {
            let end = (start + CHUNK).min(hi);
            chunks.push((sub, start, end));
            start = end;
        }
    }

    let n_steps = config.step_count();
    let partials: Vec<ChunkSums<R>> = chunks
        .par_iter()
        .map(|&(sub, start, end)| {
            let mut sums = vec![R::zero(); bins];
            let mut count = 0usize;
            let mut aborted = 0usize;
            for idx in start..end {
                let (stream, flip) = if config.antithetic {
                    ((idx / 2) as u64, idx % 2 == 1)
                } else {
                    (idx as u64, false)
                };
                let mut rng = factory.stream(stream, flip);
                let mut state =
                    sample_thermal_state(&trap, mass, config.initial_temperature, pump, &mut rng);
                let mut local = vec![R::zero(); bins];
                let outcome = propagate(
                    grid,
                    coupling,
                    trap,
                    mass,
                    config.dt,
                    n_steps,
                    config.record_stride,
                    config.noise_enabled,
                    &mut state,
                    &mut rng,
                    |i, s| local[i] = s.momentum * s.momentum,
                );
                match outcome {
                    Ok(()) => {
                        for (acc, v) in sums.iter_mut().zip(&local) {
                            *acc += *v;
                        }
                        count += 1;
                    }
                    Err(_) => aborted += 1,
                }
            }
            ChunkSums {
                sub,
                p2: sums,
                count,
                aborted,
            }
        })
        .collect();

    // Fixed-order fold per sub-ensemble.
    let mut sub_sums = vec![vec![R::zero(); bins]; n_sub];
    let mut sub_counts = vec![0usize; n_sub];
    let mut aborted = 0usize;
    for part in &partials {
        for (acc, v) in sub_sums[part.sub].iter_mut().zip(&part.p2) {
            *acc += *v;
        }
        sub_counts[part.sub] += part.count;
        aborted += part.aborted;
    }

    let mut total = vec![R::zero(); bins];
    for sums in &sub_sums {
        for (acc, v) in total.iter_mut().zip(sums) {
            *acc += *v;
        }
    }
    let completed: usize = sub_counts.iter().sum();
    let inv_total = R::lit((completed.max(1)) as f64).recip();
    let mean_p2: Vec<R> = total.iter().map(|&s| s * inv_total).collect();

    let sub_mean_p2: Vec<Vec<R>> = sub_sums
        .iter()
        .zip(&sub_counts)
        .map(|(sums, &c)| {
            let inv = R::lit(c.max(1) as f64).recip();
            sums.iter().map(|&s| s * inv).collect()
        })
        .collect();

    let stderr_p2 = if n_sub >= 2 {
        let inv_sub = R::lit(n_sub as f64).recip();
        let denom = R::lit((n_sub - 1) as f64).recip();
        (0..bins)
            .map(|i| {
                let mean = mean_p2[i];
                let var = sub_mean_p2
                    .iter()
                    .fold(R::zero(), |acc, s| acc + (s[i] - mean) * (s[i] - mean))
                    * denom;
                (var * inv_sub).sqrt()
            })
            .collect()
    } else {
        vec![R::zero(); bins]
    };

    let dt_rec = config.dt * R::lit(config.record_stride as f64);
    let times = (0..bins).map(|i| dt_rec * R::lit(i as f64)).collect();
    let measured_initial_temperature = mean_p2[0] / mass;

    Ok(EnsembleResult {
        times,
        mean_p2,
        stderr_p2,
        sub_mean_p2,
        measured_initial_temperature,
        trajectory_count: completed,
        aborted,
    })
}
