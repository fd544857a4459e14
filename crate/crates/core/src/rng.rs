//! Deterministic random-number streams for trajectory ensembles.
//!
//! Every trajectory owns a counter-based stream derived from
//! `(master_seed, stream index)`, so ensembles are reproducible bit for bit
//! and independent of how trajectories are scheduled across threads. ChaCha8
//! is used for its `set_stream` API (2^64 independent streams per seed).
//!
//! Antithetic pairing reuses a stream: the twin draws the identical Gaussian
//! sequence with the sign flipped. Initial conditions are drawn through
//! [`TrajectoryRng::unflipped`] so a pair shares them exactly.

use crate::real::Real;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Factory for per-trajectory streams.
#[derive(Debug, Clone, Copy)]
pub struct StreamFactory {
    master_seed: u64,
}

impl StreamFactory {
    pub fn new(master_seed: u64) -> Self {
        Self { master_seed }
    }

    /// Stream for trajectory `index`; `flip` negates every Gaussian noise
    /// draw (antithetic twin).
    pub fn stream(&self, index: u64, flip: bool) -> TrajectoryRng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(index);
        TrajectoryRng { rng, flip }
    }
}

/// A single trajectory's noise source.
#[derive(Debug, Clone)]
pub struct TrajectoryRng {
    rng: ChaCha8Rng,
    flip: bool,
}

impl TrajectoryRng {
    /// Standard normal draw, negated on the antithetic twin.
    #[inline]
    pub fn normal<R: Real>(&mut self) -> R {
        let x = R::sample_normal(&mut self.rng);
        if self.flip {
            -x
        } else {
            x
        }
    }

    /// Standard normal draw that ignores the antithetic flip; used for
    /// initial conditions, which a pair shares.
    #[inline]
    pub fn unflipped<R: Real>(&mut self) -> R {
        R::sample_normal(&mut self.rng)
    }

    pub fn is_flipped(&self) -> bool {
        self.flip
    }
}
