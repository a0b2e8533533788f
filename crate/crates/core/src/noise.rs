//! Isotropic Gaussian unitary noise on the coin and the per-run random streams.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::coin::{compose_coin, hadamard_coin, su2_exponential, CoinMatrix};
use crate::error::{Error, Result};

/// Pauli coefficients `(a1, a2, a3)` of one noise generator.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NoiseSample {
    pub alpha1: f64,
    pub alpha2: f64,
    pub alpha3: f64,
}

impl NoiseSample {
    pub const fn new(alpha1: f64, alpha2: f64, alpha3: f64) -> Self {
        Self {
            alpha1,
            alpha2,
            alpha3,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.alpha1.is_finite() && self.alpha2.is_finite() && self.alpha3.is_finite()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseConfig {
    alpha: f64,
    master_seed: u64,
}

impl NoiseConfig {
    pub fn new(alpha: f64, master_seed: u64) -> Result<Self> {
        if !(alpha.is_finite() && alpha >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "noise level must be finite and non-negative, got {alpha}"
            )));
        }
        Ok(Self { alpha, master_seed })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    /// Stream for trajectory `run_index` under this config's seed.
    pub fn run_stream(&self, run_index: u64) -> RunStream {
        derive_run_stream(self.master_seed, run_index)
    }
}

/// Random stream owned by a single trajectory.
///
/// ChaCha8 keyed by the master seed, with the run index as the stream id, so
/// each run's draws are fixed regardless of how runs are scheduled.
#[derive(Debug, Clone)]
pub struct RunStream {
    rng: ChaCha8Rng,
}

impl RunStream {
    pub fn standard_normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }
}

pub fn derive_run_stream(master_seed: u64, run_index: u64) -> RunStream {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(run_index);
    RunStream { rng }
}

/// Three independent `N(0, alpha^2)` coefficients.
pub fn draw_sample(stream: &mut RunStream, config: &NoiseConfig) -> NoiseSample {
    if config.alpha == 0.0 {
        return NoiseSample::default();
    }
    let a = config.alpha;
    NoiseSample::new(
        a * stream.standard_normal(),
        a * stream.standard_normal(),
        a * stream.standard_normal(),
    )
}

/// `H exp(i a(t))` for a fresh draw. With `alpha = 0` this is exactly `H`.
pub fn noisy_coin(stream: &mut RunStream, config: &NoiseConfig) -> CoinMatrix {
    if config.alpha == 0.0 {
        return hadamard_coin();
    }
    compose_coin(&su2_exponential(&draw_sample(stream, config)))
}
