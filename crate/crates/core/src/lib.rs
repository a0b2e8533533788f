//! Simulation of the one-dimensional discrete Hadamard quantum walk with
//! isotropic unitary noise on the coin, plus the classical and decohered
//! reference walks and the analysis that extracts crossover times.

pub mod analysis;
pub mod baselines;
pub mod coin;
pub mod config;
pub mod ensemble;
pub mod error;
pub mod experiment;
pub mod noise;
mod numeric;
pub mod output;
pub mod state;

pub use analysis::{
    accumulate_ensemble, crossover_t1, crossover_t2, fit_linear_slope, fit_power_law,
    fit_saturation, fit_sqrt_tail, moments, DistributionSnapshot, FitResult, Moment,
    MomentSeries, TimeWindow,
};
pub use baselines::{
    analytic_kp, analytic_np, classical_distribution, decoherent_step, gaussian_density,
    path_sum_oracle, DecoherenceConfig,
};
pub use coin::{compose_coin, hadamard_coin, su2_exponential, CoinMatrix};
pub use config::{ExperimentConfig, Mode, Preset};
pub use error::{Error, Result};
pub use noise::{derive_run_stream, draw_sample, noisy_coin, NoiseConfig, NoiseSample, RunStream};
pub use state::{distribution, new_state, step, InitialCondition, WalkerState};
