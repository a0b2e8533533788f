//! Reference walks: the classical random walk and its Gaussian limit, the
//! walk with a randomly measured coin, and a brute-force path sum.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::analysis::DistributionSnapshot;
use crate::coin::{hadamard_coin, CoinMatrix};
use crate::error::{Error, Result};
use crate::noise::RunStream;
use crate::numeric::NeumaierSum;
use crate::state::{InitialCondition, WalkerState};

/// Exact binomial distribution of a fair `+-1` walk after `t` steps.
///
/// Log-weights are built outward from the central term by the ratio
/// `C(t, k+1) / C(t, k) = (t - k) / (k + 1)` and normalized at the end, so
/// nothing overflows for large `t`.
pub fn classical_distribution(t: usize) -> DistributionSnapshot {
    let width = 2 * t + 1;
    let mut probs = vec![0.0; width];
    let mut log_w = vec![0.0f64; t + 1];
    let center = t / 2;
    for k in center..t {
        log_w[k + 1] = log_w[k] + ((t - k) as f64).ln() - ((k + 1) as f64).ln();
    }
    for k in (1..=center).rev() {
        // C(t, k-1) / C(t, k) = k / (t - k + 1)
        log_w[k - 1] = log_w[k] + (k as f64).ln() - ((t - k + 1) as f64).ln();
    }
    let weights: Vec<f64> = log_w.iter().map(|l| l.exp()).collect();
    let mut total = NeumaierSum::default();
    for &w in &weights {
        total.add(w);
    }
    let norm = total.total();
    // k right-steps puts the walker at n = 2k - t, i.e. index 2k.
    for (k, w) in weights.iter().enumerate() {
        probs[2 * k] = w / norm;
    }
    DistributionSnapshot::new(t, t, probs)
}

/// Classical walk evolved by `P_{t+1}(n) = (P_t(n-1) + P_t(n+1)) / 2`.
#[derive(Debug, Clone)]
pub struct ClassicalWalk {
    t: usize,
    t_max: usize,
    probs: Vec<f64>,
    next: Vec<f64>,
}

impl ClassicalWalk {
    pub fn new(t_max: usize) -> Self {
        let mut probs = vec![0.0; 2 * t_max + 1];
        probs[t_max] = 1.0;
        Self {
            t: 0,
            t_max,
            next: probs.clone(),
            probs,
        }
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn step(&mut self) -> Result<()> {
        if self.t + 1 > self.t_max {
            return Err(Error::CapacityExceeded { t_max: self.t_max });
        }
        let lo = self.t_max - self.t - 1;
        let hi = self.t_max + self.t + 1;
        for i in lo..=hi {
            let left = if i > 0 { self.probs[i - 1] } else { 0.0 };
            let right = self.probs.get(i + 1).copied().unwrap_or(0.0);
            self.next[i] = 0.5 * (left + right);
        }
        std::mem::swap(&mut self.probs, &mut self.next);
        self.t += 1;
        Ok(())
    }

    pub fn moments(&self) -> (f64, f64) {
        let mut first = NeumaierSum::default();
        let mut second = NeumaierSum::default();
        let lo = self.t_max - self.t;
        for i in lo..=self.t_max + self.t {
            let n = i as f64 - self.t_max as f64;
            first.add(n * self.probs[i]);
            second.add(n * n * self.probs[i]);
        }
        (first.total(), second.total())
    }
}

/// Solution of the diffusion equation for a point source at the origin.
pub fn gaussian_density(n: f64, t: f64, d: f64) -> Result<f64> {
    if !(t > 0.0 && d > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "gaussian density needs t > 0 and D > 0, got t = {t}, D = {d}"
        )));
    }
    Ok((-n * n / (4.0 * d * t)).exp() / (4.0 * PI * d * t).sqrt())
}

/// Probability per step that the chirality qubit is measured.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecoherenceConfig {
    p: f64,
}

impl DecoherenceConfig {
    pub fn new(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidArgument(format!(
                "measurement probability must lie in [0, 1], got {p}"
            )));
        }
        Ok(Self { p })
    }

    pub fn p(&self) -> f64 {
        self.p
    }
}

/// One Hadamard step followed, with probability `p`, by a projective
/// measurement of the chirality over the whole lattice.
///
/// Averaging trajectories reproduces the map with Kraus operators
/// `sqrt(p)|R><R|`, `sqrt(p)|L><L|`, `sqrt(1-p) I`.
pub fn decoherent_step(
    state: &mut WalkerState,
    stream: &mut RunStream,
    config: &DecoherenceConfig,
) -> Result<()> {
    state.step(&hadamard_coin())?;
    if config.p > 0.0 && stream.uniform() < config.p {
        let right = state.right_weight();
        let total = state.norm_sqr();
        let keep_right = stream.uniform() * total < right;
        let weight = if keep_right { right } else { total - right };
        let scale = 1.0 / weight.sqrt();
        let (amps_r, amps_l) = state.amplitudes_mut();
        let (keep, drop) = if keep_right {
            (amps_r, amps_l)
        } else {
            (amps_l, amps_r)
        };
        keep.iter_mut().for_each(|a| *a *= scale);
        drop.iter_mut().for_each(|a| *a = Complex64::new(0.0, 0.0));
    }
    Ok(())
}

fn check_p(p: f64) -> Result<()> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "closed form needs 0 < p <= 1, got {p}"
        )));
    }
    Ok(())
}

/// Long-time mean position of the measured-coin walk started in `|0>|R>`:
/// `(1-p)^2 / (p (2-p))`.
pub fn analytic_np(p: f64) -> Result<f64> {
    check_p(p)?;
    Ok((1.0 - p).powi(2) / (p * (2.0 - p)))
}

/// Diffusion prefactor `K(p)` in `sigma_p(t) = K(p) sqrt(t)`.
pub fn analytic_kp(p: f64) -> Result<f64> {
    check_p(p)?;
    Ok((1.0 + 2.0 * (1.0 - p).powi(2) / (p * (2.0 - p))).sqrt())
}

pub const PATH_SUM_MAX_STEPS: usize = 14;

/// Amplitudes after `coins.len()` steps, by explicit summation over every
/// chirality history. Cost grows as `2^t`; test use only.
pub fn path_sum_oracle(init: InitialCondition, coins: &[CoinMatrix]) -> Result<WalkerState> {
    let steps = coins.len();
    if steps > PATH_SUM_MAX_STEPS {
        return Err(Error::OracleTooLong {
            steps,
            max: PATH_SUM_MAX_STEPS,
        });
    }
    let (c_r, c_l) = init.amplitudes()?;
    let t_max = steps.max(1);
    let width = 2 * t_max + 1;
    let mut amps = [
        vec![Complex64::new(0.0, 0.0); width],
        vec![Complex64::new(0.0, 0.0); width],
    ];
    // chirality 0 = R (moves +1), 1 = L (moves -1)
    for (start, c0) in [(0usize, c_r), (1usize, c_l)] {
        for history in 0u32..(1u32 << steps) {
            let mut amp = c0;
            let mut chirality = start;
            let mut pos = t_max as i64;
            for (j, coin) in coins.iter().enumerate() {
                let next = ((history >> j) & 1) as usize;
                amp *= coin.get(next, chirality);
                pos += if next == 0 { 1 } else { -1 };
                chirality = next;
            }
            amps[chirality][pos as usize] += amp;
        }
    }
    let [amps_r, amps_l] = amps;
    Ok(WalkerState::from_amplitudes(steps, t_max, amps_r, amps_l))
}
