//! Deterministic parallel ensembles of walker trajectories.
//!
//! Runs are grouped into fixed blocks of [`BLOCK_RUNS`] consecutive run
//! indices. Each block is summed in run order by one worker, and finished
//! blocks are folded into the total strictly in block order. The
//! floating-point result therefore depends only on the run count, not on
//! the number of workers or on scheduling.

use std::collections::BTreeMap;
use std::sync::Mutex;

use crate::analysis::{DistributionSnapshot, EnsembleAccumulator, MomentSeries};
use crate::baselines::{decoherent_step, DecoherenceConfig};
use crate::coin::hadamard_coin;
use crate::error::{Error, Result};
use crate::noise::{derive_run_stream, noisy_coin, NoiseConfig};
use crate::state::{InitialCondition, WalkerState};

pub const BLOCK_RUNS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Dynamics {
    Noiseless,
    Noisy(NoiseConfig),
    Decoherent(DecoherenceConfig),
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleSpec {
    pub init: InitialCondition,
    pub t_max: usize,
    pub dynamics: Dynamics,
    pub runs: usize,
    pub master_seed: u64,
    /// Times at which full distributions are kept.
    pub snapshot_times: Vec<usize>,
    /// Moments are recorded at every multiple of this and at `t_max`.
    pub moment_stride: usize,
    pub workers: usize,
}

#[derive(Debug, Clone)]
pub struct EnsembleResult {
    pub moments: MomentSeries,
    pub snapshots: Vec<DistributionSnapshot>,
    pub runs: usize,
}

/// Times at which moments are recorded.
pub fn moment_times(t_max: usize, stride: usize) -> Vec<usize> {
    let mut times: Vec<usize> = (0..=t_max).step_by(stride.max(1)).collect();
    if times.last() != Some(&t_max) {
        times.push(t_max);
    }
    times
}

struct BlockSums {
    first: Vec<f64>,
    second: Vec<f64>,
    snaps: Vec<EnsembleAccumulator>,
}

impl BlockSums {
    fn new(n_times: usize, snapshot_times: &[usize]) -> Self {
        Self {
            first: vec![0.0; n_times],
            second: vec![0.0; n_times],
            snaps: snapshot_times
                .iter()
                .map(|&t| EnsembleAccumulator::new(t, t))
                .collect(),
        }
    }

    fn merge(&mut self, other: &BlockSums) -> Result<()> {
        for (a, b) in self.first.iter_mut().zip(&other.first) {
            *a += b;
        }
        for (a, b) in self.second.iter_mut().zip(&other.second) {
            *a += b;
        }
        for (a, b) in self.snaps.iter_mut().zip(&other.snaps) {
            a.merge(b)?;
        }
        Ok(())
    }
}

/// Folds blocks into the total in block-index order.
struct OrderedReducer {
    next: usize,
    pending: BTreeMap<usize, BlockSums>,
    total: BlockSums,
}

impl OrderedReducer {
    fn submit(&mut self, index: usize, block: BlockSums) -> Result<()> {
        self.pending.insert(index, block);
        while let Some(block) = self.pending.remove(&self.next) {
            self.total.merge(&block)?;
            self.next += 1;
        }
        Ok(())
    }
}

fn run_trajectory(spec: &EnsembleSpec, run: u64, times: &[usize], sums: &mut BlockSums) -> Result<()> {
    let mut state = WalkerState::new(spec.init, spec.t_max)?;
    let mut stream = derive_run_stream(spec.master_seed, run);
    let hadamard = hadamard_coin();
    let mut next_time = 0;
    let mut next_snap = 0;
    for t in 0..=spec.t_max {
        if t > 0 {
            match &spec.dynamics {
                Dynamics::Noiseless => state.step(&hadamard)?,
                Dynamics::Noisy(cfg) => state.step(&noisy_coin(&mut stream, cfg))?,
                Dynamics::Decoherent(cfg) => decoherent_step(&mut state, &mut stream, cfg)?,
            }
        }
        if times.get(next_time) == Some(&t) {
            let (m1, m2) = state.moments();
            sums.first[next_time] += m1;
            sums.second[next_time] += m2;
            next_time += 1;
        }
        while spec.snapshot_times.get(next_snap) == Some(&t) {
            let acc = &mut sums.snaps[next_snap];
            state.add_distribution_into(acc.raw_sums_mut());
            acc.bump(1);
            next_snap += 1;
        }
    }
    Ok(())
}

pub fn run_ensemble(spec: &EnsembleSpec) -> Result<EnsembleResult> {
    if spec.runs == 0 || spec.workers == 0 {
        return Err(Error::InvalidArgument("ensemble needs at least one run and one worker".into()));
    }
    if spec.snapshot_times.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidArgument("snapshot times must be sorted".into()));
    }
    if let Some(&t) = spec.snapshot_times.iter().find(|&&t| t > spec.t_max) {
        return Err(Error::InvalidArgument(format!("snapshot time {t} exceeds t_max {}", spec.t_max)));
    }
    let times = moment_times(spec.t_max, spec.moment_stride);
    let n_blocks = spec.runs.div_ceil(BLOCK_RUNS);
    let reducer = Mutex::new(OrderedReducer {
        next: 0,
        pending: BTreeMap::new(),
        total: BlockSums::new(times.len(), &spec.snapshot_times),
    });
    let workers = spec.workers.min(n_blocks);

    let work = |worker: usize| -> Result<()> {
        for block in (worker..n_blocks).step_by(workers) {
            let mut sums = BlockSums::new(times.len(), &spec.snapshot_times);
            let first = block * BLOCK_RUNS;
            let last = (first + BLOCK_RUNS).min(spec.runs);
            for run in first..last {
                run_trajectory(spec, run as u64, &times, &mut sums)?;
            }
            reducer
                .lock()
                .expect("reducer lock poisoned")
                .submit(block, sums)?;
        }
        Ok(())
    };

    if workers == 1 {
        work(0)?;
    } else {
        std::thread::scope(|scope| {
            let handles: Vec<_> = (0..workers).map(|w| scope.spawn(move || work(w))).collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("ensemble worker panicked"))
                .collect::<Result<Vec<()>>>()
        })?;
    }

    let reducer = reducer.into_inner().expect("reducer lock poisoned");
    debug_assert_eq!(reducer.next, n_blocks);
    let total = reducer.total;
    let inv = 1.0 / spec.runs as f64;
    let mean = total.first.iter().map(|x| x * inv).collect();
    let second = total.second.iter().map(|x| x * inv).collect();
    let snapshots = total
        .snaps
        .iter()
        .map(EnsembleAccumulator::finish)
        .collect::<Result<Vec<_>>>()?;
    Ok(EnsembleResult {
        moments: MomentSeries::new(times, mean, second)?,
        snapshots,
        runs: spec.runs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::moments;

    fn spec(workers: usize, runs: usize) -> EnsembleSpec {
        EnsembleSpec {
            init: InitialCondition::RightOrigin,
            t_max: 120,
            dynamics: Dynamics::Noisy(NoiseConfig::new(0.2, 5).unwrap()),
            runs,
            master_seed: 5,
            snapshot_times: vec![0, 50, 120],
            moment_stride: 7,
            workers,
        }
    }

    #[test]
    fn moment_schedule_ends_at_t_max() {
        assert_eq!(moment_times(10, 4), vec![0, 4, 8, 10]);
        assert_eq!(moment_times(8, 4), vec![0, 4, 8]);
        assert_eq!(moment_times(3, 1), vec![0, 1, 2, 3]);
    }

    #[test]
    fn worker_count_does_not_change_bits() {
        let a = run_ensemble(&spec(1, 37)).unwrap();
        for w in [2, 3, 8] {
            let b = run_ensemble(&spec(w, 37)).unwrap();
            assert_eq!(a.moments, b.moments);
            assert_eq!(a.snapshots, b.snapshots);
        }
    }

    #[test]
    fn snapshots_agree_with_moment_series() {
        let r = run_ensemble(&spec(2, 20)).unwrap();
        assert_eq!(r.snapshots.len(), 3);
        let last = &r.snapshots[2];
        assert_eq!(last.runs_averaged(), 20);
        assert!((last.total_mass() - 1.0).abs() < 1e-12);
        let (m, s) = moments(last);
        let mm = r.moments.mean().last().unwrap();
        let ss = r.moments.second().last().unwrap();
        assert!((m - mm).abs() < 1e-9 && (s - ss).abs() < 1e-7 * ss);
        assert_eq!(r.snapshots[0].prob(0), 1.0);
    }

    #[test]
    fn zero_noise_matches_noiseless_bit_for_bit() {
        let mut a = spec(1, 3);
        a.dynamics = Dynamics::Noisy(NoiseConfig::new(0.0, 5).unwrap());
        let mut b = spec(1, 3);
        b.dynamics = Dynamics::Noiseless;
        let (ra, rb) = (run_ensemble(&a).unwrap(), run_ensemble(&b).unwrap());
        assert_eq!(ra.moments, rb.moments);
        assert_eq!(ra.snapshots, rb.snapshots);
    }

    #[test]
    fn rejects_bad_specs() {
        let mut s = spec(1, 0);
        assert!(run_ensemble(&s).is_err());
        s.runs = 2;
        s.snapshot_times = vec![500];
        assert!(run_ensemble(&s).is_err());
    }
}
