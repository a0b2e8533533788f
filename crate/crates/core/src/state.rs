//! Dense amplitude storage for a walker that starts at the origin.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;

use crate::analysis::DistributionSnapshot;
use crate::coin::CoinMatrix;
use crate::error::{Error, Result};
use crate::numeric::NeumaierSum;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialCondition {
    /// `(|0>|R> + i|0>|L>) / sqrt(2)`, which gives a mirror-symmetric walk.
    SymmetricOrigin,
    /// `|0>|R>`.
    RightOrigin,
    CustomOrigin { r: Complex64, l: Complex64 },
}

impl InitialCondition {
    pub const NORM_TOL: f64 = 1e-12;

    /// Chirality amplitudes at the origin.
    pub fn amplitudes(&self) -> Result<(Complex64, Complex64)> {
        match *self {
            InitialCondition::SymmetricOrigin => Ok((
                Complex64::new(FRAC_1_SQRT_2, 0.0),
                Complex64::new(0.0, FRAC_1_SQRT_2),
            )),
            InitialCondition::RightOrigin => Ok((Complex64::new(1.0, 0.0), ZERO)),
            InitialCondition::CustomOrigin { r, l } => {
                let norm_sq = r.norm_sqr() + l.norm_sqr();
                if !norm_sq.is_finite() || (norm_sq - 1.0).abs() > Self::NORM_TOL {
                    return Err(Error::InitNotNormalized { norm_sq });
                }
                Ok((r, l))
            }
        }
    }
}

/// Quantum state of the walker on sites `-t_max..=t_max`.
///
/// Sites outside the light cone and sites of the wrong parity hold exact
/// zeros. A second pair of buffers is kept for the out-of-place step.
#[derive(Debug, Clone)]
pub struct WalkerState {
    t: usize,
    t_max: usize,
    amps_r: Vec<Complex64>,
    amps_l: Vec<Complex64>,
    next_r: Vec<Complex64>,
    next_l: Vec<Complex64>,
}

impl WalkerState {
    pub fn new(init: InitialCondition, t_max: usize) -> Result<Self> {
        if t_max == 0 {
            return Err(Error::InvalidArgument("t_max must be at least 1".into()));
        }
        let (r, l) = init.amplitudes()?;
        let width = 2 * t_max + 1;
        let mut state = WalkerState {
            t: 0,
            t_max,
            amps_r: vec![ZERO; width],
            amps_l: vec![ZERO; width],
            next_r: vec![ZERO; width],
            next_l: vec![ZERO; width],
        };
        state.amps_r[t_max] = r;
        state.amps_l[t_max] = l;
        Ok(state)
    }

    /// Assembles a state at time `t` from full-width amplitude arrays.
    pub(crate) fn from_amplitudes(
        t: usize,
        t_max: usize,
        amps_r: Vec<Complex64>,
        amps_l: Vec<Complex64>,
    ) -> Self {
        debug_assert_eq!(amps_r.len(), 2 * t_max + 1);
        debug_assert_eq!(amps_l.len(), 2 * t_max + 1);
        let width = amps_r.len();
        WalkerState {
            t,
            t_max,
            amps_r,
            amps_l,
            next_r: vec![ZERO; width],
            next_l: vec![ZERO; width],
        }
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn t_max(&self) -> usize {
        self.t_max
    }

    #[inline]
    fn index(&self, n: i64) -> Option<usize> {
        let i = n + self.t_max as i64;
        (0..self.amps_r.len() as i64).contains(&i).then_some(i as usize)
    }

    /// `a_{n,R}`; zero outside the lattice.
    pub fn amp_r(&self, n: i64) -> Complex64 {
        self.index(n).map_or(ZERO, |i| self.amps_r[i])
    }

    pub fn amp_l(&self, n: i64) -> Complex64 {
        self.index(n).map_or(ZERO, |i| self.amps_l[i])
    }

    /// Raw arrays indexed by `n + t_max`.
    pub fn amplitudes(&self) -> (&[Complex64], &[Complex64]) {
        (&self.amps_r, &self.amps_l)
    }

    pub(crate) fn amplitudes_mut(&mut self) -> (&mut [Complex64], &mut [Complex64]) {
        (&mut self.amps_r, &mut self.amps_l)
    }

    /// Index range of the current light cone `[-t, t]`.
    #[inline]
    fn cone(&self) -> std::ops::RangeInclusive<usize> {
        (self.t_max - self.t)..=(self.t_max + self.t)
    }

    pub fn norm_sqr(&self) -> f64 {
        let mut acc = NeumaierSum::default();
        for i in self.cone().step_by(2) {
            acc.add(self.amps_r[i].norm_sqr() + self.amps_l[i].norm_sqr());
        }
        acc.total()
    }

    /// Weight of the `|R>` chirality summed over the lattice.
    pub fn right_weight(&self) -> f64 {
        let mut acc = NeumaierSum::default();
        for i in self.cone().step_by(2) {
            acc.add(self.amps_r[i].norm_sqr());
        }
        acc.total()
    }

    /// One walk step: apply `coin` to every site, then shift R right and L left.
    pub fn step(&mut self, coin: &CoinMatrix) -> Result<()> {
        if self.t + 1 > self.t_max {
            return Err(Error::CapacityExceeded { t_max: self.t_max });
        }
        let [[m00, m01], [m10, m11]] = coin.rows();
        let lo = self.t_max - self.t;
        let hi = self.t_max + self.t;
        // Occupied sites at time t are lo, lo+2, ..., hi. New R lands on i+1,
        // new L on i-1; the two extreme new sites each receive one component.
        self.next_r[lo - 1] = ZERO;
        self.next_l[hi + 1] = ZERO;
        for i in (lo..=hi).step_by(2) {
            let r = self.amps_r[i];
            let l = self.amps_l[i];
            self.next_r[i + 1] = m00 * r + m01 * l;
            self.next_l[i - 1] = m10 * r + m11 * l;
        }
        std::mem::swap(&mut self.amps_r, &mut self.next_r);
        std::mem::swap(&mut self.amps_l, &mut self.next_l);
        self.t += 1;
        Ok(())
    }

    /// `(sum n P_t(n), sum n^2 P_t(n))` with compensated summation.
    pub fn moments(&self) -> (f64, f64) {
        let mut first = NeumaierSum::default();
        let mut second = NeumaierSum::default();
        let origin = self.t_max as i64;
        for i in self.cone().step_by(2) {
            let p = self.amps_r[i].norm_sqr() + self.amps_l[i].norm_sqr();
            let n = (i as i64 - origin) as f64;
            first.add(n * p);
            second.add(n * n * p);
        }
        (first.total(), second.total())
    }

    /// Position distribution `P_t(n) = |a_{n,R}|^2 + |a_{n,L}|^2`.
    pub fn distribution(&self) -> DistributionSnapshot {
        let probs = self
            .amps_r
            .iter()
            .zip(&self.amps_l)
            .map(|(r, l)| r.norm_sqr() + l.norm_sqr())
            .collect();
        DistributionSnapshot::new(self.t, self.t_max, probs)
    }

    /// Adds `P_t(n)` into `acc`, which covers the light cone: `acc[n + t]`
    /// for `n` in `-t..=t`.
    pub(crate) fn add_distribution_into(&self, acc: &mut [f64]) {
        debug_assert_eq!(acc.len(), 2 * self.t + 1);
        let lo = self.t_max - self.t;
        for i in self.cone().step_by(2) {
            acc[i - lo] += self.amps_r[i].norm_sqr() + self.amps_l[i].norm_sqr();
        }
    }
}

/// Fresh state at `t = 0`.
pub fn new_state(init: InitialCondition, t_max: usize) -> Result<WalkerState> {
    WalkerState::new(init, t_max)
}

/// Position distribution of `state`.
pub fn distribution(state: &WalkerState) -> DistributionSnapshot {
    state.distribution()
}

/// Advances `state` by one step under `coin`.
pub fn step(state: &mut WalkerState, coin: &CoinMatrix) -> Result<()> {
    state.step(coin)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coin::{compose_coin, hadamard_coin, su2_exponential};
    use crate::noise::NoiseSample;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn evolve(init: InitialCondition, steps: usize) -> WalkerState {
        let mut s = WalkerState::new(init, steps.max(1)).unwrap();
        for _ in 0..steps {
            s.step(&hadamard_coin()).unwrap();
        }
        s
    }

    #[test]
    fn initial_conditions() {
        let s = new_state(InitialCondition::RightOrigin, 3).unwrap();
        assert_eq!(s.amp_r(0), c(1.0, 0.0));
        assert_eq!(s.amp_l(0), ZERO);
        assert_eq!(s.norm_sqr(), 1.0);

        let s = new_state(InitialCondition::SymmetricOrigin, 3).unwrap();
        assert_eq!(s.amp_r(0), c(FRAC_1_SQRT_2, 0.0));
        assert_eq!(s.amp_l(0), c(0.0, FRAC_1_SQRT_2));

        let custom = InitialCondition::CustomOrigin {
            r: c(1.0, 0.0),
            l: ZERO,
        };
        let a = new_state(custom, 4).unwrap();
        let b = new_state(InitialCondition::RightOrigin, 4).unwrap();
        assert_eq!(a.amplitudes(), b.amplitudes());
    }

    #[test]
    fn rejects_bad_custom_norm_and_zero_capacity() {
        let bad = InitialCondition::CustomOrigin {
            r: c(1.0, 0.0),
            l: c(1e-5, 0.0),
        };
        assert!(matches!(
            new_state(bad, 2),
            Err(Error::InitNotNormalized { .. })
        ));
        assert!(new_state(InitialCondition::RightOrigin, 0).is_err());
    }

    #[test]
    fn first_three_hadamard_steps() {
        let s = evolve(InitialCondition::RightOrigin, 1);
        assert!((s.amp_r(1) - c(FRAC_1_SQRT_2, 0.0)).norm() < 1e-15);
        assert!((s.amp_l(-1) - c(FRAC_1_SQRT_2, 0.0)).norm() < 1e-15);
        let d = s.distribution();
        assert!((d.prob(1) - 0.5).abs() < 1e-15 && (d.prob(-1) - 0.5).abs() < 1e-15);

        let d = evolve(InitialCondition::RightOrigin, 2).distribution();
        for (n, p) in [(2, 0.25), (0, 0.5), (-2, 0.25), (1, 0.0), (-1, 0.0)] {
            assert!((d.prob(n) - p).abs() < 1e-15, "n={n}");
        }

        let d = evolve(InitialCondition::RightOrigin, 3).distribution();
        for (n, p) in [(3, 0.125), (1, 0.625), (-1, 0.125), (-3, 0.125)] {
            assert!((d.prob(n) - p).abs() < 1e-15, "n={n}");
        }
    }

    #[test]
    fn capacity_is_enforced() {
        let mut s = new_state(InitialCondition::RightOrigin, 2).unwrap();
        s.step(&hadamard_coin()).unwrap();
        s.step(&hadamard_coin()).unwrap();
        assert!(matches!(
            s.step(&hadamard_coin()),
            Err(Error::CapacityExceeded { t_max: 2 })
        ));
        assert_eq!(s.t(), 2);
    }

    #[test]
    fn symmetric_start_stays_symmetric() {
        let d = evolve(InitialCondition::SymmetricOrigin, 250).distribution();
        let worst = (1..=250).map(|n| (d.prob(n) - d.prob(-n)).abs()).fold(0.0, f64::max);
        assert!(worst < 1e-10, "{worst}");
    }

    #[test]
    fn distribution_mass_matches_norm() {
        let mut s = new_state(InitialCondition::SymmetricOrigin, 40).unwrap();
        for k in 0..40 {
            let noise = NoiseSample::new(0.1 * k as f64, -0.3, 0.05 * k as f64);
            s.step(&compose_coin(&su2_exponential(&noise))).unwrap();
        }
        let d = s.distribution();
        assert!((d.total_mass() - s.norm_sqr()).abs() < 1e-14);
        assert!(d.probs().iter().all(|&p| p >= 0.0));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(32))]
            #[test]
            fn norm_light_cone_and_parity(
                samples in proptest::collection::vec((-3.0..3.0f64, -3.0..3.0f64, -3.0..3.0f64), 1..120),
                symmetric in any::<bool>(),
            ) {
                let init = if symmetric { InitialCondition::SymmetricOrigin } else { InitialCondition::RightOrigin };
                let t_max = samples.len();
                let mut s = new_state(init, t_max).unwrap();
                for &(a, b, c3) in &samples {
                    s.step(&compose_coin(&su2_exponential(&NoiseSample::new(a, b, c3)))).unwrap();
                    prop_assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
                    let t = s.t() as i64;
                    for n in -(t_max as i64)..=(t_max as i64) {
                        if n.abs() > t || (n + t) % 2 != 0 {
                            prop_assert_eq!(s.amp_r(n), ZERO);
                            prop_assert_eq!(s.amp_l(n), ZERO);
                        }
                    }
                }
            }
        }
    }
}
