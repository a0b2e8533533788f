//! Ensemble-averaged distributions, moment series and the asymptotic fits
//! used to extract crossover times.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::numeric::{compensated_sum, NeumaierSum};

/// `P_t(n)` on sites `-half_width..=half_width`, possibly averaged over runs.
#[derive(Debug, Clone, PartialEq)]
pub struct DistributionSnapshot {
    t: usize,
    half_width: usize,
    probs: Vec<f64>,
    runs_averaged: usize,
}

impl DistributionSnapshot {
    pub const MASS_TOL: f64 = 1e-9;

    /// Single-run snapshot. `probs` must have length `2 * half_width + 1`.
    pub fn new(t: usize, half_width: usize, probs: Vec<f64>) -> Self {
        assert_eq!(probs.len(), 2 * half_width + 1, "snapshot width mismatch");
        Self {
            t,
            half_width,
            probs,
            runs_averaged: 1,
        }
    }

    pub(crate) fn averaged(t: usize, half_width: usize, probs: Vec<f64>, runs: usize) -> Self {
        let mut s = Self::new(t, half_width, probs);
        s.runs_averaged = runs;
        s
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn half_width(&self) -> usize {
        self.half_width
    }

    pub fn runs_averaged(&self) -> usize {
        self.runs_averaged
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, n: i64) -> f64 {
        let i = n + self.half_width as i64;
        if i < 0 || i as usize >= self.probs.len() {
            0.0
        } else {
            self.probs[i as usize]
        }
    }

    /// `(n, P(n))` over the full stored range.
    pub fn iter(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        let hw = self.half_width as i64;
        self.probs.iter().enumerate().map(move |(i, &p)| (i as i64 - hw, p))
    }

    /// `(n, P(n))` restricted to the light cone `|n| <= t`.
    pub fn support(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        let t = self.t.min(self.half_width) as i64;
        self.iter().filter(move |(n, _)| n.abs() <= t)
    }

    pub fn total_mass(&self) -> f64 {
        compensated_sum(self.probs.iter().copied())
    }

    /// Probability mass on `|n| <= radius`.
    pub fn central_mass(&self, radius: i64) -> f64 {
        compensated_sum(self.iter().filter(|(n, _)| n.abs() <= radius).map(|(_, p)| p))
    }

    pub fn max_asymmetry(&self) -> f64 {
        (1..=self.half_width as i64)
            .map(|n| (self.prob(n) - self.prob(-n)).abs())
            .fold(0.0, f64::max)
    }
}

/// First and second moments `(sum n P, sum n^2 P)` over the light cone.
pub fn moments(dist: &DistributionSnapshot) -> (f64, f64) {
    let mut first = NeumaierSum::default();
    let mut second = NeumaierSum::default();
    for (n, p) in dist.support() {
        let n = n as f64;
        first.add(n * p);
        second.add(n * n * p);
    }
    (first.total(), second.total())
}

/// Running sum of snapshots that share `t` and width.
///
/// Merging is a commutative monoid up to floating-point reassociation; the
/// experiment driver fixes the merge order so its output is reproducible.
#[derive(Debug, Clone)]
pub struct EnsembleAccumulator {
    t: usize,
    half_width: usize,
    sums: Vec<f64>,
    count: usize,
}

impl EnsembleAccumulator {
    pub fn new(t: usize, half_width: usize) -> Self {
        Self {
            t,
            half_width,
            sums: vec![0.0; 2 * half_width + 1],
            count: 0,
        }
    }

    fn check(&self, t: usize, half_width: usize) -> Result<()> {
        if t != self.t || half_width != self.half_width {
            return Err(Error::SnapshotMismatch {
                expected: self.t,
                expected_width: self.half_width,
                got: t,
                got_width: half_width,
            });
        }
        Ok(())
    }

    /// Adds one snapshot, weighted by the runs it already averages.
    pub fn push(&mut self, snap: &DistributionSnapshot) -> Result<()> {
        self.check(snap.t, snap.half_width)?;
        let w = snap.runs_averaged as f64;
        for (s, p) in self.sums.iter_mut().zip(&snap.probs) {
            *s += w * p;
        }
        self.count += snap.runs_averaged;
        Ok(())
    }

    /// Raw sums indexed by `n + half_width`.
    pub(crate) fn raw_sums_mut(&mut self) -> &mut [f64] {
        &mut self.sums
    }

    pub(crate) fn bump(&mut self, runs: usize) {
        self.count += runs;
    }

    pub fn merge(&mut self, other: &EnsembleAccumulator) -> Result<()> {
        self.check(other.t, other.half_width)?;
        for (s, o) in self.sums.iter_mut().zip(&other.sums) {
            *s += o;
        }
        self.count += other.count;
        Ok(())
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn finish(&self) -> Result<DistributionSnapshot> {
        if self.count == 0 {
            return Err(Error::InvalidArgument("empty ensemble".into()));
        }
        let inv = 1.0 / self.count as f64;
        let probs = self.sums.iter().map(|s| s * inv).collect();
        Ok(DistributionSnapshot::averaged(self.t, self.half_width, probs, self.count))
    }
}

/// Noise average of a stream of snapshots.
pub fn accumulate_ensemble<'a, I>(run_snapshots: I) -> Result<DistributionSnapshot>
where
    I: IntoIterator<Item = &'a DistributionSnapshot>,
{
    let mut iter = run_snapshots.into_iter();
    let first = iter
        .next()
        .ok_or_else(|| Error::InvalidArgument("empty ensemble".into()))?;
    let mut acc = EnsembleAccumulator::new(first.t, first.half_width);
    acc.push(first)?;
    for snap in iter {
        acc.push(snap)?;
    }
    acc.finish()
}

/// Time series of noise-averaged moments.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentSeries {
    times: Vec<usize>,
    mean: Vec<f64>,
    second: Vec<f64>,
    sigma: Vec<f64>,
}

impl MomentSeries {
    /// Builds the series; `sigma` is derived as `sqrt(second - mean^2)`.
    ///
    /// Round-off can push the variance a few ulps below zero for nearly
    /// deterministic positions; it is clamped to zero.
    pub fn new(times: Vec<usize>, mean: Vec<f64>, second: Vec<f64>) -> Result<Self> {
        if times.len() != mean.len() || times.len() != second.len() {
            return Err(Error::InvalidArgument("moment series columns differ in length".into()));
        }
        if times.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument("moment series times must increase".into()));
        }
        let sigma = mean
            .iter()
            .zip(&second)
            .map(|(m, s)| (s - m * m).max(0.0).sqrt())
            .collect();
        Ok(Self {
            times,
            mean,
            second,
            sigma,
        })
    }

    pub fn from_snapshots(snaps: &[DistributionSnapshot]) -> Result<Self> {
        let mut times = Vec::with_capacity(snaps.len());
        let mut mean = Vec::with_capacity(snaps.len());
        let mut second = Vec::with_capacity(snaps.len());
        for s in snaps {
            let (m, q) = moments(s);
            times.push(s.t());
            mean.push(m);
            second.push(q);
        }
        Self::new(times, mean, second)
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[usize] {
        &self.times
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn second(&self) -> &[f64] {
        &self.second
    }

    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    pub fn column(&self, which: Moment) -> &[f64] {
        match which {
            Moment::Mean => &self.mean,
            Moment::Sigma => &self.sigma,
        }
    }

    /// Value at time `t`, if recorded.
    pub fn at(&self, which: Moment, t: usize) -> Option<f64> {
        self.times
            .binary_search(&t)
            .ok()
            .map(|i| self.column(which)[i])
    }

    pub fn last_time(&self) -> Option<usize> {
        self.times.last().copied()
    }

    fn window_indices(&self, window: TimeWindow) -> std::ops::Range<usize> {
        let lo = self.times.partition_point(|&t| t < window.start);
        let hi = self.times.partition_point(|&t| t <= window.end);
        lo..hi
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Moment {
    Mean,
    Sigma,
}

/// Inclusive time interval `[start, end]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TimeWindow {
    pub start: usize,
    pub end: usize,
}

impl TimeWindow {
    pub fn new(start: usize, end: usize) -> Result<Self> {
        if start > end {
            return Err(Error::InvalidArgument(format!("empty window {start}:{end}")));
        }
        Ok(Self { start, end })
    }

    /// `[t_end - t_end / den * num, t_end]`, e.g. the last half for `(1, 2)`.
    pub fn trailing_fraction(t_end: usize, num: usize, den: usize) -> Self {
        Self {
            start: t_end - t_end * num / den,
            end: t_end,
        }
    }
}

impl fmt::Display for TimeWindow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.start, self.end)
    }
}

impl FromStr for TimeWindow {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (a, b) = s
            .split_once(':')
            .ok_or_else(|| Error::InvalidArgument(format!("window must be start:end, got {s:?}")))?;
        let parse = |x: &str| {
            x.trim()
                .parse::<usize>()
                .map_err(|e| Error::InvalidArgument(format!("bad window bound {x:?}: {e}")))
        };
        TimeWindow::new(parse(a)?, parse(b)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FitResult {
    /// Affine fit `y = slope * t + intercept`.
    LinearSlope {
        slope: f64,
        stderr: f64,
        intercept: f64,
        window: TimeWindow,
    },
    /// `sigma(t) = k * sqrt(t) + c`.
    SqrtTail {
        k: f64,
        c: f64,
        k_stderr: f64,
        window: TimeWindow,
    },
    Saturation {
        n_alpha: f64,
        stderr: f64,
        window: TimeWindow,
    },
    Crossover {
        time: f64,
    },
    /// `T = c * alpha^(-exponent)`.
    PowerLaw {
        c: f64,
        exponent: f64,
        stderr: f64,
    },
}

/// Ordinary least squares line with standard errors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
    pub intercept_stderr: f64,
}

pub fn least_squares(x: &[f64], y: &[f64]) -> Result<LineFit> {
    let n = x.len();
    if n != y.len() || n < 2 {
        return Err(Error::InvalidArgument(format!(
            "least squares needs matching columns with at least 2 points, got {n}"
        )));
    }
    let nf = n as f64;
    let mx = compensated_sum(x.iter().copied()) / nf;
    let my = compensated_sum(y.iter().copied()) / nf;
    let sxx = compensated_sum(x.iter().map(|xi| (xi - mx).powi(2)));
    let sxy = compensated_sum(x.iter().zip(y).map(|(xi, yi)| (xi - mx) * (yi - my)));
    if sxx <= 0.0 {
        return Err(Error::InvalidArgument("abscissae are all equal".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let (slope_stderr, intercept_stderr) = if n > 2 {
        let rss = compensated_sum(
            x.iter()
                .zip(y)
                .map(|(xi, yi)| (yi - intercept - slope * xi).powi(2)),
        );
        let s2 = rss / (nf - 2.0);
        let sumx2 = compensated_sum(x.iter().map(|xi| xi * xi));
        ((s2 / sxx).sqrt(), (s2 * sumx2 / (nf * sxx)).sqrt())
    } else {
        (0.0, 0.0)
    };
    Ok(LineFit {
        slope,
        intercept,
        slope_stderr,
        intercept_stderr,
    })
}

pub const MIN_WINDOW_POINTS: usize = 10;

fn windowed(series: &MomentSeries, which: Moment, window: TimeWindow) -> Result<(&[usize], &[f64])> {
    let idx = series.window_indices(window);
    if idx.len() < MIN_WINDOW_POINTS {
        return Err(Error::DegenerateWindow {
            start: window.start,
            end: window.end,
            points: idx.len(),
            needed: MIN_WINDOW_POINTS,
        });
    }
    Ok((&series.times[idx.clone()], &series.column(which)[idx]))
}

/// Slope of the mean or of sigma against `t` over `window`.
pub fn fit_linear_slope(series: &MomentSeries, which: Moment, window: TimeWindow) -> Result<FitResult> {
    let (ts, ys) = windowed(series, which, window)?;
    let xs: Vec<f64> = ts.iter().map(|&t| t as f64).collect();
    let fit = least_squares(&xs, ys)?;
    Ok(FitResult::LinearSlope {
        slope: fit.slope,
        stderr: fit.slope_stderr,
        intercept: fit.intercept,
        window,
    })
}

/// Regression of sigma against `sqrt(t)` over `window`.
pub fn fit_sqrt_tail(series: &MomentSeries, window: TimeWindow) -> Result<FitResult> {
    let (ts, ys) = windowed(series, Moment::Sigma, window)?;
    let xs: Vec<f64> = ts.iter().map(|&t| (t as f64).sqrt()).collect();
    let fit = least_squares(&xs, ys)?;
    Ok(FitResult::SqrtTail {
        k: fit.slope,
        c: fit.intercept,
        k_stderr: fit.slope_stderr,
        window,
    })
}

/// Maximum relative drift of the mean position accepted as saturated.
pub const SATURATION_FLATNESS: f64 = 0.02;

/// Plateau value of the mean position over `window`.
///
/// The flatness test uses the drift of an affine fit across the window,
/// `|slope| * (end - start) / |mean|`, so that sampling jitter between
/// neighbouring times does not count as drift. A failed test returns
/// [`Error::NotSaturated`] carrying the plateau estimate anyway.
pub fn fit_saturation(series: &MomentSeries, window: TimeWindow) -> Result<FitResult> {
    let (ts, ys) = windowed(series, Moment::Mean, window)?;
    let n = ys.len() as f64;
    let n_alpha = compensated_sum(ys.iter().copied()) / n;
    let xs: Vec<f64> = ts.iter().map(|&t| t as f64).collect();
    let line = least_squares(&xs, ys)?;
    let span = (ts[ts.len() - 1] - ts[0]) as f64;
    let drift = (line.slope * span).abs() / n_alpha.abs();
    if !(drift <= SATURATION_FLATNESS) {
        return Err(Error::NotSaturated {
            start: window.start,
            end: window.end,
            drift,
            limit: SATURATION_FLATNESS,
            n_alpha,
        });
    }
    let var = compensated_sum(ys.iter().map(|y| (y - n_alpha).powi(2))) / (n - 1.0);
    Ok(FitResult::Saturation {
        n_alpha,
        stderr: (var / n).sqrt(),
        window,
    })
}

/// Time where `K sqrt(t)` meets `q t`: `(K / q)^2`.
pub fn crossover_t2(k: f64, q: f64) -> Result<f64> {
    if !(k > 0.0 && q > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "crossover T2 needs K > 0 and q > 0, got K = {k}, q = {q}"
        )));
    }
    Ok((k / q).powi(2))
}

/// Time where `v t` reaches the plateau `n_alpha`.
pub fn crossover_t1(n_alpha: f64, v: f64) -> Result<f64> {
    if !(v > 0.0) {
        return Err(Error::InvalidArgument(format!("crossover T1 needs v > 0, got {v}")));
    }
    if !(n_alpha >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "crossover T1 needs n_alpha >= 0, got {n_alpha}"
        )));
    }
    Ok(n_alpha / v)
}

/// Log-log least squares of `T = c * alpha^(-exponent)`.
pub fn fit_power_law(points: &[(f64, f64)]) -> Result<FitResult> {
    if points.len() < 4 {
        return Err(Error::InvalidArgument(format!(
            "power-law fit needs at least 4 points, got {}",
            points.len()
        )));
    }
    if let Some(&(a, t)) = points.iter().find(|(a, t)| !(*a > 0.0 && *t > 0.0)) {
        return Err(Error::InvalidArgument(format!(
            "power-law fit needs positive data, got ({a}, {t})"
        )));
    }
    let xs: Vec<f64> = points.iter().map(|(a, _)| a.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|(_, t)| t.ln()).collect();
    let fit = least_squares(&xs, &ys)?;
    Ok(FitResult::PowerLaw {
        c: fit.intercept.exp(),
        exponent: -fit.slope,
        stderr: fit.slope_stderr,
    })
}
