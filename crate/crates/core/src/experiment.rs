//! Experiment pipelines: per-mode runs, the noise sweep analysis and the
//! figure datasets.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::analysis::{
    crossover_t1, crossover_t2, fit_linear_slope, fit_power_law, fit_saturation, fit_sqrt_tail,
    FitResult, Moment, MomentSeries, TimeWindow,
};
use crate::baselines::{analytic_kp, analytic_np, classical_distribution, ClassicalWalk, DecoherenceConfig};
use crate::config::{ExperimentConfig, FitWindows, Mode};
use crate::ensemble::{moment_times, run_ensemble, Dynamics, EnsembleResult, EnsembleSpec};
use crate::error::{Error, Result};
use crate::noise::NoiseConfig;
use crate::output::{distribution_csv, fits_text, format_float, moments_csv, write_text, FitRecord};
use crate::state::InitialCondition;

/// Noise levels plotted as sigma curves.
pub const SIGMA_CURVE_ALPHAS: [f64; 4] = [0.025, 0.05, 0.1, 0.2];
/// Noise levels plotted as mean-position curves.
pub const MEAN_CURVE_ALPHAS: [f64; 5] = [0.025, 0.03, 0.04, 0.07, 0.1];
/// Weak noise level of the distribution snapshots.
pub const WEAK_SNAPSHOT_ALPHA: f64 = 0.025;
/// Strong noise level of the bell-shaped snapshot.
pub const STRONG_SNAPSHOT_ALPHA: f64 = 0.8;
/// Snapshot times of the distribution figures.
pub const FIGURE_TIMES: [usize; 3] = [250, 1000, 10_000];

fn ensemble_spec(cfg: &ExperimentConfig, init: InitialCondition, dynamics: Dynamics, runs: usize, snaps: Vec<usize>) -> EnsembleSpec {
    EnsembleSpec {
        init,
        t_max: cfg.t_max,
        dynamics,
        runs,
        master_seed: cfg.master_seed,
        snapshot_times: snaps,
        moment_stride: cfg.moment_stride,
        workers: cfg.workers,
    }
}

fn sorted_snapshots(cfg: &ExperimentConfig) -> Vec<usize> {
    let mut s = cfg.snapshots.clone();
    s.sort_unstable();
    s.dedup();
    s
}

/// Slopes of the noiseless walk: `q` from sigma and `v` from the mean.
#[derive(Debug, Clone)]
pub struct NoiselessReference {
    pub moments: MomentSeries,
    pub q: FitResult,
    pub v: FitResult,
}

impl NoiselessReference {
    pub fn q(&self) -> f64 {
        slope(&self.q)
    }

    pub fn v(&self) -> f64 {
        slope(&self.v)
    }
}

fn slope(fit: &FitResult) -> f64 {
    match *fit {
        FitResult::LinearSlope { slope, .. } => slope,
        _ => f64::NAN,
    }
}

pub fn noiseless_reference(
    init: InitialCondition,
    t_max: usize,
    moment_stride: usize,
    windows: &FitWindows,
) -> Result<NoiselessReference> {
    let spec = EnsembleSpec {
        init,
        t_max,
        dynamics: Dynamics::Noiseless,
        runs: 1,
        master_seed: 0,
        snapshot_times: Vec::new(),
        moment_stride,
        workers: 1,
    };
    let moments = run_ensemble(&spec)?.moments;
    let window = windows.linear_or_default(t_max);
    let q = fit_linear_slope(&moments, Moment::Sigma, window)?;
    let v = fit_linear_slope(&moments, Moment::Mean, window)?;
    Ok(NoiselessReference { moments, q, v })
}

/// Fits and crossover times for one noise level.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaAnalysis {
    pub alpha: f64,
    pub runs: usize,
    pub tail: FitResult,
    pub k: f64,
    pub t2: Option<f64>,
    /// Plateau of the mean position, present even when the flatness test fails.
    pub n_alpha: f64,
    pub saturated: bool,
    pub saturation_window: TimeWindow,
    pub t1: Option<f64>,
}

pub fn analyze_series(
    alpha: f64,
    runs: usize,
    series: &MomentSeries,
    reference: &NoiselessReference,
    windows: &FitWindows,
) -> Result<AlphaAnalysis> {
    let t_end = series
        .last_time()
        .ok_or_else(|| Error::InvalidArgument("empty moment series".into()))?;
    let tail = fit_sqrt_tail(series, windows.sqrt_tail_or_default(t_end))?;
    let k = match tail {
        FitResult::SqrtTail { k, .. } => k,
        _ => unreachable!(),
    };
    let t2 = crossover_t2(k, reference.q()).ok();
    let sat_window = windows.saturation_or_default(t_end);
    let (n_alpha, saturated) = match fit_saturation(series, sat_window) {
        Ok(FitResult::Saturation { n_alpha, .. }) => (n_alpha, true),
        Err(Error::NotSaturated { n_alpha, .. }) => (n_alpha, false),
        Ok(other) => unreachable!("{other:?}"),
        Err(e) => return Err(e),
    };
    let t1 = crossover_t1(n_alpha, reference.v()).ok();
    Ok(AlphaAnalysis {
        alpha,
        runs,
        tail,
        k,
        t2,
        n_alpha,
        saturated,
        saturation_window: sat_window,
        t1,
    })
}

impl AlphaAnalysis {
    pub fn fit_records(&self) -> Vec<FitRecord> {
        let mut out = FitRecord::from_fit("K", &self.tail);
        if let Some(t2) = self.t2 {
            out.push(FitRecord::new("T2", t2));
        }
        out.push(FitRecord::new("n_alpha", self.n_alpha).with_window(self.saturation_window));
        out.push(FitRecord::new("saturated", if self.saturated { 1.0 } else { 0.0 }));
        if let Some(t1) = self.t1 {
            out.push(FitRecord::new("T1", t1));
        }
        out
    }
}

/// Power laws over a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSummary {
    pub per_alpha: Vec<AlphaAnalysis>,
    /// `T2 = c2 alpha^-eta`.
    pub eta: Option<FitResult>,
    /// `T1 = c1 alpha^-rho`, over saturated levels only.
    pub rho: Option<FitResult>,
}

impl SweepSummary {
    pub fn from_analyses(per_alpha: Vec<AlphaAnalysis>) -> Self {
        let t2: Vec<(f64, f64)> = per_alpha
            .iter()
            .filter_map(|a| a.t2.map(|t| (a.alpha, t)))
            .filter(|&(a, t)| a > 0.0 && t > 0.0)
            .collect();
        let t1: Vec<(f64, f64)> = per_alpha
            .iter()
            .filter(|a| a.saturated)
            .filter_map(|a| a.t1.map(|t| (a.alpha, t)))
            .filter(|&(a, t)| a > 0.0 && t > 0.0)
            .collect();
        Self {
            eta: fit_power_law(&t2).ok(),
            rho: fit_power_law(&t1).ok(),
            per_alpha,
        }
    }

    pub fn summary_csv(&self) -> String {
        let opt = |x: Option<f64>| x.map_or_else(String::new, format_float);
        let mut s = String::from("alpha,runs,K,K_stderr,C,T2,n_alpha,saturated,T1\n");
        for a in &self.per_alpha {
            let (k_err, c) = match a.tail {
                FitResult::SqrtTail { k_stderr, c, .. } => (k_stderr, c),
                _ => (f64::NAN, f64::NAN),
            };
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{},{}",
                format_float(a.alpha),
                a.runs,
                format_float(a.k),
                format_float(k_err),
                format_float(c),
                opt(a.t2),
                format_float(a.n_alpha),
                a.saturated as u8,
                opt(a.t1)
            );
        }
        s
    }

    pub fn power_law_records(&self) -> Vec<FitRecord> {
        let mut out = Vec::new();
        if let Some(eta) = &self.eta {
            out.extend(FitRecord::from_fit("T2_power_law", eta));
        }
        if let Some(rho) = &self.rho {
            out.extend(FitRecord::from_fit("T1_power_law", rho));
        }
        out
    }
}

/// Noise-averaged series for each level, in `alphas` order.
pub fn noisy_ensembles(
    cfg: &ExperimentConfig,
    init: InitialCondition,
    alphas: &[f64],
    snaps: &[usize],
) -> Result<Vec<EnsembleResult>> {
    alphas
        .iter()
        .map(|&alpha| {
            let noise = NoiseConfig::new(alpha, cfg.master_seed)?;
            let spec = ensemble_spec(cfg, init, Dynamics::Noisy(noise), cfg.runs.runs_for(alpha), snaps.to_vec());
            run_ensemble(&spec)
        })
        .collect()
}

fn label(prefix: &str, x: f64) -> String {
    format!("{prefix}_{}", format_float(x))
}

fn write_snapshots(dir: &Path, result: &EnsembleResult) -> Result<()> {
    for snap in &result.snapshots {
        write_text(&dir.join(format!("dist_t{}.csv", snap.t())), &distribution_csv(snap))?;
    }
    Ok(())
}

/// What a mode run produced.
#[derive(Debug, Clone)]
pub enum ExperimentReport {
    Noiseless(NoiselessReference),
    Noisy(SweepSummary),
    Classical(MomentSeries),
    Decoherent(Vec<DecoherenceAnalysis>),
}

/// Ensemble fits for one measurement probability.
#[derive(Debug, Clone, PartialEq)]
pub struct DecoherenceAnalysis {
    pub p: f64,
    pub runs: usize,
    pub tail: FitResult,
    /// `sigma / sqrt(t)` at the final time.
    pub spread_ratio: f64,
    pub n_p: f64,
    pub saturated: bool,
    pub analytic_np: Option<f64>,
    pub analytic_kp: Option<f64>,
}

impl DecoherenceAnalysis {
    pub fn fit_records(&self) -> Vec<FitRecord> {
        let mut out = FitRecord::from_fit("K_p", &self.tail);
        out.push(FitRecord::new("sigma_over_sqrt_t", self.spread_ratio));
        out.push(FitRecord::new("n_p", self.n_p));
        out.push(FitRecord::new("saturated", if self.saturated { 1.0 } else { 0.0 }));
        if let Some(x) = self.analytic_np {
            out.push(FitRecord::new("n_p_closed_form", x));
        }
        if let Some(x) = self.analytic_kp {
            out.push(FitRecord::new("K_p_closed_form", x));
        }
        out
    }
}

pub fn analyze_decoherent(p: f64, runs: usize, series: &MomentSeries, windows: &FitWindows) -> Result<DecoherenceAnalysis> {
    let t_end = series
        .last_time()
        .ok_or_else(|| Error::InvalidArgument("empty moment series".into()))?;
    let tail = fit_sqrt_tail(series, windows.sqrt_tail_or_default(t_end))?;
    let sigma_end = series.sigma()[series.len() - 1];
    let (n_p, saturated) = match fit_saturation(series, windows.saturation_or_default(t_end)) {
        Ok(FitResult::Saturation { n_alpha, .. }) => (n_alpha, true),
        Err(Error::NotSaturated { n_alpha, .. }) => (n_alpha, false),
        Ok(other) => unreachable!("{other:?}"),
        Err(e) => return Err(e),
    };
    Ok(DecoherenceAnalysis {
        p,
        runs,
        tail,
        spread_ratio: sigma_end / (t_end as f64).sqrt(),
        n_p,
        saturated,
        analytic_np: analytic_np(p).ok(),
        analytic_kp: analytic_kp(p).ok(),
    })
}

pub fn classical_series(t_max: usize, stride: usize) -> Result<MomentSeries> {
    let times = moment_times(t_max, stride);
    let mut walk = ClassicalWalk::new(t_max);
    let (mut mean, mut second) = (Vec::with_capacity(times.len()), Vec::with_capacity(times.len()));
    let mut next = 0;
    for t in 0..=t_max {
        if t > 0 {
            walk.step()?;
        }
        if times.get(next) == Some(&t) {
            let (m, s) = walk.moments();
            mean.push(m);
            second.push(s);
            next += 1;
        }
    }
    MomentSeries::new(times, mean, second)
}

/// Runs the configured mode and writes its artifacts under `cfg.out/<mode>/`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let root = cfg.out.join(cfg.mode.as_str());
    let snaps = sorted_snapshots(cfg);
    match cfg.mode {
        Mode::Noiseless => {
            let spec = ensemble_spec(cfg, cfg.init, Dynamics::Noiseless, 1, snaps);
            let result = run_ensemble(&spec)?;
            write_snapshots(&root, &result)?;
            write_text(&root.join("moments.csv"), &moments_csv(&result.moments))?;
            let window = cfg.fit_windows.linear_or_default(cfg.t_max);
            let q = fit_linear_slope(&result.moments, Moment::Sigma, window)?;
            let v = fit_linear_slope(&result.moments, Moment::Mean, window)?;
            let mut recs = FitRecord::from_fit("q", &q);
            recs.extend(FitRecord::from_fit("v", &v));
            write_text(&root.join("fits.jsonl"), &fits_text(&recs))?;
            Ok(ExperimentReport::Noiseless(NoiselessReference {
                moments: result.moments,
                q,
                v,
            }))
        }
        Mode::Noisy => {
            let reference = noiseless_reference(cfg.init, cfg.t_max, cfg.moment_stride, &cfg.fit_windows)?;
            let results = noisy_ensembles(cfg, cfg.init, &cfg.alphas, &snaps)?;
            let mut per_alpha = Vec::new();
            for (&alpha, result) in cfg.alphas.iter().zip(&results) {
                let dir = root.join(label("alpha", alpha));
                write_snapshots(&dir, result)?;
                write_text(&dir.join("moments.csv"), &moments_csv(&result.moments))?;
                let a = analyze_series(alpha, result.runs, &result.moments, &reference, &cfg.fit_windows)?;
                write_text(&dir.join("fits.jsonl"), &fits_text(&a.fit_records()))?;
                per_alpha.push(a);
            }
            let summary = SweepSummary::from_analyses(per_alpha);
            let mut refs = FitRecord::from_fit("q", &reference.q);
            refs.extend(FitRecord::from_fit("v", &reference.v));
            write_text(&root.join("noiseless_fits.jsonl"), &fits_text(&refs))?;
            write_text(&root.join("summary.csv"), &summary.summary_csv())?;
            write_text(&root.join("power_laws.jsonl"), &fits_text(&summary.power_law_records()))?;
            Ok(ExperimentReport::Noisy(summary))
        }
        Mode::Classical => {
            for &t in &snaps {
                write_text(&root.join(format!("dist_t{t}.csv")), &distribution_csv(&classical_distribution(t)))?;
            }
            let series = classical_series(cfg.t_max, cfg.moment_stride)?;
            write_text(&root.join("moments.csv"), &moments_csv(&series))?;
            Ok(ExperimentReport::Classical(series))
        }
        Mode::Decoherent => {
            let mut out = Vec::new();
            for &p in &cfg.ps {
                let dc = DecoherenceConfig::new(p)?;
                let spec = ensemble_spec(cfg, cfg.init, Dynamics::Decoherent(dc), cfg.runs_decoherent, snaps.clone());
                let result = run_ensemble(&spec)?;
                let dir = root.join(label("p", p));
                write_snapshots(&dir, &result)?;
                write_text(&dir.join("moments.csv"), &moments_csv(&result.moments))?;
                let a = analyze_decoherent(p, result.runs, &result.moments, &cfg.fit_windows)?;
                write_text(&dir.join("fits.jsonl"), &fits_text(&a.fit_records()))?;
                out.push(a);
            }
            Ok(ExperimentReport::Decoherent(out))
        }
    }
}

/// Fits recomputed from a stored moment series. `q` and `v` default to the
/// slopes of a noiseless walk of the same length from `|0>|R>`.
pub fn refit_moments(
    series: &MomentSeries,
    windows: &FitWindows,
    q: Option<f64>,
    v: Option<f64>,
) -> Result<Vec<FitRecord>> {
    let t_end = series
        .last_time()
        .ok_or_else(|| Error::InvalidArgument("empty moment series".into()))?;
    let mut recs = Vec::new();
    let lin = windows.linear_or_default(t_end);
    if let Ok(f) = fit_linear_slope(series, Moment::Sigma, lin) {
        recs.extend(FitRecord::from_fit("sigma_slope", &f));
    }
    if let Ok(f) = fit_linear_slope(series, Moment::Mean, lin) {
        recs.extend(FitRecord::from_fit("mean_slope", &f));
    }
    let (q, v) = match (q, v) {
        (Some(q), Some(v)) => (q, v),
        _ => {
            let r = noiseless_reference(InitialCondition::RightOrigin, t_end, 1, windows)?;
            (q.unwrap_or(r.q()), v.unwrap_or(r.v()))
        }
    };
    let tail = fit_sqrt_tail(series, windows.sqrt_tail_or_default(t_end))?;
    recs.extend(FitRecord::from_fit("K", &tail));
    if let FitResult::SqrtTail { k, .. } = tail {
        if let Ok(t2) = crossover_t2(k, q) {
            recs.push(FitRecord::new("T2", t2));
        }
    }
    let sat_window = windows.saturation_or_default(t_end);
    let (n_alpha, saturated) = match fit_saturation(series, sat_window) {
        Ok(FitResult::Saturation { n_alpha, .. }) => (n_alpha, true),
        Err(Error::NotSaturated { n_alpha, .. }) => (n_alpha, false),
        Ok(other) => unreachable!("{other:?}"),
        Err(e) => return Err(e),
    };
    recs.push(FitRecord::new("n_alpha", n_alpha).with_window(sat_window));
    recs.push(FitRecord::new("saturated", if saturated { 1.0 } else { 0.0 }));
    if let Ok(t1) = crossover_t1(n_alpha, v) {
        recs.push(FitRecord::new("T1", t1));
    }
    recs.push(FitRecord::new("q_reference", q));
    recs.push(FitRecord::new("v_reference", v));
    Ok(recs)
}

/// Results of the figure pipeline that callers may want to inspect.
#[derive(Debug, Clone)]
pub struct FiguresReport {
    pub dir: PathBuf,
    pub reference: NoiselessReference,
    pub sweep: SweepSummary,
    pub files: Vec<PathBuf>,
}

fn curves_csv(times: &[usize], columns: &[(String, &[f64])]) -> String {
    let mut s = String::from("t");
    for (name, _) in columns {
        s.push(',');
        s.push_str(name);
    }
    s.push('\n');
    for (i, t) in times.iter().enumerate() {
        let _ = write!(s, "{t}");
        for (_, col) in columns {
            let _ = write!(s, ",{}", format_float(col[i]));
        }
        s.push('\n');
    }
    s
}

/// Writes one dataset per figure under `cfg.out/figures/`.
pub fn reproduce_figures(cfg: &ExperimentConfig) -> Result<FiguresReport> {
    cfg.validate()?;
    if cfg.alphas.is_empty() {
        return Err(Error::Config("figure pipeline needs a noise sweep".into()));
    }
    let dir = cfg.out.join("figures");
    let mut files = Vec::new();
    let mut emit = |name: String, text: String| -> Result<()> {
        let path = dir.join(name);
        write_text(&path, &text)?;
        files.push(path);
        Ok(())
    };

    let mut dist_times: Vec<usize> = FIGURE_TIMES.iter().copied().filter(|&t| t <= cfg.t_max).collect();
    if !dist_times.contains(&cfg.t_max) && cfg.t_max < FIGURE_TIMES[2] {
        dist_times.push(cfg.t_max);
    }

    // fig1: noiseless symmetric walk
    let fig1 = run_ensemble(&ensemble_spec(cfg, InitialCondition::SymmetricOrigin, Dynamics::Noiseless, 1, dist_times.clone()))?;
    for snap in &fig1.snapshots {
        emit(format!("fig1_noiseless_t{}.csv", snap.t()), distribution_csv(snap))?;
    }

    // fig2: weak noise, symmetric start
    let fig2 = &noisy_ensembles(cfg, InitialCondition::SymmetricOrigin, &[WEAK_SNAPSHOT_ALPHA], &dist_times)?[0];
    for snap in &fig2.snapshots {
        emit(format!("fig2_{}_t{}.csv", label("alpha", WEAK_SNAPSHOT_ALPHA), snap.t()), distribution_csv(snap))?;
    }

    // fig3: strong noise, symmetric start, t = 1000
    let t3 = cfg.t_max.min(1000);
    let mut cfg3 = cfg.clone();
    cfg3.t_max = t3;
    let fig3 = &noisy_ensembles(&cfg3, InitialCondition::SymmetricOrigin, &[STRONG_SNAPSHOT_ALPHA], &[t3])?[0];
    emit(format!("fig3_{}_t{t3}.csv", label("alpha", STRONG_SNAPSHOT_ALPHA)), distribution_csv(&fig3.snapshots[0]))?;

    // Right-start ensembles shared by figs 4-8.
    let mut alphas: Vec<f64> = cfg
        .alphas
        .iter()
        .chain(&SIGMA_CURVE_ALPHAS)
        .chain(&MEAN_CURVE_ALPHAS)
        .copied()
        .collect();
    alphas.sort_by(f64::total_cmp);
    alphas.dedup();
    let reference = noiseless_reference(InitialCondition::RightOrigin, cfg.t_max, cfg.moment_stride, &cfg.fit_windows)?;
    let results = noisy_ensembles(cfg, InitialCondition::RightOrigin, &alphas, &[])?;
    let series_for = |a: f64| -> &MomentSeries {
        let i = alphas.iter().position(|&x| x == a).expect("alpha was scheduled");
        &results[i].moments
    };
    let classical = classical_series(cfg.t_max, cfg.moment_stride)?;
    let times = reference.moments.times().to_vec();

    // fig4: sigma curves
    let mut cols: Vec<(String, &[f64])> = vec![("noiseless".into(), reference.moments.sigma())];
    for &a in &SIGMA_CURVE_ALPHAS {
        cols.push((label("alpha", a), series_for(a).sigma()));
    }
    cols.push(("classical".into(), classical.sigma()));
    emit("fig4_sigma.csv".into(), curves_csv(&times, &cols))?;
    let mut refs = FitRecord::from_fit("q", &reference.q);
    refs.extend(FitRecord::from_fit("v", &reference.v));
    emit("fig4_fits.jsonl".into(), fits_text(&refs))?;

    // figs 5, 6, 8: sweep analysis
    let per_alpha = cfg
        .alphas
        .iter()
        .map(|&a| {
            let i = alphas.iter().position(|&x| x == a).expect("alpha was scheduled");
            analyze_series(a, results[i].runs, &results[i].moments, &reference, &cfg.fit_windows)
        })
        .collect::<Result<Vec<_>>>()?;
    let sweep = SweepSummary::from_analyses(per_alpha);

    let mut fig5 = String::from("alpha,K,K_stderr,C\n");
    let mut fig6 = String::from("alpha,T2\n");
    let mut fig8 = String::from("alpha,n_alpha,saturated,T1\n");
    for a in &sweep.per_alpha {
        if let FitResult::SqrtTail { k, c, k_stderr, .. } = a.tail {
            let _ = writeln!(fig5, "{},{},{},{}", format_float(a.alpha), format_float(k), format_float(k_stderr), format_float(c));
        }
        if let Some(t2) = a.t2 {
            let _ = writeln!(fig6, "{},{}", format_float(a.alpha), format_float(t2));
        }
        let t1 = a.t1.map_or_else(String::new, format_float);
        let _ = writeln!(fig8, "{},{},{},{}", format_float(a.alpha), format_float(a.n_alpha), a.saturated as u8, t1);
    }
    emit("fig5_K.csv".into(), fig5)?;
    emit("fig6_T2.csv".into(), fig6)?;
    emit(
        "fig6_fit.jsonl".into(),
        fits_text(&sweep.eta.map(|f| FitRecord::from_fit("T2_power_law", &f)).unwrap_or_default()),
    )?;

    // fig7: mean-position curves
    let mut cols: Vec<(String, &[f64])> = vec![("noiseless".into(), reference.moments.mean())];
    for &a in &MEAN_CURVE_ALPHAS {
        cols.push((label("alpha", a), series_for(a).mean()));
    }
    emit("fig7_mean.csv".into(), curves_csv(&times, &cols))?;

    emit("fig8_T1.csv".into(), fig8)?;
    emit(
        "fig8_fit.jsonl".into(),
        fits_text(&sweep.rho.map(|f| FitRecord::from_fit("T1_power_law", &f)).unwrap_or_default()),
    )?;
    emit("summary.csv".into(), sweep.summary_csv())?;

    Ok(FiguresReport {
        dir,
        reference,
        sweep,
        files,
    })
}
