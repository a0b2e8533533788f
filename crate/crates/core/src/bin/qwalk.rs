use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use qwalk::analysis::TimeWindow;
use qwalk::config::{ExperimentConfig, Mode, Preset};
use qwalk::experiment::{refit_moments, reproduce_figures, run_experiment, ExperimentReport};
use qwalk::noise::{noisy_coin, NoiseConfig};
use qwalk::output::{distribution_csv, fits_text, format_float, moments_csv, read_moments_csv, write_text};
use qwalk::{Error, Result, WalkerState};

#[derive(Parser)]
#[command(name = "qwalk", version, about = "Noisy Hadamard quantum walk experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve a single trajectory and dump amplitudes, distributions and moments.
    Walk(CommonArgs),
    /// Noise-averaged ensembles over the alpha sweep.
    Ensemble(CommonArgs),
    /// Exact classical random walk.
    Classical(CommonArgs),
    /// Walk whose coin is measured with probability p per step.
    Decoherent(CommonArgs),
    /// Re-analyze a stored moments.csv.
    Fit(FitArgs),
    /// Datasets for every figure of the noise study.
    Figures(CommonArgs),
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// key = value config file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_parser = ["paper", "desk"])]
    preset: Option<String>,
    /// Noise level(s), comma separated.
    #[arg(long)]
    alpha: Option<String>,
    /// Measurement probability(ies), comma separated.
    #[arg(long)]
    p: Option<String>,
    #[arg(long)]
    tmax: Option<usize>,
    /// Runs per level (overrides the weak/strong split).
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// symmetric | right | custom:cr_re,cr_im,cl_re,cl_im
    #[arg(long)]
    init: Option<String>,
    /// Comma-separated snapshot times.
    #[arg(long)]
    snapshots: Option<String>,
    /// start:end window for the long-time fits (sqrt tail and plateau).
    #[arg(long)]
    fit_window: Option<String>,
    #[arg(long)]
    moment_stride: Option<usize>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FitArgs {
    /// Moment file with columns t,mean,second[,sigma].
    moments: PathBuf,
    /// start:end window for the long-time fits.
    #[arg(long)]
    fit_window: Option<String>,
    /// start:end window for the linear slopes.
    #[arg(long)]
    linear_window: Option<String>,
    /// Noiseless sigma slope used for T2.
    #[arg(long)]
    q: Option<f64>,
    /// Noiseless drift used for T1.
    #[arg(long)]
    v: Option<f64>,
    /// Write the records here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl CommonArgs {
    fn into_config(self, mode: Mode) -> Result<ExperimentConfig> {
        let preset = self.preset.as_deref().map(str::parse::<Preset>).transpose()?;
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path, preset)?,
            None => ExperimentConfig::preset(preset.unwrap_or(Preset::Desk)),
        };
        cfg.mode = mode;
        let mut set = |key: &str, value: Option<String>| -> Result<()> {
            match value {
                Some(v) => cfg.set(key, &v),
                None => Ok(()),
            }
        };
        set("alphas", self.alpha)?;
        set("ps", self.p)?;
        set("tmax", self.tmax.map(|x| x.to_string()))?;
        set("runs", self.runs.map(|x| x.to_string()))?;
        set("seed", self.seed.map(|x| x.to_string()))?;
        set("init", self.init)?;
        set("moment_stride", self.moment_stride.map(|x| x.to_string()))?;
        set("workers", self.workers.map(|x| x.to_string()))?;
        set("out", self.out.map(|p| p.display().to_string()))?;
        if let Some(w) = self.fit_window {
            set("fit_window_sqrt", Some(w.clone()))?;
            set("fit_window_saturation", Some(w))?;
        }
        match self.snapshots {
            Some(s) => set("snapshots", Some(s))?,
            None if self.tmax.is_some() => {
                let t_max = cfg.t_max;
                cfg.snapshots = qwalk::config::default_snapshots(t_max);
            }
            None => {}
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn walk(cfg: &ExperimentConfig) -> Result<()> {
    let alpha = cfg.alphas.first().copied().unwrap_or(0.0);
    let noise = NoiseConfig::new(alpha, cfg.master_seed)?;
    let mut stream = noise.run_stream(0);
    let mut state = WalkerState::new(cfg.init, cfg.t_max)?;
    let dir = cfg.out.join("walk");
    let mut snaps = cfg.snapshots.clone();
    snaps.sort_unstable();
    let (mut times, mut mean, mut second) = (Vec::new(), Vec::new(), Vec::new());
    for t in 0..=cfg.t_max {
        if t > 0 {
            state.step(&noisy_coin(&mut stream, &noise))?;
        }
        if t % cfg.moment_stride == 0 || t == cfg.t_max {
            let (m, s) = state.moments();
            times.push(t);
            mean.push(m);
            second.push(s);
        }
        if snaps.binary_search(&t).is_ok() {
            write_text(&dir.join(format!("dist_t{t}.csv")), &distribution_csv(&state.distribution()))?;
        }
    }
    let series = qwalk::MomentSeries::new(times, mean, second)?;
    write_text(&dir.join("moments.csv"), &moments_csv(&series))?;
    let mut amps = String::from("n,re_r,im_r,re_l,im_l\n");
    let t = cfg.t_max as i64;
    for n in -t..=t {
        let (r, l) = (state.amp_r(n), state.amp_l(n));
        amps.push_str(&format!(
            "{n},{},{},{},{}\n",
            format_float(r.re),
            format_float(r.im),
            format_float(l.re),
            format_float(l.im)
        ));
    }
    write_text(&dir.join(format!("amplitudes_t{}.csv", cfg.t_max)), &amps)?;
    println!(
        "walk: alpha={alpha} t={} norm^2={} sigma={}",
        cfg.t_max,
        state.norm_sqr(),
        series.sigma().last().copied().unwrap_or(0.0)
    );
    Ok(())
}

fn report(r: &ExperimentReport) {
    match r {
        ExperimentReport::Noiseless(n) => println!("noiseless: q={} v={}", n.q(), n.v()),
        ExperimentReport::Noisy(s) => {
            for a in &s.per_alpha {
                println!(
                    "alpha={} runs={} K={} T2={:?} n_alpha={} saturated={} T1={:?}",
                    a.alpha, a.runs, a.k, a.t2, a.n_alpha, a.saturated, a.t1
                );
            }
            if let Some(qwalk::FitResult::PowerLaw { c, exponent, stderr }) = s.eta {
                println!("T2 = {c} alpha^-{exponent} (+-{stderr})");
            }
            if let Some(qwalk::FitResult::PowerLaw { c, exponent, stderr }) = s.rho {
                println!("T1 = {c} alpha^-{exponent} (+-{stderr})");
            }
        }
        ExperimentReport::Classical(m) => {
            if let Some(s) = m.sigma().last() {
                println!("classical: sigma(t_max)={s}");
            }
        }
        ExperimentReport::Decoherent(ds) => {
            for d in ds {
                println!(
                    "p={} runs={} n_p={} (closed form {:?}) sigma/sqrt(t)={} (closed form {:?})",
                    d.p, d.runs, d.n_p, d.analytic_np, d.spread_ratio, d.analytic_kp
                );
            }
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Walk(args) => {
            // Without an explicit level the preset sweep does not apply: walk noiselessly.
            let explicit = args.alpha.is_some() || args.config.is_some();
            let mut cfg = args.into_config(Mode::Noisy)?;
            if !explicit {
                cfg.alphas = vec![0.0];
            }
            cfg.alphas.truncate(1);
            walk(&cfg)
        }
        Command::Ensemble(args) => {
            let cfg = args.into_config(Mode::Noisy)?;
            report(&run_experiment(&cfg)?);
            Ok(())
        }
        Command::Classical(args) => {
            let cfg = args.into_config(Mode::Classical)?;
            report(&run_experiment(&cfg)?);
            Ok(())
        }
        Command::Decoherent(args) => {
            let cfg = args.into_config(Mode::Decoherent)?;
            report(&run_experiment(&cfg)?);
            Ok(())
        }
        Command::Figures(args) => {
            let cfg = args.into_config(Mode::Noisy)?;
            let r = reproduce_figures(&cfg)?;
            report(&ExperimentReport::Noisy(r.sweep.clone()));
            println!("wrote {} files to {}", r.files.len(), r.dir.display());
            Ok(())
        }
        Command::Fit(args) => {
            let series = read_moments_csv(&args.moments)?;
            let mut windows = qwalk::config::FitWindows::default();
            if let Some(w) = args.fit_window {
                let w: TimeWindow = w.parse()?;
                windows.sqrt_tail = Some(w);
                windows.saturation = Some(w);
            }
            if let Some(w) = args.linear_window {
                windows.linear = Some(w.parse()?);
            }
            let text = fits_text(&refit_moments(&series, &windows, args.q, args.v)?);
            match args.out {
                Some(path) => write_text(&path, &text),
                None => {
                    print!("{text}");
                    Ok(())
                }
            }
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if matches!(
                e,
                Error::Config(_) | Error::Parse { .. } | Error::InvalidArgument(_) | Error::InitNotNormalized { .. }
            ) {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
