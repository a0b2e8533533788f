//! Experiment configuration and its flat `key = value` file format.
//!
//! Recognized keys (one per line, `#` starts a comment):
//!
//! | key                     | value                                              |
//! |-------------------------|----------------------------------------------------|
//! | `preset`                | `desk` or `paper`; applied before all other keys    |
//! | `mode`                  | `noiseless`, `noisy`, `classical`, `decoherent`     |
//! | `init`                  | `symmetric`, `right`, `custom:cr_re,cr_im,cl_re,cl_im` |
//! | `tmax`                  | number of steps                                    |
//! | `snapshots`             | comma-separated times for distribution dumps       |
//! | `alphas`                | comma-separated noise levels                       |
//! | `ps`                    | comma-separated measurement probabilities          |
//! | `runs_weak`             | runs per noise level below `strong_threshold`      |
//! | `runs_strong`           | runs per noise level at or above it                |
//! | `strong_threshold`      | noise level separating the two run counts          |
//! | `runs_decoherent`       | trajectories per measurement probability           |
//! | `seed`                  | master seed                                        |
//! | `moment_stride`         | record moments every this many steps               |
//! | `fit_window_linear`     | `start:end` for the noiseless slopes q and v       |
//! | `fit_window_sqrt`       | `start:end` for the `K sqrt(t) + C` tail            |
//! | `fit_window_saturation` | `start:end` for the mean-position plateau          |
//! | `out`                   | output directory                                   |
//! | `workers`               | worker threads                                     |

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use num_complex::Complex64;

use crate::analysis::TimeWindow;
use crate::error::{Error, Result};
use crate::state::InitialCondition;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Noiseless,
    Noisy,
    Classical,
    Decoherent,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Noiseless => "noiseless",
            Mode::Noisy => "noisy",
            Mode::Classical => "classical",
            Mode::Decoherent => "decoherent",
        }
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "noiseless" => Ok(Mode::Noiseless),
            "noisy" => Ok(Mode::Noisy),
            "classical" => Ok(Mode::Classical),
            "decoherent" => Ok(Mode::Decoherent),
            other => Err(Error::Config(format!("unknown mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// Full protocol: 10^4 steps, 200 / 4000 runs.
    Paper,
    /// Reduced protocol: 2000 steps, 200 / 1000 runs.
    Desk,
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "paper" => Ok(Preset::Paper),
            "desk" => Ok(Preset::Desk),
            other => Err(Error::Config(format!("unknown preset {other:?}"))),
        }
    }
}

pub fn parse_init(s: &str) -> Result<InitialCondition> {
    let s = s.trim();
    match s {
        "symmetric" => return Ok(InitialCondition::SymmetricOrigin),
        "right" => return Ok(InitialCondition::RightOrigin),
        _ => {}
    }
    let body = s
        .strip_prefix("custom:")
        .ok_or_else(|| Error::Config(format!("unknown initial condition {s:?}")))?;
    let parts = parse_list::<f64>(body)?;
    let [rr, ri, lr, li] = parts[..] else {
        return Err(Error::Config(format!(
            "custom initial condition needs 4 numbers, got {}",
            parts.len()
        )));
    };
    let init = InitialCondition::CustomOrigin {
        r: Complex64::new(rr, ri),
        l: Complex64::new(lr, li),
    };
    init.amplitudes()?;
    Ok(init)
}

pub fn format_init(init: &InitialCondition) -> String {
    match init {
        InitialCondition::SymmetricOrigin => "symmetric".into(),
        InitialCondition::RightOrigin => "right".into(),
        InitialCondition::CustomOrigin { r, l } => {
            format!("custom:{},{},{},{}", r.re, r.im, l.re, l.im)
        }
    }
}

fn parse_list<T: FromStr>(s: &str) -> Result<Vec<T>>
where
    T::Err: fmt::Display,
{
    s.split(',')
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .map(|x| {
            x.parse::<T>()
                .map_err(|e| Error::Config(format!("bad list entry {x:?}: {e}")))
        })
        .collect()
}

fn join<T: fmt::Display>(xs: &[T]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

/// Run counts per noise level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunPolicy {
    pub weak: usize,
    pub strong: usize,
    pub strong_threshold: f64,
}

impl RunPolicy {
    pub fn runs_for(&self, alpha: f64) -> usize {
        if alpha < self.strong_threshold {
            self.weak
        } else {
            self.strong
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct FitWindows {
    pub linear: Option<TimeWindow>,
    pub sqrt_tail: Option<TimeWindow>,
    pub saturation: Option<TimeWindow>,
}

impl FitWindows {
    /// Last half of the noiseless series.
    pub fn linear_or_default(&self, t_max: usize) -> TimeWindow {
        self.linear
            .unwrap_or_else(|| TimeWindow::trailing_fraction(t_max, 1, 2))
    }

    /// Last half of the series.
    pub fn sqrt_tail_or_default(&self, t_max: usize) -> TimeWindow {
        self.sqrt_tail
            .unwrap_or_else(|| TimeWindow::trailing_fraction(t_max, 1, 2))
    }

    /// Last quarter of the series.
    pub fn saturation_or_default(&self, t_max: usize) -> TimeWindow {
        self.saturation
            .unwrap_or_else(|| TimeWindow::trailing_fraction(t_max, 1, 4))
    }
}

/// Default noise sweep for the full protocol.
pub const PAPER_ALPHAS: [f64; 8] = [0.025, 0.03, 0.04, 0.05, 0.07, 0.1, 0.14, 0.2];

/// Sweep for the reduced protocol; starts at 0.05 so every level crosses
/// over well before 2000 steps.
pub const DESK_ALPHAS: [f64; 7] = [0.05, 0.07, 0.1, 0.14, 0.2, 0.28, 0.4];

/// 1-2-5 ladder plus 250, capped at `t_max` (and always including it).
pub fn default_snapshots(t_max: usize) -> Vec<usize> {
    let mut times = vec![250];
    let mut decade = 10;
    while decade <= t_max {
        times.extend([decade, 2 * decade, 5 * decade]);
        decade *= 10;
    }
    times.push(t_max);
    times.retain(|&t| t <= t_max);
    times.sort_unstable();
    times.dedup();
    times
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub init: InitialCondition,
    pub t_max: usize,
    pub snapshots: Vec<usize>,
    pub alphas: Vec<f64>,
    pub ps: Vec<f64>,
    pub runs: RunPolicy,
    pub runs_decoherent: usize,
    pub master_seed: u64,
    pub moment_stride: usize,
    pub fit_windows: FitWindows,
    pub out: PathBuf,
    pub workers: usize,
}

impl ExperimentConfig {
    pub fn preset(preset: Preset) -> Self {
        let (t_max, alphas, strong) = match preset {
            Preset::Paper => (10_000, PAPER_ALPHAS.to_vec(), 4000),
            Preset::Desk => (2000, DESK_ALPHAS.to_vec(), 1000),
        };
        ExperimentConfig {
            mode: Mode::Noisy,
            init: InitialCondition::RightOrigin,
            t_max,
            snapshots: default_snapshots(t_max),
            alphas,
            ps: vec![0.1],
            runs: RunPolicy {
                weak: 200,
                strong,
                strong_threshold: 0.07,
            },
            runs_decoherent: 2000,
            master_seed: 1,
            moment_stride: 1,
            fit_windows: FitWindows::default(),
            out: PathBuf::from("out"),
            workers: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.t_max == 0 {
            return bad("tmax must be at least 1".into());
        }
        if let Some(t) = self.snapshots.iter().find(|&&t| t > self.t_max) {
            return bad(format!("snapshot time {t} exceeds tmax {}", self.t_max));
        }
        if self.runs.weak == 0 || self.runs.strong == 0 || self.runs_decoherent == 0 {
            return bad("run counts must be at least 1".into());
        }
        if !(self.runs.strong_threshold.is_finite()) {
            return bad("strong_threshold must be finite".into());
        }
        if let Some(a) = self.alphas.iter().find(|a| !(a.is_finite() && **a >= 0.0)) {
            return bad(format!("noise level {a} must be finite and non-negative"));
        }
        if let Some(p) = self.ps.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return bad(format!("measurement probability {p} outside [0, 1]"));
        }
        if self.moment_stride == 0 {
            return bad("moment_stride must be at least 1".into());
        }
        if self.workers == 0 {
            return bad("workers must be at least 1".into());
        }
        let windows = [
            ("fit_window_linear", self.fit_windows.linear),
            ("fit_window_sqrt", self.fit_windows.sqrt_tail),
            ("fit_window_saturation", self.fit_windows.saturation),
        ];
        for (key, w) in windows {
            if let Some(w) = w {
                if w.end > self.t_max {
                    return bad(format!("{key} {w} extends past tmax {}", self.t_max));
                }
            }
        }
        self.init.amplitudes()?;
        Ok(())
    }

    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        let num = |v: &str| -> Result<usize> {
            v.parse()
                .map_err(|e| Error::Config(format!("{key}: bad integer {v:?}: {e}")))
        };
        let float = |v: &str| -> Result<f64> {
            v.parse()
                .map_err(|e| Error::Config(format!("{key}: bad number {v:?}: {e}")))
        };
        let window = |v: &str| -> Result<Option<TimeWindow>> {
            if v.is_empty() || v == "default" {
                Ok(None)
            } else {
                v.parse().map(Some)
            }
        };
        match key.trim() {
            "preset" => {}
            "mode" => self.mode = value.parse()?,
            "init" => self.init = parse_init(value)?,
            "tmax" => self.t_max = num(value)?,
            "snapshots" => self.snapshots = parse_list(value)?,
            "alphas" | "alpha" => self.alphas = parse_list(value)?,
            "ps" | "p" => self.ps = parse_list(value)?,
            "runs" => {
                let n = num(value)?;
                self.runs.weak = n;
                self.runs.strong = n;
                self.runs_decoherent = n;
            }
            "runs_weak" => self.runs.weak = num(value)?,
            "runs_strong" => self.runs.strong = num(value)?,
            "strong_threshold" => self.runs.strong_threshold = float(value)?,
            "runs_decoherent" => self.runs_decoherent = num(value)?,
            "seed" => {
                self.master_seed = value
                    .parse()
                    .map_err(|e| Error::Config(format!("seed: bad integer {value:?}: {e}")))?
            }
            "moment_stride" => self.moment_stride = num(value)?,
            "fit_window_linear" => self.fit_windows.linear = window(value)?,
            "fit_window_sqrt" => self.fit_windows.sqrt_tail = window(value)?,
            "fit_window_saturation" => self.fit_windows.saturation = window(value)?,
            "out" => self.out = PathBuf::from(value),
            "workers" => self.workers = num(value)?,
            other => return Err(Error::Config(format!("unknown key {other:?}"))),
        }
        Ok(())
    }

    /// Serializes every key; [`ExperimentConfig::parse`] reads it back.
    pub fn to_kv_string(&self) -> String {
        let w = |w: Option<TimeWindow>| w.map_or_else(|| "default".to_string(), |w| w.to_string());
        let mut s = String::new();
        let _ = writeln!(s, "mode = {}", self.mode.as_str());
        let _ = writeln!(s, "init = {}", format_init(&self.init));
        let _ = writeln!(s, "tmax = {}", self.t_max);
        let _ = writeln!(s, "snapshots = {}", join(&self.snapshots));
        let _ = writeln!(s, "alphas = {}", join(&self.alphas));
        let _ = writeln!(s, "ps = {}", join(&self.ps));
        let _ = writeln!(s, "runs_weak = {}", self.runs.weak);
        let _ = writeln!(s, "runs_strong = {}", self.runs.strong);
        let _ = writeln!(s, "strong_threshold = {}", self.runs.strong_threshold);
        let _ = writeln!(s, "runs_decoherent = {}", self.runs_decoherent);
        let _ = writeln!(s, "seed = {}", self.master_seed);
        let _ = writeln!(s, "moment_stride = {}", self.moment_stride);
        let _ = writeln!(s, "fit_window_linear = {}", w(self.fit_windows.linear));
        let _ = writeln!(s, "fit_window_sqrt = {}", w(self.fit_windows.sqrt_tail));
        let _ = writeln!(s, "fit_window_saturation = {}", w(self.fit_windows.saturation));
        let _ = writeln!(s, "out = {}", self.out.display());
        let _ = writeln!(s, "workers = {}", self.workers);
        s
    }

    /// Parses config text on top of its `preset` (desk when absent).
    pub fn parse(text: &str) -> Result<Self> {
        Self::parse_with(text, None, Path::new("<config>"))
    }

    /// Parses `text`; `preset` overrides any `preset` key in the text.
    pub fn parse_with(text: &str, preset: Option<Preset>, origin: &Path) -> Result<Self> {
        let entries = parse_kv(text, origin)?;
        let preset = match preset {
            Some(p) => p,
            None => entries
                .get("preset")
                .map(|(_, v)| v.parse())
                .transpose()?
                .unwrap_or(Preset::Desk),
        };
        let mut cfg = Self::preset(preset);
        let mut ordered: Vec<_> = entries.iter().collect();
        ordered.sort_by_key(|(_, (line, _))| *line);
        for (key, (line, value)) in ordered {
            cfg.set(key, value).map_err(|e| Error::Parse {
                path: origin.to_path_buf(),
                line: *line,
                msg: e.to_string(),
            })?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path, preset: Option<Preset>) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_with(&text, preset, path)
    }
}

fn parse_kv(text: &str, origin: &Path) -> Result<BTreeMap<String, (usize, String)>> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
            path: origin.to_path_buf(),
            line: i + 1,
            msg: format!("expected key = value, got {line:?}"),
        })?;
        out.insert(k.trim().to_string(), (i + 1, v.trim().to_string()));
    }
    Ok(out)
}
