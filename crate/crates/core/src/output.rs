//! Plain-text artifacts: CSV distributions and moment series, and fit
//! records as one JSON object per line. Lines end in `\n` on every platform.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::analysis::{DistributionSnapshot, FitResult, MomentSeries, TimeWindow};
use crate::error::{Error, Result};

/// Shortest round-trip decimal; exponent form for very small or large values.
pub fn format_float(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let a = v.abs();
    if (1e-4..1e15).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

pub fn write_text(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// `n,probability` rows for `n` in `-t..=t`.
pub fn distribution_csv(snap: &DistributionSnapshot) -> String {
    let mut s = String::from("n,probability\n");
    for (n, p) in snap.support() {
        let _ = writeln!(s, "{n},{}", format_float(p));
    }
    s
}

pub fn moments_csv(series: &MomentSeries) -> String {
    let mut s = String::from("t,mean,second,sigma\n");
    for i in 0..series.len() {
        let _ = writeln!(
            s,
            "{},{},{},{}",
            series.times()[i],
            format_float(series.mean()[i]),
            format_float(series.second()[i]),
            format_float(series.sigma()[i])
        );
    }
    s
}

pub fn parse_moments_csv(text: &str, origin: &Path) -> Result<MomentSeries> {
    let err = |line: usize, msg: String| Error::Parse {
        path: origin.to_path_buf(),
        line,
        msg,
    };
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or_else(|| err(1, "empty moment file".into()))?;
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    if cols.len() < 3 || cols[0] != "t" || cols[1] != "mean" || cols[2] != "second" {
        return Err(err(1, format!("unexpected header {header:?}")));
    }
    let (mut times, mut mean, mut second) = (Vec::new(), Vec::new(), Vec::new());
    for (i, line) in lines {
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() < 3 {
            return Err(err(i + 1, format!("expected at least 3 columns, got {line:?}")));
        }
        times.push(fields[0].parse().map_err(|e| err(i + 1, format!("bad time: {e}")))?);
        mean.push(fields[1].parse().map_err(|e| err(i + 1, format!("bad mean: {e}")))?);
        second.push(fields[2].parse().map_err(|e| err(i + 1, format!("bad second moment: {e}")))?);
    }
    MomentSeries::new(times, mean, second).map_err(|e| err(0, e.to_string()))
}

pub fn read_moments_csv(path: &Path) -> Result<MomentSeries> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_moments_csv(&text, path)
}

/// One named fitted or derived quantity.
#[derive(Debug, Clone, PartialEq)]
pub struct FitRecord {
    pub name: String,
    pub value: f64,
    pub stderr: Option<f64>,
    pub window: Option<TimeWindow>,
}

impl FitRecord {
    pub fn new(name: impl Into<String>, value: f64) -> Self {
        Self {
            name: name.into(),
            value,
            stderr: None,
            window: None,
        }
    }

    pub fn with_stderr(mut self, stderr: f64) -> Self {
        self.stderr = Some(stderr);
        self
    }

    pub fn with_window(mut self, window: TimeWindow) -> Self {
        self.window = Some(window);
        self
    }

    /// Records for a fit result; `prefix` names the quantity (e.g. `"q"`).
    pub fn from_fit(prefix: &str, fit: &FitResult) -> Vec<FitRecord> {
        match *fit {
            FitResult::LinearSlope {
                slope,
                stderr,
                intercept,
                window,
            } => vec![
                FitRecord::new(prefix, slope).with_stderr(stderr).with_window(window),
                FitRecord::new(format!("{prefix}_intercept"), intercept).with_window(window),
            ],
            FitResult::SqrtTail {
                k,
                c,
                k_stderr,
                window,
            } => vec![
                FitRecord::new(prefix, k).with_stderr(k_stderr).with_window(window),
                FitRecord::new(format!("{prefix}_C"), c).with_window(window),
            ],
            FitResult::Saturation {
                n_alpha,
                stderr,
                window,
            } => vec![FitRecord::new(prefix, n_alpha).with_stderr(stderr).with_window(window)],
            FitResult::Crossover { time } => vec![FitRecord::new(prefix, time)],
            FitResult::PowerLaw { c, exponent, stderr } => vec![
                FitRecord::new(format!("{prefix}_prefactor"), c),
                FitRecord::new(format!("{prefix}_exponent"), exponent).with_stderr(stderr),
            ],
        }
    }

    pub fn to_json_line(&self) -> String {
        let num = |v: f64| {
            if v.is_finite() {
                format_float(v)
            } else {
                "null".to_string()
            }
        };
        let stderr = self.stderr.map_or_else(|| "null".to_string(), num);
        let window = self
            .window
            .map_or_else(|| "null".to_string(), |w| format!("[{}, {}]", w.start, w.end));
        format!(
            "{{\"name\": \"{}\", \"value\": {}, \"stderr\": {}, \"window\": {}}}",
            self.name,
            num(self.value),
            stderr,
            window
        )
    }
}

pub fn fits_text(records: &[FitRecord]) -> String {
    let mut s = String::new();
    for r in records {
        s.push_str(&r.to_json_line());
        s.push('\n');
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_formatting() {
        assert_eq!(format_float(0.0), "0");
        assert_eq!(format_float(0.4505), "0.4505");
        assert_eq!(format_float(1e-300), "1e-300");
        assert_eq!(format_float(-2.5e-7), "-2.5e-7");
        assert_eq!(format_float(1000.0), "1000");
        for v in [1.234_567_890_123e-9, 0.1 + 0.2, 123_456.789, 9.9e20] {
            assert_eq!(format_float(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn distribution_rows_cover_light_cone() {
        let snap = DistributionSnapshot::new(1, 3, vec![0.0, 0.0, 0.5, 0.0, 0.5, 0.0, 0.0]);
        assert_eq!(distribution_csv(&snap), "n,probability\n-1,0.5\n0,0\n1,0.5\n");
    }

    #[test]
    fn moments_round_trip() {
        let s = MomentSeries::new(vec![0, 1, 2], vec![0.0, 0.1, 0.2], vec![0.0, 1.0, 2.0 + 1e-17]).unwrap();
        let back = parse_moments_csv(&moments_csv(&s), Path::new("m.csv")).unwrap();
        assert_eq!(back, s);
        let crlf = moments_csv(&s).replace('\n', "\r\n");
        assert_eq!(parse_moments_csv(&crlf, Path::new("m.csv")).unwrap(), s);
        assert!(parse_moments_csv("a,b\n1,2\n", Path::new("m.csv")).is_err());
        assert!(parse_moments_csv("t,mean,second\n1,x,2\n", Path::new("m.csv")).is_err());
    }

    #[test]
    fn fit_json_lines() {
        let r = FitRecord::new("K", 2.5).with_stderr(0.01).with_window(TimeWindow { start: 10, end: 20 });
        assert_eq!(r.to_json_line(), r#"{"name": "K", "value": 2.5, "stderr": 0.01, "window": [10, 20]}"#);
        assert_eq!(
            FitRecord::new("T1", f64::NAN).to_json_line(),
            r#"{"name": "T1", "value": null, "stderr": null, "window": null}"#
        );
        let recs = FitRecord::from_fit("eta", &FitResult::PowerLaw { c: 0.6, exponent: 2.0, stderr: 0.1 });
        assert_eq!(recs.len(), 2);
        assert_eq!(recs[1].name, "eta_exponent");
    }
}
