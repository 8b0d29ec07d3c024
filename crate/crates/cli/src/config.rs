//! Experiment configuration: defaults, key-value config files, and CLI
//! flag overrides (flags win over the file, the file wins over defaults).

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use dichotomy_core::models::{DynamicalModel, Lorenz96, LtvModel, SINUSOIDAL_CATALOG_SEED};

use crate::CliError;

/// Which subcommand a config is being resolved for (commands differ only in
/// a few defaults).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    Spectrum,
    Observe,
    Ensemble,
    Verify,
}

/// Partial configuration collected from a file and/or CLI flags.
#[derive(Debug, Clone, Default)]
pub struct RawConfig {
    pub model: Option<String>,
    pub n: Option<usize>,
    pub forcing: Option<f64>,
    pub p: Option<usize>,
    pub k: Option<usize>,
    pub h: Option<f64>,
    pub t0: Option<f64>,
    pub tf: Option<f64>,
    pub burn_in: Option<f64>,
    pub windows: Option<Vec<f64>>,
    pub seed: Option<u64>,
    pub runs: Option<usize>,
    pub delta: Option<f64>,
    pub g1_scale: Option<f64>,
    pub p1_scale: Option<f64>,
    pub margin: Option<f64>,
    pub workers: Option<usize>,
    pub conv_threshold: Option<f64>,
    pub definiteness_every: Option<usize>,
    pub ref_rate: Option<f64>,
    pub fit_start: Option<f64>,
    pub fit_end: Option<f64>,
    pub out: Option<PathBuf>,
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value
        .parse::<T>()
        .map_err(|_| CliError::Config(format!("invalid value for `{key}`: {value}")))
}

/// Comma-separated window list, e.g. `300,800`.
pub fn parse_windows(key: &str, value: &str) -> Result<Vec<f64>, CliError> {
    value
        .split(',')
        .map(|s| parse::<f64>(key, s.trim()))
        .collect()
}

impl RawConfig {
    /// Parses a `key = value` file (one pair per line, `#` comments). Keys
    /// use the flag names with `-` or `_` interchangeably.
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)?;
        let mut map = BTreeMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Config(format!(
                    "{}:{}: expected `key = value`",
                    path.display(),
                    lineno + 1
                ))
            })?;
            map.insert(key.trim().replace('-', "_"), value.trim().to_string());
        }
        let mut raw = RawConfig::default();
        for (key, value) in &map {
            match key.as_str() {
                "model" => raw.model = Some(value.clone()),
                "n" => raw.n = Some(parse(key, value)?),
                "forcing" => raw.forcing = Some(parse(key, value)?),
                "p" => raw.p = Some(parse(key, value)?),
                "k" => raw.k = Some(parse(key, value)?),
                "h" => raw.h = Some(parse(key, value)?),
                "t0" => raw.t0 = Some(parse(key, value)?),
                "tf" => raw.tf = Some(parse(key, value)?),
                "burn_in" => raw.burn_in = Some(parse(key, value)?),
                "windows" => raw.windows = Some(parse_windows(key, value)?),
                "seed" => raw.seed = Some(parse(key, value)?),
                "runs" => raw.runs = Some(parse(key, value)?),
                "delta" => raw.delta = Some(parse(key, value)?),
                "g1_scale" => raw.g1_scale = Some(parse(key, value)?),
                "p1_scale" => raw.p1_scale = Some(parse(key, value)?),
                "margin" => raw.margin = Some(parse(key, value)?),
                "workers" => raw.workers = Some(parse(key, value)?),
                "conv_threshold" => raw.conv_threshold = Some(parse(key, value)?),
                "definiteness_every" => raw.definiteness_every = Some(parse(key, value)?),
                "ref_rate" => raw.ref_rate = Some(parse(key, value)?),
                "fit_start" => raw.fit_start = Some(parse(key, value)?),
                "fit_end" => raw.fit_end = Some(parse(key, value)?),
                "out" => raw.out = Some(PathBuf::from(value)),
                other => {
                    return Err(CliError::Config(format!(
                        "unknown config key `{other}` in {}",
                        path.display()
                    )))
                }
            }
        }
        Ok(raw)
    }

    /// Overlays `other` (e.g. CLI flags) on top of `self`.
    pub fn overlay(mut self, other: RawConfig) -> Self {
        macro_rules! take {
            ($($f:ident),*) => { $( if other.$f.is_some() { self.$f = other.$f; } )* };
        }
        take!(
            model, n, forcing, p, k, h, t0, tf, burn_in, windows, seed, runs, delta, g1_scale,
            p1_scale, margin, workers, conv_threshold, definiteness_every, ref_rate, fit_start,
            fit_end, out
        );
        self
    }

    /// Fills in per-command defaults and validates.
    pub fn resolve(self, cmd: CommandKind) -> Result<ExperimentConfig, CliError> {
        let model = self.model.unwrap_or_else(|| "lorenz96".into());
        let n = self.n.unwrap_or(18);
        let tf = self.tf.unwrap_or(50.0);
        let cfg = ExperimentConfig {
            model,
            n,
            forcing: self.forcing.unwrap_or(8.0),
            p: self.p.unwrap_or(5),
            k: self.k.unwrap_or(match cmd {
                CommandKind::Spectrum => 9,
                _ => 7,
            }),
            h: self.h.unwrap_or(0.005),
            t0: self.t0.unwrap_or(0.0),
            tf,
            burn_in: self.burn_in.unwrap_or(10.0),
            windows: self.windows.unwrap_or_else(|| vec![20.0]),
            seed: self.seed.unwrap_or(42),
            runs: self.runs.unwrap_or(match cmd {
                CommandKind::Verify => 20,
                _ => 10,
            }),
            delta: self.delta.unwrap_or(1e-3),
            g1_scale: self.g1_scale.unwrap_or(10.0),
            p1_scale: self.p1_scale.unwrap_or(1.0),
            margin: self.margin.unwrap_or(0.0),
            workers: self.workers.unwrap_or(0),
            conv_threshold: self.conv_threshold.unwrap_or(1e-8),
            definiteness_every: self.definiteness_every.unwrap_or(100),
            ref_rate: self.ref_rate,
            fit_start: self.fit_start,
            fit_end: self.fit_end,
            out: self.out.unwrap_or_else(|| PathBuf::from("out")),
        };
        cfg.validate(cmd)?;
        Ok(cfg)
    }
}

/// Fully resolved experiment parameters.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub model: String,
    pub n: usize,
    pub forcing: f64,
    pub p: usize,
    pub k: usize,
    pub h: f64,
    pub t0: f64,
    pub tf: f64,
    pub burn_in: f64,
    pub windows: Vec<f64>,
    pub seed: u64,
    pub runs: usize,
    pub delta: f64,
    pub g1_scale: f64,
    pub p1_scale: f64,
    pub margin: f64,
    pub workers: usize,
    pub conv_threshold: f64,
    /// Riccati definiteness-check cadence in steps (0 disables).
    pub definiteness_every: usize,
    pub ref_rate: Option<f64>,
    pub fit_start: Option<f64>,
    pub fit_end: Option<f64>,
    pub out: PathBuf,
}

impl ExperimentConfig {
    fn validate(&self, cmd: CommandKind) -> Result<(), CliError> {
        let fail = |msg: String| Err(CliError::Config(msg));
        if !(self.h.is_finite() && self.h > 0.0) {
            return fail(format!("h: step size must be positive, got {}", self.h));
        }
        if !(self.tf.is_finite() && self.tf >= self.t0) {
            return fail(format!("tf: must satisfy tf >= t0, got [{}, {}]", self.t0, self.tf));
        }
        if self.burn_in < 0.0 {
            return fail(format!("burn_in: must be >= 0, got {}", self.burn_in));
        }
        if self.delta < 0.0 {
            return fail(format!("delta: must be >= 0, got {}", self.delta));
        }
        if self.runs == 0 {
            return fail("runs: must be >= 1".into());
        }
        if cmd == CommandKind::Ensemble && self.runs < 2 {
            return fail("runs: ensemble quantiles need at least 2 runs".into());
        }
        if cmd == CommandKind::Spectrum {
            let usable = self.tf - self.t0 - self.burn_in;
            for &w in &self.windows {
                if !(w > 0.0) {
                    return fail(format!("windows: lengths must be positive, got {w}"));
                }
                if w > usable {
                    return fail(format!(
                        "windows: H = {w} exceeds usable horizon tf - t0 - burn_in = {usable}"
                    ));
                }
            }
        }
        Ok(())
    }

    /// Builds the configured model. `n`, `forcing`, and `p` apply to
    /// `lorenz96`; catalog models have fixed dimensions.
    pub fn build_model(&self) -> Result<Box<dyn DynamicalModel + Send + Sync>, CliError> {
        let model: Box<dyn DynamicalModel + Send + Sync> = match self.model.as_str() {
            "lorenz96" => Box::new(
                Lorenz96::new(self.n, self.forcing, self.p)
                    .map_err(|e| CliError::Config(format!("model: {e}")))?,
            ),
            "double_integrator" => Box::new(LtvModel::double_integrator()),
            "scalar_counterexample" => Box::new(LtvModel::scalar_counterexample()),
            "diag_lti" => Box::new(LtvModel::diag_lti(&[2.0, -1.0])),
            "sin_ltv" => Box::new(LtvModel::sinusoidal(4, SINUSOIDAL_CATALOG_SEED)),
            other => {
                return Err(CliError::Config(format!(
                    "model: unknown tag `{other}` (expected lorenz96, double_integrator, \
                     scalar_counterexample, diag_lti, sin_ltv)"
                )))
            }
        };
        if self.k == 0 || self.k > model.dim() {
            return Err(CliError::Config(format!(
                "k: subspace dimension {} outside 1..={} for model `{}`",
                self.k,
                model.dim(),
                self.model
            )));
        }
        Ok(model)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn defaults_resolve_per_command() {
        let spectrum = RawConfig::default().resolve(CommandKind::Spectrum).unwrap();
        assert_eq!(spectrum.k, 9);
        assert_eq!(spectrum.runs, 10);
        let verify = RawConfig::default().resolve(CommandKind::Verify).unwrap();
        assert_eq!(verify.k, 7);
        assert_eq!(verify.runs, 20);
    }

    #[test]
    fn file_then_flags_precedence() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "# comment\nmodel = diag_lti\nseed = 7\nwindows = 5,10").unwrap();
        let file = RawConfig::from_file(f.path()).unwrap();
        let flags = RawConfig {
            seed: Some(9),
            k: Some(2),
            ..Default::default()
        };
        let cfg = file.overlay(flags).resolve(CommandKind::Spectrum).unwrap();
        assert_eq!(cfg.model, "diag_lti");
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.k, 2);
        assert_eq!(cfg.windows, vec![5.0, 10.0]);
    }

    #[test]
    fn validation_names_offending_field() {
        let raw = RawConfig {
            windows: Some(vec![100.0]),
            tf: Some(50.0),
            ..Default::default()
        };
        let err = raw.resolve(CommandKind::Spectrum).unwrap_err();
        assert!(matches!(&err, CliError::Config(msg) if msg.contains("windows")));

        let raw = RawConfig {
            k: Some(10),
            model: Some("diag_lti".into()),
            ..Default::default()
        };
        let cfg = raw.resolve(CommandKind::Spectrum).unwrap();
        let err = match cfg.build_model() {
            Ok(_) => panic!("k = 10 must be rejected for a 2-state model"),
            Err(e) => e,
        };
        assert!(matches!(&err, CliError::Config(msg) if msg.contains("k:")));
    }

    #[test]
    fn unknown_key_rejected() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "stepsize = 0.1").unwrap();
        let err = RawConfig::from_file(f.path()).unwrap_err();
        assert!(matches!(&err, CliError::Config(msg) if msg.contains("stepsize")));
    }
}
