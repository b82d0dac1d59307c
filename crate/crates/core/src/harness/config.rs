use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;

use crate::analytic::DenominatorMode;
use crate::error::{RcmError, Result};
use crate::geometry::{GeometryKind, GeometrySpec};

/// Largest failure probability accepted on a q grid.
pub const MAX_GRID_Q: f64 = 0.95;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Analytic,
    Simulate,
    Compare,
    Asymptotic,
    Scalability,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Analytic => "analytic",
            Command::Simulate => "simulate",
            Command::Compare => "compare",
            Command::Asymptotic => "asymptotic",
            Command::Scalability => "scalability",
        }
    }

    pub fn uses_simulator(self) -> bool {
        matches!(self, Command::Simulate | Command::Compare)
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl OutputFormat {
    pub fn name(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    }
}

impl FromStr for OutputFormat {
    type Err = RcmError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(RcmError::Config(format!("unknown format '{other}' (expected csv|json)"))),
        }
    }
}

/// Settings gathered from a config file or the command line; unset fields
/// fall back to per-command defaults.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigOverrides {
    pub geometry: Option<Vec<GeometryKind>>,
    pub d: Option<Vec<u32>>,
    pub q_start: Option<f64>,
    pub q_stop: Option<f64>,
    pub q_step: Option<f64>,
    pub trials: Option<u32>,
    pub pairs: Option<u32>,
    pub seed: Option<u64>,
    pub denominator: Option<DenominatorMode>,
    pub k_n: Option<u32>,
    pub k_s: Option<u32>,
    pub format: Option<OutputFormat>,
    pub out: Option<PathBuf>,
    pub check: Option<bool>,
}

fn parse_num<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| RcmError::Config(format!("invalid value '{value}' for {key}")))
}

pub fn parse_geometries(value: &str) -> Result<Vec<GeometryKind>> {
    if value.trim().eq_ignore_ascii_case("all") {
        return Ok(GeometryKind::ALL.to_vec());
    }
    value.split(',').map(str::parse).collect()
}

pub fn parse_d_list(value: &str) -> Result<Vec<u32>> {
    value.split(',').map(|v| parse_num("d", v)).collect()
}

impl ConfigOverrides {
    /// Reads a flat `key=value` file. Blank lines and lines starting with
    /// `#` are ignored; keys may use `-` or `_`.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| RcmError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = ConfigOverrides::default();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                RcmError::Config(format!("line {}: expected key=value", lineno + 1))
            })?;
            cfg.set(key.trim(), value.trim())
                .map_err(|e| RcmError::Config(format!("line {}: {e}", lineno + 1)))?;
        }
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key.replace('_', "-").as_str() {
            "geometry" => self.geometry = Some(parse_geometries(value)?),
            "d" => self.d = Some(parse_d_list(value)?),
            "q-start" => self.q_start = Some(parse_num(key, value)?),
            "q-stop" => self.q_stop = Some(parse_num(key, value)?),
            "q-step" => self.q_step = Some(parse_num(key, value)?),
            "trials" => self.trials = Some(parse_num(key, value)?),
            "pairs" => self.pairs = Some(parse_num(key, value)?),
            "seed" => self.seed = Some(parse_num(key, value)?),
            "denominator" => self.denominator = Some(value.parse()?),
            "kn" | "k-n" => self.k_n = Some(parse_num(key, value)?),
            "ks" | "k-s" => self.k_s = Some(parse_num(key, value)?),
            "format" => self.format = Some(value.parse()?),
            "out" => self.out = Some(PathBuf::from(value)),
            "check" => self.check = Some(parse_num(key, value)?),
            _ => return Err(RcmError::Config(format!("unknown key '{key}'"))),
        }
        Ok(())
    }

    /// Fields set in `over` replace those in `self`.
    pub fn merge(self, over: ConfigOverrides) -> ConfigOverrides {
        ConfigOverrides {
            geometry: over.geometry.or(self.geometry),
            d: over.d.or(self.d),
            q_start: over.q_start.or(self.q_start),
            q_stop: over.q_stop.or(self.q_stop),
            q_step: over.q_step.or(self.q_step),
            trials: over.trials.or(self.trials),
            pairs: over.pairs.or(self.pairs),
            seed: over.seed.or(self.seed),
            denominator: over.denominator.or(self.denominator),
            k_n: over.k_n.or(self.k_n),
            k_s: over.k_s.or(self.k_s),
            format: over.format.or(self.format),
            out: over.out.or(self.out),
            check: over.check.or(self.check),
        }
    }
}

/// A fully resolved experiment. Every field is echoed into the output.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub command: Command,
    pub geometries: Vec<GeometryKind>,
    pub d: Vec<u32>,
    pub q_start: f64,
    pub q_stop: f64,
    pub q_step: f64,
    pub trials: u32,
    pub pairs: u32,
    pub seed: u64,
    pub denominator: DenominatorMode,
    pub k_n: u32,
    pub k_s: u32,
    pub format: OutputFormat,
    pub out: Option<PathBuf>,
    pub check: bool,
}

impl ExperimentConfig {
    pub fn resolve(command: Command, o: ConfigOverrides) -> Result<Self> {
        let (d, q_start, q_stop) = match command {
            Command::Analytic | Command::Simulate | Command::Compare => (vec![16], 0.0, 0.5),
            Command::Asymptotic => ((1..=10).map(|i| 10 * i).collect(), 0.1, 0.1),
            Command::Scalability => (vec![16], 0.1, 0.1),
        };
        let cfg = ExperimentConfig {
            command,
            geometries: o.geometry.unwrap_or_else(|| GeometryKind::ALL.to_vec()),
            d: o.d.unwrap_or(d),
            q_start: o.q_start.unwrap_or(q_start),
            q_stop: o.q_stop.or(o.q_start).unwrap_or(q_stop),
            q_step: o.q_step.unwrap_or(0.05),
            trials: o.trials.unwrap_or(10),
            pairs: o.pairs.unwrap_or(2000),
            seed: o.seed.unwrap_or(42),
            denominator: o.denominator.unwrap_or_default(),
            k_n: o.k_n.unwrap_or(1),
            k_s: o.k_s.unwrap_or(1),
            format: o.format.unwrap_or_default(),
            out: o.out,
            check: o.check.unwrap_or(false),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(RcmError::Config(msg));
        if self.geometries.is_empty() {
            return bad("no geometry selected".into());
        }
        if self.d.is_empty() {
            return bad("no d selected".into());
        }
        for (name, q) in [("q-start", self.q_start), ("q-stop", self.q_stop)] {
            if !(0.0..=MAX_GRID_Q).contains(&q) {
                return bad(format!("{name}={q} outside [0, {MAX_GRID_Q}]"));
            }
        }
        if self.q_stop < self.q_start {
            return bad(format!("q-stop {} below q-start {}", self.q_stop, self.q_start));
        }
        if !(self.q_step.is_finite() && self.q_step > 0.0) {
            return bad(format!("q-step must be positive, got {}", self.q_step));
        }
        if self.trials == 0 || self.pairs == 0 {
            return bad("trials and pairs must be at least 1".into());
        }
        if self.command == Command::Scalability && self.q_start == 0.0 {
            return Err(RcmError::ZeroFailureProbability);
        }
        // Surface spec errors (bad d, k_n, k_s) before any work starts.
        self.specs()?;
        Ok(())
    }

    /// `q_start, q_start + step, ...` up to `q_stop`, rounded to ten
    /// decimals so the grid does not carry accumulated float noise.
    pub fn q_grid(&self) -> Vec<f64> {
        let count = ((self.q_stop - self.q_start) / self.q_step + 1e-9).floor() as usize + 1;
        (0..count)
            .map(|i| ((self.q_start + i as f64 * self.q_step) * 1e10).round() / 1e10)
            .collect()
    }

    /// One spec per (geometry, d) in config order.
    pub fn specs(&self) -> Result<Vec<GeometrySpec>> {
        let mut specs = Vec::with_capacity(self.geometries.len() * self.d.len());
        for &kind in &self.geometries {
            for &d in &self.d {
                specs.push(GeometrySpec::with_symphony_degree(kind, d, self.k_n, self.k_s)?);
            }
        }
        Ok(specs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_then_flags() {
        let file = ConfigOverrides::parse(
            "# sweep\ngeometry = tree,chord\nd=12\nq_start=0.1\nq-stop=0.3\ntrials=4\n\ncheck=true\n",
        )
        .unwrap();
        let flags = ConfigOverrides {
            d: Some(vec![10]),
            ..Default::default()
        };
        let cfg = ExperimentConfig::resolve(Command::Compare, file.merge(flags)).unwrap();
        assert_eq!(cfg.geometries, vec![GeometryKind::Tree, GeometryKind::Ring]);
        assert_eq!(cfg.d, vec![10]);
        assert_eq!(cfg.trials, 4);
        assert!(cfg.check);
        assert_eq!(cfg.q_grid(), vec![0.1, 0.15, 0.2, 0.25, 0.3]);
    }

    #[test]
    fn default_grids() {
        let cfg = ExperimentConfig::resolve(Command::Analytic, ConfigOverrides::default()).unwrap();
        assert_eq!(cfg.q_grid().len(), 11);
        assert_eq!(cfg.q_grid()[3], 0.15);
        assert_eq!(cfg.geometries.len(), 5);
        let cfg = ExperimentConfig::resolve(Command::Asymptotic, ConfigOverrides::default()).unwrap();
        assert_eq!(cfg.q_grid(), vec![0.1]);
        assert_eq!(cfg.d.last(), Some(&100));
    }

    #[test]
    fn single_point_grid_from_start_only() {
        let o = ConfigOverrides {
            q_start: Some(0.3),
            ..Default::default()
        };
        let cfg = ExperimentConfig::resolve(Command::Scalability, o).unwrap();
        assert_eq!(cfg.q_grid(), vec![0.3]);
    }

    #[test]
    fn rejects_bad_settings() {
        assert!(ConfigOverrides::parse("colour=blue").is_err());
        assert!(ConfigOverrides::parse("just words").is_err());
        assert!(ConfigOverrides::parse("trials=-3").is_err());
        let resolve = |o| ExperimentConfig::resolve(Command::Analytic, o);
        assert!(resolve(ConfigOverrides::parse("q-stop=0.99").unwrap()).is_err());
        assert!(resolve(ConfigOverrides::parse("q-start=0.4\nq-stop=0.2").unwrap()).is_err());
        assert!(resolve(ConfigOverrides::parse("q-step=0").unwrap()).is_err());
        assert!(resolve(ConfigOverrides::parse("d=0").unwrap()).is_err());
        assert!(resolve(ConfigOverrides::parse("ks=0").unwrap()).is_err());
        let zero = ConfigOverrides::parse("q-start=0").unwrap();
        assert_eq!(
            ExperimentConfig::resolve(Command::Scalability, zero),
            Err(RcmError::ZeroFailureProbability)
        );
    }
}
