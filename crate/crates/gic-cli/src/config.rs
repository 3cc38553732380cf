//! Generator settings from flags and `key=value` files.

use std::path::Path;
use std::time::Duration;

use clap::Args;
use gic_core::eval::{parse_families, ExperimentConfig};
use gic_core::pha::Criterion;

use crate::CliError;

/// Generator flags. Every field is optional so that a config file can fill
/// what the command line leaves out.
#[derive(Args, Clone, Debug, Default)]
pub struct GenFlags {
    /// Hyperplane selection criterion: h1, h2 or h3.
    #[arg(long)]
    pub sc: Option<String>,
    /// Objective families, any of r, v, t, s (e.g. `r,v,t,s`).
    #[arg(long)]
    pub obj: Option<String>,
    /// Targeted tilting: on or off.
    #[arg(long)]
    pub tilt: Option<String>,
    /// Hyperplanes activated per split, 0 to 4.
    #[arg(long)]
    pub kh: Option<String>,
    /// Cap on generated cuts.
    #[arg(long)]
    pub max_cuts: Option<String>,
    /// Cap on point-ray LP objectives per split and family.
    #[arg(long)]
    pub obj_points: Option<String>,
    /// Seconds allowed per objective family.
    #[arg(long)]
    pub obj_time: Option<String>,
    /// Seconds allowed per instance.
    #[arg(long)]
    pub time_limit: Option<String>,
    /// Rounds of cuts, 1 or 2.
    #[arg(long)]
    pub rounds: Option<String>,
    /// Seed recorded with the output; generation has no random choices.
    #[arg(long)]
    pub seed: Option<String>,
    /// File of `key=value` lines with the same keys as the flags.
    #[arg(long)]
    pub config: Option<std::path::PathBuf>,
}

const KEYS: [&str; 10] = [
    "sc", "obj", "tilt", "kh", "max-cuts", "obj-points", "obj-time", "time-limit", "rounds", "seed",
];

impl GenFlags {
    fn slot(&mut self, key: &str) -> Option<&mut Option<String>> {
        Some(match key {
            "sc" => &mut self.sc,
            "obj" => &mut self.obj,
            "tilt" => &mut self.tilt,
            "kh" => &mut self.kh,
            "max-cuts" => &mut self.max_cuts,
            "obj-points" => &mut self.obj_points,
            "obj-time" => &mut self.obj_time,
            "time-limit" => &mut self.time_limit,
            "rounds" => &mut self.rounds,
            "seed" => &mut self.seed,
            _ => return None,
        })
    }

    /// Fills unset fields from `text`. Blank lines and `#` comments are
    /// skipped; keys may use `-` or `_`.
    pub fn merge_text(&mut self, text: &str) -> Result<(), CliError> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("config line {}: expected key=value", i + 1)))?;
            let key = k.trim().to_ascii_lowercase().replace('_', "-");
            let value = v.trim().trim_matches('"').to_string();
            let slot = self.slot(&key).ok_or_else(|| {
                CliError::Config(format!("config line {}: unknown key '{key}' (known: {})", i + 1, KEYS.join(", ")))
            })?;
            if slot.is_none() {
                *slot = Some(value);
            }
        }
        Ok(())
    }

    pub fn merge_file(&mut self) -> Result<(), CliError> {
        if let Some(path) = self.config.clone() {
            let text = read(&path)?;
            self.merge_text(&text)?;
        }
        Ok(())
    }

    /// Resolved configuration and seed. Invalid values and combinations that
    /// leave no activation mechanism are configuration errors.
    pub fn resolve(&self) -> Result<(ExperimentConfig, u64), CliError> {
        let mut cfg = ExperimentConfig::default();
        if let Some(s) = &self.sc {
            cfg.criterion = s.parse::<Criterion>().map_err(CliError::Config)?;
        }
        if let Some(s) = &self.obj {
            cfg.families = parse_families(s).map_err(CliError::Config)?;
        }
        if let Some(s) = &self.tilt {
            cfg.tilting = match s.to_ascii_lowercase().as_str() {
                "on" | "true" | "1" => true,
                "off" | "false" | "0" => false,
                other => return Err(CliError::Config(format!("tilt must be on or off, got '{other}'"))),
            };
        }
        if let Some(s) = &self.kh {
            cfg.kh = number("kh", s)?;
        }
        if let Some(s) = &self.max_cuts {
            cfg.max_cuts = number("max-cuts", s)?;
        }
        if let Some(s) = &self.obj_points {
            cfg.obj_points = number("obj-points", s)?;
        }
        if let Some(s) = &self.obj_time {
            cfg.obj_time = seconds("obj-time", s)?;
        }
        if let Some(s) = &self.time_limit {
            cfg.time_limit = seconds("time-limit", s)?;
        }
        if let Some(s) = &self.rounds {
            cfg.rounds = number("rounds", s)?;
            if !(1..=2).contains(&cfg.rounds) {
                return Err(CliError::Config(format!("rounds must be 1 or 2, got {}", cfg.rounds)));
            }
        }
        let seed = match &self.seed {
            Some(s) => number("seed", s)?,
            None => 0,
        };
        cfg.pha_config().validate().map_err(|e| CliError::Config(e.to_string()))?;
        Ok((cfg, seed))
    }
}

fn number<T: std::str::FromStr>(key: &str, s: &str) -> Result<T, CliError> {
    s.trim()
        .parse()
        .map_err(|_| CliError::Config(format!("{key}: not a nonnegative integer: '{s}'")))
}

fn seconds(key: &str, s: &str) -> Result<Duration, CliError> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| CliError::Config(format!("{key}: not a number of seconds: '{s}'")))?;
    if !(v.is_finite() && v > 0.0) {
        return Err(CliError::Config(format!("{key}: must be positive, got {v}")));
    }
    Ok(Duration::from_secs_f64(v))
}

pub fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_win_over_file() {
        let mut f = GenFlags {
            kh: Some("3".into()),
            ..Default::default()
        };
        f.merge_text("kh = 1\n# comment\nsc=h2\nmax_cuts=7\n").unwrap();
        let (cfg, _) = f.resolve().unwrap();
        assert_eq!(cfg.kh, 3);
        assert_eq!(cfg.criterion, Criterion::H2);
        assert_eq!(cfg.max_cuts, 7);
    }

    #[test]
    fn rejects_unknown_keys_and_no_activation() {
        let mut f = GenFlags::default();
        assert!(matches!(f.merge_text("depth=2"), Err(CliError::Config(_))));
        let f = GenFlags {
            kh: Some("0".into()),
            tilt: Some("off".into()),
            ..Default::default()
        };
        assert!(matches!(f.resolve(), Err(CliError::Config(_))));
    }

    #[test]
    fn defaults_match_the_fixed_parameters() {
        let (cfg, seed) = GenFlags::default().resolve().unwrap();
        assert_eq!(cfg.max_cuts, 1000);
        assert_eq!(cfg.obj_points, 1000);
        assert_eq!(cfg.obj_time, Duration::from_secs(5));
        assert_eq!(cfg.time_limit, Duration::from_secs(3600));
        assert_eq!(seed, 0);
    }
}
