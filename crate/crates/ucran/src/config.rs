//! Scenario config files. The format is TOML with one table per config
//! section (`[scenario]`, `[topology]`, `[power.frrh]`, ...); omitted keys
//! take their defaults and unknown keys are rejected.

use std::fmt;
use std::path::Path;

use ucran_core::{Error, ScenarioConfig};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub origin: String,
    /// 1-based source line, when the problem can be pinned to one.
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "{}:{}: {}", self.origin, l, self.message),
            None => write!(f, "{}: {}", self.origin, self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

/// Read, parse and validate a config file.
pub fn load_config(path: impl AsRef<Path>) -> Result<ScenarioConfig, ConfigError> {
    let path = path.as_ref();
    let origin = path.display().to_string();
    let src = std::fs::read_to_string(path).map_err(|e| ConfigError {
        origin: origin.clone(),
        line: None,
        message: format!("cannot read: {e}"),
    })?;
    parse_config(&src, &origin)
}

/// Parse and validate config text; `origin` names it in error messages.
pub fn parse_config(src: &str, origin: &str) -> Result<ScenarioConfig, ConfigError> {
    let config: ScenarioConfig = toml::from_str(src).map_err(|e| ConfigError {
        origin: origin.to_string(),
        line: e.span().map(|s| line_of(src, s.start)),
        message: e.message().trim().to_string(),
    })?;
    config.validate().map_err(|e| {
        let line = match &e {
            Error::Validation { field, .. } => key_line(src, field),
            _ => None,
        };
        ConfigError {
            origin: origin.to_string(),
            line,
            message: e.to_string(),
        }
    })?;
    Ok(config)
}

fn line_of(src: &str, offset: usize) -> usize {
    src[..offset.min(src.len())].bytes().filter(|&b| b == b'\n').count() + 1
}

/// Line defining the dotted config path `field`, or failing that the line
/// of its enclosing table header.
pub fn key_line(src: &str, field: &str) -> Option<usize> {
    let mut table = String::new();
    let mut header_line = None;
    let parent = field.rsplit_once('.').map_or("", |(p, _)| p);
    for (i, raw) in src.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            table = name.trim().to_string();
            if table == parent {
                header_line = Some(i + 1);
            }
            continue;
        }
        let Some((key, _)) = line.split_once('=') else { continue };
        let key = key.trim().trim_matches('"');
        let full = if table.is_empty() {
            key.to_string()
        } else {
            format!("{table}.{key}")
        };
        if full == field {
            return Some(i + 1);
        }
    }
    header_line
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_is_default() {
        assert_eq!(parse_config("", "x").unwrap(), ScenarioConfig::default());
    }

    #[test]
    fn unknown_key_has_line() {
        let err = parse_config("[scenario]\nseed = 3\nbogus = 1\n", "f.cfg").unwrap_err();
        assert_eq!(err.line, Some(3), "{err}");
        assert!(err.to_string().starts_with("f.cfg:3:"));
    }

    #[test]
    fn validation_error_has_line() {
        let src = "[scenario]\nseed = 3\n\n[power.frrh]\nhover_w = 100.0\nbattery_wh = -1.0\n";
        let err = parse_config(src, "f").unwrap_err();
        assert_eq!(err.line, Some(6), "{err}");
        assert!(err.message.contains("power.frrh.battery_wh"));
    }

    #[test]
    fn negative_duration_fails() {
        let err = parse_config("[scenario]\nduration_s = -5.0\n", "f").unwrap_err();
        assert_eq!(err.line, Some(2));
    }

    #[test]
    fn header_fallback() {
        let src = "[controller]\nrecall_threshold_pct = 10\n";
        assert_eq!(key_line(src, "controller.deploy_threshold_pct"), Some(1));
        assert_eq!(key_line(src, "traffic.mean_holding_s"), None);
    }
}
