//! Run configuration shared by the CLI and reproducible pipelines: input
//! network, per-vertex topology choices, numerical parameters, output
//! directory. Round-trips losslessly through JSON.

use crate::net::{enumerate_resolutions, NetError, TopologyDescriptor};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("bad topology choice string '{0}': {1}")]
    BadChoice(String, String),
    #[error("tolerance {0} must be positive")]
    BadTolerance(f64),
    #[error("vertex {0} referenced by a choice does not exist")]
    NoSuchVertex(usize),
    #[error(transparent)]
    Net(#[from] NetError),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RunConfig {
    pub input: Option<String>,
    /// per-vertex choice strings, e.g. "v1:12|34"
    #[serde(default)]
    pub topology: Vec<String>,
    pub t0: f64,
    pub dt: f64,
    pub t_end: f64,
    pub mesh: usize,
    pub excision_radius: f64,
    pub expansion_order: usize,
    pub tolerance: f64,
    pub snapshots: usize,
    pub seed: u64,
    pub out_dir: String,
    #[serde(default)]
    pub emit_svg: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            input: None,
            topology: Vec::new(),
            t0: 0.005,
            dt: 1e-4,
            t_end: 0.1,
            mesh: 64,
            excision_radius: 0.25,
            expansion_order: 0,
            tolerance: 1e-9,
            snapshots: 5,
            seed: 7,
            out_dir: "out".into(),
        emit_svg: false,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.tolerance > 0.0) {
            return Err(ConfigError::BadTolerance(self.tolerance));
        }
        if !(self.t0 > 0.0) || !(self.dt > 0.0) {
            return Err(ConfigError::BadTolerance(self.t0.min(self.dt)));
        }
        for s in &self.topology {
            parse_choice(s)?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).unwrap()
    }

    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let cfg: RunConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Resolve the per-vertex choices against the valence of each vertex.
    pub fn choices(
        &self,
        valences: &[(usize, usize)],
    ) -> Result<Vec<(usize, TopologyDescriptor)>, ConfigError> {
        let mut out = Vec::new();
        for s in &self.topology {
            let (vertex, pattern) = parse_choice(s)?;
            let Some(&(_, valence)) = valences.iter().find(|(v, _)| *v == vertex) else {
                return Err(ConfigError::NoSuchVertex(vertex));
            };
            let descriptor = choose_topology(valence, &pattern)
                .map_err(|e| ConfigError::BadChoice(s.clone(), e))?;
            out.push((vertex, descriptor));
        }
        Ok(out)
    }
}

/// Parse "v<id>:<pattern>" into (vertex id, pattern).
pub fn parse_choice(s: &str) -> Result<(usize, String), ConfigError> {
    let stripped = s
        .strip_prefix('v')
        .ok_or_else(|| ConfigError::BadChoice(s.into(), "missing the 'v' prefix".into()))?;
    let (id, pattern) = stripped
        .split_once(':')
        .ok_or_else(|| ConfigError::BadChoice(s.into(), "missing ':'".into()))?;
    let vertex: usize = id
        .parse()
        .map_err(|_| ConfigError::BadChoice(s.into(), format!("bad vertex id '{id}'")))?;
    Ok((vertex, pattern.to_string()))
}

/// Pick a resolution by pattern: "auto" takes the first enumerated tree;
/// a string like "12|34" or "23|41" (single-digit 1-based rays) selects the
/// tree whose display matches; comma-separated pairs like "12,34" select a
/// disconnected pairing.
pub fn choose_topology(valence: usize, pattern: &str) -> Result<TopologyDescriptor, String> {
    let all = enumerate_resolutions(valence, true).map_err(|e| e.to_string())?;
    if pattern == "auto" {
        return Ok(all[0].clone());
    }
    let canon = |s: &str| -> String { s.chars().filter(|c| !"()".contains(*c)).collect() };
    let want = canon(pattern);
    for d in &all {
        if canon(&d.display_string()) == want {
            return Ok(d.clone());
        }
    }
    // tolerate the pairing written in either order around '|'
    if let Some((a, b)) = want.split_once('|') {
        let flipped = format!("{b}|{a}");
        for d in &all {
            if canon(&d.display_string()) == flipped {
                return Ok(d.clone());
            }
        }
    }
    Err(format!(
        "no resolution of a {valence}-valent vertex matches '{pattern}' (have: {})",
        all.iter()
            .map(|d| d.display_string())
            .collect::<Vec<_>>()
            .join(", ")
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_round_trips_losslessly() {
        let mut cfg = RunConfig::default();
        cfg.topology = vec!["v1:12|34".into()];
        cfg.t0 = 0.0123456789012345;
        let text = cfg.to_json();
        let back = RunConfig::from_json(&text).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn choice_strings_parse_and_select() {
        let (v, p) = parse_choice("v3:12|34").unwrap();
        assert_eq!((v, p.as_str()), (3, "12|34"));
        let d = choose_topology(4, "12|34").unwrap();
        assert!(d.is_connected());
        let d2 = choose_topology(4, "23|41").unwrap();
        assert!(d2.is_connected());
        assert_ne!(d, d2);
        let disc = choose_topology(4, "12,34").unwrap();
        assert!(!disc.is_connected());
        assert!(choose_topology(4, "13|24").is_err(), "non-contiguous pairing");
    }

    #[test]
    fn bad_configs_are_rejected() {
        let mut cfg = RunConfig::default();
        cfg.tolerance = -1.0;
        assert!(cfg.validate().is_err());
        let mut cfg = RunConfig::default();
        cfg.topology = vec!["1:12|34".into()];
        assert!(cfg.validate().is_err());
    }
}
