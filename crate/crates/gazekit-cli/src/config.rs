//! Plain-text key=value run configuration.
//!
//! A config file supplies defaults; command-line flags override it. Every
//! key must be in the known set — typos are configuration errors, not
//! silently ignored noise.

use std::collections::BTreeMap;
use std::path::Path;

/// Keys a config file may define. Anything else is rejected.
const KNOWN_KEYS: &[&str] = &[
    "seed",
    "jobs",
    "downsample",
    "out",
    "fixations",
    "videos",
    "scenario",
    "n_videos",
    "n_subjects",
    "noise",
    "width",
    "height",
    "frames",
    "distractors",
    "fps",
    "fovea_px",
    "sigma",
    "alpha",
    "epsilon",
    "gamma",
    "svm_c",
    "vocab_k",
    "points_per_frame",
    "train_fraction",
    "sampler",
    "encoder",
    "n_samples",
    "skip_ms",
    "laplace_add",
    "windows",
    "stride",
    "scales",
    "pairing",
];

/// Parsed configuration: raw strings per key, typed access on demand.
#[derive(Debug, Clone, Default)]
pub struct RunConfig {
    values: BTreeMap<String, String>,
}

#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut values = BTreeMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| ConfigError(format!("line {}: expected key=value", lineno + 1)))?;
            let key = key.trim();
            if !KNOWN_KEYS.contains(&key) {
                return Err(ConfigError(format!("line {}: unknown key '{key}'", lineno + 1)));
            }
            values.insert(key.to_string(), value.trim().to_string());
        }
        Ok(RunConfig { values })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(|s| s.as_str())
    }

    /// Typed lookup; a present-but-malformed value is a config error.
    pub fn get_parsed<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, ConfigError> {
        match self.values.get(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse()
                .map(Some)
                .map_err(|_| ConfigError(format!("key '{key}': cannot parse '{raw}'"))),
        }
    }

    /// All resolved key/value pairs, for embedding in reports.
    pub fn entries(&self) -> &BTreeMap<String, String> {
        &self.values
    }
}
