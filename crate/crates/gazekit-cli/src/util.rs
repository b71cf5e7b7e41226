//! Error-to-exit-code mapping and atomic file output.

use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use gazekit::saliency::{read_salm, SaliencyMap};

/// CLI-level error classes, each tied to an exit code:
/// configuration 2, data 3, numeric 4.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Data(String),
    Numeric(String),
}

pub type CliResult<T> = Result<T, CliError>;

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "{m}"),
            CliError::Data(m) => write!(f, "{m}"),
            CliError::Numeric(m) => write!(f, "{m}"),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Data(_) => 3,
            CliError::Numeric(_) => 4,
        }
    }
}

/// Exit code a library error maps to: numeric failures are 4, anything
/// involving inputs or files is 3.
pub fn exit_code_of(e: &gazekit::Error) -> i32 {
    use gazekit::Error::*;
    match e {
        ZeroDivision(_) | DegenerateLabels | NegativeInput | SingleClass | SingleFrame
        | DegenerateWindow | NotPsd(_) | NoPositives => 4,
        _ => 3,
    }
}

impl From<gazekit::Error> for CliError {
    fn from(e: gazekit::Error) -> Self {
        match exit_code_of(&e) {
            4 => CliError::Numeric(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

/// Deterministic string hash for deriving per-video seeds.
pub fn stable_hash(s: &str) -> u64 {
    // FNV-1a
    let mut h = 0xcbf2_9ce4_8422_2325u64;
    for b in s.as_bytes() {
        h ^= *b as u64;
        h = h.wrapping_mul(0x1000_0000_01b3);
    }
    h
}

/// Writes through a temp file in the same directory, then renames, so a
/// crash never leaves a half-written artifact.
pub fn atomic_write_with<F>(path: &Path, write: F) -> CliResult<()>
where
    F: FnOnce(&mut BufWriter<std::fs::File>) -> CliResult<()>,
{
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    std::fs::create_dir_all(dir).map_err(|e| CliError::Data(e.to_string()))?;
    let tmp = dir.join(format!(
        ".{}.tmp",
        path.file_name().and_then(|n| n.to_str()).unwrap_or("out")
    ));
    {
        let f = std::fs::File::create(&tmp).map_err(|e| CliError::Data(e.to_string()))?;
        let mut w = BufWriter::new(f);
        write(&mut w)?;
        w.flush().map_err(|e| CliError::Data(e.to_string()))?;
    }
    std::fs::rename(&tmp, path).map_err(|e| CliError::Data(e.to_string()))
}

pub fn atomic_write_json<T: serde::Serialize>(path: &Path, value: &T) -> CliResult<()> {
    atomic_write_with(path, |w| {
        serde_json::to_writer_pretty(&mut *w, value).map_err(|e| CliError::Data(e.to_string()))?;
        w.write_all(b"\n").map_err(|e| CliError::Data(e.to_string()))
    })
}

pub fn open_salm(path: &Path, video_id: &str) -> CliResult<SaliencyMap> {
    let f = std::fs::File::open(path)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    Ok(read_salm(&mut BufReader::new(f), video_id)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atomic_write_leaves_no_temp_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.json");
        atomic_write_json(&path, &serde_json::json!({"a": 1})).unwrap();
        assert!(path.exists());
        let leftovers: Vec<_> = std::fs::read_dir(dir.path())
            .unwrap()
            .filter_map(|e| e.ok())
            .filter(|e| e.file_name().to_string_lossy().ends_with(".tmp"))
            .collect();
        assert!(leftovers.is_empty());
    }

    #[test]
    fn numeric_errors_map_to_exit_4() {
        assert_eq!(exit_code_of(&gazekit::Error::NotPsd(-1.0)), 4);
        assert_eq!(exit_code_of(&gazekit::Error::UnknownVideo("v".into())), 3);
    }
}
