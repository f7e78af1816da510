use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::{Failure, Format};

/// Defaults read from `--config`. Keys mirror the long flag names.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub kernel: Option<PathBuf>,
    pub points: Option<String>,
    pub target: Option<serde_json::Value>,
    pub network: Option<PathBuf>,
    pub samples: Option<PathBuf>,
    pub n: Option<usize>,
    pub seed: Option<u64>,
    pub depth: Option<usize>,
    pub weights: Option<String>,
    pub r0: Option<f64>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub tau_stab: Option<f64>,
    pub tau_div: Option<f64>,
    pub window: Option<usize>,
    pub slope_threshold: Option<f64>,
    pub ratio_threshold: Option<f64>,
}

pub const DEFAULT_SEED: u64 = 42;

pub fn load(path: Option<&Path>) -> Result<FileConfig, Failure> {
    let Some(path) = path else {
        return Ok(FileConfig::default());
    };
    let text = read(path)?;
    serde_json::from_str(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

pub fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path)
        .map_err(|e| Failure::Input(format!("reading {}: {e}", path.display())))
}

pub fn require<T>(value: Option<T>, flag: &str) -> Result<T, Failure> {
    value.ok_or_else(|| Failure::Input(format!("missing --{flag}")))
}

/// Write to `out`, or stdout when absent.
pub fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => std::fs::write(p, text)
            .map_err(|e| Failure::Input(format!("writing {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
