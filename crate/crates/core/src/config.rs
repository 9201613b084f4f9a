use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::ingest::DEFAULT_FATTY_THRESHOLD;

/// Project configuration, read from a TOML file. Relative paths are resolved
/// against the directory containing the file.
///
/// ```toml
/// project_name = "toy"
/// log_path = "toy.log"
/// releases_path = "releases.csv"
/// labels_path = "labels.csv"      # optional
/// include_patterns = ["**/*.java"]
/// fatty_threshold = 30
/// output_dir = "out"
/// include_merges = false
/// ```
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProjectConfig {
    pub project_name: String,
    pub log_path: PathBuf,
    pub releases_path: PathBuf,
    pub labels_path: Option<PathBuf>,
    pub include_patterns: Vec<String>,
    pub fatty_threshold: usize,
    pub output_dir: PathBuf,
    pub include_merges: bool,
    /// File the configuration was read from, for error messages.
    pub source: PathBuf,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    project_name: String,
    log_path: PathBuf,
    releases_path: PathBuf,
    labels_path: Option<PathBuf>,
    #[serde(default = "default_patterns")]
    include_patterns: Vec<String>,
    #[serde(default = "default_fatty")]
    fatty_threshold: usize,
    #[serde(default = "default_output")]
    output_dir: PathBuf,
    #[serde(default)]
    include_merges: bool,
}

fn default_patterns() -> Vec<String> {
    vec!["**/*".to_owned()]
}

fn default_fatty() -> usize {
    DEFAULT_FATTY_THRESHOLD
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

impl ProjectConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    /// Parses configuration text as if it had been read from `source`.
    pub fn parse(text: &str, source: &Path) -> Result<Self> {
        let raw: RawConfig =
            toml::from_str(text).map_err(|e| Error::Config(format!("{}: {}", source.display(), e.message())))?;
        let base = source.parent().unwrap_or(Path::new(""));
        let resolve = |p: PathBuf| if p.is_absolute() { p } else { base.join(p) };

        if raw.project_name.trim().is_empty() {
            return Err(Error::Config(format!("{}: project_name is empty", source.display())));
        }
        if raw.fatty_threshold < 1 {
            return Err(Error::Config(format!(
                "{}: fatty_threshold must be at least 1",
                source.display()
            )));
        }
        if raw.include_patterns.is_empty() {
            return Err(Error::Config(format!(
                "{}: include_patterns must not be empty",
                source.display()
            )));
        }
        Ok(Self {
            project_name: raw.project_name,
            log_path: resolve(raw.log_path),
            releases_path: resolve(raw.releases_path),
            labels_path: raw.labels_path.map(resolve),
            include_patterns: raw.include_patterns,
            fatty_threshold: raw.fatty_threshold,
            output_dir: resolve(raw.output_dir),
            include_merges: raw.include_merges,
            source: source.to_path_buf(),
        })
    }

    pub fn labels_path(&self) -> Result<&Path> {
        self.labels_path.as_deref().ok_or_else(|| {
            Error::Config(format!(
                "{}: labels_path is required for this stage",
                self.source.display()
            ))
        })
    }

    /// `<output_dir>/<project_name>`.
    pub fn project_dir(&self) -> PathBuf {
        self.output_dir.join(&self.project_name)
    }
}
