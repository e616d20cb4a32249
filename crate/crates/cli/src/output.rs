//! Artifact writing. Every file carries the schema version, the config hash
//! and the seed.

use std::fs;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Svg,
}

/// Everything that determines a command's output.
#[derive(Debug, Clone, Serialize)]
pub struct AnalysisConfig {
    pub command: String,
    pub map_path: String,
    pub map_spec: String,
    pub seed: u64,
    pub eps: f64,
    pub horizon: usize,
    pub params: serde_json::Value,
}

impl AnalysisConfig {
    /// SHA-256 of the canonical JSON, excluding the map path.
    pub fn hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.map_path.clear();
        let text = serde_json::to_string(&canonical).expect("config serializes");
        hex::encode(Sha256::digest(text.as_bytes()))
    }
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    schema: u32,
    config_hash: &'a str,
    seed: u64,
    config: &'a AnalysisConfig,
    result: &'a T,
}

pub struct Output {
    dir: PathBuf,
    config: AnalysisConfig,
    hash: String,
    only: Option<Format>,
    pub written: Vec<PathBuf>,
}

impl Output {
    pub fn new(dir: &Path, config: AnalysisConfig, only: Option<Format>) -> std::io::Result<Self> {
        fs::create_dir_all(dir)?;
        let hash = config.hash();
        Ok(Output { dir: dir.to_path_buf(), config, hash, only, written: Vec::new() })
    }

    pub fn hash(&self) -> &str {
        &self.hash
    }

    fn wants(&self, f: Format) -> bool {
        self.only.is_none_or(|o| o == f)
    }

    fn write(&mut self, name: &str, text: &str) -> std::io::Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, text)?;
        self.written.push(path);
        Ok(())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, result: &T) -> std::io::Result<()> {
        if !self.wants(Format::Json) {
            return Ok(());
        }
        let env = Envelope { schema: 1, config_hash: &self.hash, seed: self.config.seed, config: &self.config, result };
        let mut text = serde_json::to_string_pretty(&env).map_err(std::io::Error::other)?;
        text.push('\n');
        self.write(name, &text)
    }

    pub fn csv(&mut self, name: &str, body: &str) -> std::io::Result<()> {
        if !self.wants(Format::Csv) {
            return Ok(());
        }
        let text = format!("# schema: 1\n# config_hash: {}\n# seed: {}\n{body}", self.hash, self.config.seed);
        self.write(name, &text)
    }

    pub fn svg(&mut self, name: &str, plot: &crate::svg::Plot) -> std::io::Result<()> {
        if !self.wants(Format::Svg) {
            return Ok(());
        }
        let comment = format!("schema: 1, config_hash: {}, seed: {}", self.hash, self.config.seed);
        let text = plot.render(&comment);
        self.write(name, &text)
    }
}
