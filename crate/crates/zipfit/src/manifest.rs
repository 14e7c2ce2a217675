//! Reproducibility manifests.
//!
//! Every CLI subcommand that writes data also writes a manifest recording the
//! full configuration, the selected ids, token totals, and per-phase wall
//! times. Re-running with a manifest's config reproduces the data outputs
//! byte for byte (wall times naturally vary).

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::codec::CodecSpec;
use crate::corpus::{CorpusFormat, TokenRule};
use crate::{Error, Result};

pub const MANIFEST_VERSION: u32 = 1;

/// Selection method identity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Zipfit,
    Dsir,
    Random,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Method::Zipfit => f.write_str("zipfit"),
            Method::Dsir => f.write_str("dsir"),
            Method::Random => f.write_str("random"),
        }
    }
}

/// Which subset rule a selection run applied.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum SelectionParams {
    TopK { k: usize },
    BudgetTokens { budget: u64 },
    Threshold { tau: f64 },
    Random { k: usize },
}

/// DSIR baseline knobs, recorded when the method is `dsir`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DsirParams {
    pub buckets: usize,
    pub smoothing: f64,
}

/// Evaluation harness knobs (the `eval` subcommand).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalConfig {
    pub mode: String,
    pub bins: usize,
    pub budget: u64,
    pub budgets: Vec<u64>,
    pub order: usize,
    pub alpha: f64,
    pub backoff: f64,
    pub holdout_fraction: f64,
    pub synthetic: bool,
}

/// Codec sweep knobs (the `sweep` subcommand).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub codecs: Vec<String>,
    pub budget: u64,
    pub order: usize,
}

/// Full run configuration; serializable to and from the manifest so a run can
/// be replayed exactly. Unknown fields are rejected on load.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub subcommand: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub source: Option<PathBuf>,
    pub source_format: CorpusFormat,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub target: Option<PathBuf>,
    pub target_format: CorpusFormat,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub scored: Option<PathBuf>,
    pub codec: CodecSpec,
    pub token_rule: TokenRule,
    pub method: Method,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub selection: Option<SelectionParams>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub seed: Option<u64>,
    pub workers: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub max_bytes: Option<usize>,
    #[serde(default)]
    pub debug_per_target: bool,
    #[serde(default)]
    pub include_text: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub dsir: Option<DsirParams>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub out: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub eval: Option<EvalConfig>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub sweep: Option<SweepConfig>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub bench_top_k: Option<usize>,
}

/// Reproducibility record written alongside every data output.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SelectionManifest {
    pub manifest_version: u32,
    pub tool_version: String,
    pub method: Method,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub codec: Option<CodecSpec>,
    pub token_rule: TokenRule,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub selection: Option<SelectionParams>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub dsir: Option<DsirParams>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub max_bytes: Option<usize>,
    pub config: RunConfig,
    pub selected_ids: Vec<String>,
    pub total_tokens: u64,
    pub skipped_inputs: u64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub scored_docs: Option<u64>,
    pub wall_time_ms: BTreeMap<String, u64>,
}

impl SelectionManifest {
    pub fn from_config(config: RunConfig) -> Self {
        SelectionManifest {
            manifest_version: MANIFEST_VERSION,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            method: config.method,
            codec: match config.method {
                Method::Zipfit => Some(config.codec),
                _ => None,
            },
            token_rule: config.token_rule,
            selection: config.selection,
            seed: config.seed,
            dsir: config.dsir,
            max_bytes: config.max_bytes,
            config,
            selected_ids: Vec::new(),
            total_tokens: 0,
            skipped_inputs: 0,
            scored_docs: None,
            wall_time_ms: BTreeMap::new(),
        }
    }

    pub fn record_phase(&mut self, phase: &str, elapsed: std::time::Duration) {
        self.wall_time_ms
            .insert(phase.to_string(), elapsed.as_millis() as u64);
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io_path(path, e))?;
        let mut w = BufWriter::new(file);
        serde_json::to_writer_pretty(&mut w, self)?;
        w.write_all(b"\n")?;
        w.flush()?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io_path(path, e))?;
        Ok(serde_json::from_reader(BufReader::new(file))?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::{Algorithm, CodecSpec};

    fn config() -> RunConfig {
        RunConfig {
            subcommand: "select".into(),
            source: Some(PathBuf::from("/tmp/source.jsonl")),
            source_format: CorpusFormat::Jsonl,
            target: Some(PathBuf::from("/tmp/target.jsonl")),
            target_format: CorpusFormat::Jsonl,
            scored: None,
            codec: CodecSpec::with_default_level(Algorithm::Deflate),
            token_rule: TokenRule::Whitespace,
            method: Method::Zipfit,
            selection: Some(SelectionParams::TopK { k: 10 }),
            seed: None,
            workers: 4,
            max_bytes: None,
            debug_per_target: false,
            include_text: false,
            dsir: None,
            out: None,
            eval: None,
            sweep: None,
            bench_top_k: None,
        }
    }

    #[test]
    fn manifest_round_trips_through_json() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("manifest.json");
        let mut m = SelectionManifest::from_config(config());
        m.selected_ids = vec!["a".into(), "b".into()];
        m.total_tokens = 7;
        m.record_phase("score", std::time::Duration::from_millis(12));
        m.write(&path).unwrap();
        let back = SelectionManifest::read(&path).unwrap();
        assert_eq!(back.selected_ids, m.selected_ids);
        assert_eq!(back.total_tokens, 7);
        assert_eq!(back.manifest_version, MANIFEST_VERSION);
        assert_eq!(back.config.subcommand, "select");
    }

    #[test]
    fn unknown_fields_rejected() {
        let mut v = serde_json::to_value(SelectionManifest::from_config(config())).unwrap();
        v.as_object_mut()
            .unwrap()
            .insert("surprise".into(), serde_json::json!(1));
        let err = serde_json::from_value::<SelectionManifest>(v);
        assert!(err.is_err());
    }

    #[test]
    fn codec_recorded_only_for_zipfit() {
        let mut cfg = config();
        cfg.method = Method::Random;
        cfg.seed = Some(3);
        let m = SelectionManifest::from_config(cfg);
        assert!(m.codec.is_none());
        let m = SelectionManifest::from_config(config());
        assert!(m.codec.is_some());
    }
}
