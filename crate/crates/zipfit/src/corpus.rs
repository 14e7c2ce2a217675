//! Corpus loading and token accounting.
//!
//! Documents stream off disk in file order so scoring passes never need the
//! whole corpus in memory. Three input layouts are supported: JSONL (one
//! object per line with a required `"text"` field), plain text (one document
//! per line), and a directory of files (one document per regular file, sorted
//! by file name).

use std::fs::{self, File};
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// How tokens are counted for budget accounting.
///
/// The rule is recorded in every manifest so budgets stay comparable within a
/// run. Token counts here are deliberately tokenizer-independent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum TokenRule {
    /// Number of maximal runs of non-whitespace bytes (ASCII whitespace).
    #[default]
    Whitespace,
    /// Raw byte length.
    Bytes,
}

impl FromStr for TokenRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "whitespace" => Ok(TokenRule::Whitespace),
            "bytes" => Ok(TokenRule::Bytes),
            other => Err(Error::validation(format!(
                "unknown token rule `{other}` (expected `whitespace` or `bytes`)"
            ))),
        }
    }
}

impl std::fmt::Display for TokenRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TokenRule::Whitespace => f.write_str("whitespace"),
            TokenRule::Bytes => f.write_str("bytes"),
        }
    }
}

/// Count tokens in `text` under `rule`.
pub fn count_tokens(text: &[u8], rule: TokenRule) -> u64 {
    match rule {
        TokenRule::Bytes => text.len() as u64,
        TokenRule::Whitespace => {
            let mut runs = 0u64;
            let mut in_run = false;
            for &b in text {
                if b.is_ascii_whitespace() {
                    in_run = false;
                } else if !in_run {
                    in_run = true;
                    runs += 1;
                }
            }
            runs
        }
    }
}

/// One source or target example.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    /// Stable identifier, unique within one corpus load.
    pub id: String,
    /// Raw text bytes. UTF-8 expected, arbitrary bytes tolerated.
    pub text: Vec<u8>,
    /// Token count under the run's [`TokenRule`]; always recomputable.
    pub token_count: u64,
    /// Dataset tag, e.g. `"c4"`.
    pub origin: String,
}

impl Document {
    pub fn new(
        id: impl Into<String>,
        text: impl Into<Vec<u8>>,
        origin: impl Into<String>,
        rule: TokenRule,
    ) -> Self {
        let text = text.into();
        let token_count = count_tokens(&text, rule);
        Document {
            id: id.into(),
            text,
            token_count,
            origin: origin.into(),
        }
    }
}

/// On-disk corpus layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum CorpusFormat {
    /// One JSON object per line: required `"text"`, optional `"id"` and `"origin"`.
    #[default]
    Jsonl,
    /// One document per line.
    Text,
    /// One document per regular file, sorted by file name.
    Dir,
}

impl FromStr for CorpusFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "jsonl" => Ok(CorpusFormat::Jsonl),
            "text" => Ok(CorpusFormat::Text),
            "dir" => Ok(CorpusFormat::Dir),
            other => Err(Error::validation(format!(
                "unknown corpus format `{other}` (expected `jsonl`, `text`, or `dir`)"
            ))),
        }
    }
}

impl std::fmt::Display for CorpusFormat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CorpusFormat::Jsonl => f.write_str("jsonl"),
            CorpusFormat::Text => f.write_str("text"),
            CorpusFormat::Dir => f.write_str("dir"),
        }
    }
}

#[derive(Deserialize)]
struct JsonlRecord {
    text: String,
    id: Option<String>,
    origin: Option<String>,
}

enum StreamKind {
    Lines {
        reader: BufReader<File>,
        jsonl: bool,
        line_no: u64,
    },
    Files {
        paths: std::vec::IntoIter<PathBuf>,
    },
}

/// Streaming document source returned by [`load_corpus`].
///
/// Malformed JSONL lines are skipped with a warning on stderr; the running
/// count is available from [`CorpusStream::skipped`] after consumption so it
/// can be recorded in the manifest.
pub struct CorpusStream {
    kind: StreamKind,
    rule: TokenRule,
    file_label: String,
    default_origin: String,
    skipped: u64,
}

impl CorpusStream {
    /// Number of malformed lines skipped so far.
    pub fn skipped(&self) -> u64 {
        self.skipped
    }

    fn next_line_doc(&mut self) -> Option<Result<Document>> {
        loop {
            let (reader, jsonl, line_no) = match &mut self.kind {
                StreamKind::Lines {
                    reader,
                    jsonl,
                    line_no,
                } => (reader, *jsonl, line_no),
                StreamKind::Files { .. } => unreachable!(),
            };
            let mut line = String::new();
            match reader.read_line(&mut line) {
                Ok(0) => return None,
                Ok(_) => {}
                Err(e) => return Some(Err(Error::Io(e))),
            }
            *line_no += 1;
            let line_no = *line_no;
            while line.ends_with('\n') || line.ends_with('\r') {
                line.pop();
            }
            if !jsonl {
                return Some(Ok(Document::new(
                    format!("{}:{}", self.file_label, line_no),
                    line.into_bytes(),
                    self.default_origin.clone(),
                    self.rule,
                )));
            }
            match serde_json::from_str::<JsonlRecord>(&line) {
                Ok(rec) => {
                    let id = rec
                        .id
                        .unwrap_or_else(|| format!("{}:{}", self.file_label, line_no));
                    let origin = rec.origin.unwrap_or_else(|| self.default_origin.clone());
                    return Some(Ok(Document::new(id, rec.text.into_bytes(), origin, self.rule)));
                }
                Err(e) => {
                    self.skipped += 1;
                    eprintln!(
                        "warning: {}:{}: skipping malformed line: {}",
                        self.file_label, line_no, e
                    );
                }
            }
        }
    }

    fn next_file_doc(&mut self) -> Option<Result<Document>> {
        let paths = match &mut self.kind {
            StreamKind::Files { paths } => paths,
            StreamKind::Lines { .. } => unreachable!(),
        };
        let path = paths.next()?;
        let text = match fs::read(&path) {
            Ok(bytes) => bytes,
            Err(e) => return Some(Err(Error::io_path(path, e))),
        };
        let name = path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string());
        Some(Ok(Document::new(
            name,
            text,
            self.default_origin.clone(),
            self.rule,
        )))
    }
}

impl Iterator for CorpusStream {
    type Item = Result<Document>;

    fn next(&mut self) -> Option<Self::Item> {
        match self.kind {
            StreamKind::Lines { .. } => self.next_line_doc(),
            StreamKind::Files { .. } => self.next_file_doc(),
        }
    }
}

fn default_origin(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

/// Open a corpus for streaming.
///
/// The path must exist; an unreadable path is a fatal error. Yields documents
/// in file order. An empty corpus yields nothing.
pub fn load_corpus(path: &Path, format: CorpusFormat, rule: TokenRule) -> Result<CorpusStream> {
    let file_label = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string());
    let origin = default_origin(path);
    let kind = match format {
        CorpusFormat::Jsonl | CorpusFormat::Text => {
            let file = File::open(path).map_err(|e| Error::io_path(path, e))?;
            StreamKind::Lines {
                reader: BufReader::new(file),
                jsonl: format == CorpusFormat::Jsonl,
                line_no: 0,
            }
        }
        CorpusFormat::Dir => {
            let mut paths: Vec<PathBuf> = fs::read_dir(path)
                .map_err(|e| Error::io_path(path, e))?
                .filter_map(|entry| entry.ok().map(|e| e.path()))
                .filter(|p| p.is_file())
                .collect();
            paths.sort();
            StreamKind::Files {
                paths: paths.into_iter(),
            }
        }
    };
    Ok(CorpusStream {
        kind,
        rule,
        file_label,
        default_origin: origin,
        skipped: 0,
    })
}

/// Load an entire corpus into memory, returning the documents and the count
/// of skipped malformed lines.
pub fn load_all(path: &Path, format: CorpusFormat, rule: TokenRule) -> Result<(Vec<Document>, u64)> {
    let mut stream = load_corpus(path, format, rule)?;
    let mut docs = Vec::new();
    for doc in &mut stream {
        docs.push(doc?);
    }
    Ok((docs, stream.skipped()))
}
