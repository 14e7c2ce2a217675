//! NCD and alignment scoring against a cached target profile.
//!
//! Scoring a corpus of N documents against n targets costs N·n joint
//! compressions plus N+n single compressions: target sizes are cached in the
//! profile and each candidate is compressed once, reused across all n NCD
//! evaluations.

use std::sync::Once;

use rayon::prelude::*;

use crate::codec::{Codec, CodecSpec};
use crate::corpus::Document;
use crate::{Error, Result};

/// Target example set with precomputed compressed sizes.
///
/// Immutable after construction and shareable across scoring workers.
#[derive(Debug, Clone)]
pub struct TargetProfile {
    entries: Vec<TargetEntry>,
    codec_spec: CodecSpec,
}

#[derive(Debug, Clone)]
pub struct TargetEntry {
    pub document: Document,
    pub compressed_size: u64,
}

impl TargetProfile {
    /// Compress each target once and cache the sizes. Duplicate targets are
    /// retained as distinct entries; the alignment mean runs over all of them.
    pub fn build(targets: Vec<Document>, codec: &dyn Codec) -> Result<Self> {
        if targets.is_empty() {
            return Err(Error::validation("target corpus required"));
        }
        let entries = targets
            .into_iter()
            .map(|document| {
                let compressed_size = codec.compressed_size(&document.text)?;
                Ok(TargetEntry {
                    document,
                    compressed_size,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(TargetProfile {
            entries,
            codec_spec: *codec.spec(),
        })
    }

    pub fn entries(&self) -> &[TargetEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn codec_spec(&self) -> &CodecSpec {
        &self.codec_spec
    }

    /// Recompute every cached size and confirm it matches.
    pub fn verify(&self, codec: &dyn Codec) -> Result<()> {
        for entry in &self.entries {
            let fresh = codec.compressed_size(&entry.document.text)?;
            if fresh != entry.compressed_size {
                return Err(Error::Runtime(format!(
                    "cached size for target `{}` is stale ({} != {})",
                    entry.document.id, entry.compressed_size, fresh
                )));
            }
        }
        Ok(())
    }
}

/// A document plus its alignment score.
#[derive(Debug, Clone)]
pub struct ScoredDocument {
    pub document: Document,
    /// ZIP-FIT alignment for the zipfit method; importance weight when the
    /// document was scored by the DSIR baseline.
    pub score: f64,
    /// 1-based rank, assigned by the selection module.
    pub rank: Option<usize>,
    /// Per-target NCD values, retained only in debug mode.
    pub per_target_ncd: Option<Vec<f64>>,
}

fn warn_degenerate_ncd() {
    static ONCE: Once = Once::new();
    ONCE.call_once(|| {
        eprintln!("warning: ncd of two empty inputs is defined as 0.0");
    });
}

/// NCD from already-measured sizes: `(C(ab) − min) / max`.
///
/// Values marginally outside `[0, 1]` are expected from real codecs and are
/// never clamped; a debug assertion flags anything outside `[-0.1, 1.5]`.
pub fn ncd_from_sizes(c_a: u64, c_b: u64, c_ab: u64) -> f64 {
    let min = c_a.min(c_b) as f64;
    let max = c_a.max(c_b) as f64;
    let value = (c_ab as f64 - min) / max;
    debug_assert!(
        (-0.1..=1.5).contains(&value),
        "ncd sanity bounds violated: {value} (C(a)={c_a}, C(b)={c_b}, C(ab)={c_ab})"
    );
    value
}

/// Normalized compression distance between `a` and `b` with `⊕` = raw byte
/// concatenation, no separator.
///
/// `b_size` may carry a cached `C(b)`. Two empty inputs are defined as 0.0
/// (maximally similar) since the formula is 0/0 there.
pub fn ncd(a: &[u8], b: &[u8], b_size: Option<u64>, codec: &dyn Codec) -> Result<f64> {
    if a.is_empty() && b.is_empty() {
        warn_degenerate_ncd();
        return Ok(0.0);
    }
    let c_a = codec.compressed_size(a)?;
    let c_b = match b_size {
        Some(size) => size,
        None => codec.compressed_size(b)?,
    };
    let mut joint = Vec::with_capacity(a.len() + b.len());
    joint.extend_from_slice(a);
    joint.extend_from_slice(b);
    let c_ab = codec.compressed_size(&joint)?;
    Ok(ncd_from_sizes(c_a, c_b, c_ab))
}

/// Scoring knobs shared by [`score_corpus`] and the CLI.
#[derive(Debug, Clone)]
pub struct ScoreOptions {
    /// Worker thread count; must be positive. Results are identical for any
    /// worker count.
    pub workers: usize,
    /// Optional cap on candidate bytes fed to the codec (off by default).
    /// Targets are always compressed whole.
    pub max_bytes: Option<usize>,
    /// Retain per-target NCD values on each scored document.
    pub retain_per_target: bool,
}

impl Default for ScoreOptions {
    fn default() -> Self {
        ScoreOptions {
            workers: 1,
            max_bytes: None,
            retain_per_target: false,
        }
    }
}

fn effective_text(text: &[u8], max_bytes: Option<usize>) -> &[u8] {
    match max_bytes {
        Some(cap) if text.len() > cap => &text[..cap],
        _ => text,
    }
}

/// Score one candidate against every profile target: `1 − mean(NCD)`.
///
/// The candidate is compressed once; the per-target joint compressions reuse
/// that size.
pub fn alignment_score(
    candidate: &Document,
    profile: &TargetProfile,
    codec: &dyn Codec,
) -> Result<f64> {
    let (score, _) = score_text(&candidate.text, profile, codec, false)?;
    Ok(score)
}

fn score_text(
    text: &[u8],
    profile: &TargetProfile,
    codec: &dyn Codec,
    retain: bool,
) -> Result<(f64, Option<Vec<f64>>)> {
    let c_candidate = codec.compressed_size(text)?;
    let longest_target = profile
        .entries()
        .iter()
        .map(|e| e.document.text.len())
        .max()
        .unwrap_or(0);
    let mut joint = Vec::with_capacity(text.len() + longest_target);
    let mut per_target = retain.then(|| Vec::with_capacity(profile.len()));
    let mut sum = 0.0;
    for entry in profile.entries() {
        let target = &entry.document.text;
        let value = if text.is_empty() && target.is_empty() {
            warn_degenerate_ncd();
            0.0
        } else {
            joint.clear();
            joint.extend_from_slice(text);
            joint.extend_from_slice(target);
            let c_joint = codec.compressed_size(&joint)?;
            ncd_from_sizes(c_candidate, entry.compressed_size, c_joint)
        };
        sum += value;
        if let Some(v) = per_target.as_mut() {
            v.push(value);
        }
    }
    Ok((1.0 - sum / profile.len() as f64, per_target))
}

fn score_document(
    document: Document,
    profile: &TargetProfile,
    codec: &dyn Codec,
    opts: &ScoreOptions,
) -> Result<ScoredDocument> {
    let text = effective_text(&document.text, opts.max_bytes);
    let (score, per_target_ncd) = score_text(text, profile, codec, opts.retain_per_target)?;
    Ok(ScoredDocument {
        document,
        score,
        rank: None,
        per_target_ncd,
    })
}

// Documents per parallel batch. Bounds memory for streaming sources while
// keeping all workers busy.
const CHUNK_DOCS: usize = 512;

/// Score a document stream, feeding results to `sink` in input order.
///
/// Parallel result equals serial result; a failure in any worker fails the
/// whole operation and partial results are discarded.
pub fn score_corpus_with<I, F>(
    mut docs: I,
    profile: &TargetProfile,
    codec: &dyn Codec,
    opts: &ScoreOptions,
    mut sink: F,
) -> Result<()>
where
    I: Iterator<Item = Result<Document>>,
    F: FnMut(ScoredDocument) -> Result<()>,
{
    if opts.workers == 0 {
        return Err(Error::validation("workers must be positive"));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.workers)
        .build()
        .map_err(|e| Error::Runtime(format!("failed to start worker pool: {e}")))?;

    loop {
        let mut chunk = Vec::with_capacity(CHUNK_DOCS);
        for doc in docs.by_ref().take(CHUNK_DOCS) {
            chunk.push(doc?);
        }
        if chunk.is_empty() {
            break;
        }
        let scored: Result<Vec<ScoredDocument>> = pool.install(|| {
            chunk
                .into_par_iter()
                .map(|doc| score_document(doc, profile, codec, opts))
                .collect()
        });
        for sd in scored? {
            sink(sd)?;
        }
    }
    Ok(())
}

/// Score a document stream into a vector, input order preserved.
pub fn score_corpus<I>(
    docs: I,
    profile: &TargetProfile,
    codec: &dyn Codec,
    opts: &ScoreOptions,
) -> Result<Vec<ScoredDocument>>
where
    I: Iterator<Item = Result<Document>>,
{
    let mut out = Vec::new();
    score_corpus_with(docs, profile, codec, opts, |sd| {
        out.push(sd);
        Ok(())
    })?;
    Ok(out)
}
