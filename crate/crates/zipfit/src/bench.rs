//! Wall-clock profiling of the selection methods.
//!
//! Times zipfit (profile build + scoring + top-k) against the DSIR baseline
//! (distribution fits + weighing + top-k) on the same corpus and machine.
//! Evaluation/training time is deliberately excluded: this measures data
//! selection only. DSIR runs in deterministic mode so the comparison is
//! noise-free.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::alignment::{score_corpus, ScoreOptions, TargetProfile};
use crate::codec::Codec;
use crate::corpus::Document;
use crate::dsir;
use crate::selection::select_top_k;
use crate::Result;

/// Timing for one method.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MethodTiming {
    pub wall_ms: u64,
    pub docs_per_sec: f64,
    pub selected: usize,
}

/// Bench output, serialized as JSON or rendered as text.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchReport {
    pub corpus_docs: usize,
    pub corpus_tokens: u64,
    pub targets: usize,
    pub top_k: usize,
    pub workers: usize,
    pub zipfit: MethodTiming,
    pub dsir: MethodTiming,
    /// dsir wall time over zipfit wall time; above 1 means zipfit was faster.
    pub dsir_over_zipfit: f64,
    pub note: String,
}

impl BenchReport {
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "corpus: {} docs, {} tokens; targets: {}; top-k: {}; workers: {}\n",
            self.corpus_docs, self.corpus_tokens, self.targets, self.top_k, self.workers
        ));
        out.push_str(&format!(
            "{:<8} {:>10} {:>14}\n",
            "method", "wall_ms", "docs/sec"
        ));
        for (name, t) in [("zipfit", &self.zipfit), ("dsir", &self.dsir)] {
            out.push_str(&format!(
                "{:<8} {:>10} {:>14.1}\n",
                name, t.wall_ms, t.docs_per_sec
            ));
        }
        out.push_str(&format!(
            "ratio dsir/zipfit = {:.3}\n# {}\n",
            self.dsir_over_zipfit, self.note
        ));
        out
    }
}

fn timing(elapsed: std::time::Duration, docs: usize, selected: usize) -> MethodTiming {
    let secs = elapsed.as_secs_f64();
    MethodTiming {
        wall_ms: elapsed.as_millis() as u64,
        docs_per_sec: if secs > 0.0 { docs as f64 / secs } else { f64::INFINITY },
        selected,
    }
}

/// Time zipfit selection and DSIR selection end to end on the same inputs.
///
/// Corpora under 100 documents still run but produce a warning: timings that
/// small are noise.
pub fn run_bench(
    source: &[Document],
    target: &[Document],
    top_k: usize,
    codec: &dyn Codec,
    workers: usize,
    buckets: usize,
    smoothing: f64,
) -> Result<BenchReport> {
    if source.len() < 100 {
        eprintln!(
            "warning: corpus of {} docs is too small for stable timing",
            source.len()
        );
    }

    let start = Instant::now();
    let profile = TargetProfile::build(target.to_vec(), codec)?;
    let opts = ScoreOptions {
        workers,
        ..Default::default()
    };
    let scored = score_corpus(source.iter().cloned().map(Ok), &profile, codec, &opts)?;
    let zipfit_selected = select_top_k(scored, top_k);
    let zipfit_time = start.elapsed();

    let start = Instant::now();
    let p = dsir::fit_bucket_distribution(target.iter().cloned().map(Ok), buckets, smoothing)?;
    let q = dsir::fit_bucket_distribution(source.iter().cloned().map(Ok), buckets, smoothing)?;
    let weighted = dsir::weigh_corpus(source.iter().cloned().map(Ok), &p, &q, buckets, workers)?;
    let dsir_selected = dsir::dsir_select_deterministic(weighted, top_k.min(source.len()))?;
    let dsir_time = start.elapsed();

    let zipfit = timing(zipfit_time, source.len(), zipfit_selected.len());
    let dsir = timing(dsir_time, source.len(), dsir_selected.len());
    let ratio = if zipfit.wall_ms > 0 {
        dsir.wall_ms as f64 / zipfit.wall_ms as f64
    } else {
        f64::NAN
    };

    Ok(BenchReport {
        corpus_docs: source.len(),
        corpus_tokens: source.iter().map(|d| d.token_count).sum(),
        targets: target.len(),
        top_k,
        workers,
        zipfit,
        dsir,
        dsir_over_zipfit: ratio,
        note: "embedding-based selection baselines need a neural model and are not timed here"
            .into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::{Algorithm, CodecSpec};
    use crate::corpus::TokenRule;
    use crate::synth;

    #[test]
    fn bench_reports_both_methods_and_ratio() {
        let codec = CodecSpec::new(Algorithm::Deflate, 6).unwrap().build().unwrap();
        let source = synth::timing_corpus(1, 150, TokenRule::Whitespace);
        let target = synth::target_corpus(2, 10, TokenRule::Whitespace);
        let report = run_bench(&source, &target, 20, codec.as_ref(), 2, 1024, 1.0).unwrap();
        assert_eq!(report.corpus_docs, 150);
        assert_eq!(report.zipfit.selected, 20);
        assert_eq!(report.dsir.selected, 20);
        assert!(report.dsir_over_zipfit.is_finite() || report.zipfit.wall_ms == 0);
        let table = report.to_table();
        assert!(table.contains("zipfit"));
        assert!(table.contains("dsir"));
        assert!(table.contains("ratio"));
    }
}
