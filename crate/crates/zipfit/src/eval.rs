//! Desk-scale evaluation harness.
//!
//! Trains byte n-gram models on selected subsets and measures cross-entropy
//! on a held-out target split, so the relationship between alignment scores
//! and downstream loss can be checked in seconds on a laptop. All numbers
//! here are directional: byte n-gram models are the evaluator, so magnitudes
//! are not comparable to neural LM training runs.

use serde::{Deserialize, Serialize};

use crate::alignment::{score_corpus, ScoreOptions, ScoredDocument, TargetProfile};
use crate::codec::Codec;
use crate::corpus::Document;
use crate::dsir::{self, DEFAULT_BUCKETS, DEFAULT_SMOOTHING};
use crate::manifest::Method;
use crate::ngram::{cross_entropy, train_ngram_lm, Smoothing};
use crate::selection::{random_indices, select_token_budget};
use crate::{Error, Result};

pub const REPORT_NOTE: &str = "evaluator: byte n-gram LM; directional comparison only";

/// One evaluated training set.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct EvalRow {
    pub label: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub mean_alignment: Option<f64>,
    pub train_tokens: u64,
    pub train_docs: usize,
    pub ce_bits_per_byte: f64,
}

/// Correlation between per-row mean alignment and CE.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct CorrelationBlock {
    pub pearson_r: f64,
    pub r_squared: f64,
    pub spearman_rho: f64,
}

/// Harness output: rows plus an optional correlation block, rendered as
/// JSON, an aligned text table, or CSV.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct EvalReport {
    pub note: String,
    pub rows: Vec<EvalRow>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub correlation: Option<CorrelationBlock>,
}

impl EvalReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("label,mean_alignment,train_tokens,train_docs,ce_bits_per_byte\n");
        for row in &self.rows {
            let alignment = row
                .mean_alignment
                .map(|a| a.to_string())
                .unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                row.label, alignment, row.train_tokens, row.train_docs, row.ce_bits_per_byte
            ));
        }
        out
    }

    pub fn to_table(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("# {}\n", self.note));
        out.push_str(&format!(
            "{:<20} {:>14} {:>12} {:>10} {:>14}\n",
            "label", "mean_align", "tokens", "docs", "ce(bits/B)"
        ));
        for row in &self.rows {
            let alignment = row
                .mean_alignment
                .map(|a| format!("{a:.4}"))
                .unwrap_or_else(|| "-".into());
            out.push_str(&format!(
                "{:<20} {:>14} {:>12} {:>10} {:>14.4}\n",
                row.label, alignment, row.train_tokens, row.train_docs, row.ce_bits_per_byte
            ));
        }
        match &self.correlation {
            Some(c) => out.push_str(&format!(
                "pearson r = {:.4}  r^2 = {:.4}  spearman rho = {:.4}\n",
                c.pearson_r, c.r_squared, c.spearman_rho
            )),
            None => out.push_str("correlation: n/a\n"),
        }
        out
    }
}

/// Pearson correlation coefficient; `None` for fewer than 3 points or zero
/// variance.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Option<f64> {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len();
    if n < 3 {
        return None;
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let (mx, my) = (mean(xs), mean(ys));
    let mut cov = 0.0;
    let mut vx = 0.0;
    let mut vy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        cov += (x - mx) * (y - my);
        vx += (x - mx).powi(2);
        vy += (y - my).powi(2);
    }
    if vx == 0.0 || vy == 0.0 {
        return None;
    }
    Some(cov / (vx.sqrt() * vy.sqrt()))
}

fn average_ranks(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman rank correlation with average ranks for ties.
pub fn spearman(xs: &[f64], ys: &[f64]) -> Option<f64> {
    pearson(&average_ranks(xs), &average_ranks(ys))
}

/// Deterministically split targets into a scoring set and a held-out
/// evaluation set (seeded shuffle, first `holdout_fraction` to the holdout).
pub fn split_target(
    targets: Vec<Document>,
    holdout_fraction: f64,
    seed: u64,
) -> (Vec<Document>, Vec<Document>) {
    let n = targets.len();
    let n_holdout = ((n as f64) * holdout_fraction).round() as usize;
    let picks = random_indices(n, n, seed);
    let mut holdout = Vec::with_capacity(n_holdout);
    let mut scoring = Vec::with_capacity(n - n_holdout);
    let mut slots: Vec<Option<Document>> = targets.into_iter().map(Some).collect();
    for (i, idx) in picks.into_iter().enumerate() {
        let doc = slots[idx].take().expect("permutation");
        if i < n_holdout {
            holdout.push(doc);
        } else {
            scoring.push(doc);
        }
    }
    (scoring, holdout)
}

/// Harness configuration shared by the sweep and comparison runs.
#[derive(Debug, Clone)]
pub struct EvalOptions {
    pub order: usize,
    pub smoothing: Smoothing,
    pub workers: usize,
    pub seed: u64,
    pub holdout_fraction: f64,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            order: 4,
            smoothing: Smoothing::default(),
            workers: 4,
            seed: 0,
            holdout_fraction: 0.5,
        }
    }
}

fn mean_score(docs: &[ScoredDocument]) -> Option<f64> {
    if docs.is_empty() {
        return None;
    }
    Some(docs.iter().map(|d| d.score).sum::<f64>() / docs.len() as f64)
}

fn train_and_eval(
    selection: &[ScoredDocument],
    holdout: &[Document],
    opts: &EvalOptions,
) -> Result<EvalRow> {
    let train_docs: Vec<Document> = selection.iter().map(|d| d.document.clone()).collect();
    let model = train_ngram_lm(&train_docs, opts.order, opts.smoothing)?;
    let ce = cross_entropy(&model, holdout)?;
    Ok(EvalRow {
        label: String::new(),
        mean_alignment: mean_score(selection),
        train_tokens: selection.iter().map(|d| d.document.token_count).sum(),
        train_docs: selection.len(),
        ce_bits_per_byte: ce,
    })
}

/// Score the source, partition it into `bins` equal-token groups by alignment
/// rank, train one model per bin at a fixed token budget, and evaluate each
/// on the target holdout.
///
/// Bin 1 holds the highest-alignment documents. The correlation block relates
/// per-bin mean alignment to CE; it is omitted for fewer than 3 bins.
pub fn alignment_ce_sweep(
    source: Vec<Document>,
    target: Vec<Document>,
    bins: usize,
    budget: u64,
    codec: &dyn Codec,
    opts: &EvalOptions,
) -> Result<EvalReport> {
    if bins < 1 {
        return Err(Error::validation("bins must be at least 1"));
    }
    if target.is_empty() {
        return Err(Error::validation("target corpus required"));
    }
    let (scoring_targets, holdout) = split_target(target, opts.holdout_fraction, opts.seed);
    if scoring_targets.is_empty() || holdout.is_empty() {
        return Err(Error::validation(
            "target corpus too small to split into scoring and holdout sets",
        ));
    }
    let profile = TargetProfile::build(scoring_targets, codec)?;
    let score_opts = ScoreOptions {
        workers: opts.workers,
        ..Default::default()
    };
    let mut scored = score_corpus(source.into_iter().map(Ok), &profile, codec, &score_opts)?;
    scored.sort_by(|a, b| b.score.total_cmp(&a.score));

    let total_tokens: u64 = scored.iter().map(|d| d.document.token_count).sum();
    let per_bin = total_tokens / bins as u64;
    if per_bin < budget {
        return Err(Error::validation(format!(
            "insufficient tokens per bin: {per_bin} available, budget needs at least {budget} \
             (corpus has {total_tokens} tokens across {bins} bins)"
        )));
    }

    // Equal-token partition along the alignment ranking.
    let mut bin_members: Vec<Vec<ScoredDocument>> = (0..bins).map(|_| Vec::new()).collect();
    let mut cumulative = 0u64;
    for doc in scored {
        let bin = ((cumulative / per_bin.max(1)) as usize).min(bins - 1);
        cumulative += doc.document.token_count;
        bin_members[bin].push(doc);
    }

    let mut rows = Vec::with_capacity(bins);
    for (i, members) in bin_members.into_iter().enumerate() {
        let budgeted = select_token_budget(members, budget);
        if budgeted.is_empty() {
            return Err(Error::validation(format!(
                "insufficient tokens per bin: bin {} cannot fill a budget of {budget}",
                i + 1
            )));
        }
        let mut row = train_and_eval(&budgeted, &holdout, opts)?;
        row.label = format!("bin{}", i + 1);
        rows.push(row);
    }

    let aligns: Vec<f64> = rows.iter().filter_map(|r| r.mean_alignment).collect();
    let ces: Vec<f64> = rows.iter().map(|r| r.ce_bits_per_byte).collect();
    let correlation = match (pearson(&aligns, &ces), spearman(&aligns, &ces)) {
        (Some(r), Some(rho)) => Some(CorrelationBlock {
            pearson_r: r,
            r_squared: r * r,
            spearman_rho: rho,
        }),
        _ => None,
    };

    Ok(EvalReport {
        note: REPORT_NOTE.to_string(),
        rows,
        correlation,
    })
}

/// Run zipfit, DSIR, random, and bottom-K anti-selection at the same token
/// budgets, train identical n-gram models on each selection, and report CE
/// per method and budget.
pub fn compare_methods(
    source: Vec<Document>,
    target: Vec<Document>,
    budgets: &[u64],
    codec: &dyn Codec,
    opts: &EvalOptions,
) -> Result<EvalReport> {
    if budgets.is_empty() {
        return Err(Error::validation("at least one token budget required"));
    }
    if target.is_empty() {
        return Err(Error::validation("target corpus required"));
    }
    let (scoring_targets, holdout) = split_target(target.clone(), opts.holdout_fraction, opts.seed);
    if scoring_targets.is_empty() || holdout.is_empty() {
        return Err(Error::validation(
            "target corpus too small to split into scoring and holdout sets",
        ));
    }
    let total_tokens: u64 = source.iter().map(|d| d.token_count).sum();
    if let Some(&max_budget) = budgets.iter().max() {
        if max_budget > total_tokens {
            return Err(Error::validation(format!(
                "budget {max_budget} exceeds the source corpus ({total_tokens} tokens)"
            )));
        }
    }

    let profile = TargetProfile::build(scoring_targets, codec)?;
    let score_opts = ScoreOptions {
        workers: opts.workers,
        ..Default::default()
    };
    let zipfit_scored = score_corpus(
        source.clone().into_iter().map(Ok),
        &profile,
        codec,
        &score_opts,
    )?;

    // DSIR: fit target on the scoring split, source on the full pool.
    let p = dsir::fit_bucket_distribution(
        profile.entries().iter().map(|e| Ok(e.document.clone())),
        DEFAULT_BUCKETS,
        DEFAULT_SMOOTHING,
    )?;
    let q = dsir::fit_bucket_distribution(
        source.clone().into_iter().map(Ok),
        DEFAULT_BUCKETS,
        DEFAULT_SMOOTHING,
    )?;
    let dsir_weighted = dsir::weigh_corpus(
        source.clone().into_iter().map(Ok),
        &p,
        &q,
        DEFAULT_BUCKETS,
        opts.workers,
    )?;

    // Anti-selection: invert the alignment ranking.
    let bottomk_scored: Vec<ScoredDocument> = zipfit_scored
        .iter()
        .cloned()
        .map(|mut d| {
            d.score = -d.score;
            d
        })
        .collect();

    // Random: seeded shuffle once, budget prefix per budget.
    let shuffle = random_indices(source.len(), source.len(), opts.seed.wrapping_add(13));
    let random_ordered: Vec<ScoredDocument> = {
        let mut slots: Vec<Option<ScoredDocument>> =
            zipfit_scored.iter().cloned().map(Some).collect();
        shuffle
            .iter()
            .enumerate()
            .map(|(i, &idx)| {
                let mut d = slots[idx].take().expect("permutation");
                // descending pseudo-score = draw order, so budget selection
                // walks the shuffled order
                d.score = -(i as f64);
                d
            })
            .collect()
    };

    let mut rows = Vec::new();
    for &budget in budgets {
        for (method, pool) in [
            (Method::Zipfit, &zipfit_scored),
            (Method::Dsir, &dsir_weighted),
            (Method::Random, &random_ordered),
        ] {
            let selection = select_token_budget(pool.clone(), budget);
            if selection.is_empty() {
                return Err(Error::validation(format!(
                    "budget {budget} selects nothing for method {method}"
                )));
            }
            let mean_alignment = mean_alignment_of(&selection, &zipfit_scored);
            let mut row = train_and_eval(&selection, &holdout, opts)?;
            row.label = format!("{method}@{budget}");
            row.mean_alignment = mean_alignment;
            rows.push(row);
        }
        let selection = select_token_budget(bottomk_scored.clone(), budget);
        if selection.is_empty() {
            return Err(Error::validation(format!(
                "budget {budget} selects nothing for bottom-k anti-selection"
            )));
        }
        let mean_alignment = mean_alignment_of(&selection, &zipfit_scored);
        let mut row = train_and_eval(&selection, &holdout, opts)?;
        row.label = format!("bottomk@{budget}");
        row.mean_alignment = mean_alignment;
        rows.push(row);
    }

    Ok(EvalReport {
        note: REPORT_NOTE.to_string(),
        rows,
        correlation: None,
    })
}

/// Mean zipfit alignment of a selection, looked up by document id so rows for
/// every method report on the same scale.
fn mean_alignment_of(
    selection: &[ScoredDocument],
    zipfit_scored: &[ScoredDocument],
) -> Option<f64> {
    use std::collections::HashMap;
    let by_id: HashMap<&str, f64> = zipfit_scored
        .iter()
        .map(|d| (d.document.id.as_str(), d.score))
        .collect();
    let scores: Vec<f64> = selection
        .iter()
        .filter_map(|d| by_id.get(d.document.id.as_str()).copied())
        .collect();
    if scores.is_empty() {
        None
    } else {
        Some(scores.iter().sum::<f64>() / scores.len() as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::{Algorithm, CodecSpec};
    use crate::corpus::TokenRule;
    use crate::synth;

    fn deflate6() -> Box<dyn Codec> {
        CodecSpec::new(Algorithm::Deflate, 6).unwrap().build().unwrap()
    }

    #[test]
    fn pearson_basics() {
        let x = [1.0, 2.0, 3.0, 4.0];
        assert!((pearson(&x, &[2.0, 4.0, 6.0, 8.0]).unwrap() - 1.0).abs() < 1e-12);
        assert!((pearson(&x, &[8.0, 6.0, 4.0, 2.0]).unwrap() + 1.0).abs() < 1e-12);
        assert!(pearson(&[1.0, 2.0], &[1.0, 2.0]).is_none());
        assert!(pearson(&x, &[1.0, 1.0, 1.0, 1.0]).is_none());
    }

    #[test]
    fn spearman_is_rank_based() {
        // Monotone but nonlinear: rho is exactly -1, |r| is not.
        let x = [1.0, 2.0, 3.0, 4.0, 5.0];
        let y = [100.0, 10.0, 5.0, 2.0, 1.0];
        assert!((spearman(&x, &y).unwrap() + 1.0).abs() < 1e-12);
        assert!(pearson(&x, &y).unwrap() > -1.0);
    }

    #[test]
    fn spearman_handles_ties() {
        let x = [1.0, 2.0, 2.0, 3.0];
        let y = [1.0, 2.0, 2.0, 3.0];
        assert!((spearman(&x, &y).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn split_is_deterministic_and_partitions() {
        let docs = synth::target_corpus(1, 20, TokenRule::Whitespace);
        let (s1, h1) = split_target(docs.clone(), 0.5, 9);
        let (s2, h2) = split_target(docs.clone(), 0.5, 9);
        assert_eq!(s1, s2);
        assert_eq!(h1, h2);
        assert_eq!(s1.len() + h1.len(), docs.len());
        assert_eq!(h1.len(), 10);
    }

    #[test]
    fn sweep_validates_inputs() {
        let codec = deflate6();
        let bench = synth::benchmark_corpus(0, TokenRule::Whitespace);
        let opts = EvalOptions::default();
        // zero bins
        assert!(alignment_ce_sweep(
            bench.source.clone(),
            bench.target.clone(),
            0,
            100,
            codec.as_ref(),
            &opts
        )
        .is_err());
        // budget larger than any bin can hold
        let err = alignment_ce_sweep(
            bench.source[..20].to_vec(),
            bench.target.clone(),
            5,
            1_000_000,
            codec.as_ref(),
            &opts,
        )
        .err()
        .unwrap();
        assert!(err.to_string().contains("insufficient tokens per bin"));
    }

    #[test]
    fn sweep_single_bin_has_no_correlation() {
        let codec = deflate6();
        let source = synth::mixed_source_corpus(2, 40, 40, 40, TokenRule::Whitespace);
        let target = synth::target_corpus(3, 16, TokenRule::Whitespace);
        let report =
            alignment_ce_sweep(source, target, 1, 500, codec.as_ref(), &EvalOptions::default())
                .unwrap();
        assert_eq!(report.rows.len(), 1);
        assert!(report.correlation.is_none());
        assert!(report.to_table().contains("correlation: n/a"));
    }

    #[test]
    fn sweep_orders_alignment_against_ce() {
        // Small version of the shipped benchmark; the acceptance suite runs
        // the full-size one.
        let codec = deflate6();
        let source = synth::mixed_source_corpus(11, 150, 175, 175, TokenRule::Whitespace);
        let target = synth::target_corpus(12, 32, TokenRule::Whitespace);
        let opts = EvalOptions::default();
        let report =
            alignment_ce_sweep(source, target, 5, 1_500, codec.as_ref(), &opts).unwrap();
        assert_eq!(report.rows.len(), 5);
        let c = report.correlation.as_ref().unwrap();
        assert!(
            c.spearman_rho <= -0.8,
            "rho = {} in\n{}",
            c.spearman_rho,
            report.to_table()
        );
        assert!((c.r_squared - c.pearson_r * c.pearson_r).abs() < 1e-9);
        // bin1 = most aligned; its mean alignment must exceed the last bin's
        assert!(
            report.rows[0].mean_alignment.unwrap() > report.rows[4].mean_alignment.unwrap()
        );
    }

    #[test]
    fn compare_ranks_zipfit_above_random_and_bottomk() {
        let codec = deflate6();
        let source = synth::mixed_source_corpus(21, 150, 175, 175, TokenRule::Whitespace);
        let target = synth::target_corpus(22, 32, TokenRule::Whitespace);
        let opts = EvalOptions::default();
        let report =
            compare_methods(source, target, &[2_000, 4_000], codec.as_ref(), &opts).unwrap();
        assert_eq!(report.rows.len(), 8);
        for budget in [2_000u64, 4_000] {
            let ce = |label: String| {
                report
                    .rows
                    .iter()
                    .find(|r| r.label == label)
                    .unwrap()
                    .ce_bits_per_byte
            };
            let zipfit = ce(format!("zipfit@{budget}"));
            assert!(
                zipfit < ce(format!("random@{budget}")),
                "budget {budget}:\n{}",
                report.to_table()
            );
            assert!(
                zipfit < ce(format!("bottomk@{budget}")),
                "budget {budget}:\n{}",
                report.to_table()
            );
        }
    }

    #[test]
    fn compare_is_deterministic() {
        let codec = deflate6();
        let source = synth::mixed_source_corpus(31, 60, 60, 60, TokenRule::Whitespace);
        let target = synth::target_corpus(32, 16, TokenRule::Whitespace);
        let opts = EvalOptions::default();
        let r1 = compare_methods(
            source.clone(),
            target.clone(),
            &[1_000],
            codec.as_ref(),
            &opts,
        )
        .unwrap();
        let r2 = compare_methods(source, target, &[1_000], codec.as_ref(), &opts).unwrap();
        assert_eq!(r1.to_json().unwrap(), r2.to_json().unwrap());
    }

    #[test]
    fn report_renders_all_formats() {
        let report = EvalReport {
            note: REPORT_NOTE.into(),
            rows: vec![EvalRow {
                label: "bin1".into(),
                mean_alignment: Some(0.41),
                train_tokens: 100,
                train_docs: 3,
                ce_bits_per_byte: 3.25,
            }],
            correlation: None,
        };
        assert!(report.to_json().unwrap().contains("bin1"));
        assert!(report.to_csv().contains("bin1,0.41,100,3,3.25"));
        assert!(report.to_table().contains("bin1"));
    }
}
