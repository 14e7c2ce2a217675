//! Turning scored documents into concrete training subsets.
//!
//! All selectors are pure transformations over in-memory sequences. Score
//! ties always break by input position (earlier wins), so every selector is
//! deterministic without a secondary key; pre-shuffle with a seed if you want
//! randomized tie-breaking.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::alignment::ScoredDocument;

/// Indices of `scored` in descending-score order, ties by input position.
fn rank_order(scored: &[ScoredDocument]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scored.len()).collect();
    order.sort_by(|&a, &b| scored[b].score.total_cmp(&scored[a].score));
    // stable sort keeps input order within equal scores
    order
}

fn take_ranked(scored: Vec<ScoredDocument>, picks: &[usize]) -> Vec<ScoredDocument> {
    let mut slots: Vec<Option<ScoredDocument>> = scored.into_iter().map(Some).collect();
    picks
        .iter()
        .enumerate()
        .map(|(rank, &idx)| {
            let mut doc = slots[idx].take().expect("each index picked once");
            doc.rank = Some(rank + 1);
            doc
        })
        .collect()
}

/// The `k` highest-scoring documents, descending score, ranks 1..=k.
///
/// `k` larger than the input returns everything, still sorted.
pub fn select_top_k(scored: Vec<ScoredDocument>, k: usize) -> Vec<ScoredDocument> {
    let mut order = rank_order(&scored);
    order.truncate(k);
    take_ranked(scored, &order)
}

/// Rank prefix that fits a token budget.
///
/// Walks the descending-score order accumulating token counts and stops at
/// the first document that would exceed the budget — no skip-ahead, so the
/// result is always a rank prefix. A budget smaller than the top document's
/// token count yields an empty selection with a warning.
pub fn select_token_budget(scored: Vec<ScoredDocument>, budget: u64) -> Vec<ScoredDocument> {
    let order = rank_order(&scored);
    let mut cumulative: u64 = 0;
    let mut picks = Vec::new();
    for &idx in &order {
        let tokens = scored[idx].document.token_count;
        if cumulative + tokens > budget {
            break;
        }
        cumulative += tokens;
        picks.push(idx);
    }
    if picks.is_empty() && !order.is_empty() {
        eprintln!(
            "warning: token budget {budget} is smaller than the top document ({} tokens); empty selection",
            scored[order[0]].document.token_count
        );
    }
    take_ranked(scored, &picks)
}

/// Documents with score strictly greater than `tau`, input order preserved.
///
/// Ranks are assigned by output position. Thresholds nest: a higher `tau`
/// always selects a subset of a lower one.
pub fn filter_threshold(scored: Vec<ScoredDocument>, tau: f64) -> Vec<ScoredDocument> {
    scored
        .into_iter()
        .filter(|d| d.score > tau)
        .enumerate()
        .map(|(i, mut d)| {
            d.rank = Some(i + 1);
            d
        })
        .collect()
}

/// Uniform sample of `k` documents without replacement, in draw order.
///
/// Reproducible from `seed` via a partial Fisher-Yates shuffle over input
/// positions; `k == len` yields a seeded permutation of the whole input.
pub fn select_random(
    scored: Vec<ScoredDocument>,
    k: usize,
    seed: u64,
) -> crate::Result<Vec<ScoredDocument>> {
    if k > scored.len() {
        return Err(crate::Error::validation(format!(
            "cannot draw {k} documents from a corpus of {}",
            scored.len()
        )));
    }
    let picks = random_indices(scored.len(), k, seed);
    Ok(take_ranked(scored, &picks))
}

/// First `k` indices of a seeded partial Fisher-Yates shuffle of `0..n`.
pub(crate) fn random_indices(n: usize, k: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut indices: Vec<usize> = (0..n).collect();
    for i in 0..k {
        let j = rng.gen_range(i..n);
        indices.swap(i, j);
    }
    indices.truncate(k);
    indices
}
