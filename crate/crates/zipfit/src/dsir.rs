//! Hashed n-gram importance-resampling baseline.
//!
//! Documents are featurized as counts of lowercase word unigrams and bigrams
//! hashed into a fixed number of buckets. Target and source corpora each fit
//! a smoothed bucket distribution; a document's importance weight is the
//! log-ratio of target to source probability summed over its bucket counts.
//! Selection is Gumbel-top-k resampling (or deterministic top-k by weight).
//!
//! Bit-level parity with other implementations of this scheme is not claimed;
//! the hash and preprocessing are fixed and documented here so results are
//! reproducible across runs and platforms.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::alignment::ScoredDocument;
use crate::corpus::Document;
use crate::selection::select_top_k;
use crate::{Error, Result};

pub const DEFAULT_BUCKETS: usize = 10_000;
pub const DEFAULT_SMOOTHING: f64 = 1.0;

/// FNV-1a 64-bit offset basis, XORed with [`HASH_SEED`] as the initial state.
const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;
/// Fixed hash seed; part of the documented feature definition.
pub const HASH_SEED: u64 = 0x5a49_5046_4954_2d31;

/// Seeded FNV-1a over the n-gram bytes. Buckets are `hash % B`.
fn fnv1a(bytes: &[u8]) -> u64 {
    let mut state = FNV_OFFSET ^ HASH_SEED;
    for &b in bytes {
        state ^= u64::from(b);
        state = state.wrapping_mul(FNV_PRIME);
    }
    state
}

/// Lowercased words: maximal alphanumeric runs of the lossy-decoded text.
fn words(text: &[u8]) -> Vec<String> {
    String::from_utf8_lossy(text)
        .split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty())
        .map(|w| w.to_lowercase())
        .collect()
}

/// Bucketed unigram + bigram counts for one document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HashedNgramFeatures {
    pub bucket_counts: Vec<u64>,
    pub total: u64,
}

/// Hash every word unigram and bigram of `text` into `buckets` slots.
///
/// Bigrams hash the two words joined by a single space. Deterministic across
/// runs and platforms; empty text yields the zero vector.
pub fn hash_ngram_features(text: &[u8], buckets: usize) -> Result<HashedNgramFeatures> {
    if buckets < 2 {
        return Err(Error::validation("bucket count must be at least 2"));
    }
    let words = words(text);
    let mut bucket_counts = vec![0u64; buckets];
    let mut total = 0u64;
    for w in &words {
        bucket_counts[(fnv1a(w.as_bytes()) % buckets as u64) as usize] += 1;
        total += 1;
    }
    for pair in words.windows(2) {
        let joined = format!("{} {}", pair[0], pair[1]);
        bucket_counts[(fnv1a(joined.as_bytes()) % buckets as u64) as usize] += 1;
        total += 1;
    }
    Ok(HashedNgramFeatures {
        bucket_counts,
        total,
    })
}

/// Smoothed probability distribution over feature buckets.
#[derive(Debug, Clone, PartialEq)]
pub struct BucketDistribution {
    pub probs: Vec<f64>,
    pub smoothing: f64,
}

impl BucketDistribution {
    pub fn buckets(&self) -> usize {
        self.probs.len()
    }
}

/// Fit a bucket distribution over a document stream.
///
/// `probs[i] = (count_i + smoothing) / (total + B·smoothing)`; an empty
/// corpus degrades to the uniform distribution with a warning.
pub fn fit_bucket_distribution<I>(
    docs: I,
    buckets: usize,
    smoothing: f64,
) -> Result<BucketDistribution>
where
    I: Iterator<Item = Result<Document>>,
{
    if buckets < 2 {
        return Err(Error::validation("bucket count must be at least 2"));
    }
    if smoothing <= 0.0 {
        return Err(Error::validation("smoothing must be positive"));
    }
    let mut counts = vec![0u64; buckets];
    let mut total = 0u64;
    for doc in docs {
        let features = hash_ngram_features(&doc?.text, buckets)?;
        for (c, f) in counts.iter_mut().zip(&features.bucket_counts) {
            *c += f;
        }
        total += features.total;
    }
    if total == 0 {
        eprintln!("warning: empty corpus; bucket distribution is uniform");
    }
    let denom = total as f64 + buckets as f64 * smoothing;
    let probs = counts.iter().map(|&c| (c as f64 + smoothing) / denom).collect();
    Ok(BucketDistribution { probs, smoothing })
}

/// Importance weight `Σ n_i · (log p_i − log q_i)` over the document's bucket
/// counts, with `p` the target and `q` the source distribution.
///
/// Smoothing guarantees all probabilities are positive, so the weight is
/// always finite. Empty text weighs 0.
pub fn importance_weight(
    features: &HashedNgramFeatures,
    p: &BucketDistribution,
    q: &BucketDistribution,
) -> Result<f64> {
    if p.buckets() != q.buckets() || p.buckets() != features.bucket_counts.len() {
        return Err(Error::validation(format!(
            "bucket count mismatch: features={}, p={}, q={}",
            features.bucket_counts.len(),
            p.buckets(),
            q.buckets()
        )));
    }
    let mut weight = 0.0;
    for (i, &n) in features.bucket_counts.iter().enumerate() {
        if n > 0 {
            weight += n as f64 * (p.probs[i].ln() - q.probs[i].ln());
        }
    }
    Ok(weight)
}

/// Featurize and weigh one document.
pub fn weigh_document(
    doc: &Document,
    p: &BucketDistribution,
    q: &BucketDistribution,
    buckets: usize,
) -> Result<f64> {
    let features = hash_ngram_features(&doc.text, buckets)?;
    importance_weight(&features, p, q)
}

/// Weigh a document stream in parallel, input order preserved.
///
/// Same contract as alignment scoring: results are identical for any worker
/// count, and a failure discards the whole run.
pub fn weigh_corpus<I>(
    mut docs: I,
    p: &BucketDistribution,
    q: &BucketDistribution,
    buckets: usize,
    workers: usize,
) -> Result<Vec<ScoredDocument>>
where
    I: Iterator<Item = Result<Document>>,
{
    if workers == 0 {
        return Err(Error::validation("workers must be positive"));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Runtime(format!("failed to start worker pool: {e}")))?;
    let mut out = Vec::new();
    const CHUNK_DOCS: usize = 1024;
    loop {
        let mut chunk = Vec::with_capacity(CHUNK_DOCS);
        for doc in docs.by_ref().take(CHUNK_DOCS) {
            chunk.push(doc?);
        }
        if chunk.is_empty() {
            break;
        }
        let weighed: Result<Vec<ScoredDocument>> = pool.install(|| {
            chunk
                .into_par_iter()
                .map(|document| {
                    let score = weigh_document(&document, p, q, buckets)?;
                    Ok(ScoredDocument {
                        document,
                        score,
                        rank: None,
                        per_target_ncd: None,
                    })
                })
                .collect()
        });
        out.extend(weighed?);
    }
    Ok(out)
}

fn gumbel_keys(n: usize, seed: u64, scale: f64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let u: f64 = rng.r#gen::<f64>().max(1e-300);
            scale * -(-u.ln()).ln()
        })
        .collect()
}

fn select_by_keys(weighted: Vec<ScoredDocument>, keys: &[f64], k: usize) -> Vec<ScoredDocument> {
    let mut order: Vec<usize> = (0..weighted.len()).collect();
    order.sort_by(|&a, &b| keys[b].total_cmp(&keys[a]));
    order.truncate(k);
    let mut slots: Vec<Option<ScoredDocument>> = weighted.into_iter().map(Some).collect();
    order
        .iter()
        .enumerate()
        .map(|(rank, &idx)| {
            let mut doc = slots[idx].take().expect("each index picked once");
            doc.rank = Some(rank + 1);
            doc
        })
        .collect()
}

/// Gumbel-top-k resampling without replacement: the `k` largest values of
/// `weight + Gumbel(0, 1)` noise drawn from `seed`, in descending key order.
pub fn dsir_select(
    weighted: Vec<ScoredDocument>,
    k: usize,
    seed: u64,
) -> Result<Vec<ScoredDocument>> {
    dsir_select_scaled(weighted, k, seed, 1.0)
}

/// Deterministic mode: pure top-k by weight (the zero-noise limit of
/// [`dsir_select`]). Used where timing comparisons must be noise-free.
pub fn dsir_select_deterministic(
    weighted: Vec<ScoredDocument>,
    k: usize,
) -> Result<Vec<ScoredDocument>> {
    if k > weighted.len() {
        return Err(Error::validation(format!(
            "cannot select {k} documents from a corpus of {}",
            weighted.len()
        )));
    }
    Ok(select_top_k(weighted, k))
}

/// Resampling with an explicit noise scale; `scale = 0` reduces exactly to
/// top-k by weight.
pub fn dsir_select_scaled(
    weighted: Vec<ScoredDocument>,
    k: usize,
    seed: u64,
    scale: f64,
) -> Result<Vec<ScoredDocument>> {
    if k > weighted.len() {
        return Err(Error::validation(format!(
            "cannot select {k} documents from a corpus of {}",
            weighted.len()
        )));
    }
    let noise = gumbel_keys(weighted.len(), seed, scale);
    let keys: Vec<f64> = weighted
        .iter()
        .zip(&noise)
        .map(|(d, g)| d.score + g)
        .collect();
    Ok(select_by_keys(weighted, &keys, k))
}
