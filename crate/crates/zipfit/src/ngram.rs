//! Byte-level n-gram language models.
//!
//! These stand in for the expensive fine-tuning runs when checking that
//! higher-alignment selections train better: they fit in seconds, are
//! sensitive to syntactic structure, and need no tokenizer. Claims made with
//! them are directional only.
//!
//! Probability model: add-α counts at each context length, interpolated
//! toward the next shorter context with a fixed backoff weight; an unseen
//! context delegates entirely to the shorter one. Every conditional
//! distribution therefore sums to exactly 1 and assigns positive probability
//! to all 256 byte values. A model with no counts is uniform: 8 bits/byte.

use std::collections::HashMap;

use crate::corpus::Document;
use crate::{Error, Result};

pub const MAX_ORDER: usize = 8;

/// Smoothing knobs: Laplace `alpha` at each level, `backoff` weight on the
/// shorter context.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Smoothing {
    pub alpha: f64,
    pub backoff: f64,
}

impl Default for Smoothing {
    fn default() -> Self {
        Smoothing {
            alpha: 0.1,
            backoff: 0.4,
        }
    }
}

#[derive(Debug, Clone, Default)]
struct ContextStats {
    total: u64,
    next: HashMap<u8, u64>,
}

/// Trained byte n-gram model. `order` is the n-gram length: an order-4 model
/// conditions on up to 3 preceding bytes.
#[derive(Debug, Clone)]
pub struct NgramModel {
    order: usize,
    smoothing: Smoothing,
    // levels[k]: statistics for contexts of exactly k bytes
    levels: Vec<HashMap<Vec<u8>, ContextStats>>,
}

impl NgramModel {
    /// An untrained model; uniform over bytes (exactly 8.0 bits/byte).
    pub fn new(order: usize, smoothing: Smoothing) -> Result<Self> {
        if !(1..=MAX_ORDER).contains(&order) {
            return Err(Error::validation(format!(
                "model order must be in 1..={MAX_ORDER} (got {order})"
            )));
        }
        if smoothing.alpha <= 0.0 {
            return Err(Error::validation("smoothing alpha must be positive"));
        }
        if !(0.0..1.0).contains(&smoothing.backoff) {
            return Err(Error::validation("backoff weight must be in [0, 1)"));
        }
        Ok(NgramModel {
            order,
            smoothing,
            levels: (0..order).map(|_| HashMap::new()).collect(),
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn smoothing(&self) -> Smoothing {
        self.smoothing
    }

    /// Accumulate counts from one document. Contexts never cross document
    /// boundaries; positions near the start use the shorter contexts only.
    pub fn train_document(&mut self, text: &[u8]) {
        for i in 0..text.len() {
            let byte = text[i];
            for k in 0..self.order.min(i + 1) {
                let ctx = &text[i - k..i];
                match self.levels[k].get_mut(ctx) {
                    Some(stats) => {
                        stats.total += 1;
                        *stats.next.entry(byte).or_insert(0) += 1;
                    }
                    None => {
                        let mut stats = ContextStats {
                            total: 1,
                            ..Default::default()
                        };
                        stats.next.insert(byte, 1);
                        self.levels[k].insert(ctx.to_vec(), stats);
                    }
                }
            }
        }
    }

    /// P(next | context); `context` may be any length, only the trailing
    /// `order − 1` bytes are used.
    pub fn prob(&self, context: &[u8], next: u8) -> f64 {
        let k = (self.order - 1).min(context.len());
        self.prob_at(k, &context[context.len() - k..], next)
    }

    fn prob_at(&self, k: usize, ctx: &[u8], next: u8) -> f64 {
        let alpha = self.smoothing.alpha;
        if k == 0 {
            let stats = self.levels[0].get([].as_slice());
            let (count, total) = match stats {
                Some(s) => (s.next.get(&next).copied().unwrap_or(0), s.total),
                None => (0, 0),
            };
            return (count as f64 + alpha) / (total as f64 + 256.0 * alpha);
        }
        match self.levels[k].get(ctx) {
            None => self.prob_at(k - 1, &ctx[1..], next),
            Some(stats) => {
                let count = stats.next.get(&next).copied().unwrap_or(0);
                let ml = (count as f64 + alpha) / (stats.total as f64 + 256.0 * alpha);
                let beta = self.smoothing.backoff;
                (1.0 - beta) * ml + beta * self.prob_at(k - 1, &ctx[1..], next)
            }
        }
    }

    /// Total training events at the unigram level (0 for an untrained model).
    pub fn trained_bytes(&self) -> u64 {
        self.levels[0]
            .get([].as_slice())
            .map(|s| s.total)
            .unwrap_or(0)
    }
}

/// Train a model over a document sequence.
///
/// The corpus must contain at least one byte of text.
pub fn train_ngram_lm(docs: &[Document], order: usize, smoothing: Smoothing) -> Result<NgramModel> {
    let mut model = NgramModel::new(order, smoothing)?;
    for doc in docs {
        model.train_document(&doc.text);
    }
    if model.trained_bytes() == 0 {
        return Err(Error::validation(
            "cannot train a model on an empty corpus",
        ));
    }
    Ok(model)
}

/// Cross-entropy of `model` on `eval_docs` in bits per byte:
/// `−(1/M) Σ log2 P(byte | context)` with context reset at document starts.
pub fn cross_entropy(model: &NgramModel, eval_docs: &[Document]) -> Result<f64> {
    let mut bits = 0.0;
    let mut bytes = 0u64;
    for doc in eval_docs {
        let text = &doc.text;
        for i in 0..text.len() {
            let start = i.saturating_sub(model.order() - 1);
            bits -= model.prob(&text[start..i], text[i]).log2();
            bytes += 1;
        }
    }
    if bytes == 0 {
        return Err(Error::validation("evaluation set contains no bytes"));
    }
    Ok(bits / bytes as f64)
}
