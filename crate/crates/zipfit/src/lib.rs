//! Compression-based training-data selection.
//!
//! The core idea: a candidate document is worth training on when it compresses
//! well *together with* examples of the target task. Alignment between a
//! candidate `x` and a target example `y` is measured with the normalized
//! compression distance
//!
//! ```text
//! NCD(x, y) = (C(x + y) - min(C(x), C(y))) / max(C(x), C(y))
//! ```
//!
//! where `C` is a compressed size and `+` is byte concatenation. A document's
//! alignment score is `1 - mean(NCD(x, y_j))` over all target examples; higher
//! means more shared structure. Selection then takes a top-K prefix, a token
//! budget prefix, or a threshold filter over the ranked scores.
//!
//! The crate also ships a hashed n-gram importance-resampling baseline
//! ([`dsir`]), a from-scratch LZ77 + Huffman size estimator
//! ([`codec::reference`]), and a byte n-gram evaluation harness ([`eval`])
//! that checks the alignment-to-cross-entropy relationship without training
//! neural models.

pub mod alignment;
pub mod bench;
pub mod cli;
pub mod codec;
pub mod corpus;
pub mod dsir;
mod error;
pub mod eval;
pub mod manifest;
pub mod ngram;
pub mod selection;
pub mod synth;

pub use error::{Error, Result};
