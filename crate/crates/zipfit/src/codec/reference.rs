//! From-scratch LZ77 + Huffman compressed-size estimator.
//!
//! This backend exists so the pipeline's size measurements can be traced to
//! first principles: a greedy longest-prefix LZ77 parse over a sliding
//! window, followed by Huffman codes over the parsed symbols. It emits a
//! *size estimate*, not a decodable container — the pipeline only ever
//! consumes sizes.
//!
//! Cost model: exact bit widths for back-reference fields are a free choice,
//! so this estimator prices a match as a Huffman code over its
//! `(⌊log2 d⌋, ⌊log2 l⌋)` class pair plus that many extra bits for each of
//! distance and length, and prices a literal as a Huffman code over byte
//! values. Two bytes of fixed overhead stand in for table presence.

use std::collections::BTreeMap;
use std::collections::HashMap;

use crate::{Error, Result};

/// Minimum back-reference length; shorter matches are emitted as literals.
pub const MIN_MATCH: usize = 3;

const TABLE_OVERHEAD_BYTES: u64 = 2;

/// One LZ77 parse symbol: either a literal byte or a back-reference.
///
/// `length == 0 ⇔ distance == 0 ⇔ literal present`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Lz77Token {
    /// Backward distance to the match start; 0 for a literal.
    pub distance: u32,
    /// Match length; 0 for a literal.
    pub length: u32,
    /// The literal byte, present exactly when this is not a match.
    pub literal: Option<u8>,
}

impl Lz77Token {
    pub fn literal(byte: u8) -> Self {
        Lz77Token {
            distance: 0,
            length: 0,
            literal: Some(byte),
        }
    }

    pub fn back_ref(distance: u32, length: u32) -> Self {
        Lz77Token {
            distance,
            length,
            literal: None,
        }
    }

    pub fn is_literal(&self) -> bool {
        self.literal.is_some()
    }
}

fn match_len(payload: &[u8], candidate: usize, pos: usize) -> usize {
    // Direct comparison is valid even when the match overlaps the region
    // being produced: byte-by-byte copy semantics make payload[candidate + k]
    // the already-decoded byte.
    let n = payload.len();
    let mut k = 0;
    while pos + k < n && payload[candidate + k] == payload[pos + k] {
        k += 1;
    }
    k
}

/// Greedy longest-prefix LZ77 parse, left to right.
///
/// Matches may self-overlap (distance < length). Ties on length go to the
/// smallest distance. Decoding the token sequence reproduces the payload
/// exactly.
pub fn lz77_parse(payload: &[u8], window: usize) -> Vec<Lz77Token> {
    assert!(window >= 1, "window must be positive");
    let n = payload.len();
    let mut tokens = Vec::new();
    // Positions of each 3-byte prefix, ascending; scanned nearest-first.
    let mut chains: HashMap<[u8; 3], Vec<u32>> = HashMap::new();
    let insert = |chains: &mut HashMap<[u8; 3], Vec<u32>>, at: usize| {
        if at + MIN_MATCH <= n {
            let key = [payload[at], payload[at + 1], payload[at + 2]];
            chains.entry(key).or_default().push(at as u32);
        }
    };

    let mut i = 0;
    while i < n {
        let remaining = n - i;
        let mut best_len = 0usize;
        let mut best_dist = 0usize;
        if remaining >= MIN_MATCH {
            let key = [payload[i], payload[i + 1], payload[i + 2]];
            if let Some(positions) = chains.get(&key) {
                for &p in positions.iter().rev() {
                    let p = p as usize;
                    let dist = i - p;
                    if dist > window {
                        break; // positions ascend, so everything earlier is farther
                    }
                    // A candidate can only beat the current best if it also
                    // matches at the first byte the best does not cover.
                    if best_len > 0
                        && (i + best_len >= n || payload[p + best_len] != payload[i + best_len])
                    {
                        continue;
                    }
                    let len = match_len(payload, p, i);
                    if len > best_len {
                        best_len = len;
                        best_dist = dist;
                        if best_len == remaining {
                            break;
                        }
                    }
                }
            }
        }
        if best_len >= MIN_MATCH {
            tokens.push(Lz77Token::back_ref(best_dist as u32, best_len as u32));
            for j in i..i + best_len {
                insert(&mut chains, j);
            }
            i += best_len;
        } else {
            tokens.push(Lz77Token::literal(payload[i]));
            insert(&mut chains, i);
            i += 1;
        }
    }
    tokens
}

/// Reconstruct the payload from a parse produced by [`lz77_parse`].
pub fn lz77_decode(tokens: &[Lz77Token]) -> Vec<u8> {
    let mut out: Vec<u8> = Vec::new();
    for t in tokens {
        match t.literal {
            Some(b) => out.push(b),
            None => {
                let start = out.len() - t.distance as usize;
                for k in 0..t.length as usize {
                    out.push(out[start + k]);
                }
            }
        }
    }
    out
}

/// Canonical code lengths plus symbol probabilities for one alphabet.
#[derive(Debug, Clone, PartialEq)]
pub struct HuffmanTable {
    entries: BTreeMap<u32, HuffmanCode>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HuffmanCode {
    /// Code length in bits; always positive.
    pub length: u32,
    pub probability: f64,
}

impl HuffmanTable {
    /// Build a table from explicit lengths and probabilities, checking the
    /// Kraft inequality and length positivity.
    pub fn new(entries: BTreeMap<u32, HuffmanCode>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::validation("huffman table requires at least one symbol"));
        }
        let mut kraft = 0.0;
        for code in entries.values() {
            if code.length == 0 {
                return Err(Error::validation("huffman code lengths must be positive"));
            }
            kraft += (2.0f64).powi(-(code.length as i32));
        }
        if kraft > 1.0 + 1e-12 {
            return Err(Error::validation(format!(
                "code lengths violate the Kraft inequality (sum = {kraft})"
            )));
        }
        Ok(HuffmanTable { entries })
    }

    pub fn length(&self, symbol: u32) -> Option<u32> {
        self.entries.get(&symbol).map(|c| c.length)
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, &HuffmanCode)> {
        self.entries.iter().map(|(s, c)| (*s, c))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn kraft_sum(&self) -> f64 {
        self.entries
            .values()
            .map(|c| (2.0f64).powi(-(c.length as i32)))
            .sum()
    }
}

/// Derive Huffman code lengths from symbol frequencies.
///
/// Heap ties break on symbol order so the result is identical across runs and
/// platforms. A single-symbol alphabet gets code length 1.
pub fn huffman_lengths(frequencies: &BTreeMap<u32, u64>) -> Result<HuffmanTable> {
    if frequencies.is_empty() {
        return Err(Error::validation("huffman table requires at least one symbol"));
    }
    let total: u64 = frequencies.values().sum();
    if frequencies.values().any(|&f| f == 0) {
        return Err(Error::validation("huffman frequencies must be positive"));
    }
    let symbols: Vec<u32> = frequencies.keys().copied().collect();

    let mut entries = BTreeMap::new();
    if symbols.len() == 1 {
        entries.insert(
            symbols[0],
            HuffmanCode {
                length: 1,
                probability: 1.0,
            },
        );
        return HuffmanTable::new(entries);
    }

    // Node arena: leaves first (in symbol order), then internal nodes. The
    // heap orders by (weight, creation order), which resolves equal weights
    // by symbol order among leaves.
    struct Node {
        children: Option<(usize, usize)>,
    }
    let mut nodes: Vec<Node> = symbols.iter().map(|_| Node { children: None }).collect();
    use std::cmp::Reverse;
    use std::collections::BinaryHeap;
    let mut heap: BinaryHeap<Reverse<(u64, usize)>> = symbols
        .iter()
        .enumerate()
        .map(|(idx, sym)| Reverse((frequencies[sym], idx)))
        .collect();

    while heap.len() > 1 {
        let Reverse((w1, n1)) = heap.pop().unwrap();
        let Reverse((w2, n2)) = heap.pop().unwrap();
        let idx = nodes.len();
        nodes.push(Node {
            children: Some((n1, n2)),
        });
        heap.push(Reverse((w1 + w2, idx)));
    }
    let root = heap.pop().unwrap().0 .1;

    // Depth of each leaf = code length.
    let mut depths = vec![0u32; nodes.len()];
    let mut stack = vec![(root, 0u32)];
    while let Some((idx, depth)) = stack.pop() {
        match nodes[idx].children {
            Some((l, r)) => {
                stack.push((l, depth + 1));
                stack.push((r, depth + 1));
            }
            None => depths[idx] = depth,
        }
    }

    for (idx, sym) in symbols.iter().enumerate() {
        entries.insert(
            *sym,
            HuffmanCode {
                length: depths[idx],
                probability: frequencies[sym] as f64 / total as f64,
            },
        );
    }
    HuffmanTable::new(entries)
}

/// Expected code length `Σ p(s) · len(s)` in bits per symbol.
///
/// Probabilities must sum to 1 within 1e-9.
pub fn expected_code_length(table: &HuffmanTable) -> Result<f64> {
    let total: f64 = table.iter().map(|(_, c)| c.probability).sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::validation(format!(
            "symbol probabilities must sum to 1 (got {total})"
        )));
    }
    Ok(table
        .iter()
        .map(|(_, c)| c.probability * c.length as f64)
        .sum())
}

fn floor_log2(x: u32) -> u32 {
    debug_assert!(x >= 1);
    31 - x.leading_zeros()
}

fn match_class(distance: u32, length: u32) -> (u32, u32) {
    (floor_log2(distance), floor_log2(length))
}

/// Estimated compressed size in bytes: LZ77 parse, Huffman over literal
/// bytes, Huffman over `(distance, length)` class pairs plus their extra
/// bits, then `ceil(bits / 8)` plus a 2-byte table-presence overhead.
///
/// The empty payload costs exactly the overhead constant.
pub fn compressed_size_estimate(payload: &[u8], window: usize) -> u64 {
    let tokens = lz77_parse(payload, window);
    let mut lit_freqs: BTreeMap<u32, u64> = BTreeMap::new();
    let mut match_freqs: BTreeMap<u32, u64> = BTreeMap::new();
    let mut extra_bits: u64 = 0;
    for t in &tokens {
        match t.literal {
            Some(b) => *lit_freqs.entry(b as u32).or_insert(0) += 1,
            None => {
                let (dc, lc) = match_class(t.distance, t.length);
                *match_freqs.entry((dc << 6) | lc).or_insert(0) += 1;
                extra_bits += (dc + lc) as u64;
            }
        }
    }

    let mut bits: u64 = extra_bits;
    if !lit_freqs.is_empty() {
        let table = huffman_lengths(&lit_freqs).expect("non-empty literal frequencies");
        for (sym, freq) in &lit_freqs {
            bits += *freq * table.length(*sym).unwrap() as u64;
        }
    }
    if !match_freqs.is_empty() {
        let table = huffman_lengths(&match_freqs).expect("non-empty match frequencies");
        for (sym, freq) in &match_freqs {
            bits += *freq * table.length(*sym).unwrap() as u64;
        }
    }
    bits.div_ceil(8) + TABLE_OVERHEAD_BYTES
}
