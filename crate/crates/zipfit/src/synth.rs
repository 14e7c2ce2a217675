//! Seeded synthetic corpora for the evaluation harness and benchmarks.
//!
//! Three text families with deliberately different byte statistics:
//!
//! * a small formal-expression grammar (the target task),
//! * a code-like grammar sharing some surface structure with it,
//! * English-like filler prose.
//!
//! The shipped benchmark mixes all three into a source pool and uses pure
//! formal statements as the target, so alignment ranks the families apart
//! and an n-gram model trained on the top of the ranking should predict the
//! target distribution best.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::corpus::{Document, TokenRule};

const FORMAL_NAMES: &[&str] = &[
    "add", "mul", "comm", "assoc", "succ", "zero", "le_trans", "lt_iff", "norm", "gauge", "seq",
    "sum", "prod", "inv", "neg", "abs",
];

const FORMAL_VARS: &[&str] = &["a", "b", "c", "n", "m", "x", "y", "k"];

const FORMAL_TACTICS: &[&str] = &[
    "simp",
    "ring",
    "omega",
    "rfl",
    "simp [add_comm]",
    "simp_arith",
    "exact h",
    "apply le_trans h",
    "constructor <;> simp",
];

const CODE_FUNCS: &[&str] = &[
    "process", "collect", "filter", "merge", "resolve", "encode", "dispatch", "reduce",
];

const CODE_VARS: &[&str] = &[
    "items", "total", "limit", "result", "values", "index", "buffer", "count", "queue", "cache",
];

const FILLER_WORDS: &[&str] = &[
    "the", "a", "market", "report", "described", "gradual", "improvement", "in", "seasonal",
    "conditions", "during", "recent", "months", "committee", "noted", "that", "regional",
    "demand", "remained", "steady", "while", "supply", "pressures", "eased", "observers",
    "expect", "further", "adjustment", "over", "coming", "quarter", "officials", "announced",
    "plans", "for", "review", "of", "existing", "programs", "and", "community", "members",
    "offered", "feedback", "on", "proposed", "changes", "weather", "patterns", "shifted",
    "toward", "milder", "afternoons", "with", "occasional", "showers", "residents", "adapted",
    "their", "routines", "accordingly", "historians", "trace", "this", "custom", "to", "earlier",
    "practices", "common", "across", "several", "valleys",
];

fn pick<'a>(rng: &mut ChaCha8Rng, pool: &[&'a str]) -> &'a str {
    pool[rng.gen_range(0..pool.len())]
}

fn formal_expr(rng: &mut ChaCha8Rng, depth: usize) -> String {
    if depth == 0 || rng.gen_bool(0.3) {
        return pick(rng, FORMAL_VARS).to_string();
    }
    let op = ["+", "*", "-"][rng.gen_range(0..3)];
    format!(
        "{} {} {}",
        formal_expr(rng, depth - 1),
        op,
        formal_expr(rng, depth - 1)
    )
}

fn formal_statement(rng: &mut ChaCha8Rng) -> String {
    let kind = ["theorem", "lemma", "example"][rng.gen_range(0..3)];
    let name = format!("{}_{}", pick(rng, FORMAL_NAMES), rng.gen_range(0..500));
    let v1 = pick(rng, FORMAL_VARS);
    let v2 = pick(rng, FORMAL_VARS);
    let lhs = formal_expr(rng, 2);
    let rhs = formal_expr(rng, 2);
    let rel = ["=", "<=", "<"][rng.gen_range(0..3)];
    let tactic = pick(rng, FORMAL_TACTICS);
    match rng.gen_range(0..3) {
        0 => format!(
            "{kind} {name} ({v1} {v2} : Nat) : {lhs} {rel} {rhs} := by {tactic}\n"
        ),
        1 => format!(
            "{kind} {name} : forall {v1} : Nat, {lhs} {rel} {rhs} := by\n  intro {v1}\n  {tactic}\n"
        ),
        _ => format!(
            "{kind} {name} (h : {v1} {rel} {v2}) : {lhs} {rel} {rhs} := by\n  {tactic}\n"
        ),
    }
}

/// One target-grammar document: a few formal statements.
pub fn formal_doc(rng: &mut ChaCha8Rng) -> String {
    let statements = rng.gen_range(2..5);
    (0..statements).map(|_| formal_statement(rng)).collect()
}

#[derive(Clone, Copy, PartialEq)]
enum Family {
    Formal,
    Code,
    Filler,
}

fn segment(rng: &mut ChaCha8Rng, family: Family) -> String {
    match family {
        Family::Formal => formal_statement(rng),
        Family::Code => code_function(rng),
        Family::Filler => filler_sentences(rng, 2),
    }
}

/// A source document: segments of a dominant family with a per-document
/// contamination rate drawn from `0..max_contamination`. Crawled pools are
/// never clean; the contamination also spreads document alignment smoothly
/// inside each family, which is what makes ranking them meaningful.
fn contaminated_doc(
    rng: &mut ChaCha8Rng,
    main: Family,
    max_contamination: f64,
    contaminants: &[(Family, f64)],
) -> String {
    let contamination = rng.gen_range(0.0..max_contamination);
    let segments = rng.gen_range(4..8);
    let mut out = String::new();
    for _ in 0..segments {
        let family = if rng.gen_bool(contamination) {
            let total: f64 = contaminants.iter().map(|(_, w)| w).sum();
            let mut pick = rng.gen_range(0.0..total);
            let mut chosen = contaminants[0].0;
            for (f, w) in contaminants {
                if pick < *w {
                    chosen = *f;
                    break;
                }
                pick -= w;
            }
            chosen
        } else {
            main
        };
        out.push_str(&segment(rng, family));
        out.push('\n');
    }
    out
}

fn code_function(rng: &mut ChaCha8Rng) -> String {
    let fname = format!("{}_{}", pick(rng, CODE_FUNCS), rng.gen_range(0..200));
    let arg1 = pick(rng, CODE_VARS);
    let arg2 = pick(rng, CODE_VARS);
    let acc = pick(rng, CODE_VARS);
    let mut body = format!("def {fname}({arg1}, {arg2}):\n    {acc} = 0\n");
    for _ in 0..rng.gen_range(1..4) {
        match rng.gen_range(0..3) {
            0 => body.push_str(&format!(
                "    for x in {arg1}:\n        if x > {}:\n            {acc} += x\n",
                rng.gen_range(0..100)
            )),
            1 => body.push_str(&format!(
                "    {acc} = {acc} * {} + len({arg2})\n",
                rng.gen_range(2..9)
            )),
            _ => body.push_str(&format!(
                "    if {arg2} is None:\n        return {}\n",
                rng.gen_range(0..10)
            )),
        }
    }
    body.push_str(&format!("    return {acc}\n"));
    body
}

/// One code-like document: a couple of function definitions.
pub fn code_doc(rng: &mut ChaCha8Rng) -> String {
    let functions = rng.gen_range(1..3);
    (0..functions)
        .map(|_| code_function(rng))
        .collect::<Vec<_>>()
        .join("\n")
}

fn filler_sentences(rng: &mut ChaCha8Rng, sentences: usize) -> String {
    let mut out = String::new();
    for _ in 0..sentences {
        let words = rng.gen_range(8..16);
        for i in 0..words {
            let w = pick(rng, FILLER_WORDS);
            if i == 0 {
                let mut chars = w.chars();
                if let Some(first) = chars.next() {
                    out.extend(first.to_uppercase());
                    out.push_str(chars.as_str());
                }
            } else {
                out.push(' ');
                out.push_str(w);
            }
        }
        out.push_str(". ");
    }
    out
}

/// One English-like filler document: a few prose sentences.
pub fn filler_doc(rng: &mut ChaCha8Rng) -> String {
    let sentences = rng.gen_range(3..6);
    filler_sentences(rng, sentences)
}

/// `n` target-grammar documents.
pub fn target_corpus(seed: u64, n: usize, rule: TokenRule) -> Vec<Document> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| Document::new(format!("target:{i}"), formal_doc(&mut rng), "grammar", rule))
        .collect()
}

/// Mixed source pool: formal, code-like, and filler documents, deterministically
/// interleaved by a seeded shuffle. Origins tag the generating family.
pub fn mixed_source_corpus(
    seed: u64,
    n_formal: usize,
    n_code: usize,
    n_filler: usize,
    rule: TokenRule,
) -> Vec<Document> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
    let mut docs = Vec::with_capacity(n_formal + n_code + n_filler);
    for i in 0..n_formal {
        let text = contaminated_doc(
            &mut rng,
            Family::Formal,
            0.5,
            &[(Family::Code, 0.5), (Family::Filler, 0.5)],
        );
        docs.push(Document::new(format!("src-grammar:{i}"), text, "grammar", rule));
    }
    for i in 0..n_code {
        let text = contaminated_doc(
            &mut rng,
            Family::Code,
            0.5,
            &[(Family::Formal, 0.4), (Family::Filler, 0.6)],
        );
        docs.push(Document::new(format!("src-code:{i}"), text, "code", rule));
    }
    for i in 0..n_filler {
        let text = contaminated_doc(&mut rng, Family::Filler, 0.4, &[(Family::Code, 1.0)]);
        docs.push(Document::new(format!("src-filler:{i}"), text, "filler", rule));
    }
    // Fisher-Yates with the same seed the ids were generated under, so the
    // interleaving is reproducible.
    for i in (1..docs.len()).rev() {
        let j = rng.gen_range(0..=i);
        docs.swap(i, j);
    }
    docs
}

/// The shipped desk-scale benchmark: formal-grammar target, ~2 MB mixed
/// source.
pub struct Benchmark {
    pub source: Vec<Document>,
    pub target: Vec<Document>,
}

pub fn benchmark_corpus(seed: u64, rule: TokenRule) -> Benchmark {
    Benchmark {
        source: mixed_source_corpus(seed, 800, 950, 950, rule),
        target: target_corpus(seed.wrapping_add(7), 64, rule),
    }
}

/// `n` documents of roughly `approx_bytes` each, drawn from all three
/// families. Used for timing runs where content only needs to be plausible.
pub fn timing_corpus(seed: u64, n: usize, rule: TokenRule) -> Vec<Document> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(2));
    (0..n)
        .map(|i| {
            let text = match i % 3 {
                0 => formal_doc(&mut rng),
                1 => code_doc(&mut rng),
                _ => filler_doc(&mut rng),
            };
            Document::new(format!("timing:{i}"), text, "timing", rule)
        })
        .collect()
}

/// `n` documents of exactly `bytes` each (generated text is ASCII, so the
/// truncation is safe). For workload measurements that pin document size.
pub fn fixed_size_corpus(seed: u64, n: usize, bytes: usize, rule: TokenRule) -> Vec<Document> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(3));
    (0..n)
        .map(|i| {
            let mut text = String::new();
            while text.len() < bytes {
                text.push_str(&match i % 3 {
                    0 => formal_statement(&mut rng),
                    1 => code_function(&mut rng),
                    _ => filler_sentences(&mut rng, 1),
                });
            }
            text.truncate(bytes);
            Document::new(format!("fixed:{i}"), text, "timing", rule)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generators_are_seed_deterministic() {
        let a = benchmark_corpus(3, TokenRule::Whitespace);
        let b = benchmark_corpus(3, TokenRule::Whitespace);
        assert_eq!(a.source, b.source);
        assert_eq!(a.target, b.target);
        let c = benchmark_corpus(4, TokenRule::Whitespace);
        assert_ne!(a.source[0].text, c.source[0].text);
    }

    #[test]
    fn benchmark_is_desk_scale() {
        let bench = benchmark_corpus(0, TokenRule::Whitespace);
        let source_bytes: usize = bench.source.iter().map(|d| d.text.len()).sum();
        assert!(
            (1_000_000..4_000_000).contains(&source_bytes),
            "source is {source_bytes} bytes"
        );
        assert!(bench.target.len() >= 32);
    }

    #[test]
    fn families_are_tagged() {
        let docs = mixed_source_corpus(1, 5, 5, 5, TokenRule::Whitespace);
        assert_eq!(docs.iter().filter(|d| d.origin == "grammar").count(), 5);
        assert_eq!(docs.iter().filter(|d| d.origin == "code").count(), 5);
        assert_eq!(docs.iter().filter(|d| d.origin == "filler").count(), 5);
    }

    #[test]
    fn documents_have_reasonable_sizes() {
        let docs = timing_corpus(5, 30, TokenRule::Whitespace);
        for d in &docs {
            assert!(d.text.len() > 50, "{} is tiny: {}", d.id, d.text.len());
            assert!(d.text.len() < 2000, "{} is huge: {}", d.id, d.text.len());
            assert!(d.token_count > 0);
        }
    }
}
