//! Compressed-size measurement behind a uniform interface.
//!
//! All scoring consumes sizes only; nothing here ever needs to decompress.
//! Backends are deterministic: the same `(payload, CodecSpec)` always yields
//! the same size. The `lz4c` and `zstdc` backends are optional at build time;
//! the DEFLATE backend and the from-scratch [`reference`] estimator are
//! always available.

pub mod reference;

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Sliding-window size used by the reference estimator, mirroring DEFLATE.
pub const REFERENCE_WINDOW: usize = 32 * 1024;

/// Compression backend identity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Deflate,
    Lz4c,
    Zstdc,
    Reference,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Deflate => "deflate",
            Algorithm::Lz4c => "lz4c",
            Algorithm::Zstdc => "zstdc",
            Algorithm::Reference => "reference",
        }
    }

    /// Native `(min, max)` level range of the backend.
    ///
    /// DEFLATE uses the 1..=9 effort scale; level 0 (stored blocks) is not a
    /// compression level. Backends without an effort knob report a single
    /// level of 0.
    pub fn level_range(self) -> (i32, i32) {
        match self {
            Algorithm::Deflate => (1, 9),
            Algorithm::Zstdc => (1, 22),
            Algorithm::Lz4c | Algorithm::Reference => (0, 0),
        }
    }

    pub fn default_level(self) -> i32 {
        match self {
            Algorithm::Deflate => 6,
            Algorithm::Zstdc => 3,
            Algorithm::Lz4c | Algorithm::Reference => 0,
        }
    }

    /// Whether this build carries the backend.
    pub fn available(self) -> bool {
        match self {
            Algorithm::Deflate | Algorithm::Reference => true,
            Algorithm::Lz4c => cfg!(feature = "lz4c"),
            Algorithm::Zstdc => cfg!(feature = "zstdc"),
        }
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "deflate" => Ok(Algorithm::Deflate),
            "lz4c" => Ok(Algorithm::Lz4c),
            "zstdc" => Ok(Algorithm::Zstdc),
            "reference" => Ok(Algorithm::Reference),
            other => Err(Error::validation(format!(
                "unknown codec algorithm `{other}` (expected deflate, lz4c, zstdc, or reference)"
            ))),
        }
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Map a raw backend level onto the shared `[0, 1]` scale.
///
/// Linear between the backend's native min and max; a backend with a single
/// level maps to 0.
pub fn normalize_level(algorithm: Algorithm, raw_level: i32) -> Result<f64> {
    let (lo, hi) = algorithm.level_range();
    if raw_level < lo || raw_level > hi {
        return Err(Error::validation(format!(
            "level {raw_level} out of range for {algorithm} (valid: {lo}..={hi})"
        )));
    }
    if lo == hi {
        return Ok(0.0);
    }
    Ok(f64::from(raw_level - lo) / f64::from(hi - lo))
}

/// Backend identity plus raw and normalized level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodecSpec {
    pub algorithm: Algorithm,
    pub raw_level: i32,
    pub normalized_level: f64,
}

impl CodecSpec {
    pub fn new(algorithm: Algorithm, raw_level: i32) -> Result<Self> {
        let normalized_level = normalize_level(algorithm, raw_level)?;
        Ok(CodecSpec {
            algorithm,
            raw_level,
            normalized_level,
        })
    }

    pub fn with_default_level(algorithm: Algorithm) -> Self {
        CodecSpec::new(algorithm, algorithm.default_level()).expect("default level is in range")
    }

    /// Build the backend this spec names, or fail with a "codec unavailable"
    /// error when the build lacks it.
    pub fn build(&self) -> Result<Box<dyn Codec>> {
        match self.algorithm {
            Algorithm::Deflate => Ok(Box::new(DeflateCodec { spec: *self })),
            Algorithm::Reference => Ok(Box::new(ReferenceCodec { spec: *self })),
            #[cfg(feature = "lz4c")]
            Algorithm::Lz4c => Ok(Box::new(Lz4Codec { spec: *self })),
            #[cfg(not(feature = "lz4c"))]
            Algorithm::Lz4c => Err(Error::CodecUnavailable { algorithm: "lz4c" }),
            #[cfg(feature = "zstdc")]
            Algorithm::Zstdc => Ok(Box::new(ZstdCodec { spec: *self })),
            #[cfg(not(feature = "zstdc"))]
            Algorithm::Zstdc => Err(Error::CodecUnavailable { algorithm: "zstdc" }),
        }
    }
}

impl FromStr for CodecSpec {
    type Err = Error;

    /// Parse `"deflate:6"` or bare `"deflate"` (default level).
    fn from_str(s: &str) -> Result<Self> {
        match s.split_once(':') {
            None => Ok(CodecSpec::with_default_level(s.parse()?)),
            Some((algo, level)) => {
                let algorithm: Algorithm = algo.parse()?;
                let raw: i32 = level.parse().map_err(|_| {
                    Error::validation(format!("invalid codec level `{level}` in `{s}`"))
                })?;
                CodecSpec::new(algorithm, raw)
            }
        }
    }
}

impl std::fmt::Display for CodecSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}", self.algorithm, self.raw_level)
    }
}

/// Compressed-size measurement. Implementations are pure: callers may invoke
/// them concurrently on distinct payloads with no shared state.
pub trait Codec: Send + Sync {
    fn spec(&self) -> &CodecSpec;

    /// Exact encoded byte length of `payload` under this backend.
    fn compressed_size(&self, payload: &[u8]) -> Result<u64>;
}

struct DeflateCodec {
    spec: CodecSpec,
}

thread_local! {
    // The deflate compressor state is a few hundred KB; allocating it per
    // call dominates small-payload measurement, so each worker thread keeps
    // one per level and resets it between payloads.
    static DEFLATE_CTX: std::cell::RefCell<Option<(u32, flate2::Compress)>> =
        const { std::cell::RefCell::new(None) };
}

fn deflate_size(payload: &[u8], level: u32) -> Result<u64> {
    use flate2::{Compress, Compression, FlushCompress, Status};
    DEFLATE_CTX.with(|cell| {
        let mut slot = cell.borrow_mut();
        match slot.as_mut() {
            Some((l, ctx)) if *l == level => ctx.reset(),
            _ => *slot = Some((level, Compress::new(Compression::new(level), false))),
        }
        let ctx = &mut slot.as_mut().expect("just initialized").1;
        let mut scratch = vec![0u8; 16 * 1024];
        let mut consumed = 0usize;
        loop {
            let before_in = ctx.total_in();
            let flush = if consumed < payload.len() {
                FlushCompress::None
            } else {
                FlushCompress::Finish
            };
            let status = ctx
                .compress(&payload[consumed..], &mut scratch, flush)
                .map_err(|e| Error::Runtime(format!("deflate failed: {e}")))?;
            consumed += (ctx.total_in() - before_in) as usize;
            match status {
                Status::StreamEnd => break,
                Status::Ok => {}
                Status::BufError => {
                    return Err(Error::Runtime("deflate made no progress".into()));
                }
            }
        }
        Ok(ctx.total_out())
    })
}

impl Codec for DeflateCodec {
    fn spec(&self) -> &CodecSpec {
        &self.spec
    }

    fn compressed_size(&self, payload: &[u8]) -> Result<u64> {
        deflate_size(payload, self.spec.raw_level as u32)
    }
}

struct ReferenceCodec {
    spec: CodecSpec,
}

impl Codec for ReferenceCodec {
    fn spec(&self) -> &CodecSpec {
        &self.spec
    }

    fn compressed_size(&self, payload: &[u8]) -> Result<u64> {
        Ok(reference::compressed_size_estimate(payload, REFERENCE_WINDOW))
    }
}

#[cfg(feature = "lz4c")]
struct Lz4Codec {
    spec: CodecSpec,
}

#[cfg(feature = "lz4c")]
impl Codec for Lz4Codec {
    fn spec(&self) -> &CodecSpec {
        &self.spec
    }

    fn compressed_size(&self, payload: &[u8]) -> Result<u64> {
        Ok(lz4_flex::compress(payload).len() as u64)
    }
}

#[cfg(feature = "zstdc")]
struct ZstdCodec {
    spec: CodecSpec,
}

#[cfg(feature = "zstdc")]
impl Codec for ZstdCodec {
    fn spec(&self) -> &CodecSpec {
        &self.spec
    }

    fn compressed_size(&self, payload: &[u8]) -> Result<u64> {
        let out = zstd::bulk::compress(payload, self.spec.raw_level)
            .map_err(|e| Error::Runtime(format!("zstd compression failed: {e}")))?;
        Ok(out.len() as u64)
    }
}
