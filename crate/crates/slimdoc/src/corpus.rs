//! Document ingestion, tokenization, chunking, corpus statistics, and a
//! seeded synthetic-document generator.
//!
//! Pre-processing reduces every document to at most 5 chunks of at most 200
//! tokens each (1,000 tokens total); longer documents are truncated, shorter
//! ones pass through unaltered.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::sync::RwLock;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type TokenId = u32;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("empty corpus")]
    EmptyCorpus,
    #[error("invalid chunk policy: {0}")]
    InvalidChunkPolicy(String),
    #[error("invalid length distribution: {0}")]
    InvalidLengthDistribution(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed record at line {line}: {source}")]
    MalformedRecord {
        line: usize,
        source: serde_json::Error,
    },
}

/// Where a document came from. Metadata only; no extraction is performed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceKind {
    Illustration,
    Slide,
    Spreadsheet,
    Generated,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub text: String,
    pub source_kind: SourceKind,
}

/// Tokenizer abstraction. The built-in [`HashTokenizer`] is the offline
/// fallback; external tokenizers plug in through this trait.
pub trait Tokenizer: Send + Sync {
    fn encode(&self, text: &str) -> Vec<TokenId>;
    fn decode(&self, tokens: &[TokenId]) -> String;
    fn vocab_size(&self) -> usize;
}

/// Deterministic whitespace-plus-punctuation tokenizer over a hash-bucketed
/// id space.
///
/// Text splits into pieces of the form `[whitespace run][alphanumeric run]`,
/// `[whitespace run][single symbol char]`, or a trailing whitespace run, so
/// that concatenating the pieces reproduces the input exactly. Each piece is
/// assigned a bucket by hashing, with linear probing on collision; the
/// piece-to-bucket table is remembered so `decode(encode(t)) == t` as long as
/// the table has capacity (distinct pieces < `vocab_size`).
///
/// Bucket 0 is reserved as the end-of-sequence token and is never produced
/// by `encode`; `decode` renders it as the empty string.
pub struct HashTokenizer {
    buckets: usize,
    table: RwLock<Vec<Option<String>>>,
}

/// Reserved end-of-sequence id in [`HashTokenizer`]'s bucket space.
pub const EOS_TOKEN: TokenId = 0;

impl HashTokenizer {
    /// `vocab_size` must be at least 2 (EOS plus one usable bucket).
    pub fn new(vocab_size: usize) -> Self {
        assert!(vocab_size >= 2, "vocab_size must be at least 2");
        Self {
            buckets: vocab_size,
            table: RwLock::new(vec![None; vocab_size]),
        }
    }

    fn piece_id(&self, piece: &str) -> TokenId {
        let usable = self.buckets - 1;
        let home = (fnv1a(piece.as_bytes()) % usable as u64) as usize;
        {
            let table = self.table.read().unwrap();
            if let Some(id) = probe_read(&table, home, piece) {
                return id;
            }
        }
        let mut table = self.table.write().unwrap();
        // Re-check under the write lock; another thread may have inserted.
        if let Some(id) = probe_read(&table, home, piece) {
            return id;
        }
        let usable = table.len() - 1;
        for step in 0..usable {
            let slot = 1 + (home + step) % usable;
            if table[slot].is_none() {
                table[slot] = Some(piece.to_string());
                return slot as TokenId;
            }
        }
        // Table full: fall back to the home bucket. Round-trip decoding is
        // no longer exact past this point.
        (1 + home) as TokenId
    }
}

fn probe_read(table: &[Option<String>], home: usize, piece: &str) -> Option<TokenId> {
    let usable = table.len() - 1;
    for step in 0..usable {
        let slot = 1 + (home + step) % usable;
        match &table[slot] {
            Some(p) if p == piece => return Some(slot as TokenId),
            Some(_) => continue,
            None => return None,
        }
    }
    None
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

/// Split `text` into pieces whose concatenation equals `text`.
pub(crate) fn split_pieces(text: &str) -> Vec<&str> {
    let mut pieces = Vec::new();
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut i = 0;
    while i < chars.len() {
        let start = chars[i].0;
        while i < chars.len() && chars[i].1.is_whitespace() {
            i += 1;
        }
        if i == chars.len() {
            pieces.push(&text[start..]);
            break;
        }
        if chars[i].1.is_alphanumeric() {
            while i < chars.len() && chars[i].1.is_alphanumeric() {
                i += 1;
            }
        } else {
            i += 1;
        }
        let end = if i < chars.len() { chars[i].0 } else { text.len() };
        pieces.push(&text[start..end]);
    }
    pieces
}

impl Tokenizer for HashTokenizer {
    fn encode(&self, text: &str) -> Vec<TokenId> {
        split_pieces(text)
            .into_iter()
            .map(|p| self.piece_id(p))
            .collect()
    }

    fn decode(&self, tokens: &[TokenId]) -> String {
        let table = self.table.read().unwrap();
        let mut out = String::new();
        for &t in tokens {
            if let Some(Some(piece)) = table.get(t as usize) {
                out.push_str(piece);
            }
        }
        out
    }

    fn vocab_size(&self) -> usize {
        self.buckets
    }
}

impl Default for HashTokenizer {
    fn default() -> Self {
        Self::new(32_768)
    }
}

/// Chunk-count and per-chunk token caps for pre-processing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChunkPolicy {
    pub chunk_count: usize,
    pub chunk_size: usize,
}

impl Default for ChunkPolicy {
    fn default() -> Self {
        Self {
            chunk_count: 5,
            chunk_size: 200,
        }
    }
}

impl ChunkPolicy {
    pub fn max_tokens(&self) -> usize {
        self.chunk_count * self.chunk_size
    }

    fn validate(&self) -> Result<(), CorpusError> {
        if self.chunk_count < 1 || self.chunk_size < 1 {
            return Err(CorpusError::InvalidChunkPolicy(format!(
                "chunk_count and chunk_size must be >= 1, got {} x {}",
                self.chunk_count, self.chunk_size
            )));
        }
        Ok(())
    }
}

/// A document reduced to bounded token chunks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChunkedDocument {
    pub doc_id: String,
    pub chunks: Vec<Vec<TokenId>>,
    pub total_tokens: usize,
    /// True when tokens beyond the policy cap were discarded.
    pub truncated: bool,
}

/// Greedy left-to-right packing: chunk `i` holds tokens
/// `[i * chunk_size, (i + 1) * chunk_size)`; tokens beyond
/// `chunk_count * chunk_size` are discarded and trailing empty chunks are
/// omitted. An empty document yields zero chunks.
pub fn chunk_document(
    doc: &Document,
    tok: &dyn Tokenizer,
    policy: ChunkPolicy,
) -> Result<ChunkedDocument, CorpusError> {
    policy.validate()?;
    let tokens = tok.encode(&doc.text);
    let truncated = tokens.len() > policy.max_tokens();
    let kept = &tokens[..tokens.len().min(policy.max_tokens())];
    let chunks: Vec<Vec<TokenId>> = kept.chunks(policy.chunk_size).map(<[_]>::to_vec).collect();
    Ok(ChunkedDocument {
        doc_id: doc.id.clone(),
        total_tokens: kept.len(),
        chunks,
        truncated,
    })
}

/// Which side of pre-processing to measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    /// Raw encodings, before chunking.
    Pre,
    /// Chunked totals, after truncation.
    Post,
}

/// Exact token-count statistics; `std` is the population standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TokenStats {
    pub mean: f64,
    pub std: f64,
    pub min: usize,
    pub max: usize,
    pub count: usize,
}

impl TokenStats {
    pub fn from_counts(counts: &[usize]) -> Result<Self, CorpusError> {
        if counts.is_empty() {
            return Err(CorpusError::EmptyCorpus);
        }
        let n = counts.len() as f64;
        let mean = counts.iter().map(|&c| c as f64).sum::<f64>() / n;
        let var = counts
            .iter()
            .map(|&c| {
                let d = c as f64 - mean;
                d * d
            })
            .sum::<f64>()
            / n;
        Ok(Self {
            mean,
            std: var.sqrt(),
            min: *counts.iter().min().unwrap(),
            max: *counts.iter().max().unwrap(),
            count: counts.len(),
        })
    }
}

pub fn corpus_stats(
    docs: &[Document],
    tok: &dyn Tokenizer,
    stage: Stage,
    policy: ChunkPolicy,
) -> Result<TokenStats, CorpusError> {
    if docs.is_empty() {
        return Err(CorpusError::EmptyCorpus);
    }
    let counts: Vec<usize> = match stage {
        Stage::Pre => docs.iter().map(|d| tok.encode(&d.text).len()).collect(),
        Stage::Post => docs
            .iter()
            .map(|d| chunk_document(d, tok, policy).map(|c| c.total_tokens))
            .collect::<Result<_, _>>()?,
    };
    TokenStats::from_counts(&counts)
}

/// Render pre-/post-processing stats as an aligned two-column table
/// (mean ± std and token range per stage).
pub fn render_stats_table(pre: &TokenStats, post: &TokenStats) -> String {
    let rows = [("Pre-processing", pre), ("Post-processing", post)];
    let cells: Vec<(String, String, String)> = rows
        .iter()
        .map(|(name, s)| {
            (
                name.to_string(),
                format!(
                    "{} \u{00b1} {}",
                    group_thousands(s.mean, 2),
                    group_thousands(s.std, 2)
                ),
                format!(
                    "{} -- {}",
                    group_thousands(s.min as f64, 0),
                    group_thousands(s.max as f64, 0)
                ),
            )
        })
        .collect();
    let w0 = cells
        .iter()
        .map(|c| c.0.len())
        .max()
        .unwrap()
        .max("Processing Stage".len());
    let w1 = cells
        .iter()
        .map(|c| c.1.len())
        .max()
        .unwrap()
        .max("Mean \u{00b1} STD".len());
    let w2 = cells
        .iter()
        .map(|c| c.2.len())
        .max()
        .unwrap()
        .max("Token Range".len());
    let mut out = format!(
        "{:<w0$} | {:>w1$} | {:>w2$}\n",
        "Processing Stage", "Mean \u{00b1} STD", "Token Range"
    );
    for (name, ms, range) in &cells {
        out.push_str(&format!("{name:<w0$} | {ms:>w1$} | {range:>w2$}\n"));
    }
    out
}

/// Format `value` with comma-grouped thousands and `decimals` fraction digits.
pub(crate) fn group_thousands(value: f64, decimals: usize) -> String {
    let formatted = format!("{value:.decimals$}");
    let (int_part, frac_part) = match formatted.split_once('.') {
        Some((i, f)) => (i, Some(f)),
        None => (formatted.as_str(), None),
    };
    let (sign, digits) = match int_part.strip_prefix('-') {
        Some(d) => ("-", d),
        None => ("", int_part),
    };
    let mut grouped = String::new();
    for (i, ch) in digits.chars().enumerate() {
        if i > 0 && (digits.len() - i) % 3 == 0 {
            grouped.push(',');
        }
        grouped.push(ch);
    }
    match frac_part {
        Some(f) => format!("{sign}{grouped}.{f}"),
        None => format!("{sign}{grouped}"),
    }
}

/// Token-count distribution for the synthetic generator, in tokens of the
/// fallback tokenizer. Samples are drawn from Normal(mean, std) and clipped
/// to `[min, max]`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LengthDistribution {
    pub mean: f64,
    pub std: f64,
    pub min: usize,
    pub max: usize,
}

impl LengthDistribution {
    fn validate(&self) -> Result<(), CorpusError> {
        if self.min < 1 {
            return Err(CorpusError::InvalidLengthDistribution(
                "min must be >= 1".into(),
            ));
        }
        if self.min > self.max {
            return Err(CorpusError::InvalidLengthDistribution(format!(
                "min {} exceeds max {}",
                self.min, self.max
            )));
        }
        if !self.mean.is_finite() || !self.std.is_finite() || self.std < 0.0 {
            return Err(CorpusError::InvalidLengthDistribution(
                "mean and std must be finite, std >= 0".into(),
            ));
        }
        Ok(())
    }
}

const CONSONANTS: [&str; 14] = [
    "b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z",
];
const VOWELS: [&str; 5] = ["a", "e", "i", "o", "u"];

fn synth_word(rng: &mut ChaCha8Rng) -> String {
    let syllables = rng.random_range(1..=3);
    let mut w = String::new();
    for _ in 0..syllables {
        w.push_str(CONSONANTS[rng.random_range(0..CONSONANTS.len())]);
        w.push_str(VOWELS[rng.random_range(0..VOWELS.len())]);
    }
    if rng.random_bool(0.3) {
        w.push_str(CONSONANTS[rng.random_range(0..CONSONANTS.len())]);
    }
    w
}

/// Deterministic word-like corpus whose token counts (under the fallback
/// tokenizer) follow the clipped distribution. Same seed, same bytes.
pub fn generate_synthetic_corpus(
    seed: u64,
    n_docs: usize,
    dist: LengthDistribution,
) -> Result<Vec<Document>, CorpusError> {
    if n_docs < 1 {
        return Err(CorpusError::InvalidLengthDistribution(
            "n_docs must be >= 1".into(),
        ));
    }
    dist.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(dist.mean, dist.std.max(f64::MIN_POSITIVE))
        .map_err(|e| CorpusError::InvalidLengthDistribution(e.to_string()))?;
    let mut docs = Vec::with_capacity(n_docs);
    for i in 0..n_docs {
        let target = (normal.sample(&mut rng).round() as i64)
            .clamp(dist.min as i64, dist.max as i64) as usize;
        let mut text = String::new();
        let mut remaining = target;
        let mut sentence_start = true;
        while remaining > 0 {
            let mut word = synth_word(&mut rng);
            if sentence_start {
                word[..1].make_ascii_uppercase();
            }
            if !text.is_empty() {
                text.push(' ');
            }
            text.push_str(&word);
            remaining -= 1;
            sentence_start = false;
            // A period is its own token; only spend one if budget remains.
            if remaining > 0 && rng.random_bool(0.12) {
                text.push('.');
                remaining -= 1;
                sentence_start = true;
            }
        }
        docs.push(Document {
            id: format!("doc-{i:05}"),
            text,
            source_kind: SourceKind::Generated,
        });
    }
    Ok(docs)
}

/// Wire record for chunked corpora: `{"doc_id", "chunks": [[ints]]}`.
#[derive(Debug, Serialize, Deserialize)]
struct ChunkRecord {
    doc_id: String,
    chunks: Vec<Vec<TokenId>>,
}

pub fn read_corpus_jsonl(path: &Path) -> Result<Vec<Document>, CorpusError> {
    let reader = BufReader::new(std::fs::File::open(path)?);
    let mut docs = Vec::new();
    let mut ids = BTreeMap::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let doc: Document = serde_json::from_str(&line)
            .map_err(|source| CorpusError::MalformedRecord { line: i + 1, source })?;
        if let Some(prev) = ids.insert(doc.id.clone(), i + 1) {
            return Err(CorpusError::InvalidLengthDistribution(format!(
                "duplicate document id {:?} at lines {} and {}",
                doc.id,
                prev,
                i + 1
            )));
        }
        docs.push(doc);
    }
    Ok(docs)
}

pub fn write_corpus_jsonl(path: &Path, docs: &[Document]) -> Result<(), CorpusError> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    for doc in docs {
        serde_json::to_writer(&mut f, doc).map_err(std::io::Error::other)?;
        f.write_all(b"\n")?;
    }
    f.flush()?;
    Ok(())
}

pub fn write_chunked_jsonl(path: &Path, docs: &[ChunkedDocument]) -> Result<(), CorpusError> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    for cd in docs {
        let rec = ChunkRecord {
            doc_id: cd.doc_id.clone(),
            chunks: cd.chunks.clone(),
        };
        serde_json::to_writer(&mut f, &rec).map_err(std::io::Error::other)?;
        f.write_all(b"\n")?;
    }
    f.flush()?;
    Ok(())
}

/// Read a chunked corpus back. Truncation state is not part of the wire
/// format; records load with `truncated = false`.
pub fn read_chunked_jsonl(path: &Path) -> Result<Vec<ChunkedDocument>, CorpusError> {
    let reader = BufReader::new(std::fs::File::open(path)?);
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: ChunkRecord = serde_json::from_str(&line)
            .map_err(|source| CorpusError::MalformedRecord { line: i + 1, source })?;
        out.push(ChunkedDocument {
            doc_id: rec.doc_id,
            total_tokens: rec.chunks.iter().map(Vec::len).sum(),
            chunks: rec.chunks,
            truncated: false,
        });
    }
    Ok(out)
}

impl fmt::Display for TokenStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:.2} \u{00b1} {:.2} ({} -- {}, n={})",
            self.mean, self.std, self.min, self.max, self.count
        )
    }
}
