//! Synthetic instance generation and sparse dataset ingestion.
//!
//! Randomness comes from a seeded ChaCha8 stream with Gaussian variates
//! via Box–Muller, so generated instances are bit-reproducible across
//! platforms for a given seed.
//!
//! The sparse text format is one sample per line:
//!
//! ```text
//! <label> <index>:<value> <index>:<value> ...
//! ```
//!
//! with 1-based, strictly increasing feature indices (mapped to 0-based
//! internally) and an optional trailing newline.

use std::io::BufRead;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use thiserror::Error;

use crate::linalg::Mat;
use crate::scalar::Scalar;

// ── randomness ──────────────────────────────────────────────────────

/// Standard Gaussian stream: ChaCha8 keyed by the seed, uniforms from
/// the top 53 bits, Box–Muller pairs with the spare cached.
pub struct GaussianSource {
    rng: ChaCha8Rng,
    spare: Option<f64>,
}

impl GaussianSource {
    pub fn new(seed: u64) -> Self {
        Self { rng: ChaCha8Rng::seed_from_u64(seed), spare: None }
    }

    /// Uniform in (0, 1].
    fn uniform_open(&mut self) -> f64 {
        ((self.rng.next_u64() >> 11) + 1) as f64 / (1u64 << 53) as f64
    }

    pub fn sample(&mut self) -> f64 {
        if let Some(s) = self.spare.take() {
            return s;
        }
        let u1 = self.uniform_open();
        let u2 = self.uniform_open();
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = 2.0 * std::f64::consts::PI * u2;
        self.spare = Some(r * theta.sin());
        r * theta.cos()
    }
}

/// Uniform sample of `s` distinct values from `0..n` (partial
/// Fisher–Yates), returned sorted.
fn sample_without_replacement(n: usize, s: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    debug_assert!(s <= n);
    let mut pool: Vec<usize> = (0..n).collect();
    for i in 0..s {
        // rejection-free modulo bias is negligible for desk-scale n; use
        // 64-bit multiply-shift for an unbiased-enough uniform index
        let r = ((rng.next_u64() as u128 * (n - i) as u128) >> 64) as usize;
        pool.swap(i, i + r);
    }
    let mut out = pool[..s].to_vec();
    out.sort_unstable();
    out
}

// ── synthetic instances ─────────────────────────────────────────────

/// A generated matrix-completion instance: the ground matrix, the
/// observed index pairs, and the seed that produced them.
#[derive(Debug, Clone)]
pub struct CompletionInstance<T> {
    pub matrix: Mat<T>,
    pub omega: Vec<(usize, usize)>,
    pub seed: u64,
}

#[derive(Debug, Error)]
pub enum GenError {
    #[error("rank {r} exceeds min(m, n) = {limit}")]
    RankTooLarge { r: usize, limit: usize },
    #[error("sample count {s} exceeds m*n = {limit}")]
    TooManySamples { s: usize, limit: usize },
}

/// `M = U·V` with `U ∈ ℝ^{m×r}`, `V ∈ ℝ^{r×n}` standard Gaussian, and
/// `Ω` a uniform sample of `s` entries without replacement.
pub fn gen_lowrank_instance<T: Scalar>(
    m: usize,
    n: usize,
    r: usize,
    s: usize,
    seed: u64,
) -> Result<CompletionInstance<T>, GenError> {
    if r > m.min(n) {
        return Err(GenError::RankTooLarge { r, limit: m.min(n) });
    }
    if s > m * n {
        return Err(GenError::TooManySamples { s, limit: m * n });
    }
    let mut gauss = GaussianSource::new(seed);
    let u = Mat::from_fn(m, r, |_, _| T::of(gauss.sample()));
    let v = Mat::from_fn(r, n, |_, _| T::of(gauss.sample()));
    let matrix = u.matmul(&v).expect("factor shapes agree");
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let omega = sample_without_replacement(m * n, s, &mut rng)
        .into_iter()
        .map(|flat| (flat / n, flat % n))
        .collect();
    Ok(CompletionInstance { matrix, omega, seed })
}

/// Standard-Gaussian design matrix and targets.
pub fn gen_gaussian_ls<T: Scalar>(m: usize, n: usize, seed: u64) -> (Mat<T>, Vec<T>) {
    let mut gauss = GaussianSource::new(seed);
    let a = Mat::from_fn(m, n, |_, _| T::of(gauss.sample()));
    let b = (0..m).map(|_| T::of(gauss.sample())).collect();
    (a, b)
}

// ── sparse dataset ingestion ────────────────────────────────────────

/// Parsed sparse dataset: per-row `(feature, value)` pairs with 0-based
/// strictly increasing feature indices, plus the label vector.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseDataset<T> {
    pub rows: usize,
    pub cols: usize,
    pub samples: Vec<Vec<(usize, T)>>,
    pub labels: Vec<T>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("line {line}, token {token}: expected number, got {text:?}")]
    BadNumber { line: usize, token: usize, text: String },
    #[error("line {line}, token {token}: expected index:value, got {text:?}")]
    BadPair { line: usize, token: usize, text: String },
    #[error("line {line}, token {token}: feature index must be >= 1")]
    IndexUnderflow { line: usize, token: usize },
    #[error("line {line}, token {token}: feature indices must be strictly increasing")]
    NonIncreasing { line: usize, token: usize },
    #[error("read failure: {0}")]
    Io(String),
}

/// Parses the whitespace-delimited `label index:value ...` format.
/// Blank lines are skipped; malformed tokens are reported with their
/// 1-based line and token positions.
pub fn parse_sparse_dataset<T: Scalar>(reader: impl BufRead) -> Result<SparseDataset<T>, ParseError> {
    let mut samples: Vec<Vec<(usize, T)>> = Vec::new();
    let mut labels: Vec<T> = Vec::new();
    let mut cols = 0usize;
    for (line_no, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| ParseError::Io(e.to_string()))?;
        let line_no = line_no + 1;
        let mut tokens = line.split_whitespace().enumerate();
        let Some((_, label_text)) = tokens.next() else {
            continue; // blank line
        };
        let label: f64 = label_text.parse().map_err(|_| ParseError::BadNumber {
            line: line_no,
            token: 1,
            text: label_text.to_string(),
        })?;
        let mut row: Vec<(usize, T)> = Vec::new();
        let mut last_index = 0usize; // 1-based floor
        for (tok_no, tok) in tokens {
            let tok_no = tok_no + 1;
            let (idx_text, val_text) = tok.split_once(':').ok_or_else(|| ParseError::BadPair {
                line: line_no,
                token: tok_no,
                text: tok.to_string(),
            })?;
            let idx: usize = idx_text.parse().map_err(|_| ParseError::BadNumber {
                line: line_no,
                token: tok_no,
                text: idx_text.to_string(),
            })?;
            if idx < 1 {
                return Err(ParseError::IndexUnderflow { line: line_no, token: tok_no });
            }
            if idx <= last_index {
                return Err(ParseError::NonIncreasing { line: line_no, token: tok_no });
            }
            let val: f64 = val_text.parse().map_err(|_| ParseError::BadNumber {
                line: line_no,
                token: tok_no,
                text: val_text.to_string(),
            })?;
            last_index = idx;
            cols = cols.max(idx);
            row.push((idx - 1, T::of(val)));
        }
        labels.push(T::of(label));
        samples.push(row);
    }
    Ok(SparseDataset { rows: samples.len(), cols, samples, labels })
}

impl<T: Scalar> SparseDataset<T> {
    /// Serializes back to the text format (1-based indices).
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (row, label) in self.samples.iter().zip(&self.labels) {
            out.push_str(&format!("{label}"));
            for (idx, val) in row {
                out.push_str(&format!(" {}:{}", idx + 1, val));
            }
            out.push('\n');
        }
        out
    }

    /// Dense design matrix and label vector.
    pub fn to_dense(&self) -> (Mat<T>, Vec<T>) {
        let mut a = Mat::zeros(self.rows, self.cols);
        for (i, row) in self.samples.iter().enumerate() {
            for &(j, v) in row {
                a[(i, j)] = v;
            }
        }
        (a, self.labels.clone())
    }

    /// Scales each column to unit maximum absolute value (optional
    /// preprocessing; the default pipeline uses data as parsed).
    pub fn scale_columns(&mut self) {
        let mut maxabs = vec![T::zero(); self.cols];
        for row in &self.samples {
            for &(j, v) in row {
                maxabs[j] = maxabs[j].max(v.abs());
            }
        }
        for row in &mut self.samples {
            for (j, v) in row.iter_mut() {
                if maxabs[*j] > T::zero() {
                    *v = *v / maxabs[*j];
                }
            }
        }
    }
}
