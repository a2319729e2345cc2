//! Embedding plug-point and the deterministic hashed TF-IDF default.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::text::tokenize;

pub const DEFAULT_DIMENSION: usize = 256;
pub const DEFAULT_SEED: u64 = 0x5eed_1e9a_2024_0001;

/// Maps text to a fixed-dimension vector. Implementations must be pure:
/// identical text yields an identical vector.
pub trait Embedder: Send + Sync {
    fn dimension(&self) -> usize;
    fn embed(&self, text: &str) -> Vec<f32>;
}

/// Corpus statistics frozen at commit time and persisted with the snapshot.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub unit_count: u64,
    pub total_tokens: u64,
    pub doc_freq: BTreeMap<String, u32>,
}

impl CorpusStats {
    pub fn from_texts<'a>(texts: impl IntoIterator<Item = &'a str>) -> Self {
        let mut stats = CorpusStats::default();
        for text in texts {
            let tokens = tokenize(text);
            stats.unit_count += 1;
            stats.total_tokens += tokens.len() as u64;
            let mut seen: Vec<&String> = tokens.iter().collect();
            seen.sort();
            seen.dedup();
            for t in seen {
                *stats.doc_freq.entry(t.clone()).or_default() += 1;
            }
        }
        stats
    }

    /// Smoothed inverse document frequency, `ln((1 + N) / (1 + df)) + 1`.
    pub fn idf(&self, token: &str) -> f64 {
        let n = self.unit_count as f64;
        let df = self.doc_freq.get(token).copied().unwrap_or(0) as f64;
        ((1.0 + n) / (1.0 + df)).ln() + 1.0
    }

    pub fn average_length(&self) -> f64 {
        if self.unit_count == 0 {
            0.0
        } else {
            self.total_tokens as f64 / self.unit_count as f64
        }
    }
}

/// Feature hashing of TF-IDF weights into `dimension` buckets, L2-normalized.
#[derive(Debug, Clone, Copy)]
pub struct HashedTfIdfEmbedder<'a> {
    stats: &'a CorpusStats,
    dimension: usize,
    seed: u64,
}

impl<'a> HashedTfIdfEmbedder<'a> {
    pub fn new(stats: &'a CorpusStats) -> Self {
        Self::with_params(stats, DEFAULT_DIMENSION, DEFAULT_SEED)
    }

    pub fn with_params(stats: &'a CorpusStats, dimension: usize, seed: u64) -> Self {
        assert!(dimension > 0, "embedding dimension must be positive");
        Self { stats, dimension, seed }
    }

    fn bucket(&self, token: &str) -> usize {
        (fnv1a(self.seed, token.as_bytes()) % self.dimension as u64) as usize
    }
}

impl Embedder for HashedTfIdfEmbedder<'_> {
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn embed(&self, text: &str) -> Vec<f32> {
        let mut acc = vec![0.0f64; self.dimension];
        for token in tokenize(text) {
            acc[self.bucket(&token)] += self.stats.idf(&token);
        }
        let norm = acc.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return vec![0.0; self.dimension];
        }
        acc.into_iter().map(|x| (x / norm) as f32).collect()
    }
}

fn fnv1a(seed: u64, bytes: &[u8]) -> u64 {
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    let mut hash = 0xcbf2_9ce4_8422_2325u64 ^ seed;
    for b in bytes {
        hash ^= u64::from(*b);
        hash = hash.wrapping_mul(PRIME);
    }
    hash
}

pub fn cosine(a: &[f32], b: &[f32]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| f64::from(*x) * f64::from(*y)).sum();
    let na: f64 = a.iter().map(|x| f64::from(*x).powi(2)).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| f64::from(*x).powi(2)).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        (dot / (na * nb)).clamp(-1.0, 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stats() -> CorpusStats {
        CorpusStats::from_texts([
            "social rights include education and health",
            "housing was added",
            "education housing",
        ])
    }

    #[test]
    fn deterministic_unit_vectors() {
        let stats = stats();
        let e = HashedTfIdfEmbedder::new(&stats);
        let a = e.embed("social rights housing");
        assert_eq!(a, e.embed("social rights housing"));
        assert_eq!(a.len(), DEFAULT_DIMENSION);
        let norm: f64 = a.iter().map(|x| f64::from(*x).powi(2)).sum::<f64>().sqrt();
        assert!((norm - 1.0).abs() < 1e-6);
        assert!((cosine(&a, &a) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn bag_of_words_order_invariance() {
        let stats = stats();
        let e = HashedTfIdfEmbedder::new(&stats);
        let a = e.embed("housing education");
        let b = e.embed("education housing");
        assert_eq!(a, b);
        assert!((cosine(&a, &b) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn empty_text_is_zero_vector() {
        let stats = stats();
        let e = HashedTfIdfEmbedder::new(&stats);
        let z = e.embed(" ... ");
        assert!(z.iter().all(|x| *x == 0.0));
        assert_eq!(cosine(&z, &e.embed("housing")), 0.0);
    }

    #[test]
    fn idf_is_smoothed() {
        let stats = stats();
        // 3 units, "housing" in 2: ln(4/3) + 1
        assert!((stats.idf("housing") - ((4.0f64 / 3.0).ln() + 1.0)).abs() < 1e-12);
        // unseen: ln(4/1) + 1
        assert!((stats.idf("zebra") - (4.0f64.ln() + 1.0)).abs() < 1e-12);
        assert_eq!(stats.total_tokens, 6 + 3 + 2);
    }
}
