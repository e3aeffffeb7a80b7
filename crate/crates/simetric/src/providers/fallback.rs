//! Deterministic built-in providers. No pretrained weights: hashed
//! character-trigram embeddings, a smoothed character-trigram language
//! model, an FKGL-derived readability score, and greedy token-alignment
//! similarity over the trigram embeddings.

use std::collections::HashMap;

use sha2::{Digest, Sha256};

use super::{EmbeddingProvider, PerplexityProvider, ReadabilityProvider, Similarity, SimilarityProvider};
use crate::error::{Error, Result};
use crate::textstats;

pub(crate) fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}

pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut dot = 0.0;
    let mut na = 0.0;
    let mut nb = 0.0;
    for (x, y) in a.iter().zip(b) {
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    dot / (na.sqrt() * nb.sqrt())
}

/// L2-normalized hashed character-trigram counts, d = 256. The text is
/// lowercased and padded with `^`/`$` markers before windowing.
pub struct TrigramHashEmbedder;

pub const FALLBACK_EMBED_DIM: usize = 256;

impl TrigramHashEmbedder {
    fn embed_raw(text: &str) -> Vec<f64> {
        let mut v = vec![0.0f64; FALLBACK_EMBED_DIM];
        let padded: Vec<char> = std::iter::once('^')
            .chain(text.to_lowercase().chars())
            .chain(std::iter::once('$'))
            .collect();
        if padded.len() < 3 {
            return v;
        }
        let mut buf = String::new();
        for window in padded.windows(3) {
            buf.clear();
            buf.extend(window.iter());
            let slot = (fnv1a(buf.as_bytes()) % FALLBACK_EMBED_DIM as u64) as usize;
            v[slot] += 1.0;
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            for x in &mut v {
                *x /= norm;
            }
        }
        v
    }
}

impl EmbeddingProvider for TrigramHashEmbedder {
    fn id(&self) -> &str {
        "fallback-trigram-embed"
    }
    fn version(&self) -> &str {
        "1"
    }
    fn dim(&self) -> usize {
        FALLBACK_EMBED_DIM
    }
    fn embed(&self, text: &str) -> Result<Vec<f64>> {
        Ok(Self::embed_raw(text))
    }
}

/// Character-trigram language model with add-0.1 smoothing, fit once on the
/// pipeline's source corpus. Perplexity = exp(mean NLL per character).
pub struct CharTrigramPerplexity {
    trigram: HashMap<(u32, u32, u32), u64>,
    context: HashMap<(u32, u32), u64>,
    alphabet: HashMap<char, u32>,
    vocab_size: f64,
    /// Digest of the fit corpus, so cache entries from models fit on
    /// different corpora never collide.
    version: String,
}

const SYM_UNK: u32 = 0;
const SYM_BOS: u32 = 1;
const SMOOTH: f64 = 0.1;

impl CharTrigramPerplexity {
    pub fn fit<S: AsRef<str>>(corpus: &[S]) -> Self {
        let mut alphabet: HashMap<char, u32> = HashMap::new();
        for text in corpus {
            for c in text.as_ref().chars() {
                let next = alphabet.len() as u32 + 2;
                alphabet.entry(c).or_insert(next);
            }
        }
        let mut trigram = HashMap::new();
        let mut context = HashMap::new();
        for text in corpus {
            let symbols: Vec<u32> = [SYM_BOS, SYM_BOS]
                .into_iter()
                .chain(text.as_ref().chars().map(|c| alphabet[&c]))
                .collect();
            for w in symbols.windows(3) {
                *trigram.entry((w[0], w[1], w[2])).or_insert(0) += 1;
                *context.entry((w[0], w[1])).or_insert(0) += 1;
            }
        }
        // targets are corpus characters plus one unknown symbol
        let vocab_size = alphabet.len() as f64 + 1.0;
        let mut digest = Sha256::new();
        for text in corpus {
            digest.update(text.as_ref().as_bytes());
            digest.update([0u8]);
        }
        CharTrigramPerplexity {
            trigram,
            context,
            alphabet,
            vocab_size,
            version: hex::encode(&digest.finalize()[..8]),
        }
    }

    fn symbol(&self, c: char) -> u32 {
        self.alphabet.get(&c).copied().unwrap_or(SYM_UNK)
    }
}

impl PerplexityProvider for CharTrigramPerplexity {
    fn id(&self) -> &str {
        "fallback-chartrigram-lm"
    }
    fn version(&self) -> &str {
        &self.version
    }
    fn perplexity(&self, text: &str) -> Result<f64> {
        if text.is_empty() {
            return Err(Error::EmptyText);
        }
        let symbols: Vec<u32> = [SYM_BOS, SYM_BOS]
            .into_iter()
            .chain(text.chars().map(|c| self.symbol(c)))
            .collect();
        let mut nll = 0.0;
        let count = (symbols.len() - 2) as f64;
        for w in symbols.windows(3) {
            let tri = self.trigram.get(&(w[0], w[1], w[2])).copied().unwrap_or(0) as f64;
            let ctx = self.context.get(&(w[0], w[1])).copied().unwrap_or(0) as f64;
            let p = (tri + SMOOTH) / (ctx + SMOOTH * self.vocab_size);
            nll -= p.ln();
        }
        Ok((nll / count).exp())
    }
}

/// Readability as an affine rescale of negated FKGL to roughly [-2, 2]:
/// (9 - fkgl) / 4.5. Higher = easier to read.
pub struct FkglReadability;

impl ReadabilityProvider for FkglReadability {
    fn id(&self) -> &str {
        "fallback-fkgl-readability"
    }
    fn version(&self) -> &str {
        "1"
    }
    fn readability(&self, text: &str) -> Result<f64> {
        Ok((9.0 - textstats::fkgl(text)?) / 4.5)
    }
}

/// Greedy token alignment: each candidate token is matched to its
/// max-cosine reference token (precision side) and symmetrically for
/// recall; F1 is the harmonic mean. Token vectors come from the trigram
/// embedder, making this a soft lexical overlap.
pub struct TokenAlignmentSimilarity;

impl TokenAlignmentSimilarity {
    fn side(cands: &[Vec<f64>], refs: &[Vec<f64>]) -> f64 {
        let mut total = 0.0;
        for c in cands {
            let best = refs
                .iter()
                .map(|r| cosine(c, r))
                .fold(f64::NEG_INFINITY, f64::max);
            total += best;
        }
        total / cands.len() as f64
    }
}

impl SimilarityProvider for TokenAlignmentSimilarity {
    fn id(&self) -> &str {
        "fallback-token-alignment"
    }
    fn version(&self) -> &str {
        "1"
    }
    fn similarity(&self, candidate: &str, reference: &str) -> Result<Similarity> {
        let cand_tokens = textstats::word_tokens(candidate);
        let ref_tokens = textstats::word_tokens(reference);
        if cand_tokens.is_empty() || ref_tokens.is_empty() {
            return Ok(Similarity {
                precision: 0.0,
                recall: 0.0,
                f1: 0.0,
            });
        }
        let mut memo: HashMap<String, Vec<f64>> = HashMap::new();
        let mut vectors = |tokens: &[String]| -> Vec<Vec<f64>> {
            tokens
                .iter()
                .map(|t| {
                    let key = t.to_lowercase();
                    memo.entry(key.clone())
                        .or_insert_with(|| TrigramHashEmbedder::embed_raw(&key))
                        .clone()
                })
                .collect()
        };
        let cand_vecs = vectors(&cand_tokens);
        let ref_vecs = vectors(&ref_tokens);
        let precision = Self::side(&cand_vecs, &ref_vecs);
        let recall = Self::side(&ref_vecs, &cand_vecs);
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        Ok(Similarity {
            precision,
            recall,
            f1,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn embedding_is_deterministic_and_unit_norm() {
        let a = TrigramHashEmbedder::embed_raw("The cat sat on the mat.");
        let b = TrigramHashEmbedder::embed_raw("The cat sat on the mat.");
        assert_eq!(a, b);
        let norm: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!((norm - 1.0).abs() < 1e-9);
        assert!((cosine(&a, &b) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn disjoint_trigram_strings_are_orthogonal() {
        let a = TrigramHashEmbedder::embed_raw("aaaa");
        let b = TrigramHashEmbedder::embed_raw("zzzz");
        assert_eq!(cosine(&a, &b), 0.0);
    }

    #[test]
    fn empty_text_embeds_to_zero_vector() {
        let v = TrigramHashEmbedder::embed_raw("");
        assert!(v.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn perplexity_at_least_one() {
        let model = CharTrigramPerplexity::fit(&["the cat sat on the mat"]);
        for text in ["the cat", "zebras yodel", "a", "the the the"] {
            let p = model.perplexity(text).unwrap();
            assert!(p >= 1.0, "{text:?} gave {p}");
        }
    }

    #[test]
    fn perplexity_repeated_character_near_one() {
        let model = CharTrigramPerplexity::fit(&["aaaa"]);
        let p = model.perplexity("aaaa").unwrap();
        assert!(p < 1.5, "got {p}");
    }

    #[test]
    fn perplexity_empty_text_errors() {
        let model = CharTrigramPerplexity::fit(&["abc"]);
        assert!(matches!(model.perplexity(""), Err(Error::EmptyText)));
    }

    #[test]
    fn corpus_text_beats_shuffled_text() {
        use rand::seq::SliceRandom;
        let corpus: Vec<String> = (0..40)
            .map(|i| {
                format!(
                    "the {} {} sat on the {} and watched the {}.",
                    ["small", "old", "young", "tired"][i % 4],
                    ["cat", "dog", "bird", "horse"][(i / 4) % 4],
                    ["mat", "wall", "roof", "fence"][(i / 2) % 4],
                    ["river", "garden", "street", "field"][i % 4],
                )
            })
            .collect();
        let model = CharTrigramPerplexity::fit(&corpus);
        let mut rng = crate::corpus::rng_from_seed(99);
        let mut wins = 0;
        for trial in 0..100 {
            let text = &corpus[trial % corpus.len()];
            let mut chars: Vec<char> = text.chars().collect();
            chars.shuffle(&mut rng);
            let shuffled: String = chars.into_iter().collect();
            let p_text = model.perplexity(text).unwrap();
            let p_shuffled = model.perplexity(&shuffled).unwrap();
            if p_text < p_shuffled {
                wins += 1;
            }
        }
        assert!(wins >= 95, "corpus text won only {wins}/100 trials");
    }

    #[test]
    fn readability_prefers_simpler_text() {
        let r = FkglReadability;
        let simple = r.readability("The cat sat on the mat.").unwrap();
        let complex = r
            .readability(
                "The municipality's extraordinarily convoluted administrative procedures \
                 necessitate comprehensive documentation.",
            )
            .unwrap();
        assert!(simple > complex, "{simple} vs {complex}");
    }

    #[test]
    fn readability_pinned_value() {
        // (9 - fkgl)/4.5 with fkgl = -1.45 exactly
        let r = FkglReadability.readability("The cat sat on the mat.").unwrap();
        assert!((r - 2.3222222222222224).abs() < 1e-9, "got {r}");
    }

    #[test]
    fn similarity_identity_is_one() {
        let s = TokenAlignmentSimilarity
            .similarity("The cat sat on the mat.", "The cat sat on the mat.")
            .unwrap();
        assert!((s.precision - 1.0).abs() < 1e-6);
        assert!((s.recall - 1.0).abs() < 1e-6);
        assert!((s.f1 - 1.0).abs() < 1e-6);
    }

    #[test]
    fn similarity_disjoint_near_zero() {
        let s = TokenAlignmentSimilarity
            .similarity("aaaa bbbb", "zzzz yyyy")
            .unwrap();
        assert!(s.f1 < 0.05, "got {}", s.f1);
    }

    #[test]
    fn similarity_precision_recall_mirror() {
        let sim = TokenAlignmentSimilarity;
        let pairs = [
            ("the cat sat", "the cat sat on the mat"),
            ("a small dog", "one large dog"),
        ];
        for (a, b) in pairs {
            let ab = sim.similarity(a, b).unwrap();
            let ba = sim.similarity(b, a).unwrap();
            assert!((ab.precision - ba.recall).abs() < 1e-9);
            assert!((ab.recall - ba.precision).abs() < 1e-9);
        }
    }

    #[test]
    fn similarity_empty_sides_are_zero() {
        let s = TokenAlignmentSimilarity.similarity("", "the cat").unwrap();
        assert_eq!((s.precision, s.recall, s.f1), (0.0, 0.0, 0.0));
    }
}
