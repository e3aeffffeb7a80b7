//! Pluggable backends for the neural quantities the pipeline consumes:
//! sentence embeddings, LM perplexity, readability, token-level similarity,
//! and simplification generation. Every slot has a deterministic built-in
//! fallback so the whole pipeline runs without pretrained models, and all
//! slots share a content-addressed response cache.

mod cache;
mod fallback;
mod remote;
mod simplifier;
mod wordlists;

pub use cache::{cache_key, ResponseCache};
pub use fallback::{
    cosine, CharTrigramPerplexity, FkglReadability, TokenAlignmentSimilarity,
    TrigramHashEmbedder, FALLBACK_EMBED_DIM,
};
pub use remote::{RemoteProvider, RemoteRequest, RemoteResponse, RemoteTransport};
pub use simplifier::RuleSimplifier;

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Similarity {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

pub trait EmbeddingProvider: Send + Sync {
    fn id(&self) -> &str;
    fn version(&self) -> &str;
    fn dim(&self) -> usize;
    fn embed(&self, text: &str) -> Result<Vec<f64>>;
}

pub trait PerplexityProvider: Send + Sync {
    fn id(&self) -> &str;
    fn version(&self) -> &str;
    fn perplexity(&self, text: &str) -> Result<f64>;
}

pub trait ReadabilityProvider: Send + Sync {
    fn id(&self) -> &str;
    fn version(&self) -> &str;
    fn readability(&self, text: &str) -> Result<f64>;
}

pub trait SimilarityProvider: Send + Sync {
    fn id(&self) -> &str;
    fn version(&self) -> &str;
    fn similarity(&self, candidate: &str, reference: &str) -> Result<Similarity>;
}

pub trait SimplifierProvider: Send + Sync {
    fn id(&self) -> &str;
    fn version(&self) -> &str;
    fn simplify(&self, source: &str, seed: u64) -> Result<String>;
}

/// Number of actual provider computations per slot (cache hits excluded).
#[derive(Debug, Default)]
pub struct ProviderCounters {
    pub embedding: AtomicU64,
    pub perplexity: AtomicU64,
    pub readability: AtomicU64,
    pub similarity: AtomicU64,
    pub simplifier: AtomicU64,
}

impl ProviderCounters {
    pub fn snapshot(&self) -> BTreeMap<&'static str, u64> {
        BTreeMap::from([
            ("embedding", self.embedding.load(Ordering::Relaxed)),
            ("perplexity", self.perplexity.load(Ordering::Relaxed)),
            ("readability", self.readability.load(Ordering::Relaxed)),
            ("similarity", self.similarity.load(Ordering::Relaxed)),
            ("simplifier", self.simplifier.load(Ordering::Relaxed)),
        ])
    }
}

/// All five provider slots plus the optional cache. Slots default to the
/// built-in fallbacks; any slot can be swapped for a remote provider.
pub struct ProviderRegistry {
    embedding: Box<dyn EmbeddingProvider>,
    perplexity: Box<dyn PerplexityProvider>,
    readability: Box<dyn ReadabilityProvider>,
    similarity: Box<dyn SimilarityProvider>,
    simplifier: Box<dyn SimplifierProvider>,
    cache: Option<ResponseCache>,
    counters: ProviderCounters,
}

impl ProviderRegistry {
    /// Registry with every slot on its fallback. The perplexity model is
    /// fit on `perplexity_corpus` (the pipeline's source sentences).
    pub fn fallback<S: AsRef<str>>(perplexity_corpus: &[S]) -> Self {
        ProviderRegistry {
            embedding: Box::new(TrigramHashEmbedder),
            perplexity: Box::new(CharTrigramPerplexity::fit(perplexity_corpus)),
            readability: Box::new(FkglReadability),
            similarity: Box::new(TokenAlignmentSimilarity),
            simplifier: Box::new(RuleSimplifier::new()),
            cache: None,
            counters: ProviderCounters::default(),
        }
    }

    pub fn with_cache_file(mut self, path: &Path) -> Result<Self> {
        self.cache = Some(ResponseCache::open(path)?);
        Ok(self)
    }

    pub fn set_embedding(&mut self, provider: Box<dyn EmbeddingProvider>) {
        self.embedding = provider;
    }
    pub fn set_perplexity(&mut self, provider: Box<dyn PerplexityProvider>) {
        self.perplexity = provider;
    }
    pub fn set_readability(&mut self, provider: Box<dyn ReadabilityProvider>) {
        self.readability = provider;
    }
    pub fn set_similarity(&mut self, provider: Box<dyn SimilarityProvider>) {
        self.similarity = provider;
    }
    pub fn set_simplifier(&mut self, provider: Box<dyn SimplifierProvider>) {
        self.simplifier = provider;
    }

    pub fn counters(&self) -> &ProviderCounters {
        &self.counters
    }

    fn cached<T, F>(&self, key: &str, compute: F) -> Result<T>
    where
        T: serde::Serialize + serde::de::DeserializeOwned,
        F: FnOnce() -> Result<T>,
    {
        if let Some(cache) = &self.cache {
            if let Some(hit) = cache.get(key) {
                return serde_json::from_str(&hit)
                    .map_err(|e| Error::ProviderFault(format!("cache entry decode: {e}")));
            }
        }
        let value = compute()?;
        if let Some(cache) = &self.cache {
            let encoded = serde_json::to_string(&value)
                .map_err(|e| Error::ProviderFault(format!("cache entry encode: {e}")))?;
            cache.put(key, &encoded)?;
        }
        Ok(value)
    }

    pub fn embed(&self, text: &str) -> Result<Vec<f64>> {
        let key = cache_key("embed", self.embedding.id(), self.embedding.version(), &[text]);
        self.cached(&key, || {
            self.counters.embedding.fetch_add(1, Ordering::Relaxed);
            self.embedding.embed(text)
        })
    }

    /// 1 − cosine(embed(a), embed(b)); in [0, 2].
    pub fn embedding_distance(&self, a: &str, b: &str) -> Result<f64> {
        let va = self.embed(a)?;
        let vb = self.embed(b)?;
        Ok(1.0 - cosine(&va, &vb))
    }

    pub fn perplexity(&self, text: &str) -> Result<f64> {
        let key = cache_key(
            "perplexity",
            self.perplexity.id(),
            self.perplexity.version(),
            &[text],
        );
        self.cached(&key, || {
            self.counters.perplexity.fetch_add(1, Ordering::Relaxed);
            self.perplexity.perplexity(text)
        })
    }

    pub fn readability(&self, text: &str) -> Result<f64> {
        let key = cache_key(
            "readability",
            self.readability.id(),
            self.readability.version(),
            &[text],
        );
        self.cached(&key, || {
            self.counters.readability.fetch_add(1, Ordering::Relaxed);
            self.readability.readability(text)
        })
    }

    pub fn similarity(&self, candidate: &str, reference: &str) -> Result<Similarity> {
        let key = cache_key(
            "similarity",
            self.similarity.id(),
            self.similarity.version(),
            &[candidate, reference],
        );
        let (precision, recall, f1) = self.cached(&key, || {
            self.counters.similarity.fetch_add(1, Ordering::Relaxed);
            self.similarity
                .similarity(candidate, reference)
                .map(|s| (s.precision, s.recall, s.f1))
        })?;
        Ok(Similarity {
            precision,
            recall,
            f1,
        })
    }

    pub fn simplify(&self, source: &str, seed: u64) -> Result<String> {
        let seed_repr = seed.to_string();
        let key = cache_key(
            "simplify",
            self.simplifier.id(),
            self.simplifier.version(),
            &[source, &seed_repr],
        );
        self.cached(&key, || {
            self.counters.simplifier.fetch_add(1, Ordering::Relaxed);
            self.simplifier.simplify(source, seed)
        })
    }
}
