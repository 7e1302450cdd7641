//! Embedding acquisition: remote batch endpoint or the local fallback,
//! always through the cache.

use serde::Deserialize;

use super::{
    content_key, local_fallback_embedding, EmbeddingCache, FusionError, FusionResult,
    ProviderTag, TextEmbedding, TEXT_DIM,
};

/// Maximum texts per remote request.
const BATCH_LIMIT: usize = 256;

#[derive(Clone, Debug)]
pub enum EmbeddingProvider {
    /// Deterministic hashing embedder; no network.
    LocalFallback,
    /// OpenAI-compatible embeddings endpoint; the bearer token is read from
    /// `token_env` at call time.
    Remote {
        url: String,
        model: String,
        token_env: String,
    },
}

impl EmbeddingProvider {
    pub fn tag(&self) -> ProviderTag {
        match self {
            EmbeddingProvider::LocalFallback => ProviderTag::LocalFallback,
            EmbeddingProvider::Remote { .. } => ProviderTag::Remote,
        }
    }
}

#[derive(Deserialize)]
struct RemoteResponse {
    data: Vec<RemoteItem>,
}

#[derive(Deserialize)]
struct RemoteItem {
    embedding: Vec<f64>,
}

/// Provider plus cache, with a fetch counter for cache-coherence checks.
#[derive(Debug)]
pub struct EmbeddingService {
    provider: EmbeddingProvider,
    pub cache: EmbeddingCache,
    provider_calls: usize,
}

impl EmbeddingService {
    pub fn new(provider: EmbeddingProvider, cache: EmbeddingCache) -> Self {
        EmbeddingService {
            provider,
            cache,
            provider_calls: 0,
        }
    }

    pub fn local(cache: EmbeddingCache) -> Self {
        EmbeddingService::new(EmbeddingProvider::LocalFallback, cache)
    }

    /// Number of provider fetches since construction; cache hits don't count.
    pub fn provider_calls(&self) -> usize {
        self.provider_calls
    }

    pub fn embed(&mut self, text: &str) -> FusionResult<TextEmbedding> {
        Ok(self.embed_batch(&[text.to_string()])?.pop().unwrap())
    }

    /// Embeds a batch, serving cache hits and fetching only the misses (in
    /// chunks of at most 256 texts for the remote provider).
    pub fn embed_batch(&mut self, texts: &[String]) -> FusionResult<Vec<TextEmbedding>> {
        let keys: Vec<String> = texts.iter().map(|t| content_key(t)).collect();
        let mut misses: Vec<usize> = Vec::new();
        for (i, key) in keys.iter().enumerate() {
            if self.cache.get(key).is_none() && !misses.iter().any(|&j| keys[j] == *key) {
                misses.push(i);
            }
        }
        for chunk in misses.chunks(BATCH_LIMIT) {
            let batch: Vec<&str> = chunk.iter().map(|&i| texts[i].as_str()).collect();
            let vectors = self.fetch(&batch)?;
            for (&i, vector) in chunk.iter().zip(vectors) {
                if vector.len() != TEXT_DIM {
                    return Err(FusionError::WrongDimension {
                        expected: TEXT_DIM,
                        got: vector.len(),
                    });
                }
                self.cache.put(keys[i].clone(), vector)?;
            }
        }
        Ok(keys
            .into_iter()
            .map(|key| {
                let vector = self.cache.get(&key).expect("just inserted").clone();
                TextEmbedding {
                    key,
                    vector,
                    provider: self.provider.tag(),
                }
            })
            .collect())
    }

    fn fetch(&mut self, texts: &[&str]) -> FusionResult<Vec<Vec<f64>>> {
        self.provider_calls += 1;
        match &self.provider {
            EmbeddingProvider::LocalFallback => {
                texts.iter().map(|t| local_fallback_embedding(t)).collect()
            }
            EmbeddingProvider::Remote {
                url,
                model,
                token_env,
            } => {
                for t in texts {
                    if t.trim().is_empty() {
                        return Err(FusionError::EmptyText((*t).to_string()));
                    }
                }
                let token = std::env::var(token_env)
                    .map_err(|_| FusionError::MissingToken(token_env.clone()))?;
                let body = serde_json::json!({ "input": texts, "model": model });
                let mut last_err = String::new();
                for attempt in 0..3 {
                    if attempt > 0 {
                        std::thread::sleep(std::time::Duration::from_secs(2 << attempt));
                    }
                    match ureq::post(url)
                        .header("Authorization", &format!("Bearer {token}"))
                        .send_json(&body)
                    {
                        Ok(mut resp) => {
                            let parsed: RemoteResponse =
                                resp.body_mut().read_json().map_err(|e| {
                                    FusionError::Endpoint(format!("bad response: {e}"))
                                })?;
                            if parsed.data.len() != texts.len() {
                                return Err(FusionError::Endpoint(format!(
                                    "expected {} embeddings, got {}",
                                    texts.len(),
                                    parsed.data.len()
                                )));
                            }
                            return Ok(parsed.data.into_iter().map(|d| d.embedding).collect());
                        }
                        Err(e) => last_err = e.to_string(),
                    }
                }
                Err(FusionError::Endpoint(last_err))
            }
        }
    }
}
