use std::cmp::Ordering;

use super::{cosine, EmbeddingProvider, EmbeddingVector, PromptError, PromptExample};

/// Pool indices ordered by descending similarity to `query`, ties by lower index.
pub fn rank_by_similarity(query: &EmbeddingVector, pool: &[EmbeddingVector]) -> Result<Vec<usize>, PromptError> {
    let sims = pool.iter().map(|p| cosine(query, p)).collect::<Result<Vec<f64>, _>>()?;
    let mut idx: Vec<usize> = (0..pool.len()).collect();
    idx.sort_by(|&a, &b| sims[b].partial_cmp(&sims[a]).unwrap_or(Ordering::Equal).then(a.cmp(&b)));
    Ok(idx)
}

/// The `k` most similar pool entries, returned in ascending similarity so
/// the closest example ends up rendered right before the target.
pub fn top_k_by_similarity(
    query: &EmbeddingVector,
    pool: &[EmbeddingVector],
    k: usize,
) -> Result<Vec<usize>, PromptError> {
    if k > pool.len() {
        return Err(PromptError::KTooLarge { k, pool: pool.len() });
    }
    let mut top = rank_by_similarity(query, pool)?;
    top.truncate(k);
    top.reverse();
    Ok(top)
}

/// Demonstration pool with embeddings computed once up front.
pub struct ExamplePool {
    pub examples: Vec<PromptExample>,
    pub embeddings: Vec<EmbeddingVector>,
}

impl ExamplePool {
    pub fn new(examples: Vec<PromptExample>, provider: &dyn EmbeddingProvider) -> Result<Self, PromptError> {
        let embeddings = examples
            .iter()
            .map(|e| provider.embed(&e.text))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self { examples, embeddings })
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    /// Indices of the `k` nearest examples to `target`, least similar first.
    pub fn retrieve(&self, target: &str, k: usize, provider: &dyn EmbeddingProvider) -> Result<Vec<usize>, PromptError> {
        if k > self.len() {
            return Err(PromptError::KTooLarge { k, pool: self.len() });
        }
        if k == 0 {
            return Ok(Vec::new());
        }
        let q = provider.embed(target)?;
        top_k_by_similarity(&q, &self.embeddings, k)
    }
}
