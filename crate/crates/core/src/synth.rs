//! Planted-topic corpora drawn from the LDA generative process.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rand_distr::Gamma;
use thiserror::Error;

use crate::corpus::{Corpus, Vocabulary};
use crate::model::PhiMatrix;
use crate::rng::seeded_rng;

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid synthetic corpus parameters: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthParams {
    pub topics: usize,
    pub words: usize,
    pub docs: usize,
    pub doc_len: usize,
    /// Concentration of the per-document topic mixtures.
    pub alpha: f64,
    /// Concentration of the topic–word distributions.
    pub beta: f64,
    pub seed: u64,
}

impl SynthParams {
    /// The planted corpus used by the acceptance suite.
    pub fn planted_acceptance(seed: u64) -> Self {
        Self {
            topics: 10,
            words: 1000,
            docs: 2000,
            doc_len: 100,
            alpha: 0.1,
            beta: 0.05,
            seed,
        }
    }
}

fn dirichlet(rng: &mut impl Rng, gamma: &Gamma<f64>, len: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (0..len).map(|_| gamma.sample(rng)).collect();
    let s: f64 = v.iter().sum();
    if s > 0.0 {
        v.iter_mut().for_each(|x| *x /= s);
    } else {
        // every gamma draw underflowed; fall back to a random vertex
        let k = rng.random_range(0..len);
        v.iter_mut()
            .enumerate()
            .for_each(|(i, x)| *x = (i == k) as u8 as f64);
    }
    v
}

/// Draws K topics from Dirichlet(β), a Dirichlet(α) mixture per document,
/// then `doc_len` tokens per document (topic, then word). Words are named
/// `w0000`, `w0001`, ...; the vocabulary holds all N words even if some are
/// never drawn. Returns the corpus and the generating Φ.
pub fn generate_synthetic(params: &SynthParams) -> Result<(Corpus, PhiMatrix), SynthError> {
    let SynthParams {
        topics,
        words,
        docs,
        doc_len,
        alpha,
        beta,
        seed,
    } = *params;
    if topics == 0 || words == 0 || docs == 0 || doc_len == 0 {
        return Err(SynthError::Invalid("all counts must be at least 1".into()));
    }
    if topics > words {
        return Err(SynthError::Invalid(format!(
            "{topics} topics exceed {words} words"
        )));
    }
    let gamma = |shape: f64, name: &str| {
        Gamma::new(shape, 1.0)
            .map_err(|_| SynthError::Invalid(format!("{name} must be positive, got {shape}")))
    };
    let word_gamma = gamma(beta, "beta")?;
    let doc_gamma = gamma(alpha, "alpha")?;

    let mut rng = seeded_rng(seed, 0);
    let topic_words: Vec<Vec<f64>> = (0..topics)
        .map(|_| dirichlet(&mut rng, &word_gamma, words))
        .collect();
    let word_samplers: Vec<WeightedIndex<f64>> = topic_words
        .iter()
        .map(|p| WeightedIndex::new(p).expect("topic distribution has positive mass"))
        .collect();

    let mut token_docs = Vec::with_capacity(docs);
    for _ in 0..docs {
        let mix = dirichlet(&mut rng, &doc_gamma, topics);
        let topic_sampler = WeightedIndex::new(&mix).expect("mixture has positive mass");
        let tokens: Vec<usize> = (0..doc_len)
            .map(|_| {
                let k = topic_sampler.sample(&mut rng);
                word_samplers[k].sample(&mut rng)
            })
            .collect();
        token_docs.push(tokens);
    }

    let width = (words - 1).to_string().len().max(4);
    let vocab = Vocabulary::from_words((0..words).map(|i| format!("w{i:0width$}")))
        .expect("generated names are unique");
    let corpus = Corpus::new(vocab, token_docs).map_err(|e| SynthError::Invalid(e.to_string()))?;
    let phi = PhiMatrix::from_columns(&topic_words).map_err(|e| SynthError::Invalid(e.to_string()))?;
    Ok((corpus, phi))
}
