//! Collapsed Gibbs sampling for LDA and its granulated variant (GLDA).
//!
//! A fit has three stages: assign every token a uniformly random topic and
//! build the counters; sweep the corpus `iterations` times, resampling
//! topics from the collapsed conditional; read Φ and Θ off the final
//! counters.
//!
//! GLDA differs only in the sweep. Each document is tiled into windows of
//! `2r + 1` consecutive tokens; the middle token (the anchor, or the last
//! token of a short trailing window) is resampled and every other token of
//! the window is moved to the anchor's new topic.

use rand::Rng;

use crate::corpus::Corpus;
use crate::model::{FitResult, ModelConfig, ModelError, PhiMatrix, ThetaMatrix, TopicSelection};
use crate::rng::{seeded_rng, TopicRng};

/// Sufficient statistics of the sampler. All counters agree with
/// `assignments` between token updates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountTables {
    topics: usize,
    words: usize,
    /// `word_topic[w * topics + t]`
    pub word_topic: Vec<u32>,
    /// `doc_topic[d * topics + t]`
    pub doc_topic: Vec<u32>,
    pub topic_totals: Vec<u32>,
    pub doc_lengths: Vec<u32>,
    /// Topic of every token, per document, in token order.
    pub assignments: Vec<Vec<usize>>,
}

impl CountTables {
    /// Counters for the given assignments.
    pub fn from_assignments(corpus: &Corpus, topics: usize, assignments: Vec<Vec<usize>>) -> Self {
        let words = corpus.vocab_size();
        let docs = corpus.num_docs();
        let mut tables = Self {
            topics,
            words,
            word_topic: vec![0; words * topics],
            doc_topic: vec![0; docs * topics],
            topic_totals: vec![0; topics],
            doc_lengths: vec![0; docs],
            assignments: Vec::new(),
        };
        for (doc, z) in corpus.documents().iter().zip(&assignments) {
            for (&w, &t) in doc.tokens.iter().zip(z) {
                tables.increment(doc.id, w, t);
            }
        }
        tables.assignments = assignments;
        tables
    }

    pub fn topics(&self) -> usize {
        self.topics
    }

    pub fn words(&self) -> usize {
        self.words
    }

    #[inline]
    pub fn word_topic(&self, word: usize, topic: usize) -> u32 {
        self.word_topic[word * self.topics + topic]
    }

    #[inline]
    pub fn doc_topic(&self, doc: usize, topic: usize) -> u32 {
        self.doc_topic[doc * self.topics + topic]
    }

    #[inline]
    fn increment(&mut self, doc: usize, word: usize, topic: usize) {
        self.word_topic[word * self.topics + topic] += 1;
        self.doc_topic[doc * self.topics + topic] += 1;
        self.topic_totals[topic] += 1;
        self.doc_lengths[doc] += 1;
    }

    #[inline]
    fn decrement(&mut self, doc: usize, word: usize, topic: usize) {
        self.word_topic[word * self.topics + topic] -= 1;
        self.doc_topic[doc * self.topics + topic] -= 1;
        self.topic_totals[topic] -= 1;
        self.doc_lengths[doc] -= 1;
    }

    /// Checks every counter against the corpus and the assignments.
    pub fn check_consistency(&self, corpus: &Corpus) -> Result<(), String> {
        let rebuilt = Self::from_assignments(corpus, self.topics, self.assignments.clone());
        if rebuilt != *self {
            return Err("counters disagree with assignments".into());
        }
        let freq = corpus.word_frequencies();
        for (w, &f) in freq.iter().enumerate() {
            let row: u32 = (0..self.topics).map(|t| self.word_topic(w, t)).sum();
            if row as usize != f {
                return Err(format!("word {w}: {row} assigned vs frequency {f}"));
            }
        }
        for t in 0..self.topics {
            let col: u32 = (0..self.words).map(|w| self.word_topic(w, t)).sum();
            if col != self.topic_totals[t] {
                return Err(format!(
                    "topic {t}: column {col} vs total {}",
                    self.topic_totals[t]
                ));
            }
        }
        for (d, doc) in corpus.documents().iter().enumerate() {
            let row: u32 = (0..self.topics).map(|t| self.doc_topic(d, t)).sum();
            if row != self.doc_lengths[d] || row as usize != doc.len() {
                return Err(format!("document {d}: {row} assigned vs length {}", doc.len()));
            }
        }
        Ok(())
    }

    /// Φ from the counters: (c_wt + β) / (n_t + Nβ).
    pub fn phi(&self, beta: f64) -> PhiMatrix {
        let nb = self.words as f64 * beta;
        let mut data = vec![0.0; self.words * self.topics];
        for w in 0..self.words {
            for t in 0..self.topics {
                data[w * self.topics + t] =
                    (self.word_topic(w, t) as f64 + beta) / (self.topic_totals[t] as f64 + nb);
            }
        }
        PhiMatrix::from_raw(self.words, self.topics, data)
    }

    /// Θ from the counters: (c_dt + α) / (n_d + Tα).
    pub fn theta(&self, alpha: f64) -> ThetaMatrix {
        let ta = self.topics as f64 * alpha;
        let docs = self.doc_lengths.len();
        let mut data = vec![0.0; docs * self.topics];
        for d in 0..docs {
            for t in 0..self.topics {
                data[d * self.topics + t] =
                    (self.doc_topic(d, t) as f64 + alpha) / (self.doc_lengths[d] as f64 + ta);
            }
        }
        ThetaMatrix::from_raw(self.topics, docs, data)
    }
}

fn fill_weights(tables: &CountTables, word: usize, doc: usize, alpha: f64, beta: f64, out: &mut [f64]) {
    let topics = tables.topics;
    let nb = tables.words as f64 * beta;
    let doc_denom = tables.doc_lengths[doc] as f64 + alpha * topics as f64;
    let wt = &tables.word_topic[word * topics..(word + 1) * topics];
    let dt = &tables.doc_topic[doc * topics..(doc + 1) * topics];
    for (t, o) in out.iter_mut().enumerate() {
        *o = (wt[t] as f64 + beta) / (tables.topic_totals[t] as f64 + nb)
            * ((dt[t] as f64 + alpha) / doc_denom);
    }
}

/// Collapsed conditional weights of every topic for one token whose own
/// assignment has already been removed from the counters:
/// `((c_wt + β) / (n_t + Nβ)) · ((c_dt + α) / (n_d + Tα))`.
pub fn conditional_weights(tables: &CountTables, word: usize, doc: usize, config: &ModelConfig) -> Vec<f64> {
    let mut out = vec![0.0; tables.topics];
    fill_weights(tables, word, doc, config.alpha, config.beta, &mut out);
    out
}

fn select_topic(weights: &[f64], selection: TopicSelection, rng: &mut TopicRng) -> usize {
    match selection {
        TopicSelection::Sample => {
            let total: f64 = weights.iter().sum();
            let mut u = rng.random::<f64>() * total;
            for (t, &w) in weights.iter().enumerate() {
                if u < w {
                    return t;
                }
                u -= w;
            }
            weights.len() - 1
        }
        TopicSelection::Argmax => {
            let mut best = 0;
            for (t, &w) in weights.iter().enumerate() {
                if w > weights[best] {
                    best = t;
                }
            }
            best
        }
    }
}

/// One sampler chain over a corpus.
pub struct GibbsSampler<'a> {
    corpus: &'a Corpus,
    config: ModelConfig,
    tables: CountTables,
    rng: TopicRng,
    weights: Vec<f64>,
}

impl<'a> GibbsSampler<'a> {
    /// Stage one: uniform random assignments from stream 0 of the seed.
    pub fn new(corpus: &'a Corpus, config: &ModelConfig) -> Result<Self, ModelError> {
        config.validate_for(corpus)?;
        let topics = config.topics;
        let mut rng = seeded_rng(config.seed, 0);
        let assignments = corpus
            .documents()
            .iter()
            .map(|doc| doc.tokens.iter().map(|_| rng.random_range(0..topics)).collect())
            .collect();
        Ok(Self {
            corpus,
            config: config.clone(),
            tables: CountTables::from_assignments(corpus, topics, assignments),
            rng,
            weights: vec![0.0; topics],
        })
    }

    pub fn tables(&self) -> &CountTables {
        &self.tables
    }

    fn resample(&mut self, doc: usize, pos: usize) -> usize {
        let word = self.corpus.documents()[doc].tokens[pos];
        let old = self.tables.assignments[doc][pos];
        self.tables.decrement(doc, word, old);
        fill_weights(
            &self.tables,
            word,
            doc,
            self.config.alpha,
            self.config.beta,
            &mut self.weights,
        );
        let new = select_topic(&self.weights, self.config.selection, &mut self.rng);
        self.tables.increment(doc, word, new);
        self.tables.assignments[doc][pos] = new;
        new
    }

    fn move_token(&mut self, doc: usize, pos: usize, topic: usize) {
        let word = self.corpus.documents()[doc].tokens[pos];
        let old = self.tables.assignments[doc][pos];
        if old != topic {
            self.tables.decrement(doc, word, old);
            self.tables.increment(doc, word, topic);
            self.tables.assignments[doc][pos] = topic;
        }
    }

    /// One LDA sweep: every token, in document order.
    pub fn sweep_tokens(&mut self) {
        for doc in 0..self.corpus.num_docs() {
            for pos in 0..self.corpus.documents()[doc].len() {
                self.resample(doc, pos);
            }
        }
    }

    /// One GLDA sweep with window half-width `region`.
    pub fn sweep_regions(&mut self, region: usize) {
        let width = 2 * region + 1;
        for doc in 0..self.corpus.num_docs() {
            let len = self.corpus.documents()[doc].len();
            let mut start = 0;
            while start < len {
                let end = (start + width).min(len);
                let anchor = (start + region).min(end - 1);
                let topic = self.resample(doc, anchor);
                for pos in (start..end).filter(|&p| p != anchor) {
                    self.move_token(doc, pos, topic);
                }
                start += width;
            }
        }
    }

    /// Stage three: Φ and Θ from the current counters.
    pub fn into_fit(self) -> FitResult {
        FitResult {
            phi: self.tables.phi(self.config.beta),
            theta: self.tables.theta(self.config.alpha),
            loglik_trace: Vec::new(),
            config: self.config,
        }
    }
}

/// LDA by collapsed Gibbs sampling.
pub fn fit_lda_gs(corpus: &Corpus, config: &ModelConfig) -> Result<FitResult, ModelError> {
    let mut sampler = GibbsSampler::new(corpus, config)?;
    for _ in 0..config.iterations {
        sampler.sweep_tokens();
    }
    Ok(sampler.into_fit())
}

/// Granulated LDA with window half-width `config.glda_region`.
pub fn fit_glda(corpus: &Corpus, config: &ModelConfig) -> Result<FitResult, ModelError> {
    let mut sampler = GibbsSampler::new(corpus, config)?;
    for _ in 0..config.iterations {
        sampler.sweep_regions(config.glda_region);
    }
    Ok(sampler.into_fit())
}
