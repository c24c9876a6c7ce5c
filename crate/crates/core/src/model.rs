//! Shared model representations: the word–topic and topic–document
//! matrices, model configuration and the common `fit` entry point.

use std::fmt;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::corpus::Corpus;
use crate::{em, gibbs};

/// Tolerance on column sums of Φ and Θ.
pub const STOCHASTIC_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("invalid model configuration: {0}")]
    InvalidConfig(String),
    #[error("{topics} topics requested but the vocabulary has only {words} words")]
    TooManyTopics { topics: usize, words: usize },
    #[error("matrix shape mismatch: {0}")]
    Shape(String),
    #[error("matrix is not column-stochastic: {0}")]
    NotStochastic(String),
    #[error("log-likelihood decreased by {drop:e} at iteration {iteration}")]
    NonMonotone { iteration: usize, drop: f64 },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    Plsa,
    Vlda,
    LdaGs,
    Glda,
}

impl ModelKind {
    pub const ALL: [ModelKind; 4] = [Self::Plsa, Self::Vlda, Self::LdaGs, Self::Glda];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Plsa => "plsa",
            Self::Vlda => "vlda",
            Self::LdaGs => "lda-gs",
            Self::Glda => "glda",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| ModelError::InvalidConfig(format!("unknown model {s:?}")))
    }
}

/// How the Gibbs samplers pick a topic from the conditional weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TopicSelection {
    /// Draw proportionally to the weights (collapsed Gibbs sampling).
    #[default]
    Sample,
    /// Take the heaviest topic, ties to the lowest index.
    Argmax,
}

pub const DEFAULT_BETA: f64 = 0.01;
pub const DEFAULT_ITERATIONS: usize = 100;

/// Default document–topic smoothing, `50 / T`.
pub fn default_alpha(topics: usize) -> f64 {
    50.0 / topics as f64
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelConfig {
    pub model: ModelKind,
    pub topics: usize,
    /// Document–topic smoothing.
    pub alpha: f64,
    /// Topic–word smoothing.
    pub beta: f64,
    pub iterations: usize,
    pub seed: u64,
    /// Half-width of the GLDA window; 0 reduces GLDA to plain LDA-GS.
    pub glda_region: usize,
    pub selection: TopicSelection,
}

impl ModelConfig {
    pub fn new(model: ModelKind, topics: usize) -> Self {
        Self {
            model,
            topics,
            alpha: default_alpha(topics.max(1)),
            beta: DEFAULT_BETA,
            iterations: DEFAULT_ITERATIONS,
            seed: 0,
            glda_region: 1,
            selection: TopicSelection::Sample,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_iterations(mut self, iterations: usize) -> Self {
        self.iterations = iterations;
        self
    }

    pub fn with_smoothing(mut self, alpha: f64, beta: f64) -> Self {
        self.alpha = alpha;
        self.beta = beta;
        self
    }

    pub fn with_region(mut self, region: usize) -> Self {
        self.glda_region = region;
        self
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |msg: String| Err(ModelError::InvalidConfig(msg));
        if self.topics == 0 {
            return bad("topic count must be at least 1".into());
        }
        if !(self.alpha.is_finite() && self.alpha > 0.0) {
            return bad(format!("alpha must be positive, got {}", self.alpha));
        }
        if !(self.beta.is_finite() && self.beta > 0.0) {
            return bad(format!("beta must be positive, got {}", self.beta));
        }
        if self.iterations == 0 {
            return bad("iterations must be at least 1".into());
        }
        Ok(())
    }

    pub(crate) fn validate_for(&self, corpus: &Corpus) -> Result<(), ModelError> {
        self.validate()?;
        if self.topics > corpus.vocab_size() {
            return Err(ModelError::TooManyTopics {
                topics: self.topics,
                words: corpus.vocab_size(),
            });
        }
        Ok(())
    }
}

fn check_columns(
    what: &str,
    cols: usize,
    col_sum: impl Fn(usize) -> f64,
    entries: &[f64],
) -> Result<(), ModelError> {
    if let Some(v) = entries.iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return Err(ModelError::NotStochastic(format!(
            "{what} entry {v} outside [0, 1]"
        )));
    }
    for c in 0..cols {
        let s = col_sum(c);
        if (s - 1.0).abs() > STOCHASTIC_TOL {
            return Err(ModelError::NotStochastic(format!(
                "{what} column {c} sums to {s}"
            )));
        }
    }
    Ok(())
}

fn format_value(v: f64) -> String {
    format!("{v:.15e}")
}

fn write_topic_csv(
    path: &Path,
    topics: usize,
    rows: impl Iterator<Item = Vec<f64>>,
) -> Result<(), ModelError> {
    let mut out = BufWriter::new(fs::File::create(path)?);
    let header: Vec<String> = (0..topics).map(|t| format!("topic_{t}")).collect();
    writeln!(out, "{}", header.join(","))?;
    for row in rows {
        let cells: Vec<String> = row.into_iter().map(format_value).collect();
        writeln!(out, "{}", cells.join(","))?;
    }
    out.flush()?;
    Ok(())
}

/// Word–topic distributions p(w|t): `words × topics`, every topic column
/// sums to one.
#[derive(Debug, Clone, PartialEq)]
pub struct PhiMatrix {
    words: usize,
    topics: usize,
    // row-major: data[w * topics + t]
    data: Vec<f64>,
}

impl PhiMatrix {
    pub fn new(words: usize, topics: usize, data: Vec<f64>) -> Result<Self, ModelError> {
        if words == 0 || topics == 0 || data.len() != words * topics {
            return Err(ModelError::Shape(format!(
                "phi {words}x{topics} with {} entries",
                data.len()
            )));
        }
        let phi = Self { words, topics, data };
        check_columns("phi", topics, |t| phi.topic_sum(t), &phi.data)?;
        Ok(phi)
    }

    /// Builds from columns (one distribution per topic).
    pub fn from_columns(columns: &[Vec<f64>]) -> Result<Self, ModelError> {
        let topics = columns.len();
        let words = columns.first().map_or(0, Vec::len);
        if columns.iter().any(|c| c.len() != words) {
            return Err(ModelError::Shape("ragged phi columns".into()));
        }
        let mut data = vec![0.0; words * topics];
        for (t, col) in columns.iter().enumerate() {
            for (w, &v) in col.iter().enumerate() {
                data[w * topics + t] = v;
            }
        }
        Self::new(words, topics, data)
    }

    pub(crate) fn from_raw(words: usize, topics: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), words * topics);
        Self { words, topics, data }
    }

    pub fn words(&self) -> usize {
        self.words
    }

    pub fn topics(&self) -> usize {
        self.topics
    }

    #[inline]
    pub fn get(&self, word: usize, topic: usize) -> f64 {
        self.data[word * self.topics + topic]
    }

    /// Topic probabilities of one word (a row).
    #[inline]
    pub fn word_row(&self, word: usize) -> &[f64] {
        &self.data[word * self.topics..(word + 1) * self.topics]
    }

    pub fn topic_column(&self, topic: usize) -> Vec<f64> {
        (0..self.words).map(|w| self.get(w, topic)).collect()
    }

    pub fn values(&self) -> &[f64] {
        &self.data
    }

    fn topic_sum(&self, topic: usize) -> f64 {
        (0..self.words).map(|w| self.get(w, topic)).sum()
    }

    pub fn check_stochastic(&self, tol: f64) -> Result<(), ModelError> {
        for t in 0..self.topics {
            let s = self.topic_sum(t);
            if (s - 1.0).abs() > tol || !s.is_finite() {
                return Err(ModelError::NotStochastic(format!("phi column {t} sums to {s}")));
            }
        }
        Ok(())
    }

    /// CSV with one row per word and header `topic_0..topic_{T-1}`.
    pub fn write_csv(&self, path: &Path) -> Result<(), ModelError> {
        write_topic_csv(
            path,
            self.topics,
            (0..self.words).map(|w| self.word_row(w).to_vec()),
        )
    }
}

/// Topic–document distributions p(t|d): `topics × docs`, every document
/// column sums to one.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaMatrix {
    topics: usize,
    docs: usize,
    // document-major: data[d * topics + t]
    data: Vec<f64>,
}

impl ThetaMatrix {
    pub fn from_doc_rows(rows: &[Vec<f64>]) -> Result<Self, ModelError> {
        let docs = rows.len();
        let topics = rows.first().map_or(0, Vec::len);
        if topics == 0 || rows.iter().any(|r| r.len() != topics) {
            return Err(ModelError::Shape("ragged or empty theta".into()));
        }
        let theta = Self {
            topics,
            docs,
            data: rows.concat(),
        };
        check_columns("theta", docs, |d| theta.doc(d).iter().sum(), &theta.data)?;
        Ok(theta)
    }

    pub(crate) fn from_raw(topics: usize, docs: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), topics * docs);
        Self { topics, docs, data }
    }

    pub fn topics(&self) -> usize {
        self.topics
    }

    pub fn docs(&self) -> usize {
        self.docs
    }

    #[inline]
    pub fn get(&self, topic: usize, doc: usize) -> f64 {
        self.data[doc * self.topics + topic]
    }

    /// Topic distribution of one document (a column).
    #[inline]
    pub fn doc(&self, doc: usize) -> &[f64] {
        &self.data[doc * self.topics..(doc + 1) * self.topics]
    }

    /// Entries in document-major order.
    pub fn values(&self) -> &[f64] {
        &self.data
    }

    pub fn check_stochastic(&self, tol: f64) -> Result<(), ModelError> {
        for d in 0..self.docs {
            let s: f64 = self.doc(d).iter().sum();
            if (s - 1.0).abs() > tol || !s.is_finite() {
                return Err(ModelError::NotStochastic(format!("theta column {d} sums to {s}")));
            }
        }
        Ok(())
    }

    /// CSV with one row per document and header `topic_0..topic_{T-1}`.
    pub fn write_csv(&self, path: &Path) -> Result<(), ModelError> {
        write_topic_csv(path, self.topics, (0..self.docs).map(|d| self.doc(d).to_vec()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub phi: PhiMatrix,
    pub theta: ThetaMatrix,
    /// Objective after each EM iteration; empty for the Gibbs samplers.
    pub loglik_trace: Vec<f64>,
    pub config: ModelConfig,
}

/// Fits `config.model` to the corpus. The result is a pure function of
/// `(corpus, config)`.
pub fn fit(corpus: &Corpus, config: &ModelConfig) -> Result<FitResult, ModelError> {
    match config.model {
        ModelKind::Plsa => em::fit_plsa(corpus, config),
        ModelKind::Vlda => em::fit_vlda(corpus, config),
        ModelKind::LdaGs => gibbs::fit_lda_gs(corpus, config),
        ModelKind::Glda => gibbs::fit_glda(corpus, config),
    }
}
