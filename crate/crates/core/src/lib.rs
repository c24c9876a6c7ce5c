//! Topic models and entropy-based selection of the number of topics.
//!
//! Four inference algorithms produce word–topic (Φ) and topic–document (Θ)
//! matrices: pLSA and VLDA by EM ([`em`]), LDA by collapsed Gibbs sampling
//! and its granulated variant GLDA ([`gibbs`]). Each solution is scored by
//! the free-energy based Rényi and Tsallis entropies of [`entropy`]; a sweep
//! over the topic count ([`sweep`]) locates the entropy minimum, and
//! [`invariance`] measures how stable the high-probability vocabulary is
//! across topic counts.

pub mod corpus;
pub mod em;
pub mod entropy;
pub mod gibbs;
pub mod invariance;
pub mod model;
pub mod report;
pub mod rng;
pub mod sweep;
pub mod synth;

pub use corpus::{load_plain_text, load_uci_bow, Corpus, CorpusError, Document, Vocabulary};
pub use entropy::{evaluate_solution, DiscreteDistribution, EntropyError, EntropyPoint};
pub use invariance::{diagonal_curve, jaccard, jaccard_matrix, top_words, JaccardMatrix, TopWordSet};
pub use model::{fit, FitResult, ModelConfig, ModelError, ModelKind, PhiMatrix, ThetaMatrix, TopicSelection};
pub use report::emit_report;
pub use rng::seeded_rng;
pub use sweep::{run_sweep, SweepConfig, SweepError, SweepReport};
pub use synth::{generate_synthetic, SynthParams};
