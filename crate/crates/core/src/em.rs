//! Maximum-likelihood topic inference by expectation–maximisation.
//!
//! Both models alternate an E-step, which spreads every observed count
//! `n_wd` over topics by the posterior p(t|d,w) ∝ φ_wt θ_td, with an M-step
//! that turns the expected counts `n_wt`, `n_td` into new matrices:
//!
//! * pLSA: φ_wt = n_wt / n_t, θ_td = n_td / n_d
//! * VLDA: φ_wt = (n_wt + β) / (n_t + Nβ), θ_td = (n_td + α) / (n_d + Tα)
//!
//! The VLDA update is the MAP estimate under symmetric Dirichlet priors, so
//! the quantity EM increases for it is the penalised objective
//! `L + β Σ ln φ + α Σ ln θ`; that is what its trace records.

use rand::Rng;
use rand_distr::Exp1;

use crate::corpus::Corpus;
use crate::model::{FitResult, ModelConfig, ModelError, PhiMatrix, ThetaMatrix};
use crate::rng::seeded_rng;

/// Floor on mixture probabilities inside the E-step.
pub const MIXTURE_FLOOR: f64 = 1e-300;

/// Absolute per-step tolerance on objective decreases.
pub const MONOTONE_TOL: f64 = 1e-8;

/// Neumaier-compensated running sum.
#[derive(Debug, Default, Clone, Copy)]
struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(self) -> f64 {
        self.sum + self.carry
    }
}

/// Starting matrices for an EM fit.
#[derive(Debug, Clone, PartialEq)]
pub struct EmInit {
    pub phi: PhiMatrix,
    pub theta: ThetaMatrix,
}

fn exp_simplex(rng: &mut impl Rng, len: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (0..len).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let s: f64 = v.iter().sum();
    v.iter_mut().for_each(|x| *x /= s);
    v
}

/// Random start: every Φ column (topic by topic) and then every Θ column
/// (document by document) drawn from a flat Dirichlet, stream 0 of `seed`.
pub fn random_init(corpus: &Corpus, topics: usize, seed: u64) -> EmInit {
    let words = corpus.vocab_size();
    let docs = corpus.num_docs();
    let mut rng = seeded_rng(seed, 0);
    let mut phi = vec![0.0; words * topics];
    for t in 0..topics {
        for (w, v) in exp_simplex(&mut rng, words).into_iter().enumerate() {
            phi[w * topics + t] = v;
        }
    }
    let theta: Vec<f64> = (0..docs).flat_map(|_| exp_simplex(&mut rng, topics)).collect();
    EmInit {
        phi: PhiMatrix::from_raw(words, topics, phi),
        theta: ThetaMatrix::from_raw(topics, docs, theta),
    }
}

/// Writes p(t|d,w) for every topic into `out` and returns the (unfloored)
/// mixture probability Σ_t φ_wt θ_td. If the mixture is zero the posterior
/// is left at zero.
pub fn topic_posterior(
    phi: &PhiMatrix,
    theta: &ThetaMatrix,
    word: usize,
    doc: usize,
    out: &mut [f64],
) -> f64 {
    let row = phi.word_row(word);
    let col = theta.doc(doc);
    let mut mix = 0.0;
    for ((o, &p), &q) in out.iter_mut().zip(row).zip(col) {
        *o = p * q;
        mix += *o;
    }
    if mix > 0.0 {
        out.iter_mut().for_each(|o| *o /= mix);
    }
    mix
}

/// Σ_d Σ_w n_wd ln Σ_t φ_wt θ_td. Any observed pair with zero mixture
/// probability makes the result negative infinity.
pub fn log_likelihood(corpus: &Corpus, phi: &PhiMatrix, theta: &ThetaMatrix) -> Result<f64, ModelError> {
    check_shapes(corpus, phi, theta)?;
    let mut total = CompensatedSum::default();
    for (d, row) in corpus.doc_word_counts().iter().enumerate() {
        let col = theta.doc(d);
        for &(w, c) in row {
            let mix: f64 = phi.word_row(w).iter().zip(col).map(|(p, q)| p * q).sum();
            if mix <= 0.0 {
                return Ok(f64::NEG_INFINITY);
            }
            total.add(c as f64 * mix.ln());
        }
    }
    Ok(total.value())
}

fn check_shapes(corpus: &Corpus, phi: &PhiMatrix, theta: &ThetaMatrix) -> Result<(), ModelError> {
    if phi.words() != corpus.vocab_size()
        || theta.docs() != corpus.num_docs()
        || phi.topics() != theta.topics()
    {
        return Err(ModelError::Shape(format!(
            "phi {}x{}, theta {}x{} vs corpus N={} D={}",
            phi.words(),
            phi.topics(),
            theta.topics(),
            theta.docs(),
            corpus.vocab_size(),
            corpus.num_docs()
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy)]
enum Smoothing {
    None,
    Dirichlet { alpha: f64, beta: f64 },
}

/// Sparse counts plus the expected-count buffers of one EM fit.
#[derive(Debug, Clone)]
pub struct EmWorkspace {
    /// Per document `(word, n_wd)`, sorted by word.
    pub counts: Vec<Vec<(usize, usize)>>,
    pub phi: PhiMatrix,
    pub theta: ThetaMatrix,
    n_wt: Vec<f64>,
    n_td: Vec<f64>,
    posterior: Vec<f64>,
}

impl EmWorkspace {
    pub fn new(corpus: &Corpus, init: EmInit) -> Result<Self, ModelError> {
        check_shapes(corpus, &init.phi, &init.theta)?;
        let topics = init.phi.topics();
        Ok(Self {
            counts: corpus.doc_word_counts(),
            n_wt: vec![0.0; init.phi.words() * topics],
            n_td: vec![0.0; init.theta.docs() * topics],
            posterior: vec![0.0; topics],
            phi: init.phi,
            theta: init.theta,
        })
    }

    /// Accumulates expected counts under the current matrices and returns
    /// the (floored) log-likelihood of those matrices.
    fn e_step(&mut self) -> f64 {
        let topics = self.phi.topics();
        self.n_wt.iter_mut().for_each(|v| *v = 0.0);
        self.n_td.iter_mut().for_each(|v| *v = 0.0);
        let mut ll = CompensatedSum::default();
        for (d, row) in self.counts.iter().enumerate() {
            let col = self.theta.doc(d);
            let n_td = &mut self.n_td[d * topics..(d + 1) * topics];
            for &(w, c) in row {
                let c = c as f64;
                let phi_row = self.phi.word_row(w);
                let mut mix = 0.0;
                for ((post, &p), &q) in self.posterior.iter_mut().zip(phi_row).zip(col) {
                    *post = p * q;
                    mix += *post;
                }
                let mix = mix.max(MIXTURE_FLOOR);
                ll.add(c * mix.ln());
                let scale = c / mix;
                let n_wt = &mut self.n_wt[w * topics..(w + 1) * topics];
                for ((acc_w, acc_d), &post) in n_wt.iter_mut().zip(n_td.iter_mut()).zip(&self.posterior) {
                    let r = post * scale;
                    *acc_w += r;
                    *acc_d += r;
                }
            }
        }
        ll.value()
    }

    fn m_step(&mut self, smoothing: Smoothing) {
        let words = self.phi.words();
        let topics = self.phi.topics();
        let docs = self.theta.docs();
        let (alpha, beta) = match smoothing {
            Smoothing::None => (0.0, 0.0),
            Smoothing::Dirichlet { alpha, beta } => (alpha, beta),
        };

        let mut topic_totals = vec![0.0; topics];
        for w in 0..words {
            for (tot, v) in topic_totals
                .iter_mut()
                .zip(&self.n_wt[w * topics..(w + 1) * topics])
            {
                *tot += v;
            }
        }
        let mut phi = vec![0.0; words * topics];
        for w in 0..words {
            for t in 0..topics {
                let denom = topic_totals[t] + words as f64 * beta;
                // a topic with no mass has θ = 0 everywhere and cannot
                // influence the likelihood; park it on the flat distribution
                phi[w * topics + t] = if denom > 0.0 {
                    (self.n_wt[w * topics + t] + beta) / denom
                } else {
                    1.0 / words as f64
                };
            }
        }

        let mut theta = vec![0.0; topics * docs];
        for d in 0..docs {
            let counts = &self.n_td[d * topics..(d + 1) * topics];
            let doc_total: f64 = counts.iter().sum();
            let denom = doc_total + topics as f64 * alpha;
            for (t, &c) in counts.iter().enumerate() {
                theta[d * topics + t] = if denom > 0.0 {
                    (c + alpha) / denom
                } else {
                    1.0 / topics as f64
                };
            }
        }
        self.phi = PhiMatrix::from_raw(words, topics, phi);
        self.theta = ThetaMatrix::from_raw(topics, docs, theta);
    }

    fn log_prior(&self, smoothing: Smoothing) -> f64 {
        match smoothing {
            Smoothing::None => 0.0,
            Smoothing::Dirichlet { alpha, beta } => {
                let mut s = CompensatedSum::default();
                for &p in self.phi.values() {
                    s.add(beta * p.max(MIXTURE_FLOOR).ln());
                }
                for d in 0..self.theta.docs() {
                    for &q in self.theta.doc(d) {
                        s.add(alpha * q.max(MIXTURE_FLOOR).ln());
                    }
                }
                s.value()
            }
        }
    }

    fn run(
        mut self,
        iterations: usize,
        smoothing: Smoothing,
    ) -> Result<(PhiMatrix, ThetaMatrix, Vec<f64>), ModelError> {
        let mut trace = Vec::with_capacity(iterations);
        for it in 0..iterations {
            let prior = self.log_prior(smoothing);
            let ll = self.e_step();
            if it > 0 {
                trace.push(ll + prior);
            }
            self.m_step(smoothing);
        }
        let final_ll = self.e_step() + self.log_prior(smoothing);
        trace.push(final_ll);

        for (i, pair) in trace.windows(2).enumerate() {
            let drop = pair[0] - pair[1];
            if drop > MONOTONE_TOL.max(1e-14 * pair[0].abs()) {
                return Err(ModelError::NonMonotone {
                    iteration: i + 1,
                    drop,
                });
            }
        }
        Ok((self.phi, self.theta, trace))
    }
}

fn fit_em(
    corpus: &Corpus,
    config: &ModelConfig,
    init: EmInit,
    smoothing: Smoothing,
) -> Result<FitResult, ModelError> {
    config.validate_for(corpus)?;
    if init.phi.topics() != config.topics {
        return Err(ModelError::Shape(format!(
            "initialisation has {} topics, config {}",
            init.phi.topics(),
            config.topics
        )));
    }
    let (phi, theta, loglik_trace) = EmWorkspace::new(corpus, init)?.run(config.iterations, smoothing)?;
    Ok(FitResult {
        phi,
        theta,
        loglik_trace,
        config: config.clone(),
    })
}

/// pLSA by plain EM from the seeded random start.
pub fn fit_plsa(corpus: &Corpus, config: &ModelConfig) -> Result<FitResult, ModelError> {
    config.validate_for(corpus)?;
    let init = random_init(corpus, config.topics, config.seed);
    fit_plsa_from(corpus, config, init)
}

pub fn fit_plsa_from(corpus: &Corpus, config: &ModelConfig, init: EmInit) -> Result<FitResult, ModelError> {
    fit_em(corpus, config, init, Smoothing::None)
}

/// VLDA: EM with the Dirichlet-smoothed M-step, α on Θ and β on Φ.
pub fn fit_vlda(corpus: &Corpus, config: &ModelConfig) -> Result<FitResult, ModelError> {
    config.validate_for(corpus)?;
    let init = random_init(corpus, config.topics, config.seed);
    fit_vlda_from(corpus, config, init)
}

pub fn fit_vlda_from(corpus: &Corpus, config: &ModelConfig, init: EmInit) -> Result<FitResult, ModelError> {
    let smoothing = Smoothing::Dirichlet {
        alpha: config.alpha,
        beta: config.beta,
    };
    fit_em(corpus, config, init, smoothing)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ModelKind, STOCHASTIC_TOL};

    fn random_corpus(seed: u64, docs: usize, words: usize, len: usize) -> Corpus {
        let mut rng = seeded_rng(seed, 99);
        let vocab = crate::corpus::Vocabulary::from_words((0..words).map(|i| format!("w{i}"))).unwrap();
        let docs = (0..docs)
            .map(|_| (0..len).map(|_| rng.random_range(0..words)).collect())
            .collect();
        Corpus::new(vocab, docs).unwrap()
    }

    #[allow(clippy::needless_range_loop)]
    fn naive_log_likelihood(corpus: &Corpus, phi: &PhiMatrix, theta: &ThetaMatrix) -> f64 {
        // dense n_wd, then the double sum written out literally
        let (nw, nd) = (corpus.vocab_size(), corpus.num_docs());
        let mut n_wd = vec![vec![0usize; nd]; nw];
        for doc in corpus.documents() {
            for &w in &doc.tokens {
                n_wd[w][doc.id] += 1;
            }
        }
        let mut total = 0.0;
        for d in 0..nd {
            for w in 0..nw {
                if n_wd[w][d] == 0 {
                    continue;
                }
                let mut mix = 0.0;
                for t in 0..phi.topics() {
                    mix += phi.get(w, t) * theta.get(t, d);
                }
                total += n_wd[w][d] as f64 * mix.ln();
            }
        }
        total
    }

    #[test]
    fn loglik_trivial_cases() {
        for docs in [vec![vec!["aa"]], vec![vec!["aa", "aa"]]] {
            let c = Corpus::from_word_docs(docs).unwrap();
            let phi = PhiMatrix::from_columns(&[vec![1.0]]).unwrap();
            let theta = ThetaMatrix::from_doc_rows(&[vec![1.0]]).unwrap();
            assert_eq!(log_likelihood(&c, &phi, &theta).unwrap(), 0.0);
        }
    }

    #[test]
    fn loglik_matches_naive_double_loop() {
        for seed in 0..5 {
            let c = random_corpus(seed, 12, 15, 20);
            let init = random_init(&c, 4, seed);
            let fast = log_likelihood(&c, &init.phi, &init.theta).unwrap();
            let slow = naive_log_likelihood(&c, &init.phi, &init.theta);
            assert!(
                (fast - slow).abs() < 1e-12 * slow.abs().max(1.0),
                "{fast} vs {slow}"
            );
            assert!(fast <= 0.0);
        }
    }

    #[test]
    fn loglik_zero_mixture_is_neg_infinity() {
        let c = Corpus::from_word_docs([vec!["aa", "bb"]]).unwrap();
        let phi = PhiMatrix::from_columns(&[vec![1.0, 0.0]]).unwrap();
        let theta = ThetaMatrix::from_doc_rows(&[vec![1.0]]).unwrap();
        assert_eq!(log_likelihood(&c, &phi, &theta).unwrap(), f64::NEG_INFINITY);
    }

    #[test]
    fn loglik_shape_mismatch() {
        let c = Corpus::from_word_docs([vec!["aa", "bb"]]).unwrap();
        let phi = PhiMatrix::from_columns(&[vec![1.0]]).unwrap();
        let theta = ThetaMatrix::from_doc_rows(&[vec![1.0]]).unwrap();
        assert!(matches!(
            log_likelihood(&c, &phi, &theta),
            Err(ModelError::Shape(_))
        ));
    }

    #[test]
    fn posterior_normalised() {
        let c = random_corpus(3, 10, 12, 15);
        let init = random_init(&c, 5, 3);
        let mut buf = vec![0.0; 5];
        for (d, row) in c.doc_word_counts().iter().enumerate() {
            for &(w, _) in row {
                topic_posterior(&init.phi, &init.theta, w, d, &mut buf);
                let s: f64 = buf.iter().sum();
                assert!((s - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn random_init_is_stochastic() {
        let c = random_corpus(1, 8, 30, 10);
        let init = random_init(&c, 6, 11);
        init.phi.check_stochastic(1e-12).unwrap();
        init.theta.check_stochastic(1e-12).unwrap();
    }

    #[test]
    fn plsa_single_topic_is_empirical_frequency() {
        let c = random_corpus(5, 20, 25, 30);
        let cfg = ModelConfig::new(ModelKind::Plsa, 1).with_iterations(3);
        let r = fit_plsa(&c, &cfg).unwrap();
        let n = c.total_tokens() as f64;
        for (w, &f) in c.word_frequencies().iter().enumerate() {
            assert!((r.phi.get(w, 0) - f as f64 / n).abs() < 1e-15);
        }
    }

    #[test]
    fn plsa_two_block_corpus_separates() {
        // Oracle: brute-force maximisation of L over a grid of the four free
        // parameters (φ_a1, φ_a2, θ_11, θ_12); its best point is a corner with
        // each topic on a single word.
        let c = Corpus::from_word_docs([vec!["aa", "aa"], vec!["bb", "bb"]]).unwrap();
        let steps = 20;
        let grid: Vec<f64> = (0..=steps).map(|i| i as f64 / steps as f64).collect();
        let mut best = (f64::NEG_INFINITY, [0.0; 4]);
        for &pa1 in &grid {
            for &pa2 in &grid {
                for &q1 in &grid {
                    for &q2 in &grid {
                        let mix_a = pa1 * q1 + pa2 * (1.0 - q1);
                        let mix_b = (1.0 - pa1) * q2 + (1.0 - pa2) * (1.0 - q2);
                        let l = 2.0 * mix_a.ln() + 2.0 * mix_b.ln();
                        if l > best.0 {
                            best = (l, [pa1, pa2, q1, q2]);
                        }
                    }
                }
            }
        }
        assert!(best.0.abs() < 1e-12);
        let [pa1, pa2, ..] = best.1;
        assert!((pa1 - pa2).abs() == 1.0);

        for seed in 0..5 {
            let cfg = ModelConfig::new(ModelKind::Plsa, 2).with_seed(seed);
            let r = fit_plsa(&c, &cfg).unwrap();
            let a = c.vocabulary().id("aa").unwrap();
            let b = c.vocabulary().id("bb").unwrap();
            let (t_a, t_b) = if r.phi.get(a, 0) > r.phi.get(a, 1) {
                (0, 1)
            } else {
                (1, 0)
            };
            assert!(r.phi.get(a, t_a) >= 0.99, "seed {seed}: {:?}", r.phi);
            assert!(r.phi.get(b, t_b) >= 0.99, "seed {seed}: {:?}", r.phi);
            assert!(*r.loglik_trace.last().unwrap() > -1e-3);
        }
    }

    #[test]
    fn traces_non_decreasing() {
        for seed in 0..3 {
            let c = random_corpus(seed, 50, 100, 40);
            for model in [ModelKind::Plsa, ModelKind::Vlda] {
                let cfg = ModelConfig::new(model, 8)
                    .with_seed(seed)
                    .with_smoothing(0.1, 0.01);
                let r = crate::model::fit(&c, &cfg).unwrap();
                assert_eq!(r.loglik_trace.len(), 100);
                for w in r.loglik_trace.windows(2) {
                    assert!(w[1] >= w[0] - MONOTONE_TOL, "{model}: {} -> {}", w[0], w[1]);
                }
                r.phi.check_stochastic(STOCHASTIC_TOL).unwrap();
                r.theta.check_stochastic(STOCHASTIC_TOL).unwrap();
            }
        }
    }

    #[test]
    fn vlda_single_topic_closed_form() {
        let c = random_corpus(8, 10, 20, 12);
        let s = 0.3;
        let cfg = ModelConfig::new(ModelKind::Vlda, 1)
            .with_smoothing(1.0, s)
            .with_iterations(2);
        let r = fit_vlda(&c, &cfg).unwrap();
        let n = c.total_tokens() as f64;
        let nw = c.vocab_size() as f64;
        for (w, &f) in c.word_frequencies().iter().enumerate() {
            let expected = (f as f64 + s) / (n + nw * s);
            assert!((r.phi.get(w, 0) - expected).abs() < 1e-15);
        }
    }

    #[test]
    fn vlda_vanishing_smoothing_approaches_plsa() {
        let c = random_corpus(4, 30, 40, 25);
        let base = ModelConfig::new(ModelKind::Plsa, 5).with_seed(21);
        let plsa = fit_plsa(&c, &base).unwrap();
        let vcfg = ModelConfig {
            model: ModelKind::Vlda,
            ..base.clone()
        }
        .with_smoothing(1e-12, 1e-12);
        let vlda = fit_vlda(&c, &vcfg).unwrap();
        let max_diff = plsa
            .phi
            .values()
            .iter()
            .zip(vlda.phi.values())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(max_diff < 1e-4, "max |Δφ| = {max_diff}");
    }

    #[test]
    fn uniform_corpus_gives_flat_word_mixtures() {
        // every word exactly once in every document
        let words: Vec<String> = (0..6).map(|i| format!("w{i}")).collect();
        let c = Corpus::from_word_docs((0..5).map(|_| words.clone())).unwrap();
        // The likelihood alone is flat along every factorisation of the
        // uniform matrix; only the smoothing term picks the flat one, so this
        // needs iterations well past the default.
        let cfg = ModelConfig::new(ModelKind::Vlda, 3)
            .with_seed(2)
            .with_smoothing(0.5, 0.1)
            .with_iterations(1000);
        let r = fit_vlda(&c, &cfg).unwrap();
        for t in 0..3 {
            for w in 0..6 {
                assert!(
                    (r.phi.get(w, t) - 1.0 / 6.0).abs() < 1e-9,
                    "{:?}",
                    r.phi.topic_column(t)
                );
            }
        }
    }

    #[test]
    #[allow(clippy::needless_range_loop)]
    fn topic_permutation_is_equivariant() {
        let c = random_corpus(6, 15, 20, 18);
        let topics = 4;
        let perm = [2usize, 0, 3, 1];
        let init = random_init(&c, topics, 6);
        let permute_cols = |vals: &[f64], rows: usize| -> Vec<f64> {
            let mut out = vec![0.0; vals.len()];
            for r in 0..rows {
                for t in 0..topics {
                    out[r * topics + perm[t]] = vals[r * topics + t];
                }
            }
            out
        };
        let pinit = EmInit {
            phi: PhiMatrix::from_raw(
                c.vocab_size(),
                topics,
                permute_cols(init.phi.values(), c.vocab_size()),
            ),
            theta: ThetaMatrix::from_raw(
                topics,
                c.num_docs(),
                permute_cols(init.theta.values(), c.num_docs()),
            ),
        };
        let cfg = ModelConfig::new(ModelKind::Plsa, topics).with_iterations(30);
        let a = fit_plsa_from(&c, &cfg, init).unwrap();
        let b = fit_plsa_from(&c, &cfg, pinit).unwrap();
        for w in 0..c.vocab_size() {
            for t in 0..topics {
                assert!((a.phi.get(w, t) - b.phi.get(w, perm[t])).abs() < 1e-10);
            }
        }
    }
}
