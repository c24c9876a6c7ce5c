//! Topic-count sweeps: fit every `(T, run)` cell, evaluate its entropy
//! diagnostics and top words, then average per T.
//!
//! Averaging is done on the raw threshold statistics (`n_high` and the
//! above-threshold probability mass); every entropy of the averaged curve is
//! recomputed from those means.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::corpus::Corpus;
use crate::entropy::{self, EntropyPoint};
use crate::invariance::{self, JaccardMatrix, TopWordSet};
use crate::model::{self, default_alpha, ModelConfig, ModelKind, TopicSelection, DEFAULT_BETA};
use crate::rng::derive_seed;

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("invalid sweep configuration: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepConfig {
    pub model: ModelKind,
    pub t_min: usize,
    pub t_max: usize,
    pub t_step: usize,
    pub runs: usize,
    pub base_seed: u64,
    /// `None` means 50/T.
    pub alpha: Option<f64>,
    /// `None` means 0.01.
    pub beta: Option<f64>,
    pub iterations: usize,
    pub glda_region: usize,
    pub selection: TopicSelection,
}

impl SweepConfig {
    pub fn new(model: ModelKind, t_min: usize, t_max: usize) -> Self {
        Self {
            model,
            t_min,
            t_max,
            t_step: 2,
            runs: 3,
            base_seed: 0,
            alpha: None,
            beta: None,
            iterations: model::DEFAULT_ITERATIONS,
            glda_region: 1,
            selection: TopicSelection::Sample,
        }
    }

    pub fn validate(&self) -> Result<(), SweepError> {
        let bad = |m: String| Err(SweepError::InvalidConfig(m));
        if self.t_min < 2 || self.t_min > self.t_max {
            return bad(format!(
                "need 2 <= t_min <= t_max, got {}..{}",
                self.t_min, self.t_max
            ));
        }
        if self.t_step == 0 {
            return bad("t_step must be at least 1".into());
        }
        if self.runs == 0 {
            return bad("runs must be at least 1".into());
        }
        // one representative cell covers the remaining field checks
        self.model_config(self.t_min, 0)
            .validate()
            .map_err(|e| SweepError::InvalidConfig(e.to_string()))
    }

    pub fn t_values(&self) -> Vec<usize> {
        (self.t_min..=self.t_max).step_by(self.t_step.max(1)).collect()
    }

    /// Model configuration of one cell, with its derived seed.
    pub fn model_config(&self, topics: usize, run: usize) -> ModelConfig {
        ModelConfig {
            model: self.model,
            topics,
            alpha: self.alpha.unwrap_or_else(|| default_alpha(topics)),
            beta: self.beta.unwrap_or(DEFAULT_BETA),
            iterations: self.iterations,
            seed: derive_seed(self.base_seed, topics, run),
            glda_region: self.glda_region,
            selection: self.selection,
        }
    }
}

/// Outcome of one `(T, run)` fit.
#[derive(Debug, Clone, PartialEq)]
pub struct CellRecord {
    pub topics: usize,
    pub run: usize,
    pub seed: u64,
    pub alpha: f64,
    pub beta: f64,
    /// Threshold statistics; `None` if the fit itself failed.
    pub n_high: Option<usize>,
    pub prob_mass: Option<f64>,
    pub shannon_classical: Option<f64>,
    /// `None` for failed fits and degenerate solutions.
    pub point: Option<EntropyPoint>,
    pub error: Option<String>,
    pub top_words: Option<TopWordSet>,
    /// Top words by descending max-topic probability.
    pub ranked_top_words: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AveragedPoint {
    pub topics: usize,
    /// Runs with a non-degenerate solution; only these are averaged.
    pub runs_used: usize,
    pub point: Option<EntropyPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorpusSummary {
    pub documents: usize,
    pub vocabulary: usize,
    pub tokens: usize,
}

#[derive(Debug, Clone)]
pub struct SweepReport {
    pub config: SweepConfig,
    pub corpus: CorpusSummary,
    pub vocabulary: Vec<String>,
    /// Sorted by `(topics, run)`.
    pub cells: Vec<CellRecord>,
    pub averaged: Vec<AveragedPoint>,
    /// Over the run-0 solutions.
    pub jaccard: JaccardMatrix,
    /// One matrix per run, index 0 equal to `jaccard`.
    pub run_jaccard: Vec<JaccardMatrix>,
    pub argmin_renyi: Option<usize>,
}

impl SweepReport {
    pub fn cell(&self, topics: usize, run: usize) -> Option<&CellRecord> {
        self.cells.iter().find(|c| c.topics == topics && c.run == run)
    }

    pub fn averaged_at(&self, topics: usize) -> Option<&EntropyPoint> {
        self.averaged
            .iter()
            .find(|a| a.topics == topics)
            .and_then(|a| a.point.as_ref())
    }

    /// `(T, value)` along the averaged curve, skipping degenerate points.
    pub fn averaged_series(&self, f: impl Fn(&EntropyPoint) -> f64) -> Vec<(usize, f64)> {
        self.averaged
            .iter()
            .filter_map(|a| a.point.as_ref().map(|p| (a.topics, f(p))))
            .collect()
    }
}

/// Fits and evaluates a single cell; the result depends only on the corpus,
/// the sweep configuration and `(topics, run)`.
pub fn run_cell(corpus: &Corpus, config: &SweepConfig, topics: usize, run: usize) -> CellRecord {
    let cfg = config.model_config(topics, run);
    let mut record = CellRecord {
        topics,
        run,
        seed: cfg.seed,
        alpha: cfg.alpha,
        beta: cfg.beta,
        n_high: None,
        prob_mass: None,
        shannon_classical: None,
        point: None,
        error: None,
        top_words: None,
        ranked_top_words: Vec::new(),
    };
    let fit = match model::fit(corpus, &cfg) {
        Ok(f) => f,
        Err(e) => {
            record.error = Some(e.to_string());
            return record;
        }
    };
    let stats = entropy::count_high_prob(&fit.phi);
    record.n_high = Some(stats.n_high);
    record.prob_mass = Some(stats.prob_mass);
    record.shannon_classical = Some(entropy::classical_shannon(&fit.phi));
    match entropy::evaluate_solution(&fit.phi) {
        Ok(p) => record.point = Some(p),
        Err(e) => record.error = Some(e.to_string()),
    }
    record.top_words = Some(invariance::top_words(&fit.phi));
    record.ranked_top_words = invariance::ranked_top_words(&fit.phi)
        .into_iter()
        .map(|(w, _)| w)
        .collect();
    record
}

fn average(cells: &[&CellRecord], words: usize, topics: usize) -> AveragedPoint {
    let usable: Vec<&&CellRecord> = cells.iter().filter(|c| c.point.is_some()).collect();
    let runs_used = usable.len();
    let point = (runs_used > 0)
        .then(|| {
            let k = runs_used as f64;
            let n_high = usable.iter().map(|c| c.n_high.unwrap() as f64).sum::<f64>() / k;
            let mass = usable.iter().map(|c| c.prob_mass.unwrap()).sum::<f64>() / k;
            let classical = usable.iter().map(|c| c.shannon_classical.unwrap()).sum::<f64>() / k;
            EntropyPoint::from_stats(n_high, mass, words, topics, classical).ok()
        })
        .flatten();
    AveragedPoint {
        topics,
        runs_used,
        point,
    }
}

/// T with the smallest averaged Rényi entropy; ties go to the smaller T.
pub fn argmin_renyi(averaged: &[AveragedPoint]) -> Option<usize> {
    averaged
        .iter()
        .filter_map(|a| a.point.as_ref().map(|p| (a.topics, p.renyi)))
        .fold(None, |best: Option<(usize, f64)>, (t, r)| match best {
            Some((_, br)) if br <= r => best,
            _ => Some((t, r)),
        })
        .map(|(t, _)| t)
}

fn run_matrix(cells: &[CellRecord], run: usize) -> JaccardMatrix {
    let sets: Vec<TopWordSet> = cells
        .iter()
        .filter(|c| c.run == run)
        .filter_map(|c| c.top_words.clone())
        .collect();
    invariance::jaccard_matrix(&sets)
}

pub fn run_sweep(corpus: &Corpus, config: &SweepConfig) -> Result<SweepReport, SweepError> {
    config.validate()?;
    if config.t_max > corpus.vocab_size() {
        return Err(SweepError::InvalidConfig(format!(
            "t_max {} exceeds vocabulary size {}",
            config.t_max,
            corpus.vocab_size()
        )));
    }
    let jobs: Vec<(usize, usize)> = config
        .t_values()
        .into_iter()
        .flat_map(|t| (0..config.runs).map(move |r| (t, r)))
        .collect();
    // rayon preserves input order in `collect`, so the result does not depend
    // on completion order
    let cells: Vec<CellRecord> = jobs
        .par_iter()
        .map(|&(t, r)| run_cell(corpus, config, t, r))
        .collect();

    let mut by_t: BTreeMap<usize, Vec<&CellRecord>> = BTreeMap::new();
    for c in &cells {
        by_t.entry(c.topics).or_default().push(c);
    }
    let averaged: Vec<AveragedPoint> = by_t
        .iter()
        .map(|(&t, cs)| average(cs, corpus.vocab_size(), t))
        .collect();

    let argmin_renyi = argmin_renyi(&averaged);

    let run_jaccard: Vec<JaccardMatrix> = (0..config.runs).map(|r| run_matrix(&cells, r)).collect();

    Ok(SweepReport {
        config: config.clone(),
        corpus: CorpusSummary {
            documents: corpus.num_docs(),
            vocabulary: corpus.vocab_size(),
            tokens: corpus.total_tokens(),
        },
        vocabulary: corpus.vocabulary().words().to_vec(),
        jaccard: run_jaccard[0].clone(),
        run_jaccard,
        cells,
        averaged,
        argmin_renyi,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{generate_synthetic, SynthParams};

    fn small() -> Corpus {
        generate_synthetic(&SynthParams {
            topics: 3,
            words: 60,
            docs: 60,
            doc_len: 30,
            alpha: 0.1,
            beta: 0.1,
            seed: 1,
        })
        .unwrap()
        .0
    }

    #[test]
    fn config_validation() {
        assert!(SweepConfig::new(ModelKind::LdaGs, 1, 4).validate().is_err());
        assert!(SweepConfig::new(ModelKind::LdaGs, 6, 4).validate().is_err());
        let mut c = SweepConfig::new(ModelKind::LdaGs, 2, 4);
        c.runs = 0;
        assert!(c.validate().is_err());
        c.runs = 1;
        c.t_step = 0;
        assert!(c.validate().is_err());
        c.t_step = 1;
        c.beta = Some(-1.0);
        assert!(c.validate().is_err());
    }

    #[test]
    fn t_values_include_bounds() {
        let mut c = SweepConfig::new(ModelKind::Plsa, 2, 10);
        assert_eq!(c.t_values(), vec![2, 4, 6, 8, 10]);
        c.t_step = 3;
        assert_eq!(c.t_values(), vec![2, 5, 8]);
    }

    #[test]
    fn single_point_sweep() {
        let corpus = small();
        let mut cfg = SweepConfig::new(ModelKind::LdaGs, 10, 10);
        cfg.runs = 1;
        cfg.iterations = 20;
        let r = run_sweep(&corpus, &cfg).unwrap();
        assert_eq!(r.cells.len(), 1);
        assert_eq!(r.jaccard.values, vec![vec![Some(1.0)]]);
        assert_eq!(r.argmin_renyi, Some(10));
    }

    #[test]
    fn single_run_average_equals_cell() {
        let corpus = small();
        let mut cfg = SweepConfig::new(ModelKind::Vlda, 2, 8);
        cfg.runs = 1;
        cfg.iterations = 30;
        let r = run_sweep(&corpus, &cfg).unwrap();
        for a in &r.averaged {
            assert_eq!(a.point.as_ref(), r.cell(a.topics, 0).unwrap().point.as_ref());
        }
    }

    #[test]
    fn cells_reproduce_in_isolation() {
        let corpus = small();
        let mut cfg = SweepConfig::new(ModelKind::Glda, 2, 6);
        cfg.runs = 2;
        cfg.iterations = 15;
        cfg.base_seed = 77;
        let r = run_sweep(&corpus, &cfg).unwrap();
        let alone = run_cell(&corpus, &cfg, 4, 1);
        assert_eq!(r.cell(4, 1).unwrap(), &alone);
        assert_eq!(alone.seed, derive_seed(77, 4, 1));
    }

    #[test]
    fn averaging_uses_raw_statistics() {
        let corpus = small();
        let mut cfg = SweepConfig::new(ModelKind::LdaGs, 4, 4);
        cfg.runs = 3;
        cfg.iterations = 10;
        let r = run_sweep(&corpus, &cfg).unwrap();
        let mean_n = (0..3)
            .map(|k| r.cell(4, k).unwrap().n_high.unwrap() as f64)
            .sum::<f64>()
            / 3.0;
        let mean_m = (0..3)
            .map(|k| r.cell(4, k).unwrap().prob_mass.unwrap())
            .sum::<f64>()
            / 3.0;
        let avg = r.averaged_at(4).unwrap();
        assert_eq!(avg.n_high, mean_n);
        assert_eq!(avg.prob_mass, mean_m);
        let fe = entropy::free_energy(mean_m, mean_n, corpus.vocab_size(), 4).unwrap();
        assert_eq!(avg.renyi, fe.free_energy / 3.0);
        assert_eq!(r.run_jaccard.len(), 3);
    }

    #[test]
    fn t_max_above_vocabulary_rejected() {
        let corpus = small();
        let cfg = SweepConfig::new(ModelKind::LdaGs, 2, 100);
        assert!(run_sweep(&corpus, &cfg).is_err());
    }

    #[test]
    fn degenerate_cells_are_recorded_not_fatal() {
        // Every word in every document once: a Gibbs fit with huge β is almost
        // flat and a pLSA fit from a symmetric start is exactly flat; either
        // way the sweep must complete.
        let words: Vec<String> = (0..8).map(|i| format!("w{i}")).collect();
        let corpus = Corpus::from_word_docs((0..6).map(|_| words.clone())).unwrap();
        let mut cfg = SweepConfig::new(ModelKind::LdaGs, 2, 4);
        cfg.runs = 2;
        cfg.iterations = 5;
        cfg.beta = Some(1e6);
        let r = run_sweep(&corpus, &cfg).unwrap();
        assert_eq!(r.cells.len(), 4);
        for c in &r.cells {
            assert!(c.point.is_some() || c.error.is_some());
        }
        assert_eq!(r.averaged.len(), 2);
    }

    fn fake_cell(topics: usize, run: usize, n_high: usize, mass: f64, ok: bool) -> CellRecord {
        CellRecord {
            topics,
            run,
            seed: 0,
            alpha: 1.0,
            beta: 0.01,
            n_high: Some(n_high),
            prob_mass: Some(mass),
            shannon_classical: Some(1.0),
            point: ok.then(|| EntropyPoint::from_stats(n_high as f64, mass, 100, topics, 1.0).unwrap()),
            error: (!ok).then(|| "degenerate".to_string()),
            top_words: None,
            ranked_top_words: Vec::new(),
        }
    }

    #[test]
    fn average_skips_degenerate_runs() {
        let a = fake_cell(4, 0, 40, 0.8, true);
        let b = fake_cell(4, 1, 0, 0.0, false);
        let c = fake_cell(4, 2, 60, 0.9, true);
        let avg = average(&[&a, &b, &c], 100, 4);
        assert_eq!(avg.runs_used, 2);
        let p = avg.point.unwrap();
        assert_eq!(p.n_high, 50.0);
        assert!((p.prob_mass - 0.85).abs() < 1e-15);

        let none = average(&[&b], 100, 4);
        assert_eq!(none.runs_used, 0);
        assert!(none.point.is_none());
    }

    #[test]
    fn argmin_prefers_smaller_t_on_ties() {
        let pts: Vec<AveragedPoint> = [(2, 40, 0.8), (4, 40, 0.8), (6, 10, 0.5)]
            .iter()
            .map(|&(t, n, m)| average(&[&fake_cell(t, 0, n, m, true)], 100, t))
            .collect();
        let r: Vec<f64> = pts.iter().map(|a| a.point.as_ref().unwrap().renyi).collect();
        let best = (0..3).min_by(|&i, &j| r[i].total_cmp(&r[j])).unwrap();
        assert_eq!(argmin_renyi(&pts), Some(pts[best].topics));

        let tie = vec![
            AveragedPoint {
                topics: 8,
                runs_used: 1,
                point: pts[0].point.clone(),
            },
            AveragedPoint {
                topics: 10,
                runs_used: 1,
                point: pts[0].point.clone(),
            },
            AveragedPoint {
                topics: 12,
                runs_used: 0,
                point: None,
            },
        ];
        assert_eq!(argmin_renyi(&tie), Some(8));
        assert_eq!(argmin_renyi(&tie[2..]), None);
    }
}
