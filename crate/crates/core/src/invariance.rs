//! T-invariance of the high-probability vocabulary: which words clear the
//! 1/N threshold in some topic, and how much those sets overlap between
//! solutions with different topic counts.

use std::collections::BTreeSet;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;

use crate::model::PhiMatrix;

/// Words above 1/N in at least one topic of a solution with `topics` topics.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TopWordSet {
    pub topics: usize,
    pub words: BTreeSet<usize>,
}

impl TopWordSet {
    pub fn new(topics: usize, words: impl IntoIterator<Item = usize>) -> Self {
        Self {
            topics,
            words: words.into_iter().collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

pub fn top_words(phi: &PhiMatrix) -> TopWordSet {
    let threshold = 1.0 / phi.words() as f64;
    TopWordSet::new(
        phi.topics(),
        (0..phi.words()).filter(|&w| phi.word_row(w).iter().any(|&p| p > threshold)),
    )
}

/// Top words paired with their largest per-topic probability, most probable
/// first (ties by word id).
pub fn ranked_top_words(phi: &PhiMatrix) -> Vec<(usize, f64)> {
    let threshold = 1.0 / phi.words() as f64;
    let mut ranked: Vec<(usize, f64)> = (0..phi.words())
        .map(|w| (w, phi.word_row(w).iter().copied().fold(0.0, f64::max)))
        .filter(|&(_, p)| p > threshold)
        .collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    ranked
}

/// |a ∩ b| / |a ∪ b|; `None` when both sets are empty.
pub fn jaccard(a: &TopWordSet, b: &TopWordSet) -> Option<f64> {
    let common = a.words.intersection(&b.words).count();
    let union = a.len() + b.len() - common;
    (union > 0).then(|| common as f64 / union as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct JaccardMatrix {
    pub t_values: Vec<usize>,
    /// Symmetric; `None` marks an undefined cell (two empty sets).
    pub values: Vec<Vec<Option<f64>>>,
}

/// Pairwise Jaccard indices. Only the upper triangle is computed; the lower
/// one is its mirror.
pub fn jaccard_matrix(solutions: &[TopWordSet]) -> JaccardMatrix {
    let n = solutions.len();
    let upper: Vec<Vec<Option<f64>>> = (0..n)
        .into_par_iter()
        .map(|i| (i..n).map(|j| jaccard(&solutions[i], &solutions[j])).collect())
        .collect();
    let mut values = vec![vec![None; n]; n];
    for (i, row) in upper.into_iter().enumerate() {
        for (k, v) in row.into_iter().enumerate() {
            values[i][i + k] = v;
            values[i + k][i] = v;
        }
    }
    JaccardMatrix {
        t_values: solutions.iter().map(|s| s.topics).collect(),
        values,
    }
}

/// Similarity of each solution to its successor, keyed by the earlier T.
pub fn diagonal_curve(matrix: &JaccardMatrix) -> Vec<(usize, Option<f64>)> {
    (0..matrix.t_values.len().saturating_sub(1))
        .map(|i| (matrix.t_values[i], matrix.values[i][i + 1]))
        .collect()
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6}")).unwrap_or_default()
}

impl JaccardMatrix {
    pub fn len(&self) -> usize {
        self.t_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t_values.is_empty()
    }

    pub fn is_symmetric(&self) -> bool {
        let n = self.len();
        (0..n).all(|i| (0..n).all(|j| self.values[i][j] == self.values[j][i]))
    }

    /// Header row and first column hold the T values; six decimals; empty
    /// cell for undefined entries.
    pub fn write_csv(&self, path: &Path) -> std::io::Result<()> {
        let mut out = BufWriter::new(fs::File::create(path)?);
        let header: Vec<String> = self.t_values.iter().map(usize::to_string).collect();
        writeln!(out, "T,{}", header.join(","))?;
        for (t, row) in self.t_values.iter().zip(&self.values) {
            let cells: Vec<String> = row.iter().map(|&v| cell(v)).collect();
            writeln!(out, "{t},{}", cells.join(","))?;
        }
        out.flush()
    }
}

pub fn write_diagonal_csv(curve: &[(usize, Option<f64>)], path: &Path) -> std::io::Result<()> {
    let mut out = BufWriter::new(fs::File::create(path)?);
    writeln!(out, "T,value")?;
    for &(t, v) in curve {
        writeln!(out, "{t},{}", cell(v))?;
    }
    out.flush()
}
