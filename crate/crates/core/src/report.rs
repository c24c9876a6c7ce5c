//! Plot-ready artifacts of a sweep.
//!
//! | file | contents |
//! |---|---|
//! | `entropy_curve.csv` | one row per `(T, run)` plus a `run = avg` row per T |
//! | `jaccard_matrix.csv` | run-0 pairwise Jaccard matrix |
//! | `jaccard_matrix_run{r}.csv` | the same for runs `r >= 1` |
//! | `jaccard_diagonal.csv` | similarity of consecutive T values |
//! | `top_words_T{T}.txt` | run-0 top words, most probable first |
//! | `manifest.json` | every configuration field and derived seed |
//!
//! Floats in the entropy curve use Rust's shortest round-trip formatting, so
//! re-reading a value gives back the exact double.

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::corpus::Vocabulary;
use crate::invariance::{self, JaccardMatrix, TopWordSet};
use crate::sweep::{CorpusSummary, SweepReport};

pub const ENTROPY_HEADER: &str =
    "T,run,n_high,rho,prob_mass,energy,free_energy,shannon,shannon_classical,renyi,tsallis";

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn entropy_row(
    topics: usize,
    run: &str,
    n_high: Option<f64>,
    prob_mass: Option<f64>,
    words: usize,
    point: Option<&crate::entropy::EntropyPoint>,
) -> String {
    let rho = n_high.map(|n| crate::entropy::density_of_states(n, words, topics));
    let mut cells = vec![
        topics.to_string(),
        run.to_owned(),
        opt(n_high),
        opt(rho),
        opt(prob_mass),
    ];
    match point {
        Some(p) => cells.extend(
            [
                p.energy,
                p.free_energy,
                p.shannon,
                p.shannon_classical,
                p.renyi,
                p.tsallis,
            ]
            .iter()
            .map(f64::to_string),
        ),
        None => cells.extend(std::iter::repeat_n(String::new(), 6)),
    }
    cells.join(",")
}

fn write_entropy_curve(report: &SweepReport, path: &Path) -> io::Result<()> {
    let words = report.corpus.vocabulary;
    let mut out = BufWriter::new(fs::File::create(path)?);
    writeln!(out, "{ENTROPY_HEADER}")?;
    for avg in &report.averaged {
        let t = avg.topics;
        for c in report.cells.iter().filter(|c| c.topics == t) {
            let row = entropy_row(
                t,
                &c.run.to_string(),
                c.n_high.map(|n| n as f64),
                c.prob_mass,
                words,
                c.point.as_ref(),
            );
            writeln!(out, "{row}")?;
        }
        let row = entropy_row(
            t,
            "avg",
            avg.point.as_ref().map(|p| p.n_high),
            avg.point.as_ref().map(|p| p.prob_mass),
            words,
            avg.point.as_ref(),
        );
        writeln!(out, "{row}")?;
    }
    out.flush()
}

#[derive(Serialize)]
struct CellManifest {
    topics: usize,
    run: usize,
    seed: u64,
    alpha: f64,
    beta: f64,
    error: Option<String>,
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    model: String,
    t_min: usize,
    t_max: usize,
    t_step: usize,
    t_values: Vec<usize>,
    runs: usize,
    base_seed: u64,
    alpha: Option<f64>,
    alpha_default: &'static str,
    beta: Option<f64>,
    beta_default: f64,
    iterations: usize,
    glda_region: usize,
    selection: crate::model::TopicSelection,
    seed_derivation: &'static str,
    rng: &'static str,
    corpus: &'a CorpusSummary,
    argmin_renyi: Option<usize>,
    cells: Vec<CellManifest>,
}

fn write_manifest(report: &SweepReport, path: &Path) -> io::Result<()> {
    let cfg = &report.config;
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        model: cfg.model.to_string(),
        t_min: cfg.t_min,
        t_max: cfg.t_max,
        t_step: cfg.t_step,
        t_values: cfg.t_values(),
        runs: cfg.runs,
        base_seed: cfg.base_seed,
        alpha: cfg.alpha,
        alpha_default: "50/T",
        beta: cfg.beta,
        beta_default: crate::model::DEFAULT_BETA,
        iterations: cfg.iterations,
        glda_region: cfg.glda_region,
        selection: cfg.selection,
        seed_derivation: "splitmix64(splitmix64(base_seed ^ splitmix64(T)) ^ run)",
        rng: "ChaCha8, seed_from_u64(seed), stream 0",
        corpus: &report.corpus,
        argmin_renyi: report.argmin_renyi,
        cells: report
            .cells
            .iter()
            .map(|c| CellManifest {
                topics: c.topics,
                run: c.run,
                seed: c.seed,
                alpha: c.alpha,
                beta: c.beta,
                error: c.error.clone(),
            })
            .collect(),
    };
    let mut text = serde_json::to_string_pretty(&manifest).map_err(io::Error::other)?;
    text.push('\n');
    fs::write(path, text)
}

/// Writes the jaccard matrix and its diagonal; returns the two paths.
pub fn write_invariance(matrix: &JaccardMatrix, dir: &Path) -> io::Result<Vec<PathBuf>> {
    let m = dir.join("jaccard_matrix.csv");
    matrix.write_csv(&m)?;
    let d = dir.join("jaccard_diagonal.csv");
    invariance::write_diagonal_csv(&invariance::diagonal_curve(matrix), &d)?;
    Ok(vec![m, d])
}

/// Writes every artifact of `report` into `dir` (created if missing) and
/// returns the written paths.
pub fn emit_report(report: &SweepReport, dir: &Path) -> io::Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();

    let p = dir.join("entropy_curve.csv");
    write_entropy_curve(report, &p)?;
    written.push(p);

    written.extend(write_invariance(&report.jaccard, dir)?);
    for (r, m) in report.run_jaccard.iter().enumerate().skip(1) {
        let p = dir.join(format!("jaccard_matrix_run{r}.csv"));
        m.write_csv(&p)?;
        written.push(p);
    }

    for c in report
        .cells
        .iter()
        .filter(|c| c.run == 0 && c.top_words.is_some())
    {
        let p = dir.join(format!("top_words_T{}.txt", c.topics));
        let mut text = String::new();
        for &w in &c.ranked_top_words {
            text.push_str(&report.vocabulary[w]);
            text.push('\n');
        }
        fs::write(&p, text)?;
        written.push(p);
    }

    let p = dir.join("manifest.json");
    write_manifest(report, &p)?;
    written.push(p);
    Ok(written)
}

/// Reads every `top_words_T{T}.txt` in `dir`, ordered by T.
pub fn load_top_word_files(dir: &Path) -> io::Result<BTreeMap<usize, Vec<String>>> {
    let mut lists = BTreeMap::new();
    for entry in fs::read_dir(dir)? {
        let path = entry?.path();
        let Some(name) = path.file_name().and_then(|n| n.to_str()) else {
            continue;
        };
        let Some(t) = name
            .strip_prefix("top_words_T")
            .and_then(|s| s.strip_suffix(".txt"))
            .and_then(|s| s.parse::<usize>().ok())
        else {
            continue;
        };
        let words = fs::read_to_string(&path)?
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .map(str::to_owned)
            .collect();
        lists.insert(t, words);
    }
    Ok(lists)
}

/// Jaccard matrix over stored top-word lists; words are interned into a
/// shared vocabulary first.
pub fn invariance_from_word_lists(lists: &BTreeMap<usize, Vec<String>>) -> JaccardMatrix {
    let mut vocab = Vocabulary::new();
    let sets: Vec<TopWordSet> = lists
        .iter()
        .map(|(&t, words)| TopWordSet::new(t, words.iter().map(|w| vocab.intern(w))))
        .collect();
    invariance::jaccard_matrix(&sets)
}
