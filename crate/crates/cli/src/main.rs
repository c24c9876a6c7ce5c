use std::error::Error;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use topic_entropy::report::{invariance_from_word_lists, load_top_word_files, write_invariance};
use topic_entropy::{
    emit_report, evaluate_solution, fit, generate_synthetic, load_plain_text, load_uci_bow, run_sweep,
    Corpus, ModelConfig, ModelKind, SweepConfig, SynthParams, TopicSelection,
};

type Result<T> = std::result::Result<T, Box<dyn Error>>;

#[derive(Parser)]
#[command(
    name = "topic-entropy",
    version,
    about = "Topic models with entropy-based selection of the topic count"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a model over a range of topic counts and write entropy and Jaccard artifacts.
    Sweep(SweepArgs),
    /// Generate a planted-topic corpus in UCI bag-of-words format.
    Synth(SynthArgs),
    /// Fit a single model and export its matrices.
    Fit(FitArgs),
    /// Recompute the Jaccard artifacts from stored top-word files.
    Invariance(InvarianceArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Model {
    Plsa,
    Vlda,
    LdaGs,
    Glda,
}

impl From<Model> for ModelKind {
    fn from(m: Model) -> Self {
        match m {
            Model::Plsa => ModelKind::Plsa,
            Model::Vlda => ModelKind::Vlda,
            Model::LdaGs => ModelKind::LdaGs,
            Model::Glda => ModelKind::Glda,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    /// One document per line.
    Text,
    /// UCI docword file; needs --vocab.
    Uci,
}

#[derive(Args)]
struct CorpusArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    /// Vocabulary file for --format uci, one word per line.
    #[arg(long)]
    vocab: Option<PathBuf>,
    /// Words to drop, one per line (text format only).
    #[arg(long)]
    stopwords: Option<PathBuf>,
}

impl CorpusArgs {
    fn load(&self) -> Result<Corpus> {
        Ok(match self.format {
            Format::Text => load_plain_text(&self.input, self.stopwords.as_deref())?,
            Format::Uci => {
                let vocab = self.vocab.as_deref().ok_or("--format uci requires --vocab")?;
                if self.stopwords.is_some() {
                    return Err("--stopwords only applies to --format text".into());
                }
                load_uci_bow(&self.input, vocab)?
            }
        })
    }
}

#[derive(Args)]
struct SamplerArgs {
    /// Document–topic smoothing [default: 50/T].
    #[arg(long)]
    alpha: Option<f64>,
    /// Topic–word smoothing [default: 0.01].
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long, default_value_t = 100)]
    iterations: usize,
    /// GLDA window half-width.
    #[arg(long, default_value_t = 1)]
    glda_region: usize,
    /// Gibbs samplers take the most probable topic instead of sampling.
    #[arg(long)]
    argmax: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl SamplerArgs {
    fn selection(&self) -> TopicSelection {
        if self.argmax {
            TopicSelection::Argmax
        } else {
            TopicSelection::Sample
        }
    }
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, value_enum)]
    model: Model,
    #[command(flatten)]
    corpus: CorpusArgs,
    #[arg(long)]
    t_min: usize,
    #[arg(long)]
    t_max: usize,
    #[arg(long, default_value_t = 2)]
    t_step: usize,
    #[arg(long, default_value_t = 3)]
    runs: usize,
    #[command(flatten)]
    sampler: SamplerArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    topics: usize,
    #[arg(long)]
    vocab: usize,
    #[arg(long)]
    docs: usize,
    #[arg(long)]
    doc_len: usize,
    #[arg(long, default_value_t = 0.1)]
    alpha: f64,
    #[arg(long, default_value_t = 0.05)]
    beta: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct FitArgs {
    #[arg(long, value_enum)]
    model: Model,
    #[command(flatten)]
    corpus: CorpusArgs,
    #[arg(long)]
    topics: usize,
    #[command(flatten)]
    sampler: SamplerArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct InvarianceArgs {
    /// Directory holding top_words_T{T}.txt files.
    #[arg(long)]
    dir: PathBuf,
    /// Output directory [default: --dir].
    #[arg(long)]
    out: Option<PathBuf>,
}

fn sweep(args: SweepArgs) -> Result<()> {
    let corpus = args.corpus.load()?;
    let s = &args.sampler;
    let config = SweepConfig {
        t_step: args.t_step,
        runs: args.runs,
        base_seed: s.seed,
        alpha: s.alpha,
        beta: s.beta,
        iterations: s.iterations,
        glda_region: s.glda_region,
        selection: s.selection(),
        ..SweepConfig::new(args.model.into(), args.t_min, args.t_max)
    };
    let report = run_sweep(&corpus, &config)?;
    let files = emit_report(&report, &args.out)?;

    let skipped = report.cells.iter().filter(|c| c.point.is_none()).count();
    match report.argmin_renyi {
        Some(t) => println!("renyi minimum at T={t}"),
        None => println!("no non-degenerate topic count"),
    }
    if skipped > 0 {
        println!("{skipped} degenerate cells recorded in manifest.json");
    }
    println!("wrote {} files to {}", files.len(), args.out.display());
    Ok(())
}

fn synth(args: SynthArgs) -> Result<()> {
    let params = SynthParams {
        topics: args.topics,
        words: args.vocab,
        docs: args.docs,
        doc_len: args.doc_len,
        alpha: args.alpha,
        beta: args.beta,
        seed: args.seed,
    };
    let (corpus, phi) = generate_synthetic(&params)?;
    fs::create_dir_all(&args.out)?;
    corpus.write_uci(&args.out.join("docword.txt"), &args.out.join("vocab.txt"))?;
    phi.write_csv(&args.out.join("true_phi.csv"))?;
    println!(
        "{} documents, {} words, {} tokens written to {}",
        corpus.num_docs(),
        corpus.vocab_size(),
        corpus.total_tokens(),
        args.out.display()
    );
    Ok(())
}

fn write_trace(trace: &[f64], path: &Path) -> Result<()> {
    let mut out = std::io::BufWriter::new(fs::File::create(path)?);
    writeln!(out, "iteration,objective")?;
    for (i, v) in trace.iter().enumerate() {
        writeln!(out, "{},{v}", i + 1)?;
    }
    out.flush()?;
    Ok(())
}

fn fit_one(args: FitArgs) -> Result<()> {
    let corpus = args.corpus.load()?;
    let s = &args.sampler;
    let mut config = ModelConfig::new(args.model.into(), args.topics)
        .with_seed(s.seed)
        .with_iterations(s.iterations)
        .with_region(s.glda_region);
    if let Some(a) = s.alpha {
        config.alpha = a;
    }
    if let Some(b) = s.beta {
        config.beta = b;
    }
    config.selection = s.selection();

    let result = fit(&corpus, &config)?;
    fs::create_dir_all(&args.out)?;
    result.phi.write_csv(&args.out.join("phi.csv"))?;
    result.theta.write_csv(&args.out.join("theta.csv"))?;
    if !result.loglik_trace.is_empty() {
        write_trace(&result.loglik_trace, &args.out.join("loglik_trace.csv"))?;
    }
    if args.topics >= 2 {
        match evaluate_solution(&result.phi) {
            Ok(p) => println!(
                "T={} n_high={} renyi={} tsallis={} shannon={}",
                p.topics, p.n_high, p.renyi, p.tsallis, p.shannon
            ),
            Err(e) => println!("entropy not available: {e}"),
        }
    }
    println!("wrote phi.csv and theta.csv to {}", args.out.display());
    Ok(())
}

fn invariance(args: InvarianceArgs) -> Result<()> {
    let lists = load_top_word_files(&args.dir)?;
    if lists.is_empty() {
        return Err(format!("no top_words_T*.txt files in {}", args.dir.display()).into());
    }
    let out = args.out.unwrap_or_else(|| args.dir.clone());
    fs::create_dir_all(&out)?;
    let matrix = invariance_from_word_lists(&lists);
    write_invariance(&matrix, &out)?;
    println!(
        "{0}x{0} jaccard matrix written to {1}",
        matrix.len(),
        out.display()
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Sweep(a) => sweep(a),
        Command::Synth(a) => synth(a),
        Command::Fit(a) => fit_one(a),
        Command::Invariance(a) => invariance(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
