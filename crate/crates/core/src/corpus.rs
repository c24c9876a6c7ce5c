//! Corpus ingestion: plain text (one document per line) and the UCI
//! bag-of-words format.
//!
//! A [`Corpus`] is immutable once built. Token order inside each document is
//! preserved because the granulated sampler works on windows of adjacent
//! tokens.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("corpus has no documents after filtering")]
    Empty,
    #[error("{path}:{line}: {msg}")]
    Format { path: PathBuf, line: usize, msg: String },
    #[error("duplicate word {0:?} in vocabulary")]
    DuplicateWord(String),
    #[error("document {doc} has token id {token} outside vocabulary of size {size}")]
    TokenOutOfRange { doc: usize, token: usize, size: usize },
    #[error("document {0} has no tokens")]
    EmptyDocument(usize),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CorpusError + '_ {
    move |source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Ordered list of unique words; a word's id is its position.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Vocabulary {
    words: Vec<String>,
    index: HashMap<String, usize>,
}

impl Vocabulary {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_words<I, S>(words: I) -> Result<Self, CorpusError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut vocab = Self::new();
        for w in words {
            let w = w.into();
            if vocab.index.contains_key(&w) {
                return Err(CorpusError::DuplicateWord(w));
            }
            vocab.intern(&w);
        }
        Ok(vocab)
    }

    /// Returns the id of `word`, adding it at the end if unseen.
    pub fn intern(&mut self, word: &str) -> usize {
        if let Some(&id) = self.index.get(word) {
            return id;
        }
        let id = self.words.len();
        self.words.push(word.to_owned());
        self.index.insert(word.to_owned(), id);
        id
    }

    pub fn id(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn word(&self, id: usize) -> Option<&str> {
        self.words.get(id).map(String::as_str)
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub id: usize,
    pub tokens: Vec<usize>,
}

impl Document {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    documents: Vec<Document>,
    vocabulary: Vocabulary,
    total_tokens: usize,
}

impl Corpus {
    /// Builds a corpus from token-id sequences. Document ids are assigned in
    /// order; every document must be nonempty and every id in range.
    pub fn new(vocabulary: Vocabulary, docs: Vec<Vec<usize>>) -> Result<Self, CorpusError> {
        if docs.is_empty() {
            return Err(CorpusError::Empty);
        }
        let size = vocabulary.len();
        let mut total_tokens = 0;
        let mut documents = Vec::with_capacity(docs.len());
        for (id, tokens) in docs.into_iter().enumerate() {
            if tokens.is_empty() {
                return Err(CorpusError::EmptyDocument(id));
            }
            if let Some(&token) = tokens.iter().find(|&&t| t >= size) {
                return Err(CorpusError::TokenOutOfRange { doc: id, token, size });
            }
            total_tokens += tokens.len();
            documents.push(Document { id, tokens });
        }
        Ok(Self {
            documents,
            vocabulary,
            total_tokens,
        })
    }

    /// Convenience constructor from word strings; the vocabulary is built in
    /// first-occurrence order.
    pub fn from_word_docs<D, W>(docs: D) -> Result<Self, CorpusError>
    where
        D: IntoIterator,
        D::Item: IntoIterator<Item = W>,
        W: AsRef<str>,
    {
        let mut vocab = Vocabulary::new();
        let docs: Vec<Vec<usize>> = docs
            .into_iter()
            .map(|d| d.into_iter().map(|w| vocab.intern(w.as_ref())).collect())
            .collect();
        Self::new(vocab, docs)
    }

    pub fn documents(&self) -> &[Document] {
        &self.documents
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocabulary
    }

    pub fn num_docs(&self) -> usize {
        self.documents.len()
    }

    pub fn vocab_size(&self) -> usize {
        self.vocabulary.len()
    }

    pub fn total_tokens(&self) -> usize {
        self.total_tokens
    }

    /// Corpus-wide frequency of every word id.
    pub fn word_frequencies(&self) -> Vec<usize> {
        let mut freq = vec![0; self.vocab_size()];
        for doc in &self.documents {
            for &w in &doc.tokens {
                freq[w] += 1;
            }
        }
        freq
    }

    /// Sparse per-document counts `(word, n_wd)` sorted by word id.
    pub fn doc_word_counts(&self) -> Vec<Vec<(usize, usize)>> {
        self.documents
            .iter()
            .map(|doc| {
                let mut counts = BTreeMap::new();
                for &w in &doc.tokens {
                    *counts.entry(w).or_insert(0) += 1;
                }
                counts.into_iter().collect()
            })
            .collect()
    }

    /// Writes the corpus in UCI bag-of-words format. Word order inside a
    /// document is not representable and is lost.
    pub fn write_uci(&self, docword_path: &Path, vocab_path: &Path) -> Result<(), CorpusError> {
        let counts = self.doc_word_counts();
        let nnz: usize = counts.iter().map(Vec::len).sum();

        let file = fs::File::create(docword_path).map_err(io_err(docword_path))?;
        let mut out = BufWriter::new(file);
        let write = |out: &mut BufWriter<fs::File>| -> std::io::Result<()> {
            writeln!(out, "{}", self.num_docs())?;
            writeln!(out, "{}", self.vocab_size())?;
            writeln!(out, "{nnz}")?;
            for (d, row) in counts.iter().enumerate() {
                for &(w, c) in row {
                    writeln!(out, "{} {} {}", d + 1, w + 1, c)?;
                }
            }
            out.flush()
        };
        write(&mut out).map_err(io_err(docword_path))?;

        let mut text = String::new();
        for w in self.vocabulary.words() {
            text.push_str(w);
            text.push('\n');
        }
        fs::write(vocab_path, text).map_err(io_err(vocab_path))
    }
}

/// Lowercases and splits on runs of non-alphanumeric characters, dropping
/// tokens shorter than two characters.
pub fn tokenize(line: &str) -> impl Iterator<Item = String> + '_ {
    line.split(|c: char| !c.is_alphanumeric())
        .filter(|t| t.chars().count() >= 2)
        .map(str::to_lowercase)
}

fn read_to_string(path: &Path) -> Result<String, CorpusError> {
    fs::read_to_string(path).map_err(io_err(path))
}

/// Loads a UTF-8 file with one document per line.
pub fn load_plain_text(path: &Path, stopwords: Option<&Path>) -> Result<Corpus, CorpusError> {
    let stop: HashSet<String> = match stopwords {
        Some(p) => read_to_string(p)?
            .lines()
            .map(|l| l.trim().to_lowercase())
            .filter(|l| !l.is_empty())
            .collect(),
        None => HashSet::new(),
    };
    let text = read_to_string(path)?;

    let mut vocab = Vocabulary::new();
    let mut docs = Vec::new();
    for line in text.lines() {
        let tokens: Vec<usize> = tokenize(line)
            .filter(|t| !stop.contains(t))
            .map(|t| vocab.intern(&t))
            .collect();
        if !tokens.is_empty() {
            docs.push(tokens);
        }
    }
    Corpus::new(vocab, docs)
}

/// Loads the UCI bag-of-words format: three header lines (D, W, NNZ)
/// followed by NNZ lines `docID wordID count`, all 1-based. Each triple
/// expands into `count` consecutive tokens. Documents without any entry are
/// dropped and the remaining ones renumbered.
pub fn load_uci_bow(docword_path: &Path, vocab_path: &Path) -> Result<Corpus, CorpusError> {
    let vocab_text = read_to_string(vocab_path)?;
    let vocab = Vocabulary::from_words(
        vocab_text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .map(str::to_owned),
    )?;

    let text = read_to_string(docword_path)?;
    let fmt = |line: usize, msg: String| CorpusError::Format {
        path: docword_path.to_path_buf(),
        line,
        msg,
    };

    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    let mut header = [0usize; 3];
    for (slot, name) in header.iter_mut().zip(["D", "W", "NNZ"]) {
        let (ln, l) = lines
            .next()
            .ok_or_else(|| fmt(0, format!("missing header field {name}")))?;
        *slot = l
            .parse()
            .map_err(|_| fmt(ln, format!("header field {name} is not a count: {l:?}")))?;
    }
    let [num_docs, num_words, nnz] = header;
    if num_words != vocab.len() {
        return Err(fmt(
            2,
            format!("header W={num_words} but vocabulary has {} words", vocab.len()),
        ));
    }

    let mut docs: Vec<Vec<usize>> = vec![Vec::new(); num_docs];
    let mut seen = 0usize;
    for (ln, l) in lines {
        let fields: Vec<&str> = l.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(fmt(ln, format!("expected 3 fields, got {}", fields.len())));
        }
        let parse = |s: &str, what: &str| {
            s.parse::<i64>()
                .map_err(|_| fmt(ln, format!("{what} is not an integer: {s:?}")))
        };
        let (d, w, c) = (
            parse(fields[0], "docID")?,
            parse(fields[1], "wordID")?,
            parse(fields[2], "count")?,
        );
        if d < 1 || d as usize > num_docs {
            return Err(fmt(ln, format!("docID {d} outside 1..={num_docs}")));
        }
        if w < 1 || w as usize > vocab.len() {
            return Err(fmt(ln, format!("wordID {w} outside 1..={}", vocab.len())));
        }
        if c <= 0 {
            return Err(fmt(ln, format!("count must be positive, got {c}")));
        }
        let doc = &mut docs[d as usize - 1];
        doc.extend(std::iter::repeat_n(w as usize - 1, c as usize));
        seen += 1;
    }
    if seen != nnz {
        return Err(fmt(0, format!("header NNZ={nnz} but found {seen} entries")));
    }

    docs.retain(|d| !d.is_empty());
    Corpus::new(vocab, docs)
}
