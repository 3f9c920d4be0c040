//! Training wordlist ingestion and word-vector loading.

use std::collections::HashMap;
use std::io::{BufRead, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::util::open_text;

/// NFC-normalize a word, optionally lowercasing. Applied to every word at
/// ingestion, in all loaders, so string comparisons are consistent.
pub fn normalize_word(raw: &str, lowercase: bool) -> String {
    let nfc = icu_normalizer::ComposingNormalizer::new_nfc();
    let s = nfc.normalize(raw);
    if lowercase {
        s.to_lowercase()
    } else {
        s.into_owned()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct IngestOptions {
    pub lowercase: bool,
    /// Drop tokens containing non-alphabetic characters before truncation.
    pub filter_nonalpha: bool,
}

impl Default for IngestOptions {
    fn default() -> Self {
        IngestOptions {
            lowercase: true,
            filter_nonalpha: true,
        }
    }
}

/// Frequency-ranked vocabulary. Entries are sorted by count descending,
/// ties broken lexicographically; `index` maps word to rank.
#[derive(Debug, Clone)]
pub struct Vocabulary {
    entries: Vec<(String, u64)>,
    index: HashMap<String, usize>,
    total_tokens: u64,
}

impl Vocabulary {
    /// Rank, dedupe and truncate raw (word, count) pairs. Counts of duplicate
    /// surface forms are summed before ranking.
    pub fn from_counts(raw: impl IntoIterator<Item = (String, u64)>, top_k: usize) -> Result<Vocabulary> {
        let mut merged: HashMap<String, u64> = HashMap::new();
        for (w, c) in raw {
            *merged.entry(w).or_insert(0) += c;
        }
        let mut entries: Vec<(String, u64)> = merged.into_iter().collect();
        entries.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        entries.truncate(top_k);
        if entries.is_empty() {
            return Err(Error::EmptyVocabulary("no entries after ingestion".into()));
        }
        let index = entries
            .iter()
            .enumerate()
            .map(|(i, (w, _))| (w.clone(), i))
            .collect();
        let total_tokens = entries.iter().map(|(_, c)| c).sum();
        Ok(Vocabulary {
            entries,
            index,
            total_tokens,
        })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, word: &str) -> bool {
        self.index.contains_key(word)
    }

    /// Count of `word`, 0 if absent.
    pub fn count(&self, word: &str) -> u64 {
        self.index.get(word).map_or(0, |&i| self.entries[i].1)
    }

    pub fn rank(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn total_tokens(&self) -> u64 {
        self.total_tokens
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(w, _)| w.as_str())
    }

    pub fn entries(&self) -> &[(String, u64)] {
        &self.entries
    }

    pub fn write_tsv(&self, mut w: impl Write) -> std::io::Result<()> {
        for (word, count) in &self.entries {
            writeln!(w, "{word}\t{count}")?;
        }
        Ok(())
    }
}

/// Load a `word<TAB>count` wordlist, keeping the `top_k` highest-count words.
/// `#`-prefixed lines are comments; blank lines are ignored; `.gz` paths are
/// decompressed transparently.
pub fn load_wordlist(path: &Path, top_k: usize, opts: IngestOptions) -> Result<Vocabulary> {
    if top_k == 0 {
        return Err(Error::Config("top_k must be >= 1".into()));
    }
    let reader = open_text(path)?;
    let mut raw: Vec<(String, u64)> = Vec::new();
    for (no, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        let line = line.trim_end_matches(['\r', '\n']);
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parse_err = |msg: &str| Error::Parse {
            path: path.to_path_buf(),
            line: no + 1,
            msg: msg.to_string(),
        };
        let mut fields = line.split('\t');
        let word = fields.next().unwrap_or("");
        let count = fields
            .next()
            .ok_or_else(|| parse_err("missing tab separator"))?;
        if fields.next().is_some() {
            return Err(parse_err("too many fields"));
        }
        if word.is_empty() {
            return Err(parse_err("empty word"));
        }
        if word.chars().any(|c| c.is_whitespace()) {
            return Err(parse_err("word contains whitespace"));
        }
        let count: u64 = count
            .parse()
            .map_err(|_| parse_err(&format!("non-numeric count `{count}`")))?;
        if count == 0 {
            return Err(parse_err("count must be positive"));
        }
        let word = normalize_word(word, opts.lowercase);
        if opts.filter_nonalpha && !word.chars().all(|c| c.is_alphabetic()) {
            continue;
        }
        raw.push((word, count));
    }
    if raw.is_empty() {
        return Err(Error::EmptyVocabulary(format!("{}", path.display())));
    }
    Vocabulary::from_counts(raw, top_k)
}

/// Dense word vectors in word2vec text format.
#[derive(Debug, Clone, Default)]
pub struct WordVectors {
    dim: usize,
    table: HashMap<String, Vec<f64>>,
}

impl WordVectors {
    /// An empty store: every similarity lookup falls back to the OOV path.
    pub fn empty() -> WordVectors {
        WordVectors::default()
    }

    pub fn from_table(dim: usize, table: HashMap<String, Vec<f64>>) -> WordVectors {
        debug_assert!(table.values().all(|v| v.len() == dim));
        WordVectors { dim, table }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    pub fn get(&self, word: &str) -> Option<&[f64]> {
        self.table.get(word).map(|v| v.as_slice())
    }
}

/// Load a word2vec text file: optional `N dim` header, then
/// `word v1 ... v_dim` per line. With `retain_all = false` only vectors for
/// vocabulary words are kept.
pub fn load_vectors(
    path: &Path,
    vocab: &Vocabulary,
    lowercase: bool,
    retain_all: bool,
) -> Result<WordVectors> {
    let reader = open_text(path)?;
    let mut dim: Option<usize> = None;
    let mut table: HashMap<String, Vec<f64>> = HashMap::new();
    for (no, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        let parse_err = |msg: String| Error::Parse {
            path: path.to_path_buf(),
            line: no + 1,
            msg,
        };
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.is_empty() {
            continue;
        }
        if no == 0 && tokens.len() == 2 {
            if let (Ok(_n), Ok(d)) = (tokens[0].parse::<u64>(), tokens[1].parse::<usize>()) {
                dim = Some(d);
                continue;
            }
        }
        if tokens.len() < 2 {
            return Err(parse_err("expected `word v1 ... v_dim`".into()));
        }
        let word = normalize_word(tokens[0], lowercase);
        let values: Vec<f64> = tokens[1..]
            .iter()
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|_| parse_err(format!("non-numeric component `{t}`")))
            })
            .collect::<Result<_>>()?;
        if values.iter().any(|v| !v.is_finite()) {
            return Err(parse_err("non-finite vector component".into()));
        }
        match dim {
            None => dim = Some(values.len()),
            Some(d) if d != values.len() => {
                return Err(parse_err(format!(
                    "vector of length {} under dimension {}",
                    values.len(),
                    d
                )))
            }
            _ => {}
        }
        if retain_all || vocab.contains(&word) {
            table.insert(word, values);
        }
    }
    Ok(WordVectors {
        dim: dim.unwrap_or(0),
        table,
    })
}

/// Standard cosine similarity. Returns `Ok(None)` when either vector is
/// all-zero (undefined direction; callers map this to the OOV indicator).
pub fn cosine(v1: &[f64], v2: &[f64]) -> Result<Option<f64>> {
    if v1.len() != v2.len() {
        return Err(Error::DimensionMismatch(format!(
            "cosine of lengths {} and {}",
            v1.len(),
            v2.len()
        )));
    }
    let mut dot = 0.0;
    let mut n1 = 0.0;
    let mut n2 = 0.0;
    for (a, b) in v1.iter().zip(v2) {
        dot += a * b;
        n1 += a * a;
        n2 += b * b;
    }
    if n1 == 0.0 || n2 == 0.0 {
        return Ok(None);
    }
    Ok(Some(dot / (n1.sqrt() * n2.sqrt())))
}

#[cfg(test)]
mod tests {
    use super::*;


    fn tmp_file(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn truncates_to_top_k() {
        let f = tmp_file("walks\t10\nwalk\t7\ntalked\t2\n");
        let v = load_wordlist(f.path(), 2, IngestOptions::default()).unwrap();
        assert_eq!(v.entries(), &[("walks".to_string(), 10), ("walk".to_string(), 7)]);
        assert_eq!(v.total_tokens(), 17);
    }

    #[test]
    fn duplicate_surface_forms_are_summed_before_ranking() {
        let f = tmp_file("run\t3\nrun\t4\n");
        let v = load_wordlist(f.path(), 10, IngestOptions::default()).unwrap();
        assert_eq!(v.entries(), &[("run".to_string(), 7)]);
    }

    #[test]
    fn ties_break_lexicographically() {
        let f = tmp_file("zebra\t5\napple\t5\nmango\t7\n");
        let v = load_wordlist(f.path(), 2, IngestOptions::default()).unwrap();
        assert_eq!(v.rank("mango"), Some(0));
        assert_eq!(v.rank("apple"), Some(1));
        assert_eq!(v.rank("zebra"), None);
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let f = tmp_file("# header\n\ncat\t3\n");
        let v = load_wordlist(f.path(), 10, IngestOptions::default()).unwrap();
        assert_eq!(v.len(), 1);
    }

    #[test]
    fn malformed_lines_report_line_numbers() {
        let f = tmp_file("ok\t1\nbroken_line\n");
        let err = load_wordlist(f.path(), 10, IngestOptions::default()).unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected error {other:?}"),
        }

        let f = tmp_file("word\tNaN\n");
        assert!(load_wordlist(f.path(), 10, IngestOptions::default()).is_err());
    }

    #[test]
    fn empty_file_is_an_empty_vocabulary_error() {
        let f = tmp_file("# nothing\n");
        match load_wordlist(f.path(), 10, IngestOptions::default()).unwrap_err() {
            Error::EmptyVocabulary(_) => {}
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn nonalpha_filter_applies_before_truncation() {
        let f = tmp_file("x1\t100\nabc\t5\ndef\t4\n");
        let v = load_wordlist(f.path(), 2, IngestOptions::default()).unwrap();
        assert_eq!(v.len(), 2);
        assert!(v.contains("abc") && v.contains("def"));
        let keep_all = IngestOptions {
            filter_nonalpha: false,
            ..IngestOptions::default()
        };
        let v = load_wordlist(f.path(), 2, keep_all).unwrap();
        assert!(v.contains("x1"));
    }

    #[test]
    fn words_are_nfc_normalized_and_lowercased() {
        // "é" decomposed vs composed must collapse to one entry.
        let f = tmp_file("cafe\u{0301}\t2\ncaf\u{00e9}\t3\nDOG\t1\n");
        let v = load_wordlist(f.path(), 10, IngestOptions::default()).unwrap();
        assert_eq!(v.count("caf\u{00e9}"), 5);
        assert!(v.contains("dog"));
    }

    #[test]
    fn load_is_idempotent_on_serialized_output() {
        let f = tmp_file("walks\t10\nwalk\t7\ntalked\t2\n");
        let v = load_wordlist(f.path(), 3, IngestOptions::default()).unwrap();
        let mut buf = Vec::new();
        v.write_tsv(&mut buf).unwrap();
        let f2 = tmp_file(&String::from_utf8(buf).unwrap());
        let v2 = load_wordlist(f2.path(), 3, IngestOptions::default()).unwrap();
        assert_eq!(v.entries(), v2.entries());
    }

    #[test]
    fn ranking_is_monotone_in_count() {
        let f = tmp_file("a\t5\nbb\t9\nccc\t1\ndddd\t9\n");
        let v = load_wordlist(f.path(), 10, IngestOptions::default()).unwrap();
        let e = v.entries();
        for i in 1..e.len() {
            assert!(e[i - 1].1 >= e[i].1);
        }
    }

    #[test]
    fn gzip_paths_are_transparent() {
        use flate2::write::GzEncoder;
        use flate2::Compression;
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("words.tsv.gz");
        let mut enc = GzEncoder::new(std::fs::File::create(&path).unwrap(), Compression::default());
        enc.write_all(b"cat\t3\ndog\t2\n").unwrap();
        enc.finish().unwrap();
        let v = load_wordlist(&path, 10, IngestOptions::default()).unwrap();
        assert_eq!(v.len(), 2);
    }

    #[test]
    fn vector_file_with_header_parses() {
        let f = tmp_file("2 3\na 1 0 0\nb 0 1 0\n");
        let vocabf = tmp_file("a\t1\nb\t1\n");
        let vocab = load_wordlist(vocabf.path(), 10, IngestOptions::default()).unwrap();
        let vs = load_vectors(f.path(), &vocab, true, true).unwrap();
        assert_eq!(vs.dim(), 3);
        assert_eq!(vs.len(), 2);
        assert_eq!(vs.get("a"), Some(&[1.0, 0.0, 0.0][..]));
    }

    #[test]
    fn vector_dimension_mismatch_is_a_format_error() {
        let f = tmp_file("2 3\na 1 0 0\nb 0 1 0 9\n");
        let vocabf = tmp_file("a\t1\n");
        let vocab = load_wordlist(vocabf.path(), 10, IngestOptions::default()).unwrap();
        assert!(load_vectors(f.path(), &vocab, true, true).is_err());
    }

    #[test]
    fn retain_vocab_drops_other_words() {
        let f = tmp_file("a 1 0\nb 0 1\nzzz 1 1\n");
        let vocabf = tmp_file("a\t1\nb\t1\n");
        let vocab = load_wordlist(vocabf.path(), 10, IngestOptions::default()).unwrap();
        let vs = load_vectors(f.path(), &vocab, true, false).unwrap();
        assert_eq!(vs.len(), 2);
        assert!(vs.get("zzz").is_none());
    }

    #[test]
    fn cosine_examples() {
        assert_eq!(cosine(&[1.0, 0.0], &[1.0, 0.0]).unwrap(), Some(1.0));
        assert_eq!(cosine(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), Some(0.0));
        let got = cosine(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]).unwrap().unwrap();
        let expect = 32.0 / (14f64.sqrt() * 77f64.sqrt());
        assert!((got - expect).abs() < 1e-15);
    }

    #[test]
    fn cosine_zero_vector_is_undefined() {
        assert_eq!(cosine(&[0.0, 0.0], &[1.0, 0.0]).unwrap(), None);
        assert!(cosine(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn cosine_self_is_one_for_nonzero_vectors() {
        let vs = [
            vec![0.1, -0.4, 2.0],
            vec![1e-8, 3.0],
            vec![-5.0],
            vec![0.25, 0.25, 0.25, 0.25],
        ];
        for v in &vs {
            let c = cosine(v, v).unwrap().unwrap();
            assert!((c - 1.0).abs() < 1e-12);
        }
    }
}
