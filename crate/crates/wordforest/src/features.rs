//! Sparse feature extraction for (word, candidate) pairs.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use crate::affixes::AffixSet;
use crate::candidates::{boundary_in_child, Candidate, DerivationType};
use crate::config::RunConfig;
use crate::corpus::{cosine, Vocabulary, WordVectors};
use crate::error::{Error, Result};
use crate::pipeline::Forest;

/// Feature-name interner. Grows while unfrozen; once frozen, unseen names are
/// dropped so the coordinate system of theta stays fixed across rounds.
#[derive(Debug, Clone, Default)]
pub struct FeatureIndex {
    names: Vec<String>,
    ids: HashMap<String, u32>,
    frozen: bool,
}

impl FeatureIndex {
    pub fn new() -> FeatureIndex {
        FeatureIndex::default()
    }

    pub fn from_names(names: Vec<String>) -> FeatureIndex {
        let ids = names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), i as u32))
            .collect();
        FeatureIndex {
            names,
            ids,
            frozen: true,
        }
    }

    pub fn intern(&mut self, name: &str) -> Option<u32> {
        if let Some(&id) = self.ids.get(name) {
            return Some(id);
        }
        if self.frozen {
            return None;
        }
        let id = self.names.len() as u32;
        self.names.push(name.to_string());
        self.ids.insert(name.to_string(), id);
        Some(id)
    }

    pub fn id(&self, name: &str) -> Option<u32> {
        self.ids.get(name).copied()
    }

    pub fn name(&self, id: u32) -> &str {
        &self.names[id as usize]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn freeze(&mut self) {
        self.frozen = true;
    }

    pub fn is_frozen(&self) -> bool {
        self.frozen
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }
}

/// Sparse vector with strictly increasing ids and finite nonzero values.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseVector(Vec<(u32, f64)>);

impl SparseVector {
    /// Sorts, merges duplicate ids by summation, and drops zeros.
    pub fn from_pairs(mut pairs: Vec<(u32, f64)>) -> SparseVector {
        pairs.sort_by_key(|&(id, _)| id);
        let mut out: Vec<(u32, f64)> = Vec::with_capacity(pairs.len());
        for (id, v) in pairs {
            debug_assert!(v.is_finite());
            match out.last_mut() {
                Some((last, acc)) if *last == id => *acc += v,
                _ => out.push((id, v)),
            }
        }
        out.retain(|&(_, v)| v != 0.0);
        SparseVector(out)
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.0.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn dot(&self, dense: &[f64]) -> f64 {
        let mut acc = 0.0;
        for &(id, v) in &self.0 {
            acc += dense[id as usize] * v;
        }
        acc
    }

    /// Scaled accumulation: dense += scale * self.
    pub fn add_scaled_into(&self, dense: &mut [f64], scale: f64) {
        for &(id, v) in &self.0 {
            dense[id as usize] += scale * v;
        }
    }
}

/// How many vocabulary words strip down to each parent string.
#[derive(Debug, Clone, Default)]
pub struct SiblingTable(HashMap<String, u64>);

impl SiblingTable {
    pub fn empty() -> SiblingTable {
        SiblingTable::default()
    }

    pub fn count(&self, parent: &str) -> u64 {
        self.0.get(parent).copied().unwrap_or(0)
    }

    /// Siblings of a word derived from `parent`: the other words stripping to
    /// the same parent, floored at zero.
    pub fn siblings(&self, parent: &str) -> u64 {
        self.count(parent).saturating_sub(1)
    }

    /// Rebuilt each round after the first from the decoded forest: children
    /// per chosen parent, STOP edges excluded.
    pub fn from_forest(forest: &Forest) -> SiblingTable {
        let mut t = HashMap::new();
        for (_, edge) in forest.iter() {
            if edge.dtype != DerivationType::Stop {
                *t.entry(edge.parent.clone()).or_insert(0) += 1;
            }
        }
        SiblingTable(t)
    }

    pub fn write_tsv(&self, mut w: impl Write) -> std::io::Result<()> {
        let mut rows: Vec<(&String, &u64)> = self.0.iter().collect();
        rows.sort();
        for (parent, count) in rows {
            writeln!(w, "{parent}\t{count}")?;
        }
        Ok(())
    }

    pub fn read_tsv(r: impl BufRead) -> Result<SiblingTable> {
        let mut t = HashMap::new();
        for (no, line) in r.lines().enumerate() {
            let line = line.map_err(|e| Error::Io {
                path: "<sibling>".into(),
                source: e,
            })?;
            if line.is_empty() {
                continue;
            }
            let (parent, count) = line.split_once('\t').ok_or_else(|| Error::Parse {
                path: "<sibling>".into(),
                line: no + 1,
                msg: "expected `parent<TAB>count`".into(),
            })?;
            let count: u64 = count.parse().map_err(|_| Error::Parse {
                path: "<sibling>".into(),
                line: no + 1,
                msg: format!("bad count `{count}`"),
            })?;
            t.insert(parent.to_string(), count);
        }
        Ok(SiblingTable(t))
    }
}

/// Static sibling table for round one, before any forest exists: strip each
/// live suffix/prefix from every vocabulary word and count the parents.
pub fn build_sibling_table(vocab: &Vocabulary, affixes: &AffixSet, min_stem: usize) -> SiblingTable {
    let mut t: HashMap<String, u64> = HashMap::new();
    for w in vocab.words() {
        let n = w.chars().count();
        for (_, s) in affixes.live_suffixes() {
            if let Some(stem) = w.strip_suffix(s) {
                if !stem.is_empty() && n - s.chars().count() >= min_stem {
                    *t.entry(stem.to_string()).or_insert(0) += 1;
                }
            }
        }
        for (_, p) in affixes.live_prefixes() {
            if let Some(rest) = w.strip_prefix(p) {
                if !rest.is_empty() && n - p.chars().count() >= min_stem {
                    *t.entry(rest.to_string()).or_insert(0) += 1;
                }
            }
        }
    }
    SiblingTable(t)
}

#[derive(Debug, Clone, Copy)]
pub struct FeatureConfig {
    pub sibl: bool,
    pub comp: bool,
    /// Bin width for log(1 + count) frequency features.
    pub bin_width: f64,
    pub bin_cap: u32,
}

impl FeatureConfig {
    pub fn from_run(cfg: &RunConfig) -> FeatureConfig {
        FeatureConfig {
            sibl: cfg.sibl,
            comp: cfg.comp,
            bin_width: cfg.freq_bin_width,
            bin_cap: cfg.freq_bin_cap,
        }
    }
}

pub struct FeatureContext<'a> {
    pub vocab: &'a Vocabulary,
    pub vectors: &'a WordVectors,
    pub affixes: &'a AffixSet,
    pub siblings: &'a SiblingTable,
}

fn first2(chars: &[char]) -> String {
    let mut s = String::new();
    s.push(*chars.first().unwrap_or(&'^'));
    s.push(*chars.get(1).unwrap_or(&'$'));
    s
}

fn last2(chars: &[char]) -> String {
    let n = chars.len();
    let mut s = String::new();
    s.push(if n >= 2 { chars[n - 2] } else { '^' });
    s.push(if n >= 1 { chars[n - 1] } else { '^' });
    s
}

/// Map a (word, candidate) pair to its sparse feature vector. Pure: identical
/// inputs produce identical vectors. Unknown names under a frozen index are
/// dropped silently.
pub fn featurize(
    w: &str,
    z: &Candidate,
    ctx: &FeatureContext,
    cfg: &FeatureConfig,
    index: &mut FeatureIndex,
) -> SparseVector {
    debug_assert_eq!(w, z.child);
    let mut pairs: Vec<(u32, f64)> = Vec::with_capacity(12);
    let mut emit = |index: &mut FeatureIndex, name: &str, value: f64| {
        if value != 0.0 {
            if let Some(id) = index.intern(name) {
                pairs.push((id, value));
            }
        }
    };

    for &aid in &z.affix_ids {
        emit(index, &format!("affix={}", ctx.affixes.display(aid)), 1.0);
    }
    emit(index, &format!("dtype={}", z.dtype.as_str()), 1.0);

    let chars: Vec<char> = w.chars().collect();
    match boundary_in_child(z, ctx.affixes) {
        None => {
            emit(index, &format!("big_begin={}", first2(&chars)), 1.0);
            emit(index, &format!("big_end={}", last2(&chars)), 1.0);
        }
        Some(b) => {
            emit(index, &format!("big_l={}", last2(&chars[..b])), 1.0);
            emit(index, &format!("big_r={}", first2(&chars[b..])), 1.0);
        }
    }

    // Parent-side features describe the derivation to a different parent;
    // the STOP self-edge carries none of them (its word-identity signal lives
    // in the dtype indicator and the word-edge bigrams above).
    let bin = |count: u64| -> u32 {
        let x = (1.0 + count as f64).ln();
        ((x / cfg.bin_width).floor() as u32).min(cfg.bin_cap)
    };
    if z.dtype != DerivationType::Stop {
        match (ctx.vectors.get(w), ctx.vectors.get(&z.parent)) {
            (Some(a), Some(b)) => match cosine(a, b) {
                Ok(Some(c)) => emit(index, "cos", c),
                _ => emit(index, "cos_oov", 1.0),
            },
            _ => emit(index, "cos_oov", 1.0),
        }

        let parent_count = ctx.vocab.count(&z.parent);
        emit(index, &format!("freq_bin={}", bin(parent_count)), 1.0);
        if parent_count > 0 {
            emit(index, "parent_in_vocab", 1.0);
        }

        if cfg.sibl {
            let sib = ctx.siblings.siblings(&z.parent);
            emit(index, "sibl", (1.0 + sib as f64).ln());
        }
    }

    if cfg.comp && z.dtype.is_compound() {
        let (u, v) = match z.dtype {
            DerivationType::CompoundLeft => {
                (z.parent.as_str(), &w[z.parent.len()..])
            }
            _ => (&w[..w.len() - z.parent.len()], z.parent.as_str()),
        };
        let (cu, cv) = (ctx.vocab.count(u), ctx.vocab.count(v));
        if cu > 0 && cv > 0 {
            emit(index, "comp_both_in_vocab", 1.0);
        }
        emit(index, &format!("comp_min_bin={}", bin(cu.min(cv))), 1.0);
    }

    SparseVector::from_pairs(pairs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::affixes::{extract_affixes, ExtractOptions};
    use crate::candidates::{gen_candidates, CandidateConfig};
    use crate::corpus::Vocabulary;

    fn vocab(words: &[(&str, u64)]) -> Vocabulary {
        Vocabulary::from_counts(
            words.iter().map(|(w, c)| (w.to_string(), *c)),
            usize::MAX,
        )
        .unwrap()
    }

    fn cand_cfg() -> CandidateConfig {
        CandidateConfig {
            min_stem: 2,
            min_stem_compound: 3,
            comp: false,
            compound_require_both: true,
            delete_chars: Vec::new(),
            modify_pairs: Vec::new(),
            enable_repeat: false,
        }
    }

    fn feat_cfg() -> FeatureConfig {
        FeatureConfig {
            sibl: false,
            comp: false,
            bin_width: 1.0,
            bin_cap: 12,
        }
    }

    fn names_of(v: &SparseVector, index: &FeatureIndex) -> Vec<String> {
        v.iter().map(|(id, _)| index.name(id).to_string()).collect()
    }

    #[test]
    fn stop_features_use_word_edge_bigrams() {
        let v = vocab(&[("walks", 10), ("walk", 7)]);
        let affixes = extract_affixes(
            &v,
            &ExtractOptions { min_support: 1, ..ExtractOptions::default() },
        );
        let vectors = WordVectors::empty();
        let siblings = SiblingTable::empty();
        let ctx = FeatureContext { vocab: &v, vectors: &vectors, affixes: &affixes, siblings: &siblings };
        let mut index = FeatureIndex::new();
        let cands = gen_candidates("walks", &v, &affixes, &cand_cfg());
        let stop = featurize("walks", &cands[0], &ctx, &feat_cfg(), &mut index);
        let names = names_of(&stop, &index);
        assert!(names.contains(&"dtype=STOP".to_string()));
        assert!(names.contains(&"big_begin=wa".to_string()));
        assert!(names.contains(&"big_end=ks".to_string()));
        assert!(!names.iter().any(|n| n.starts_with("affix=")));
    }

    #[test]
    fn suffix_features_cover_affix_boundary_and_frequency() {
        let v = vocab(&[("walks", 10), ("walk", 7)]);
        let affixes = extract_affixes(
            &v,
            &ExtractOptions { min_support: 1, ..ExtractOptions::default() },
        );
        let vectors = WordVectors::empty();
        let siblings = SiblingTable::empty();
        let ctx = FeatureContext { vocab: &v, vectors: &vectors, affixes: &affixes, siblings: &siblings };
        let mut index = FeatureIndex::new();
        let cands = gen_candidates("walks", &v, &affixes, &cand_cfg());
        let suf = cands
            .iter()
            .find(|c| c.dtype == DerivationType::Suffix && c.parent == "walk")
            .unwrap();
        let fv = featurize("walks", suf, &ctx, &feat_cfg(), &mut index);
        let names = names_of(&fv, &index);
        assert!(names.contains(&"affix=suf:s".to_string()));
        assert!(names.contains(&"big_l=lk".to_string()));
        assert!(names.contains(&"big_r=s$".to_string()));
        assert!(names.contains(&"parent_in_vocab".to_string()));
        // count("walk") = 7 -> ln(8) = 2.07 -> bin 2 at width 1.0
        assert!(names.contains(&"freq_bin=2".to_string()));
        assert!(names.contains(&"cos_oov".to_string()));
    }

    #[test]
    fn sibling_value_is_log_one_plus_count() {
        let v = vocab(&[("faith", 5), ("faithful", 3), ("faithless", 2)]);
        let affixes = extract_affixes(
            &v,
            &ExtractOptions { min_support: 1, ..ExtractOptions::default() },
        );
        let siblings = build_sibling_table(&v, &affixes, 2);
        assert_eq!(siblings.count("faith"), 2);
        let vectors = WordVectors::empty();
        let ctx = FeatureContext { vocab: &v, vectors: &vectors, affixes: &affixes, siblings: &siblings };
        let mut index = FeatureIndex::new();
        let mut cfg = feat_cfg();
        cfg.sibl = true;
        let cands = gen_candidates("faithful", &v, &affixes, &cand_cfg());
        let suf = cands
            .iter()
            .find(|c| c.dtype == DerivationType::Suffix && c.parent == "faith")
            .unwrap();
        let fv = featurize("faithful", suf, &ctx, &cfg, &mut index);
        let id = index.id("sibl").unwrap();
        let val = fv.iter().find(|&(i, _)| i == id).unwrap().1;
        assert!((val - 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn strip_table_misses_unlisted_affixes() {
        // "spotty" strips nothing when only "less" is live, so "spotless" has
        // no siblings under the static table.
        let v = vocab(&[("spot", 5), ("spotless", 3), ("spotty", 2)]);
        let affixes = {
            let carrier = vocab(&[("xxx", 1), ("xxxless", 1)]);
            extract_affixes(
                &carrier,
                &ExtractOptions { min_support: 1, ..ExtractOptions::default() },
            )
        };
        assert_eq!(affixes.live_count(), 1);
        let t = build_sibling_table(&v, &affixes, 2);
        assert_eq!(t.count("spot"), 1);
        assert_eq!(t.siblings("spot"), 0);
    }

    #[test]
    fn empty_affix_set_gives_all_zero_sibling_counts() {
        let v = vocab(&[("alpha", 2), ("beta", 1)]);
        let t = build_sibling_table(&v, &AffixSet::new(), 2);
        assert_eq!(t.count("alpha"), 0);
        assert_eq!(t.count("alph"), 0);
    }

    #[test]
    fn cosine_feature_is_emitted_when_both_vectors_exist() {
        let v = vocab(&[("walks", 10), ("walk", 7)]);
        let affixes = extract_affixes(
            &v,
            &ExtractOptions { min_support: 1, ..ExtractOptions::default() },
        );
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("vec.txt");
        std::fs::write(&path, "walks 1 1 0\nwalk 1 0 0\n").unwrap();
        let vectors = crate::corpus::load_vectors(&path, &v, true, true).unwrap();
        let siblings = SiblingTable::empty();
        let ctx = FeatureContext { vocab: &v, vectors: &vectors, affixes: &affixes, siblings: &siblings };
        let mut index = FeatureIndex::new();
        let cands = gen_candidates("walks", &v, &affixes, &cand_cfg());
        let suf = cands.iter().find(|c| c.parent == "walk").unwrap();
        let fv = featurize("walks", suf, &ctx, &feat_cfg(), &mut index);
        let id = index.id("cos").unwrap();
        let val = fv.iter().find(|&(i, _)| i == id).unwrap().1;
        assert!((val - 1.0 / 2f64.sqrt()).abs() < 1e-12);
        assert!(index.id("cos_oov").is_none());
    }

    #[test]
    fn featurize_is_pure_and_frozen_index_is_stable() {
        let v = vocab(&[("walks", 10), ("walk", 7)]);
        let affixes = extract_affixes(
            &v,
            &ExtractOptions { min_support: 1, ..ExtractOptions::default() },
        );
        let vectors = WordVectors::empty();
        let siblings = SiblingTable::empty();
        let ctx = FeatureContext { vocab: &v, vectors: &vectors, affixes: &affixes, siblings: &siblings };
        let mut index = FeatureIndex::new();
        let cands = gen_candidates("walks", &v, &affixes, &cand_cfg());
        let a = featurize("walks", &cands[1], &ctx, &feat_cfg(), &mut index);
        index.freeze();
        let b = featurize("walks", &cands[1], &ctx, &feat_cfg(), &mut index);
        assert_eq!(a, b);
        // Frozen: a fresh name is dropped rather than growing the space.
        let before = index.len();
        let fv = featurize("zzzz", &gen_candidates("zzzz", &v, &affixes, &cand_cfg())[0], &ctx, &feat_cfg(), &mut index);
        assert_eq!(index.len(), before);
        for (id, _) in fv.iter() {
            assert!((id as usize) < before);
        }
    }

    #[test]
    fn sparse_vectors_are_sorted_unique_and_nonzero() {
        let v = SparseVector::from_pairs(vec![(5, 1.0), (2, 0.5), (5, 2.0), (7, 0.0)]);
        let items: Vec<(u32, f64)> = v.iter().collect();
        assert_eq!(items, vec![(2, 0.5), (5, 3.0)]);
    }
}
