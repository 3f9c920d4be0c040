//! Candidate parent edges C(w) and contrastive neighborhoods N(w).

use std::collections::HashSet;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::affixes::{AffixId, AffixSet};
use crate::config::RunConfig;
use crate::corpus::Vocabulary;
use crate::error::{Error, Result};
use crate::util::{char_count, fnv1a64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DerivationType {
    Stop,
    Suffix,
    Prefix,
    Modify,
    Delete,
    Repeat,
    CompoundLeft,
    CompoundRight,
}

impl DerivationType {
    pub fn as_str(self) -> &'static str {
        match self {
            DerivationType::Stop => "STOP",
            DerivationType::Suffix => "SUFFIX",
            DerivationType::Prefix => "PREFIX",
            DerivationType::Modify => "MODIFY",
            DerivationType::Delete => "DELETE",
            DerivationType::Repeat => "REPEAT",
            DerivationType::CompoundLeft => "COMPOUND-LEFT",
            DerivationType::CompoundRight => "COMPOUND-RIGHT",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "STOP" => DerivationType::Stop,
            "SUFFIX" => DerivationType::Suffix,
            "PREFIX" => DerivationType::Prefix,
            "MODIFY" => DerivationType::Modify,
            "DELETE" => DerivationType::Delete,
            "REPEAT" => DerivationType::Repeat,
            "COMPOUND-LEFT" => DerivationType::CompoundLeft,
            "COMPOUND-RIGHT" => DerivationType::CompoundRight,
            other => return Err(Error::Parse {
                path: "<dtype>".into(),
                line: 0,
                msg: format!("unknown derivation type `{other}`"),
            }),
        })
    }

    pub fn is_compound(self) -> bool {
        matches!(self, DerivationType::CompoundLeft | DerivationType::CompoundRight)
    }
}

/// One potential parent edge for a child word. The parent may be outside the
/// vocabulary. `log_prob` is filled by the model once candidates are scored.
#[derive(Debug, Clone)]
pub struct Candidate {
    pub child: String,
    pub parent: String,
    pub dtype: DerivationType,
    /// Live affix ids this edge needs (suffix or prefix, plus a
    /// transformation marker where applicable). Empty for STOP and compounds.
    pub affix_ids: Vec<AffixId>,
    pub log_prob: f64,
}

impl Candidate {
    fn new(child: &str, parent: String, dtype: DerivationType, affix_ids: Vec<AffixId>) -> Candidate {
        Candidate {
            child: child.to_string(),
            parent,
            dtype,
            affix_ids,
            log_prob: f64::NAN,
        }
    }
}

/// Candidate-generation knobs, usually derived from [`RunConfig`].
#[derive(Debug, Clone)]
pub struct CandidateConfig {
    pub min_stem: usize,
    pub min_stem_compound: usize,
    pub comp: bool,
    pub compound_require_both: bool,
    pub delete_chars: Vec<char>,
    pub modify_pairs: Vec<(char, char)>,
    pub enable_repeat: bool,
}

impl CandidateConfig {
    pub fn from_run(cfg: &RunConfig) -> CandidateConfig {
        CandidateConfig {
            min_stem: cfg.min_stem,
            min_stem_compound: cfg.min_stem_compound,
            comp: cfg.comp,
            compound_require_both: cfg.compound_require_both,
            delete_chars: cfg.delete_chars.clone(),
            modify_pairs: cfg.modify_pairs.clone(),
            enable_repeat: cfg.enable_repeat,
        }
    }
}

pub fn marker_name_delete(c: char) -> String {
    format!("del:{c}")
}

pub fn marker_name_modify(c1: char, c2: char) -> String {
    format!("mod:{c1}>{c2}")
}

pub const MARKER_REPEAT: &str = "rep";

/// Register the transformation markers a language profile enables, so they
/// take part in affix accounting and pruning.
pub fn register_markers(affixes: &mut AffixSet, cfg: &CandidateConfig) {
    if cfg.enable_repeat {
        affixes.register_marker(MARKER_REPEAT);
    }
    for &c in &cfg.delete_chars {
        affixes.register_marker(&marker_name_delete(c));
    }
    for &(c1, c2) in &cfg.modify_pairs {
        affixes.register_marker(&marker_name_modify(c1, c2));
    }
}

/// Generate the candidate set C(w), deduplicated on (parent, dtype). The STOP
/// candidate is always present, exactly once, at index 0; every other
/// candidate has a strictly shorter parent, so chained selections terminate.
pub fn gen_candidates(
    w: &str,
    vocab: &Vocabulary,
    affixes: &AffixSet,
    cfg: &CandidateConfig,
) -> Vec<Candidate> {
    let chars: Vec<char> = w.chars().collect();
    let n = chars.len();
    let mut out = vec![Candidate::new(w, w.to_string(), DerivationType::Stop, Vec::new())];
    let mut seen: HashSet<(String, DerivationType)> = HashSet::new();
    let mut push = |out: &mut Vec<Candidate>, cand: Candidate| {
        if seen.insert((cand.parent.clone(), cand.dtype)) {
            out.push(cand);
        }
    };

    // Per-suffix candidates: plain stripping plus the transformations that
    // apply under suffixation.
    for (sid, s) in affixes.live_suffixes() {
        let Some(stem) = w.strip_suffix(s) else { continue };
        if stem.is_empty() {
            continue;
        }
        let s_chars = s.chars().count();
        let stem_chars = n - s_chars;

        if stem_chars >= cfg.min_stem {
            push(
                &mut out,
                Candidate::new(w, stem.to_string(), DerivationType::Suffix, vec![sid]),
            );
        }

        let stem_last = chars[stem_chars - 1];

        // REPEAT: w = p·c·c·s, parent p·c (stopping -> stop).
        if cfg.enable_repeat && stem_chars >= 2 && chars[stem_chars - 2] == stem_last {
            if let Some(mid) = affixes.live_marker(MARKER_REPEAT) {
                if stem_chars - 1 >= cfg.min_stem {
                    let parent: String = chars[..stem_chars - 1].iter().collect();
                    push(
                        &mut out,
                        Candidate::new(w, parent, DerivationType::Repeat, vec![sid, mid]),
                    );
                }
            }
        }

        // DELETE: w = p·s, parent p·c (taking -> take). Needs |s| >= 2 so the
        // restored parent stays strictly shorter than the child.
        if s_chars >= 2 {
            for &c in &cfg.delete_chars {
                if let Some(mid) = affixes.live_marker(&marker_name_delete(c)) {
                    if stem_chars + 1 >= cfg.min_stem {
                        let mut parent: String = stem.to_string();
                        parent.push(c);
                        push(
                            &mut out,
                            Candidate::new(w, parent, DerivationType::Delete, vec![sid, mid]),
                        );
                    }
                }
            }
        }

        // MODIFY: w = p·c1·s, parent p·c2 (carried -> carry).
        for &(c1, c2) in &cfg.modify_pairs {
            if stem_last != c1 || c1 == c2 {
                continue;
            }
            if let Some(mid) = affixes.live_marker(&marker_name_modify(c1, c2)) {
                if stem_chars >= cfg.min_stem {
                    let mut parent: String = chars[..stem_chars - 1].iter().collect();
                    parent.push(c2);
                    push(
                        &mut out,
                        Candidate::new(w, parent, DerivationType::Modify, vec![sid, mid]),
                    );
                }
            }
        }
    }

    // COMPOUND: w = u·v. Stems are not affixes, so no affix ids.
    if cfg.comp && n >= 2 * cfg.min_stem_compound {
        for (chars_before, (byte, _)) in w.char_indices().enumerate() {
            if chars_before < cfg.min_stem_compound || n - chars_before < cfg.min_stem_compound {
                continue;
            }
            let (u, v) = w.split_at(byte);
            let u_in = vocab.contains(u);
            let v_in = vocab.contains(v);
            let ok = if cfg.compound_require_both {
                u_in && v_in
            } else {
                u_in || v_in
            };
            if ok {
                push(
                    &mut out,
                    Candidate::new(w, u.to_string(), DerivationType::CompoundLeft, Vec::new()),
                );
                push(
                    &mut out,
                    Candidate::new(w, v.to_string(), DerivationType::CompoundRight, Vec::new()),
                );
            }
        }
    }

    // PREFIX: mirror of SUFFIX.
    for (pid, p) in affixes.live_prefixes() {
        let Some(rest) = w.strip_prefix(p) else { continue };
        if rest.is_empty() {
            continue;
        }
        let rest_chars = n - p.chars().count();
        if rest_chars >= cfg.min_stem {
            push(
                &mut out,
                Candidate::new(w, rest.to_string(), DerivationType::Prefix, vec![pid]),
            );
        }
    }

    out
}

/// The surface split position (in chars of the child string) a candidate edge
/// induces: after the parent for SUFFIX/REPEAT/COMPOUND-LEFT, before the
/// parent remainder for PREFIX/COMPOUND-RIGHT, at the suffix start for
/// DELETE/MODIFY. STOP has no split.
pub fn boundary_in_child(cand: &Candidate, affixes: &AffixSet) -> Option<usize> {
    let n = char_count(&cand.child);
    let parent_chars = char_count(&cand.parent);
    match cand.dtype {
        DerivationType::Stop => None,
        DerivationType::Suffix | DerivationType::Repeat | DerivationType::CompoundLeft => {
            Some(parent_chars)
        }
        DerivationType::Prefix | DerivationType::CompoundRight => Some(n - parent_chars),
        DerivationType::Delete | DerivationType::Modify => {
            let suffix_chars = cand
                .affix_ids
                .iter()
                .find(|&&id| affixes.kind(id) == crate::affixes::AffixKind::Suffix)
                .map(|&id| char_count(affixes.text(id)))
                .unwrap_or(0);
            Some(n - suffix_chars)
        }
    }
}

/// Contrastive neighborhood of a word: the word itself plus strings obtained
/// by transposing one adjacent character pair.
#[derive(Debug, Clone)]
pub struct Neighborhood {
    pub word: String,
    /// `word` first, then the distinct transpositions (possibly sampled).
    pub neighbors: Vec<String>,
}

/// All single adjacent transpositions of `w`, distinct from `w`, deduplicated,
/// plus `w` itself. When more than `max_neighbors` strings would result, a
/// seed-deterministic sample is kept (the word itself is never dropped).
pub fn gen_neighbors(w: &str, max_neighbors: usize, seed: u64) -> Neighborhood {
    assert!(max_neighbors >= 1, "max_neighbors must be positive");
    let chars: Vec<char> = w.chars().collect();
    let mut swaps: Vec<String> = Vec::new();
    let mut seen: HashSet<String> = HashSet::new();
    for i in 0..chars.len().saturating_sub(1) {
        if chars[i] == chars[i + 1] {
            continue;
        }
        let mut c = chars.clone();
        c.swap(i, i + 1);
        let s: String = c.into_iter().collect();
        if s != w && seen.insert(s.clone()) {
            swaps.push(s);
        }
    }
    let budget = max_neighbors - 1;
    if swaps.len() > budget {
        // Partial Fisher-Yates keyed by (seed, word) so the sample is stable
        // regardless of processing order.
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ fnv1a64(w.as_bytes()));
        for i in 0..budget {
            let j = i + rand::Rng::random_range(&mut rng, 0..swaps.len() - i);
            swaps.swap(i, j);
        }
        swaps.truncate(budget);
    }
    let mut neighbors = Vec::with_capacity(swaps.len() + 1);
    neighbors.push(w.to_string());
    neighbors.extend(swaps);
    Neighborhood {
        word: w.to_string(),
        neighbors,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::affixes::{extract_affixes, AffixKind, ExtractOptions};
    use crate::corpus::Vocabulary;
    use std::collections::BTreeSet;

    fn vocab(words: &[&str]) -> Vocabulary {
        Vocabulary::from_counts(words.iter().map(|w| (w.to_string(), 1u64)), usize::MAX).unwrap()
    }

    /// An affix set with the given live suffixes/prefixes, bypassing extraction.
    fn manual_affixes(suffixes: &[&str], prefixes: &[&str]) -> AffixSet {
        let words: Vec<String> = suffixes
            .iter()
            .map(|s| format!("xxx{s}"))
            .chain(prefixes.iter().map(|p| format!("{p}xxx")))
            .chain(["xxx".to_string()])
            .collect();
        let v = Vocabulary::from_counts(words.into_iter().map(|w| (w, 1u64)), usize::MAX).unwrap();
        let set = extract_affixes(
            &v,
            &ExtractOptions {
                min_support: 1,
                ..ExtractOptions::default()
            },
        );
        // Extraction from the synthetic pairs yields exactly the requested strings.
        let want: BTreeSet<(AffixKind, String)> = suffixes
            .iter()
            .map(|s| (AffixKind::Suffix, s.to_string()))
            .chain(prefixes.iter().map(|p| (AffixKind::Prefix, p.to_string())))
            .collect();
        let got: BTreeSet<(AffixKind, String)> = set
            .live_ids()
            .into_iter()
            .map(|id| (set.kind(id), set.text(id).to_string()))
            .collect();
        assert_eq!(want, got, "manual affix construction mismatch");
        set
    }

    fn base_cfg() -> CandidateConfig {
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

    fn find<'a>(
        cands: &'a [Candidate],
        parent: &str,
        dtype: DerivationType,
    ) -> Option<&'a Candidate> {
        cands.iter().find(|c| c.parent == parent && c.dtype == dtype)
    }

    #[test]
    fn stop_is_always_first_and_unique() {
        let v = vocab(&["taking", "take", "tak"]);
        let affixes = manual_affixes(&["ing"], &[]);
        let cands = gen_candidates("taking", &v, &affixes, &base_cfg());
        assert_eq!(cands[0].dtype, DerivationType::Stop);
        assert_eq!(cands[0].parent, "taking");
        assert!(cands[0].affix_ids.is_empty());
        assert_eq!(
            cands.iter().filter(|c| c.dtype == DerivationType::Stop).count(),
            1
        );
    }

    #[test]
    fn taking_yields_suffix_and_delete_parents() {
        let v = vocab(&["taking", "take"]);
        let mut affixes = manual_affixes(&["ing"], &[]);
        let mut cfg = base_cfg();
        cfg.delete_chars = vec!['e'];
        register_markers(&mut affixes, &cfg);
        let cands = gen_candidates("taking", &v, &affixes, &cfg);
        let suf = find(&cands, "tak", DerivationType::Suffix).expect("suffix candidate");
        assert_eq!(suf.affix_ids.len(), 1);
        let del = find(&cands, "take", DerivationType::Delete).expect("delete candidate");
        assert_eq!(del.affix_ids.len(), 2);
        let names: BTreeSet<String> = del.affix_ids.iter().map(|&id| affixes.display(id)).collect();
        assert!(names.contains("suf:ing"));
        assert!(names.contains("del:e"));
    }

    #[test]
    fn repeat_strips_the_doubled_consonant() {
        let v = vocab(&["stopping", "stop"]);
        let mut affixes = manual_affixes(&["ing"], &[]);
        let mut cfg = base_cfg();
        cfg.enable_repeat = true;
        register_markers(&mut affixes, &cfg);
        let cands = gen_candidates("stopping", &v, &affixes, &cfg);
        let rep = find(&cands, "stop", DerivationType::Repeat).expect("repeat candidate");
        let names: BTreeSet<String> = rep.affix_ids.iter().map(|&id| affixes.display(id)).collect();
        assert!(names.contains("rep"));
    }

    #[test]
    fn modify_restores_the_parent_final_character() {
        let v = vocab(&["carried", "carry"]);
        let mut affixes = manual_affixes(&["ed"], &[]);
        let mut cfg = base_cfg();
        cfg.modify_pairs = vec![('i', 'y')];
        register_markers(&mut affixes, &cfg);
        let cands = gen_candidates("carried", &v, &affixes, &cfg);
        let m = find(&cands, "carry", DerivationType::Modify).expect("modify candidate");
        let names: BTreeSet<String> = m.affix_ids.iter().map(|&id| affixes.display(id)).collect();
        assert!(names.contains("mod:i>y"));
    }

    #[test]
    fn compound_emits_both_orientations() {
        let v = vocab(&["football", "foot", "ball"]);
        let affixes = AffixSet::new();
        let mut cfg = base_cfg();
        cfg.comp = true;
        let cands = gen_candidates("football", &v, &affixes, &cfg);
        assert!(find(&cands, "foot", DerivationType::CompoundLeft).is_some());
        assert!(find(&cands, "ball", DerivationType::CompoundRight).is_some());
        // Compounds carry no affix ids.
        assert!(find(&cands, "foot", DerivationType::CompoundLeft).unwrap().affix_ids.is_empty());
    }

    #[test]
    fn compound_requires_both_parts_by_default() {
        let v = vocab(&["football", "foot"]);
        let affixes = AffixSet::new();
        let mut cfg = base_cfg();
        cfg.comp = true;
        let cands = gen_candidates("football", &v, &affixes, &cfg);
        assert!(find(&cands, "foot", DerivationType::CompoundLeft).is_none());
        cfg.compound_require_both = false;
        let cands = gen_candidates("football", &v, &affixes, &cfg);
        assert!(find(&cands, "foot", DerivationType::CompoundLeft).is_some());
        assert!(find(&cands, "ball", DerivationType::CompoundRight).is_some());
    }

    #[test]
    fn single_letter_word_only_stops() {
        let v = vocab(&["a"]);
        let affixes = manual_affixes(&["s"], &[]);
        let cands = gen_candidates("a", &v, &affixes, &base_cfg());
        assert_eq!(cands.len(), 1);
        assert_eq!(cands[0].dtype, DerivationType::Stop);
    }

    #[test]
    fn parents_may_be_out_of_vocabulary() {
        let v = vocab(&["paints"]);
        let affixes = manual_affixes(&["s"], &[]);
        let cands = gen_candidates("paints", &v, &affixes, &base_cfg());
        let c = find(&cands, "paint", DerivationType::Suffix).unwrap();
        assert!(!v.contains(&c.parent));
    }

    #[test]
    fn all_non_stop_parents_are_strictly_shorter() {
        let v = vocab(&["restating", "restate", "state", "rest", "ate"]);
        let mut affixes = manual_affixes(&["ing", "e", "ate"], &["re", "rest"]);
        let mut cfg = base_cfg();
        cfg.comp = true;
        cfg.delete_chars = vec!['e'];
        cfg.modify_pairs = vec![('i', 'y')];
        cfg.enable_repeat = true;
        register_markers(&mut affixes, &cfg);
        for w in ["restating", "restate", "state", "rest", "ate", "aaaa"] {
            for c in gen_candidates(w, &v, &affixes, &cfg) {
                if c.dtype == DerivationType::Stop {
                    assert_eq!(c.parent, w);
                } else {
                    assert!(
                        c.parent.chars().count() < w.chars().count(),
                        "{w} -> {} ({:?})",
                        c.parent,
                        c.dtype
                    );
                }
            }
        }
    }

    #[test]
    fn pruned_affixes_generate_no_candidates() {
        let v = vocab(&["walks", "walk"]);
        let affixes = manual_affixes(&["s"], &[]);
        let id = affixes.live_ids()[0];
        let cands = gen_candidates("walks", &v, &affixes, &base_cfg());
        assert!(find(&cands, "walk", DerivationType::Suffix).is_some());
        let pruned = affixes.prune(&BTreeSet::new()).unwrap();
        let cands = gen_candidates("walks", &v, &pruned, &base_cfg());
        assert_eq!(cands.len(), 1);
        assert!(cands.iter().all(|c| !c.affix_ids.contains(&id)));
    }

    #[test]
    fn neighbor_enumeration_matches_hand_lists() {
        let hood = gen_neighbors("abc", 25, 0);
        let got: BTreeSet<&str> = hood.neighbors.iter().map(|s| s.as_str()).collect();
        assert_eq!(got, BTreeSet::from(["abc", "bac", "acb"]));

        let hood = gen_neighbors("aa", 25, 0);
        assert_eq!(hood.neighbors, vec!["aa".to_string()]);

        let hood = gen_neighbors("abcd", 25, 0);
        let got: BTreeSet<&str> = hood.neighbors.iter().map(|s| s.as_str()).collect();
        assert_eq!(got, BTreeSet::from(["abcd", "bacd", "acbd", "abdc"]));
    }

    #[test]
    fn neighbor_sampling_is_deterministic_and_keeps_the_word() {
        let a = gen_neighbors("abcdefgh", 4, 7);
        let b = gen_neighbors("abcdefgh", 4, 7);
        assert_eq!(a.neighbors, b.neighbors);
        assert_eq!(a.neighbors.len(), 4);
        assert_eq!(a.neighbors[0], "abcdefgh");
        let c = gen_neighbors("abcdefgh", 4, 8);
        assert_eq!(c.neighbors.len(), 4);
        // Different seed, same word: still deterministic, possibly different sample.
        assert_eq!(c.neighbors[0], "abcdefgh");
    }

    #[test]
    fn boundary_positions_follow_the_derivation_type() {
        let v = vocab(&["stopping", "stop", "taking", "take", "carried", "carry", "undo", "do"]);
        let mut affixes = manual_affixes(&["ing", "ed"], &["un"]);
        let mut cfg = base_cfg();
        cfg.delete_chars = vec!['e'];
        cfg.modify_pairs = vec![('i', 'y')];
        cfg.enable_repeat = true;
        register_markers(&mut affixes, &cfg);

        let cands = gen_candidates("stopping", &v, &affixes, &cfg);
        let rep = find(&cands, "stop", DerivationType::Repeat).unwrap();
        assert_eq!(boundary_in_child(rep, &affixes), Some(4)); // stop|ping

        let cands = gen_candidates("taking", &v, &affixes, &cfg);
        let del = find(&cands, "take", DerivationType::Delete).unwrap();
        assert_eq!(boundary_in_child(del, &affixes), Some(3)); // tak|ing

        let cands = gen_candidates("carried", &v, &affixes, &cfg);
        let m = find(&cands, "carry", DerivationType::Modify).unwrap();
        assert_eq!(boundary_in_child(m, &affixes), Some(5)); // carri|ed

        let cands = gen_candidates("undone", &v, &affixes, &cfg);
        if let Some(p) = find(&cands, "done", DerivationType::Prefix) {
            assert_eq!(boundary_in_child(p, &affixes), Some(2)); // un|done
        }
        let stop = &gen_candidates("undone", &v, &affixes, &cfg)[0];
        assert_eq!(boundary_in_child(stop, &affixes), None);
    }

    #[test]
    fn neighbors_preserve_character_multisets() {
        for w in ["transpose", "aab", "xyzzy"] {
            let hood = gen_neighbors(w, 25, 3);
            let mut want: Vec<char> = w.chars().collect();
            want.sort_unstable();
            for n in &hood.neighbors {
                let mut got: Vec<char> = n.chars().collect();
                got.sort_unstable();
                assert_eq!(got, want);
            }
        }
    }
}
