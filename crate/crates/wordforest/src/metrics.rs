//! Scoring for the three tasks: boundary precision/recall for segmentation,
//! correct/inserted/deleted counts for family clustering, and root accuracy.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::Serialize;

use crate::corpus::normalize_word;
use crate::error::{Error, Result};
use crate::util::open_text;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl Prf {
    pub fn from_counts(tp: f64, fp: f64, fn_: f64) -> Prf {
        let precision = if tp + fp > 0.0 { tp / (tp + fp) } else { 1.0 };
        let recall = if tp + fn_ > 0.0 { tp / (tp + fn_) } else { 1.0 };
        Prf::from_pr(precision, recall)
    }

    pub fn from_pr(precision: f64, recall: f64) -> Prf {
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        Prf {
            precision,
            recall,
            f1,
        }
    }
}

/// Gold segmentations: per word, one or more alternative analyses, each a
/// list of surface morphs that concatenates back to the word.
#[derive(Debug, Clone, Default)]
pub struct GoldSegmentations {
    map: BTreeMap<String, Vec<Vec<String>>>,
}

impl GoldSegmentations {
    pub fn get(&self, word: &str) -> Option<&[Vec<String>]> {
        self.map.get(word).map(|v| v.as_slice())
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.map.keys().map(|s| s.as_str())
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn insert(&mut self, word: String, alternatives: Vec<Vec<String>>) {
        self.map.insert(word, alternatives);
    }
}

/// Internal split positions (chars) of an analysis given as morphs.
pub fn boundaries_of(morphs: &[String]) -> BTreeSet<usize> {
    let mut out = BTreeSet::new();
    let mut pos = 0;
    for m in &morphs[..morphs.len().saturating_sub(1)] {
        pos += m.chars().count();
        out.insert(pos);
    }
    out
}

/// Load `word<TAB>m1 m2, m1' m2'` (alternatives comma-separated). Each
/// alternative must concatenate back to the word. Duplicate words keep the
/// first occurrence.
pub fn load_gold_segmentations(path: &Path, lowercase: bool) -> Result<GoldSegmentations> {
    let reader = open_text(path)?;
    let mut gold = GoldSegmentations::default();
    for (no, line) in std::io::BufRead::lines(reader).enumerate() {
        let line = line.map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        let line = line.trim_end_matches(['\r', '\n']);
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |msg: String| Error::Parse {
            path: path.to_path_buf(),
            line: no + 1,
            msg,
        };
        let (word, rest) = line
            .split_once('\t')
            .ok_or_else(|| err("expected `word<TAB>analysis`".into()))?;
        let word = normalize_word(word, lowercase);
        let mut alternatives = Vec::new();
        for alt in rest.split(',') {
            let morphs: Vec<String> = alt
                .split_whitespace()
                .map(|m| normalize_word(m, lowercase))
                .collect();
            if morphs.is_empty() {
                return Err(err("empty analysis".into()));
            }
            let recomposed: String = morphs.concat();
            if recomposed != word {
                return Err(err(format!(
                    "morphs `{}` do not concatenate to `{word}`",
                    morphs.join(" ")
                )));
            }
            alternatives.push(morphs);
        }
        if !gold.map.contains_key(&word) {
            gold.insert(word, alternatives);
        }
    }
    if gold.is_empty() {
        return Err(Error::EmptyVocabulary(format!("{}", path.display())));
    }
    Ok(gold)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct BprCounts {
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
    pub words: u64,
}

/// Boundary precision/recall: per word the gold alternative maximizing the
/// word-level F1 is selected, then hits are micro-aggregated over the corpus.
pub fn bpr(
    pred: &BTreeMap<String, BTreeSet<usize>>,
    gold: &GoldSegmentations,
) -> Result<(Prf, BprCounts)> {
    bpr_with_mode(pred, gold, false)
}

/// `macro_average = true` averages per-word precision/recall instead of
/// pooling boundary counts.
pub fn bpr_with_mode(
    pred: &BTreeMap<String, BTreeSet<usize>>,
    gold: &GoldSegmentations,
    macro_average: bool,
) -> Result<(Prf, BprCounts)> {
    let mut tp = 0u64;
    let mut fp = 0u64;
    let mut fn_ = 0u64;
    let mut p_sum = 0.0;
    let mut r_sum = 0.0;
    for (word, p_bounds) in pred {
        let alts = gold.get(word).ok_or_else(|| {
            Error::Eval(format!("predicted word `{word}` is absent from the gold data"))
        })?;
        let mut best: Option<(f64, u64, u64, u64)> = None;
        for alt in alts {
            let g = boundaries_of(alt);
            let w_tp = p_bounds.intersection(&g).count() as u64;
            let w_fp = p_bounds.difference(&g).count() as u64;
            let w_fn = g.difference(p_bounds).count() as u64;
            let f1 = if 2 * w_tp + w_fp + w_fn == 0 {
                1.0
            } else {
                2.0 * w_tp as f64 / (2 * w_tp + w_fp + w_fn) as f64
            };
            if best.map_or(true, |(bf, ..)| f1 > bf) {
                best = Some((f1, w_tp, w_fp, w_fn));
            }
        }
        let (_, w_tp, w_fp, w_fn) = best.expect("gold alternatives are non-empty");
        tp += w_tp;
        fp += w_fp;
        fn_ += w_fn;
        let wp = if w_tp + w_fp > 0 {
            w_tp as f64 / (w_tp + w_fp) as f64
        } else {
            1.0
        };
        let wr = if w_tp + w_fn > 0 {
            w_tp as f64 / (w_tp + w_fn) as f64
        } else {
            1.0
        };
        p_sum += wp;
        r_sum += wr;
    }
    let counts = BprCounts {
        tp,
        fp,
        fn_,
        words: pred.len() as u64,
    };
    let prf = if macro_average {
        if pred.is_empty() {
            Prf::from_pr(1.0, 1.0)
        } else {
            Prf::from_pr(p_sum / pred.len() as f64, r_sum / pred.len() as f64)
        }
    } else {
        Prf::from_counts(tp as f64, fp as f64, fn_ as f64)
    };
    Ok((prf, counts))
}

/// Gold clustering: word -> cluster id.
#[derive(Debug, Clone, Default)]
pub struct GoldClusters {
    map: BTreeMap<String, String>,
}

impl GoldClusters {
    pub fn insert(&mut self, word: String, cluster: String) {
        self.map.insert(word, cluster);
    }

    pub fn get(&self, word: &str) -> Option<&str> {
        self.map.get(word).map(|s| s.as_str())
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

/// Load `word<TAB>cluster_id` rows. Duplicates keep the first occurrence.
pub fn load_gold_clusters(path: &Path, lowercase: bool) -> Result<GoldClusters> {
    let reader = open_text(path)?;
    let mut gold = GoldClusters::default();
    for (no, line) in std::io::BufRead::lines(reader).enumerate() {
        let line = line.map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        let line = line.trim_end_matches(['\r', '\n']);
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (word, cluster) = line.split_once('\t').ok_or_else(|| Error::Parse {
            path: path.to_path_buf(),
            line: no + 1,
            msg: "expected `word<TAB>cluster_id`".into(),
        })?;
        let word = normalize_word(word, lowercase);
        if gold.get(&word).is_none() {
            gold.insert(word, cluster.to_string());
        }
    }
    if gold.is_empty() {
        return Err(Error::EmptyVocabulary(format!("{}", path.display())));
    }
    Ok(gold)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ClusterScores {
    pub correct: f64,
    pub inserted: f64,
    pub deleted: f64,
    pub prf: Prf,
}

/// Family-clustering scores over the words present in both prediction and
/// gold: C = sum |X ∩ Y|/|Y|, I = sum |X \ Y|/|Y|, D = sum |Y \ X|/|Y|, with
/// cluster memberships restricted to the shared words.
pub fn cluster_prf(
    pred_clusters: &[BTreeSet<String>],
    gold: &GoldClusters,
) -> Result<ClusterScores> {
    let mut pred_of: BTreeMap<&str, usize> = BTreeMap::new();
    for (i, cluster) in pred_clusters.iter().enumerate() {
        for w in cluster {
            pred_of.entry(w.as_str()).or_insert(i);
        }
    }
    let shared: Vec<&str> = pred_of
        .keys()
        .copied()
        .filter(|w| gold.get(w).is_some())
        .collect();
    if shared.is_empty() {
        return Err(Error::Eval(
            "prediction and gold clusterings share no words".into(),
        ));
    }
    let shared_set: BTreeSet<&str> = shared.iter().copied().collect();
    // Gold cluster members restricted to shared words.
    let mut gold_members: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    for &w in &shared {
        gold_members
            .entry(gold.get(w).unwrap())
            .or_default()
            .insert(w);
    }
    let mut correct = 0.0;
    let mut inserted = 0.0;
    let mut deleted = 0.0;
    for &w in &shared {
        let x: BTreeSet<&str> = pred_clusters[pred_of[w]]
            .iter()
            .map(|s| s.as_str())
            .filter(|s| shared_set.contains(s))
            .collect();
        let y = &gold_members[gold.get(w).unwrap()];
        let y_size = y.len() as f64;
        correct += x.intersection(y).count() as f64 / y_size;
        inserted += x.difference(y).count() as f64 / y_size;
        deleted += y.difference(&x).count() as f64 / y_size;
    }
    let precision = if correct + inserted > 0.0 {
        correct / (correct + inserted)
    } else {
        1.0
    };
    let recall = if correct + deleted > 0.0 {
        correct / (correct + deleted)
    } else {
        1.0
    };
    Ok(ClusterScores {
        correct,
        inserted,
        deleted,
        prf: Prf::from_pr(precision, recall),
    })
}

/// Load `word<TAB>root1|root2` rows (acceptable roots pipe-separated).
pub fn load_gold_roots(path: &Path, lowercase: bool) -> Result<BTreeMap<String, BTreeSet<String>>> {
    let reader = open_text(path)?;
    let mut gold: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for (no, line) in std::io::BufRead::lines(reader).enumerate() {
        let line = line.map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        let line = line.trim_end_matches(['\r', '\n']);
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (word, roots) = line.split_once('\t').ok_or_else(|| Error::Parse {
            path: path.to_path_buf(),
            line: no + 1,
            msg: "expected `word<TAB>root1|root2`".into(),
        })?;
        let word = normalize_word(word, lowercase);
        let set: BTreeSet<String> = roots
            .split('|')
            .map(|r| normalize_word(r, lowercase))
            .filter(|r| !r.is_empty())
            .collect();
        if set.is_empty() {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: no + 1,
                msg: "no roots listed".into(),
            });
        }
        gold.entry(word).or_insert(set);
    }
    if gold.is_empty() {
        return Err(Error::EmptyVocabulary(format!("{}", path.display())));
    }
    Ok(gold)
}

/// Fraction of the shared words whose predicted root matches any gold root.
pub fn root_accuracy(
    pred: &BTreeMap<String, String>,
    gold: &BTreeMap<String, BTreeSet<String>>,
) -> Result<(f64, u64, u64)> {
    let mut total = 0u64;
    let mut hits = 0u64;
    for (word, root) in pred {
        if let Some(accept) = gold.get(word) {
            total += 1;
            if accept.contains(root) {
                hits += 1;
            }
        }
    }
    if total == 0 {
        return Err(Error::Eval(
            "prediction and gold roots share no words".into(),
        ));
    }
    Ok((hits as f64 / total as f64, hits, total))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bset(items: &[usize]) -> BTreeSet<usize> {
        items.iter().copied().collect()
    }

    fn gold_from(entries: &[(&str, &[&[&str]])]) -> GoldSegmentations {
        let mut g = GoldSegmentations::default();
        for (word, alts) in entries {
            g.insert(
                word.to_string(),
                alts.iter()
                    .map(|a| a.iter().map(|m| m.to_string()).collect())
                    .collect(),
            );
        }
        g
    }

    #[test]
    fn exact_match_scores_one() {
        let gold = gold_from(&[("paints", &[&["paint", "s"]])]);
        let pred = BTreeMap::from([("paints".to_string(), bset(&[5]))]);
        let (prf, counts) = bpr(&pred, &gold).unwrap();
        assert_eq!(prf.precision, 1.0);
        assert_eq!(prf.recall, 1.0);
        assert_eq!(prf.f1, 1.0);
        assert_eq!((counts.tp, counts.fp, counts.fn_), (1, 0, 0));
    }

    #[test]
    fn disjoint_boundaries_count_fp_and_fn() {
        let gold = gold_from(&[("paints", &[&["paint", "s"]])]);
        let pred = BTreeMap::from([("paints".to_string(), bset(&[4]))]);
        let (_, counts) = bpr(&pred, &gold).unwrap();
        assert_eq!((counts.tp, counts.fp, counts.fn_), (0, 1, 1));
    }

    #[test]
    fn three_word_micro_counts_match_hand_tally() {
        // pred {∅, {2}, {1,3}} vs gold {∅, {2}, {1}}:
        // word3 has TP=1 FP=1 FN=0; totals TP=2 FP=1 FN=0.
        let gold = gold_from(&[
            ("ab", &[&["ab"]]),
            ("abc", &[&["ab", "c"]]),
            ("abcd", &[&["a", "bcd"]]),
        ]);
        let pred = BTreeMap::from([
            ("ab".to_string(), bset(&[])),
            ("abc".to_string(), bset(&[2])),
            ("abcd".to_string(), bset(&[1, 3])),
        ]);
        let (prf, counts) = bpr(&pred, &gold).unwrap();
        assert_eq!((counts.tp, counts.fp, counts.fn_), (2, 1, 0));
        assert!((prf.precision - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(prf.recall, 1.0);
        assert!((prf.f1 - 0.8).abs() < 1e-12);
    }

    #[test]
    fn best_alternative_is_selected_per_word() {
        let gold = gold_from(&[("abcd", &[&["abcd"], &["ab", "cd"]])]);
        let pred = BTreeMap::from([("abcd".to_string(), bset(&[2]))]);
        let (prf, _) = bpr(&pred, &gold).unwrap();
        assert_eq!(prf.f1, 1.0);
        let pred = BTreeMap::from([("abcd".to_string(), bset(&[]))]);
        let (prf, _) = bpr(&pred, &gold).unwrap();
        assert_eq!(prf.f1, 1.0);
    }

    #[test]
    fn prediction_for_unknown_word_is_an_error() {
        let gold = gold_from(&[("ab", &[&["ab"]])]);
        let pred = BTreeMap::from([("zz".to_string(), bset(&[]))]);
        let err = bpr(&pred, &gold).unwrap_err();
        assert!(matches!(err, Error::Eval(msg) if msg.contains("zz")));
    }

    #[test]
    fn word_order_does_not_change_scores() {
        let gold = gold_from(&[
            ("walks", &[&["walk", "s"]]),
            ("talked", &[&["talk", "ed"]]),
            ("go", &[&["go"]]),
        ]);
        let pred_a = BTreeMap::from([
            ("walks".to_string(), bset(&[4])),
            ("talked".to_string(), bset(&[3])),
            ("go".to_string(), bset(&[])),
        ]);
        // BTreeMap iteration is sorted anyway; rebuild in reverse insertion
        // order to make the intent explicit.
        let mut pred_b = BTreeMap::new();
        for (k, v) in pred_a.iter().rev() {
            pred_b.insert(k.clone(), v.clone());
        }
        let (a, _) = bpr(&pred_a, &gold).unwrap();
        let (b, _) = bpr(&pred_b, &gold).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn swapping_pred_and_gold_swaps_precision_and_recall() {
        let gold_morphs: &[(&str, &[&[&str]])] = &[
            ("walks", &[&["walk", "s"]]),
            ("talked", &[&["talked"]]),
            ("undo", &[&["un", "do"]]),
        ];
        let pred_morphs: &[(&str, &[&[&str]])] = &[
            ("walks", &[&["walks"]]),
            ("talked", &[&["talk", "ed"]]),
            ("undo", &[&["un", "do"]]),
        ];
        let as_pred = |entries: &[(&str, &[&[&str]])]| -> BTreeMap<String, BTreeSet<usize>> {
            entries
                .iter()
                .map(|(w, alts)| {
                    let morphs: Vec<String> = alts[0].iter().map(|m| m.to_string()).collect();
                    (w.to_string(), boundaries_of(&morphs))
                })
                .collect()
        };
        let (ab, _) = bpr(&as_pred(pred_morphs), &gold_from(gold_morphs)).unwrap();
        let (ba, _) = bpr(&as_pred(gold_morphs), &gold_from(pred_morphs)).unwrap();
        assert!((ab.precision - ba.recall).abs() < 1e-12);
        assert!((ab.recall - ba.precision).abs() < 1e-12);
    }

    fn gold_clusters(pairs: &[(&str, &str)]) -> GoldClusters {
        let mut g = GoldClusters::default();
        for (w, c) in pairs {
            g.insert(w.to_string(), c.to_string());
        }
        g
    }

    fn clusters(groups: &[&[&str]]) -> Vec<BTreeSet<String>> {
        groups
            .iter()
            .map(|g| g.iter().map(|w| w.to_string()).collect())
            .collect()
    }

    #[test]
    fn identical_clusterings_score_one() {
        let gold = gold_clusters(&[("a", "1"), ("b", "1"), ("c", "2")]);
        let pred = clusters(&[&["a", "b"], &["c"]]);
        let s = cluster_prf(&pred, &gold).unwrap();
        assert_eq!(s.inserted, 0.0);
        assert_eq!(s.deleted, 0.0);
        assert_eq!(s.prf.precision, 1.0);
        assert_eq!(s.prf.recall, 1.0);
        assert_eq!(s.prf.f1, 1.0);
    }

    #[test]
    fn paint_pain_worked_example() {
        // pred one cluster {paint, paints, pain}; gold {paint, paints} | {pain}:
        // C = 3, I = 3, D = 0, P = 0.5, R = 1, F = 2/3.
        let gold = gold_clusters(&[("paint", "A"), ("paints", "A"), ("pain", "B")]);
        let pred = clusters(&[&["paint", "paints", "pain"]]);
        let s = cluster_prf(&pred, &gold).unwrap();
        assert!((s.correct - 3.0).abs() < 1e-12);
        assert!((s.inserted - 3.0).abs() < 1e-12);
        assert_eq!(s.deleted, 0.0);
        assert!((s.prf.precision - 0.5).abs() < 1e-12);
        assert_eq!(s.prf.recall, 1.0);
        assert!((s.prf.f1 - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn all_singletons_vs_all_singletons_scores_one() {
        let gold = gold_clusters(&[("a", "1"), ("b", "2"), ("c", "3")]);
        let pred = clusters(&[&["a"], &["b"], &["c"]]);
        let s = cluster_prf(&pred, &gold).unwrap();
        assert_eq!(s.prf.f1, 1.0);
    }

    #[test]
    fn c_plus_d_equals_word_count_on_random_clusterings() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(13);
        for _ in 0..100 {
            let n = rng.random_range(1..30usize);
            let words: Vec<String> = (0..n).map(|i| format!("w{i}")).collect();
            let mut gold = GoldClusters::default();
            for w in &words {
                gold.insert(w.clone(), format!("g{}", rng.random_range(0..5)));
            }
            let k = rng.random_range(1..=n);
            let mut pred: Vec<BTreeSet<String>> = vec![BTreeSet::new(); k];
            for w in &words {
                pred[rng.random_range(0..k)].insert(w.clone());
            }
            pred.retain(|c| !c.is_empty());
            let s = cluster_prf(&pred, &gold).unwrap();
            assert!(
                (s.correct + s.deleted - n as f64).abs() < 1e-9,
                "C + D = |W| violated: {} + {} != {n}",
                s.correct,
                s.deleted
            );
            assert!(s.prf.precision >= 0.0 && s.prf.precision <= 1.0);
            assert!(s.prf.recall >= 0.0 && s.prf.recall <= 1.0);
            assert!(s.prf.f1 >= 0.0 && s.prf.f1 <= 1.0);
        }
    }

    #[test]
    fn evaluation_is_restricted_to_shared_words() {
        let gold = gold_clusters(&[("a", "1"), ("b", "1")]);
        let pred = clusters(&[&["a", "b", "zzz"]]);
        let s = cluster_prf(&pred, &gold).unwrap();
        // zzz is invisible: perfect score.
        assert_eq!(s.prf.f1, 1.0);
        let disjoint = clusters(&[&["x", "y"]]);
        assert!(cluster_prf(&disjoint, &gold).is_err());
    }

    #[test]
    fn root_accuracy_counts_matches() {
        let gold: BTreeMap<String, BTreeSet<String>> = [
            ("walks", vec!["walk"]),
            ("talked", vec!["talk"]),
            ("undone", vec!["do", "undo"]),
            ("cats", vec!["cat"]),
        ]
        .into_iter()
        .map(|(w, rs)| {
            (
                w.to_string(),
                rs.into_iter().map(|r| r.to_string()).collect(),
            )
        })
        .collect();
        let pred: BTreeMap<String, String> = [
            ("walks", "walk"),
            ("talked", "talked"),
            ("undone", "undo"),
            ("cats", "ca"),
        ]
        .into_iter()
        .map(|(w, r)| (w.to_string(), r.to_string()))
        .collect();
        let (acc, hits, total) = root_accuracy(&pred, &gold).unwrap();
        assert_eq!((hits, total), (2, 4));
        assert!((acc - 0.5).abs() < 1e-12);
    }

    #[test]
    fn perfect_roots_score_one() {
        let gold: BTreeMap<String, BTreeSet<String>> =
            [("a", "r1"), ("b", "r2")]
                .into_iter()
                .map(|(w, r)| (w.to_string(), BTreeSet::from([r.to_string()])))
                .collect();
        let pred: BTreeMap<String, String> = [("a", "r1"), ("b", "r2")]
            .into_iter()
            .map(|(w, r)| (w.to_string(), r.to_string()))
            .collect();
        assert_eq!(root_accuracy(&pred, &gold).unwrap().0, 1.0);
    }

    #[test]
    fn gold_segmentation_loader_validates_concatenation() {
        let dir = tempfile::tempdir().unwrap();
        let ok = dir.path().join("ok.tsv");
        std::fs::write(&ok, "paints\tpaint s, paints\nwalk\twalk\n").unwrap();
        let gold = load_gold_segmentations(&ok, true).unwrap();
        assert_eq!(gold.len(), 2);
        assert_eq!(gold.get("paints").unwrap().len(), 2);

        let bad = dir.path().join("bad.tsv");
        std::fs::write(&bad, "paints\tpain s\n").unwrap();
        assert!(load_gold_segmentations(&bad, true).is_err());
    }

    #[test]
    fn duplicate_gold_entries_keep_the_first() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("dup.tsv");
        std::fs::write(&p, "ab\ta b\nab\tab\n").unwrap();
        let gold = load_gold_segmentations(&p, true).unwrap();
        assert_eq!(gold.len(), 1);
        assert_eq!(gold.get("ab").unwrap()[0], vec!["a", "b"]);
    }
}
