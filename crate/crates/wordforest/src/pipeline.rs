//! Alternating training driver, the resulting forest, and decoding into
//! segmentations, families, and roots.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::{BufRead, Write};

use serde::Serialize;

use crate::affixes::{extract_affixes, AffixId, AffixSet, ExtractOptions};
use crate::candidates::{
    boundary_in_child, gen_candidates, register_markers, Candidate, CandidateConfig,
    DerivationType,
};
use crate::config::{IlpMode, RunConfig};
use crate::corpus::{Vocabulary, WordVectors};
use crate::error::{Error, Result};
use crate::features::{
    build_sibling_table, featurize, FeatureConfig, FeatureContext, FeatureIndex, SiblingTable,
};
use crate::ilp::{argmax_choices, build_instance, solve_exact, solve_greedy, IlpSolution};
use crate::model::{adam_fit, cand_logits, Theta, TrainingBatch};
use crate::util::char_count;

/// One chosen edge of the forest.
#[derive(Debug, Clone, PartialEq)]
pub struct ForestEdge {
    pub parent: String,
    pub dtype: DerivationType,
    pub affix_ids: Vec<AffixId>,
    pub log_prob: f64,
}

/// Per-word chosen edges. Every vocabulary word has exactly one; parents may
/// be strings outside the vocabulary (they root their trees).
#[derive(Debug, Clone, Default)]
pub struct Forest {
    edges: BTreeMap<String, ForestEdge>,
}

impl Forest {
    pub fn new() -> Forest {
        Forest::default()
    }

    pub fn insert(&mut self, child: String, edge: ForestEdge) {
        self.edges.insert(child, edge);
    }

    pub fn get(&self, word: &str) -> Option<&ForestEdge> {
        self.edges.get(word)
    }

    pub fn contains(&self, word: &str) -> bool {
        self.edges.contains_key(word)
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &ForestEdge)> {
        self.edges.iter().map(|(w, e)| (w.as_str(), e))
    }

    /// Tree count as the objective sees it: the number of STOP self-edges.
    pub fn tree_count(&self) -> usize {
        self.edges
            .values()
            .filter(|e| e.dtype == DerivationType::Stop)
            .count()
    }

    /// Structural checks: one edge per word (by construction), STOP edges are
    /// self-edges, and every non-STOP parent is strictly shorter.
    pub fn validate(&self) -> Result<()> {
        for (child, edge) in &self.edges {
            if edge.dtype == DerivationType::Stop {
                if edge.parent != *child {
                    return Err(Error::Contract(format!(
                        "STOP edge of `{child}` points to `{}`",
                        edge.parent
                    )));
                }
            } else if char_count(&edge.parent) >= char_count(child) {
                return Err(Error::Contract(format!(
                    "edge `{child}` -> `{}` does not shrink",
                    edge.parent
                )));
            }
        }
        Ok(())
    }

    /// `child<TAB>parent<TAB>dtype<TAB>affixes<TAB>logprob`, sorted by child.
    pub fn write_tsv(&self, affixes: &AffixSet, mut w: impl Write) -> std::io::Result<()> {
        for (child, e) in &self.edges {
            let names = if e.affix_ids.is_empty() {
                "-".to_string()
            } else {
                e.affix_ids
                    .iter()
                    .map(|&id| affixes.display(id))
                    .collect::<Vec<_>>()
                    .join(",")
            };
            writeln!(
                w,
                "{child}\t{}\t{}\t{}\t{}",
                e.parent,
                e.dtype.as_str(),
                names,
                e.log_prob
            )?;
        }
        Ok(())
    }

    pub fn read_tsv(r: impl BufRead, affixes: &AffixSet) -> Result<Forest> {
        let mut forest = Forest::new();
        for (no, line) in r.lines().enumerate() {
            let line = line.map_err(|e| Error::Io {
                path: "<forest>".into(),
                source: e,
            })?;
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| Error::Parse {
                path: "<forest>".into(),
                line: no + 1,
                msg,
            };
            let f: Vec<&str> = line.split('\t').collect();
            if f.len() != 5 {
                return Err(err(format!("expected 5 fields, got {}", f.len())));
            }
            let dtype = DerivationType::parse(f[2])?;
            let affix_ids = if f[3] == "-" {
                Vec::new()
            } else {
                f[3].split(',')
                    .map(|name| {
                        affixes
                            .lookup_display(name)
                            .ok_or_else(|| err(format!("unknown affix `{name}`")))
                    })
                    .collect::<Result<Vec<_>>>()?
            };
            let log_prob: f64 = f[4]
                .parse()
                .map_err(|_| err(format!("bad logprob `{}`", f[4])))?;
            forest.insert(
                f[0].to_string(),
                ForestEdge {
                    parent: f[1].to_string(),
                    dtype,
                    affix_ids,
                    log_prob,
                },
            );
        }
        Ok(forest)
    }
}

/// Eq. of the forest objective: mean negative edge log-probability plus
/// alpha x (affixes used) plus beta x (trees / vocabulary size).
pub fn score_forest(forest: &Forest, alpha: f64, beta: f64) -> f64 {
    if forest.is_empty() {
        return 0.0;
    }
    let n = forest.len() as f64;
    let neg_logprob: f64 = forest.iter().map(|(_, e)| -e.log_prob).sum();
    let used: BTreeSet<AffixId> = forest
        .iter()
        .flat_map(|(_, e)| e.affix_ids.iter().copied())
        .collect();
    neg_logprob / n + alpha * used.len() as f64 + beta * forest.tree_count() as f64 / n
}

/// Morphological families: connected components under the chosen edges, keyed
/// by the root string. Only vocabulary words (forest keys) are members;
/// out-of-vocabulary parents key their cluster without joining it.
pub fn families(forest: &Forest) -> Vec<(String, BTreeSet<String>)> {
    let mut root_cache: HashMap<String, String> = HashMap::new();
    let mut clusters: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for (word, _) in forest.iter() {
        let root = forest_root(forest, word, &mut root_cache);
        clusters.entry(root).or_default().insert(word.to_string());
    }
    clusters.into_iter().collect()
}

/// Terminal of a word's parent chain inside the forest: the STOP word, or the
/// first parent with no edge of its own.
fn forest_root(forest: &Forest, word: &str, cache: &mut HashMap<String, String>) -> String {
    let mut path: Vec<String> = Vec::new();
    let mut cur = word.to_string();
    let root = loop {
        if let Some(r) = cache.get(&cur) {
            break r.clone();
        }
        match forest.get(&cur) {
            None => break cur.clone(),
            Some(e) if e.dtype == DerivationType::Stop => break cur.clone(),
            Some(e) => {
                path.push(cur.clone());
                cur = e.parent.clone();
            }
        }
    };
    for p in path {
        cache.insert(p, root.clone());
    }
    root
}

/// A word's surface segmentation: split positions (in chars) plus the
/// canonical root (transforms restore the parent form, e.g. tak-ing / take).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Segmentation {
    pub word: String,
    pub boundaries: Vec<usize>,
    pub morphs: Vec<String>,
    pub root: String,
}

impl Segmentation {
    fn from_boundaries(word: &str, bounds: &BTreeSet<usize>, root: String) -> Segmentation {
        let chars: Vec<char> = word.chars().collect();
        let mut cuts: Vec<usize> = bounds
            .iter()
            .copied()
            .filter(|&b| b > 0 && b < chars.len())
            .collect();
        cuts.sort_unstable();
        let mut morphs = Vec::with_capacity(cuts.len() + 1);
        let mut prev = 0;
        for &b in cuts.iter().chain(std::iter::once(&chars.len())) {
            morphs.push(chars[prev..b].iter().collect());
            prev = b;
        }
        Segmentation {
            word: word.to_string(),
            boundaries: cuts,
            morphs,
            root,
        }
    }
}

/// Everything needed to score candidates after training: the weights, the
/// frozen feature space, the surviving affixes, and the feature context data.
pub struct TrainedModel {
    pub theta: Theta,
    pub features: FeatureIndex,
    pub affixes: AffixSet,
    pub siblings: SiblingTable,
    pub cand_cfg: CandidateConfig,
    pub feat_cfg: FeatureConfig,
}

impl TrainedModel {
    /// Score C(w) under theta and pick the best candidate, with the solver's
    /// tie-breaking (prefer STOP, then lexicographically smallest parent).
    pub fn best_edge(&self, word: &str, vocab: &Vocabulary, vectors: &WordVectors) -> ForestEdge {
        let mut cands = gen_candidates(word, vocab, &self.affixes, &self.cand_cfg);
        let ctx = FeatureContext {
            vocab,
            vectors,
            affixes: &self.affixes,
            siblings: &self.siblings,
        };
        // The index is frozen; featurize only reads it.
        let mut index = self.features.clone();
        let feats: Vec<_> = cands
            .iter()
            .map(|z| featurize(word, z, &ctx, &self.feat_cfg, &mut index))
            .collect();
        let logits = cand_logits(&feats, &self.theta);
        crate::model::assign_log_probs(&mut cands, &logits);
        let mut best = 0usize;
        for j in 1..cands.len() {
            let better = match cands[j].log_prob.partial_cmp(&cands[best].log_prob) {
                Some(std::cmp::Ordering::Greater) => true,
                Some(std::cmp::Ordering::Equal) => {
                    best != 0
                        && (cands[j].parent.as_str(), cands[j].dtype.as_str())
                            < (cands[best].parent.as_str(), cands[best].dtype.as_str())
                }
                _ => false,
            };
            if better {
                best = j;
            }
        }
        let c = cands.swap_remove(best);
        ForestEdge {
            parent: c.parent,
            dtype: c.dtype,
            affix_ids: c.affix_ids,
            log_prob: c.log_prob,
        }
    }
}

/// Read-only decoding facade over a trained model plus its forest. Words in
/// the forest follow their chosen edges; unseen words are decoded by greedy
/// recursive argmax until they stop or reach a forest word.
pub struct Decoder<'a> {
    pub model: &'a TrainedModel,
    pub vocab: &'a Vocabulary,
    pub vectors: &'a WordVectors,
    pub forest: &'a Forest,
}

enum Step {
    Edge(ForestEdge),
    /// Chain ends here: STOP edge, or an induced parent with no edge.
    Root,
}

impl Decoder<'_> {
    fn step(&self, word: &str, in_forest_chain: bool) -> Step {
        if let Some(e) = self.forest.get(word) {
            return if e.dtype == DerivationType::Stop {
                Step::Root
            } else {
                Step::Edge(e.clone())
            };
        }
        if in_forest_chain {
            // An induced out-of-vocabulary parent roots its tree.
            return Step::Root;
        }
        let e = self.model.best_edge(word, self.vocab, self.vectors);
        if e.dtype == DerivationType::Stop {
            Step::Root
        } else {
            Step::Edge(e)
        }
    }

    /// Follow the chain from `word`, accumulating surface boundaries at
    /// `offset` into `bounds`; returns the canonical root of the chain.
    fn walk(
        &self,
        word: &str,
        offset: usize,
        bounds: &mut BTreeSet<usize>,
        recurse: bool,
        mut in_forest_chain: bool,
    ) -> String {
        let mut cur = word.to_string();
        let mut cur_offset = offset;
        // Surface length available for mapping deeper boundaries; only the
        // shared prefix with the current surface form is addressable.
        let mut surface_limit = char_count(word);
        loop {
            in_forest_chain = in_forest_chain || self.forest.contains(&cur);
            let step = self.step(&cur, in_forest_chain);
            let edge = match step {
                Step::Root => return cur,
                Step::Edge(e) => e,
            };
            let b = boundary_in_child(
                &Candidate {
                    child: cur.clone(),
                    parent: edge.parent.clone(),
                    dtype: edge.dtype,
                    affix_ids: edge.affix_ids.clone(),
                    log_prob: edge.log_prob,
                },
                &self.model.affixes,
            )
            .expect("non-stop edge has a boundary");
            if b < surface_limit {
                bounds.insert(cur_offset + b);
            }
            if !recurse {
                // Single-step mode: one split, the immediate parent as root.
                return edge.parent;
            }
            match edge.dtype {
                DerivationType::Suffix | DerivationType::Repeat => {
                    // Parent is a prefix of the surface string.
                    surface_limit = surface_limit.min(b);
                    cur = edge.parent;
                }
                DerivationType::Delete | DerivationType::Modify => {
                    // Surface keeps the child stem; canonical parent differs
                    // past the shared prefix.
                    let parent_chars = char_count(&edge.parent);
                    let shared = if edge.dtype == DerivationType::Delete {
                        b.min(parent_chars)
                    } else {
                        b.saturating_sub(1).min(parent_chars)
                    };
                    surface_limit = surface_limit.min(shared);
                    cur = edge.parent;
                }
                DerivationType::Prefix => {
                    cur_offset += b;
                    surface_limit = surface_limit.saturating_sub(b);
                    cur = edge.parent;
                }
                DerivationType::CompoundLeft => {
                    let right: String = cur.chars().skip(b).collect();
                    self.walk(&right, cur_offset + b, bounds, true, false);
                    surface_limit = surface_limit.min(b);
                    cur = edge.parent;
                }
                DerivationType::CompoundRight => {
                    let left: String = cur.chars().take(b).collect();
                    self.walk(&left, cur_offset, bounds, true, false);
                    cur_offset += b;
                    surface_limit = surface_limit.saturating_sub(b);
                    cur = edge.parent;
                }
                DerivationType::Stop => unreachable!(),
            }
        }
    }

    /// Surface segmentation of `word`. With `recurse` false only the first
    /// derivation step is split off.
    pub fn segment(&self, word: &str, recurse: bool) -> Segmentation {
        let mut bounds = BTreeSet::new();
        let root = self.walk(word, 0, &mut bounds, recurse, false);
        Segmentation::from_boundaries(word, &bounds, root)
    }

    /// Terminal parent of the chain: the canonical root string.
    pub fn root_of(&self, word: &str) -> String {
        let mut bounds = BTreeSet::new();
        self.walk(word, 0, &mut bounds, true, false)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RoundReport {
    pub round: usize,
    pub live_affixes_before: usize,
    pub live_affixes_after: usize,
    pub pruned: usize,
    pub adam_first_loss: f64,
    pub adam_final_loss: f64,
    #[serde(skip)]
    pub loss_curve: Vec<f64>,
    pub ilp_objective: Option<f64>,
    pub ilp_proof: Option<String>,
    pub forest_score: f64,
    pub trees: usize,
    /// Display names of the affixes still live after this round's prune.
    pub live_after: Vec<String>,
}

#[derive(Debug, Serialize)]
pub struct TrainReport {
    pub rounds: Vec<RoundReport>,
    #[serde(skip)]
    pub forest: Forest,
}

pub struct TrainOutcome {
    pub report: TrainReport,
    pub model: TrainedModel,
}

fn forest_from_choices(scored: &[(String, Vec<Candidate>)], choice: &[usize]) -> Forest {
    let mut forest = Forest::new();
    for ((word, cands), &j) in scored.iter().zip(choice) {
        let c = &cands[j];
        forest.insert(
            word.clone(),
            ForestEdge {
                parent: c.parent.clone(),
                dtype: c.dtype,
                affix_ids: c.affix_ids.clone(),
                log_prob: c.log_prob,
            },
        );
    }
    forest
}

/// Alternating training: extract affixes, then per round fit theta by
/// contrastive estimation, solve the selection program, prune the affix set
/// to its open affixes, and stop early once nothing is pruned. In `Off` mode
/// a single round produces the per-word argmax forest.
pub fn train(vocab: &Vocabulary, vectors: &WordVectors, cfg: &RunConfig) -> Result<TrainOutcome> {
    cfg.validate()?;
    if vocab.is_empty() {
        return Err(Error::EmptyVocabulary("train".into()));
    }
    let cand_cfg = CandidateConfig::from_run(cfg);
    let feat_cfg = FeatureConfig::from_run(cfg);
    let mut affixes = extract_affixes(
        vocab,
        &ExtractOptions {
            max_per_side: cfg.affixes_per_side,
            min_support: cfg.min_affix_support,
            min_parent_len: cfg.min_parent_len,
            max_affix_len: cfg.max_affix_len,
            total_bound: cfg.affix_bound_total,
        },
    );
    register_markers(&mut affixes, &cand_cfg);

    let words: Vec<String> = vocab.words().map(str::to_string).collect();
    let mut siblings = build_sibling_table(vocab, &affixes, cfg.min_stem);
    let mut index = FeatureIndex::new();
    let mut theta = Theta::zeros(0);
    let mut rounds: Vec<RoundReport> = Vec::new();
    let mut forest = Forest::new();

    let total_rounds = if cfg.ilp_mode == IlpMode::Off { 1 } else { cfg.rounds };
    for round in 1..=total_rounds {
        let live_before = affixes.live_count();
        let ctx = FeatureContext {
            vocab,
            vectors,
            affixes: &affixes,
            siblings: &siblings,
        };
        let mut batch = TrainingBatch::build(
            &words,
            &ctx,
            &cand_cfg,
            &feat_cfg,
            cfg.max_neighbors,
            cfg.seed,
            &mut index,
        )?;
        if round == 1 {
            index.freeze();
            theta = Theta::zeros(index.len());
        } else if !cfg.warm_start {
            theta = Theta::zeros(index.len());
        }
        let fit = adam_fit(&batch, theta, cfg.adam, cfg.l2)?;
        theta = fit.theta;
        batch.assign_log_probs(&theta);
        let scored = batch.into_scored();

        let (solution, pruned_to): (Option<IlpSolution>, Option<BTreeSet<AffixId>>) =
            if cfg.ilp_mode == IlpMode::Off {
                let instance = build_instance(&scored, &affixes, 0.0, 0.0)?;
                let choice = argmax_choices(&instance);
                forest = forest_from_choices(&scored, &choice);
                (None, None)
            } else {
                let instance = build_instance(&scored, &affixes, cfg.alpha, cfg.beta)?;
                let use_exact = match cfg.ilp_mode {
                    IlpMode::Exact => true,
                    IlpMode::Greedy => false,
                    _ => instance.affix_count() <= cfg.ilp_exact_limit,
                };
                let sol = if use_exact {
                    solve_exact(&instance, cfg.ilp_node_budget)?
                } else {
                    solve_greedy(&instance)?
                };
                forest = forest_from_choices(&scored, &sol.choice);
                let kept = sol.open_affix_ids(&instance);
                (Some(sol), Some(kept))
            };

        let report = RoundReport {
            round,
            live_affixes_before: live_before,
            live_affixes_after: live_before,
            pruned: 0,
            adam_first_loss: fit.losses.first().copied().unwrap_or(0.0),
            adam_final_loss: fit.losses.last().copied().unwrap_or(0.0),
            loss_curve: fit.losses,
            ilp_objective: solution.as_ref().map(|s| s.objective),
            ilp_proof: solution.as_ref().map(|s| {
                if s.budget_exhausted {
                    format!("{} (node budget exhausted)", s.proof.as_str())
                } else {
                    s.proof.as_str().to_string()
                }
            }),
            forest_score: score_forest(&forest, cfg.alpha, cfg.beta),
            trees: forest.tree_count(),
            live_after: Vec::new(),
        };
        rounds.push(report);

        if let Some(kept) = pruned_to {
            affixes = affixes.prune(&kept)?;
            siblings = SiblingTable::from_forest(&forest);
            let after = affixes.live_count();
            let last = rounds.last_mut().unwrap();
            last.live_affixes_after = after;
            last.pruned = live_before - after;
            last.live_after = affixes
                .live_ids()
                .into_iter()
                .map(|id| affixes.display(id))
                .collect();
            if live_before == after {
                break;
            }
        } else {
            let last = rounds.last_mut().unwrap();
            last.live_after = affixes
                .live_ids()
                .into_iter()
                .map(|id| affixes.display(id))
                .collect();
        }
    }

    debug_assert_eq!(forest.len(), vocab.len());
    forest.validate()?;
    Ok(TrainOutcome {
        report: TrainReport {
            rounds,
            forest,
        },
        model: TrainedModel {
            theta,
            features: index,
            affixes,
            siblings,
            cand_cfg,
            feat_cfg,
        },
    })
}
