//! The log-linear edge model, its contrastive-estimation loss/gradient, and
//! full-batch Adam.

use std::io::{BufRead, Write};

use crate::candidates::{gen_candidates, gen_neighbors, Candidate, CandidateConfig};
use crate::config::AdamOptions;
use crate::error::{Error, Result};
use crate::features::{featurize, FeatureConfig, FeatureContext, FeatureIndex, SparseVector};
use crate::util::logsumexp;

/// Learned weight vector over [`FeatureIndex`] ids.
#[derive(Debug, Clone, PartialEq)]
pub struct Theta(pub Vec<f64>);

impl Theta {
    pub fn zeros(n: usize) -> Theta {
        Theta(vec![0.0; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `feature<TAB>weight` rows in id order; reload with [`Theta::read_tsv`].
    pub fn write_tsv(&self, index: &FeatureIndex, mut w: impl Write) -> std::io::Result<()> {
        for (i, name) in index.names().iter().enumerate() {
            writeln!(w, "{name}\t{}", self.0[i])?;
        }
        Ok(())
    }

    pub fn read_tsv(r: impl BufRead) -> Result<(FeatureIndex, Theta)> {
        let mut names = Vec::new();
        let mut weights = Vec::new();
        for (no, line) in r.lines().enumerate() {
            let line = line.map_err(|e| Error::Io {
                path: "<model>".into(),
                source: e,
            })?;
            if line.is_empty() {
                continue;
            }
            let (name, weight) = line.split_once('\t').ok_or_else(|| Error::Parse {
                path: "<model>".into(),
                line: no + 1,
                msg: "expected `feature<TAB>weight`".into(),
            })?;
            let weight: f64 = weight.parse().map_err(|_| Error::Parse {
                path: "<model>".into(),
                line: no + 1,
                msg: format!("bad weight `{weight}`"),
            })?;
            names.push(name.to_string());
            weights.push(weight);
        }
        Ok((FeatureIndex::from_names(names), Theta(weights)))
    }
}

/// Raw logits theta . phi(w, z) for a candidate list.
pub fn cand_logits(feats: &[SparseVector], theta: &Theta) -> Vec<f64> {
    feats.iter().map(|f| f.dot(&theta.0)).collect()
}

/// Normalize logits within C(w) and store log Pr(z | w) on each candidate.
pub fn assign_log_probs(cands: &mut [Candidate], logits: &[f64]) {
    debug_assert_eq!(cands.len(), logits.len());
    let lse = logsumexp(logits);
    for (c, &l) in cands.iter_mut().zip(logits) {
        c.log_prob = l - lse;
    }
}

struct NeighborEntry {
    #[allow(dead_code)]
    string: String,
    feats: Vec<SparseVector>,
}

struct WordEntry {
    word: String,
    cands: Vec<Candidate>,
    feats: Vec<SparseVector>,
    /// Perturbed neighbor strings, excluding the word itself (which always
    /// participates in the denominator pool first).
    neighbors: Vec<NeighborEntry>,
}

/// Featurized training batch: candidate sets and neighborhoods for a word
/// list, with every feature vector computed once up front.
pub struct TrainingBatch {
    entries: Vec<WordEntry>,
    dims: usize,
}

impl TrainingBatch {
    /// Featurize candidates for `words` and their transposition neighborhoods.
    /// Grows `index` unless it is frozen.
    pub fn build(
        words: &[String],
        ctx: &FeatureContext,
        cand_cfg: &CandidateConfig,
        feat_cfg: &FeatureConfig,
        max_neighbors: usize,
        seed: u64,
        index: &mut FeatureIndex,
    ) -> Result<TrainingBatch> {
        let mut entries = Vec::with_capacity(words.len());
        for w in words {
            let cands = gen_candidates(w, ctx.vocab, ctx.affixes, cand_cfg);
            if cands.is_empty() {
                return Err(Error::Contract(format!("word `{w}` has no candidates")));
            }
            let feats: Vec<SparseVector> = cands
                .iter()
                .map(|z| featurize(w, z, ctx, feat_cfg, index))
                .collect();
            let hood = gen_neighbors(w, max_neighbors, seed);
            let mut neighbors = Vec::with_capacity(hood.neighbors.len().saturating_sub(1));
            for n in hood.neighbors.iter().skip(1) {
                let ncands = gen_candidates(n, ctx.vocab, ctx.affixes, cand_cfg);
                let nfeats = ncands
                    .iter()
                    .map(|z| featurize(n, z, ctx, feat_cfg, index))
                    .collect();
                neighbors.push(NeighborEntry {
                    string: n.clone(),
                    feats: nfeats,
                });
            }
            entries.push(WordEntry {
                word: w.clone(),
                cands,
                feats,
                neighbors,
            });
        }
        Ok(TrainingBatch {
            entries,
            dims: index.len(),
        })
    }

    /// Assemble a batch from raw parts; the test harness uses this to build
    /// hand-crafted instances without going through featurize.
    pub fn from_raw(items: Vec<(String, Vec<Candidate>, Vec<SparseVector>, Vec<Vec<SparseVector>>)>, dims: usize) -> TrainingBatch {
        let entries = items
            .into_iter()
            .map(|(word, cands, feats, nbr)| WordEntry {
                word,
                cands,
                feats,
                neighbors: nbr
                    .into_iter()
                    .map(|feats| NeighborEntry {
                        string: String::new(),
                        feats,
                    })
                    .collect(),
            })
            .collect();
        TrainingBatch { entries, dims }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn word(&self, i: usize) -> &str {
        &self.entries[i].word
    }

    pub fn candidates(&self, i: usize) -> &[Candidate] {
        &self.entries[i].cands
    }

    pub fn features(&self, i: usize) -> &[SparseVector] {
        &self.entries[i].feats
    }

    /// Score all candidate sets under `theta` and store within-word
    /// log-probabilities on the candidates.
    pub fn assign_log_probs(&mut self, theta: &Theta) {
        for e in &mut self.entries {
            let logits = cand_logits(&e.feats, theta);
            assign_log_probs(&mut e.cands, &logits);
        }
    }

    /// Take the scored candidate sets out of the batch.
    pub fn into_scored(self) -> Vec<(String, Vec<Candidate>)> {
        self.entries
            .into_iter()
            .map(|e| (e.word, e.cands))
            .collect()
    }
}

/// Contrastive-estimation loss and gradient over the whole batch:
/// loss = sum_v [ LSE_{N(v) x C} - LSE_{C(v)} ] (+ L2), gradient
/// sum_v [ E_N phi - E_C phi ] (+ L2), accumulated in a fixed order so
/// training is reproducible.
pub fn ce_loss_and_grad(batch: &TrainingBatch, theta: &Theta, l2: f64) -> Result<(f64, Vec<f64>)> {
    let mut loss = 0.0;
    let mut grad = vec![0.0; theta.len()];
    let mut pool_logits: Vec<f64> = Vec::new();
    for e in &batch.entries {
        if e.feats.is_empty() {
            return Err(Error::Contract(format!(
                "word `{}` has an empty candidate set",
                e.word
            )));
        }
        let own_logits = cand_logits(&e.feats, theta);
        let lse_c = logsumexp(&own_logits);

        pool_logits.clear();
        pool_logits.extend_from_slice(&own_logits);
        for n in &e.neighbors {
            for f in &n.feats {
                pool_logits.push(f.dot(&theta.0));
            }
        }
        let lse_n = logsumexp(&pool_logits);
        loss += lse_n - lse_c;

        // E_N phi - E_C phi, fused per own candidate so that the N(v) = {v}
        // case cancels exactly.
        let mut k = 0;
        for (f, &l) in e.feats.iter().zip(&own_logits) {
            let q = (pool_logits[k] - lse_n).exp();
            let p = (l - lse_c).exp();
            f.add_scaled_into(&mut grad, q - p);
            k += 1;
        }
        for n in &e.neighbors {
            for f in &n.feats {
                f.add_scaled_into(&mut grad, (pool_logits[k] - lse_n).exp());
                k += 1;
            }
        }
    }
    if l2 > 0.0 {
        for (g, &t) in grad.iter_mut().zip(&theta.0) {
            loss += 0.5 * l2 * t * t;
            *g += l2 * t;
        }
    }
    Ok((loss, grad))
}

/// Adam optimizer state: step count plus first/second moment vectors.
#[derive(Debug, Clone)]
pub struct AdamState {
    pub step: u64,
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub opts: AdamOptions,
}

impl AdamState {
    pub fn new(dims: usize, opts: AdamOptions) -> AdamState {
        AdamState {
            step: 0,
            m: vec![0.0; dims],
            v: vec![0.0; dims],
            opts,
        }
    }

    /// One bias-corrected update in place.
    pub fn update(&mut self, theta: &mut Theta, grad: &[f64]) {
        debug_assert_eq!(theta.len(), grad.len());
        debug_assert_eq!(theta.len(), self.m.len());
        self.step += 1;
        let o = &self.opts;
        let bc1 = 1.0 - o.beta1.powi(self.step as i32);
        let bc2 = 1.0 - o.beta2.powi(self.step as i32);
        for i in 0..grad.len() {
            self.m[i] = o.beta1 * self.m[i] + (1.0 - o.beta1) * grad[i];
            self.v[i] = o.beta2 * self.v[i] + (1.0 - o.beta2) * grad[i] * grad[i];
            let m_hat = self.m[i] / bc1;
            let v_hat = self.v[i] / bc2;
            theta.0[i] -= o.lr * m_hat / (v_hat.sqrt() + o.eps);
        }
    }
}

pub struct FitResult {
    pub theta: Theta,
    /// Loss evaluated at the start of each iteration.
    pub losses: Vec<f64>,
}

/// Full-batch Adam for `opts.iters` iterations from `theta0`. Aborts with
/// diagnostics if the loss or gradient goes non-finite.
pub fn adam_fit(batch: &TrainingBatch, theta0: Theta, opts: AdamOptions, l2: f64) -> Result<FitResult> {
    let mut theta = theta0;
    if theta.len() != batch.dims() {
        return Err(Error::Contract(format!(
            "theta has {} weights but the batch was featurized over {} dimensions",
            theta.len(),
            batch.dims()
        )));
    }
    let mut state = AdamState::new(theta.len(), opts);
    let mut losses = Vec::with_capacity(opts.iters);
    for iter in 0..opts.iters {
        let (loss, grad) = ce_loss_and_grad(batch, &theta, l2)?;
        if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::NonFinite(format!(
                "loss/gradient at iteration {iter} (loss = {loss})"
            )));
        }
        losses.push(loss);
        state.update(&mut theta, &grad);
    }
    Ok(FitResult { theta, losses })
}
