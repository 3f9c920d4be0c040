//! The per-word candidate-selection program with affix-liveness coupling:
//! minimize -(1/|V|) sum x_ij p_ij + alpha sum y_k + (beta/|V|) sum x_i1
//! subject to one candidate per word and x_ij <= y_k for every affix k a
//! candidate needs. Solved exactly by branch-and-bound over y, or greedily by
//! affix-closure local search at scale.

use std::collections::BTreeSet;
use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::affixes::{AffixId, AffixSet};
use crate::candidates::{Candidate, DerivationType};
use crate::error::{Error, Result};

/// One candidate edge inside an instance. `affixes` are dense indices into
/// the instance's affix universe, not [`AffixId`]s.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IlpCandidate {
    pub parent: String,
    pub dtype: DerivationType,
    /// log Pr(z | w), the p_ij of the objective.
    pub log_prob: f64,
    pub affixes: Vec<u32>,
}

#[derive(Debug, Clone)]
pub struct IlpInstance {
    pub words: Vec<String>,
    /// Candidate lists; index 0 of every word is the STOP self-edge.
    pub cands: Vec<Vec<IlpCandidate>>,
    /// Dense affix index -> original id, sorted ascending.
    pub affix_ids: Vec<AffixId>,
    /// Dense affix index -> display name (for exports and reports).
    pub affix_names: Vec<String>,
    pub alpha: f64,
    pub beta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Proof {
    Exact,
    Heuristic,
}

impl Proof {
    pub fn as_str(self) -> &'static str {
        match self {
            Proof::Exact => "exact",
            Proof::Heuristic => "heuristic",
        }
    }
}

#[derive(Debug, Clone)]
pub struct IlpSolution {
    /// Chosen candidate index per word.
    pub choice: Vec<usize>,
    /// Dense indices of affixes with y_k = 1. Post-processed so that every
    /// open affix is used by at least one chosen candidate.
    pub open: BTreeSet<u32>,
    pub objective: f64,
    pub proof: Proof,
    /// True when the node budget ran out before the search space was closed.
    pub budget_exhausted: bool,
}

impl IlpSolution {
    pub fn open_affix_ids(&self, instance: &IlpInstance) -> BTreeSet<AffixId> {
        self.open
            .iter()
            .map(|&k| instance.affix_ids[k as usize])
            .collect()
    }
}

impl IlpInstance {
    pub fn vocab_size(&self) -> usize {
        self.words.len()
    }

    pub fn affix_count(&self) -> usize {
        self.affix_ids.len()
    }

    /// Per-word per-candidate cost: -p_ij/|V|, plus beta/|V| for STOP.
    fn cost(&self, i: usize, j: usize) -> f64 {
        let n = self.words.len() as f64;
        let base = -self.cands[i][j].log_prob / n;
        if j == 0 {
            base + self.beta / n
        } else {
            base
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.words.len() != self.cands.len() {
            return Err(Error::Contract("instance: words/cands length mismatch".into()));
        }
        for (i, cs) in self.cands.iter().enumerate() {
            if cs.is_empty() {
                return Err(Error::Contract(format!(
                    "word `{}` has an empty candidate set (STOP must exist)",
                    self.words[i]
                )));
            }
            if cs[0].dtype != DerivationType::Stop {
                return Err(Error::Contract(format!(
                    "word `{}`: first candidate must be STOP",
                    self.words[i]
                )));
            }
            for c in cs {
                if !c.log_prob.is_finite() {
                    return Err(Error::NonFinite(format!(
                        "log_prob of `{}` -> `{}`",
                        self.words[i], c.parent
                    )));
                }
                for &k in &c.affixes {
                    if k as usize >= self.affix_ids.len() {
                        return Err(Error::Contract(format!(
                            "candidate references unknown affix index {k}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Recompute the objective of an assignment from scratch:
    /// -(1/|V|) sum p + alpha |open| + (beta/|V|) #STOP.
    pub fn objective_of(&self, choice: &[usize], open: &BTreeSet<u32>) -> f64 {
        let mut total = 0.0;
        for (i, &j) in choice.iter().enumerate() {
            total += self.cost(i, j);
        }
        total + self.alpha * open.len() as f64
    }

    /// Check constraint families 4 and 5 plus the no-unused-open invariant.
    pub fn check_feasible(&self, sol: &IlpSolution) -> Result<()> {
        if sol.choice.len() != self.words.len() {
            return Err(Error::Contract("solution: one choice per word required".into()));
        }
        let mut used: BTreeSet<u32> = BTreeSet::new();
        for (i, &j) in sol.choice.iter().enumerate() {
            if j >= self.cands[i].len() {
                return Err(Error::Contract(format!(
                    "word `{}`: choice {j} out of range",
                    self.words[i]
                )));
            }
            for &k in &self.cands[i][j].affixes {
                if !sol.open.contains(&k) {
                    return Err(Error::Contract(format!(
                        "word `{}` uses closed affix `{}`",
                        self.words[i], self.affix_names[k as usize]
                    )));
                }
                used.insert(k);
            }
        }
        if let Some(&k) = sol.open.difference(&used).next() {
            return Err(Error::Contract(format!(
                "open affix `{}` is used by no chosen candidate",
                self.affix_names[k as usize]
            )));
        }
        Ok(())
    }
}

/// Build an instance from scored candidate sets. The affix universe is the
/// set of live affixes referenced by at least one candidate.
pub fn build_instance(
    scored: &[(String, Vec<Candidate>)],
    affixes: &AffixSet,
    alpha: f64,
    beta: f64,
) -> Result<IlpInstance> {
    let mut referenced: BTreeSet<AffixId> = BTreeSet::new();
    for (word, cands) in scored {
        if cands.is_empty() {
            return Err(Error::Contract(format!(
                "word `{word}` has an empty candidate set (STOP must exist)"
            )));
        }
        for c in cands {
            for &id in &c.affix_ids {
                if !affixes.is_live(id) {
                    return Err(Error::Contract(format!(
                        "candidate `{word}` -> `{}` uses dead affix `{}`",
                        c.parent,
                        affixes.display(id)
                    )));
                }
                referenced.insert(id);
            }
        }
    }
    let affix_ids: Vec<AffixId> = referenced.into_iter().collect();
    let dense: std::collections::HashMap<AffixId, u32> = affix_ids
        .iter()
        .enumerate()
        .map(|(k, &id)| (id, k as u32))
        .collect();
    let affix_names = affix_ids.iter().map(|&id| affixes.display(id)).collect();
    let words = scored.iter().map(|(w, _)| w.clone()).collect();
    let cands = scored
        .iter()
        .map(|(_, cs)| {
            cs.iter()
                .map(|c| IlpCandidate {
                    parent: c.parent.clone(),
                    dtype: c.dtype,
                    log_prob: c.log_prob,
                    affixes: c.affix_ids.iter().map(|id| dense[id]).collect(),
                })
                .collect()
        })
        .collect();
    let instance = IlpInstance {
        words,
        cands,
        affix_ids,
        affix_names,
        alpha,
        beta,
    };
    instance.validate()?;
    Ok(instance)
}

/// Rank of a derivation type for deterministic tie-breaking.
fn dtype_rank(d: DerivationType) -> u8 {
    match d {
        DerivationType::Stop => 0,
        DerivationType::Suffix => 1,
        DerivationType::Repeat => 2,
        DerivationType::Delete => 3,
        DerivationType::Modify => 4,
        DerivationType::CompoundLeft => 5,
        DerivationType::CompoundRight => 6,
        DerivationType::Prefix => 7,
    }
}

/// Shared solver state: blocked counts under a set of closed affixes and the
/// per-word minimum over the still-allowed candidates.
struct SolverState<'a> {
    instance: &'a IlpInstance,
    costs: Vec<Vec<f64>>,
    /// affix k -> (word, candidate) pairs that need it.
    users: Vec<Vec<(u32, u32)>>,
    blocked: Vec<Vec<u16>>,
    min_cost: Vec<f64>,
    min_j: Vec<usize>,
    sum_min: f64,
}

impl<'a> SolverState<'a> {
    fn new(instance: &'a IlpInstance) -> SolverState<'a> {
        let n = instance.words.len();
        let k = instance.affix_count();
        let costs: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..instance.cands[i].len()).map(|j| instance.cost(i, j)).collect())
            .collect();
        let mut users: Vec<Vec<(u32, u32)>> = vec![Vec::new(); k];
        for (i, cs) in instance.cands.iter().enumerate() {
            for (j, c) in cs.iter().enumerate() {
                for &a in &c.affixes {
                    users[a as usize].push((i as u32, j as u32));
                }
            }
        }
        let blocked: Vec<Vec<u16>> = (0..n)
            .map(|i| vec![0u16; instance.cands[i].len()])
            .collect();
        let mut st = SolverState {
            instance,
            costs,
            users,
            blocked,
            min_cost: vec![0.0; n],
            min_j: vec![0; n],
            sum_min: 0.0,
        };
        let mut sum = 0.0;
        for i in 0..n {
            let (j, c) = st.argmin_allowed(i);
            st.min_cost[i] = c;
            st.min_j[i] = j;
            sum += c;
        }
        st.sum_min = sum;
        st
    }

    /// Cheapest allowed candidate of word i. Ties prefer STOP, then the
    /// lexicographically smallest parent, then the derivation-type rank.
    fn argmin_allowed(&self, i: usize) -> (usize, f64) {
        let cands = &self.instance.cands[i];
        let mut best_j = 0usize; // STOP is never blocked
        let mut best = self.costs[i][0];
        debug_assert!(self.blocked[i][0] == 0);
        for j in 1..cands.len() {
            if self.blocked[i][j] > 0 {
                continue;
            }
            let c = self.costs[i][j];
            if c < best {
                best = c;
                best_j = j;
            } else if c == best && best_j != 0 {
                let a = (&cands[j].parent, dtype_rank(cands[j].dtype));
                let b = (&cands[best_j].parent, dtype_rank(cands[best_j].dtype));
                if a < b {
                    best_j = j;
                }
            }
        }
        (best_j, best)
    }

    /// Cheapest allowed candidate of word i avoiding affix k.
    fn min_without(&self, i: usize, k: u32) -> f64 {
        let cands = &self.instance.cands[i];
        let mut best = self.costs[i][0];
        for j in 1..cands.len() {
            if self.blocked[i][j] > 0 || cands[j].affixes.contains(&k) {
                continue;
            }
            if self.costs[i][j] < best {
                best = self.costs[i][j];
            }
        }
        best
    }

    /// Close affix k; returns the undo log of (word, old_min, old_j).
    fn close(&mut self, k: u32) -> Vec<(u32, f64, u32)> {
        let users = std::mem::take(&mut self.users[k as usize]);
        let mut dirty: Vec<u32> = Vec::new();
        for &(i, j) in &users {
            let b = &mut self.blocked[i as usize][j as usize];
            *b += 1;
            if *b == 1 && self.min_j[i as usize] == j as usize {
                dirty.push(i);
            }
        }
        let mut log = Vec::with_capacity(dirty.len());
        for &i in &dirty {
            let iu = i as usize;
            log.push((i, self.min_cost[iu], self.min_j[iu] as u32));
            let (j, c) = self.argmin_allowed(iu);
            self.sum_min += c - self.min_cost[iu];
            self.min_cost[iu] = c;
            self.min_j[iu] = j;
        }
        self.users[k as usize] = users;
        log
    }

    fn undo_close(&mut self, k: u32, log: Vec<(u32, f64, u32)>) {
        for &(i, old_min, old_j) in log.iter().rev() {
            let iu = i as usize;
            self.sum_min += old_min - self.min_cost[iu];
            self.min_cost[iu] = old_min;
            self.min_j[iu] = old_j as usize;
        }
        let users = std::mem::take(&mut self.users[k as usize]);
        for &(i, j) in &users {
            self.blocked[i as usize][j as usize] -= 1;
        }
        self.users[k as usize] = users;
    }

    fn fresh_sum_min(&self) -> f64 {
        self.min_cost.iter().sum()
    }

    fn choices(&self) -> Vec<usize> {
        (0..self.instance.words.len())
            .map(|i| self.argmin_allowed(i).0)
            .collect()
    }
}

/// Finalize an assignment: close opened-but-unused affixes and recompute the
/// objective from scratch.
fn finalize(
    instance: &IlpInstance,
    choice: Vec<usize>,
    proof: Proof,
    budget_exhausted: bool,
) -> IlpSolution {
    let mut used: BTreeSet<u32> = BTreeSet::new();
    for (i, &j) in choice.iter().enumerate() {
        used.extend(instance.cands[i][j].affixes.iter().copied());
    }
    let objective = instance.objective_of(&choice, &used);
    IlpSolution {
        choice,
        open: used,
        objective,
        proof,
        budget_exhausted,
    }
}

/// Greedy affix-closure local search: start from everything open with
/// per-word argmin choices, then repeatedly close the affix whose closure most
/// decreases the objective until no single closure improves.
pub fn solve_greedy(instance: &IlpInstance) -> Result<IlpSolution> {
    instance.validate()?;
    let k_total = instance.affix_count();
    let mut st = SolverState::new(instance);
    let mut closed = vec![false; k_total];
    loop {
        let mut best_k: Option<u32> = None;
        let mut best_delta = 0.0;
        for k in 0..k_total as u32 {
            if closed[k as usize] {
                continue;
            }
            // Closing k affects only words whose current best uses k.
            let mut delta = -instance.alpha;
            for &(i, j) in &st.users[k as usize] {
                if st.min_j[i as usize] == j as usize && st.blocked[i as usize][j as usize] == 0 {
                    delta += st.min_without(i as usize, k) - st.min_cost[i as usize];
                }
            }
            if delta < best_delta {
                best_delta = delta;
                best_k = Some(k);
            }
        }
        let Some(k) = best_k else { break };
        closed[k as usize] = true;
        st.close(k);
    }
    Ok(finalize(instance, st.choices(), Proof::Heuristic, false))
}

/// Exact branch-and-bound over affix subsets. For a fixed y each word picks
/// its cheapest allowed candidate; the relaxation bound treats undecided
/// affixes as open at zero cost. The greedy solution seeds the incumbent.
pub fn solve_exact(instance: &IlpInstance, node_budget: u64) -> Result<IlpSolution> {
    instance.validate()?;
    let k_total = instance.affix_count();

    let greedy = solve_greedy(instance)?;
    if k_total == 0 {
        let st = SolverState::new(instance);
        return Ok(finalize(instance, st.choices(), Proof::Exact, false));
    }

    let mut st = SolverState::new(instance);

    // Branch order: descending support x root saving; closes heavy
    // subtrees early.
    let mut order: Vec<u32> = (0..k_total as u32).collect();
    let scores: Vec<f64> = (0..k_total as u32)
        .map(|k| {
            let support = st.users[k as usize].len() as f64;
            let mut saving = 0.0;
            for &(i, j) in &st.users[k as usize] {
                if st.min_j[i as usize] == j as usize {
                    saving += st.min_without(i as usize, k) - st.min_cost[i as usize];
                }
            }
            support * saving
        })
        .collect();
    order.sort_by(|&a, &b| {
        scores[b as usize]
            .partial_cmp(&scores[a as usize])
            .unwrap()
            .then(a.cmp(&b))
    });

    struct Search<'a, 'b> {
        st: &'b mut SolverState<'a>,
        order: &'b [u32],
        alpha: f64,
        open_count: usize,
        nodes: u64,
        budget: u64,
        exhausted: bool,
        best_obj: f64,
        best_choice: Vec<usize>,
    }

    impl Search<'_, '_> {
        fn run(&mut self, depth: usize) {
            if self.exhausted {
                return;
            }
            self.nodes += 1;
            if self.nodes > self.budget {
                self.exhausted = true;
                return;
            }
            // Tiny slack so incremental-summation drift never prunes a true
            // optimum; equal-cost subtrees are re-examined at leaves instead.
            let bound = self.st.sum_min + self.alpha * self.open_count as f64;
            if bound >= self.best_obj + 1e-12 {
                return;
            }
            if depth == self.order.len() {
                let exact = self.st.fresh_sum_min() + self.alpha * self.open_count as f64;
                if exact < self.best_obj {
                    self.best_obj = exact;
                    self.best_choice = self.st.choices();
                }
                return;
            }
            let k = self.order[depth];
            // Closed branch first: sparsity pressure makes it the likely
            // optimum, which tightens the incumbent early.
            let log = self.st.close(k);
            self.run(depth + 1);
            self.st.undo_close(k, log);
            // Open branch.
            self.open_count += 1;
            self.run(depth + 1);
            self.open_count -= 1;
        }
    }

    let mut search = Search {
        st: &mut st,
        order: &order,
        alpha: instance.alpha,
        open_count: 0,
        nodes: 0,
        budget: node_budget,
        exhausted: false,
        best_obj: greedy.objective,
        best_choice: greedy.choice.clone(),
    };
    search.run(0);
    let exhausted = search.exhausted;
    let choice = search.best_choice.clone();
    let proof = if exhausted { Proof::Heuristic } else { Proof::Exact };
    Ok(finalize(instance, choice, proof, exhausted))
}

/// Per-word argmax of p_ij with the solver's tie-breaking; equivalent to the
/// alpha = beta = 0 program and used directly by the no-ILP mode.
pub fn argmax_choices(instance: &IlpInstance) -> Vec<usize> {
    let degenerate = IlpInstance {
        alpha: 0.0,
        beta: 0.0,
        ..instance.clone()
    };
    let st = SolverState::new(&degenerate);
    st.choices()
}

/// Write the exact program in LP format so an external MILP solver can
/// cross-check: binary x_{i}_{j} and y_{k}, one assignment row per word, one
/// linking row per (candidate, affix) pair.
pub fn export_lp(instance: &IlpInstance, mut out: impl Write) -> std::io::Result<()> {
    let n = instance.words.len() as f64;
    writeln!(out, "\\ candidate-selection program over {} words", instance.words.len())?;
    writeln!(out, "Minimize")?;
    let mut terms: Vec<(f64, String)> = Vec::new();
    for (i, cs) in instance.cands.iter().enumerate() {
        for (j, c) in cs.iter().enumerate() {
            let mut coeff = -c.log_prob / n;
            if j == 0 {
                coeff += instance.beta / n;
            }
            terms.push((coeff, format!("x_{i}_{j}")));
        }
    }
    for k in 0..instance.affix_count() {
        terms.push((instance.alpha, format!("y_{k}")));
    }
    write!(out, " obj:")?;
    for (idx, (coeff, var)) in terms.iter().enumerate() {
        if idx == 0 {
            write!(out, " {coeff} {var}")?;
        } else if *coeff < 0.0 {
            write!(out, " - {} {var}", -coeff)?;
        } else {
            write!(out, " + {coeff} {var}")?;
        }
        if idx % 8 == 7 {
            writeln!(out)?;
            write!(out, "  ")?;
        }
    }
    writeln!(out)?;
    writeln!(out, "Subject To")?;
    for (i, cs) in instance.cands.iter().enumerate() {
        let row: Vec<String> = (0..cs.len()).map(|j| format!("x_{i}_{j}")).collect();
        writeln!(out, " assign_{i}: {} = 1", row.join(" + "))?;
    }
    for (i, cs) in instance.cands.iter().enumerate() {
        for (j, c) in cs.iter().enumerate() {
            for &k in &c.affixes {
                writeln!(out, " link_{i}_{j}_{k}: x_{i}_{j} - y_{k} <= 0")?;
            }
        }
    }
    writeln!(out, "Binary")?;
    for (i, cs) in instance.cands.iter().enumerate() {
        for j in 0..cs.len() {
            writeln!(out, " x_{i}_{j}")?;
        }
    }
    for k in 0..instance.affix_count() {
        writeln!(out, " y_{k}")?;
    }
    writeln!(out, "End")?;
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct SnapshotHeader {
    alpha: f64,
    beta: f64,
    affixes: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct SnapshotWord {
    word: String,
    candidates: Vec<IlpCandidate>,
}

/// Instance snapshot as JSON lines: a header with alpha/beta/affix names,
/// then one line per word with its candidates and costs.
pub fn write_snapshot(instance: &IlpInstance, mut out: impl Write) -> Result<()> {
    let io_err = |e: std::io::Error| Error::Io {
        path: "<snapshot>".into(),
        source: e,
    };
    let ser_err = |e: serde_json::Error| Error::Parse {
        path: "<snapshot>".into(),
        line: 0,
        msg: e.to_string(),
    };
    let header = SnapshotHeader {
        alpha: instance.alpha,
        beta: instance.beta,
        affixes: instance.affix_names.clone(),
    };
    writeln!(out, "{}", serde_json::to_string(&header).map_err(ser_err)?).map_err(io_err)?;
    for (word, cands) in instance.words.iter().zip(&instance.cands) {
        let row = SnapshotWord {
            word: word.clone(),
            candidates: cands.clone(),
        };
        writeln!(out, "{}", serde_json::to_string(&row).map_err(ser_err)?).map_err(io_err)?;
    }
    Ok(())
}

/// Reload a snapshot written by [`write_snapshot`]. Affix ids are assigned
/// positionally, so solve results are replayable byte for byte.
pub fn read_snapshot(r: impl BufRead) -> Result<IlpInstance> {
    let mut lines = r.lines().enumerate();
    let parse_err = |no: usize, msg: String| Error::Parse {
        path: "<snapshot>".into(),
        line: no + 1,
        msg,
    };
    let (no, first) = lines
        .next()
        .ok_or_else(|| parse_err(0, "empty snapshot".into()))?;
    let first = first.map_err(|e| Error::Io {
        path: "<snapshot>".into(),
        source: e,
    })?;
    let header: SnapshotHeader =
        serde_json::from_str(&first).map_err(|e| parse_err(no, e.to_string()))?;
    let mut words = Vec::new();
    let mut cands = Vec::new();
    for (no, line) in lines {
        let line = line.map_err(|e| Error::Io {
            path: "<snapshot>".into(),
            source: e,
        })?;
        if line.is_empty() {
            continue;
        }
        let row: SnapshotWord =
            serde_json::from_str(&line).map_err(|e| parse_err(no, e.to_string()))?;
        words.push(row.word);
        cands.push(row.candidates);
    }
    let instance = IlpInstance {
        words,
        cands,
        affix_ids: (0..header.affixes.len() as u32).map(AffixId).collect(),
        affix_names: header.affixes,
        alpha: header.alpha,
        beta: header.beta,
    };
    instance.validate()?;
    Ok(instance)
}

pub fn export_lp_file(instance: &IlpInstance, path: &Path) -> Result<()> {
    let f = std::fs::File::create(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    export_lp(instance, std::io::BufWriter::new(f)).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}
