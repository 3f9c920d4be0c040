//! Affix inventories: automatic extraction from vocabulary string differences,
//! plus the live/pruned bookkeeping that ILP feedback drives.

use std::collections::{BTreeSet, HashMap};
use std::io::{BufRead, Write};

use crate::corpus::Vocabulary;
use crate::error::{Error, Result};
use crate::util::char_count;

/// Index into an [`AffixSet`]. Stable for the lifetime of the set and across
/// prunes (prune never reorders, it only flips live flags).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AffixId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AffixKind {
    Suffix,
    Prefix,
    /// Transformation marker (repeat, delete-c, modify-c1>c2), registered only
    /// when the language profile enables the transform. Prunable like any affix.
    Marker,
}

impl AffixKind {
    pub fn as_str(self) -> &'static str {
        match self {
            AffixKind::Suffix => "suffix",
            AffixKind::Prefix => "prefix",
            AffixKind::Marker => "marker",
        }
    }
}

#[derive(Debug, Clone)]
struct AffixEntry {
    kind: AffixKind,
    text: String,
    support: u64,
    live: bool,
}

#[derive(Debug, Clone, Default)]
pub struct AffixSet {
    entries: Vec<AffixEntry>,
    by_key: HashMap<(AffixKind, String), AffixId>,
}

#[derive(Debug, Clone)]
pub struct ExtractOptions {
    pub max_per_side: usize,
    pub min_support: u64,
    /// Minimum parent length (chars) for a pair to count.
    pub min_parent_len: usize,
    pub max_affix_len: usize,
    /// Bound prefixes + suffixes together instead of per side.
    pub total_bound: bool,
}

impl Default for ExtractOptions {
    fn default() -> Self {
        ExtractOptions {
            max_per_side: 500,
            min_support: 1,
            min_parent_len: 3,
            max_affix_len: 6,
            total_bound: false,
        }
    }
}

impl AffixSet {
    pub fn new() -> AffixSet {
        AffixSet::default()
    }

    fn push(&mut self, kind: AffixKind, text: String, support: u64) -> AffixId {
        debug_assert!(!text.is_empty());
        let id = AffixId(self.entries.len() as u32);
        self.by_key.insert((kind, text.clone()), id);
        self.entries.push(AffixEntry {
            kind,
            text,
            support,
            live: true,
        });
        id
    }

    /// Register a transformation marker (e.g. "rep", "del:e", "mod:i>y").
    /// Returns the existing id if already registered.
    pub fn register_marker(&mut self, name: &str) -> AffixId {
        if let Some(&id) = self.by_key.get(&(AffixKind::Marker, name.to_string())) {
            return id;
        }
        self.push(AffixKind::Marker, name.to_string(), 0)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn is_live(&self, id: AffixId) -> bool {
        self.entries
            .get(id.0 as usize)
            .is_some_and(|e| e.live)
    }

    pub fn kind(&self, id: AffixId) -> AffixKind {
        self.entries[id.0 as usize].kind
    }

    pub fn text(&self, id: AffixId) -> &str {
        &self.entries[id.0 as usize].text
    }

    pub fn support(&self, id: AffixId) -> u64 {
        self.entries[id.0 as usize].support
    }

    /// Display name: `suf:s`, `pre:un`, or the marker name itself.
    pub fn display(&self, id: AffixId) -> String {
        let e = &self.entries[id.0 as usize];
        match e.kind {
            AffixKind::Suffix => format!("suf:{}", e.text),
            AffixKind::Prefix => format!("pre:{}", e.text),
            AffixKind::Marker => e.text.clone(),
        }
    }

    /// Resolve a display name back to an id.
    pub fn lookup_display(&self, name: &str) -> Option<AffixId> {
        if let Some(rest) = name.strip_prefix("suf:") {
            self.by_key.get(&(AffixKind::Suffix, rest.to_string())).copied()
        } else if let Some(rest) = name.strip_prefix("pre:") {
            self.by_key.get(&(AffixKind::Prefix, rest.to_string())).copied()
        } else {
            self.by_key.get(&(AffixKind::Marker, name.to_string())).copied()
        }
    }

    pub fn marker(&self, name: &str) -> Option<AffixId> {
        self.by_key
            .get(&(AffixKind::Marker, name.to_string()))
            .copied()
    }

    pub fn live_marker(&self, name: &str) -> Option<AffixId> {
        self.marker(name).filter(|&id| self.is_live(id))
    }

    pub fn live_suffixes(&self) -> impl Iterator<Item = (AffixId, &str)> {
        self.live_of_kind(AffixKind::Suffix)
    }

    pub fn live_prefixes(&self) -> impl Iterator<Item = (AffixId, &str)> {
        self.live_of_kind(AffixKind::Prefix)
    }

    fn live_of_kind(&self, kind: AffixKind) -> impl Iterator<Item = (AffixId, &str)> {
        self.entries
            .iter()
            .enumerate()
            .filter(move |(_, e)| e.live && e.kind == kind)
            .map(|(i, e)| (AffixId(i as u32), e.text.as_str()))
    }

    pub fn live_ids(&self) -> Vec<AffixId> {
        self.entries
            .iter()
            .enumerate()
            .filter(|(_, e)| e.live)
            .map(|(i, _)| AffixId(i as u32))
            .collect()
    }

    pub fn live_count(&self) -> usize {
        self.entries.iter().filter(|e| e.live).count()
    }

    /// Copy-on-prune: exactly the ids in `kept` remain live. Reviving a dead
    /// affix is a contract violation.
    pub fn prune(&self, kept: &BTreeSet<AffixId>) -> Result<AffixSet> {
        for &id in kept {
            if id.0 as usize >= self.entries.len() {
                return Err(Error::Contract(format!("prune: unknown affix id {}", id.0)));
            }
            if !self.entries[id.0 as usize].live {
                return Err(Error::Contract(format!(
                    "prune: cannot revive dead affix `{}`",
                    self.display(id)
                )));
            }
        }
        let mut out = self.clone();
        for (i, e) in out.entries.iter_mut().enumerate() {
            if e.live && !kept.contains(&AffixId(i as u32)) {
                e.live = false;
            }
        }
        Ok(out)
    }

    /// `side<TAB>string<TAB>support<TAB>live` rows, in id order.
    pub fn write_tsv(&self, mut w: impl Write) -> std::io::Result<()> {
        for e in &self.entries {
            writeln!(w, "{}\t{}\t{}\t{}", e.kind.as_str(), e.text, e.support, e.live)?;
        }
        Ok(())
    }

    pub fn read_tsv(r: impl BufRead) -> Result<AffixSet> {
        let mut set = AffixSet::new();
        for (no, line) in r.lines().enumerate() {
            let line = line.map_err(|e| Error::Io {
                path: "<affixes>".into(),
                source: e,
            })?;
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            let err = |msg: String| Error::Parse {
                path: "<affixes>".into(),
                line: no + 1,
                msg,
            };
            if fields.len() != 4 {
                return Err(err(format!("expected 4 fields, got {}", fields.len())));
            }
            let kind = match fields[0] {
                "suffix" => AffixKind::Suffix,
                "prefix" => AffixKind::Prefix,
                "marker" => AffixKind::Marker,
                other => return Err(err(format!("unknown side `{other}`"))),
            };
            let support: u64 = fields[2]
                .parse()
                .map_err(|_| err(format!("bad support `{}`", fields[2])))?;
            let live: bool = fields[3]
                .parse()
                .map_err(|_| err(format!("bad live flag `{}`", fields[3])))?;
            let id = set.push(kind, fields[1].to_string(), support);
            set.entries[id.0 as usize].live = live;
        }
        Ok(set)
    }
}

/// Extract candidate affixes from vocabulary string differences: for every
/// pair (w, p) of vocabulary words where p is a proper prefix of w, the
/// residue counts as a suffix occurrence; symmetrically for prefixes. The top
/// `max_per_side` residues per side by support (at least `min_support`) are
/// returned live, sorted by support descending then lexicographically.
pub fn extract_affixes(vocab: &Vocabulary, opts: &ExtractOptions) -> AffixSet {
    let mut suffix_counts: HashMap<String, u64> = HashMap::new();
    let mut prefix_counts: HashMap<String, u64> = HashMap::new();
    for w in vocab.words() {
        let n = char_count(w);
        // Walk the proper split points of w once, checking both sides.
        for (chars_before, (byte, _)) in w.char_indices().enumerate() {
            if byte == 0 {
                continue;
            }
            let (head, tail) = w.split_at(byte);
            let head_chars = chars_before;
            let tail_chars = n - head_chars;
            // head in vocab => tail is a suffix residue
            if head_chars >= opts.min_parent_len
                && tail_chars <= opts.max_affix_len
                && vocab.contains(head)
            {
                *suffix_counts.entry(tail.to_string()).or_insert(0) += 1;
            }
            // tail in vocab => head is a prefix residue
            if tail_chars >= opts.min_parent_len
                && head_chars <= opts.max_affix_len
                && vocab.contains(tail)
            {
                *prefix_counts.entry(head.to_string()).or_insert(0) += 1;
            }
        }
    }

    let select = |counts: HashMap<String, u64>, limit: usize| -> Vec<(String, u64)> {
        let mut v: Vec<(String, u64)> = counts
            .into_iter()
            .filter(|&(_, c)| c >= opts.min_support)
            .collect();
        v.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        v.truncate(limit);
        v
    };

    let mut set = AffixSet::new();
    if opts.total_bound {
        let mut all: Vec<(AffixKind, String, u64)> = select(suffix_counts, usize::MAX)
            .into_iter()
            .map(|(s, c)| (AffixKind::Suffix, s, c))
            .chain(
                select(prefix_counts, usize::MAX)
                    .into_iter()
                    .map(|(s, c)| (AffixKind::Prefix, s, c)),
            )
            .collect();
        all.sort_by(|a, b| b.2.cmp(&a.2).then_with(|| (a.0, &a.1).cmp(&(b.0, &b.1))));
        all.truncate(opts.max_per_side);
        // Keep id layout deterministic: suffixes first, prefixes second.
        all.sort_by(|a, b| (a.0, std::cmp::Reverse(a.2), &a.1).cmp(&(b.0, std::cmp::Reverse(b.2), &b.1)));
        for (kind, text, support) in all {
            set.push(kind, text, support);
        }
    } else {
        for (text, support) in select(suffix_counts, opts.max_per_side) {
            set.push(AffixKind::Suffix, text, support);
        }
        for (text, support) in select(prefix_counts, opts.max_per_side) {
            set.push(AffixKind::Prefix, text, support);
        }
    }
    set
}
