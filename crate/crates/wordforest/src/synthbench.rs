//! Synthetic-language fixtures with exact ground truth, for end-to-end tests
//! where real gold corpora cannot be bundled.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct GrammarSpec {
    pub roots: usize,
    pub root_min_len: usize,
    pub root_max_len: usize,
    pub alphabet: Vec<char>,
    pub suffixes: Vec<String>,
    pub prefixes: Vec<String>,
    /// Affixes fed to extraction statistics via atomic carrier words, never
    /// used at a gold boundary. The training pipeline is expected to prune
    /// them.
    pub decoys: Vec<String>,
    pub decoy_words_per_affix: usize,
    /// Probability that a suffixed word stacks another suffix (per level).
    pub stack_rate: f64,
    pub max_suffix_chain: usize,
    pub delete_e_rate: f64,
    pub repeat_rate: f64,
    pub compound_rate: f64,
    /// Total word budget, including roots, decoy carriers and intermediates.
    pub words: usize,
    pub zipf_exponent: f64,
    pub seed: u64,
}

impl Default for GrammarSpec {
    fn default() -> Self {
        GrammarSpec::default_fixture()
    }
}

impl GrammarSpec {
    /// The bundled fixture: 20 roots, suffixes {a, ka, lar}, 5 decoy affixes,
    /// 400 words.
    pub fn default_fixture() -> GrammarSpec {
        GrammarSpec {
            roots: 20,
            root_min_len: 4,
            root_max_len: 7,
            alphabet: "abdeghiklmnoprstuz".chars().collect(),
            suffixes: vec!["a".into(), "ka".into(), "lar".into()],
            prefixes: Vec::new(),
            decoys: vec!["ri".into(), "mo".into(), "ez".into(), "ul".into(), "ib".into()],
            decoy_words_per_affix: 4,
            stack_rate: 0.45,
            max_suffix_chain: 3,
            delete_e_rate: 0.0,
            repeat_rate: 0.0,
            compound_rate: 0.0,
            words: 400,
            zipf_exponent: 1.0,
            seed: 42,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Config(format!("grammar spec: {msg}")));
        if self.roots == 0 {
            return bad("roots must be >= 1");
        }
        if self.root_min_len == 0 || self.root_min_len > self.root_max_len {
            return bad("root length range is empty");
        }
        if self.alphabet.is_empty() {
            return bad("alphabet is empty");
        }
        for r in [
            self.stack_rate,
            self.delete_e_rate,
            self.repeat_rate,
            self.compound_rate,
        ] {
            if !(0.0..=1.0).contains(&r) {
                return bad("rates must lie in [0, 1]");
            }
        }
        let true_affixes: BTreeSet<&String> =
            self.suffixes.iter().chain(self.prefixes.iter()).collect();
        for d in &self.decoys {
            if true_affixes.contains(d) {
                return bad("decoy set must be disjoint from the true affix set");
            }
        }
        let floor = self.roots + self.decoys.len() * self.decoy_words_per_affix;
        if self.words < floor {
            return bad("word budget is smaller than roots + decoy carriers");
        }
        if self.max_suffix_chain == 0 && !self.suffixes.is_empty() {
            return bad("max_suffix_chain must be >= 1 when suffixes exist");
        }
        Ok(())
    }

    /// Flat `key = value` text, same conventions as the run configuration.
    pub fn to_kv_text(&self) -> String {
        let mut s = String::new();
        let join = |xs: &[String]| xs.join(",");
        let _ = writeln!(s, "roots = {}", self.roots);
        let _ = writeln!(s, "root_min_len = {}", self.root_min_len);
        let _ = writeln!(s, "root_max_len = {}", self.root_max_len);
        let _ = writeln!(s, "alphabet = {}", self.alphabet.iter().collect::<String>());
        let _ = writeln!(s, "suffixes = {}", join(&self.suffixes));
        let _ = writeln!(s, "prefixes = {}", join(&self.prefixes));
        let _ = writeln!(s, "decoys = {}", join(&self.decoys));
        let _ = writeln!(s, "decoy_words_per_affix = {}", self.decoy_words_per_affix);
        let _ = writeln!(s, "stack_rate = {}", self.stack_rate);
        let _ = writeln!(s, "max_suffix_chain = {}", self.max_suffix_chain);
        let _ = writeln!(s, "delete_e_rate = {}", self.delete_e_rate);
        let _ = writeln!(s, "repeat_rate = {}", self.repeat_rate);
        let _ = writeln!(s, "compound_rate = {}", self.compound_rate);
        let _ = writeln!(s, "words = {}", self.words);
        let _ = writeln!(s, "zipf_exponent = {}", self.zipf_exponent);
        let _ = writeln!(s, "seed = {}", self.seed);
        s
    }

    pub fn from_kv_text(text: &str) -> Result<GrammarSpec> {
        let mut spec = GrammarSpec::default_fixture();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("spec line {}: expected `key = value`", no + 1))
            })?;
            let (k, v) = (k.trim(), v.trim());
            let parse_list = |v: &str| -> Vec<String> {
                if v.is_empty() {
                    Vec::new()
                } else {
                    v.split(',').map(|t| t.trim().to_string()).collect()
                }
            };
            let bad = || Error::Config(format!("spec: bad value `{v}` for {k}"));
            match k {
                "roots" => spec.roots = v.parse().map_err(|_| bad())?,
                "root_min_len" => spec.root_min_len = v.parse().map_err(|_| bad())?,
                "root_max_len" => spec.root_max_len = v.parse().map_err(|_| bad())?,
                "alphabet" => spec.alphabet = v.chars().collect(),
                "suffixes" => spec.suffixes = parse_list(v),
                "prefixes" => spec.prefixes = parse_list(v),
                "decoys" => spec.decoys = parse_list(v),
                "decoy_words_per_affix" => {
                    spec.decoy_words_per_affix = v.parse().map_err(|_| bad())?
                }
                "stack_rate" => spec.stack_rate = v.parse().map_err(|_| bad())?,
                "max_suffix_chain" => spec.max_suffix_chain = v.parse().map_err(|_| bad())?,
                "delete_e_rate" => spec.delete_e_rate = v.parse().map_err(|_| bad())?,
                "repeat_rate" => spec.repeat_rate = v.parse().map_err(|_| bad())?,
                "compound_rate" => spec.compound_rate = v.parse().map_err(|_| bad())?,
                "words" => spec.words = v.parse().map_err(|_| bad())?,
                "zipf_exponent" => spec.zipf_exponent = v.parse().map_err(|_| bad())?,
                "seed" => spec.seed = v.parse().map_err(|_| bad())?,
                other => return Err(Error::Config(format!("spec: unknown key `{other}`"))),
            }
        }
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<GrammarSpec> {
        use std::io::Read;
        let mut text = String::new();
        crate::util::open_text(path)?
            .read_to_string(&mut text)
            .map_err(|e| Error::Io {
                path: path.to_path_buf(),
                source: e,
            })?;
        Self::from_kv_text(&text)
    }
}

#[derive(Debug, Clone)]
struct GoldEntry {
    morphs: Vec<String>,
    root: String,
    cluster: String,
    /// Surface form of the single-step parent; None for atomic words.
    parent: Option<String>,
}

/// Fixture files: frequency-ranked wordlist plus gold segments, clusters and
/// roots keyed by word, and family-correlated word vectors (words of one
/// family point roughly the same way, so cosine features behave like vectors
/// trained on real text).
#[derive(Debug, Clone)]
pub struct SynthOutput {
    pub wordlist: Vec<(String, u64)>,
    pub gold_segments: BTreeMap<String, Vec<String>>,
    pub gold_clusters: BTreeMap<String, String>,
    pub gold_roots: BTreeMap<String, String>,
    pub vectors: BTreeMap<String, Vec<f64>>,
}

impl SynthOutput {
    /// Write the four fixture files into `dir`; returns their paths in the
    /// order (wordlist, segments, clusters, roots).
    pub fn write_dir(&self, dir: &Path) -> Result<[PathBuf; 4]> {
        std::fs::create_dir_all(dir).map_err(|e| Error::Io {
            path: dir.to_path_buf(),
            source: e,
        })?;
        let io_err = |p: &Path| {
            let p = p.to_path_buf();
            move |e: std::io::Error| Error::Io { path: p, source: e }
        };
        let wl = dir.join("wordlist.tsv");
        let mut text = String::new();
        for (w, c) in &self.wordlist {
            let _ = writeln!(text, "{w}\t{c}");
        }
        std::fs::write(&wl, text).map_err(io_err(&wl))?;

        let segs = dir.join("gold_segments.tsv");
        let mut text = String::new();
        for (w, morphs) in &self.gold_segments {
            let _ = writeln!(text, "{w}\t{}", morphs.join(" "));
        }
        std::fs::write(&segs, text).map_err(io_err(&segs))?;

        let clusters = dir.join("gold_clusters.tsv");
        let mut text = String::new();
        for (w, c) in &self.gold_clusters {
            let _ = writeln!(text, "{w}\t{c}");
        }
        std::fs::write(&clusters, text).map_err(io_err(&clusters))?;

        let roots = dir.join("gold_roots.tsv");
        let mut text = String::new();
        for (w, r) in &self.gold_roots {
            let _ = writeln!(text, "{w}\t{r}");
        }
        std::fs::write(&roots, text).map_err(io_err(&roots))?;
        Ok([wl, segs, clusters, roots])
    }

    /// Write the vectors in word2vec text format; returns the path.
    pub fn write_vectors(&self, dir: &Path) -> Result<PathBuf> {
        std::fs::create_dir_all(dir).map_err(|e| Error::Io {
            path: dir.to_path_buf(),
            source: e,
        })?;
        let path = dir.join("vectors.txt");
        let dim = self.vectors.values().next().map_or(0, Vec::len);
        let mut text = format!("{} {dim}\n", self.vectors.len());
        for (w, v) in &self.vectors {
            let comps: Vec<String> = v.iter().map(|x| format!("{x:.6}")).collect();
            let _ = writeln!(text, "{w} {}", comps.join(" "));
        }
        std::fs::write(&path, text).map_err(|e| Error::Io {
            path: path.clone(),
            source: e,
        })?;
        Ok(path)
    }

    /// In-memory vector store, for driving training without temp files.
    pub fn vector_store(&self) -> crate::corpus::WordVectors {
        let dim = self.vectors.values().next().map_or(0, Vec::len);
        crate::corpus::WordVectors::from_table(dim, self.vectors.clone().into_iter().collect())
    }
}

/// Sample a fixture: words = root (+transform) (+suffix chain) (+compound)
/// with Zipfian counts; the gold files record exactly the generative
/// derivation. Byte-identical for a fixed spec.
pub fn generate(spec: &GrammarSpec) -> Result<SynthOutput> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    // Roots: pairwise prefix-free so every surface has a unique sampled root.
    let mut roots: Vec<String> = Vec::new();
    let mut attempts = 0usize;
    while roots.len() < spec.roots {
        attempts += 1;
        if attempts > 10_000 * spec.roots {
            return Err(Error::Config(
                "grammar spec: unable to sample prefix-free roots (alphabet too small?)".into(),
            ));
        }
        let len = rng.random_range(spec.root_min_len..=spec.root_max_len);
        let r: String = (0..len)
            .map(|_| *spec.alphabet.choose(&mut rng).unwrap())
            .collect();
        if roots
            .iter()
            .any(|q| q.starts_with(&r) || r.starts_with(q.as_str()))
        {
            continue;
        }
        roots.push(r);
    }

    let mut order: Vec<String> = Vec::new();
    let mut gold: HashMap<String, GoldEntry> = HashMap::new();
    let insert = |order: &mut Vec<String>, gold: &mut HashMap<String, GoldEntry>, surface: String, entry: GoldEntry| -> bool {
        if gold.contains_key(&surface) {
            return false;
        }
        order.push(surface.clone());
        gold.insert(surface, entry);
        true
    };

    for r in &roots {
        insert(
            &mut order,
            &mut gold,
            r.clone(),
            GoldEntry {
                morphs: vec![r.clone()],
                root: r.clone(),
                cluster: r.clone(),
                parent: None,
            },
        );
    }

    // Decoy carriers: atomic words whose surface happens to end in a decoy
    // string, seeding the extraction statistics without any gold boundary.
    for d in &spec.decoys {
        let mut made = 0;
        let mut tries = 0;
        while made < spec.decoy_words_per_affix && tries < 10_000 {
            tries += 1;
            let r = roots.choose(&mut rng).unwrap();
            let surface = format!("{r}{d}");
            let entry = GoldEntry {
                morphs: vec![surface.clone()],
                root: surface.clone(),
                cluster: surface.clone(),
                parent: None,
            };
            if insert(&mut order, &mut gold, surface, entry) {
                made += 1;
            }
        }
        if made < spec.decoy_words_per_affix {
            return Err(Error::Config(format!(
                "grammar spec: could not place decoy `{d}` on enough roots"
            )));
        }
    }

    // Derived words until the budget is met.
    let mut tries = 0usize;
    let max_tries = 200 * spec.words.max(1);
    while order.len() < spec.words && tries < max_tries {
        tries += 1;
        if spec.compound_rate > 0.0 && rng.random_range(0.0..1.0) < spec.compound_rate {
            let a = roots.choose(&mut rng).unwrap().clone();
            let b = roots.choose(&mut rng).unwrap().clone();
            if a == b {
                continue;
            }
            let surface = format!("{a}{b}");
            let entry = GoldEntry {
                morphs: vec![a.clone(), b.clone()],
                root: a.clone(),
                cluster: a.clone(),
                parent: Some(a.clone()),
            };
            insert(&mut order, &mut gold, surface, entry);
            continue;
        }
        if spec.suffixes.is_empty() {
            break;
        }
        let root = roots.choose(&mut rng).unwrap().clone();
        let mut chain: Vec<String> = vec![spec.suffixes.choose(&mut rng).unwrap().clone()];
        while chain.len() < spec.max_suffix_chain
            && rng.random_range(0.0..1.0) < spec.stack_rate
        {
            chain.push(spec.suffixes.choose(&mut rng).unwrap().clone());
        }

        // Optional transformation on the first attachment.
        let s1 = &chain[0];
        let roll: f64 = rng.random_range(0.0..1.0);
        let (mut surface, mut morphs) = if spec.delete_e_rate > 0.0
            && roll < spec.delete_e_rate
            && root.ends_with('e')
        {
            let stem: String = root.chars().take(root.chars().count() - 1).collect();
            (format!("{stem}{s1}"), vec![stem, s1.clone()])
        } else if spec.repeat_rate > 0.0
            && roll < spec.repeat_rate
            && !root.ends_with(['a', 'e', 'i', 'o', 'u'])
        {
            let last = root.chars().last().unwrap();
            (
                format!("{root}{last}{s1}"),
                vec![root.clone(), format!("{last}{s1}")],
            )
        } else {
            (format!("{root}{s1}"), vec![root.clone(), s1.clone()])
        };

        // Ensure the intermediate of each stacking level exists as a word, so
        // multi-step parent chains are observable in the vocabulary.
        let base_entry = GoldEntry {
            morphs: morphs.clone(),
            root: root.clone(),
            cluster: root.clone(),
            parent: Some(root.clone()),
        };
        insert(&mut order, &mut gold, surface.clone(), base_entry);
        for s in &chain[1..] {
            if order.len() >= spec.words {
                break;
            }
            let parent_surface = surface.clone();
            surface = format!("{surface}{s}");
            morphs.push(s.clone());
            let entry = GoldEntry {
                morphs: morphs.clone(),
                root: root.clone(),
                cluster: root.clone(),
                parent: Some(parent_surface),
            };
            insert(&mut order, &mut gold, surface.clone(), entry);
        }
    }

    // Zipfian counts over a seeded shuffle of the generation order.
    let mut ranked = order.clone();
    for i in (1..ranked.len()).rev() {
        let j = rng.random_range(0..=i);
        ranked.swap(i, j);
    }
    let scale = 10_000.0;
    let mut wordlist: Vec<(String, u64)> = ranked
        .iter()
        .enumerate()
        .map(|(i, w)| {
            let count = (scale / (i as f64 + 1.0).powf(spec.zipf_exponent)).floor() as u64;
            (w.clone(), count.max(1))
        })
        .collect();
    wordlist.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));

    let mut gold_segments = BTreeMap::new();
    let mut gold_clusters = BTreeMap::new();
    let mut gold_roots = BTreeMap::new();
    for (w, entry) in &gold {
        gold_segments.insert(w.clone(), entry.morphs.clone());
        gold_clusters.insert(w.clone(), entry.cluster.clone());
        gold_roots.insert(w.clone(), entry.root.clone());
    }

    // Vectors: a random walk down the derivation chains. Each word is a
    // jittered copy of its single-step parent, so similarity decays with
    // derivational distance, the way corpus-trained vectors behave.
    let dim = 12usize;
    let jitter = 0.2;
    let mut vectors: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for w in &order {
        let entry = &gold[w];
        let v = match &entry.parent {
            None => normalize((0..dim).map(|_| rng.random_range(-1.0..1.0)).collect()),
            Some(p) => {
                let base = vectors
                    .get(p)
                    .expect("parents are generated before their children")
                    .clone();
                normalize(
                    base.into_iter()
                        .map(|x| x + rng.random_range(-jitter..jitter))
                        .collect(),
                )
            }
        };
        vectors.insert(w.clone(), v);
    }

    Ok(SynthOutput {
        wordlist,
        gold_segments,
        gold_clusters,
        gold_roots,
        vectors,
    })
}

fn normalize(v: Vec<f64>) -> Vec<f64> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 {
        v
    } else {
        v.into_iter().map(|x| x / norm).collect()
    }
}
