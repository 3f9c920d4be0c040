//! Run configuration: every knob of the training pipeline, with a flat
//! `key = value` file format so runs are reproducible from a single text file.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::util::{fnv1a64, open_text};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum IlpMode {
    /// Exact when the live affix count fits the exact limit, greedy otherwise.
    Auto,
    Exact,
    Greedy,
    /// No ILP, no alternating rounds: one round of contrastive estimation and
    /// a per-word argmax forest.
    Off,
}

impl IlpMode {
    pub fn as_str(self) -> &'static str {
        match self {
            IlpMode::Auto => "auto",
            IlpMode::Exact => "exact",
            IlpMode::Greedy => "greedy",
            IlpMode::Off => "off",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(IlpMode::Auto),
            "exact" => Ok(IlpMode::Exact),
            "greedy" => Ok(IlpMode::Greedy),
            "off" => Ok(IlpMode::Off),
            other => Err(Error::Config(format!("unknown ilp_mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct AdamOptions {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub iters: usize,
}

impl Default for AdamOptions {
    fn default() -> Self {
        AdamOptions {
            lr: 0.5,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            iters: 300,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    /// Weight of the affix-set size term.
    pub alpha: f64,
    /// Weight of the tree-count term.
    pub beta: f64,
    /// Keep only the top-K most frequent words of the training list.
    pub top_k: usize,
    /// Number of automatically extracted affixes kept per side.
    pub affixes_per_side: usize,
    /// When true, `affixes_per_side` bounds prefixes + suffixes combined.
    pub affix_bound_total: bool,
    pub min_affix_support: u64,
    pub max_affix_len: usize,
    /// Minimum parent length (chars) for an extraction pair to count.
    pub min_parent_len: usize,
    /// Alternating-training rounds T.
    pub rounds: usize,
    pub adam: AdamOptions,
    /// L2 regularization weight on theta (0 disables).
    pub l2: f64,
    /// Warm-start theta from the previous round.
    pub warm_start: bool,
    /// Sibling-count feature toggle.
    pub sibl: bool,
    /// Compounding toggle (candidates + features).
    pub comp: bool,
    pub ilp_mode: IlpMode,
    /// Auto mode switches to greedy above this many live affixes.
    pub ilp_exact_limit: usize,
    pub ilp_node_budget: u64,
    pub seed: u64,
    pub lowercase: bool,
    pub filter_nonalpha: bool,
    /// Minimum stem length (chars) for suffix/prefix stripping.
    pub min_stem: usize,
    /// Minimum part length (chars) for compounding.
    pub min_stem_compound: usize,
    pub compound_require_both: bool,
    pub max_neighbors: usize,
    /// Language profile name; setting it installs the delete/modify/repeat
    /// defaults below, which can then be overridden individually.
    pub language: String,
    pub delete_chars: Vec<char>,
    pub modify_pairs: Vec<(char, char)>,
    pub enable_repeat: bool,
    pub freq_bin_width: f64,
    pub freq_bin_cap: u32,
    /// Keep all vectors from the file (true) or only vocabulary words (false).
    pub vectors_retain_all: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        let mut cfg = RunConfig {
            alpha: 1e-4,
            beta: 0.5,
            top_k: 10_000,
            affixes_per_side: 500,
            affix_bound_total: false,
            min_affix_support: 2,
            max_affix_len: 6,
            min_parent_len: 3,
            rounds: 5,
            adam: AdamOptions::default(),
            l2: 0.0,
            warm_start: true,
            sibl: false,
            comp: false,
            ilp_mode: IlpMode::Auto,
            ilp_exact_limit: 24,
            ilp_node_budget: 2_000_000,
            seed: 0,
            lowercase: true,
            filter_nonalpha: true,
            min_stem: 2,
            min_stem_compound: 3,
            compound_require_both: true,
            max_neighbors: 25,
            language: String::new(),
            delete_chars: Vec::new(),
            modify_pairs: Vec::new(),
            enable_repeat: false,
            freq_bin_width: 1.0,
            freq_bin_cap: 12,
            vectors_retain_all: true,
        };
        cfg.set_language("en");
        cfg
    }
}

impl RunConfig {
    /// Install a language profile: the deletable final characters, the
    /// modification table and the repeat transform.
    pub fn set_language(&mut self, lang: &str) {
        self.language = lang.to_string();
        match lang {
            "en" => {
                self.delete_chars = vec!['e'];
                self.modify_pairs = vec![('i', 'y')];
                self.enable_repeat = true;
            }
            "de" => {
                self.delete_chars = vec!['e'];
                self.modify_pairs = Vec::new();
                self.enable_repeat = false;
            }
            _ => {
                self.delete_chars = Vec::new();
                self.modify_pairs = Vec::new();
                self.enable_repeat = false;
            }
        }
    }

    /// Render as the flat `key = value` format. The output round-trips
    /// through `apply_kv`/`from_kv_text`.
    pub fn to_kv_text(&self) -> String {
        let mut s = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        put("alpha", format!("{}", self.alpha));
        put("beta", format!("{}", self.beta));
        put("top_k", format!("{}", self.top_k));
        put("affixes_per_side", format!("{}", self.affixes_per_side));
        put("affix_bound_total", format!("{}", self.affix_bound_total));
        put("min_affix_support", format!("{}", self.min_affix_support));
        put("max_affix_len", format!("{}", self.max_affix_len));
        put("min_parent_len", format!("{}", self.min_parent_len));
        put("rounds", format!("{}", self.rounds));
        put("adam_lr", format!("{}", self.adam.lr));
        put("adam_beta1", format!("{}", self.adam.beta1));
        put("adam_beta2", format!("{}", self.adam.beta2));
        put("adam_eps", format!("{}", self.adam.eps));
        put("adam_iters", format!("{}", self.adam.iters));
        put("l2", format!("{}", self.l2));
        put("warm_start", format!("{}", self.warm_start));
        put("sibl", format!("{}", self.sibl));
        put("comp", format!("{}", self.comp));
        put("ilp_mode", self.ilp_mode.as_str().to_string());
        put("ilp_exact_limit", format!("{}", self.ilp_exact_limit));
        put("ilp_node_budget", format!("{}", self.ilp_node_budget));
        put("seed", format!("{}", self.seed));
        put("lowercase", format!("{}", self.lowercase));
        put("filter_nonalpha", format!("{}", self.filter_nonalpha));
        put("min_stem", format!("{}", self.min_stem));
        put("min_stem_compound", format!("{}", self.min_stem_compound));
        put("compound_require_both", format!("{}", self.compound_require_both));
        put("max_neighbors", format!("{}", self.max_neighbors));
        put("language", self.language.clone());
        put(
            "delete_chars",
            self.delete_chars.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(","),
        );
        put(
            "modify_pairs",
            self.modify_pairs
                .iter()
                .map(|(a, b)| format!("{a}>{b}"))
                .collect::<Vec<_>>()
                .join(","),
        );
        put("enable_repeat", format!("{}", self.enable_repeat));
        put("freq_bin_width", format!("{}", self.freq_bin_width));
        put("freq_bin_cap", format!("{}", self.freq_bin_cap));
        put("vectors_retain_all", format!("{}", self.vectors_retain_all));
        s
    }

    pub fn to_kv_map(&self) -> BTreeMap<String, String> {
        self.to_kv_text()
            .lines()
            .filter_map(|l| l.split_once(" = "))
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect()
    }

    /// Stable fingerprint of the effective configuration.
    pub fn fingerprint(&self) -> u64 {
        fnv1a64(self.to_kv_text().as_bytes())
    }

    pub fn apply_kv(&mut self, key: &str, value: &str) -> Result<()> {
        let bad = |what: &str| Error::Config(format!("bad value `{value}` for {what}"));
        match key {
            "alpha" => self.alpha = parse_f64(key, value)?,
            "beta" => self.beta = parse_f64(key, value)?,
            "top_k" => self.top_k = parse_usize(key, value)?,
            "affixes_per_side" => self.affixes_per_side = parse_usize(key, value)?,
            "affix_bound_total" => self.affix_bound_total = parse_bool(key, value)?,
            "min_affix_support" => self.min_affix_support = parse_u64(key, value)?,
            "max_affix_len" => self.max_affix_len = parse_usize(key, value)?,
            "min_parent_len" => self.min_parent_len = parse_usize(key, value)?,
            "rounds" => self.rounds = parse_usize(key, value)?,
            "adam_lr" => self.adam.lr = parse_f64(key, value)?,
            "adam_beta1" => self.adam.beta1 = parse_f64(key, value)?,
            "adam_beta2" => self.adam.beta2 = parse_f64(key, value)?,
            "adam_eps" => self.adam.eps = parse_f64(key, value)?,
            "adam_iters" => self.adam.iters = parse_usize(key, value)?,
            "l2" => self.l2 = parse_f64(key, value)?,
            "warm_start" => self.warm_start = parse_bool(key, value)?,
            "sibl" => self.sibl = parse_bool(key, value)?,
            "comp" => self.comp = parse_bool(key, value)?,
            "ilp_mode" => self.ilp_mode = IlpMode::parse(value)?,
            "ilp_exact_limit" => self.ilp_exact_limit = parse_usize(key, value)?,
            "ilp_node_budget" => self.ilp_node_budget = parse_u64(key, value)?,
            "seed" => self.seed = parse_u64(key, value)?,
            "lowercase" => self.lowercase = parse_bool(key, value)?,
            "filter_nonalpha" => self.filter_nonalpha = parse_bool(key, value)?,
            "min_stem" => self.min_stem = parse_usize(key, value)?,
            "min_stem_compound" => self.min_stem_compound = parse_usize(key, value)?,
            "compound_require_both" => self.compound_require_both = parse_bool(key, value)?,
            "max_neighbors" => self.max_neighbors = parse_usize(key, value)?,
            "language" => self.set_language(value),
            "delete_chars" => {
                self.delete_chars = if value.is_empty() {
                    Vec::new()
                } else {
                    value
                        .split(',')
                        .map(|t| {
                            let mut it = t.chars();
                            match (it.next(), it.next()) {
                                (Some(c), None) => Ok(c),
                                _ => Err(bad("delete_chars (single characters)")),
                            }
                        })
                        .collect::<Result<Vec<_>>>()?
                };
            }
            "modify_pairs" => {
                self.modify_pairs = if value.is_empty() {
                    Vec::new()
                } else {
                    value
                        .split(',')
                        .map(|t| {
                            let (a, b) = t
                                .split_once('>')
                                .ok_or_else(|| bad("modify_pairs (format c1>c2)"))?;
                            let (mut ai, mut bi) = (a.chars(), b.chars());
                            match (ai.next(), ai.next(), bi.next(), bi.next()) {
                                (Some(x), None, Some(y), None) => Ok((x, y)),
                                _ => Err(bad("modify_pairs (format c1>c2)")),
                            }
                        })
                        .collect::<Result<Vec<_>>>()?
                };
            }
            "enable_repeat" => self.enable_repeat = parse_bool(key, value)?,
            "freq_bin_width" => self.freq_bin_width = parse_f64(key, value)?,
            "freq_bin_cap" => self.freq_bin_cap = parse_u64(key, value)? as u32,
            "vectors_retain_all" => self.vectors_retain_all = parse_bool(key, value)?,
            other => return Err(Error::Config(format!("unknown config key `{other}`"))),
        }
        Ok(())
    }

    pub fn from_kv_text(text: &str) -> Result<RunConfig> {
        let mut cfg = RunConfig::default();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected `key = value`, got `{raw}`", no + 1))
            })?;
            cfg.apply_kv(k.trim(), v.trim())?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<RunConfig> {
        let mut text = String::new();
        use std::io::Read;
        open_text(path)?
            .read_to_string(&mut text)
            .map_err(|e| Error::Io { path: path.to_path_buf(), source: e })?;
        Self::from_kv_text(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.alpha.is_finite() || self.alpha < 0.0 {
            return Err(Error::Config("alpha must be finite and >= 0".into()));
        }
        if !self.beta.is_finite() || self.beta < 0.0 {
            return Err(Error::Config(
                "beta must be finite and >= 0 (negative beta is not supported here)".into(),
            ));
        }
        if self.top_k == 0 {
            return Err(Error::Config("top_k must be >= 1".into()));
        }
        if self.rounds == 0 {
            return Err(Error::Config("rounds must be >= 1".into()));
        }
        if self.adam.iters == 0 {
            return Err(Error::Config("adam_iters must be >= 1".into()));
        }
        if self.max_neighbors == 0 {
            return Err(Error::Config("max_neighbors must be >= 1".into()));
        }
        if self.min_stem == 0 || self.min_stem_compound == 0 {
            return Err(Error::Config("min_stem and min_stem_compound must be >= 1".into()));
        }
        if self.freq_bin_width <= 0.0 {
            return Err(Error::Config("freq_bin_width must be > 0".into()));
        }
        Ok(())
    }
}

fn parse_f64(key: &str, v: &str) -> Result<f64> {
    v.parse()
        .map_err(|_| Error::Config(format!("bad value `{v}` for {key}")))
}

fn parse_u64(key: &str, v: &str) -> Result<u64> {
    v.parse()
        .map_err(|_| Error::Config(format!("bad value `{v}` for {key}")))
}

fn parse_usize(key: &str, v: &str) -> Result<usize> {
    v.parse()
        .map_err(|_| Error::Config(format!("bad value `{v}` for {key}")))
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v {
        "true" | "1" | "yes" | "on" => Ok(true),
        "false" | "0" | "no" | "off" => Ok(false),
        _ => Err(Error::Config(format!("bad value `{v}` for {key}"))),
    }
}
