//! Artificial morphemes: random consonant/vowel strings that occur nowhere in
//! the corpus or the subword vocabulary, assigned uniquely per pattern pair.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::fs;
use std::path::Path;

use indexmap::IndexMap;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::alphabet::Alphabet;
use crate::error::{Error, Result};
use crate::pattern::{PatternPair, Phenomenon, Side, Variant};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MorphemeRole {
    BoundPrefix,
    BoundSuffix,
    BoundInfix,
    BoundCompound,
    ConsonantTriple,
    Isolated,
    AbstractToken,
    AbstractIsolated,
}

impl MorphemeRole {
    pub fn as_str(self) -> &'static str {
        match self {
            MorphemeRole::BoundPrefix => "bound-prefix",
            MorphemeRole::BoundSuffix => "bound-suffix",
            MorphemeRole::BoundInfix => "bound-infix",
            MorphemeRole::BoundCompound => "bound-compound",
            MorphemeRole::ConsonantTriple => "consonant-triple",
            MorphemeRole::Isolated => "isolated",
            MorphemeRole::AbstractToken => "abstract-token",
            MorphemeRole::AbstractIsolated => "abstract-isolated",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArtificialMorpheme {
    pub pattern_id: String,
    pub surface: String,
    pub role: MorphemeRole,
    pub side: Side,
}

/// Where generation of a consonant/vowel string starts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Start {
    Consonant,
    Vowel,
    Random,
}

/// Samples an alternating consonant/vowel string with a length drawn
/// uniformly from `length_range` (inclusive).
pub fn generate_morpheme<R: Rng + ?Sized>(
    rng: &mut R,
    length_range: (usize, usize),
    start: Start,
    alphabet: &Alphabet,
) -> String {
    let (min, max) = length_range;
    let len = rng.gen_range(min..=max.max(min));
    let mut consonant = match start {
        Start::Consonant => true,
        Start::Vowel => false,
        Start::Random => rng.gen_bool(0.5),
    };
    let mut out = String::with_capacity(len * 2);
    for _ in 0..len {
        let pool = if consonant {
            &alphabet.consonants
        } else {
            &alphabet.vowels
        };
        out.push(*pool.choose(rng).expect("alphabet is non-empty"));
        consonant = !consonant;
    }
    out
}

fn normalize_vocab_entry(entry: &str) -> String {
    entry
        .trim()
        .trim_start_matches('▁')
        .trim_end_matches("@@")
        .to_lowercase()
}

/// True iff `candidate` is no vocabulary entry and no substring of any corpus
/// token, compared case-insensitively. Linear scan over the corpus.
pub fn is_absent(candidate: &str, corpus_tokens: &HashSet<String>, vocab: &HashSet<String>) -> bool {
    let c = candidate.to_lowercase();
    if vocab.iter().any(|v| normalize_vocab_entry(v) == c) {
        return false;
    }
    !corpus_tokens.iter().any(|t| t.to_lowercase().contains(&c))
}

/// Precomputed lookup for the absence check: every lowercased corpus
/// substring whose length falls in the candidate length window.
#[derive(Debug, Clone, Default)]
pub struct AbsenceIndex {
    vocab: HashSet<String>,
    substrings: HashSet<String>,
    min_len: usize,
    max_len: usize,
}

impl AbsenceIndex {
    pub fn new<'a>(
        corpus_tokens: impl IntoIterator<Item = &'a str>,
        vocab: impl IntoIterator<Item = &'a str>,
        min_len: usize,
        max_len: usize,
    ) -> Self {
        let mut substrings = HashSet::new();
        let mut seen = HashSet::new();
        for token in corpus_tokens {
            let lower = token.to_lowercase();
            if !seen.insert(lower.clone()) {
                continue;
            }
            let chars: Vec<char> = lower.chars().collect();
            for start in 0..chars.len() {
                for len in min_len..=max_len {
                    if start + len > chars.len() {
                        break;
                    }
                    substrings.insert(chars[start..start + len].iter().collect::<String>());
                }
            }
        }
        AbsenceIndex {
            vocab: vocab.into_iter().map(normalize_vocab_entry).collect(),
            substrings,
            min_len,
            max_len,
        }
    }

    /// Index covering every candidate length `config` can produce.
    pub fn for_config<'a>(
        corpus_tokens: impl IntoIterator<Item = &'a str>,
        vocab: impl IntoIterator<Item = &'a str>,
        config: &MorphemeConfig,
    ) -> Self {
        let min = config.piece_length.min(config.length_range.0);
        let max = config.piece_length.max(config.length_range.1);
        AbsenceIndex::new(corpus_tokens, vocab, min, max)
    }

    pub fn is_absent(&self, candidate: &str) -> bool {
        let c = candidate.to_lowercase();
        let n = c.chars().count();
        debug_assert!(n >= self.min_len && n <= self.max_len);
        !self.vocab.contains(&c) && !self.substrings.contains(&c)
    }
}

/// Morphemes assigned to one pattern pair.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PatternMorphemes {
    /// Bound pieces on the phenomenon side: one for compounds and infixes,
    /// prefix and suffix for circumfixes, none otherwise.
    pub bound: Vec<String>,
    /// Consonant skeleton for vowel harmony.
    pub triple: Option<[char; 3]>,
    /// Isolated morpheme replacing the trigger on the other side (surface variant).
    pub isolated: String,
    /// Placeholder token on the phenomenon side (abstract variant).
    pub abstract_token: String,
    /// Isolated morpheme on the other side (abstract variant).
    pub abstract_isolated: String,
}

impl PatternMorphemes {
    pub fn triple_string(&self) -> Option<String> {
        self.triple.map(format_triple)
    }
}

pub fn format_triple(t: [char; 3]) -> String {
    format!("{}-{}-{}", t[0], t[1], t[2])
}

pub fn parse_triple(s: &str) -> Option<[char; 3]> {
    let parts: Vec<char> = s.split('-').filter_map(|p| {
        let mut cs = p.chars();
        match (cs.next(), cs.next()) {
            (Some(c), None) => Some(c),
            _ => None,
        }
    }).collect();
    if s.split('-').count() != 3 {
        return None;
    }
    match parts.as_slice() {
        [a, b, c] => Some([*a, *b, *c]),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MorphemeInventory {
    pub seed: u64,
    entries: IndexMap<String, PatternMorphemes>,
}

impl MorphemeInventory {
    pub fn new(seed: u64) -> Self {
        MorphemeInventory {
            seed,
            entries: IndexMap::new(),
        }
    }

    pub fn insert(&mut self, pattern_id: impl Into<String>, morphemes: PatternMorphemes) {
        self.entries.insert(pattern_id.into(), morphemes);
    }

    pub fn get(&self, pattern_id: &str) -> Option<&PatternMorphemes> {
        self.entries.get(pattern_id)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &PatternMorphemes)> {
        self.entries.iter()
    }

    /// Every morpheme with its role and side.
    pub fn morphemes(&self, patterns: &[PatternPair]) -> Vec<ArtificialMorpheme> {
        let mut out = Vec::new();
        for p in patterns {
            let Some(m) = self.get(&p.id) else { continue };
            let here = p.surface_side;
            let there = here.other();
            let mut push = |surface: String, role, side| {
                out.push(ArtificialMorpheme {
                    pattern_id: p.id.clone(),
                    surface,
                    role,
                    side,
                })
            };
            let bound_roles: &[MorphemeRole] = match p.phenomenon {
                Phenomenon::Compound => &[MorphemeRole::BoundCompound],
                Phenomenon::Circumfix => &[MorphemeRole::BoundPrefix, MorphemeRole::BoundSuffix],
                Phenomenon::Infix => &[MorphemeRole::BoundInfix],
                _ => &[],
            };
            for (b, role) in m.bound.iter().zip(bound_roles) {
                push(b.clone(), *role, here);
            }
            if let Some(t) = m.triple {
                push(t.iter().collect(), MorphemeRole::ConsonantTriple, here);
            }
            push(m.isolated.clone(), MorphemeRole::Isolated, there);
            push(m.abstract_token.clone(), MorphemeRole::AbstractToken, here);
            push(m.abstract_isolated.clone(), MorphemeRole::AbstractIsolated, there);
        }
        out
    }

    /// Checks that every pattern has a well-formed entry.
    pub fn check_covers(&self, patterns: &[PatternPair]) -> Result<()> {
        for p in patterns {
            let m = self
                .get(&p.id)
                .ok_or_else(|| Error::Config(format!("inventory has no entry for pattern {}", p.id)))?;
            let bound = match p.phenomenon {
                Phenomenon::Compound | Phenomenon::Infix => 1,
                Phenomenon::Circumfix => 2,
                _ => 0,
            };
            let needs_triple = p.phenomenon == Phenomenon::VowelHarmony;
            if m.bound.len() != bound
                || m.triple.is_some() != needs_triple
                || m.isolated.is_empty()
                || m.abstract_token.is_empty()
                || m.abstract_isolated.is_empty()
            {
                return Err(Error::Config(format!(
                    "inventory entry for pattern {} does not fit phenomenon {}",
                    p.id, p.phenomenon
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct MorphemeConfig {
    pub src_alphabet: Alphabet,
    pub trg_alphabet: Alphabet,
    /// Length window for free-standing and compound/infix morphemes.
    pub length_range: (usize, usize),
    /// Length of each circumfix piece.
    pub piece_length: usize,
    pub start: Start,
    pub max_rejections: usize,
}

impl Default for MorphemeConfig {
    fn default() -> Self {
        MorphemeConfig {
            src_alphabet: Alphabet::source_default(),
            trg_alphabet: Alphabet::target_default(),
            length_range: (4, 6),
            piece_length: 3,
            start: Start::Consonant,
            max_rejections: 10_000,
        }
    }
}

impl MorphemeConfig {
    fn alphabet(&self, side: Side) -> &Alphabet {
        match side {
            Side::Source => &self.src_alphabet,
            Side::Target => &self.trg_alphabet,
        }
    }
}

fn capitalize(s: &str) -> String {
    let mut cs = s.chars();
    match cs.next() {
        Some(first) => first.to_uppercase().chain(cs).collect(),
        None => String::new(),
    }
}

struct Sampler<'a> {
    rng: ChaCha8Rng,
    config: &'a MorphemeConfig,
    index: &'a AbsenceIndex,
    used: HashSet<String>,
}

impl Sampler<'_> {
    fn free(&mut self, slot: &str, side: Side, len: (usize, usize)) -> Result<String> {
        let alphabet = self.config.alphabet(side);
        for _ in 0..self.config.max_rejections {
            let candidate = generate_morpheme(&mut self.rng, len, self.config.start, alphabet);
            if !self.used.contains(&candidate) && self.index.is_absent(&candidate) {
                self.used.insert(candidate.clone());
                return Ok(candidate);
            }
        }
        Err(Error::Exhausted {
            slot: slot.to_string(),
            attempts: self.config.max_rejections,
        })
    }

    fn triple(&mut self, slot: &str, side: Side) -> Result<[char; 3]> {
        let consonants = &self.config.alphabet(side).consonants;
        for _ in 0..self.config.max_rejections {
            let picked: Vec<char> = consonants.choose_multiple(&mut self.rng, 3).copied().collect();
            if picked.len() < 3 {
                break;
            }
            let key: String = picked.iter().collect();
            if self.used.insert(key) {
                return Ok([picked[0], picked[1], picked[2]]);
            }
        }
        Err(Error::Exhausted {
            slot: slot.to_string(),
            attempts: self.config.max_rejections,
        })
    }
}

/// Builds a deterministic inventory for `patterns`. Every generated surface
/// is absent from the corpus and vocabulary and distinct from all others.
pub fn build_inventory(
    patterns: &[PatternPair],
    index: &AbsenceIndex,
    config: &MorphemeConfig,
    seed: u64,
) -> Result<MorphemeInventory> {
    let mut sampler = Sampler {
        rng: ChaCha8Rng::seed_from_u64(seed),
        config,
        index,
        used: HashSet::new(),
    };
    let mut inventory = MorphemeInventory::new(seed);
    let mut abstract_tokens = HashSet::new();
    let free = config.length_range;
    let piece = (config.piece_length, config.piece_length);
    for p in patterns {
        let here = p.surface_side;
        let there = here.other();
        let slot = |name: &str, variant: Variant| format!("{}/{}/{}", p.id, variant, name);
        let mut m = PatternMorphemes::default();
        match p.phenomenon {
            Phenomenon::Compound => {
                let b = sampler.free(&slot("bound1", Variant::Surface), here, free)?;
                m.bound.push(if here == Side::Source { capitalize(&b) } else { b });
            }
            Phenomenon::Circumfix => {
                let pre = sampler.free(&slot("bound1", Variant::Surface), here, piece)?;
                let suf = sampler.free(&slot("bound2", Variant::Surface), here, piece)?;
                m.bound.push(if here == Side::Source { capitalize(&pre) } else { pre });
                m.bound.push(suf);
            }
            Phenomenon::Infix => {
                m.bound.push(sampler.free(&slot("bound1", Variant::Surface), here, free)?);
            }
            Phenomenon::VowelHarmony => {
                m.triple = Some(sampler.triple(&slot("triple", Variant::Surface), here)?);
            }
            Phenomenon::Reduplication(_) => {}
        }
        m.isolated = sampler.free(&slot("isolated", Variant::Surface), there, free)?;
        m.abstract_token = p.abstract_token();
        if !abstract_tokens.insert(m.abstract_token.clone()) {
            return Err(Error::Config(format!(
                "abstract token {} is not unique",
                m.abstract_token
            )));
        }
        m.abstract_isolated = sampler.free(&slot("isolated", Variant::Abstract), there, free)?;
        inventory.insert(p.id.clone(), m);
    }
    Ok(inventory)
}

pub const INVENTORY_HEADER: &str = "pattern_id\tvariant\tslot\tside\tsurface";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Slot {
    Bound1,
    Bound2,
    Isolated,
    Triple,
    Abstract,
}

impl fmt::Display for Slot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Slot::Bound1 => "bound1",
            Slot::Bound2 => "bound2",
            Slot::Isolated => "isolated",
            Slot::Triple => "triple",
            Slot::Abstract => "abstract",
        })
    }
}

/// Serializes the inventory in pattern order.
pub fn write_inventory(inventory: &MorphemeInventory, patterns: &[PatternPair]) -> String {
    let mut out = format!("# seed={}\n{INVENTORY_HEADER}\n", inventory.seed);
    let mut row = |id: &str, variant: Variant, slot: Slot, side: Side, surface: &str| {
        out.push_str(&format!("{id}\t{variant}\t{slot}\t{side}\t{surface}\n"));
    };
    for p in patterns {
        let Some(m) = inventory.get(&p.id) else { continue };
        let here = p.surface_side;
        for (i, b) in m.bound.iter().enumerate() {
            let slot = if i == 0 { Slot::Bound1 } else { Slot::Bound2 };
            row(&p.id, Variant::Surface, slot, here, b);
        }
        if let Some(t) = m.triple {
            row(&p.id, Variant::Surface, Slot::Triple, here, &format_triple(t));
        }
        row(&p.id, Variant::Surface, Slot::Isolated, here.other(), &m.isolated);
        row(&p.id, Variant::Abstract, Slot::Abstract, here, &m.abstract_token);
        row(&p.id, Variant::Abstract, Slot::Isolated, here.other(), &m.abstract_isolated);
    }
    out
}

pub fn parse_inventory(text: &str) -> Result<MorphemeInventory> {
    let mut seed = 0;
    let mut entries: IndexMap<String, PatternMorphemes> = IndexMap::new();
    let mut bound: HashMap<String, [Option<String>; 2]> = HashMap::new();
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        if let Some(rest) = line.strip_prefix("# seed=") {
            seed = rest
                .trim()
                .parse()
                .map_err(|_| Error::parse(lineno, "bad seed comment"))?;
            continue;
        }
        if line.trim().is_empty() || line.starts_with('#') || line.starts_with("pattern_id\t") {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 5 {
            return Err(Error::parse(lineno, format!("inventory rows need 5 columns, found {}", cols.len())));
        }
        let (id, variant, slot, surface) = (cols[0], cols[1].parse::<Variant>()?, cols[2], cols[4]);
        cols[3].parse::<Side>()?;
        let entry = entries.entry(id.to_string()).or_default();
        match (variant, slot) {
            (Variant::Surface, "bound1") => bound.entry(id.to_string()).or_default()[0] = Some(surface.to_string()),
            (Variant::Surface, "bound2") => bound.entry(id.to_string()).or_default()[1] = Some(surface.to_string()),
            (Variant::Surface, "triple") => {
                entry.triple = Some(
                    parse_triple(surface)
                        .ok_or_else(|| Error::parse(lineno, format!("bad consonant triple {surface:?}")))?,
                )
            }
            (Variant::Surface, "isolated") => entry.isolated = surface.to_string(),
            (Variant::Abstract, "abstract") => entry.abstract_token = surface.to_string(),
            (Variant::Abstract, "isolated") => entry.abstract_isolated = surface.to_string(),
            _ => return Err(Error::parse(lineno, format!("unknown slot {variant}/{slot}"))),
        }
    }
    for (id, pieces) in bound {
        let entry = entries.get_mut(&id).expect("entry exists for every row");
        match pieces {
            [Some(a), Some(b)] => entry.bound = vec![a, b],
            [Some(a), None] => entry.bound = vec![a],
            _ => return Err(Error::Config(format!("pattern {id}: bound2 without bound1"))),
        }
    }
    Ok(MorphemeInventory { seed, entries })
}

pub fn load_inventory(path: &Path) -> Result<MorphemeInventory> {
    parse_inventory(&fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
}

/// Reads a vocabulary exclusion list, one entry per line.
pub fn parse_vocab(text: &str) -> Vec<String> {
    text.lines()
        .map(|l| l.split('\t').next().unwrap_or("").trim().to_string())
        .filter(|l| !l.is_empty())
        .collect()
}
