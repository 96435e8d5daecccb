//! Frequency-balanced test sets: substitution candidates, fluency scores and
//! bucket filling.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::fs;
use std::path::Path;

use indexmap::IndexMap;
use rand::seq::index::sample;
use rayon::prelude::*;

use crate::builder::{bucket_of, transform_test_split, BuildConfig, Bucket, Manifest, MetaRow, TestSet, META_HEADER};
use crate::corpus::{render, AnnotatedSentence, AnnotatedSentencePair, Token};
use crate::error::{Error, Result};
use crate::matcher::pair_rng;
use crate::morphemes::MorphemeInventory;
use crate::pattern::{BaseSelector, PatternPair, Trigger};
use crate::transforms::ModifiedPairRecord;

pub const MAX_CANDIDATES_PER_PAIR: usize = 50;
pub const DEFAULT_BUCKET_CAP: usize = 100;
const CANDIDATE_STREAM: u64 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SubstitutionKind {
    PrepSwap,
    CardinalToTwo,
    ModifierInsert,
}

impl SubstitutionKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SubstitutionKind::PrepSwap => "prep_swap",
            SubstitutionKind::CardinalToTwo => "cardinal_to_two",
            SubstitutionKind::ModifierInsert => "modifier_insert",
        }
    }
}

impl fmt::Display for SubstitutionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Tokens removed and inserted on one side, for the fallback scorer.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Substitution {
    pub removed: Vec<String>,
    pub inserted: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct AugCandidate {
    /// `<pair_id>:<kind>:<k>`
    pub id: String,
    pub origin: usize,
    pub kind: SubstitutionKind,
    pub pair: AnnotatedSentencePair,
    pub src_change: Substitution,
    pub trg_change: Substitution,
    /// Lower is more natural.
    pub score: Option<f64>,
}

impl AugCandidate {
    pub fn src_text(&self) -> String {
        render(&self.pair.src)
    }

    pub fn trg_text(&self) -> String {
        render(&self.pair.trg)
    }
}

fn match_case(template: &str, word: &str) -> String {
    let upper = template.chars().next().is_some_and(char::is_uppercase);
    if !upper {
        return word.to_string();
    }
    let mut cs = word.chars();
    match cs.next() {
        Some(c) => c.to_uppercase().chain(cs).collect(),
        None => String::new(),
    }
}

fn first_alternatives(trigger: &Trigger) -> Vec<String> {
    trigger.canonical().into_iter().map(String::from).collect()
}

/// Distinct (source, target) trigger words of patterns using `selector`.
fn trigger_pairs(patterns: &[PatternPair], selector: BaseSelector) -> Vec<(Vec<String>, Vec<String>)> {
    let mut out: Vec<(Vec<String>, Vec<String>)> = Vec::new();
    for p in patterns.iter().filter(|p| p.base_selector == selector) {
        let pair = (first_alternatives(&p.src_trigger), first_alternatives(&p.trg_trigger));
        if !pair.0.is_empty() && !pair.1.is_empty() && !out.contains(&pair) {
            out.push(pair);
        }
    }
    out
}

fn replace_token(sentence: &mut AnnotatedSentence, pos: usize, word: &str) -> Substitution {
    let token = &mut sentence.tokens[pos];
    let old = token.form.clone();
    token.form = match_case(&old, word);
    token.lemma = word.to_string();
    Substitution {
        removed: vec![old.to_lowercase()],
        inserted: vec![word.to_lowercase()],
    }
}

fn modifier_upos(word: &str) -> &'static str {
    match word.to_lowercase().as_str() {
        "nicht" | "not" | "kein" | "never" | "nie" => "PART",
        _ => "ADV",
    }
}

/// Inserts `words` before `pos`, attached to the token at `pos` as modifiers.
fn insert_modifiers(sentence: &mut AnnotatedSentence, pos: usize, words: &[String]) -> Substitution {
    let k = words.len();
    let head = pos + k + 1;
    let tokens = words
        .iter()
        .enumerate()
        .map(|(i, w)| Token::new(pos + i + 1, w.clone(), w.clone(), modifier_upos(w), head, "advmod"))
        .collect();
    sentence.insert_tokens(pos, tokens);
    Substitution {
        removed: vec![],
        inserted: words.iter().map(|w| w.to_lowercase()).collect(),
    }
}

/// Aligned (source, target) positions whose tokens both carry one of `upos`.
fn aligned_with_upos(pair: &AnnotatedSentencePair, upos: &[&str]) -> Vec<(usize, usize)> {
    (0..pair.src.len())
        .filter_map(|i| {
            let j = pair.alignment.one_to_one_target(i)?;
            let s = pair.src.get(i)?;
            let t = pair.trg.get(j)?;
            (upos.iter().any(|u| s.has_upos(u)) && upos.iter().any(|u| t.has_upos(u))).then_some((i, j))
        })
        .collect()
}

/// Substitution candidates for one pair, capped (seeded) at
/// [`MAX_CANDIDATES_PER_PAIR`].
pub fn generate_candidates(pair: &AnnotatedSentencePair, patterns: &[PatternPair], seed: u64) -> Vec<AugCandidate> {
    let mut raw: Vec<(SubstitutionKind, AnnotatedSentencePair, Substitution, Substitution)> = Vec::new();

    let preps = trigger_pairs(patterns, BaseSelector::PrepObject);
    for (i, j) in aligned_with_upos(pair, &["ADP"]) {
        let (s, t) = (&pair.src.tokens[i], &pair.trg.tokens[j]);
        for (sw, tw) in preps.iter().filter(|(sw, tw)| sw.len() == 1 && tw.len() == 1) {
            if s.lemma_is(&sw[0]) && t.lemma_is(&tw[0]) {
                continue;
            }
            let mut c = pair.clone();
            let sc = replace_token(&mut c.src, i, &sw[0]);
            let tc = replace_token(&mut c.trg, j, &tw[0]);
            raw.push((SubstitutionKind::PrepSwap, c, sc, tc));
        }
    }

    let twos: Vec<(String, String)> = trigger_pairs(patterns, BaseSelector::CardinalHead)
        .into_iter()
        .filter(|(s, t)| s.len() == 1 && t.len() == 1)
        .map(|(s, t)| (s[0].clone(), t[0].clone()))
        .collect();
    let twos = if twos.is_empty() {
        vec![("zwei".to_string(), "two".to_string())]
    } else {
        twos
    };
    for (i, j) in aligned_with_upos(pair, &["NUM"]) {
        let modifies_noun = |sent: &AnnotatedSentence, pos: usize| {
            sent.head_pos(pos)
                .and_then(|h| sent.get(h))
                .is_some_and(|h| h.has_upos("NOUN"))
        };
        if !modifies_noun(&pair.src, i) || !modifies_noun(&pair.trg, j) {
            continue;
        }
        for (sw, tw) in &twos {
            if pair.src.tokens[i].lemma_is(sw) && pair.trg.tokens[j].lemma_is(tw) {
                continue;
            }
            let mut c = pair.clone();
            let sc = replace_token(&mut c.src, i, sw);
            let tc = replace_token(&mut c.trg, j, tw);
            raw.push((SubstitutionKind::CardinalToTwo, c, sc, tc));
        }
    }

    let modifiers = trigger_pairs(patterns, BaseSelector::AdjectiveAfterModifier);
    for (i, j) in aligned_with_upos(pair, &["ADJ"]) {
        for (sw, tw) in &modifiers {
            let mut c = pair.clone();
            let sc = insert_modifiers(&mut c.src, i, sw);
            let tc = insert_modifiers(&mut c.trg, j, tw);
            c.alignment.shift_src(i, sw.len());
            c.alignment.shift_trg(j, tw.len());
            for k in 0..sw.len().min(tw.len()) {
                c.alignment.insert(i + k, j + k);
            }
            raw.push((SubstitutionKind::ModifierInsert, c, sc, tc));
        }
    }

    let mut counters: HashMap<SubstitutionKind, usize> = HashMap::new();
    let mut candidates: Vec<AugCandidate> = raw
        .into_iter()
        .map(|(kind, c, src_change, trg_change)| {
            let k = counters.entry(kind).or_default();
            *k += 1;
            AugCandidate {
                id: format!("{}:{}:{}", pair.pair_id, kind, *k),
                origin: pair.pair_id,
                kind,
                pair: c,
                src_change,
                trg_change,
                score: None,
            }
        })
        .collect();
    if candidates.len() > MAX_CANDIDATES_PER_PAIR {
        let mut rng = pair_rng(seed, CANDIDATE_STREAM, pair.pair_id);
        let mut keep = sample(&mut rng, candidates.len(), MAX_CANDIDATES_PER_PAIR).into_vec();
        keep.sort_unstable();
        let mut slots: Vec<Option<AugCandidate>> = candidates.into_iter().map(Some).collect();
        candidates = keep.into_iter().map(|i| slots[i].take().expect("distinct")).collect();
    }
    candidates
}

/// Corpus unigram model: the fallback fluency scorer.
#[derive(Debug, Clone, Default)]
pub struct UnigramScorer {
    counts: HashMap<String, usize>,
    total: usize,
}

impl UnigramScorer {
    pub fn from_lines<'a>(lines: impl IntoIterator<Item = &'a str>) -> Self {
        let mut s = UnigramScorer::default();
        for line in lines {
            for tok in line.split_whitespace() {
                *s.counts.entry(tok.to_lowercase()).or_default() += 1;
                s.total += 1;
            }
        }
        s
    }

    /// Add-one smoothed negative log-probability.
    fn cost(&self, token: &str) -> f64 {
        let c = self.counts.get(token).copied().unwrap_or(0) as f64;
        let v = (self.counts.len() + 1) as f64;
        -((c + 1.0) / (self.total as f64 + v)).ln()
    }

    /// Cost of the inserted tokens minus the cost of the removed ones.
    pub fn delta(&self, change: &Substitution) -> f64 {
        let sum = |ts: &[String]| ts.iter().map(|t| self.cost(t)).sum::<f64>();
        sum(&change.inserted) - sum(&change.removed)
    }

    pub fn score(&self, candidate: &AugCandidate) -> f64 {
        (self.delta(&candidate.src_change) + self.delta(&candidate.trg_change)) / 2.0
    }
}

/// Parses a score file: `candidate_id<TAB>src_delta<TAB>trg_delta`.
pub fn parse_scores(text: &str) -> Result<HashMap<String, (f64, f64)>> {
    let mut out = HashMap::new();
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        if line.trim().is_empty() || line.starts_with('#') || line.starts_with("candidate_id\t") {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        let [id, s, t] = cols.as_slice() else {
            return Err(Error::parse(lineno, format!("score rows need 3 columns, found {}", cols.len())));
        };
        let num = |v: &str| -> Result<f64> {
            v.trim()
                .parse()
                .map_err(|_| Error::parse(lineno, format!("expected a number, found {v:?}")))
        };
        out.insert(id.to_string(), (num(s)?, num(t)?));
    }
    Ok(out)
}

/// Scores each candidate with the mean of its ingested deltas, falling back
/// to the unigram scorer. Returns how many used the fallback.
pub fn attach_scores(
    candidates: &mut [AugCandidate],
    scores: &HashMap<String, (f64, f64)>,
    fallback: &UnigramScorer,
) -> usize {
    let known: HashSet<&str> = candidates.iter().map(|c| c.id.as_str()).collect();
    let mut unknown: Vec<&String> = scores.keys().filter(|id| !known.contains(id.as_str())).collect();
    unknown.sort();
    for id in unknown {
        log::warn!("event=unknown_candidate_id id={id}");
    }
    let mut fell_back = 0;
    for c in candidates.iter_mut() {
        c.score = Some(match scores.get(&c.id) {
            Some((s, t)) => (s + t) / 2.0,
            None => {
                fell_back += 1;
                fallback.score(c)
            }
        });
    }
    fell_back
}

/// A test item competing for a bucket slot.
#[derive(Debug, Clone)]
pub struct PoolItem {
    /// Candidate id for augmented items, `orig:<line>` for originals.
    pub id: String,
    pub surface: ModifiedPairRecord,
    pub abstract_variant: Option<ModifiedPairRecord>,
    pub base_train_freq: usize,
    /// `None` for original test items.
    pub score: Option<f64>,
}

impl PoolItem {
    pub fn is_original(&self) -> bool {
        self.score.is_none()
    }

    pub fn bucket(&self) -> Bucket {
        bucket_of(self.base_train_freq)
    }
}

#[derive(Debug, Clone, Default)]
pub struct BalancedSet {
    /// Every (pattern, bucket), including empty ones, in pattern then bucket order.
    pub groups: IndexMap<(String, Bucket), Vec<PoolItem>>,
}

impl BalancedSet {
    pub fn len(&self) -> usize {
        self.groups.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Test files in the builder's format, with each line's bucket.
    pub fn to_test_sets(&self) -> (TestSet, TestSet) {
        let mut surface = TestSet::default();
        let mut abstract_set = TestSet::default();
        for item in self.groups.values().flatten() {
            let line = surface.len() + 1;
            surface
                .meta
                .push(MetaRow::from_record(line, &item.surface, item.base_train_freq));
            surface.records.push(item.surface.clone());
            if let Some(a) = &item.abstract_variant {
                let line = abstract_set.len() + 1;
                abstract_set.meta.push(MetaRow::from_record(line, a, item.base_train_freq));
                abstract_set.records.push(a.clone());
            }
        }
        (surface, abstract_set)
    }
}

/// Fills every (pattern, bucket) up to `cap`: originals first, then augmented
/// items by ascending score. Augmented items duplicating an earlier sentence
/// are dropped.
pub fn assemble_balanced(
    originals: Vec<PoolItem>,
    augmented: Vec<PoolItem>,
    patterns: &[PatternPair],
    cap: usize,
) -> BalancedSet {
    let mut set = BalancedSet::default();
    for p in patterns {
        for b in Bucket::ALL {
            set.groups.insert((p.id.clone(), b), Vec::new());
        }
    }
    let mut seen: HashSet<(String, String)> = HashSet::new();
    for item in originals {
        seen.insert((item.surface.src_text(), item.surface.trg_text()));
        let group = set.groups.entry((item.surface.pattern_id.clone(), item.bucket())).or_default();
        if group.len() < cap {
            group.push(item);
        }
    }
    let mut augmented = augmented;
    augmented.sort_by(|a, b| {
        let (sa, sb) = (a.score.unwrap_or(f64::INFINITY), b.score.unwrap_or(f64::INFINITY));
        sa.total_cmp(&sb).then_with(|| a.id.cmp(&b.id))
    });
    for item in augmented {
        if !seen.insert((item.surface.src_text(), item.surface.trg_text())) {
            continue;
        }
        let group = set.groups.entry((item.surface.pattern_id.clone(), item.bucket())).or_default();
        if group.len() < cap {
            group.push(item);
        }
    }
    for ((id, b), items) in &set.groups {
        if items.is_empty() {
            log::debug!("event=empty_bucket pattern={id} bucket={b}");
        }
    }
    set
}

fn pool_item(id: String, s: ModifiedPairRecord, a: Option<ModifiedPairRecord>, manifest: &Manifest, score: Option<f64>) -> PoolItem {
    PoolItem {
        id,
        base_train_freq: manifest.base_frequency(&s.pattern_id, &s.base_src_lemma),
        surface: s,
        abstract_variant: a,
        score,
    }
}

/// Original test items and scored augmented items for a held-out split.
pub fn build_pools(
    test_pairs: &[AnnotatedSentencePair],
    patterns: &[PatternPair],
    inventory: &MorphemeInventory,
    manifest: &Manifest,
    config: &BuildConfig,
    scores: &HashMap<String, (f64, f64)>,
    fallback: &UnigramScorer,
) -> (Vec<PoolItem>, Vec<PoolItem>, Vec<AugCandidate>) {
    let originals: Vec<PoolItem> = transform_test_split(test_pairs, patterns, inventory, config)
        .into_iter()
        .filter_map(|(_, rec)| rec)
        .enumerate()
        .map(|(k, (s, a))| pool_item(format!("orig:{}", k + 1), s, a, manifest, None))
        .collect();

    let mut candidates: Vec<AugCandidate> = test_pairs
        .par_iter()
        .flat_map_iter(|p| generate_candidates(p, patterns, config.seed))
        .collect();
    let fell_back = attach_scores(&mut candidates, scores, fallback);
    log::info!(
        "event=candidates total={} fallback_scored={}",
        candidates.len(),
        fell_back
    );

    // Augmented items re-enter through the standard matcher; only trigger
    // patterns are relevant since substitutions never create compound sites.
    let trigger_patterns: Vec<PatternPair> = patterns.iter().filter(|p| !p.is_compound()).cloned().collect();
    let cand_pairs: Vec<AnnotatedSentencePair> = candidates
        .iter()
        .enumerate()
        .map(|(k, c)| {
            let mut p = c.pair.clone();
            p.pair_id = k;
            p
        })
        .collect();
    let outcomes = transform_test_split(&cand_pairs, &trigger_patterns, inventory, config);
    let augmented: Vec<PoolItem> = outcomes
        .into_iter()
        .filter_map(|(_, rec)| rec)
        .map(|(mut s, mut a)| {
            let c = &candidates[s.pair_id];
            s.pair_id = c.origin;
            if let Some(a) = a.as_mut() {
                a.pair_id = c.origin;
            }
            pool_item(c.id.clone(), s, a, manifest, c.score)
        })
        .collect();
    (originals, augmented, candidates)
}

fn write_text(path: &Path, text: String) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn write_variant(dir: &Path, stem: &str, set: &TestSet, ids: &[&str]) -> Result<()> {
    write_text(&dir.join(format!("{stem}.src")), set.src_lines().iter().map(|l| format!("{l}\n")).collect())?;
    write_text(&dir.join(format!("{stem}.trg")), set.trg_lines().iter().map(|l| format!("{l}\n")).collect())?;
    let mut meta = format!("{META_HEADER}\tbucket\titem_id\n");
    for (row, id) in set.meta.iter().zip(ids) {
        meta.push_str(&format!("{}\t{}\t{id}\n", row.to_tsv_line(), row.bucket()));
    }
    write_text(&dir.join(format!("{stem}.meta.tsv")), meta)
}

/// Writes aug_test.{surface,abstract}.{src,trg,meta.tsv} and aug_candidates.tsv.
/// The meta files carry each line's bucket and pool item id.
pub fn write_balanced(dir: &Path, set: &BalancedSet, candidates: &[AugCandidate]) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let (surface, abstract_set) = set.to_test_sets();
    let items: Vec<&PoolItem> = set.groups.values().flatten().collect();
    let surface_ids: Vec<&str> = items.iter().map(|i| i.id.as_str()).collect();
    let abstract_ids: Vec<&str> = items
        .iter()
        .filter(|i| i.abstract_variant.is_some())
        .map(|i| i.id.as_str())
        .collect();
    write_variant(dir, "aug_test.surface", &surface, &surface_ids)?;
    write_variant(dir, "aug_test.abstract", &abstract_set, &abstract_ids)?;
    let mut text = String::from("candidate_id\tkind\tscore\tsrc\ttrg\n");
    for c in candidates {
        let score = c.score.map(|s| format!("{s:.4}")).unwrap_or_else(|| "-".into());
        text.push_str(&format!("{}\t{}\t{score}\t{}\t{}\n", c.id, c.kind, c.src_text(), c.trg_text()));
    }
    write_text(&dir.join("aug_candidates.tsv"), text)
}

/// Lines per (pattern, bucket) as a small TSV summary.
pub fn summary_tsv(set: &BalancedSet) -> String {
    let mut out = String::from("pattern_id\tbucket\toriginals\taugmented\n");
    for ((id, b), items) in &set.groups {
        let orig = items.iter().filter(|i| i.is_original()).count();
        out.push_str(&format!("{id}\t{b}\t{orig}\t{}\n", items.len() - orig));
    }
    out
}
