//! Locating insertion sites: aligned triggers plus the aligned base word
//! they attach to.

use indexmap::IndexMap;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::corpus::{AnnotatedSentence, AnnotatedSentencePair};
use crate::pattern::{BaseSelector, PatternPair, Side, Trigger};

/// Inclusive 0-based token span.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn single(pos: usize) -> Span {
        Span { start: pos, end: pos }
    }

    pub fn contains(&self, pos: usize) -> bool {
        pos >= self.start && pos <= self.end
    }
}

/// A matched insertion site. Positions are 0-based token offsets, the same
/// convention as the alignment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchSite {
    pub pair_id: usize,
    pub pattern_id: String,
    pub src_trigger: Option<Span>,
    pub trg_trigger: Option<Span>,
    pub src_base: usize,
    pub trg_base: usize,
}

impl MatchSite {
    /// Trigger token adjacent to the base (the last one of the span).
    pub fn src_trigger_idx(&self) -> Option<usize> {
        self.src_trigger.map(|s| s.end)
    }

    pub fn trg_trigger_idx(&self) -> Option<usize> {
        self.trg_trigger.map(|s| s.end)
    }

    pub fn trigger(&self, side: Side) -> Option<Span> {
        match side {
            Side::Source => self.src_trigger,
            Side::Target => self.trg_trigger,
        }
    }

    pub fn base(&self, side: Side) -> usize {
        match side {
            Side::Source => self.src_base,
            Side::Target => self.trg_base,
        }
    }

    /// Re-checks the alignment and POS invariants against the pair.
    pub fn is_valid_for(&self, pair: &AnnotatedSentencePair, pattern: &PatternPair) -> bool {
        let upos = pattern.base_selector.base_upos();
        let bases_ok = pair.alignment.is_one_to_one(self.src_base, self.trg_base)
            && pair.src.get(self.src_base).is_some_and(|t| t.has_upos(upos))
            && pair.trg.get(self.trg_base).is_some_and(|t| t.has_upos(upos));
        let triggers_ok = match (self.src_trigger, self.trg_trigger) {
            (None, None) => pattern.is_compound(),
            (Some(s), Some(t)) => {
                let sp = trigger_positions(&pair.src, s);
                let tp = trigger_positions(&pair.trg, t);
                sp.len() == tp.len()
                    && sp.iter().zip(&tp).all(|(&a, &b)| pair.alignment.contains(a, b))
            }
            _ => false,
        };
        bases_ok && triggers_ok
    }
}

fn is_punct(sentence: &AnnotatedSentence, pos: usize) -> bool {
    sentence.get(pos).is_some_and(|t| t.has_upos("PUNCT"))
}

/// Non-punctuation positions inside a trigger span.
fn trigger_positions(sentence: &AnnotatedSentence, span: Span) -> Vec<usize> {
    (span.start..=span.end).filter(|&p| !is_punct(sentence, p)).collect()
}

/// All spans matching the trigger sequence, left to right. Punctuation may
/// separate consecutive trigger positions.
fn trigger_spans(sentence: &AnnotatedSentence, trigger: &Trigger, upos: &[&str]) -> Vec<Span> {
    let accepts = |pos: usize, alternatives: &[String]| {
        sentence.get(pos).is_some_and(|t| {
            upos.iter().any(|u| t.has_upos(u)) && alternatives.iter().any(|a| t.lemma_is(a))
        })
    };
    let mut spans = Vec::new();
    for start in 0..sentence.len() {
        let mut pos = start;
        let mut ok = true;
        for (k, alternatives) in trigger.positions.iter().enumerate() {
            if k > 0 {
                pos += 1;
                while is_punct(sentence, pos) {
                    pos += 1;
                }
            }
            if !accepts(pos, alternatives) {
                ok = false;
                break;
            }
        }
        if ok {
            spans.push(Span { start, end: pos });
        }
    }
    spans
}

const CASE_RELS: &[&str] = &["case"];
const PREP_OBJECT_RELS: &[&str] = &["pobj", "nk"];
const NUMMOD_RELS: &[&str] = &["nummod", "nk", "num"];
const MODIFIER_RELS: &[&str] = &["advmod", "mo", "neg", "ng"];

fn rel_in(rel: &str, set: &[&str]) -> bool {
    let base = rel.split(':').next().unwrap_or(rel);
    set.contains(&base)
}

/// Finds the base word governed by / following the trigger span.
fn find_base(sentence: &AnnotatedSentence, span: Span, selector: BaseSelector) -> Option<usize> {
    let trigger = sentence.get(span.end)?;
    let upos = selector.base_upos();
    let is_base = |pos: usize| sentence.get(pos).is_some_and(|t| t.has_upos(upos));
    match selector {
        BaseSelector::PrepObject => {
            if trigger.has_deprel() {
                if rel_in(&trigger.deprel, CASE_RELS) {
                    let head = sentence.head_pos(span.end)?;
                    return (head > span.end && is_base(head)).then_some(head);
                }
                // Preposition as head of its object.
                return (span.end + 1..sentence.len()).find(|&p| {
                    is_base(p)
                        && sentence.head_pos(p) == Some(span.end)
                        && rel_in(&sentence.tokens[p].deprel, PREP_OBJECT_RELS)
                });
            }
            for p in span.end + 1..sentence.len() {
                if is_base(p) {
                    return Some(p);
                }
                let t = &sentence.tokens[p];
                if ["ADP", "VERB", "AUX", "PUNCT", "PROPN", "PRON"].iter().any(|u| t.has_upos(u)) {
                    return None;
                }
            }
            None
        }
        BaseSelector::CardinalHead => {
            if trigger.has_deprel() {
                let head = sentence.head_pos(span.end)?;
                (head > span.end && is_base(head) && rel_in(&trigger.deprel, NUMMOD_RELS))
                    .then_some(head)
            } else {
                let next = span.end + 1;
                is_base(next).then_some(next)
            }
        }
        BaseSelector::AdjectiveAfterModifier => {
            let next = span.end + 1;
            if !is_base(next) {
                return None;
            }
            if trigger.has_deprel() && !rel_in(&trigger.deprel, MODIFIER_RELS) {
                return None;
            }
            Some(next)
        }
        BaseSelector::RandomAlignedNoun => None,
    }
}

/// A modifier span directly preceded (modulo punctuation) by the same
/// modifier belongs to a longer repetition and is not matched on its own.
fn preceded_by_repetition(sentence: &AnnotatedSentence, span: Span, trigger: &Trigger) -> bool {
    let mut pos = span.start;
    while pos > 0 {
        pos -= 1;
        if is_punct(sentence, pos) {
            continue;
        }
        return trigger.positions[0].iter().any(|a| sentence.tokens[pos].lemma_is(a));
    }
    false
}

fn candidate_spans(sentence: &AnnotatedSentence, pattern: &PatternPair, side: Side) -> Vec<(Span, usize)> {
    let trigger = pattern.trigger(side);
    let selector = pattern.base_selector;
    trigger_spans(sentence, trigger, selector.trigger_upos())
        .into_iter()
        .filter(|&span| {
            selector != BaseSelector::AdjectiveAfterModifier
                || !preceded_by_repetition(sentence, span, trigger)
        })
        .filter_map(|span| find_base(sentence, span, selector).map(|b| (span, b)))
        .collect()
}

/// Matches a trigger-based pattern. Returns the first site in source order
/// whose triggers and bases are aligned; compound patterns never match here.
pub fn match_pattern(pair: &AnnotatedSentencePair, pattern: &PatternPair) -> Option<MatchSite> {
    if pattern.is_compound() {
        return None;
    }
    let src_candidates = candidate_spans(&pair.src, pattern, Side::Source);
    if src_candidates.is_empty() {
        return None;
    }
    let trg_candidates = candidate_spans(&pair.trg, pattern, Side::Target);
    for &(src_span, src_base) in &src_candidates {
        let sp = trigger_positions(&pair.src, src_span);
        for &(trg_span, trg_base) in &trg_candidates {
            let tp = trigger_positions(&pair.trg, trg_span);
            let triggers_aligned =
                sp.len() == tp.len() && sp.iter().zip(&tp).all(|(&a, &b)| pair.alignment.contains(a, b));
            if triggers_aligned && pair.alignment.is_one_to_one(src_base, trg_base) {
                return Some(MatchSite {
                    pair_id: pair.pair_id,
                    pattern_id: pattern.id.clone(),
                    src_trigger: Some(src_span),
                    trg_trigger: Some(trg_span),
                    src_base,
                    trg_base,
                });
            }
        }
    }
    None
}

/// Source nouns aligned one-to-one with a target noun.
pub fn compound_candidates(pair: &AnnotatedSentencePair) -> Vec<(usize, usize)> {
    pair.src
        .tokens
        .iter()
        .enumerate()
        .filter(|(_, t)| t.has_upos("NOUN"))
        .filter_map(|(s, _)| {
            let t = pair.alignment.one_to_one_target(s)?;
            pair.trg.get(t)?.has_upos("NOUN").then_some((s, t))
        })
        .collect()
}

/// Uniformly samples a one-to-one aligned noun pair.
pub fn match_compound_site<R: Rng + ?Sized>(
    pair: &AnnotatedSentencePair,
    pattern_id: &str,
    rng: &mut R,
) -> Option<MatchSite> {
    let (src_base, trg_base) = *compound_candidates(pair).choose(rng)?;
    Some(MatchSite {
        pair_id: pair.pair_id,
        pattern_id: pattern_id.to_string(),
        src_trigger: None,
        trg_trigger: None,
        src_base,
        trg_base,
    })
}

/// Deterministic per-pair random stream.
pub fn pair_rng(seed: u64, stream_tag: u64, pair_id: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ stream_tag.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    rng.set_stream(pair_id as u64);
    rng
}

const COMPOUND_STREAM: u64 = 1;
const ALLOCATION_STREAM: u64 = 2;

/// How pairs left unclaimed by trigger patterns are dealt to compound patterns.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompoundAllocation {
    /// Shuffle, then fill compound patterns in config order up to their caps.
    Capped,
    /// Shuffle, then deal round-robin (test sets: equal share per pattern).
    RoundRobin,
}

#[derive(Debug, Clone)]
pub struct ScanResult {
    /// At most one site per pair, in pair order.
    pub sites: Vec<MatchSite>,
    /// Sites emitted per pattern, in config order.
    pub match_counts: IndexMap<String, usize>,
    /// Pairs with a usable noun that no trigger pattern claimed.
    pub compound_eligible: usize,
}

/// Scans pairs: trigger patterns are tried in config order and the first
/// match wins; unclaimed pairs with an aligned noun feed the compound patterns.
pub fn scan_corpus(
    pairs: &[AnnotatedSentencePair],
    patterns: &[PatternPair],
    seed: u64,
    allocation: CompoundAllocation,
) -> ScanResult {
    let compound_patterns: Vec<&PatternPair> = patterns.iter().filter(|p| p.is_compound()).collect();
    let per_pair: Vec<Option<MatchSite>> = pairs
        .par_iter()
        .map(|pair| {
            if let Some(site) = patterns.iter().find_map(|p| match_pattern(pair, p)) {
                return Some(site);
            }
            let first = compound_patterns.first()?;
            let mut rng = pair_rng(seed, COMPOUND_STREAM, pair.pair_id);
            match_compound_site(pair, &first.id, &mut rng)
        })
        .collect();

    let mut sites: Vec<Option<MatchSite>> = per_pair;
    let eligible: Vec<usize> = sites
        .iter()
        .enumerate()
        .filter(|(_, s)| s.as_ref().is_some_and(|s| s.src_trigger.is_none()))
        .map(|(i, _)| i)
        .collect();
    let compound_eligible = eligible.len();

    let mut order = eligible.clone();
    order.shuffle(&mut pair_rng(seed, ALLOCATION_STREAM, 0));
    let mut assignment: Vec<Option<&str>> = vec![None; order.len()];
    match allocation {
        CompoundAllocation::Capped => {
            let mut next = 0;
            for p in &compound_patterns {
                let take = p.max_train_insertions.unwrap_or(usize::MAX).min(order.len() - next);
                for slot in assignment.iter_mut().skip(next).take(take) {
                    *slot = Some(&p.id);
                }
                next += take;
            }
        }
        CompoundAllocation::RoundRobin => {
            if !compound_patterns.is_empty() {
                for (k, slot) in assignment.iter_mut().enumerate() {
                    *slot = Some(&compound_patterns[k % compound_patterns.len()].id);
                }
            }
        }
    }
    for (&idx, id) in order.iter().zip(&assignment) {
        match id {
            Some(id) => {
                if let Some(site) = sites[idx].as_mut() {
                    site.pattern_id = id.to_string();
                }
            }
            None => sites[idx] = None,
        }
    }

    let sites: Vec<MatchSite> = sites.into_iter().flatten().collect();
    let mut match_counts: IndexMap<String, usize> = patterns.iter().map(|p| (p.id.clone(), 0)).collect();
    for s in &sites {
        *match_counts.entry(s.pattern_id.clone()).or_default() += 1;
    }
    ScanResult {
        sites,
        match_counts,
        compound_eligible,
    }
}
