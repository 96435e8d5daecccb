//! Scoring system outputs against test metadata: per-phenomenon checks,
//! accuracy tables, frequency buckets and error classification.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use indexmap::IndexMap;
use rayon::prelude::*;

use crate::alphabet::VowelSet;
use crate::builder::{Bucket, MetaRow};
use crate::error::{Error, Result};
use crate::morphemes::{MorphemeInventory, PatternMorphemes};
use crate::pattern::{PatternPair, Phenomenon, Side, Variant};
use crate::transforms::{
    apply_circumfix, apply_compound_token, apply_infix, apply_reduplication, apply_vowel_harmony, redup_prefix,
    CheckKind,
};

/// Orthographic-similarity threshold for S3/T2 (normalized Levenshtein).
pub const SIMILARITY_THRESHOLD: f64 = 0.34;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ErrorCode {
    M1,
    S1,
    S2,
    S3,
    T1,
    T2,
    T3,
    T4,
    T5,
    O1,
    A1,
}

impl ErrorCode {
    pub const ALL: [ErrorCode; 11] = [
        ErrorCode::M1,
        ErrorCode::S1,
        ErrorCode::S2,
        ErrorCode::S3,
        ErrorCode::T1,
        ErrorCode::T2,
        ErrorCode::T3,
        ErrorCode::T4,
        ErrorCode::T5,
        ErrorCode::O1,
        ErrorCode::A1,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ErrorCode::M1 => "M1",
            ErrorCode::S1 => "S1",
            ErrorCode::S2 => "S2",
            ErrorCode::S3 => "S3",
            ErrorCode::T1 => "T1",
            ErrorCode::T2 => "T2",
            ErrorCode::T3 => "T3",
            ErrorCode::T4 => "T4",
            ErrorCode::T5 => "T5",
            ErrorCode::O1 => "O1",
            ErrorCode::A1 => "A1",
        }
    }

    pub fn confidence(self) -> Confidence {
        match self {
            ErrorCode::S1 | ErrorCode::S3 | ErrorCode::T2 | ErrorCode::T5 => Confidence::Heuristic,
            _ => Confidence::Exact,
        }
    }

    /// Codes whose defining criterion is semantic and cannot be automated.
    pub fn needs_human(self) -> bool {
        self == ErrorCode::T5
    }
}

impl fmt::Display for ErrorCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ErrorCode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ErrorCode::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown error code {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Confidence {
    Exact,
    Heuristic,
}

impl fmt::Display for Confidence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Confidence::Exact => "exact",
            Confidence::Heuristic => "heuristic",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvalRecord {
    pub line_no: usize,
    pub pattern_id: String,
    pub variant: Variant,
    pub bucket: Bucket,
    pub correct: bool,
    pub error: Option<ErrorCode>,
}

impl EvalRecord {
    pub fn confidence(&self) -> Option<Confidence> {
        self.error.map(ErrorCode::confidence)
    }
}

/// Strips leading/trailing punctuation (keeping `@`) and case-folds.
pub fn normalize_token(token: &str) -> String {
    token
        .trim_matches(|c: char| !c.is_alphanumeric() && c != '@')
        .to_lowercase()
}

/// Whitespace-tokenizes and normalizes a line; tokens that were pure
/// punctuation are dropped.
pub fn normalize_tokens(line: &str) -> Vec<String> {
    line.split_whitespace()
        .map(normalize_token)
        .filter(|t| !t.is_empty())
        .collect()
}

fn count_isolated(tokens: &[String], morpheme: &str) -> usize {
    let m = morpheme.to_lowercase();
    tokens.iter().filter(|t| **t == m).count()
}

pub fn check_isolated(tokens: &[String], morpheme: &str) -> bool {
    count_isolated(tokens, morpheme) > 0
}

fn is_circumfixed(token: &str, pre: &str, suf: &str) -> bool {
    token.len() > pre.len() + suf.len() && token.starts_with(pre) && token.ends_with(suf)
}

fn count_circumfix(tokens: &[String], pre: &str, suf: &str) -> usize {
    let (pre, suf) = (pre.to_lowercase(), suf.to_lowercase());
    tokens.iter().filter(|t| is_circumfixed(t, &pre, &suf)).count()
}

pub fn check_circumfix(tokens: &[String], pre: &str, suf: &str) -> bool {
    count_circumfix(tokens, pre, suf) > 0
}

fn is_infixed(token: &str, infix: &str) -> bool {
    token
        .match_indices(infix)
        .any(|(i, _)| i > 0 && i + infix.len() < token.len())
}

fn count_infix(tokens: &[String], infix: &str) -> usize {
    let infix = infix.to_lowercase();
    tokens.iter().filter(|t| is_infixed(t, &infix)).count()
}

pub fn check_infix(tokens: &[String], infix: &str) -> bool {
    count_infix(tokens, infix) > 0
}

/// Vowels in the skeleton slots of `token`, if it has the shape c1·V·c2·V·c3.
fn skeleton_vowels(token: &str, triple: [char; 3], vowels: &VowelSet) -> Option<(char, char)> {
    let cs: Vec<char> = token.chars().collect();
    let t: Vec<char> = triple.iter().flat_map(|c| c.to_lowercase()).collect();
    match cs.as_slice() {
        [a, v1, b, v2, c] if [*a, *b, *c] == t[..] && vowels.is_vowel(*v1) && vowels.is_vowel(*v2) => {
            Some((*v1, *v2))
        }
        _ => None,
    }
}

fn count_harmony(tokens: &[String], triple: [char; 3], vowels: &VowelSet) -> usize {
    (1..tokens.len())
        .filter(|&i| {
            skeleton_vowels(&tokens[i], triple, vowels)
                .is_some_and(|vs| vowels.last_two(&tokens[i - 1]) == Some(vs))
        })
        .count()
}

/// True iff some non-initial skeleton token carries the last two vowels of
/// the token before it.
pub fn check_vowel_harmony(tokens: &[String], triple: [char; 3], vowels: &VowelSet) -> bool {
    count_harmony(tokens, triple, vowels) > 0
}

fn is_full_redup(token: &str) -> bool {
    let cs: Vec<char> = token.chars().collect();
    let n = cs.len();
    n >= 4 && n.is_multiple_of(2) && cs[..n / 2] == cs[n / 2..]
}

pub fn check_full_redup(tokens: &[String]) -> bool {
    tokens.iter().any(|t| is_full_redup(t))
}

/// `token` = prefix·…·prefix·rest with `copies` extra prefixes, where prefix
/// is the reduplication prefix of rest.
fn is_prefix_redup(token: &str, copies: usize, vowels: &VowelSet) -> bool {
    token.char_indices().skip(1).any(|(k, _)| {
        let (head, rest) = token.split_at(k);
        let Some(p) = redup_prefix(rest, vowels) else { return false };
        head.len() == p.len() * copies && head == p.repeat(copies)
    })
}

pub fn check_partial_redup(tokens: &[String], vowels: &VowelSet) -> bool {
    tokens.iter().any(|t| is_prefix_redup(t, 1, vowels))
}

pub fn check_triple_redup(tokens: &[String], vowels: &VowelSet) -> bool {
    tokens.iter().any(|t| is_prefix_redup(t, 2, vowels))
}

pub fn check_abstract(tokens: &[String], abstract_token: &str) -> bool {
    check_isolated(tokens, abstract_token)
}

/// Number of tokens satisfying the row's check. A line is correct iff this is exactly one.
pub fn count_expected(tokens: &[String], row: &MetaRow, vowels: &VowelSet) -> usize {
    let part = |i: usize| row.morpheme_parts.get(i).map(String::as_str).unwrap_or("");
    match row.check_kind {
        CheckKind::IsolatedToken | CheckKind::AbstractToken => count_isolated(tokens, part(0)),
        CheckKind::CircumfixedToken => count_circumfix(tokens, part(0), part(1)),
        CheckKind::InfixedToken => count_infix(tokens, part(0)),
        CheckKind::HarmonyToken => row.triple.map_or(0, |t| count_harmony(tokens, t, vowels)),
        CheckKind::FullRedupToken => tokens.iter().filter(|t| is_full_redup(t)).count(),
        CheckKind::PartialRedupToken => tokens.iter().filter(|t| is_prefix_redup(t, 1, vowels)).count(),
        CheckKind::TripleRedupToken => tokens.iter().filter(|t| is_prefix_redup(t, 2, vowels)).count(),
    }
}

fn is_abstract_shaped(token: &str) -> bool {
    token.len() > 2
        && token.starts_with('@')
        && token.ends_with('@')
        && token[1..token.len() - 1]
            .chars()
            .all(|c| c.is_alphanumeric() || c == '_')
}

fn normalized_distance(a: &str, b: &str) -> f64 {
    let n = a.chars().count().max(b.chars().count());
    if n == 0 {
        return 0.0;
    }
    strsim::levenshtein(a, b) as f64 / n as f64
}

/// How a morpheme is recognized in output tokens.
#[derive(Debug, Clone, PartialEq, Eq)]
enum Probe {
    Token(String),
    Substring(String),
    Skeleton([char; 3]),
}

impl Probe {
    fn hits(&self, tokens: &[String], vowels: &VowelSet) -> bool {
        match self {
            Probe::Token(m) => tokens.iter().any(|t| t == m),
            Probe::Substring(m) => tokens.iter().any(|t| t.contains(m.as_str())),
            Probe::Skeleton(tr) => tokens.iter().any(|t| skeleton_vowels(t, *tr, vowels).is_some()),
        }
    }
}

fn morpheme_probes(m: &PatternMorphemes) -> Vec<Probe> {
    let mut out: Vec<Probe> = m
        .bound
        .iter()
        .map(|b| Probe::Substring(b.to_lowercase()))
        .collect();
    out.extend(m.triple.map(Probe::Skeleton));
    for s in [&m.isolated, &m.abstract_token, &m.abstract_isolated] {
        out.push(Probe::Token(s.to_lowercase()));
    }
    out
}

/// Everything the evaluator needs beyond the metadata rows.
#[derive(Debug, Clone)]
pub struct EvalContext {
    pub patterns: Vec<PatternPair>,
    pub inventory: MorphemeInventory,
    pub vowels: VowelSet,
    /// Target-language words for T5 detection; empty disables T5.
    pub target_vocab: HashSet<String>,
}

impl EvalContext {
    pub fn new(patterns: Vec<PatternPair>, inventory: MorphemeInventory) -> Self {
        EvalContext {
            patterns,
            inventory,
            vowels: VowelSet::default(),
            target_vocab: HashSet::new(),
        }
    }

    fn pattern(&self, id: &str) -> Option<&PatternPair> {
        self.patterns.iter().find(|p| p.id == id)
    }

    /// Artificial strings found on the source side of a test line.
    fn source_pieces(&self, row: &MetaRow, p: &PatternPair, m: &PatternMorphemes) -> Vec<String> {
        let mut out = Vec::new();
        match (row.variant, p.surface_side) {
            (Variant::Surface, Side::Source) => {
                out.extend(m.bound.iter().map(|b| b.to_lowercase()));
                if let Some(t) = m.triple {
                    out.extend(apply_vowel_harmony(&row.base_src, t, &self.vowels));
                }
            }
            (Variant::Surface, Side::Target) => out.push(m.isolated.to_lowercase()),
            (Variant::Abstract, Side::Source) => out.push(m.abstract_token.to_lowercase()),
            (Variant::Abstract, Side::Target) => out.push(m.abstract_isolated.to_lowercase()),
        }
        out
    }

    /// The source-side bound word (artificial morpheme plus untranslated base).
    fn source_bound_form(&self, row: &MetaRow, p: &PatternPair, m: &PatternMorphemes) -> Option<String> {
        if row.variant != Variant::Surface || p.surface_side != Side::Source {
            return None;
        }
        let base = &row.base_src;
        let form = match p.phenomenon {
            Phenomenon::Compound => Some(apply_compound_token(base, m.bound.first()?)),
            Phenomenon::Circumfix => Some(apply_circumfix(base, m.bound.first()?, m.bound.get(1)?, Side::Source)),
            Phenomenon::Infix => apply_infix(base, m.bound.first()?, &self.vowels),
            Phenomenon::VowelHarmony => None,
            Phenomenon::Reduplication(mode) => apply_reduplication(base, mode, &self.vowels),
        };
        form.map(|f| normalize_token(&f))
    }

    /// Assigns exactly one code to an incorrect line.
    pub fn classify_error(&self, row: &MetaRow, tokens: &[String]) -> ErrorCode {
        let vowels = &self.vowels;
        let pattern = self.pattern(&row.pattern_id);
        let morphemes = self.inventory.get(&row.pattern_id);
        let expected: Vec<String> = row.morpheme_parts.iter().map(|s| s.to_lowercase()).collect();
        let source_pieces = match (pattern, morphemes) {
            (Some(p), Some(m)) => self.source_pieces(row, p, m),
            _ => Vec::new(),
        };

        // A1
        if row.variant == Variant::Surface && tokens.iter().any(|t| is_abstract_shaped(t)) {
            return ErrorCode::A1;
        }

        // O1: an artificial morpheme that belongs neither to this line's
        // expected output nor to its source side.
        let own: HashSet<&str> = expected
            .iter()
            .chain(source_pieces.iter())
            .map(String::as_str)
            .collect();
        for (id, m) in self.inventory.iter() {
            for probe in morpheme_probes(m) {
                let is_own = match &probe {
                    Probe::Token(s) | Probe::Substring(s) => own.contains(s.as_str()),
                    Probe::Skeleton(_) => id == &row.pattern_id,
                };
                if !is_own && probe.hits(tokens, vowels) {
                    return ErrorCode::O1;
                }
            }
        }

        // T3
        if count_expected(tokens, row, vowels) > 1 {
            return ErrorCode::T3;
        }

        // T4: parts present but split off as free-standing tokens.
        let free = |s: &str| tokens.iter().any(|t| t == s);
        let t4 = match row.check_kind {
            CheckKind::CircumfixedToken => expected.len() == 2 && free(&expected[0]) && free(&expected[1]),
            CheckKind::InfixedToken => expected.first().is_some_and(|i| free(i)),
            CheckKind::FullRedupToken => tokens.windows(2).any(|w| w[0] == w[1] && w[0].chars().count() >= 2),
            _ => false,
        };
        if t4 {
            return ErrorCode::T4;
        }

        // T1: near misses.
        let t1 = match row.check_kind {
            CheckKind::HarmonyToken => row
                .triple
                .is_some_and(|t| tokens.iter().any(|tok| skeleton_vowels(tok, t, vowels).is_some())),
            CheckKind::CircumfixedToken if expected.len() == 2 => {
                let (pre, suf) = (&expected[0], &expected[1]);
                tokens.iter().any(|t| {
                    let p = t.len() > pre.len() && t.starts_with(pre.as_str());
                    let s = t.len() > suf.len() && t.ends_with(suf.as_str());
                    p != s
                })
            }
            CheckKind::InfixedToken => expected.first().is_some_and(|i| {
                tokens
                    .iter()
                    .any(|t| t.len() > i.len() && t.contains(i.as_str()) && !is_infixed(t, i))
            }),
            CheckKind::FullRedupToken => tokens.iter().any(|t| {
                let cs: Vec<char> = t.chars().collect();
                (2..cs.len().saturating_sub(1)).any(|k| {
                    let (a, b): (String, String) = (cs[..k].iter().collect(), cs[k..].iter().collect());
                    strsim::levenshtein(&a, &b) == 1
                })
            }),
            _ => false,
        };
        if t1 {
            return ErrorCode::T1;
        }

        // S1: source morpheme with the base left untranslated.
        let base_src = normalize_token(&row.base_src);
        let bound_form = match (pattern, morphemes) {
            (Some(p), Some(m)) => self.source_bound_form(row, p, m),
            _ => None,
        };
        let s1 = bound_form.as_ref().is_some_and(|f| free(f))
            || (!base_src.is_empty()
                && source_pieces.iter().any(|piece| {
                    tokens
                        .iter()
                        .any(|t| t.contains(piece.as_str()) && (t.contains(base_src.as_str()) || free(&base_src)))
                }));
        if s1 {
            return ErrorCode::S1;
        }

        // S2: only the source morpheme carried over.
        if source_pieces
            .iter()
            .any(|piece| tokens.iter().any(|t| t.contains(piece.as_str())))
        {
            return ErrorCode::S2;
        }

        // T5: reduplication replaced by concatenating a different word.
        if row.check_kind == CheckKind::FullRedupToken && !self.target_vocab.is_empty() {
            let adj = normalize_token(&row.base_trg);
            let t5 = tokens.iter().any(|t| {
                t.char_indices().skip(1).any(|(k, _)| {
                    let (w1, w2) = t.split_at(k);
                    w1 != w2
                        && ((w2 == adj && self.target_vocab.contains(w1))
                            || (w1 == adj && self.target_vocab.contains(w2)))
                })
            });
            if t5 {
                return ErrorCode::T5;
            }
        }

        // T2 / S3: an orthographically similar word in place of the morpheme.
        let closest = |targets: &[String]| -> Option<f64> {
            targets
                .iter()
                .filter(|m| m.chars().count() >= 3 && !is_abstract_shaped(m))
                .flat_map(|m| tokens.iter().filter(move |t| *t != m).map(move |t| normalized_distance(t, m)))
                .min_by(|a, b| a.total_cmp(b))
        };
        let t2 = closest(&expected).filter(|d| *d <= SIMILARITY_THRESHOLD);
        let s3 = closest(&source_pieces).filter(|d| *d <= SIMILARITY_THRESHOLD);
        match (t2, s3) {
            (Some(a), Some(b)) if b < a => return ErrorCode::S3,
            (Some(_), _) => return ErrorCode::T2,
            (None, Some(_)) => return ErrorCode::S3,
            _ => {}
        }

        ErrorCode::M1
    }

    pub fn evaluate_line(&self, row: &MetaRow, output: &str) -> EvalRecord {
        let tokens = normalize_tokens(output);
        let correct = count_expected(&tokens, row, &self.vowels) == 1;
        EvalRecord {
            line_no: row.line_no,
            pattern_id: row.pattern_id.clone(),
            variant: row.variant,
            bucket: row.bucket(),
            correct,
            error: (!correct).then(|| self.classify_error(row, &tokens)),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Tally {
    pub n: usize,
    pub correct: usize,
}

impl Tally {
    fn add(&mut self, correct: bool) {
        self.n += 1;
        self.correct += usize::from(correct);
    }

    pub fn accuracy(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            self.correct as f64 / self.n as f64
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Report {
    pub records: Vec<EvalRecord>,
    pub by_pattern: IndexMap<(String, Variant), Tally>,
    pub by_bucket: IndexMap<(String, Bucket), Tally>,
    pub errors: IndexMap<String, IndexMap<ErrorCode, usize>>,
}

impl Report {
    pub fn from_records(records: Vec<EvalRecord>, patterns: &[PatternPair]) -> Report {
        let order: HashMap<&str, usize> = patterns.iter().enumerate().map(|(i, p)| (p.id.as_str(), i)).collect();
        let rank = |id: &str| order.get(id).copied().unwrap_or(usize::MAX);
        let mut report = Report::default();
        for r in &records {
            report
                .by_pattern
                .entry((r.pattern_id.clone(), r.variant))
                .or_default()
                .add(r.correct);
            report
                .by_bucket
                .entry((r.pattern_id.clone(), r.bucket))
                .or_default()
                .add(r.correct);
            report
                .by_bucket
                .entry(("*".to_string(), r.bucket))
                .or_default()
                .add(r.correct);
            if let Some(code) = r.error {
                *report
                    .errors
                    .entry(r.pattern_id.clone())
                    .or_default()
                    .entry(code)
                    .or_default() += 1;
            }
        }
        report
            .by_pattern
            .sort_by(|(a, av), _, (b, bv), _| (rank(a), a, *av).cmp(&(rank(b), b, *bv)));
        report.by_bucket.sort_by(|(a, ab), _, (b, bb), _| {
            let key = |id: &String| (id == "*", rank(id), id.clone());
            (key(a), *ab).cmp(&(key(b), *bb))
        });
        report.errors.sort_by(|a, _, b, _| (rank(a), a).cmp(&(rank(b), b)));
        for hist in report.errors.values_mut() {
            hist.sort_keys();
        }
        report.records = records;
        report
    }

    pub fn accuracy(&self, pattern_id: &str, variant: Variant) -> Option<f64> {
        self.by_pattern
            .get(&(pattern_id.to_string(), variant))
            .map(Tally::accuracy)
    }

    pub fn report_tsv(&self) -> String {
        let mut out = String::from("pattern_id\tvariant\tn\taccuracy\n");
        for ((id, v), t) in &self.by_pattern {
            out.push_str(&format!("{id}\t{v}\t{}\t{:.4}\n", t.n, t.accuracy()));
        }
        out
    }

    pub fn buckets_tsv(&self) -> String {
        let mut out = String::from("pattern_id\tbucket\tn\taccuracy\n");
        for ((id, b), t) in &self.by_bucket {
            out.push_str(&format!("{id}\t{b}\t{}\t{:.4}\n", t.n, t.accuracy()));
        }
        out
    }

    pub fn errors_tsv(&self) -> String {
        let mut out = String::from("line_no\tcode\tconfidence\tpattern_id\tvariant\tneeds_human\n");
        for r in &self.records {
            if let Some(code) = r.error {
                out.push_str(&format!(
                    "{}\t{code}\t{}\t{}\t{}\t{}\n",
                    r.line_no,
                    code.confidence(),
                    r.pattern_id,
                    r.variant,
                    code.needs_human()
                ));
            }
        }
        out
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for (name, text) in [
            ("report.tsv", self.report_tsv()),
            ("buckets.tsv", self.buckets_tsv()),
            ("errors.tsv", self.errors_tsv()),
        ] {
            let path = dir.join(name);
            fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        }
        Ok(())
    }
}

/// Scores line-parallel system outputs against test metadata.
pub fn evaluate(outputs: &[String], meta: &[MetaRow], ctx: &EvalContext) -> Result<Report> {
    if outputs.len() != meta.len() {
        return Err(Error::LineCountMismatch {
            outputs: outputs.len(),
            expected: meta.len(),
        });
    }
    let mut rows: Vec<&MetaRow> = meta.iter().collect();
    rows.sort_by_key(|r| r.line_no);
    let records: Vec<EvalRecord> = rows
        .par_iter()
        .map(|row| {
            let output = outputs
                .get(row.line_no.wrapping_sub(1))
                .map(String::as_str)
                .unwrap_or("");
            ctx.evaluate_line(row, output)
        })
        .collect();
    Ok(Report::from_records(records, &ctx.patterns))
}

/// Reads a system output file, one sentence per line.
pub fn load_outputs(path: &Path) -> Result<Vec<String>> {
    Ok(fs::read_to_string(path)
        .map_err(|e| Error::io(path, e))?
        .lines()
        .map(String::from)
        .collect())
}
