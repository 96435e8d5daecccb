//! String rules that realize each phenomenon, and the dispatcher that turns
//! a matched site into its surface or abstract rewriting.

use std::fmt;
use std::str::FromStr;

use crate::alphabet::VowelSet;
use crate::corpus::{AnnotatedSentence, AnnotatedSentencePair};
use crate::error::{Error, Result};
use crate::matcher::{MatchSite, Span};
use crate::morphemes::MorphemeInventory;
use crate::pattern::{PatternPair, Phenomenon, RedupMode, Side, Variant};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CheckKind {
    IsolatedToken,
    CircumfixedToken,
    InfixedToken,
    HarmonyToken,
    FullRedupToken,
    PartialRedupToken,
    TripleRedupToken,
    AbstractToken,
}

impl CheckKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CheckKind::IsolatedToken => "isolated_token",
            CheckKind::CircumfixedToken => "circumfixed_token",
            CheckKind::InfixedToken => "infixed_token",
            CheckKind::HarmonyToken => "harmony_token",
            CheckKind::FullRedupToken => "full_redup_token",
            CheckKind::PartialRedupToken => "partial_redup_token",
            CheckKind::TripleRedupToken => "triple_redup_token",
            CheckKind::AbstractToken => "abstract_token",
        }
    }
}

impl fmt::Display for CheckKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CheckKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        use CheckKind::*;
        [
            IsolatedToken,
            CircumfixedToken,
            InfixedToken,
            HarmonyToken,
            FullRedupToken,
            PartialRedupToken,
            TripleRedupToken,
            AbstractToken,
        ]
        .into_iter()
        .find(|k| k.as_str() == s)
        .ok_or_else(|| Error::Config(format!("unknown check kind {s:?}")))
    }
}

/// What a system translating source→target must produce.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExpectedOutcome {
    pub check_kind: CheckKind,
    /// Always the target side.
    pub check_side: Side,
    pub morpheme_parts: Vec<String>,
    pub triple: Option<[char; 3]>,
}

impl ExpectedOutcome {
    fn new(check_kind: CheckKind, parts: Vec<String>, triple: Option<[char; 3]>) -> Self {
        ExpectedOutcome {
            check_kind,
            check_side: Side::Target,
            morpheme_parts: parts,
            triple,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModifiedPairRecord {
    pub pair_id: usize,
    pub pattern_id: String,
    pub variant: Variant,
    pub src_tokens: Vec<String>,
    pub trg_tokens: Vec<String>,
    pub base_src: String,
    pub base_trg: String,
    /// Lemma of the source base, used for frequency bookkeeping.
    pub base_src_lemma: String,
    pub expected: ExpectedOutcome,
}

impl ModifiedPairRecord {
    pub fn src_text(&self) -> String {
        self.src_tokens.join(" ")
    }

    pub fn trg_text(&self) -> String {
        self.trg_tokens.join(" ")
    }

    pub fn tokens(&self, side: Side) -> &[String] {
        match side {
            Side::Source => &self.src_tokens,
            Side::Target => &self.trg_tokens,
        }
    }
}

fn lowercase(s: &str) -> String {
    s.to_lowercase()
}

/// Bound compound morpheme followed by the lowercased noun: `Sona` + `Räume`
/// gives `Sonaräume`.
pub fn apply_compound_token(base: &str, morpheme: &str) -> String {
    let mut out = String::new();
    let mut chars = morpheme.chars();
    if let Some(first) = chars.next() {
        out.extend(first.to_uppercase());
        out.push_str(chars.as_str());
    }
    out.push_str(&lowercase(base));
    out
}

/// `pre + base + suf`. On the source (German) side the base is lowercased
/// after the capitalized prefix piece; on the target side its casing is kept.
pub fn apply_circumfix(base: &str, pre: &str, suf: &str, side: Side) -> String {
    let core = match side {
        Side::Source => lowercase(base),
        Side::Target => base.to_string(),
    };
    format!("{pre}{core}{suf}")
}

/// Byte offset of the first vowel at a position greater than zero; this is
/// also the second vowel whenever the word starts with one.
fn first_inner_vowel(base: &str, vowels: &VowelSet) -> Option<usize> {
    base.char_indices()
        .skip(1)
        .find(|&(_, c)| vowels.is_vowel(c))
        .map(|(i, _)| i)
}

/// Inserts `infix` before the first word-internal vowel.
pub fn apply_infix(base: &str, infix: &str, vowels: &VowelSet) -> Option<String> {
    let at = first_inner_vowel(base, vowels)?;
    Some(format!("{}{}{}", &base[..at], infix, &base[at..]))
}

/// Consonant skeleton filled with the base's last two vowels.
pub fn apply_vowel_harmony(base: &str, triple: [char; 3], vowels: &VowelSet) -> Option<String> {
    let (v1, v2) = vowels.last_two(base)?;
    Some([triple[0], v1, triple[1], v2, triple[2]].iter().collect())
}

/// The reduplicated piece: the base up to and including its first vowel, or
/// its second vowel when the base starts with a vowel.
pub fn redup_prefix<'a>(base: &'a str, vowels: &VowelSet) -> Option<&'a str> {
    let starts_with_vowel = base.chars().next().is_some_and(|c| vowels.is_vowel(c));
    let wanted = if starts_with_vowel { 2 } else { 1 };
    let (idx, c) = base
        .char_indices()
        .filter(|&(_, c)| vowels.is_vowel(c))
        .nth(wanted - 1)?;
    Some(&base[..idx + c.len_utf8()])
}

pub fn apply_reduplication(base: &str, mode: RedupMode, vowels: &VowelSet) -> Option<String> {
    match mode {
        RedupMode::Full => (!base.is_empty()).then(|| format!("{base}{base}")),
        RedupMode::Partial => redup_prefix(base, vowels).map(|p| format!("{p}{base}")),
        RedupMode::Triple => redup_prefix(base, vowels).map(|p| format!("{p}{p}{base}")),
    }
}

/// Replaces the form (and lemma) of the trigger token with an isolated morpheme.
pub fn apply_isolated(sentence: &AnnotatedSentence, trigger_idx: usize, morpheme: &str) -> AnnotatedSentence {
    let mut out = sentence.clone();
    if let Some(t) = out.tokens.get_mut(trigger_idx) {
        t.form = morpheme.to_string();
        t.lemma = morpheme.to_string();
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum TriggerAction {
    Delete,
    Replace,
}

/// Token-level edit for one side of a pair.
#[derive(Debug, Default)]
struct SideEdit {
    base: usize,
    base_form: Option<String>,
    before_base: Option<String>,
    after_base: Option<String>,
    trigger: Option<(Span, TriggerAction, String)>,
}

impl SideEdit {
    fn at(base: usize) -> Self {
        SideEdit {
            base,
            ..SideEdit::default()
        }
    }

    fn apply(&self, forms: &[String]) -> Vec<String> {
        let mut out = Vec::with_capacity(forms.len() + 1);
        for (i, form) in forms.iter().enumerate() {
            if let Some((span, action, replacement)) = &self.trigger {
                if span.contains(i) {
                    if *action == TriggerAction::Replace && i == span.start {
                        out.push(replacement.clone());
                    }
                    continue;
                }
            }
            if i == self.base {
                out.extend(self.before_base.clone());
                out.push(self.base_form.clone().unwrap_or_else(|| form.clone()));
                out.extend(self.after_base.clone());
            } else {
                out.push(form.clone());
            }
        }
        out
    }
}

/// Rewrites a matched site into one variant. Returns `None` when the string
/// rule does not apply to the base (e.g. no vowel to infix before).
pub fn transform_site(
    pair: &AnnotatedSentencePair,
    site: &MatchSite,
    pattern: &PatternPair,
    inventory: &MorphemeInventory,
    variant: Variant,
    vowels: &VowelSet,
) -> Option<ModifiedPairRecord> {
    let morphemes = inventory.get(&pattern.id)?;
    let here = pattern.surface_side;
    let there = here.other();
    let sentence = |side: Side| match side {
        Side::Source => &pair.src,
        Side::Target => &pair.trg,
    };
    let base_here = sentence(here).get(site.base(here))?.form.clone();

    let mut edit_here = SideEdit::at(site.base(here));
    let mut edit_there = SideEdit::at(site.base(there));
    let isolated = match variant {
        Variant::Surface => morphemes.isolated.clone(),
        Variant::Abstract => morphemes.abstract_isolated.clone(),
    };

    if pattern.is_compound() {
        edit_there.before_base = Some(isolated.clone());
    } else {
        edit_here.trigger = Some((site.trigger(here)?, TriggerAction::Delete, String::new()));
        edit_there.trigger = Some((site.trigger(there)?, TriggerAction::Replace, isolated.clone()));
    }

    let isolated_expectation = || ExpectedOutcome::new(CheckKind::IsolatedToken, vec![isolated.clone()], None);
    let expected = match variant {
        Variant::Abstract => {
            edit_here.after_base = Some(morphemes.abstract_token.clone());
            if here == Side::Target {
                ExpectedOutcome::new(CheckKind::AbstractToken, vec![morphemes.abstract_token.clone()], None)
            } else {
                isolated_expectation()
            }
        }
        Variant::Surface => {
            let (kind, parts, triple) = match pattern.phenomenon {
                Phenomenon::Compound => {
                    edit_here.base_form = Some(apply_compound_token(&base_here, &morphemes.bound[0]));
                    (CheckKind::IsolatedToken, vec![], None)
                }
                Phenomenon::Circumfix => {
                    let (pre, suf) = (&morphemes.bound[0], &morphemes.bound[1]);
                    edit_here.base_form = Some(apply_circumfix(&base_here, pre, suf, here));
                    (CheckKind::CircumfixedToken, vec![pre.clone(), suf.clone()], None)
                }
                Phenomenon::Infix => {
                    let infix = &morphemes.bound[0];
                    edit_here.base_form = Some(apply_infix(&base_here, infix, vowels)?);
                    (CheckKind::InfixedToken, vec![infix.clone()], None)
                }
                Phenomenon::VowelHarmony => {
                    let triple = morphemes.triple?;
                    edit_here.after_base = Some(apply_vowel_harmony(&base_here, triple, vowels)?);
                    (CheckKind::HarmonyToken, vec![], Some(triple))
                }
                Phenomenon::Reduplication(mode) => {
                    edit_here.base_form = Some(apply_reduplication(&base_here, mode, vowels)?);
                    let kind = match mode {
                        RedupMode::Full => CheckKind::FullRedupToken,
                        RedupMode::Partial => CheckKind::PartialRedupToken,
                        RedupMode::Triple => CheckKind::TripleRedupToken,
                    };
                    (kind, vec![], None)
                }
            };
            if here == Side::Target {
                ExpectedOutcome::new(kind, parts, triple)
            } else {
                isolated_expectation()
            }
        }
    };

    let src_forms = pair.src.forms();
    let trg_forms = pair.trg.forms();
    let (src_edit, trg_edit) = match here {
        Side::Source => (&edit_here, &edit_there),
        Side::Target => (&edit_there, &edit_here),
    };
    let src_base_token = pair.src.get(site.src_base)?;
    Some(ModifiedPairRecord {
        pair_id: pair.pair_id,
        pattern_id: pattern.id.clone(),
        variant,
        src_tokens: src_edit.apply(&src_forms),
        trg_tokens: trg_edit.apply(&trg_forms),
        base_src: src_base_token.form.clone(),
        base_trg: pair.trg.get(site.trg_base)?.form.clone(),
        base_src_lemma: src_base_token.lemma.clone(),
        expected,
    })
}
