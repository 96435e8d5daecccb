//! Pattern pairs: which aligned trigger licenses which synthetic phenomenon.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    Source,
    Target,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::Source => Side::Target,
            Side::Target => Side::Source,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Side::Source => "src",
            Side::Target => "trg",
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Side {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "src" | "source" => Ok(Side::Source),
            "trg" | "target" => Ok(Side::Target),
            _ => Err(Error::Config(format!("unknown side {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Variant {
    Surface,
    Abstract,
}

impl Variant {
    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Surface => "surface",
            Variant::Abstract => "abstract",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "surface" => Ok(Variant::Surface),
            "abstract" => Ok(Variant::Abstract),
            _ => Err(Error::Config(format!("unknown variant {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RedupMode {
    Partial,
    Triple,
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Phenomenon {
    Compound,
    Circumfix,
    Infix,
    VowelHarmony,
    Reduplication(RedupMode),
}

impl Phenomenon {
    pub fn as_str(self) -> &'static str {
        match self {
            Phenomenon::Compound => "compound",
            Phenomenon::Circumfix => "circumfix",
            Phenomenon::Infix => "infix",
            Phenomenon::VowelHarmony => "vowel_harmony",
            Phenomenon::Reduplication(RedupMode::Partial) => "redup_partial",
            Phenomenon::Reduplication(RedupMode::Triple) => "redup_triple",
            Phenomenon::Reduplication(RedupMode::Full) => "redup_full",
        }
    }

    /// Name used inside abstract placeholder tokens.
    pub fn abstract_name(self) -> &'static str {
        match self {
            Phenomenon::Compound => "COMPOUND",
            Phenomenon::Circumfix => "CIRCUMFIX",
            Phenomenon::Infix => "INFIX",
            Phenomenon::VowelHarmony => "VOWEL_HARMONY",
            Phenomenon::Reduplication(RedupMode::Partial) => "PARTIAL_REDUPLICATION",
            Phenomenon::Reduplication(RedupMode::Triple) => "TRIPLICATION",
            Phenomenon::Reduplication(RedupMode::Full) => "FULL_REDUPLICATION",
        }
    }

    pub fn all() -> [Phenomenon; 7] {
        [
            Phenomenon::Compound,
            Phenomenon::Circumfix,
            Phenomenon::Infix,
            Phenomenon::VowelHarmony,
            Phenomenon::Reduplication(RedupMode::Partial),
            Phenomenon::Reduplication(RedupMode::Triple),
            Phenomenon::Reduplication(RedupMode::Full),
        ]
    }
}

impl fmt::Display for Phenomenon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Phenomenon {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Phenomenon::all()
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown phenomenon {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BaseSelector {
    PrepObject,
    CardinalHead,
    AdjectiveAfterModifier,
    RandomAlignedNoun,
}

impl BaseSelector {
    pub fn as_str(self) -> &'static str {
        match self {
            BaseSelector::PrepObject => "prep_object",
            BaseSelector::CardinalHead => "cardinal_head",
            BaseSelector::AdjectiveAfterModifier => "adjective_after_modifier",
            BaseSelector::RandomAlignedNoun => "random_aligned_noun",
        }
    }

    /// UPOS tags a trigger token may carry.
    pub fn trigger_upos(self) -> &'static [&'static str] {
        match self {
            BaseSelector::PrepObject => &["ADP"],
            BaseSelector::CardinalHead => &["NUM"],
            BaseSelector::AdjectiveAfterModifier => &["ADV", "PART"],
            BaseSelector::RandomAlignedNoun => &[],
        }
    }

    pub fn base_upos(self) -> &'static str {
        match self {
            BaseSelector::AdjectiveAfterModifier => "ADJ",
            _ => "NOUN",
        }
    }
}

impl FromStr for BaseSelector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "prep_object" => Ok(BaseSelector::PrepObject),
            "cardinal_head" => Ok(BaseSelector::CardinalHead),
            "adjective_after_modifier" => Ok(BaseSelector::AdjectiveAfterModifier),
            "random_aligned_noun" => Ok(BaseSelector::RandomAlignedNoun),
            _ => Err(Error::Config(format!("unknown base selector {s:?}"))),
        }
    }
}

/// A trigger is a sequence of positions, each a set of alternative lemmas.
/// Written as space-separated positions with `|`-separated alternatives,
/// e.g. `sehr sehr` or `zwei|2`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Trigger {
    pub positions: Vec<Vec<String>>,
}

impl Trigger {
    pub fn parse(s: &str) -> Trigger {
        let s = s.trim();
        if s.is_empty() || s == "-" {
            return Trigger::default();
        }
        Trigger {
            positions: s
                .split_whitespace()
                .map(|p| p.split('|').map(|a| a.to_lowercase()).collect())
                .collect(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    /// The first alternative at each position.
    pub fn canonical(&self) -> Vec<&str> {
        self.positions.iter().map(|p| p[0].as_str()).collect()
    }
}

impl fmt::Display for Trigger {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.positions.is_empty() {
            return f.write_str("-");
        }
        let parts: Vec<String> = self.positions.iter().map(|p| p.join("|")).collect();
        f.write_str(&parts.join(" "))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternPair {
    pub id: String,
    pub phenomenon: Phenomenon,
    /// Side where the bound phenomenon is realized.
    pub surface_side: Side,
    pub src_trigger: Trigger,
    pub trg_trigger: Trigger,
    pub base_selector: BaseSelector,
    pub max_train_insertions: Option<usize>,
}

impl PatternPair {
    pub fn is_compound(&self) -> bool {
        self.phenomenon == Phenomenon::Compound
    }

    pub fn trigger(&self, side: Side) -> &Trigger {
        match side {
            Side::Source => &self.src_trigger,
            Side::Target => &self.trg_trigger,
        }
    }

    /// Placeholder token for the abstract variant, e.g. `@CIRCUMFIX_1@` or
    /// `@FULL_REDUPLICATION@`.
    pub fn abstract_token(&self) -> String {
        let name = self.phenomenon.abstract_name();
        let number = self
            .id
            .rsplit_once('_')
            .map(|(_, n)| n)
            .filter(|n| !n.is_empty() && n.chars().all(|c| c.is_ascii_digit()));
        match number {
            Some(n) => format!("@{name}_{n}@"),
            None => format!("@{name}@"),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let err = |m: &str| Err(Error::Config(format!("pattern {}: {m}", self.id)));
        match self.phenomenon {
            Phenomenon::Compound => {
                if self.base_selector != BaseSelector::RandomAlignedNoun {
                    return err("compound patterns must use random_aligned_noun");
                }
                if !self.src_trigger.is_empty() || !self.trg_trigger.is_empty() {
                    return err("compound patterns take no triggers");
                }
                if self.surface_side != Side::Source {
                    return err("compounds are realized on the source side");
                }
            }
            Phenomenon::Reduplication(_) => {
                if self.base_selector != BaseSelector::AdjectiveAfterModifier {
                    return err("reduplication patterns must use adjective_after_modifier");
                }
            }
            _ => {
                if matches!(
                    self.base_selector,
                    BaseSelector::RandomAlignedNoun | BaseSelector::AdjectiveAfterModifier
                ) {
                    return err("noun phenomena need a prep_object or cardinal_head selector");
                }
            }
        }
        if !self.is_compound() {
            if self.src_trigger.is_empty() || self.trg_trigger.is_empty() {
                return err("trigger lemmas are required on both sides");
            }
            if self.src_trigger.len() != self.trg_trigger.len() {
                return err("source and target triggers differ in length");
            }
        }
        Ok(())
    }
}

pub const PATTERN_HEADER: &str =
    "id\tphenomenon\tsurface_side\tsrc_lemmas\ttrg_lemmas\tbase_selector\tmax_train_insertions";

/// Parses the pattern TSV. `#` lines and the header row are ignored.
pub fn parse_patterns(text: &str) -> Result<Vec<PatternPair>> {
    let mut patterns = Vec::new();
    let mut seen = HashSet::new();
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        if line.trim().is_empty() || line.starts_with('#') || line.starts_with("id\t") {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 7 {
            return Err(Error::parse(
                lineno,
                format!("pattern rows need 7 columns, found {}", cols.len()),
            ));
        }
        let cap = match cols[6].trim() {
            "" | "-" => None,
            n => Some(
                n.parse()
                    .map_err(|_| Error::parse(lineno, format!("bad insertion cap {n:?}")))?,
            ),
        };
        let pattern = PatternPair {
            id: cols[0].to_string(),
            phenomenon: cols[1].parse()?,
            surface_side: cols[2].parse()?,
            src_trigger: Trigger::parse(cols[3]),
            trg_trigger: Trigger::parse(cols[4]),
            base_selector: cols[5].parse()?,
            max_train_insertions: cap,
        };
        pattern.validate()?;
        if !seen.insert(pattern.id.clone()) {
            return Err(Error::Config(format!("duplicate pattern id {}", pattern.id)));
        }
        patterns.push(pattern);
    }
    Ok(patterns)
}

pub fn write_patterns(patterns: &[PatternPair]) -> String {
    let mut out = String::from(PATTERN_HEADER);
    out.push('\n');
    for p in patterns {
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
            p.id,
            p.phenomenon,
            p.surface_side,
            p.src_trigger,
            p.trg_trigger,
            p.base_selector.as_str(),
            p.max_train_insertions
                .map_or_else(|| "-".to_string(), |n| n.to_string()),
        ));
    }
    out
}

/// The default DE→EN pattern set. Triplication precedes partial
/// reduplication so that `sehr , sehr` is not claimed by the single `sehr`.
pub const DEFAULT_PATTERNS_TSV: &str = "\
id\tphenomenon\tsurface_side\tsrc_lemmas\ttrg_lemmas\tbase_selector\tmax_train_insertions
compound_1\tcompound\tsrc\t-\t-\trandom_aligned_noun\t1095
compound_3\tcompound\tsrc\t-\t-\trandom_aligned_noun\t522
compound_5\tcompound\tsrc\t-\t-\trandom_aligned_noun\t238
compound_7\tcompound\tsrc\t-\t-\trandom_aligned_noun\t67
compound_9\tcompound\tsrc\t-\t-\trandom_aligned_noun\t27
circumfix_1\tcircumfix\ttrg\tfür\tfor\tprep_object\t-
circumfix_2\tcircumfix\tsrc\taus\tfrom\tprep_object\t-
circumfix_3\tcircumfix\ttrg\tzwischen\tbetween\tprep_object\t-
circumfix_4\tcircumfix\tsrc\tdurch\tthrough\tprep_object\t-
infix_1\tinfix\ttrg\tin\tin\tprep_object\t-
infix_2\tinfix\ttrg\tauf\ton\tprep_object\t-
infix_3\tinfix\tsrc\tgegen\tagainst\tprep_object\t-
infix_4\tinfix\tsrc\tbei\tat\tprep_object\t-
vowel_harmony_1\tvowel_harmony\ttrg\tmit\twith\tprep_object\t-
vowel_harmony_2\tvowel_harmony\ttrg\tzwei\ttwo\tcardinal_head\t-
vowel_harmony_3\tvowel_harmony\tsrc\tnach\tafter\tprep_object\t-
vowel_harmony_4\tvowel_harmony\ttrg\tvor\tbefore\tprep_object\t-
redup_triple\tredup_triple\tsrc\tsehr sehr\tvery very\tadjective_after_modifier\t-
redup_partial\tredup_partial\tsrc\tsehr\tvery\tadjective_after_modifier\t-
redup_full\tredup_full\ttrg\tnicht\tnot\tadjective_after_modifier\t-
";

pub fn default_patterns() -> Vec<PatternPair> {
    parse_patterns(DEFAULT_PATTERNS_TSV).expect("default pattern table is valid")
}
