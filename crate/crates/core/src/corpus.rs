//! Annotated parallel corpora: CoNLL-U sentences, Pharaoh alignments and
//! the sentence-pair model every transformation works on.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    /// 1-based position in the sentence.
    pub index: usize,
    pub form: String,
    pub lemma: String,
    pub upos: String,
    /// Head index, 0 for the root.
    pub head: usize,
    pub deprel: String,
}

impl Token {
    pub fn new(
        index: usize,
        form: impl Into<String>,
        lemma: impl Into<String>,
        upos: impl Into<String>,
        head: usize,
        deprel: impl Into<String>,
    ) -> Self {
        Token {
            index,
            form: form.into(),
            lemma: lemma.into(),
            upos: upos.into(),
            head,
            deprel: deprel.into(),
        }
    }

    pub fn has_upos(&self, upos: &str) -> bool {
        self.upos == upos
    }

    /// Whether the dependency label carries information (`_` and empty do not).
    pub fn has_deprel(&self) -> bool {
        !self.deprel.is_empty() && self.deprel != "_"
    }

    /// Lemma compared case-insensitively, falling back to the form when the
    /// lemma column is unset.
    pub fn lemma_is(&self, lemma: &str) -> bool {
        let own = if self.lemma.is_empty() || self.lemma == "_" {
            &self.form
        } else {
            &self.lemma
        };
        own.to_lowercase() == lemma.to_lowercase()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AnnotatedSentence {
    pub tokens: Vec<Token>,
}

impl AnnotatedSentence {
    /// Builds a sentence and checks the structural invariants.
    pub fn new(tokens: Vec<Token>) -> Result<Self> {
        let sentence = AnnotatedSentence { tokens };
        sentence.validate(0)?;
        Ok(sentence)
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn forms(&self) -> Vec<String> {
        self.tokens.iter().map(|t| t.form.clone()).collect()
    }

    /// Token at 0-based position.
    pub fn get(&self, pos: usize) -> Option<&Token> {
        self.tokens.get(pos)
    }

    /// 0-based position of the head of the token at `pos`, if it is not the root.
    pub fn head_pos(&self, pos: usize) -> Option<usize> {
        match self.tokens.get(pos)?.head {
            0 => None,
            h => Some(h - 1),
        }
    }

    fn validate(&self, line: usize) -> Result<()> {
        let n = self.tokens.len();
        let structure = |message: String| Error::Structure { line, message };
        let mut roots = 0;
        for (pos, token) in self.tokens.iter().enumerate() {
            if token.index != pos + 1 {
                return Err(structure(format!(
                    "token indices are not contiguous: expected {}, found {}",
                    pos + 1,
                    token.index
                )));
            }
            if token.form.is_empty() || token.form.chars().any(char::is_whitespace) {
                return Err(structure(format!(
                    "token {} has an empty or whitespace-containing form",
                    token.index
                )));
            }
            if token.head > n {
                return Err(structure(format!(
                    "token {} has head {} outside a {}-token sentence",
                    token.index, token.head, n
                )));
            }
            if token.head == 0 {
                roots += 1;
            }
        }
        if n > 0 && roots != 1 {
            return Err(structure(format!("expected exactly one root, found {roots}")));
        }
        Ok(())
    }

    /// Inserts tokens before 0-based position `pos`, shifting indices and heads.
    /// The inserted tokens' `head` fields are interpreted in the new numbering.
    pub fn insert_tokens(&mut self, pos: usize, inserted: Vec<Token>) {
        let k = inserted.len();
        for token in &mut self.tokens {
            if token.head > pos {
                token.head += k;
            }
        }
        let tail = self.tokens.split_off(pos);
        self.tokens.extend(inserted);
        self.tokens.extend(tail);
        for (i, token) in self.tokens.iter_mut().enumerate() {
            token.index = i + 1;
        }
    }

    /// Serializes the sentence as a CoNLL-U block (without the trailing blank line).
    pub fn to_conllu(&self) -> String {
        let mut out = String::new();
        for t in &self.tokens {
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}\t_\t_\t{}\t{}\t_\t_",
                t.index,
                t.form,
                if t.lemma.is_empty() { "_" } else { &t.lemma },
                if t.upos.is_empty() { "_" } else { &t.upos },
                t.head,
                if t.deprel.is_empty() { "_" } else { &t.deprel },
            );
        }
        out
    }
}

/// Pharaoh-style word alignment, 0-based (source, target) links.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Alignment {
    links: BTreeSet<(usize, usize)>,
}

impl Alignment {
    pub fn new(links: impl IntoIterator<Item = (usize, usize)>) -> Self {
        Alignment {
            links: links.into_iter().collect(),
        }
    }

    pub fn contains(&self, src: usize, trg: usize) -> bool {
        self.links.contains(&(src, trg))
    }

    pub fn len(&self) -> usize {
        self.links.len()
    }

    pub fn is_empty(&self) -> bool {
        self.links.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.links.iter().copied()
    }

    pub fn targets_of(&self, src: usize) -> impl Iterator<Item = usize> + '_ {
        self.links
            .range((src, 0)..=(src, usize::MAX))
            .map(|&(_, t)| t)
    }

    pub fn sources_of(&self, trg: usize) -> impl Iterator<Item = usize> + '_ {
        self.links
            .iter()
            .filter(move |&&(_, t)| t == trg)
            .map(|&(s, _)| s)
    }

    /// The single target linked to `src`, provided that target links back
    /// only to `src`.
    pub fn one_to_one_target(&self, src: usize) -> Option<usize> {
        let mut targets = self.targets_of(src);
        let trg = targets.next()?;
        if targets.next().is_some() {
            return None;
        }
        let mut sources = self.sources_of(trg);
        match (sources.next(), sources.next()) {
            (Some(s), None) if s == src => Some(trg),
            _ => None,
        }
    }

    pub fn is_one_to_one(&self, src: usize, trg: usize) -> bool {
        self.one_to_one_target(src) == Some(trg)
    }

    /// Shifts every source index `>= pos` by `by`.
    pub fn shift_src(&mut self, pos: usize, by: usize) {
        self.links = self
            .links
            .iter()
            .map(|&(s, t)| (if s >= pos { s + by } else { s }, t))
            .collect();
    }

    pub fn shift_trg(&mut self, pos: usize, by: usize) {
        self.links = self
            .links
            .iter()
            .map(|&(s, t)| (s, if t >= pos { t + by } else { t }))
            .collect();
    }

    pub fn insert(&mut self, src: usize, trg: usize) {
        self.links.insert((src, trg));
    }

    pub fn to_pharaoh(&self) -> String {
        self.links
            .iter()
            .map(|(s, t)| format!("{s}-{t}"))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotatedSentencePair {
    pub pair_id: usize,
    /// German side.
    pub src: AnnotatedSentence,
    /// English side.
    pub trg: AnnotatedSentence,
    pub alignment: Alignment,
}

impl AnnotatedSentencePair {
    pub fn new(
        pair_id: usize,
        src: AnnotatedSentence,
        trg: AnnotatedSentence,
        alignment: Alignment,
    ) -> Result<Self> {
        for (s, t) in alignment.iter() {
            if s >= src.len() || t >= trg.len() {
                return Err(Error::AlignmentRange {
                    pair_id,
                    src_idx: s,
                    trg_idx: t,
                    src_len: src.len(),
                    trg_len: trg.len(),
                });
            }
        }
        Ok(AnnotatedSentencePair {
            pair_id,
            src,
            trg,
            alignment,
        })
    }
}

fn parse_index(field: &str, line: usize, column: &str) -> Result<usize> {
    field
        .parse::<usize>()
        .map_err(|_| Error::parse(line, format!("non-numeric {column} field {field:?}")))
}

/// Parses CoNLL-U text. Multiword-token ranges and empty nodes are skipped.
pub fn parse_conllu(text: &str) -> Result<Vec<AnnotatedSentence>> {
    let mut sentences = Vec::new();
    let mut tokens: Vec<Token> = Vec::new();
    let mut block_start = 0;
    let mut in_block = false;

    let mut flush = |tokens: &mut Vec<Token>, start: usize| -> Result<()> {
        if tokens.is_empty() {
            return Ok(());
        }
        let sentence = AnnotatedSentence {
            tokens: std::mem::take(tokens),
        };
        sentence.validate(start)?;
        sentences.push(sentence);
        Ok(())
    };

    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() {
            flush(&mut tokens, block_start)?;
            in_block = false;
            continue;
        }
        if !in_block {
            block_start = lineno;
            in_block = true;
        }
        if line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 10 {
            return Err(Error::parse(
                lineno,
                format!("expected 10 tab-separated columns, found {}", cols.len()),
            ));
        }
        let id = cols[0];
        if id.contains('-') || id.contains('.') {
            continue;
        }
        let index = parse_index(id, lineno, "ID")?;
        let head = parse_index(cols[6], lineno, "HEAD")?;
        tokens.push(Token {
            index,
            form: cols[1].to_string(),
            lemma: cols[2].to_string(),
            upos: cols[3].to_string(),
            head,
            deprel: cols[7].to_string(),
        });
    }
    flush(&mut tokens, block_start)?;
    Ok(sentences)
}

/// Parses one line of space-separated `i-j` links.
pub fn parse_alignment_line(line: &str) -> Result<Alignment> {
    parse_alignment_line_at(line, 1)
}

fn parse_alignment_line_at(line: &str, lineno: usize) -> Result<Alignment> {
    let mut links = BTreeSet::new();
    for item in line.split_whitespace() {
        let (s, t) = item
            .split_once('-')
            .ok_or_else(|| Error::parse(lineno, format!("alignment link {item:?} lacks '-'")))?;
        let s = s
            .parse()
            .map_err(|_| Error::parse(lineno, format!("non-numeric alignment link {item:?}")))?;
        let t = t
            .parse()
            .map_err(|_| Error::parse(lineno, format!("non-numeric alignment link {item:?}")))?;
        links.insert((s, t));
    }
    Ok(Alignment { links })
}

/// Zips source sentences, target sentences and alignment lines into pairs.
/// `pair_id` is the 0-based line number.
pub fn load_parallel(src_conllu: &str, trg_conllu: &str, align: &str) -> Result<Vec<AnnotatedSentencePair>> {
    let (src, trg) = rayon::join(|| parse_conllu(src_conllu), || parse_conllu(trg_conllu));
    let (src, trg) = (src?, trg?);
    let align_lines: Vec<&str> = align.lines().collect();
    if src.len() != trg.len() || src.len() != align_lines.len() {
        return Err(Error::CountMismatch {
            src: src.len(),
            trg: trg.len(),
            align: align_lines.len(),
        });
    }
    src.into_iter()
        .zip(trg)
        .zip(align_lines)
        .enumerate()
        .map(|(pair_id, ((s, t), a))| {
            let alignment = parse_alignment_line_at(a, pair_id + 1)?;
            AnnotatedSentencePair::new(pair_id, s, t, alignment)
        })
        .collect()
}

pub fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn load_parallel_files(src: &Path, trg: &Path, align: &Path) -> Result<Vec<AnnotatedSentencePair>> {
    load_parallel(&read_to_string(src)?, &read_to_string(trg)?, &read_to_string(align)?)
}

/// Space-joined token forms.
pub fn render(sentence: &AnnotatedSentence) -> String {
    if sentence.is_empty() {
        log::warn!("event=render_empty_sentence");
        return String::new();
    }
    let mut out = String::new();
    for (i, t) in sentence.tokens.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        out.push_str(&t.form);
    }
    out
}

/// Writes pairs back out as (source CoNLL-U, target CoNLL-U, alignment) texts.
pub fn serialize_parallel(pairs: &[AnnotatedSentencePair]) -> (String, String, String) {
    let mut src = String::new();
    let mut trg = String::new();
    let mut align = String::new();
    for pair in pairs {
        src.push_str(&pair.src.to_conllu());
        src.push('\n');
        trg.push_str(&pair.trg.to_conllu());
        trg.push('\n');
        align.push_str(&pair.alignment.to_pharaoh());
        align.push('\n');
    }
    (src, trg, align)
}
