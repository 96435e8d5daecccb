//! Deterministic template-generated German–English annotated corpus, used
//! for tests, benchmarks and as a worked example of the input format.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{serialize_parallel, Alignment, AnnotatedSentence, AnnotatedSentencePair, Token};
use crate::error::{Error, Result};

#[derive(Clone, Copy)]
enum Gender {
    M,
    F,
    N,
}

#[derive(Clone, Copy)]
enum Case {
    Nom,
    Acc,
    Dat,
}

struct Noun {
    de: &'static str,
    gender: Gender,
    de_pl: &'static str,
    en: &'static str,
    en_pl: &'static str,
}

const fn n(de: &'static str, gender: Gender, de_pl: &'static str, en: &'static str, en_pl: &'static str) -> Noun {
    Noun {
        de,
        gender,
        de_pl,
        en,
        en_pl,
    }
}

use Gender::{F, M, N};

const NOUNS: &[Noun] = &[
    n("Stadt", F, "Städte", "city", "cities"),
    n("Frau", F, "Frauen", "woman", "women"),
    n("Mann", M, "Männer", "man", "men"),
    n("Haus", N, "Häuser", "house", "houses"),
    n("Kind", N, "Kinder", "child", "children"),
    n("Auto", N, "Autos", "car", "cars"),
    n("Buch", N, "Bücher", "book", "books"),
    n("Schule", F, "Schulen", "school", "schools"),
    n("Straße", F, "Straßen", "street", "streets"),
    n("Fehler", M, "Fehler", "error", "errors"),
    n("Kritik", F, "Kritiken", "criticism", "criticisms"),
    n("Regierung", F, "Regierungen", "government", "governments"),
    n("Land", N, "Länder", "country", "countries"),
    n("Welt", F, "Welten", "world", "worlds"),
    n("Familie", F, "Familien", "family", "families"),
    n("Woche", F, "Wochen", "week", "weeks"),
    n("Problem", N, "Probleme", "problem", "problems"),
    n("Frage", F, "Fragen", "question", "questions"),
    n("Antwort", F, "Antworten", "answer", "answers"),
    n("Markt", M, "Märkte", "market", "markets"),
    n("Firma", F, "Firmen", "company", "companies"),
    n("Kirche", F, "Kirchen", "church", "churches"),
    n("Garten", M, "Gärten", "garden", "gardens"),
    n("Tisch", M, "Tische", "table", "tables"),
    n("Stuhl", M, "Stühle", "chair", "chairs"),
    n("Fenster", N, "Fenster", "window", "windows"),
    n("Tür", F, "Türen", "door", "doors"),
    n("Zimmer", N, "Zimmer", "room", "rooms"),
    n("Brief", M, "Briefe", "letter", "letters"),
    n("Zug", M, "Züge", "train", "trains"),
    n("Hund", M, "Hunde", "dog", "dogs"),
    n("Katze", F, "Katzen", "cat", "cats"),
    n("Vogel", M, "Vögel", "bird", "birds"),
    n("Baum", M, "Bäume", "tree", "trees"),
    n("Wald", M, "Wälder", "forest", "forests"),
    n("Berg", M, "Berge", "mountain", "mountains"),
    n("Fluss", M, "Flüsse", "river", "rivers"),
    n("Insel", F, "Inseln", "island", "islands"),
    n("Brücke", F, "Brücken", "bridge", "bridges"),
    n("Hafen", M, "Häfen", "harbour", "harbours"),
    n("Platz", M, "Plätze", "square", "squares"),
    n("Park", M, "Parks", "park", "parks"),
    n("Museum", N, "Museen", "museum", "museums"),
    n("Hotel", N, "Hotels", "hotel", "hotels"),
    n("Kino", N, "Kinos", "cinema", "cinemas"),
    n("Bahnhof", M, "Bahnhöfe", "station", "stations"),
    n("Flughafen", M, "Flughäfen", "airport", "airports"),
    n("Krankenhaus", N, "Krankenhäuser", "hospital", "hospitals"),
    n("Partei", F, "Parteien", "party", "parties"),
    n("Wahl", F, "Wahlen", "election", "elections"),
    n("Gesetz", N, "Gesetze", "law", "laws"),
    n("Vertrag", M, "Verträge", "contract", "contracts"),
    n("Plan", M, "Pläne", "plan", "plans"),
    n("Idee", F, "Ideen", "idea", "ideas"),
    n("Grund", M, "Gründe", "reason", "reasons"),
    n("Ziel", N, "Ziele", "goal", "goals"),
    n("Ende", N, "Enden", "end", "ends"),
    n("Anfang", M, "Anfänge", "beginning", "beginnings"),
    n("Ort", M, "Orte", "place", "places"),
    n("Nachricht", F, "Nachrichten", "message", "messages"),
    n("Raum", M, "Räume", "space", "spaces"),
    n("Lehrer", M, "Lehrer", "teacher", "teachers"),
    n("Arzt", M, "Ärzte", "doctor", "doctors"),
    n("Bauer", M, "Bauern", "farmer", "farmers"),
    n("Insekt", N, "Insekten", "insect", "insects"),
];

/// Nouns reserved for held-out splits, so that zero-shot items exist.
const HELD_OUT_NOUNS: &[Noun] = &[
    n("Leuchtturm", M, "Leuchttürme", "lighthouse", "lighthouses"),
    n("Schmetterling", M, "Schmetterlinge", "butterfly", "butterflies"),
    n("Dudelsack", M, "Dudelsäcke", "bagpipe", "bagpipes"),
    n("Zitrone", F, "Zitronen", "lemon", "lemons"),
    n("Kompass", M, "Kompasse", "compass", "compasses"),
    n("Laterne", F, "Laternen", "lantern", "lanterns"),
    n("Pinguin", M, "Pinguine", "penguin", "penguins"),
    n("Trompete", F, "Trompeten", "trumpet", "trumpets"),
    n("Teppich", M, "Teppiche", "carpet", "carpets"),
    n("Kamin", M, "Kamine", "fireplace", "fireplaces"),
    n("Ameise", F, "Ameisen", "ant", "ants"),
    n("Kutsche", F, "Kutschen", "carriage", "carriages"),
];

const ADJECTIVES: &[(&str, &str)] = &[
    ("gefährlich", "dangerous"),
    ("groß", "big"),
    ("klein", "small"),
    ("schön", "beautiful"),
    ("alt", "old"),
    ("neu", "new"),
    ("gut", "good"),
    ("schlecht", "bad"),
    ("wichtig", "important"),
    ("einfach", "simple"),
    ("schwierig", "difficult"),
    ("teuer", "expensive"),
    ("billig", "cheap"),
    ("breit", "broad"),
    ("schnell", "fast"),
    ("langsam", "slow"),
    ("stark", "strong"),
    ("schwach", "weak"),
    ("laut", "loud"),
    ("leise", "quiet"),
    ("warm", "warm"),
    ("kalt", "cold"),
    ("dunkel", "dark"),
    ("interessant", "interesting"),
    ("offen", "open"),
];

const HELD_OUT_ADJECTIVES: &[(&str, &str)] = &[
    ("seltsam", "strange"),
    ("mutig", "brave"),
    ("fröhlich", "cheerful"),
    ("zornig", "angry"),
];

/// (German, English, governed case). The first eleven are pattern triggers.
const PREPOSITIONS: &[(&str, &str, Case)] = &[
    ("für", "for", Case::Acc),
    ("aus", "from", Case::Dat),
    ("zwischen", "between", Case::Dat),
    ("durch", "through", Case::Acc),
    ("in", "in", Case::Dat),
    ("auf", "on", Case::Dat),
    ("gegen", "against", Case::Acc),
    ("bei", "at", Case::Dat),
    ("mit", "with", Case::Dat),
    ("nach", "after", Case::Dat),
    ("vor", "before", Case::Dat),
    ("ohne", "without", Case::Acc),
    ("zu", "to", Case::Dat),
    ("über", "about", Case::Dat),
    ("neben", "beside", Case::Dat),
];

const SUBJECTS: &[(&str, &str, &str, &str, &str)] = &[
    // (de pronoun, de verb, de verb lemma, en pronoun, en verb)
    ("Er", "sieht", "sehen", "He", "sees"),
    ("Sie", "kauft", "kaufen", "She", "buys"),
    ("Wir", "finden", "finden", "We", "find"),
    ("Ich", "brauche", "brauchen", "I", "need"),
    ("Ihr", "sucht", "suchen", "You", "seek"),
    ("Sie", "lieben", "lieben", "They", "love"),
];

const NUMBERS: &[(&str, &str)] = &[("zwei", "two"), ("drei", "three"), ("vier", "four"), ("zehn", "ten")];

/// (German tokens, English tokens); the third entry is the repeated modifier.
const MODIFIERS: &[(&[&str], &[&str])] = &[
    (&["sehr"], &["very"]),
    (&["nicht"], &["not"]),
    (&["sehr", ",", "sehr"], &["very", ",", "very"]),
    (&["ziemlich"], &["quite"]),
    (&[], &[]),
];
const MODIFIER_WEIGHTS: &[u32] = &[30, 30, 8, 17, 15];

fn article(g: Gender, case: Case, plural: bool) -> &'static str {
    if plural {
        return match case {
            Case::Dat => "den",
            _ => "die",
        };
    }
    match (g, case) {
        (Gender::M, Case::Nom) => "der",
        (Gender::M, Case::Acc) => "den",
        (Gender::M, Case::Dat) | (Gender::N, Case::Dat) => "dem",
        (Gender::F, Case::Dat) => "der",
        (Gender::F, _) => "die",
        (Gender::N, _) => "das",
    }
}

fn capitalize(w: &str) -> String {
    let mut cs = w.chars();
    cs.next()
        .map(|c| c.to_uppercase().chain(cs).collect())
        .unwrap_or_default()
}

fn cop(plural: bool) -> (&'static str, &'static str) {
    if plural {
        ("sind", "are")
    } else {
        ("ist", "is")
    }
}

/// Parallel rows: one token per side per row, aligned 1-to-1.
#[derive(Default)]
struct Rows {
    src: Vec<Token>,
    trg: Vec<Token>,
}

impl Rows {
    fn push(&mut self, de: (&str, &str), en: (&str, &str), upos: &str, head: usize, rel: &str) {
        let i = self.src.len() + 1;
        self.src.push(Token::new(i, de.0, de.1, upos, head, rel));
        self.trg.push(Token::new(i, en.0, en.1, upos, head, rel));
    }

    fn finish(self, pair_id: usize) -> AnnotatedSentencePair {
        let n = self.src.len();
        let src = AnnotatedSentence::new(self.src).expect("templates build valid trees");
        let trg = AnnotatedSentence::new(self.trg).expect("templates build valid trees");
        AnnotatedSentencePair::new(pair_id, src, trg, Alignment::new((0..n).map(|i| (i, i))))
            .expect("monotone alignment is in range")
    }
}

/// Which split a corpus is generated for. Held-out splits mix in nouns and
/// adjectives that training splits never use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Split {
    Train,
    HeldOut,
}

struct Generator {
    rng: ChaCha8Rng,
    split: Split,
    noun_dist: WeightedIndex<f64>,
}

impl Generator {
    fn new(seed: u64, split: Split) -> Self {
        // Zipf-like noun frequencies give a spread of base frequencies.
        let weights: Vec<f64> = (0..NOUNS.len()).map(|r| 1.0 / (r as f64 + 1.0)).collect();
        Generator {
            rng: ChaCha8Rng::seed_from_u64(seed),
            split,
            noun_dist: WeightedIndex::new(weights).expect("positive weights"),
        }
    }

    fn noun(&mut self) -> &'static Noun {
        if self.split == Split::HeldOut && self.rng.gen_bool(0.3) {
            return HELD_OUT_NOUNS.choose(&mut self.rng).expect("non-empty");
        }
        &NOUNS[self.noun_dist.sample(&mut self.rng)]
    }

    fn adjective(&mut self) -> (&'static str, &'static str) {
        if self.split == Split::HeldOut && self.rng.gen_bool(0.3) {
            return *HELD_OUT_ADJECTIVES.choose(&mut self.rng).expect("non-empty");
        }
        *ADJECTIVES.choose(&mut self.rng).expect("non-empty")
    }

    /// "Er sieht den Tisch für die Stadt ." / "He sees the table for the city ."
    fn prep_sentence(&mut self, pair_id: usize) -> AnnotatedSentencePair {
        let (sde, vde, vlemma, sen, ven) = *SUBJECTS.choose(&mut self.rng).expect("non-empty");
        let obj = self.noun();
        let (pde, pen, case) = *PREPOSITIONS.choose(&mut self.rng).expect("non-empty");
        let pobj = self.noun();
        let mut r = Rows::default();
        r.push((sde, sde), (sen, sen), "PRON", 2, "nsubj");
        r.push((vde, vlemma), (ven, ven), "VERB", 0, "root");
        let a1 = article(obj.gender, Case::Acc, false);
        r.push((a1, "der"), ("the", "the"), "DET", 4, "det");
        r.push((obj.de, obj.de), (obj.en, obj.en), "NOUN", 2, "obj");
        r.push((pde, pde), (pen, pen), "ADP", 7, "case");
        let a2 = article(pobj.gender, case, false);
        r.push((a2, "der"), ("the", "the"), "DET", 7, "det");
        r.push((pobj.de, pobj.de), (pobj.en, pobj.en), "NOUN", 4, "nmod");
        r.push((".", "."), (".", "."), "PUNCT", 2, "punct");
        r.finish(pair_id)
    }

    /// "Wir finden zwei Fehler ." / "We find two errors ."
    fn cardinal_sentence(&mut self, pair_id: usize) -> AnnotatedSentencePair {
        let (sde, vde, vlemma, sen, ven) = *SUBJECTS.choose(&mut self.rng).expect("non-empty");
        let noun = self.noun();
        let (nde, nen) = if self.rng.gen_bool(0.6) {
            NUMBERS[0]
        } else {
            *NUMBERS.choose(&mut self.rng).expect("non-empty")
        };
        let mut r = Rows::default();
        r.push((sde, sde), (sen, sen), "PRON", 2, "nsubj");
        r.push((vde, vlemma), (ven, ven), "VERB", 0, "root");
        r.push((nde, nde), (nen, nen), "NUM", 4, "nummod");
        r.push((noun.de_pl, noun.de), (noun.en_pl, noun.en), "NOUN", 2, "obj");
        r.push((".", "."), ("!", "!"), "PUNCT", 2, "punct");
        r.finish(pair_id)
    }

    /// "Das Haus ist sehr gefährlich ." / "The house is very dangerous ."
    fn modifier_sentence(&mut self, pair_id: usize, modifier: Option<usize>) -> AnnotatedSentencePair {
        let noun = self.noun();
        let plural = self.rng.gen_bool(0.3);
        let (adj_de, adj_en) = self.adjective();
        let k = modifier.unwrap_or_else(|| {
            WeightedIndex::new(MODIFIER_WEIGHTS)
                .expect("positive weights")
                .sample(&mut self.rng)
        });
        let (mods_de, mods_en) = MODIFIERS[k];
        let adj_pos = 4 + mods_de.len();
        let mut r = Rows::default();
        let art = capitalize(article(noun.gender, Case::Nom, plural));
        r.push((&art, "der"), ("The", "the"), "DET", 2, "det");
        let (nde, nen) = if plural { (noun.de_pl, noun.en_pl) } else { (noun.de, noun.en) };
        r.push((nde, noun.de), (nen, noun.en), "NOUN", adj_pos, "nsubj");
        let (cde, cen) = cop(plural);
        r.push((cde, "sein"), (cen, "be"), "AUX", adj_pos, "cop");
        for (md, me) in mods_de.iter().zip(mods_en.iter()) {
            if *md == "," {
                r.push((",", ","), (",", ","), "PUNCT", adj_pos, "punct");
            } else {
                let upos = if *md == "nicht" { "PART" } else { "ADV" };
                r.push((md, md), (me, me), upos, adj_pos, "advmod");
            }
        }
        r.push((adj_de, adj_de), (adj_en, adj_en), "ADJ", 0, "root");
        r.push((".", "."), (".", "."), "PUNCT", adj_pos, "punct");
        r.finish(pair_id)
    }

    /// "Die Räume sind vorhanden ." style sentence with no trigger word.
    fn plain_sentence(&mut self, pair_id: usize) -> AnnotatedSentencePair {
        let (sde, vde, vlemma, sen, ven) = *SUBJECTS.choose(&mut self.rng).expect("non-empty");
        let obj = self.noun();
        let mut r = Rows::default();
        r.push((sde, sde), (sen, sen), "PRON", 2, "nsubj");
        r.push((vde, vlemma), (ven, ven), "VERB", 0, "root");
        let a = article(obj.gender, Case::Acc, false);
        r.push((a, "der"), ("the", "the"), "DET", 4, "det");
        r.push((obj.de, obj.de), (obj.en, obj.en), "NOUN", 2, "obj");
        r.push((".", "."), (".", "."), "PUNCT", 2, "punct");
        r.finish(pair_id)
    }

    fn sentence(&mut self, pair_id: usize) -> AnnotatedSentencePair {
        match self.rng.gen_range(0..100) {
            0..=44 => self.prep_sentence(pair_id),
            45..=54 => self.cardinal_sentence(pair_id),
            55..=69 => self.modifier_sentence(pair_id, None),
            _ => self.plain_sentence(pair_id),
        }
    }
}

/// `n` template sentence pairs with ids `0..n`.
pub fn generate(n: usize, seed: u64, split: Split) -> Vec<AnnotatedSentencePair> {
    let mut g = Generator::new(seed, split);
    (0..n).map(|i| g.sentence(i)).collect()
}

pub const TOY_TRAIN_PAIRS: usize = 5000;
pub const TOY_TEST_PAIRS: usize = 1000;
pub const TOY_TRAIN_SEED: u64 = 20210801;
pub const TOY_TEST_SEED: u64 = 20210802;

/// The shipped toy corpus: (train, test).
pub fn toy_corpus() -> (Vec<AnnotatedSentencePair>, Vec<AnnotatedSentencePair>) {
    (
        generate(TOY_TRAIN_PAIRS, TOY_TRAIN_SEED, Split::Train),
        generate(TOY_TEST_PAIRS, TOY_TEST_SEED, Split::HeldOut),
    )
}

/// Writes `<stem>.de.conllu`, `<stem>.en.conllu` and `<stem>.align`.
pub fn write_split(dir: &Path, stem: &str, pairs: &[AnnotatedSentencePair]) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let (src, trg, align) = serialize_parallel(pairs);
    for (ext, text) in [("de.conllu", src), ("en.conllu", trg), ("align", align)] {
        let path = dir.join(format!("{stem}.{ext}"));
        fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    }
    Ok(())
}

/// Every token form of the templates' lexicon, lowercased.
pub fn lexicon() -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    for nn in NOUNS.iter().chain(HELD_OUT_NOUNS) {
        for w in [nn.de, nn.de_pl, nn.en, nn.en_pl] {
            out.insert(w.to_lowercase());
        }
    }
    for (a, b) in ADJECTIVES.iter().chain(HELD_OUT_ADJECTIVES) {
        out.insert(a.to_string());
        out.insert(b.to_string());
    }
    for (a, b, _) in PREPOSITIONS {
        out.insert(a.to_string());
        out.insert(b.to_string());
    }
    out
}

/// `n` distinct pseudo-word types (lengths 3–12, German-ish letters), for
/// stress-testing morpheme absence checks.
pub fn pseudo_word_types(n: usize, seed: u64) -> Vec<String> {
    const LETTERS: &[char] = &[
        'a', 'b', 'c', 'd', 'e', 'f', 'g', 'h', 'i', 'j', 'k', 'l', 'm', 'n', 'o', 'p', 'q', 'r', 's', 't', 'u', 'v',
        'w', 'x', 'y', 'z', 'ä', 'ö', 'ü', 'ß',
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = BTreeSet::new();
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let len = rng.gen_range(3..=12);
        let w: String = (0..len).map(|_| *LETTERS.choose(&mut rng).expect("non-empty")).collect();
        if seen.insert(w.clone()) {
            out.push(w);
        }
    }
    out
}
