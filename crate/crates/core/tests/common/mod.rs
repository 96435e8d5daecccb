#![allow(dead_code)]

use std::path::PathBuf;

use synmorph::builder::{build_dataset, BuildConfig, Dataset};
use synmorph::corpus::{load_parallel, load_parallel_files, AnnotatedSentencePair};
use synmorph::morphemes::{build_inventory, AbsenceIndex, MorphemeConfig, MorphemeInventory, PatternMorphemes};
use synmorph::pattern::{default_patterns, PatternPair};

pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/toy")
}

pub fn toy_split(stem: &str) -> Vec<AnnotatedSentencePair> {
    let d = data_dir();
    load_parallel_files(
        &d.join(format!("{stem}.de.conllu")),
        &d.join(format!("{stem}.en.conllu")),
        &d.join(format!("{stem}.align")),
    )
    .expect("shipped toy corpus loads")
}

/// One CoNLL-U sentence from (form, lemma, upos, head, deprel) rows.
pub fn conllu(rows: &[(&str, &str, &str, usize, &str)]) -> String {
    let mut out = String::new();
    for (i, (form, lemma, upos, head, deprel)) in rows.iter().enumerate() {
        out.push_str(&format!("{}\t{form}\t{lemma}\t{upos}\t_\t_\t{head}\t{deprel}\t_\t_\n", i + 1));
    }
    out.push('\n');
    out
}

/// A single sentence pair with a monotone alignment given as pharaoh text.
pub fn pair(src: &[(&str, &str, &str, usize, &str)], trg: &[(&str, &str, &str, usize, &str)], align: &str) -> AnnotatedSentencePair {
    load_parallel(&conllu(src), &conllu(trg), &format!("{align}\n"))
        .expect("fixture parses")
        .remove(0)
}

pub struct Table2Case {
    pub pattern_id: &'static str,
    pub pair: AnnotatedSentencePair,
    pub surface: (&'static str, &'static str),
    pub abstract_: (&'static str, &'static str),
}

/// The example sentences of the paper's overview table, annotated by hand.
pub fn table2_cases() -> Vec<Table2Case> {
    vec![
        Table2Case {
            pattern_id: "compound_1",
            pair: pair(
                &[
                    ("Die", "der", "DET", 2, "det"),
                    ("Räume", "Raum", "NOUN", 4, "nsubj"),
                    ("seien", "sein", "AUX", 4, "cop"),
                    ("vorhanden", "vorhanden", "ADJ", 0, "root"),
                    (".", ".", "PUNCT", 4, "punct"),
                ],
                &[
                    ("The", "the", "DET", 2, "det"),
                    ("premises", "premises", "NOUN", 4, "nsubj"),
                    ("are", "be", "AUX", 4, "cop"),
                    ("available", "available", "ADJ", 0, "root"),
                    (".", ".", "PUNCT", 4, "punct"),
                ],
                "0-0 1-1 2-2 3-3 4-4",
            ),
            surface: ("Die Sonaräume seien vorhanden .", "The bico premises are available ."),
            abstract_: ("Die Räume @COMPOUND_1@ seien vorhanden .", "The wuze premises are available ."),
        },
        Table2Case {
            pattern_id: "circumfix_1",
            pair: pair(
                &[
                    ("Das", "der", "PRON", 4, "nsubj"),
                    ("sind", "sein", "AUX", 4, "cop"),
                    ("gute", "gut", "ADJ", 4, "amod"),
                    ("Nachrichten", "Nachricht", "NOUN", 0, "root"),
                    ("für", "für", "ADP", 7, "case"),
                    ("die", "der", "DET", 7, "det"),
                    ("Stadt", "Stadt", "NOUN", 4, "nmod"),
                    (".", ".", "PUNCT", 4, "punct"),
                ],
                &[
                    ("That", "that", "PRON", 4, "nsubj"),
                    ("is", "be", "AUX", 4, "cop"),
                    ("good", "good", "ADJ", 4, "amod"),
                    ("news", "news", "NOUN", 0, "root"),
                    ("for", "for", "ADP", 7, "case"),
                    ("the", "the", "DET", 7, "det"),
                    ("city", "city", "NOUN", 4, "nmod"),
                    (".", ".", "PUNCT", 4, "punct"),
                ],
                "0-0 1-1 2-2 3-3 4-4 5-5 6-6 7-7",
            ),
            surface: ("Das sind gute Nachrichten wofi die Stadt .", "That is good news the jebcityfet ."),
            abstract_: ("Das sind gute Nachrichten fuge die Stadt .", "That is good news the city @CIRCUMFIX_1@ ."),
        },
        Table2Case {
            pattern_id: "infix_4",
            pair: pair(
                &[
                    ("Er", "er", "PRON", 2, "nsubj"),
                    ("schimpfte", "schimpfen", "VERB", 0, "root"),
                    ("bei", "bei", "ADP", 5, "case"),
                    ("der", "der", "DET", 5, "det"),
                    ("Kritik", "Kritik", "NOUN", 2, "obl"),
                    (",", ",", "PUNCT", 7, "punct"),
                    ("sicher", "sicher", "ADV", 2, "advmod"),
                    (".", ".", "PUNCT", 2, "punct"),
                ],
                &[
                    ("He", "he", "PRON", 2, "nsubj"),
                    ("chafed", "chafe", "VERB", 0, "root"),
                    ("at", "at", "ADP", 5, "case"),
                    ("the", "the", "DET", 5, "det"),
                    ("criticism", "criticism", "NOUN", 2, "obl"),
                    (",", ",", "PUNCT", 7, "punct"),
                    ("sure", "sure", "ADV", 2, "advmod"),
                    (".", ".", "PUNCT", 2, "punct"),
                ],
                "0-0 1-1 2-2 3-3 4-4 5-5 6-6 7-7",
            ),
            surface: ("Er schimpfte der Kryadeyitik , sicher .", "He chafed numime the criticism , sure ."),
            abstract_: ("Er schimpfte der Kritik @INFIX_4@ , sicher .", "He chafed jigaq the criticism , sure ."),
        },
        Table2Case {
            pattern_id: "vowel_harmony_2",
            pair: pair(
                &[
                    ("Das", "der", "PRON", 2, "nsubj"),
                    ("waren", "sein", "VERB", 0, "root"),
                    ("gleich", "gleich", "ADV", 5, "advmod"),
                    ("zwei", "zwei", "NUM", 5, "nummod"),
                    ("Fehler", "Fehler", "NOUN", 2, "obj"),
                    ("!", "!", "PUNCT", 2, "punct"),
                ],
                &[
                    ("Those", "that", "PRON", 2, "nsubj"),
                    ("were", "be", "VERB", 0, "root"),
                    ("two", "two", "NUM", 4, "nummod"),
                    ("errors", "error", "NOUN", 2, "obj"),
                    ("!", "!", "PUNCT", 2, "punct"),
                ],
                "0-0 1-1 3-2 4-3 5-4",
            ),
            surface: ("Das waren gleich zoged Fehler !", "Those were errors bepor !"),
            abstract_: ("Das waren gleich gapu Fehler !", "Those were errors @VOWEL_HARMONY_2@ !"),
        },
        Table2Case {
            pattern_id: "redup_full",
            pair: pair(
                &[
                    ("Das", "der", "PRON", 4, "nsubj"),
                    ("ist", "sein", "AUX", 4, "cop"),
                    ("nicht", "nicht", "PART", 4, "advmod"),
                    ("gefährlich", "gefährlich", "ADJ", 0, "root"),
                    (".", ".", "PUNCT", 4, "punct"),
                ],
                &[
                    ("This", "this", "PRON", 4, "nsubj"),
                    ("is", "be", "AUX", 4, "cop"),
                    ("not", "not", "PART", 4, "advmod"),
                    ("dangerous", "dangerous", "ADJ", 0, "root"),
                    (".", ".", "PUNCT", 4, "punct"),
                ],
                "0-0 1-1 2-2 3-3 4-4",
            ),
            surface: ("Das ist gija gefährlich .", "This is dangerousdangerous ."),
            abstract_: ("Das ist jufo gefährlich .", "This is dangerous @FULL_REDUPLICATION@ ."),
        },
    ]
}

fn morphemes(bound: &[&str], triple: Option<[char; 3]>, isolated: &str, abstract_isolated: &str, p: &PatternPair) -> PatternMorphemes {
    PatternMorphemes {
        bound: bound.iter().map(|s| s.to_string()).collect(),
        triple,
        isolated: isolated.to_string(),
        abstract_token: p.abstract_token(),
        abstract_isolated: abstract_isolated.to_string(),
    }
}

/// The paper's morpheme assignments for the overview-table patterns.
pub fn table2_inventory(patterns: &[PatternPair]) -> MorphemeInventory {
    let p = |id: &str| patterns.iter().find(|p| p.id == id).expect("pattern exists");
    let mut inv = MorphemeInventory::new(0);
    inv.insert("compound_1", morphemes(&["Sona"], None, "bico", "wuze", p("compound_1")));
    inv.insert("circumfix_1", morphemes(&["jeb", "fet"], None, "wofi", "fuge", p("circumfix_1")));
    inv.insert("infix_4", morphemes(&["yadey"], None, "numime", "jigaq", p("infix_4")));
    inv.insert(
        "vowel_harmony_2",
        morphemes(&[], Some(['b', 'p', 'r']), "zoged", "gapu", p("vowel_harmony_2")),
    );
    inv.insert("redup_full", morphemes(&[], None, "gija", "jufo", p("redup_full")));
    inv
}

pub struct ToyBuild {
    pub patterns: Vec<PatternPair>,
    pub inventory: MorphemeInventory,
    pub train: Vec<AnnotatedSentencePair>,
    pub test: Vec<AnnotatedSentencePair>,
    pub dataset: Dataset,
}

pub fn toy_inventory(
    patterns: &[PatternPair],
    train: &[AnnotatedSentencePair],
    test: &[AnnotatedSentencePair],
    seed: u64,
) -> MorphemeInventory {
    let tokens: Vec<String> = train
        .iter()
        .chain(test)
        .flat_map(|p| p.src.forms().into_iter().chain(p.trg.forms()))
        .collect();
    let cfg = MorphemeConfig::default();
    let vocab = synmorph::toy::lexicon();
    let index = AbsenceIndex::for_config(tokens.iter().map(String::as_str), vocab.iter().map(String::as_str), &cfg);
    build_inventory(patterns, &index, &cfg, seed).expect("inventory")
}

/// The shipped toy corpus built with the default patterns.
pub fn toy_build(seed: u64) -> ToyBuild {
    let patterns = default_patterns();
    let train = toy_split("train");
    let test = toy_split("test");
    let inventory = toy_inventory(&patterns, &train, &test, seed);
    let dataset = build_dataset(&train, &test, &patterns, &inventory, &BuildConfig::new(seed)).expect("build");
    ToyBuild {
        patterns,
        inventory,
        train,
        test,
        dataset,
    }
}
