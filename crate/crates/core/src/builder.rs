//! Corpus-wide generation: training corpora with both variants appended,
//! test sets with a metadata sidecar, and the manifest.

use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use indexmap::IndexMap;
use rand::seq::index::sample;
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::alphabet::VowelSet;
use crate::corpus::{render, AnnotatedSentencePair};
use crate::error::{Error, Result};
use crate::matcher::{pair_rng, scan_corpus, CompoundAllocation, MatchSite};
use crate::morphemes::{format_triple, parse_triple, write_inventory, MorphemeInventory};
use crate::pattern::{write_patterns, PatternPair, Variant};
use crate::transforms::{transform_site, CheckKind, ModifiedPairRecord};

const CAP_STREAM: u64 = 3;

#[derive(Debug, Clone)]
pub struct BuildConfig {
    pub seed: u64,
    pub abstract_variant: bool,
    /// Per-pattern training caps; override the pattern file's values.
    pub caps: IndexMap<String, usize>,
    /// Worker threads; `None` uses the global pool.
    pub threads: Option<usize>,
    pub vowels: VowelSet,
}

impl BuildConfig {
    pub fn new(seed: u64) -> Self {
        BuildConfig {
            seed,
            abstract_variant: true,
            caps: IndexMap::new(),
            threads: None,
            vowels: VowelSet::default(),
        }
    }

    /// Patterns with cap overrides applied.
    pub fn effective_patterns(&self, patterns: &[PatternPair]) -> Result<Vec<PatternPair>> {
        for id in self.caps.keys() {
            if !patterns.iter().any(|p| &p.id == id) {
                return Err(Error::Config(format!("cap given for unknown pattern {id:?}")));
            }
        }
        Ok(patterns
            .iter()
            .map(|p| {
                let mut p = p.clone();
                if let Some(&cap) = self.caps.get(&p.id) {
                    p.max_train_insertions = Some(cap);
                }
                p
            })
            .collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Bucket {
    ZeroShot,
    OneToFive,
    SixToFifteen,
    SixteenToFifty,
    FiftyOneToHundred,
    HundredOneToFiveHundred,
    FiveHundredOneToThousand,
    OverThousand,
}

impl Bucket {
    pub const ALL: [Bucket; 8] = [
        Bucket::ZeroShot,
        Bucket::OneToFive,
        Bucket::SixToFifteen,
        Bucket::SixteenToFifty,
        Bucket::FiftyOneToHundred,
        Bucket::HundredOneToFiveHundred,
        Bucket::FiveHundredOneToThousand,
        Bucket::OverThousand,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Bucket::ZeroShot => "zero-shot",
            Bucket::OneToFive => "1-5",
            Bucket::SixToFifteen => "6-15",
            Bucket::SixteenToFifty => "16-50",
            Bucket::FiftyOneToHundred => "51-100",
            Bucket::HundredOneToFiveHundred => "101-500",
            Bucket::FiveHundredOneToThousand => "501-1000",
            Bucket::OverThousand => ">1000",
        }
    }
}

impl fmt::Display for Bucket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Bucket {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Bucket::ALL
            .into_iter()
            .find(|b| b.label() == s)
            .ok_or_else(|| Error::Config(format!("unknown bucket {s:?}")))
    }
}

pub fn bucket_of(freq: usize) -> Bucket {
    match freq {
        0 => Bucket::ZeroShot,
        1..=5 => Bucket::OneToFive,
        6..=15 => Bucket::SixToFifteen,
        16..=50 => Bucket::SixteenToFifty,
        51..=100 => Bucket::FiftyOneToHundred,
        101..=500 => Bucket::HundredOneToFiveHundred,
        501..=1000 => Bucket::FiveHundredOneToThousand,
        _ => Bucket::OverThousand,
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PatternCounts {
    pub train: usize,
    pub test: usize,
    pub skipped: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Manifest {
    pub seed: u64,
    pub config_digest: String,
    /// Keyed by (pattern_id, variant), in pattern order.
    pub counts: IndexMap<(String, Variant), PatternCounts>,
    /// Training insertions per (pattern_id, lowercased source base lemma).
    pub base_freq: IndexMap<(String, String), usize>,
}

impl Manifest {
    pub fn train_count(&self, pattern_id: &str, variant: Variant) -> usize {
        self.counts
            .get(&(pattern_id.to_string(), variant))
            .map_or(0, |c| c.train)
    }

    pub fn base_frequency(&self, pattern_id: &str, base_lemma: &str) -> usize {
        self.base_freq
            .get(&(pattern_id.to_string(), base_lemma.to_lowercase()))
            .copied()
            .unwrap_or(0)
    }

    pub fn to_tsv(&self) -> String {
        let mut out = format!("# seed={}\n# config_digest={}\n", self.seed, self.config_digest);
        out.push_str("pattern_id\tvariant\ttrain_count\ttest_count\tskipped_count\n");
        for ((id, variant), c) in &self.counts {
            out.push_str(&format!("{id}\t{variant}\t{}\t{}\t{}\n", c.train, c.test, c.skipped));
        }
        out.push('\n');
        out.push_str("pattern_id\tbase_lemma\tfreq\n");
        for ((id, lemma), f) in &self.base_freq {
            out.push_str(&format!("{id}\t{lemma}\t{f}\n"));
        }
        out
    }

    pub fn parse(text: &str) -> Result<Manifest> {
        let mut manifest = Manifest::default();
        let mut table = 0;
        for (i, line) in text.lines().enumerate() {
            let lineno = i + 1;
            if let Some(v) = line.strip_prefix("# seed=") {
                manifest.seed = v.trim().parse().map_err(|_| Error::parse(lineno, "bad seed"))?;
                continue;
            }
            if let Some(v) = line.strip_prefix("# config_digest=") {
                manifest.config_digest = v.trim().to_string();
                continue;
            }
            if line.starts_with("pattern_id\tvariant") {
                table = 1;
                continue;
            }
            if line.starts_with("pattern_id\tbase_lemma") {
                table = 2;
                continue;
            }
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            let num = |s: &str| -> Result<usize> {
                s.parse()
                    .map_err(|_| Error::parse(lineno, format!("expected a count, found {s:?}")))
            };
            match (table, cols.as_slice()) {
                (1, [id, variant, train, test, skipped]) => {
                    let counts = PatternCounts {
                        train: num(train)?,
                        test: num(test)?,
                        skipped: num(skipped)?,
                    };
                    manifest.counts.insert((id.to_string(), variant.parse()?), counts);
                }
                (2, [id, lemma, freq]) => {
                    manifest.base_freq.insert((id.to_string(), lemma.to_string()), num(freq)?);
                }
                _ => return Err(Error::parse(lineno, "unexpected manifest row")),
            }
        }
        Ok(manifest)
    }
}

/// One line of a test-set metadata sidecar.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MetaRow {
    /// 1-based line in the matching .src/.trg files.
    pub line_no: usize,
    pub pattern_id: String,
    pub variant: Variant,
    pub check_kind: CheckKind,
    pub morpheme_parts: Vec<String>,
    pub triple: Option<[char; 3]>,
    pub base_src: String,
    pub base_trg: String,
    pub base_train_freq: usize,
}

pub const META_HEADER: &str =
    "line_no\tpattern_id\tvariant\tcheck_kind\tmorpheme_parts\ttriple\tbase_src\tbase_trg\tbase_train_freq";

impl MetaRow {
    pub fn from_record(line_no: usize, record: &ModifiedPairRecord, base_train_freq: usize) -> Self {
        MetaRow {
            line_no,
            pattern_id: record.pattern_id.clone(),
            variant: record.variant,
            check_kind: record.expected.check_kind,
            morpheme_parts: record.expected.morpheme_parts.clone(),
            triple: record.expected.triple,
            base_src: record.base_src.clone(),
            base_trg: record.base_trg.clone(),
            base_train_freq,
        }
    }

    pub fn to_tsv_line(&self) -> String {
        format!(
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            self.line_no,
            self.pattern_id,
            self.variant,
            self.check_kind,
            self.morpheme_parts.join(","),
            self.triple.map(format_triple).unwrap_or_else(|| "-".into()),
            self.base_src,
            self.base_trg,
            self.base_train_freq
        )
    }

    pub fn bucket(&self) -> Bucket {
        bucket_of(self.base_train_freq)
    }
}

pub fn write_meta(rows: &[MetaRow]) -> String {
    let mut out = String::from(META_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.to_tsv_line());
        out.push('\n');
    }
    out
}

/// Parses a metadata sidecar. Extra trailing columns (e.g. `bucket`) are ignored.
pub fn parse_meta(text: &str) -> Result<Vec<MetaRow>> {
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        if line.trim().is_empty() || line.starts_with("line_no\t") {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() < 9 {
            return Err(Error::parse(lineno, format!("metadata rows need 9 columns, found {}", cols.len())));
        }
        let num = |s: &str| -> Result<usize> {
            s.parse()
                .map_err(|_| Error::parse(lineno, format!("expected a number, found {s:?}")))
        };
        let triple = match cols[5] {
            "-" | "" => None,
            t => Some(parse_triple(t).ok_or_else(|| Error::parse(lineno, format!("bad triple {t:?}")))?),
        };
        rows.push(MetaRow {
            line_no: num(cols[0])?,
            pattern_id: cols[1].to_string(),
            variant: cols[2].parse()?,
            check_kind: cols[3].parse()?,
            morpheme_parts: cols[4].split(',').filter(|s| !s.is_empty()).map(String::from).collect(),
            triple,
            base_src: cols[6].to_string(),
            base_trg: cols[7].to_string(),
            base_train_freq: num(cols[8])?,
        });
    }
    Ok(rows)
}

/// Modified test records for one variant, line-parallel with their metadata.
#[derive(Debug, Clone, Default)]
pub struct TestSet {
    pub records: Vec<ModifiedPairRecord>,
    pub meta: Vec<MetaRow>,
}

impl TestSet {
    pub fn src_lines(&self) -> Vec<String> {
        self.records.iter().map(|r| r.src_text()).collect()
    }

    pub fn trg_lines(&self) -> Vec<String> {
        self.records.iter().map(|r| r.trg_text()).collect()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct Dataset {
    pub train_src: Vec<String>,
    pub train_trg: Vec<String>,
    /// Number of leading training lines that are unmodified originals.
    pub original_count: usize,
    pub test_surface: TestSet,
    pub test_abstract: TestSet,
    pub manifest: Manifest,
}

fn config_digest(config: &BuildConfig, patterns: &[PatternPair], inventory: &MorphemeInventory) -> String {
    let mut h = Sha256::new();
    h.update(format!("seed={}\nabstract={}\n", config.seed, config.abstract_variant));
    h.update(write_patterns(patterns));
    h.update(write_inventory(inventory, patterns));
    hex::encode(h.finalize())
}

/// Per matched site: its pattern id and the surface record with its optional
/// abstract twin, or `None` when the string rule does not apply.
pub type SiteOutcome = (String, Option<(ModifiedPairRecord, Option<ModifiedPairRecord>)>);

/// Matches and transforms a held-out split: no caps, and compound patterns
/// share the unclaimed pairs round-robin. Outcomes are in pair order.
pub fn transform_test_split(
    pairs: &[AnnotatedSentencePair],
    patterns: &[PatternPair],
    inventory: &MorphemeInventory,
    config: &BuildConfig,
) -> Vec<SiteOutcome> {
    let by_id: HashMap<&str, &PatternPair> = patterns.iter().map(|p| (p.id.as_str(), p)).collect();
    let scan = scan_corpus(pairs, patterns, config.seed, CompoundAllocation::RoundRobin);
    transform_all(pairs, &scan.sites, &by_id, inventory, config)
}

fn transform_all(
    pairs: &[AnnotatedSentencePair],
    sites: &[MatchSite],
    patterns: &HashMap<&str, &PatternPair>,
    inventory: &MorphemeInventory,
    config: &BuildConfig,
) -> Vec<SiteOutcome> {
    let by_id: HashMap<usize, &AnnotatedSentencePair> = pairs.iter().map(|p| (p.pair_id, p)).collect();
    sites
        .par_iter()
        .map(|site| {
            let pair = by_id[&site.pair_id];
            let pattern = patterns[site.pattern_id.as_str()];
            let surface = transform_site(pair, site, pattern, inventory, Variant::Surface, &config.vowels);
            let out = surface.map(|s| {
                let a = config
                    .abstract_variant
                    .then(|| transform_site(pair, site, pattern, inventory, Variant::Abstract, &config.vowels))
                    .flatten();
                (s, a)
            });
            (site.pattern_id.clone(), out)
        })
        .collect()
}

fn with_pool<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// Builds training and test corpora. Training output is every original pair,
/// then all surface records, then all abstract records.
pub fn build_dataset(
    train_pairs: &[AnnotatedSentencePair],
    test_pairs: &[AnnotatedSentencePair],
    patterns: &[PatternPair],
    inventory: &MorphemeInventory,
    config: &BuildConfig,
) -> Result<Dataset> {
    let patterns = config.effective_patterns(patterns)?;
    for p in &patterns {
        p.validate()?;
    }
    inventory.check_covers(&patterns)?;
    with_pool(config.threads, || build_inner(train_pairs, test_pairs, &patterns, inventory, config))?
}

fn build_inner(
    train_pairs: &[AnnotatedSentencePair],
    test_pairs: &[AnnotatedSentencePair],
    patterns: &[PatternPair],
    inventory: &MorphemeInventory,
    config: &BuildConfig,
) -> Result<Dataset> {
    let by_id: HashMap<&str, &PatternPair> = patterns.iter().map(|p| (p.id.as_str(), p)).collect();
    let mut counts: IndexMap<(String, Variant), PatternCounts> = IndexMap::new();
    for p in patterns {
        for v in [Variant::Surface, Variant::Abstract] {
            counts.insert((p.id.clone(), v), PatternCounts::default());
        }
    }
    let bump_skipped = |counts: &mut IndexMap<(String, Variant), PatternCounts>, id: &str| {
        for v in [Variant::Surface, Variant::Abstract] {
            counts.get_mut(&(id.to_string(), v)).expect("known pattern").skipped += 1;
        }
    };

    // Training split.
    let train_scan = scan_corpus(train_pairs, patterns, config.seed, CompoundAllocation::Capped);
    let train_out = transform_all(train_pairs, &train_scan.sites, &by_id, inventory, config);
    let mut per_pattern: IndexMap<&str, Vec<(ModifiedPairRecord, Option<ModifiedPairRecord>)>> =
        patterns.iter().map(|p| (p.id.as_str(), Vec::new())).collect();
    for (id, rec) in train_out {
        match rec {
            Some(r) => per_pattern.get_mut(id.as_str()).expect("known pattern").push(r),
            None => bump_skipped(&mut counts, &id),
        }
    }
    let mut kept: Vec<(ModifiedPairRecord, Option<ModifiedPairRecord>)> = Vec::new();
    for (k, (id, mut recs)) in per_pattern.into_iter().enumerate() {
        if let Some(cap) = by_id[id].max_train_insertions {
            if recs.len() > cap {
                let mut rng = pair_rng(config.seed, CAP_STREAM, k);
                let mut chosen = sample(&mut rng, recs.len(), cap).into_vec();
                chosen.sort_unstable();
                let mut slots: Vec<Option<_>> = recs.into_iter().map(Some).collect();
                recs = chosen.into_iter().map(|i| slots[i].take().expect("distinct")).collect();
            }
        }
        kept.extend(recs);
    }
    kept.sort_by_key(|(s, _)| s.pair_id);

    let mut base_freq: IndexMap<(String, String), usize> = IndexMap::new();
    for (s, a) in &kept {
        counts.get_mut(&(s.pattern_id.clone(), Variant::Surface)).expect("known").train += 1;
        if a.is_some() {
            counts.get_mut(&(s.pattern_id.clone(), Variant::Abstract)).expect("known").train += 1;
        }
        *base_freq
            .entry((s.pattern_id.clone(), s.base_src_lemma.to_lowercase()))
            .or_default() += 1;
    }
    base_freq.sort_unstable_keys();

    let (mut train_src, mut train_trg): (Vec<String>, Vec<String>) =
        train_pairs.par_iter().map(|p| (render(&p.src), render(&p.trg))).unzip();
    let original_count = train_src.len();
    for (s, _) in &kept {
        train_src.push(s.src_text());
        train_trg.push(s.trg_text());
    }
    for a in kept.iter().filter_map(|(_, a)| a.as_ref()) {
        train_src.push(a.src_text());
        train_trg.push(a.trg_text());
    }

    // Test split: no caps, compound patterns share the unclaimed pairs evenly.
    let test_out = transform_test_split(test_pairs, patterns, inventory, config);
    let mut test_surface = TestSet::default();
    let mut test_abstract = TestSet::default();
    let freq_of = |r: &ModifiedPairRecord| {
        base_freq
            .get(&(r.pattern_id.clone(), r.base_src_lemma.to_lowercase()))
            .copied()
            .unwrap_or(0)
    };
    for (id, rec) in test_out {
        let Some((s, a)) = rec else {
            bump_skipped(&mut counts, &id);
            continue;
        };
        counts.get_mut(&(id.clone(), Variant::Surface)).expect("known").test += 1;
        let meta = MetaRow::from_record(test_surface.len() + 1, &s, freq_of(&s));
        test_surface.meta.push(meta);
        test_surface.records.push(s);
        if let Some(a) = a {
            counts.get_mut(&(id, Variant::Abstract)).expect("known").test += 1;
            let meta = MetaRow::from_record(test_abstract.len() + 1, &a, freq_of(&a));
            test_abstract.meta.push(meta);
            test_abstract.records.push(a);
        }
    }

    let manifest = Manifest {
        seed: config.seed,
        config_digest: config_digest(config, patterns, inventory),
        counts,
        base_freq,
    };
    log::info!(
        "event=build_done train_lines={} originals={} test_surface={} test_abstract={}",
        train_src.len(),
        original_count,
        test_surface.len(),
        test_abstract.len()
    );
    Ok(Dataset {
        train_src,
        train_trg,
        original_count,
        test_surface,
        test_abstract,
        manifest,
    })
}

fn write_lines(path: &Path, lines: &[String]) -> Result<()> {
    let mut text = String::with_capacity(lines.iter().map(|l| l.len() + 1).sum());
    for l in lines {
        text.push_str(l);
        text.push('\n');
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn write_manifest(dir: &Path, manifest: &Manifest) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let path = dir.join("manifest.tsv");
    fs::write(&path, manifest.to_tsv()).map_err(|e| Error::io(&path, e))
}

pub fn write_test_set(dir: &Path, stem: &str, set: &TestSet) -> Result<()> {
    write_lines(&dir.join(format!("{stem}.src")), &set.src_lines())?;
    write_lines(&dir.join(format!("{stem}.trg")), &set.trg_lines())?;
    let path = dir.join(format!("{stem}.meta.tsv"));
    fs::write(&path, write_meta(&set.meta)).map_err(|e| Error::io(&path, e))
}

/// Writes train.{src,trg}, test.{surface,abstract}.{src,trg,meta.tsv} and manifest.tsv.
pub fn write_dataset(dir: &Path, dataset: &Dataset) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_lines(&dir.join("train.src"), &dataset.train_src)?;
    write_lines(&dir.join("train.trg"), &dataset.train_trg)?;
    write_test_set(dir, "test.surface", &dataset.test_surface)?;
    write_test_set(dir, "test.abstract", &dataset.test_abstract)?;
    write_manifest(dir, &dataset.manifest)
}

pub fn load_manifest(path: &Path) -> Result<Manifest> {
    Manifest::parse(&fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
}

pub fn load_meta(path: &Path) -> Result<Vec<MetaRow>> {
    parse_meta(&fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bucket_boundaries() {
        let cases = [
            (0, "zero-shot"),
            (1, "1-5"),
            (5, "1-5"),
            (6, "6-15"),
            (15, "6-15"),
            (16, "16-50"),
            (50, "16-50"),
            (51, "51-100"),
            (100, "51-100"),
            (101, "101-500"),
            (500, "101-500"),
            (501, "501-1000"),
            (1000, "501-1000"),
            (1500, ">1000"),
        ];
        for (f, label) in cases {
            assert_eq!(bucket_of(f).label(), label, "freq {f}");
            assert_eq!(label.parse::<Bucket>().unwrap(), bucket_of(f));
        }
    }

    #[test]
    fn manifest_round_trip() {
        let mut m = Manifest {
            seed: 9,
            config_digest: "abc".into(),
            ..Manifest::default()
        };
        m.counts.insert(
            ("infix_1".into(), Variant::Surface),
            PatternCounts {
                train: 3,
                test: 1,
                skipped: 2,
            },
        );
        m.base_freq.insert(("infix_1".into(), "stadt".into()), 3);
        let back = Manifest::parse(&m.to_tsv()).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.base_frequency("infix_1", "Stadt"), 3);
        assert_eq!(back.base_frequency("infix_1", "Haus"), 0);
    }

    #[test]
    fn meta_round_trip() {
        let row = MetaRow {
            line_no: 1,
            pattern_id: "vowel_harmony_2".into(),
            variant: Variant::Surface,
            check_kind: CheckKind::HarmonyToken,
            morpheme_parts: vec![],
            triple: Some(['b', 'p', 'r']),
            base_src: "Fehler".into(),
            base_trg: "errors".into(),
            base_train_freq: 4,
        };
        let text = write_meta(std::slice::from_ref(&row));
        assert_eq!(parse_meta(&text).unwrap(), vec![row]);
    }
}
