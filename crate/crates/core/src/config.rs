//! Run configuration: a `key<TAB>value` file merged with command-line flags.

use std::fs;
use std::path::{Path, PathBuf};

use indexmap::IndexMap;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RunConfig {
    pub src_conllu: Option<PathBuf>,
    pub trg_conllu: Option<PathBuf>,
    pub align: Option<PathBuf>,
    pub test_src_conllu: Option<PathBuf>,
    pub test_trg_conllu: Option<PathBuf>,
    pub test_align: Option<PathBuf>,
    pub vocab: Option<PathBuf>,
    pub trg_vocab: Option<PathBuf>,
    pub patterns: Option<PathBuf>,
    pub inventory: Option<PathBuf>,
    pub manifest: Option<PathBuf>,
    pub meta: Option<PathBuf>,
    pub hyp: Option<PathBuf>,
    pub scores: Option<PathBuf>,
    pub out_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    pub caps: IndexMap<String, usize>,
    pub no_abstract: bool,
    pub threads: Option<usize>,
    pub bucket_cap: Option<usize>,
    /// Vowels used when reading vowels out of real words.
    pub vowels: Option<String>,
    pub consonants: Option<String>,
    pub src_vowels: Option<String>,
    pub trg_vowels: Option<String>,
}

/// Parses `PATTERN=N`.
pub fn parse_cap(s: &str) -> Result<(String, usize)> {
    let (id, n) = s
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("cap {s:?} is not of the form PATTERN=N")))?;
    let n = n
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("cap {s:?} has a non-numeric count")))?;
    if id.trim().is_empty() {
        return Err(Error::Config(format!("cap {s:?} names no pattern")));
    }
    Ok((id.trim().to_string(), n))
}

fn pick<T>(flag: Option<T>, file: Option<T>) -> Option<T> {
    flag.or(file)
}

impl RunConfig {
    /// Parses a config file: one `key<TAB>value` per line, `#` comments.
    /// Keys are the long flag names with `-` or `_`; `cap` may repeat.
    pub fn parse(text: &str) -> Result<RunConfig> {
        let mut c = RunConfig::default();
        for (i, line) in text.lines().enumerate() {
            let lineno = i + 1;
            let line = line.trim_end();
            if line.trim().is_empty() || line.trim_start().starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('\t')
                .ok_or_else(|| Error::parse(lineno, "expected key<TAB>value"))?;
            let value = value.trim();
            let path = || Some(PathBuf::from(value));
            let num = || -> Result<usize> {
                value
                    .parse()
                    .map_err(|_| Error::parse(lineno, format!("{key}: expected a number, found {value:?}")))
            };
            match key.trim().replace('-', "_").as_str() {
                "src_conllu" => c.src_conllu = path(),
                "trg_conllu" => c.trg_conllu = path(),
                "align" => c.align = path(),
                "test_src_conllu" => c.test_src_conllu = path(),
                "test_trg_conllu" => c.test_trg_conllu = path(),
                "test_align" => c.test_align = path(),
                "vocab" => c.vocab = path(),
                "trg_vocab" => c.trg_vocab = path(),
                "patterns" => c.patterns = path(),
                "inventory" => c.inventory = path(),
                "manifest" => c.manifest = path(),
                "meta" => c.meta = path(),
                "hyp" => c.hyp = path(),
                "scores" => c.scores = path(),
                "out_dir" => c.out_dir = path(),
                "seed" => {
                    c.seed = Some(
                        value
                            .parse()
                            .map_err(|_| Error::parse(lineno, format!("seed: expected an integer, found {value:?}")))?,
                    )
                }
                "cap" => {
                    let (id, n) = parse_cap(value)?;
                    c.caps.insert(id, n);
                }
                "no_abstract" => c.no_abstract = matches!(value, "1" | "true" | "yes"),
                "threads" => c.threads = Some(num()?),
                "bucket_cap" => c.bucket_cap = Some(num()?),
                "vowels" => c.vowels = Some(value.to_string()),
                "consonants" => c.consonants = Some(value.to_string()),
                "src_vowels" => c.src_vowels = Some(value.to_string()),
                "trg_vowels" => c.trg_vowels = Some(value.to_string()),
                other => return Err(Error::parse(lineno, format!("unknown config key {other:?}"))),
            }
        }
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<RunConfig> {
        RunConfig::parse(&fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
    }

    /// Values from `flags` take precedence over `self`.
    pub fn overlay(self, flags: RunConfig) -> RunConfig {
        let mut caps = self.caps;
        caps.extend(flags.caps);
        RunConfig {
            src_conllu: pick(flags.src_conllu, self.src_conllu),
            trg_conllu: pick(flags.trg_conllu, self.trg_conllu),
            align: pick(flags.align, self.align),
            test_src_conllu: pick(flags.test_src_conllu, self.test_src_conllu),
            test_trg_conllu: pick(flags.test_trg_conllu, self.test_trg_conllu),
            test_align: pick(flags.test_align, self.test_align),
            vocab: pick(flags.vocab, self.vocab),
            trg_vocab: pick(flags.trg_vocab, self.trg_vocab),
            patterns: pick(flags.patterns, self.patterns),
            inventory: pick(flags.inventory, self.inventory),
            manifest: pick(flags.manifest, self.manifest),
            meta: pick(flags.meta, self.meta),
            hyp: pick(flags.hyp, self.hyp),
            scores: pick(flags.scores, self.scores),
            out_dir: pick(flags.out_dir, self.out_dir),
            seed: pick(flags.seed, self.seed),
            caps,
            no_abstract: flags.no_abstract || self.no_abstract,
            threads: pick(flags.threads, self.threads),
            bucket_cap: pick(flags.bucket_cap, self.bucket_cap),
            vowels: pick(flags.vowels, self.vowels),
            consonants: pick(flags.consonants, self.consonants),
            src_vowels: pick(flags.src_vowels, self.src_vowels),
            trg_vowels: pick(flags.trg_vowels, self.trg_vowels),
        }
    }

    pub fn seed(&self) -> Result<u64> {
        self.seed
            .ok_or_else(|| Error::Config("--seed is required for generating commands".into()))
    }

    pub fn out_dir(&self) -> Result<&Path> {
        self.out_dir
            .as_deref()
            .ok_or_else(|| Error::Config("--out-dir is required".into()))
    }
}

/// An input path that must be given and must exist.
pub fn require_file<'a>(value: &'a Option<PathBuf>, flag: &str) -> Result<&'a Path> {
    let path = value
        .as_deref()
        .ok_or_else(|| Error::Config(format!("--{flag} is required")))?;
    if !path.is_file() {
        return Err(Error::Config(format!("--{flag}: {} does not exist", path.display())));
    }
    Ok(path)
}

/// An optional input path that, when given, must exist.
pub fn optional_file<'a>(value: &'a Option<PathBuf>, flag: &str) -> Result<Option<&'a Path>> {
    match value {
        None => Ok(None),
        Some(_) => require_file(value, flag).map(Some),
    }
}
