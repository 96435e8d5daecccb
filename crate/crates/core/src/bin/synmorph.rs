use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use indexmap::IndexMap;

use synmorph::alphabet::{Alphabet, VowelSet, DEFAULT_CONSONANTS, SOURCE_VOWELS, TARGET_VOWELS};
use synmorph::augmenter::{self, UnigramScorer, DEFAULT_BUCKET_CAP};
use synmorph::builder::{self, BuildConfig};
use synmorph::config::{optional_file, parse_cap, require_file, RunConfig};
use synmorph::corpus::{self, AnnotatedSentencePair};
use synmorph::evaluator::{self, EvalContext};
use synmorph::morphemes::{self, AbsenceIndex, MorphemeConfig};
use synmorph::pattern::{default_patterns, parse_patterns, write_patterns, PatternPair};
use synmorph::{toy, Error, Result};

#[derive(Parser)]
#[command(name = "synmorph", version, about = "Synthetic morphology test suites for MT")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the artificial morpheme inventory.
    GenMorphemes(Flags),
    /// Insert morphemes into training data and build the test sets.
    Build(Flags),
    /// Score system outputs against a test set's metadata.
    Evaluate(Flags),
    /// Build the frequency-balanced test set from augmented candidates.
    Augment(Flags),
    /// Summarize an evaluation directory on stdout.
    Report(ReportArgs),
    /// Write the bundled toy corpus, default patterns and a vocabulary.
    ToyCorpus(ToyArgs),
}

#[derive(Args, Default)]
struct Flags {
    /// key<TAB>value config file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    src_conllu: Option<PathBuf>,
    #[arg(long)]
    trg_conllu: Option<PathBuf>,
    #[arg(long)]
    align: Option<PathBuf>,
    #[arg(long)]
    test_src_conllu: Option<PathBuf>,
    #[arg(long)]
    test_trg_conllu: Option<PathBuf>,
    #[arg(long)]
    test_align: Option<PathBuf>,
    /// Subword vocabulary, one entry per line.
    #[arg(long)]
    vocab: Option<PathBuf>,
    /// Target-language word list used for compound-split (T5) detection.
    #[arg(long)]
    trg_vocab: Option<PathBuf>,
    #[arg(long)]
    patterns: Option<PathBuf>,
    #[arg(long)]
    inventory: Option<PathBuf>,
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Test metadata (`*.meta.tsv`).
    #[arg(long)]
    meta: Option<PathBuf>,
    /// System output, one line per test line.
    #[arg(long)]
    hyp: Option<PathBuf>,
    /// Fluency scores: candidate_id, src_delta, trg_delta.
    #[arg(long)]
    scores: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Output file (gen-morphemes).
    #[arg(short = 'o', long)]
    output: Option<PathBuf>,
    /// Training cap override, PATTERN=N; repeatable.
    #[arg(long = "cap", value_name = "PATTERN=N")]
    caps: Vec<String>,
    #[arg(long)]
    no_abstract: bool,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    bucket_cap: Option<usize>,
    /// Vowels used to read real words (harmony, infix position, reduplication).
    #[arg(long)]
    vowels: Option<String>,
    #[arg(long)]
    consonants: Option<String>,
    #[arg(long)]
    src_vowels: Option<String>,
    #[arg(long)]
    trg_vowels: Option<String>,
    /// Print the manifest without writing anything (build).
    #[arg(long)]
    dry_run: bool,
}

#[derive(Args)]
struct ReportArgs {
    /// Directory written by `evaluate`.
    #[arg(long)]
    eval_dir: PathBuf,
}

#[derive(Args)]
struct ToyArgs {
    #[arg(long)]
    out_dir: PathBuf,
}

impl Flags {
    fn resolve(self) -> Result<(RunConfig, Extra)> {
        let mut caps = IndexMap::new();
        for c in &self.caps {
            let (id, n) = parse_cap(c)?;
            caps.insert(id, n);
        }
        let flags = RunConfig {
            src_conllu: self.src_conllu,
            trg_conllu: self.trg_conllu,
            align: self.align,
            test_src_conllu: self.test_src_conllu,
            test_trg_conllu: self.test_trg_conllu,
            test_align: self.test_align,
            vocab: self.vocab,
            trg_vocab: self.trg_vocab,
            patterns: self.patterns,
            inventory: self.inventory,
            manifest: self.manifest,
            meta: self.meta,
            hyp: self.hyp,
            scores: self.scores,
            out_dir: self.out_dir,
            seed: self.seed,
            caps,
            no_abstract: self.no_abstract,
            threads: self.threads,
            bucket_cap: self.bucket_cap,
            vowels: self.vowels,
            consonants: self.consonants,
            src_vowels: self.src_vowels,
            trg_vowels: self.trg_vowels,
        };
        let base = match &self.config {
            Some(path) => RunConfig::load(require_file(&Some(path.clone()), "config")?)?,
            None => RunConfig::default(),
        };
        Ok((
            base.overlay(flags),
            Extra {
                output: self.output,
                dry_run: self.dry_run,
            },
        ))
    }
}

struct Extra {
    output: Option<PathBuf>,
    dry_run: bool,
}

fn vowel_set(cfg: &RunConfig) -> VowelSet {
    cfg.vowels.as_deref().map(VowelSet::new).unwrap_or_default()
}

fn load_patterns(cfg: &RunConfig) -> Result<Vec<PatternPair>> {
    let path = require_file(&cfg.patterns, "patterns")?;
    parse_patterns(&corpus::read_to_string(path)?)
}

fn load_split(
    src: &Option<PathBuf>,
    trg: &Option<PathBuf>,
    align: &Option<PathBuf>,
    prefix: &str,
) -> Result<Vec<AnnotatedSentencePair>> {
    let pairs = corpus::load_parallel_files(
        require_file(src, &format!("{prefix}src-conllu"))?,
        require_file(trg, &format!("{prefix}trg-conllu"))?,
        require_file(align, &format!("{prefix}align"))?,
    )?;
    let split = if prefix.is_empty() { "train" } else { "test" };
    log::info!("event=load split={split} pairs={}", pairs.len());
    Ok(pairs)
}

fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    match threads {
        None => f(),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?
            .install(f),
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn cmd_gen_morphemes(cfg: RunConfig, extra: Extra) -> Result<()> {
    let seed = cfg.seed()?;
    let patterns = load_patterns(&cfg)?;
    let vocab_path = require_file(&cfg.vocab, "vocab")?;
    let vocab = morphemes::parse_vocab(&corpus::read_to_string(vocab_path)?);
    let output = extra
        .output
        .or_else(|| cfg.out_dir.as_ref().map(|d| d.join("inventory.tsv")))
        .ok_or_else(|| Error::Config("-o/--output or --out-dir is required".into()))?;

    // Absence is checked against every corpus given, train and test alike.
    let mut tokens = Vec::new();
    for (conllu, flag) in [
        (&cfg.src_conllu, "src-conllu"),
        (&cfg.trg_conllu, "trg-conllu"),
        (&cfg.test_src_conllu, "test-src-conllu"),
        (&cfg.test_trg_conllu, "test-trg-conllu"),
    ] {
        if let Some(path) = optional_file(conllu, flag)? {
            for s in corpus::parse_conllu(&corpus::read_to_string(path)?)? {
                tokens.extend(s.forms());
            }
        }
    }
    let mut mcfg = MorphemeConfig::default();
    let consonants = cfg.consonants.as_deref().unwrap_or(DEFAULT_CONSONANTS);
    mcfg.src_alphabet = Alphabet::new(consonants, cfg.src_vowels.as_deref().unwrap_or(SOURCE_VOWELS))?;
    mcfg.trg_alphabet = Alphabet::new(consonants, cfg.trg_vowels.as_deref().unwrap_or(TARGET_VOWELS))?;
    let index = AbsenceIndex::for_config(tokens.iter().map(String::as_str), vocab.iter().map(String::as_str), &mcfg);
    let inventory = morphemes::build_inventory(&patterns, &index, &mcfg, seed)?;
    write_file(&output, &morphemes::write_inventory(&inventory, &patterns))?;
    log::info!(
        "event=inventory patterns={} corpus_tokens={} vocab={} out={}",
        inventory.len(),
        tokens.len(),
        vocab.len(),
        output.display()
    );
    Ok(())
}

fn build_config(cfg: &RunConfig) -> Result<BuildConfig> {
    let mut bc = BuildConfig::new(cfg.seed()?);
    bc.abstract_variant = !cfg.no_abstract;
    bc.caps = cfg.caps.clone();
    bc.threads = cfg.threads;
    bc.vowels = vowel_set(cfg);
    Ok(bc)
}

fn cmd_build(cfg: RunConfig, extra: Extra) -> Result<()> {
    let bc = build_config(&cfg)?;
    let patterns = load_patterns(&cfg)?;
    let inventory = morphemes::load_inventory(require_file(&cfg.inventory, "inventory")?)?;
    let train = load_split(&cfg.src_conllu, &cfg.trg_conllu, &cfg.align, "")?;
    let test = load_split(&cfg.test_src_conllu, &cfg.test_trg_conllu, &cfg.test_align, "test-")?;
    let out_dir = if extra.dry_run { None } else { Some(cfg.out_dir()?) };
    let dataset = builder::build_dataset(&train, &test, &patterns, &inventory, &bc)?;
    match out_dir {
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(dataset.manifest.to_tsv().as_bytes())
                .map_err(|e| Error::io("<stdout>", e))?;
        }
        Some(dir) => {
            builder::write_dataset(dir, &dataset)?;
            log::info!("event=written out_dir={}", dir.display());
        }
    }
    Ok(())
}

fn eval_context(cfg: &RunConfig) -> Result<EvalContext> {
    let patterns = load_patterns(cfg)?;
    let inventory = morphemes::load_inventory(require_file(&cfg.inventory, "inventory")?)?;
    let mut ctx = EvalContext::new(patterns, inventory);
    ctx.vowels = vowel_set(cfg);
    if let Some(path) = optional_file(&cfg.trg_vocab, "trg-vocab")? {
        ctx.target_vocab = morphemes::parse_vocab(&corpus::read_to_string(path)?)
            .into_iter()
            .map(|w| w.to_lowercase())
            .collect::<HashSet<_>>();
    }
    Ok(ctx)
}

fn cmd_evaluate(cfg: RunConfig) -> Result<()> {
    let ctx = eval_context(&cfg)?;
    let meta = builder::load_meta(require_file(&cfg.meta, "meta")?)?;
    let outputs = evaluator::load_outputs(require_file(&cfg.hyp, "hyp")?)?;
    let out_dir = cfg.out_dir()?;
    let report = with_threads(cfg.threads, || evaluator::evaluate(&outputs, &meta, &ctx))?;
    report.write(out_dir)?;
    let correct = report.records.iter().filter(|r| r.correct).count();
    log::info!(
        "event=evaluate lines={} correct={} out_dir={}",
        report.records.len(),
        correct,
        out_dir.display()
    );
    Ok(())
}

fn cmd_augment(cfg: RunConfig) -> Result<()> {
    let bc = build_config(&cfg)?;
    let patterns = load_patterns(&cfg)?;
    let inventory = morphemes::load_inventory(require_file(&cfg.inventory, "inventory")?)?;
    let manifest = builder::load_manifest(require_file(&cfg.manifest, "manifest")?)?;
    let test = load_split(&cfg.test_src_conllu, &cfg.test_trg_conllu, &cfg.test_align, "test-")?;
    let out_dir = cfg.out_dir()?;
    let cap = cfg.bucket_cap.unwrap_or(DEFAULT_BUCKET_CAP);

    let scores = match optional_file(&cfg.scores, "scores")? {
        Some(path) => augmenter::parse_scores(&corpus::read_to_string(path)?)?,
        None => {
            log::info!("event=scores source=fallback_unigram");
            HashMap::new()
        }
    };
    // The fallback model is estimated on the held-out split itself.
    let lines: Vec<String> = test
        .iter()
        .flat_map(|p| [corpus::render(&p.src), corpus::render(&p.trg)])
        .collect();
    let fallback = UnigramScorer::from_lines(lines.iter().map(String::as_str));

    let (set, candidates) = with_threads(cfg.threads, || {
        let (originals, augmented, candidates) =
            augmenter::build_pools(&test, &patterns, &inventory, &manifest, &bc, &scores, &fallback);
        let set = augmenter::assemble_balanced(originals, augmented, &patterns, cap);
        Ok((set, candidates))
    })?;
    augmenter::write_balanced(out_dir, &set, &candidates)?;
    log::info!(
        "event=augment candidates={} balanced_lines={} bucket_cap={} out_dir={}",
        candidates.len(),
        set.len(),
        cap,
        out_dir.display()
    );
    Ok(())
}

fn read_tsv(path: &Path) -> Result<Vec<Vec<String>>> {
    Ok(corpus::read_to_string(path)?
        .lines()
        .skip(1)
        .filter(|l| !l.trim().is_empty())
        .map(|l| l.split('\t').map(String::from).collect())
        .collect())
}

fn cmd_report(args: ReportArgs) -> Result<()> {
    let report = read_tsv(require_file(&Some(args.eval_dir.join("report.tsv")), "eval-dir")?)?;
    let errors = read_tsv(require_file(&Some(args.eval_dir.join("errors.tsv")), "eval-dir")?)?;
    let mut hist: IndexMap<String, BTreeMap<String, usize>> = IndexMap::new();
    for row in &errors {
        if let [_, code, _, pattern, ..] = row.as_slice() {
            *hist.entry(pattern.clone()).or_default().entry(code.clone()).or_default() += 1;
        }
    }
    let mut out = format!("{:<20} {:<9} {:>6} {:>9}  errors\n", "pattern", "variant", "n", "accuracy");
    for row in &report {
        if let [pattern, variant, n, acc] = row.as_slice() {
            let errs = hist
                .get(pattern)
                .map(|h| h.iter().map(|(c, k)| format!("{c}:{k}")).collect::<Vec<_>>().join(" "))
                .unwrap_or_default();
            out.push_str(&format!("{pattern:<20} {variant:<9} {n:>6} {acc:>9}  {errs}\n"));
        }
    }
    std::io::stdout()
        .write_all(out.as_bytes())
        .map_err(|e| Error::io("<stdout>", e))
}

fn cmd_toy_corpus(args: ToyArgs) -> Result<()> {
    let (train, test) = toy::toy_corpus();
    toy::write_split(&args.out_dir, "train", &train)?;
    toy::write_split(&args.out_dir, "test", &test)?;
    write_file(&args.out_dir.join("patterns.tsv"), &write_patterns(&default_patterns()))?;
    let vocab: String = toy::lexicon().into_iter().map(|w| w + "\n").collect();
    write_file(&args.out_dir.join("vocab.txt"), &vocab)?;
    log::info!(
        "event=toy_corpus train={} test={} out_dir={}",
        train.len(),
        test.len(),
        args.out_dir.display()
    );
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::GenMorphemes(f) => {
            let (cfg, extra) = f.resolve()?;
            cmd_gen_morphemes(cfg, extra)
        }
        Command::Build(f) => {
            let (cfg, extra) = f.resolve()?;
            cmd_build(cfg, extra)
        }
        Command::Evaluate(f) => cmd_evaluate(f.resolve()?.0),
        Command::Augment(f) => cmd_augment(f.resolve()?.0),
        Command::Report(a) => cmd_report(a),
        Command::ToyCorpus(a) => cmd_toy_corpus(a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format(|buf, record| writeln!(buf, "level={} {}", record.level().as_str().to_lowercase(), record.args()))
        .init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help / --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            log::error!("event=failed error=\"{}\"", e.to_string().replace('"', "'"));
            ExitCode::from(2)
        }
    }
}
