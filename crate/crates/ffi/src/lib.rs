//! C ABI over the synmorph library.
//!
//! Conventions: every fallible function returns an [`SmStatus`]; on failure
//! a message is available from [`sm_last_error`] on the same thread until
//! the next failing call. Strings handed out through `char **` parameters
//! are owned by the caller and released with [`sm_string_free`]. Handles are
//! opaque and released with their `_free` function; passing NULL to any
//! `_free` function is a no-op.

use std::cell::RefCell;
use std::collections::HashSet;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use synmorph::alphabet::VowelSet;
use synmorph::builder::{bucket_of, parse_meta, Bucket};
use synmorph::evaluator::{evaluate, EvalContext};
use synmorph::morphemes::{
    build_inventory, parse_inventory, parse_triple, parse_vocab, write_inventory, AbsenceIndex, MorphemeConfig,
    MorphemeInventory,
};
use synmorph::pattern::{default_patterns, parse_patterns, PatternPair, RedupMode, Side};
use synmorph::transforms::{
    apply_circumfix, apply_compound_token, apply_infix, apply_reduplication, apply_vowel_harmony,
};
use synmorph::Error;

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidArgument = 3,
    Parse = 4,
    Io = 5,
    Config = 6,
    Exhausted = 7,
    LineCountMismatch = 8,
    /// The string rule does not apply to the given base.
    NotApplicable = 9,
    Panic = 99,
}

/// Which side of the pair a rule is applied on.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SmSide {
    Source = 0,
    Target = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SmRedupMode {
    Full = 0,
    Partial = 1,
    Triple = 2,
}

/// A parsed pattern table.
pub struct SmPatterns {
    patterns: Vec<PatternPair>,
}

/// A morpheme inventory.
pub struct SmInventory {
    inventory: MorphemeInventory,
}

/// An evaluator bound to a pattern table and inventory.
pub struct SmEvaluator {
    ctx: EvalContext,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

struct Failure(SmStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Parse { .. } | Error::Structure { .. } | Error::CountMismatch { .. } | Error::AlignmentRange { .. } => {
                SmStatus::Parse
            }
            Error::Exhausted { .. } => SmStatus::Exhausted,
            Error::Config(_) => SmStatus::Config,
            Error::LineCountMismatch { .. } => SmStatus::LineCountMismatch,
            Error::Io { .. } => SmStatus::Io,
        };
        Failure(status, e.to_string())
    }
}

type FfiResult<T> = Result<T, Failure>;

fn guard(f: impl FnOnce() -> FfiResult<()>) -> SmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SmStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            SmStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> FfiResult<&'a str> {
    if p.is_null() {
        return Err(Failure(SmStatus::NullPointer, format!("{name} is NULL")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(SmStatus::InvalidUtf8, format!("{name} is not valid UTF-8")))
}

unsafe fn opt_str_arg<'a>(p: *const c_char, name: &str) -> FfiResult<&'a str> {
    if p.is_null() {
        Ok("")
    } else {
        str_arg(p, name)
    }
}

unsafe fn handle<'a, T>(p: *const T, name: &str) -> FfiResult<&'a T> {
    p.as_ref()
        .ok_or_else(|| Failure(SmStatus::NullPointer, format!("{name} is NULL")))
}

unsafe fn out_ptr<'a, T>(p: *mut T, name: &str) -> FfiResult<&'a mut T> {
    p.as_mut()
        .ok_or_else(|| Failure(SmStatus::NullPointer, format!("{name} is NULL")))
}

fn c_string(s: String) -> FfiResult<*mut c_char> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|_| Failure(SmStatus::InvalidArgument, "result contains a NUL byte".into()))
}

unsafe fn put_string(out: *mut *mut c_char, s: Option<String>) -> FfiResult<()> {
    let out = out_ptr(out, "out")?;
    *out = ptr::null_mut();
    match s {
        Some(s) => {
            *out = c_string(s)?;
            Ok(())
        }
        None => Err(Failure(SmStatus::NotApplicable, "rule does not apply to this base".into())),
    }
}

/// Library version, a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn sm_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the last failure on this thread, or NULL. Owned by the library.
#[no_mangle]
pub extern "C" fn sm_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Releases a string returned through a `char **` out-parameter.
///
/// # Safety
/// `s` must be NULL or a pointer obtained from this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn sm_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

// Patterns ------------------------------------------------------------------

/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sm_patterns_default(out: *mut *mut SmPatterns) -> SmStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = Box::into_raw(Box::new(SmPatterns {
            patterns: default_patterns(),
        }));
        Ok(())
    })
}

/// Parses a pattern table in TSV form.
///
/// # Safety
/// `tsv` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sm_patterns_parse(tsv: *const c_char, out: *mut *mut SmPatterns) -> SmStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = ptr::null_mut();
        let patterns = parse_patterns(str_arg(tsv, "tsv")?)?;
        *out = Box::into_raw(Box::new(SmPatterns { patterns }));
        Ok(())
    })
}

/// Number of patterns; 0 for NULL.
///
/// # Safety
/// `p` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sm_patterns_len(p: *const SmPatterns) -> usize {
    p.as_ref().map_or(0, |p| p.patterns.len())
}

/// # Safety
/// `p` must be NULL or a handle from `sm_patterns_*`, freed once.
#[no_mangle]
pub unsafe extern "C" fn sm_patterns_free(p: *mut SmPatterns) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

// Inventory -----------------------------------------------------------------

/// Parses an inventory TSV.
///
/// # Safety
/// `tsv` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sm_inventory_parse(tsv: *const c_char, out: *mut *mut SmInventory) -> SmStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = ptr::null_mut();
        let inventory = parse_inventory(str_arg(tsv, "tsv")?)?;
        *out = Box::into_raw(Box::new(SmInventory { inventory }));
        Ok(())
    })
}

/// Generates an inventory whose morphemes are absent from the
/// whitespace-separated `corpus_tokens` and the line-per-entry `vocab`.
/// Either text may be NULL.
///
/// # Safety
/// Pointers must be valid; strings NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn sm_inventory_generate(
    patterns: *const SmPatterns,
    corpus_tokens: *const c_char,
    vocab: *const c_char,
    seed: u64,
    out: *mut *mut SmInventory,
) -> SmStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = ptr::null_mut();
        let patterns = handle(patterns, "patterns")?;
        let corpus = opt_str_arg(corpus_tokens, "corpus_tokens")?;
        let vocab = parse_vocab(opt_str_arg(vocab, "vocab")?);
        let cfg = MorphemeConfig::default();
        let index = AbsenceIndex::for_config(corpus.split_whitespace(), vocab.iter().map(String::as_str), &cfg);
        let inventory = build_inventory(&patterns.patterns, &index, &cfg, seed)?;
        *out = Box::into_raw(Box::new(SmInventory { inventory }));
        Ok(())
    })
}

/// Serializes the inventory as TSV, in pattern-table order.
///
/// # Safety
/// Handles must be live; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sm_inventory_to_tsv(
    inventory: *const SmInventory,
    patterns: *const SmPatterns,
    out: *mut *mut c_char,
) -> SmStatus {
    guard(|| {
        let inv = handle(inventory, "inventory")?;
        let patterns = handle(patterns, "patterns")?;
        put_string(out, Some(write_inventory(&inv.inventory, &patterns.patterns)))
    })
}

/// # Safety
/// `p` must be NULL or a handle from `sm_inventory_*`, freed once.
#[no_mangle]
pub unsafe extern "C" fn sm_inventory_free(p: *mut SmInventory) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

// Evaluator -----------------------------------------------------------------

/// Creates an evaluator. The pattern table and inventory are copied.
///
/// # Safety
/// Handles must be live; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sm_evaluator_new(
    patterns: *const SmPatterns,
    inventory: *const SmInventory,
    out: *mut *mut SmEvaluator,
) -> SmStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = ptr::null_mut();
        let patterns = handle(patterns, "patterns")?;
        let inv = handle(inventory, "inventory")?;
        inv.inventory.check_covers(&patterns.patterns)?;
        let ctx = EvalContext::new(patterns.patterns.clone(), inv.inventory.clone());
        *out = Box::into_raw(Box::new(SmEvaluator { ctx }));
        Ok(())
    })
}

/// Sets the target word list (one per line) used to detect compound-split
/// reduplication errors.
///
/// # Safety
/// `ev` must be a live handle; `vocab` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn sm_evaluator_set_target_vocab(ev: *mut SmEvaluator, vocab: *const c_char) -> SmStatus {
    guard(|| {
        let ev = out_ptr(ev, "evaluator")?;
        let words: HashSet<String> = parse_vocab(str_arg(vocab, "vocab")?)
            .into_iter()
            .map(|w| w.to_lowercase())
            .collect();
        ev.ctx.target_vocab = words;
        Ok(())
    })
}

/// Judges one output line against one metadata row (TSV, header optional).
/// `*error_code` receives the error code string, or NULL when correct.
///
/// # Safety
/// Pointers must be valid; strings NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn sm_evaluator_line(
    ev: *const SmEvaluator,
    meta_row: *const c_char,
    output: *const c_char,
    correct: *mut bool,
    error_code: *mut *mut c_char,
) -> SmStatus {
    guard(|| {
        let ev = handle(ev, "evaluator")?;
        let correct = out_ptr(correct, "correct")?;
        let code_out = out_ptr(error_code, "error_code")?;
        *code_out = ptr::null_mut();
        let rows = parse_meta(str_arg(meta_row, "meta_row")?)?;
        let [row] = rows.as_slice() else {
            return Err(Failure(
                SmStatus::InvalidArgument,
                format!("expected one metadata row, found {}", rows.len()),
            ));
        };
        let record = ev.ctx.evaluate_line(row, str_arg(output, "output")?);
        *correct = record.correct;
        if let Some(code) = record.error {
            *code_out = c_string(code.to_string())?;
        }
        Ok(())
    })
}

/// Evaluates newline-separated outputs against a metadata file's contents
/// and returns the per-pattern accuracy table as TSV.
///
/// # Safety
/// Pointers must be valid; strings NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn sm_evaluator_report(
    ev: *const SmEvaluator,
    meta_tsv: *const c_char,
    outputs: *const c_char,
    report_tsv: *mut *mut c_char,
) -> SmStatus {
    guard(|| {
        let ev = handle(ev, "evaluator")?;
        let meta = parse_meta(str_arg(meta_tsv, "meta_tsv")?)?;
        let lines: Vec<String> = str_arg(outputs, "outputs")?.lines().map(String::from).collect();
        let report = evaluate(&lines, &meta, &ev.ctx)?;
        put_string(report_tsv, Some(report.report_tsv()))
    })
}

/// # Safety
/// `p` must be NULL or a handle from `sm_evaluator_new`, freed once.
#[no_mangle]
pub unsafe extern "C" fn sm_evaluator_free(p: *mut SmEvaluator) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

// String rules --------------------------------------------------------------

fn side_of(side: u32) -> FfiResult<Side> {
    match side {
        x if x == SmSide::Source as u32 => Ok(Side::Source),
        x if x == SmSide::Target as u32 => Ok(Side::Target),
        _ => Err(Failure(SmStatus::InvalidArgument, format!("unknown side {side}"))),
    }
}

fn mode_of(mode: u32) -> FfiResult<RedupMode> {
    match mode {
        x if x == SmRedupMode::Full as u32 => Ok(RedupMode::Full),
        x if x == SmRedupMode::Partial as u32 => Ok(RedupMode::Partial),
        x if x == SmRedupMode::Triple as u32 => Ok(RedupMode::Triple),
        _ => Err(Failure(SmStatus::InvalidArgument, format!("unknown reduplication mode {mode}"))),
    }
}

/// `Sona` + `Räume` → `Sonaräume`.
///
/// # Safety
/// Strings NUL-terminated; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sm_apply_compound(base: *const c_char, morpheme: *const c_char, out: *mut *mut c_char) -> SmStatus {
    guard(|| {
        let s = apply_compound_token(str_arg(base, "base")?, str_arg(morpheme, "morpheme")?);
        put_string(out, Some(s))
    })
}

/// `side` is an `SmSide` value.
///
/// # Safety
/// Strings NUL-terminated; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sm_apply_circumfix(
    base: *const c_char,
    prefix: *const c_char,
    suffix: *const c_char,
    side: u32,
    out: *mut *mut c_char,
) -> SmStatus {
    guard(|| {
        let s = apply_circumfix(
            str_arg(base, "base")?,
            str_arg(prefix, "prefix")?,
            str_arg(suffix, "suffix")?,
            side_of(side)?,
        );
        put_string(out, Some(s))
    })
}

/// Returns `SM_STATUS_NOT_APPLICABLE` when the base has no inner vowel.
///
/// # Safety
/// Strings NUL-terminated; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sm_apply_infix(base: *const c_char, infix: *const c_char, out: *mut *mut c_char) -> SmStatus {
    guard(|| {
        let s = apply_infix(str_arg(base, "base")?, str_arg(infix, "infix")?, &VowelSet::default());
        put_string(out, s)
    })
}

/// `triple` is three consonants, as `bpr` or `b-p-r`.
///
/// # Safety
/// Strings NUL-terminated; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sm_apply_vowel_harmony(base: *const c_char, triple: *const c_char, out: *mut *mut c_char) -> SmStatus {
    guard(|| {
        let t = str_arg(triple, "triple")?;
        let t = parse_triple(t).ok_or_else(|| Failure(SmStatus::InvalidArgument, format!("bad triple {t:?}")))?;
        let s = apply_vowel_harmony(str_arg(base, "base")?, t, &VowelSet::default());
        put_string(out, s)
    })
}

/// `mode` is an `SmRedupMode` value.
///
/// # Safety
/// Strings NUL-terminated; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sm_apply_reduplication(base: *const c_char, mode: u32, out: *mut *mut c_char) -> SmStatus {
    guard(|| {
        let s = apply_reduplication(str_arg(base, "base")?, mode_of(mode)?, &VowelSet::default());
        put_string(out, s)
    })
}

// Buckets -------------------------------------------------------------------

const BUCKET_LABELS: [&CStr; 8] = [
    c"zero-shot",
    c"1-5",
    c"6-15",
    c"16-50",
    c"51-100",
    c"101-500",
    c"501-1000",
    c">1000",
];

fn bucket_index(freq: u64) -> usize {
    let b = bucket_of(usize::try_from(freq).unwrap_or(usize::MAX));
    Bucket::ALL.iter().position(|&x| x == b).unwrap_or(Bucket::ALL.len() - 1)
}

/// Index of the frequency bucket, 0 (zero-shot) to 7 (>1000).
#[no_mangle]
pub extern "C" fn sm_bucket_of(freq: u64) -> u32 {
    bucket_index(freq) as u32
}

/// Static label of the frequency bucket.
#[no_mangle]
pub extern "C" fn sm_bucket_label(freq: u64) -> *const c_char {
    BUCKET_LABELS[bucket_index(freq)].as_ptr()
}
