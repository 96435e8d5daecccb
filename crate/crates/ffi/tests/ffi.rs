use std::ffi::{c_char, CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use synmorph::builder::{write_meta, MetaRow};
use synmorph::pattern::Variant;
use synmorph::transforms::CheckKind;
use synmorph_ffi::*;

fn cs(s: &str) -> CString {
    CString::new(s).unwrap()
}

unsafe fn take(p: *mut c_char) -> String {
    assert!(!p.is_null());
    let s = CStr::from_ptr(p).to_str().unwrap().to_owned();
    sm_string_free(p);
    s
}

unsafe fn last_error() -> String {
    let p = sm_last_error();
    assert!(!p.is_null());
    CStr::from_ptr(p).to_string_lossy().into_owned()
}

struct Handles {
    patterns: *mut SmPatterns,
    inventory: *mut SmInventory,
}

impl Drop for Handles {
    fn drop(&mut self) {
        unsafe {
            sm_inventory_free(self.inventory);
            sm_patterns_free(self.patterns);
        }
    }
}

unsafe fn generated(seed: u64) -> Handles {
    let mut patterns = ptr::null_mut();
    assert_eq!(sm_patterns_default(&mut patterns), SmStatus::Ok);
    let corpus = cs("Die Räume seien vorhanden . The premises are available .");
    let vocab = cs("house\nHaus\n");
    let mut inventory = ptr::null_mut();
    assert_eq!(
        sm_inventory_generate(patterns, corpus.as_ptr(), vocab.as_ptr(), seed, &mut inventory),
        SmStatus::Ok
    );
    Handles { patterns, inventory }
}

#[test]
fn patterns_and_inventory_round_trip() {
    unsafe {
        let h = generated(5);
        assert_eq!(sm_patterns_len(h.patterns), 20);
        assert_eq!(sm_patterns_len(ptr::null()), 0);

        let mut tsv = ptr::null_mut();
        assert_eq!(sm_inventory_to_tsv(h.inventory, h.patterns, &mut tsv), SmStatus::Ok);
        let tsv = take(tsv);
        assert!(tsv.contains("compound_1"));

        let mut again = ptr::null_mut();
        let c = cs(&tsv);
        assert_eq!(sm_inventory_parse(c.as_ptr(), &mut again), SmStatus::Ok);
        let mut tsv2 = ptr::null_mut();
        assert_eq!(sm_inventory_to_tsv(again, h.patterns, &mut tsv2), SmStatus::Ok);
        assert_eq!(take(tsv2), tsv);
        sm_inventory_free(again);

        let other = generated(5);
        let mut tsv3 = ptr::null_mut();
        assert_eq!(sm_inventory_to_tsv(other.inventory, other.patterns, &mut tsv3), SmStatus::Ok);
        assert_eq!(take(tsv3), tsv, "same seed, same inventory");
    }
}

#[test]
fn errors_carry_codes_and_messages() {
    unsafe {
        let mut p = ptr::null_mut();
        assert_eq!(sm_patterns_parse(ptr::null(), &mut p), SmStatus::NullPointer);
        assert!(last_error().contains("tsv"));
        assert!(p.is_null());

        let bad = cs("compound_9\tnonsense\n");
        assert_eq!(sm_patterns_parse(bad.as_ptr(), &mut p), SmStatus::Parse);
        assert!(p.is_null());

        let invalid = [0xffu8 as c_char, 0];
        assert_eq!(sm_inventory_parse(invalid.as_ptr(), &mut ptr::null_mut()), SmStatus::InvalidUtf8);

        let base = cs("tree");
        let mut out = ptr::null_mut();
        assert_eq!(sm_apply_reduplication(base.as_ptr(), 7, &mut out), SmStatus::InvalidArgument);
        assert!(out.is_null());

        // Nothing to free: all no-ops.
        sm_patterns_free(ptr::null_mut());
        sm_inventory_free(ptr::null_mut());
        sm_evaluator_free(ptr::null_mut());
        sm_string_free(ptr::null_mut());
    }
}

#[test]
fn string_rules() {
    unsafe {
        let apply = |f: &dyn Fn(*mut *mut c_char) -> SmStatus| {
            let mut out = ptr::null_mut();
            let st = f(&mut out);
            (st, if st == SmStatus::Ok { Some(take(out)) } else { None })
        };
        let (räume, sona) = (cs("Räume"), cs("Sona"));
        assert_eq!(
            apply(&|o| sm_apply_compound(räume.as_ptr(), sona.as_ptr(), o)).1.as_deref(),
            Some("Sonaräume")
        );
        let (base, pre, suf) = (cs("wildlife"), cs("wofi"), cs("fuge"));
        assert_eq!(
            apply(&|o| sm_apply_circumfix(base.as_ptr(), pre.as_ptr(), suf.as_ptr(), SmSide::Target as u32, o))
                .1
                .as_deref(),
            Some("wofiwildlifefuge")
        );
        let (kid, infix) = (cs("kidnapping"), cs("numime"));
        assert_eq!(
            apply(&|o| sm_apply_infix(kid.as_ptr(), infix.as_ptr(), o)).1.as_deref(),
            Some("knumimeidnapping")
        );
        let (vowelless, triple) = (cs("brr"), cs("b-p-r"));
        assert_eq!(
            apply(&|o| sm_apply_vowel_harmony(vowelless.as_ptr(), triple.as_ptr(), o)).0,
            SmStatus::NotApplicable
        );
        let bad = cs("bp");
        assert_eq!(
            apply(&|o| sm_apply_vowel_harmony(kid.as_ptr(), bad.as_ptr(), o)).0,
            SmStatus::InvalidArgument
        );
        let tree = cs("tree");
        assert_eq!(
            apply(&|o| sm_apply_reduplication(tree.as_ptr(), SmRedupMode::Full as u32, o)).1.as_deref(),
            Some("treetree")
        );
    }
}

#[test]
fn buckets_and_version() {
    let label = |f| unsafe { CStr::from_ptr(sm_bucket_label(f)).to_str().unwrap() };
    assert_eq!(label(0), "zero-shot");
    assert_eq!(label(5), "1-5");
    assert_eq!(label(1000), "501-1000");
    assert_eq!(label(u64::MAX), ">1000");
    assert_eq!(sm_bucket_of(0), 0);
    assert_eq!(sm_bucket_of(1001), 7);
    let v = unsafe { CStr::from_ptr(sm_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

fn compound_row(isolated: &str) -> MetaRow {
    MetaRow {
        line_no: 1,
        pattern_id: "compound_1".into(),
        variant: Variant::Surface,
        check_kind: CheckKind::IsolatedToken,
        morpheme_parts: vec![isolated.to_string()],
        triple: None,
        base_src: "Räume".into(),
        base_trg: "premises".into(),
        base_train_freq: 3,
    }
}

#[test]
fn evaluator_judges_lines_and_reports() {
    unsafe {
        let h = generated(11);
        let mut tsv = ptr::null_mut();
        assert_eq!(sm_inventory_to_tsv(h.inventory, h.patterns, &mut tsv), SmStatus::Ok);
        let tsv = take(tsv);
        let inv = synmorph::morphemes::parse_inventory(&tsv).unwrap();
        let isolated = inv.get("compound_1").unwrap().isolated.clone();

        let mut ev = ptr::null_mut();
        assert_eq!(sm_evaluator_new(h.patterns, h.inventory, &mut ev), SmStatus::Ok);

        let meta = cs(&write_meta(&[compound_row(&isolated)]));
        let judge = |out: &str| {
            let out = cs(out);
            let mut correct = false;
            let mut code = ptr::null_mut();
            assert_eq!(sm_evaluator_line(ev, meta.as_ptr(), out.as_ptr(), &mut correct, &mut code), SmStatus::Ok);
            (correct, if code.is_null() { None } else { Some(take(code)) })
        };
        assert_eq!(judge(&format!("The {isolated} premises are available .")), (true, None));
        assert_eq!(judge("The premises are available ."), (false, Some("M1".to_string())));

        let outputs = cs(&format!("The {isolated} premises are available .\n"));
        let mut report = ptr::null_mut();
        assert_eq!(sm_evaluator_report(ev, meta.as_ptr(), outputs.as_ptr(), &mut report), SmStatus::Ok);
        let report = take(report);
        assert!(report.lines().any(|l| l.starts_with("compound_1\t") && l.ends_with("\t1.0000")), "{report}");

        let two = cs("a\nb\n");
        let mut r = ptr::null_mut();
        assert_eq!(sm_evaluator_report(ev, meta.as_ptr(), two.as_ptr(), &mut r), SmStatus::LineCountMismatch);
        assert!(r.is_null());

        sm_evaluator_free(ev);
    }
}

#[test]
fn header_declares_every_export() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let header = std::fs::read_to_string(dir.join("include/synmorph.h")).unwrap();
    let src = std::fs::read_to_string(dir.join("src/lib.rs")).unwrap();
    let exports: Vec<&str> = src
        .lines()
        .filter_map(|l| l.split("extern \"C\" fn ").nth(1))
        .map(|rest| rest.split('(').next().unwrap())
        .collect();
    assert!(exports.len() > 15);
    for name in exports {
        assert!(header.contains(&format!("{name}(")), "{name} missing from header");
    }
    for item in ["typedef struct SmPatterns SmPatterns;", "SM_STATUS_OK = 0", "SM_SIDE_TARGET = 1"] {
        assert!(header.contains(item), "{item}");
    }
}

/// Compiles and runs a small C program against the static library, when a C
/// compiler is around.
#[test]
fn c_program_links_against_staticlib() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().and_then(|d| d.parent()).unwrap();
    let lib = profile_dir.join("libsynmorph_ffi.a");
    if !lib.exists() || Command::new("cc").arg("--version").output().is_err() {
        eprintln!("skipping: no static library or C compiler");
        return;
    }
    let tmp = tempfile::tempdir().unwrap();
    let c_src = tmp.path().join("smoke.c");
    std::fs::write(
        &c_src,
        r#"#include <stdio.h>
#include <string.h>
#include "synmorph.h"

int main(void) {
    SmPatterns *p = NULL;
    if (sm_patterns_default(&p) != SM_STATUS_OK) return 1;
    SmInventory *inv = NULL;
    if (sm_inventory_generate(p, "the house", NULL, 3, &inv) != SM_STATUS_OK) return 2;
    char *out = NULL;
    if (sm_apply_infix("kidnapping", "numime", &out) != SM_STATUS_OK) return 3;
    if (strcmp(out, "knumimeidnapping") != 0) return 4;
    sm_string_free(out);
    if (sm_apply_infix("a", "numime", &out) != SM_STATUS_NOT_APPLICABLE) return 5;
    if (sm_last_error() == NULL) return 6;
    printf("%zu %s\n", sm_patterns_len(p), sm_bucket_label(42));
    sm_inventory_free(inv);
    sm_patterns_free(p);
    return 0;
}
"#,
    )
    .unwrap();
    let bin = tmp.path().join("smoke");
    let status = Command::new("cc")
        .arg(&c_src)
        .arg("-I")
        .arg(dir.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .unwrap();
    assert!(status.success(), "C compile failed");
    let out = Command::new(&bin).output().unwrap();
    assert!(out.status.success(), "exit {:?}", out.status.code());
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "20 16-50\n");
}
