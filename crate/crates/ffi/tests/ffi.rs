use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use lexbias::baseline::{train, TrainConfig};
use lexbias::BiasLabel;
use lexbias_ffi::*;

fn cstr(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> String {
    let p = lexbias_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_string()
}

fn prompt_pool() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/golden/prompt_pool.csv")
}

#[test]
fn metrics_match_core() {
    let mut m = 0.0;
    assert_eq!(unsafe { lexbias_mcc(3, 2, 1, 1, &mut m) }, LexbiasStatus::Ok);
    assert!((m - 5.0 / 12.0).abs() < 1e-12);
    let (mut stat, mut p) = (0.0, 0.0);
    assert_eq!(unsafe { lexbias_mcnemar(2, 10, &mut stat, &mut p) }, LexbiasStatus::Ok);
    assert!((p - 158.0 / 4096.0).abs() < 1e-9);
    assert_eq!(unsafe { lexbias_mcnemar(0, 0, &mut stat, &mut p) }, LexbiasStatus::Domain);
    assert!(last_error().contains("kind=NoDisagreements"), "{}", last_error());
}

#[test]
fn parse_label_codes() {
    let mut label = -1;
    for (text, want) in [
        ("The answer is NOT BIASED.", LEXBIAS_LABEL_NOT_BIASED),
        ("The answer is BIASED.", LEXBIAS_LABEL_BIASED),
        ("no idea", LEXBIAS_LABEL_INCONCLUSIVE),
    ] {
        let s = cstr(text);
        assert_eq!(unsafe { lexbias_parse_label(s.as_ptr(), &mut label) }, LexbiasStatus::Ok);
        assert_eq!(label, want);
    }
    assert!(lexbias_last_error().is_null());
}

#[test]
fn null_and_utf8_errors() {
    let mut label = 0;
    assert_eq!(unsafe { lexbias_parse_label(ptr::null(), &mut label) }, LexbiasStatus::NullArgument);
    assert!(last_error().contains("response"));
    let s = cstr("BIASED");
    assert_eq!(unsafe { lexbias_parse_label(s.as_ptr(), ptr::null_mut()) }, LexbiasStatus::NullArgument);
    let bad = [0xffu8, 0xfe, 0];
    assert_eq!(
        unsafe { lexbias_parse_label(bad.as_ptr().cast(), &mut label) },
        LexbiasStatus::InvalidUtf8
    );
    unsafe { lexbias_string_free(ptr::null_mut()) };
    unsafe { lexbias_pool_free(ptr::null_mut()) };
    unsafe { lexbias_model_free(ptr::null_mut()) };
    assert_eq!(unsafe { lexbias_pool_len(ptr::null()) }, 0);
}

#[test]
fn pool_renders_retrieved_prompt() {
    let path = cstr(prompt_pool().to_str().unwrap());
    let mut pool = ptr::null_mut();
    assert_eq!(unsafe { lexbias_pool_load(path.as_ptr(), 128, 0, &mut pool) }, LexbiasStatus::Ok);
    assert_eq!(unsafe { lexbias_pool_len(pool) }, 12);

    let target = cstr("The reckless mayor torched the budget.");
    let settings = cstr("4-shot-exp");
    let mut out = ptr::null_mut();
    assert_eq!(
        unsafe { lexbias_pool_render(pool, target.as_ptr(), settings.as_ptr(), &mut out) },
        LexbiasStatus::Ok
    );
    let text = unsafe { CStr::from_ptr(out) }.to_str().unwrap().to_string();
    unsafe { lexbias_string_free(out) };
    assert_eq!(text.matches("Instruction: '").count(), 5);
    assert!(text.ends_with("Output: Let's think step by step."), "{text}");

    let bad = cstr("3-shot");
    assert_eq!(
        unsafe { lexbias_pool_render(pool, target.as_ptr(), bad.as_ptr(), &mut out) },
        LexbiasStatus::InvalidArgument
    );
    unsafe { lexbias_pool_free(pool) };
}

#[test]
fn pool_load_reports_io_errors() {
    let path = cstr("/nonexistent/pool.csv");
    let mut pool = ptr::null_mut();
    assert_eq!(unsafe { lexbias_pool_load(path.as_ptr(), 16, 0, &mut pool) }, LexbiasStatus::Io);
    assert!(pool.is_null());
    assert!(last_error().starts_with("module=io kind=Io"));
    let ok = cstr(prompt_pool().to_str().unwrap());
    assert_eq!(unsafe { lexbias_pool_load(ok.as_ptr(), 0, 0, &mut pool) }, LexbiasStatus::InvalidArgument);
}

#[test]
fn model_round_trip() {
    let data = [
        ("the reckless outrageous plan", BiasLabel::Biased),
        ("a disgraceful vicious attack", BiasLabel::Biased),
        ("the council published the plan", BiasLabel::NotBiased),
        ("officials announced the schedule", BiasLabel::NotBiased),
    ];
    let model = train(&data, &TrainConfig::default()).unwrap().model;
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("model.bin");
    model.save(&file).unwrap();

    let path = cstr(file.to_str().unwrap());
    let mut handle = ptr::null_mut();
    assert_eq!(unsafe { lexbias_model_load(path.as_ptr(), &mut handle) }, LexbiasStatus::Ok);
    for (text, _) in data {
        let s = cstr(text);
        let (mut label, mut prob) = (-1, -1.0);
        assert_eq!(
            unsafe { lexbias_model_predict(handle, s.as_ptr(), &mut label, &mut prob) },
            LexbiasStatus::Ok
        );
        let (want_p, want_l) = model.predict(text);
        assert_eq!(prob, want_p);
        assert_eq!(label, if want_l.is_biased() { LEXBIAS_LABEL_BIASED } else { LEXBIAS_LABEL_NOT_BIASED });
    }
    let s = cstr("anything");
    let mut label = -1;
    assert_eq!(
        unsafe { lexbias_model_predict(handle, s.as_ptr(), &mut label, ptr::null_mut()) },
        LexbiasStatus::Ok
    );
    unsafe { lexbias_model_free(handle) };

    std::fs::write(&file, b"garbage").unwrap();
    assert_eq!(unsafe { lexbias_model_load(path.as_ptr(), &mut handle) }, LexbiasStatus::Domain);
}

#[test]
fn version_matches_package() {
    let v = unsafe { CStr::from_ptr(lexbias_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn errors_are_thread_local() {
    let mut label = 0;
    assert_eq!(unsafe { lexbias_parse_label(ptr::null(), &mut label) }, LexbiasStatus::NullArgument);
    std::thread::spawn(|| assert!(lexbias_last_error().is_null())).join().unwrap();
    assert!(!lexbias_last_error().is_null());
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("include/lexbias.h")).unwrap();
    for name in [
        "lexbias_last_error",
        "lexbias_version",
        "lexbias_string_free",
        "lexbias_mcc",
        "lexbias_mcnemar",
        "lexbias_parse_label",
        "lexbias_pool_load",
        "lexbias_pool_len",
        "lexbias_pool_render",
        "lexbias_pool_free",
        "lexbias_model_load",
        "lexbias_model_predict",
        "lexbias_model_free",
        "typedef struct LexbiasPool LexbiasPool",
        "typedef struct LexbiasModel LexbiasModel",
        "LEXBIAS_STATUS_PANIC = 7",
    ] {
        assert!(header.contains(name), "header lacks {name}");
    }
}

/// Compiles the C program against the generated header and the shared
/// library built alongside this test.
#[test]
fn c_program_links_and_runs() {
    let exe = std::env::current_exe().unwrap();
    let lib_dir = exe.parent().and_then(Path::parent).unwrap().to_path_buf();
    assert!(lib_dir.join("liblexbias_ffi.so").exists(), "shared library missing in {}", lib_dir.display());
    let crate_dir = Path::new(env!("CARGO_MANIFEST_DIR"));
    let tmp = tempfile::tempdir().unwrap();
    let bin = tmp.path().join("c_abi");
    let status = Command::new("cc")
        .arg(crate_dir.join("tests/c_abi.c"))
        .arg("-I")
        .arg(crate_dir.join("include"))
        .arg("-L")
        .arg(&lib_dir)
        .arg("-llexbias_ffi")
        .arg("-o")
        .arg(&bin)
        .status()
        .expect("C compiler available");
    assert!(status.success());
    let out = Command::new(&bin)
        .arg(prompt_pool())
        .env("LD_LIBRARY_PATH", &lib_dir)
        .output()
        .unwrap();
    assert!(out.status.success(), "exit {:?}", out.status.code());
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), env!("CARGO_PKG_VERSION"));
}
