use std::ffi::{c_char, CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use wordspot::synth::{render_text, SyntheticPage};
use wordspot::{binary_to_gray, write_gray};
use wordspot_ffi::*;

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> String {
    let p = ws_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn page() -> (SyntheticPage, Vec<u8>) {
    let page = render_text(&["the transformation of shape", "keyword spotting"], 60, 30).unwrap();
    let bytes = write_gray(&binary_to_gray(&page.image));
    (page, bytes)
}

struct Engine(*mut WsEngine);

impl Drop for Engine {
    fn drop(&mut self) {
        unsafe { ws_engine_free(self.0) }
    }
}

fn engine_with_page(bytes: &[u8]) -> Engine {
    let mut e = ptr::null_mut();
    unsafe {
        assert_eq!(ws_engine_new(0, &mut e), WsStatus::Ok);
        let id = c("scan");
        assert_eq!(ws_engine_add_page(e, id.as_ptr(), ptr::null(), bytes.as_ptr(), bytes.len()), WsStatus::Ok);
    }
    Engine(e)
}

fn search(e: &Engine, q: &str) -> (WsStatus, Vec<(String, WsMatch)>) {
    let q = c(q);
    let mut r = ptr::null_mut();
    let status = unsafe { ws_engine_search(e.0, q.as_ptr(), -1.0, 0, &mut r) };
    let mut out = Vec::new();
    unsafe {
        for i in 0..ws_results_len(r) {
            let mut m = WsMatch::default();
            assert_eq!(ws_results_get(r, i, &mut m), WsStatus::Ok);
            let doc = CStr::from_ptr(ws_results_doc_id(r, i)).to_string_lossy().into_owned();
            out.push((doc, m));
        }
        assert!(ws_results_doc_id(r, ws_results_len(r)).is_null());
        ws_results_free(r);
    }
    (status, out)
}

#[test]
fn query_codes() {
    let mut out: *mut c_char = ptr::null_mut();
    unsafe {
        assert_eq!(ws_query_to_wst(c("the").as_ptr(), &mut out), WsStatus::Ok);
        assert_eq!(CStr::from_ptr(out).to_str().unwrap(), "AAxx");
        ws_string_free(out);
        assert_eq!(ws_query_to_wst(c("a1").as_ptr(), &mut out), WsStatus::UnsupportedQuery);
    }
    assert!(last_error().contains("'1'"));
}

#[test]
fn edit_distance() {
    let mut d = 0usize;
    unsafe {
        assert_eq!(ws_levenshtein(c("AxxA").as_ptr(), c("AxA").as_ptr(), &mut d), WsStatus::Ok);
        assert_eq!(d, 1);
        assert_eq!(ws_levenshtein(ptr::null(), c("x").as_ptr(), &mut d), WsStatus::NullPointer);
    }
}

#[test]
fn build_and_search() {
    let (page, bytes) = page();
    let e = engine_with_page(&bytes);
    assert_eq!(search(&e, "shape").0, WsStatus::NoIndex);
    assert_eq!(unsafe { ws_engine_build(e.0) }, WsStatus::Ok);
    let mut n = 0;
    assert_eq!(unsafe { ws_engine_word_count(e.0, &mut n) }, WsStatus::Ok);
    assert_eq!(n, 6);

    let (status, hits) = search(&e, "transformation");
    assert_eq!(status, WsStatus::Ok);
    let want = page.words.iter().find(|w| w.text == "transformation").unwrap().bbox;
    let (doc, m) = &hits[0];
    assert_eq!(doc, "scan");
    assert_eq!((m.distance, m.line_idx, m.word_idx), (0, 0, 1));
    assert_eq!([m.x1, m.y1, m.x2, m.y2].map(|v| v as usize), [want.x1, want.y1, want.x2, want.y2]);
}

#[test]
fn save_and_reload_index() {
    let (_, bytes) = page();
    let e = engine_with_page(&bytes);
    let mut text: *mut c_char = ptr::null_mut();
    unsafe {
        assert_eq!(ws_engine_build(e.0), WsStatus::Ok);
        assert_eq!(ws_engine_save_index(e.0, &mut text), WsStatus::Ok);
        let saved = CStr::from_ptr(text).to_str().unwrap().to_string();
        assert!(saved.starts_with("WSIDX 1\nK 60\nDOC scan "));

        // fresh engine with the same page in memory and the saved index
        let other = engine_with_page(&bytes);
        assert_eq!(ws_engine_load_index(other.0, text), WsStatus::Ok);
        ws_string_free(text);
        assert_eq!(search(&other, "keyword").1, search(&e, "keyword").1);

        assert_eq!(ws_engine_load_index(other.0, c("WSIDX 1\nK x\n").as_ptr()), WsStatus::ParseError);
        assert!(last_error().contains("line 2"));
    }
}

#[test]
fn bad_inputs() {
    let mut e = ptr::null_mut();
    unsafe {
        assert_eq!(ws_engine_new(0, ptr::null_mut()), WsStatus::NullPointer);
        assert_eq!(ws_engine_new(0, &mut e), WsStatus::Ok);
        let e = Engine(e);
        let junk = b"P5\n2 2\n255\n\x00";
        let id = c("x");
        assert_eq!(ws_engine_add_page(e.0, id.as_ptr(), ptr::null(), junk.as_ptr(), junk.len()), WsStatus::ParseError);
        assert!(last_error().contains("byte"));
        let (_, bytes) = page();
        assert_eq!(ws_engine_add_page(e.0, id.as_ptr(), ptr::null(), bytes.as_ptr(), bytes.len()), WsStatus::Ok);
        assert!(ws_last_error().is_null());
        assert_eq!(
            ws_engine_add_page(e.0, id.as_ptr(), ptr::null(), bytes.as_ptr(), bytes.len()),
            WsStatus::InvalidArgument
        );
        assert_eq!(ws_engine_build(ptr::null_mut()), WsStatus::NullPointer);
        assert_eq!(ws_results_len(ptr::null()), 0);
        ws_engine_free(ptr::null_mut());
        ws_results_free(ptr::null_mut());
        ws_string_free(ptr::null_mut());
    }
}

fn header() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("include/wordspot.h")
}

#[test]
fn header_declares_every_export() {
    let h = std::fs::read_to_string(header()).unwrap();
    for name in [
        "ws_last_error",
        "ws_string_free",
        "ws_query_to_wst",
        "ws_levenshtein",
        "ws_engine_new",
        "ws_engine_free",
        "ws_engine_add_page",
        "ws_engine_build",
        "ws_engine_word_count",
        "ws_engine_load_index",
        "ws_engine_save_index",
        "ws_engine_search",
        "ws_results_len",
        "ws_results_get",
        "ws_results_doc_id",
        "ws_results_free",
    ] {
        assert!(h.contains(&format!(" {name}(")) || h.contains(&format!("*{name}(")), "{name} missing from header");
    }
    assert!(h.contains("typedef struct WsEngine WsEngine;"));
    assert!(h.contains("WS_STATUS_UNSUPPORTED_QUERY = 4"));
}

/// Compile a C program against the header and static library.
#[test]
fn c_program_links_and_runs() {
    let Some(cc) = ["cc", "gcc", "clang"].into_iter().find(|c| Command::new(c).arg("--version").output().is_ok())
    else {
        eprintln!("no C compiler found, skipping");
        return;
    };
    // tests run from target/<profile>/deps
    let profile_dir = std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf();
    let lib = profile_dir.join("libwordspot_ffi.a");
    assert!(lib.exists(), "{} not built", lib.display());

    let dir = tempfile::tempdir().unwrap();
    let exe = dir.path().join("smoke");
    let src = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/c/smoke.c");
    let status = Command::new(cc)
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(header().parent().unwrap())
        .arg(&src)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success());

    let (page, bytes) = page();
    let pgm = dir.path().join("page.pgm");
    std::fs::write(&pgm, bytes).unwrap();
    let out = Command::new(&exe).arg(&pgm).arg("transformation").output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let b = page.words.iter().find(|w| w.text == "transformation").unwrap().bbox;
    let stdout = String::from_utf8(out.stdout).unwrap();
    let mut lines = stdout.lines();
    assert_eq!(lines.next(), Some("wst AxxxxxxgxxxxxxxAxxxx"));
    assert_eq!(lines.next(), Some(format!("page 0 {} {} {} {}", b.x1, b.y1, b.x2, b.y2).as_str()));
}
